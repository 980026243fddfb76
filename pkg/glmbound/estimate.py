"""
Maximum-likelihood estimators: the closed-form linear MLE
`L^-1 (M^T M)^-1 M^T x` and the generic GLM MLE by iteratively
reweighted least squares, plus projection onto the unit ball.
"""
import logging

import numpy as np

from glmbound.base.data_structures import DesignSpec, EstimatorConfig
from glmbound.base.exceptions import (
    DomainError,
    EstimationError,
    PreconditionError,
)
from glmbound.base.family import GlmModel

logger = logging.getLogger(__name__)

#: Ridge added to a singular weighted Gram matrix, relative to its mean
#: diagonal entry
RIDGE_JITTER = 1e-10
#: Relative log-likelihood changes below this are rounding noise
LIKELIHOOD_ROUNDING = 8 * np.finfo(float).eps


def project_ball(v: np.ndarray) -> np.ndarray:
    """
    Euclidean projection onto the unit ball, applied along the last axis.

    Parameters
    ----------
    v:
        Vector, or a stack of vectors

    Returns
    -------
    `v` if `||v|| <= 1`, else `v / ||v||`
    """
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise DomainError('Cannot project a non-finite vector')
    norms = np.linalg.norm(v, axis=-1, keepdims=True)
    return v / np.maximum(norms, 1.0)


def linear_mle(
    design: DesignSpec, curvature_bound: float, x: np.ndarray
) -> np.ndarray:
    """
    The maximum-likelihood estimate of the Gaussian linear model,
    `L^-1 (M^T M)^-1 M^T x`, computed through the SVD as
    `L^-1 V S^-2 V^T M^T x`.

    Parameters
    ----------
    design:
        A full-rank design

    curvature_bound:
        The curvature bound `L`

    x:
        Observations, an n-vector or a `(k, n)` stack of them

    Returns
    -------
    The estimate, of shape `(d,)` or `(k, d)`
    """
    if not design.is_full_rank:
        raise PreconditionError(
            f'The linear MLE needs a full-rank design, got rank '
            f'{design.rank} < {design.d}'
        )
    if not curvature_bound > 0:
        raise DomainError(
            f'Curvature bound must be positive, got {curvature_bound}'
        )
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != design.n:
        raise DomainError(
            f'Expected {design.n} observations, got {x.shape[-1]}'
        )

    v = design.right_factor
    inverse_squares = design.singular_values[: design.d] ** -2.0
    # (M^T M)^-1 M^T as an n x d operator acting on rows of x
    operator = design.entries @ (v * inverse_squares) @ v.T
    return x @ operator / curvature_bound


def irls_mle(
    model: GlmModel, x: np.ndarray, config: EstimatorConfig
) -> np.ndarray:
    """
    GLM maximum likelihood by Fisher scoring,

        theta <- theta + step (M^T W M)^-1 M^T (x - Phi'(M theta))

    with `W = diag(Phi''(M theta))`, started at `theta = 0`. Each step
    starts at `config.step_damping` and is halved until the
    log-likelihood does not decrease beyond rounding, so the likelihood
    is nondecreasing over accepted iterations. Iteration stops once
    `||M^T (x - Phi'(M theta))|| <= grad_tol * (1 + ||x||)`.

    Parameters
    ----------
    model:
        A model with full-rank design

    x:
        The n observations

    config:
        Estimator settings

    Returns
    -------
    The estimate, projected onto the unit ball if
    `config.project_to_ball`
    """
    design = model.design
    if not design.is_full_rank:
        raise PreconditionError(
            f'IRLS needs a full-rank design, got rank {design.rank} < '
            f'{design.d}'
        )
    x = np.asarray(x, dtype=float)
    if x.shape != (design.n,):
        raise DomainError(
            f'Expected {design.n} observations, got shape {x.shape}'
        )
    if not np.all(np.isfinite(x)):
        raise DomainError('Observations must be finite')

    entries = design.entries
    family = model.family
    theta = np.zeros(design.d)
    log_likelihood = model.log_likelihood(theta, x)
    if not np.isfinite(log_likelihood):
        raise EstimationError('Log-likelihood is not finite at the origin')
    tolerance = config.grad_tol * (1 + np.linalg.norm(x))

    for iteration in range(config.max_iters):
        eta = entries @ theta
        gradient = (x - family.cumulant_d1(eta)) @ entries
        if np.linalg.norm(gradient) <= tolerance:
            logger.debug('IRLS converged after %d iterations', iteration)
            break

        weights = family.cumulant_d2(eta)
        gram = entries.T @ (weights[:, None] * entries)
        step = _solve(gram, gradient)

        floor = log_likelihood - LIKELIHOOD_ROUNDING * abs(log_likelihood)
        length = config.step_damping
        for halving in range(config.max_halvings + 1):
            candidate = theta + length * step
            candidate_log_likelihood = model.log_likelihood(candidate, x)
            if (
                np.isfinite(candidate_log_likelihood)
                and candidate_log_likelihood >= floor
            ):
                break
            length /= 2
        else:
            # No ascent along the scoring direction, theta is optimal to
            # machine precision
            logger.debug(
                'IRLS step rejected after %d halvings, stopping at '
                'iteration %d',
                config.max_halvings,
                iteration,
            )
            break

        if halving:
            logger.debug('IRLS step halved %d times', halving)
        theta = candidate
        log_likelihood = candidate_log_likelihood
    else:
        logger.warning(
            'IRLS reached max_iters=%d before the score tolerance',
            config.max_iters,
        )

    if not np.all(np.isfinite(theta)):
        raise EstimationError('IRLS produced a non-finite estimate')
    if config.project_to_ball:
        theta = project_ball(theta)
    return theta


def estimate(
    model: GlmModel, x: np.ndarray, config: EstimatorConfig
) -> np.ndarray:
    """
    Runs the estimator selected by `config.kind`.

    Parameters
    ----------
    model:
        The model

    x:
        Observations, an n-vector. The `linear_mle` and `zero` kinds
        also accept a `(k, n)` stack.

    config:
        Estimator settings

    Returns
    -------
    The estimate
    """
    x = np.asarray(x, dtype=float)
    if config.kind == 'zero':
        return np.zeros(x.shape[:-1] + (model.design.d,))

    if config.kind == 'linear_mle':
        theta = linear_mle(model.design, model.family.curvature_bound, x)
        if config.project_to_ball:
            theta = project_ball(theta)
        return theta

    if x.ndim == 1:
        return irls_mle(model, x, config)
    return np.stack([irls_mle(model, row, config) for row in x])


def _solve(gram: np.ndarray, gradient: np.ndarray) -> np.ndarray:
    """
    Solves the scoring system, retrying once with a small ridge.
    """
    try:
        step = np.linalg.solve(gram, gradient)
        if np.all(np.isfinite(step)):
            return step
    except np.linalg.LinAlgError:
        pass

    ridge = RIDGE_JITTER * max(
        float(np.trace(gram)) / gram.shape[0], np.finfo(float).tiny
    )
    logger.debug('Weighted Gram matrix is singular, adding ridge %g', ridge)
    try:
        step = np.linalg.solve(gram + ridge * np.eye(gram.shape[0]), gradient)
    except np.linalg.LinAlgError:
        raise EstimationError('Weighted Gram matrix is singular') from None
    if not np.all(np.isfinite(step)):
        raise EstimationError('Weighted Gram matrix is singular')
    return step
