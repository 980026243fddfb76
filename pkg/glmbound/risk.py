"""
Monte Carlo risk machinery: risk at a fixed parameter, approximate
worst-case risk over the unit ball, Bayes risk under a box prior and the
favorability report comparing measured risks with the lower bound.

Trial `i` draws its randomness from the counter-mode substream
`(seed, i)`. Trials run in fixed-size blocks on a thread pool and block
sums are reduced in block order, so results are bit-identical for any
number of threads.
"""
import dataclasses
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np

from glmbound.base.data_structures import (
    BoxPrior,
    DesignSpec,
    EstimatorConfig,
    FavorabilityRow,
    RiskEstimate,
)
from glmbound.base.exceptions import (
    DomainError,
    EstimationError,
    PreconditionError,
)
from glmbound.base.family import GlmFamily, GlmModel, draw_uniforms
from glmbound.bound import theorem1_bound
from glmbound.design import reparametrize
from glmbound.estimate import estimate
from glmbound.families import Gaussian
from glmbound.utils.functions import default_thread_count, substream

logger = logging.getLogger(__name__)

#: Default number of Monte Carlo trials
DEFAULT_TRIALS = 100_000
#: Smallest accepted number of trials
MIN_TRIALS = 100
#: Trials per block, fixed so that reductions do not depend on threads
BLOCK_SIZE = 2048
#: Largest tolerated fraction of failed estimator trials
FAILURE_CAP = 0.01
#: Stream identifier of the random worst-case search points
_SEARCH_STREAM = 1

# (sum of squared errors, sum of their squares, successes, failures)
_BlockSums = Tuple[float, float, int, int]


def risk_at(
    model: GlmModel,
    theta: np.ndarray,
    estimator: EstimatorConfig,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    threads: Optional[int] = None,
) -> RiskEstimate:
    """
    Estimates `E ||theta - theta_hat(X)||^2` at a fixed parameter.

    Parameters
    ----------
    model:
        The model

    theta:
        The parameter, inside the unit ball

    estimator:
        Estimator settings

    trials:
        Number of trials, at least `100`. Defaults to `100_000`.

    seed:
        Master seed

    threads:
        Number of worker threads, defaults to
        `glmbound.utils.functions.default_thread_count()`. Does not
        change the result.

    Returns
    -------
    The estimate
    """
    theta = model.check_theta(theta)
    return _simulate(model, estimator, trials, seed, threads, theta=theta)


def worst_case_risk(
    model: GlmModel,
    estimator: EstimatorConfig,
    budget: int,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    threads: Optional[int] = None,
) -> RiskEstimate:
    """
    Searches for the largest risk over a candidate set of parameters:
    the origin, the canonical boundary points `+-e_i`, the singular
    directions `+-v_i` and `budget` random boundary points. Every
    candidate is evaluated with the same seed. The result is a lower
    bound on the supremum over the ball.

    Parameters
    ----------
    model:
        The model

    estimator:
        Estimator settings

    budget:
        Number of random boundary points, at least `d`

    trials:
        Trials per candidate, at least `100`. Defaults to `100_000`.

    seed:
        Master seed, also seeding the random boundary points

    threads:
        Number of worker threads, see `risk_at`.

    Returns
    -------
    The largest estimate, with `theta_at_max` set
    """
    d = model.design.d
    if budget < d:
        raise PreconditionError(
            f'The search budget must be at least d={d}, got {budget}'
        )

    candidates = _search_candidates(model.design, budget, seed)
    logger.info('Evaluating %d worst-case candidates', len(candidates))

    best: Optional[RiskEstimate] = None
    best_theta = candidates[0]
    for theta in candidates:
        result = _simulate(model, estimator, trials, seed, threads, theta)
        if best is None or result.mean_sq_error > best.mean_sq_error:
            best, best_theta = result, theta

    return dataclasses.replace(best, theta_at_max=best_theta)


def bayes_risk(
    model: GlmModel,
    prior: BoxPrior,
    estimator: EstimatorConfig,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    threads: Optional[int] = None,
) -> RiskEstimate:
    """
    Estimates the Bayes risk under a box prior. Each trial draws the
    parameter from the prior, then the observations given it.

    Parameters
    ----------
    model:
        The model, in the coordinates of the prior

    prior:
        A box prior supported in the unit ball

    estimator:
        Estimator settings

    trials:
        Number of trials, at least `100`. Defaults to `100_000`.

    seed:
        Master seed

    threads:
        Number of worker threads, see `risk_at`.

    Returns
    -------
    The estimate
    """
    if prior.d != model.design.d:
        raise PreconditionError(
            f'Prior has {prior.d} coordinates, the design {model.design.d}'
        )
    return _simulate(model, estimator, trials, seed, threads, prior=prior)


def favorability_report(
    design: DesignSpec,
    families: Sequence[GlmFamily],
    estimators: Optional[Sequence[EstimatorConfig]] = None,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    budget: Optional[int] = None,
    threads: Optional[int] = None,
) -> List[FavorabilityRow]:
    """
    Compares each family's measured risks with the lower bound and with
    the Gaussian linear model of the same curvature bound and scale.

    Parameters
    ----------
    design:
        The design

    families:
        Families to compare, each certified on the design

    estimators:
        One estimator per family. By default the linear MLE for
        Gaussian families, IRLS otherwise and the zero estimator for a
        rank-deficient design.

    trials:
        Trials per simulation, defaults to `100_000`.

    seed:
        Master seed shared by every simulation

    budget:
        Random worst-case candidates, defaults to `d`.

    threads:
        Number of worker threads, see `risk_at`.

    Returns
    -------
    One row per family
    """
    if len(families) == 0:
        raise PreconditionError('At least one family is needed')
    if estimators is None:
        estimators = [_default_estimator(design, f) for f in families]
    if len(estimators) != len(families):
        raise PreconditionError('Expected one estimator per family')
    budget = design.d if budget is None else budget

    rotated = reparametrize(design)
    rows = []
    for family, estimator in zip(families, estimators):
        report = theorem1_bound(design, family)
        model = GlmModel(design, family)

        gaussian_risk = (
            family.scale / family.curvature_bound * design.trace_inv_gram
        )
        gaussian_empirical_risk = float('nan')
        if design.is_full_rank:
            reference = GlmModel(
                design, Gaussian(family.curvature_bound, family.scale)
            )
            gaussian_empirical_risk = risk_at(
                reference,
                np.zeros(design.d),
                EstimatorConfig('linear_mle', project_to_ball=False),
                trials,
                seed,
                threads,
            ).mean_sq_error

        row = FavorabilityRow(
            family=family.name,
            case=report.case,
            bound_value=report.bound_value,
            bayes_bound=report.bayes_bound,
            bayes_risk=bayes_risk(
                GlmModel(rotated, family),
                report.prior,
                estimator,
                trials,
                seed,
                threads,
            ),
            worst_case_risk=worst_case_risk(
                model, estimator, budget, trials, seed, threads
            ),
            gaussian_risk=gaussian_risk,
            gaussian_empirical_risk=gaussian_empirical_risk,
        )
        if not row.is_sound:
            logger.error(
                '%s worst-case risk %.6g is below the bound %.6g',
                family.name,
                row.worst_case_risk.upper,
                row.bound_value,
            )
        rows.append(row)
    return rows


def _default_estimator(
    design: DesignSpec, family: GlmFamily
) -> EstimatorConfig:
    if not design.is_full_rank:
        return EstimatorConfig('zero')
    if isinstance(family, Gaussian):
        return EstimatorConfig('linear_mle')
    return EstimatorConfig('irls_mle')


def _search_candidates(
    design: DesignSpec, budget: int, seed: int
) -> List[np.ndarray]:
    """
    The origin, `+-e_i`, `+-v_i` and random unit vectors, duplicates
    removed in order.
    """
    d = design.d
    identity = np.eye(d)
    v = design.right_factor
    rng = np.random.default_rng([seed, _SEARCH_STREAM])
    directions = rng.standard_normal((budget, d))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)

    candidates = [np.zeros(d)]
    for point in [*identity, *-identity, *v.T, *-v.T, *directions]:
        if not any(np.allclose(point, kept) for kept in candidates):
            candidates.append(point)
    return candidates


def _simulate(
    model: GlmModel,
    estimator: EstimatorConfig,
    trials: int,
    seed: int,
    threads: Optional[int],
    theta: Optional[np.ndarray] = None,
    prior: Optional[BoxPrior] = None,
) -> RiskEstimate:
    if trials < MIN_TRIALS:
        raise PreconditionError(
            f'At least {MIN_TRIALS} trials are needed, got {trials}'
        )
    if seed < 0:
        raise DomainError(f'Seed must be nonnegative, got {seed}')
    if estimator.kind != 'zero' and not model.design.is_full_rank:
        raise PreconditionError(
            f'{estimator.kind} needs a full-rank design, use the zero '
            f'estimator'
        )
    threads = default_thread_count() if threads is None else threads
    if threads < 1:
        raise DomainError(f'Thread count must be positive, got {threads}')

    def run_block(start: int) -> _BlockSums:
        return _run_block(
            model,
            estimator,
            seed,
            start,
            min(start + BLOCK_SIZE, trials),
            theta,
            prior,
        )

    starts = range(0, trials, BLOCK_SIZE)
    if threads == 1:
        block_sums = list(map(run_block, starts))
    else:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            # map yields in submission order
            block_sums = list(executor.map(run_block, starts))

    total = sum(sums[0] for sums in block_sums)
    total_squares = sum(sums[1] for sums in block_sums)
    successes = sum(sums[2] for sums in block_sums)
    failures = sum(sums[3] for sums in block_sums)

    if failures > FAILURE_CAP * trials:
        raise EstimationError(
            f'{failures} of {trials} estimator trials failed, above the '
            f'{FAILURE_CAP:.0%} cap'
        )
    if failures:
        logger.warning(
            '%d of %d estimator trials failed and were excluded',
            failures,
            trials,
        )

    return RiskEstimate(
        mean_sq_error=total / successes,
        second_moment=total_squares / successes,
        trials=successes,
        seed=seed,
        failures=failures,
    )


def _run_block(
    model: GlmModel,
    estimator: EstimatorConfig,
    seed: int,
    start: int,
    stop: int,
    theta: Optional[np.ndarray],
    prior: Optional[BoxPrior],
) -> _BlockSums:
    """
    Runs trials `start, ..., stop - 1` and sums their squared errors.
    """
    n, d = model.design.n, model.design.d
    thetas = np.empty((stop - start, d))
    uniforms = np.empty((stop - start, n))
    for row, index in enumerate(range(start, stop)):
        rng = substream(seed, index)
        # The parameter is drawn before the observations
        thetas[row] = theta if prior is None else prior.draw(rng.random(d))
        uniforms[row] = draw_uniforms(rng, n)

    x = model.sample_from_uniforms(thetas, uniforms)
    estimates = _estimate_block(model, x, estimator)
    errors = np.sum((estimates - thetas) ** 2, axis=1)
    succeeded = np.isfinite(errors)
    errors = errors[succeeded]
    return (
        float(np.sum(errors)),
        float(np.sum(errors**2)),
        int(np.count_nonzero(succeeded)),
        int(np.count_nonzero(~succeeded)),
    )


def _estimate_block(
    model: GlmModel, x: np.ndarray, estimator: EstimatorConfig
) -> np.ndarray:
    if estimator.kind != 'irls_mle':
        return estimate(model, x, estimator)

    estimates = np.empty((x.shape[0], model.design.d))
    for row, observations in enumerate(x):
        try:
            estimates[row] = estimate(model, observations, estimator)
        except EstimationError as error:
            logger.debug('Estimator failed: %s', error)
            estimates[row] = np.nan
    return estimates
