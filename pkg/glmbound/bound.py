"""
Evaluation of the nonasymptotic minimax lower bound

    inf_est sup_{||theta|| <= 1} E ||theta - est||^2
        >= constant * min(s / L * Tr((M^T M)^-1), 1)

and construction of the box priors whose Bayes risk witnesses it.
"""
import logging
import math
from typing import Sequence, Union

import numpy as np

from glmbound.base.data_structures import BoundReport, BoxPrior, DesignSpec
from glmbound.base.exceptions import DomainError, PreconditionError
from glmbound.base.family import GlmFamily
from glmbound.design import reparametrize

logger = logging.getLogger(__name__)

#: Default universal constant, `1 / (pi e^3)`
DEFAULT_CONSTANT = 1 / (math.pi * math.e**3)
#: Off-diagonal Gram entries up to this fraction of the largest diagonal
#: entry count as zero
DIAGONAL_TOLERANCE = 1e-9
#: Budget of the prior support, `sum(eps ** 2) <= 4`
SUPPORT_BUDGET = 4.0


def phi(x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """
    The function bounding mutual information under log-concave priors:
    `sqrt(x)` on `[0, 1]` and `1 + log(x) / 2` above. It is continuous,
    nondecreasing and concave.

    Parameters
    ----------
    x:
        Nonnegative number or array

    Returns
    -------
    `phi(x)`, a float for scalar input
    """
    values = np.asarray(x, dtype=float)
    if np.any(np.isnan(values)) or np.any(values < 0):
        raise DomainError('phi is only defined for nonnegative numbers')
    result = np.where(
        values <= 1,
        np.sqrt(values),
        1 + 0.5 * np.log(np.maximum(values, 1.0)),
    )
    if result.ndim == 0:
        return float(result)
    return result


def prior_payoff(epsilons: np.ndarray, weights: np.ndarray) -> float:
    """
    Computes `sum_i eps_i^2 exp(-2 phi(eps_i^2 a_i))`.

    Parameters
    ----------
    epsilons:
        Interval lengths

    weights:
        The weights `a_i`

    Returns
    -------
    The payoff
    """
    squared = np.square(epsilons)
    return float(np.sum(squared * np.exp(-2 * phi(squared * weights))))


def lemma4_construct(a: np.ndarray) -> BoxPrior:
    """
    Builds interval lengths for a positive sequence with
    `sum_i 1 / a_i > 4` such that `sum_i eps_i^2 <= 4` and the payoff
    `sum_i eps_i^2 exp(-2 phi(eps_i^2 a_i))` is at least `2 e^-2`.

    With the sequence sorted nonincreasing (ties kept in index order):

    1. if the largest `a` is at most `1/4`, put all the budget on it
       (`single_large`);
    2. otherwise let `t` be the largest count with
       `sum_{i <= t} 1 / a_(i) <= 4`. If that sum is at least `2`, set
       `eps_(i) = a_(i)^(-1/2)` for `i <= t` (`case2_bulk`), else put all
       the budget on coordinate `t + 1`, for which `1 / a >= 2`
       (`case2_single`).

    Parameters
    ----------
    a:
        Positive weights

    Returns
    -------
    The prior, in the original index order
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 1 or a.size == 0:
        raise DomainError('Weights must be a non-empty vector')
    if not np.all(np.isfinite(a)) or np.any(a <= 0):
        raise DomainError('Weights must be positive and finite')
    if not np.sum(1 / a) > SUPPORT_BUDGET:
        raise PreconditionError(
            'sum(1 / a) <= 4, the direct construction applies'
        )

    order = np.argsort(-a, kind='stable')
    sorted_a = a[order]
    sorted_epsilons = np.zeros_like(sorted_a)

    if sorted_a[0] <= 1 / 4:
        sorted_epsilons[0] = 2.0
        case = 'single_large'
    else:
        cumulative = np.cumsum(1 / sorted_a)
        t = int(np.count_nonzero(cumulative <= SUPPORT_BUDGET))
        if cumulative[t - 1] >= 2:
            sorted_epsilons[:t] = 1 / np.sqrt(sorted_a[:t])
            case = 'case2_bulk'
        else:
            sorted_epsilons[t] = 2.0
            case = 'case2_single'

    epsilons = np.empty_like(sorted_epsilons)
    epsilons[order] = sorted_epsilons
    return BoxPrior(
        epsilons=epsilons, case=case, payoff=prior_payoff(epsilons, a)
    )


def construct_prior(design: DesignSpec, family: GlmFamily) -> BoxPrior:
    """
    Constructs the box prior witnessing the lower bound.

    With `a_i = L [M^T M]_ii / (12 s)`:

    - a rank-deficient design gets `eps = 2 e_k` for a coordinate `k`
      with zero Gram diagonal;
    - if `sum_i 1 / a_i <= 4`, equivalently
      `12 (s / L) Tr((M^T M)^-1) <= 4`, then `eps_i^2 = 1 / a_i`
      (`case1`);
    - otherwise `lemma4_construct(a)`.

    The direct case is dispatched on `12 (s / L) Tr <= 4`, which is what
    the support requirement `sum_i eps_i^2 <= 4` of that construction
    needs. Written as a threshold on the trace this reads
    `Tr <= (1/3) s / L`; it is sometimes stated with the ratio inverted,
    `Tr <= (1/3) L / s`, which would not keep the prior inside the
    ball.

    Parameters
    ----------
    design:
        A design with diagonal Gram matrix, see `reparametrize`

    family:
        The family, providing `L` and `s`

    Returns
    -------
    The prior
    """
    return _construct_prior(design, family.curvature_bound, family.scale)


def bayes_bound_for_prior(
    design: DesignSpec, family: GlmFamily, prior: BoxPrior
) -> float:
    """
    Certified lower bound on the Bayes L2 risk of any estimator under a
    box prior,

        1 / (2 pi e) * sum_i eps_i^2
            exp(-2 phi(eps_i^2 / 12 * L / s * [M^T M]_ii))

    Parameters
    ----------
    design:
        A design with diagonal Gram matrix

    family:
        The family, providing `L` and `s`

    prior:
        A box prior supported in the unit ball

    Returns
    -------
    The bound
    """
    return _bayes_bound(
        design, family.curvature_bound, family.scale, prior
    )


def theorem1_bound(
    design: DesignSpec,
    family: GlmFamily,
    constant: float = DEFAULT_CONSTANT,
) -> BoundReport:
    """
    Evaluates `constant * min(s / L * Tr((M^T M)^-1), 1)` and the prior
    witnessing it.

    Parameters
    ----------
    design:
        The design

    family:
        The family, certified on the design radius

    constant:
        The universal constant, defaults to `1 / (pi e^3)`.

    Returns
    -------
    The report
    """
    _check_certified(design, family)
    return _bound_report(
        design, family.curvature_bound, family.scale, constant
    )


def generalized_bound(
    design: DesignSpec,
    families: Sequence[GlmFamily],
    constant: float = DEFAULT_CONSTANT,
) -> BoundReport:
    """
    Lower bound for heterogeneous rows, row `i` following `families[i]`.
    Evaluated as `theorem1_bound` with `L` the largest curvature bound
    and `s` replaced by `s* = min_i s_i`.

    Parameters
    ----------
    design:
        The design

    families:
        One family per row

    constant:
        The universal constant, defaults to `1 / (pi e^3)`.

    Returns
    -------
    The report
    """
    if len(families) == 0:
        raise PreconditionError('At least one family is needed')
    if len(families) != design.n:
        raise PreconditionError(
            f'Expected {design.n} families (one per row), got '
            f'{len(families)}'
        )
    for family in families:
        _check_certified(design, family)

    curvature_bound = max(family.curvature_bound for family in families)
    scale = min(family.scale for family in families)
    return _bound_report(design, curvature_bound, scale, constant)


def ag_comparison_bound(
    design: DesignSpec, family: GlmFamily, strong_convexity: float
) -> float:
    """
    The comparison bound obtained for strongly convex cumulants
    (`0 < R <= Phi'' <= L`) by transferring a prediction-error bound
    through the operator norm,

        d s R / L^2 * lambda_min(M^T M) / lambda_max(M^T M)^2

    It never exceeds `s R / L^2 * Tr((M^T M)^-1)`, so the trace bound is
    sharper.

    Parameters
    ----------
    design:
        A full-rank design

    family:
        The family, providing `L` and `s`

    strong_convexity:
        The lower curvature bound `R`, in `(0, L]`

    Returns
    -------
    The bound, without a universal constant
    """
    if not design.is_full_rank:
        raise PreconditionError(
            'The comparison bound needs a full-rank design'
        )
    curvature_bound = family.curvature_bound
    if not 0 < strong_convexity <= curvature_bound:
        raise DomainError(
            f'Strong convexity must lie in (0, {curvature_bound:g}], got '
            f'{strong_convexity}'
        )

    eigenvalues = np.square(design.singular_values)
    lambda_max = eigenvalues[0]
    lambda_min = eigenvalues[design.d - 1]
    return float(
        design.d
        * family.scale
        * strong_convexity
        / curvature_bound**2
        * lambda_min
        / lambda_max**2
    )


def _check_certified(design: DesignSpec, family: GlmFamily) -> None:
    radius = design.radius
    if not family.covers(-radius, radius):
        raise PreconditionError(
            f'{family.name} curvature bound is not certified for design '
            f'radius {radius:.12g}'
        )


def _diagonal_weights(
    design: DesignSpec, curvature_bound: float, scale: float
) -> np.ndarray:
    """
    Checks the Gram matrix is diagonal and returns
    `a_i = L [M^T M]_ii / (12 s)`.
    """
    gram = design.gram
    diagonal = np.diag(gram)
    off_diagonal = gram - np.diag(diagonal)
    reference = max(float(np.max(np.abs(diagonal))), np.finfo(float).tiny)
    if np.max(np.abs(off_diagonal)) > DIAGONAL_TOLERANCE * reference:
        raise PreconditionError(
            'The Gram matrix is not diagonal, reparametrize the design first'
        )
    return curvature_bound * diagonal / (12 * scale)


def _construct_prior(
    design: DesignSpec, curvature_bound: float, scale: float
) -> BoxPrior:
    weights = _diagonal_weights(design, curvature_bound, scale)

    if not design.is_full_rank:
        k = int(np.argmin(weights))
        epsilons = np.zeros(design.d)
        epsilons[k] = 2.0
        prior = BoxPrior(
            epsilons=epsilons,
            case='rank_deficient',
            payoff=prior_payoff(epsilons, weights),
        )
    elif np.sum(1 / weights) <= SUPPORT_BUDGET:
        epsilons = 1 / np.sqrt(weights)
        prior = BoxPrior(
            epsilons=epsilons,
            case='case1',
            payoff=prior_payoff(epsilons, weights),
        )
    else:
        prior = lemma4_construct(weights)

    logger.info('Constructed %s prior, payoff %.6g', prior.case, prior.payoff)
    return prior


def _bayes_bound(
    design: DesignSpec,
    curvature_bound: float,
    scale: float,
    prior: BoxPrior,
) -> float:
    if prior.d != design.d:
        raise PreconditionError(
            f'Prior has {prior.d} coordinates, the design {design.d}'
        )
    weights = _diagonal_weights(design, curvature_bound, scale)
    return prior_payoff(prior.epsilons, weights) / (2 * math.pi * math.e)


def _bound_report(
    design: DesignSpec,
    curvature_bound: float,
    scale: float,
    constant: float,
) -> BoundReport:
    if not constant > 0:
        raise DomainError(f'The constant must be positive, got {constant}')

    trace = design.trace_inv_gram
    raw_min_term = min(scale / curvature_bound * trace, 1.0)

    rotated = reparametrize(design)
    prior = _construct_prior(rotated, curvature_bound, scale)

    return BoundReport(
        bound_value=constant * raw_min_term,
        constant=constant,
        raw_min_term=raw_min_term,
        case=prior.case,
        prior=prior,
        bayes_bound=_bayes_bound(rotated, curvature_bound, scale, prior),
        curvature_bound=curvature_bound,
        scale=scale,
        trace_inv_gram=trace,
        n=design.n,
        d=design.d,
    )
