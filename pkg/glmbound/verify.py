"""
Desk-scale numerical checks of the information-theoretic ingredients of
the lower bound, on scalar and two-dimensional instances where every
quantity is computable by quadrature:

- the mutual information of a scalar channel under a uniform prior stays
  below `phi(Var(theta) E I_X(theta))`;
- averaging out a nuisance coordinate can only lose Fisher information;
- the single-coordinate entropy chain turning mutual information into a
  Bayes risk lower bound.

Prior integrals use Gauss-Legendre nodes, continuous observations the
trapezoid rule on a truncated uniform grid and discrete observations
plain summation. Every reported quantity is recomputed on doubled grids
until it self-converges.
"""
import logging
import math
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy import integrate, special, stats

from glmbound.base.data_structures import (
    ChainReport,
    DesignSpec,
    QuadratureSpec,
    VerificationRow,
)
from glmbound.base.exceptions import (
    ConvergenceError,
    DomainError,
    InvariantViolation,
    PreconditionError,
)
from glmbound.base.family import GlmFamily
from glmbound.base.types import GridLevel, VerificationSuite
from glmbound.bound import phi
from glmbound.design import make_design
from glmbound.families import Gaussian

logger = logging.getLogger(__name__)

#: Negative slack tolerated by every verification check
VERIFICATION_TOLERANCE = 1e-8
#: Tail probability beyond which discrete observation sums are cut
POISSON_TAIL = 1e-16
#: Grid doublings tried before a quadrature is declared non-convergent
MAX_REFINEMENTS = 3
#: Observation grid steps per standard deviation
STEPS_PER_SD = 8

_Channel = Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]


def mutual_information_1d(
    family: GlmFamily,
    slope: float,
    eps: float,
    quad: Optional[QuadratureSpec] = None,
) -> float:
    """
    Mutual information `I(X; theta)` of the scalar channel where `X`
    follows `family` with natural parameter `slope * theta` and
    `theta ~ Unif(-eps / 2, eps / 2)`, computed as the prior average of
    `KL(f(.; theta) || f_bar)` with `f_bar` the marginal density.

    Parameters
    ----------
    family:
        The family, certified on `[-|slope| eps / 2, |slope| eps / 2]`

    slope:
        The design entry

    eps:
        Length of the prior interval, positive

    quad:
        Grid sizes, defaults to `QuadratureSpec()`.

    Returns
    -------
    The mutual information in nats, nonnegative
    """
    quad = QuadratureSpec() if quad is None else quad
    _check_channel(family, slope, eps)
    information = _self_converged(
        lambda q: np.array([_mutual_information(family, slope, eps, q)]),
        quad,
        'mutual information',
    )
    return float(information[0])


def binned_mutual_information(
    family: GlmFamily,
    slope: float,
    eps: float,
    bin_width: float,
    quad: Optional[QuadratureSpec] = None,
) -> float:
    """
    Mutual information between `theta` and the observation of
    `mutual_information_1d` rounded into bins `[k w, (k + 1) w)`. By data
    processing it never exceeds the unbinned value.

    Parameters
    ----------
    family:
        A family with continuous observations

    slope:
        The design entry

    eps:
        Length of the prior interval, positive

    bin_width:
        Width `w` of the bins, positive

    quad:
        Grid sizes, defaults to `QuadratureSpec()`.

    Returns
    -------
    The mutual information in nats
    """
    quad = QuadratureSpec() if quad is None else quad
    _check_channel(family, slope, eps)
    if family.discrete:
        raise PreconditionError('Binning needs continuous observations')
    if not bin_width > 0:
        raise DomainError(f'Bin width must be positive, got {bin_width}')

    def compute(q: QuadratureSpec) -> np.ndarray:
        thetas, weights = _prior_nodes(family, slope, eps, q)
        eta = slope * thetas
        means = family.cumulant_d1(eta)
        spread = q.obs_truncation * np.sqrt(
            family.scale * np.max(family.cumulant_d2(eta))
        )
        first = math.floor((np.min(means) - spread) / bin_width)
        last = math.ceil((np.max(means) + spread) / bin_width)
        edges = np.arange(first, last + 1) * bin_width
        # Outer bins reach to infinity
        distribution = family.distribution(eta[:, None])
        cdf = np.concatenate(
            [
                np.zeros((eta.size, 1)),
                distribution.cdf(edges[None, :]),
                np.ones((eta.size, 1)),
            ],
            axis=1,
        )
        masses = np.diff(cdf, axis=1)
        return np.array([_discrete_information(masses, weights)])

    return float(
        _self_converged(compute, quad, 'binned mutual information')[0]
    )


def gaussian_capacity_bound(
    family: GlmFamily, slope: float, eps: float
) -> float:
    """
    Gaussian-input upper bound `log(1 + SNR) / 2` on the mutual
    information of the Gaussian scalar channel, with
    `SNR = (slope L)^2 Var(theta) / (s L)` and `Var(theta) = eps^2 / 12`.

    Parameters
    ----------
    family:
        A Gaussian family

    slope:
        The design entry

    eps:
        Length of the prior interval, positive

    Returns
    -------
    The bound in nats
    """
    if not isinstance(family, Gaussian):
        raise PreconditionError('The capacity bound needs a Gaussian family')
    _check_channel(family, slope, eps)
    curvature_bound = family.curvature_bound
    signal = (slope * curvature_bound) ** 2 * eps**2 / 12
    return 0.5 * math.log1p(signal / (family.scale * curvature_bound))


def lemma1_check(
    family: GlmFamily,
    slope: float,
    eps: float,
    quad: Optional[QuadratureSpec] = None,
) -> VerificationRow:
    """
    Checks `I(X; theta) <= phi(Var(theta) E I_X(theta))` on the scalar
    channel of `mutual_information_1d`, where
    `I_X(theta) = slope^2 Phi''(slope theta) / s`.

    Returns
    -------
    The row, `lhs` the mutual information and `rhs` the bound
    """
    information = mutual_information_1d(family, slope, eps, quad)
    fisher = expected_fisher_information(family, slope, eps, quad)
    bound = phi(eps**2 / 12 * fisher)
    return VerificationRow(
        parameters={'slope': slope, 'eps': eps, 'scale': family.scale},
        lhs=information,
        rhs=bound,
        slack=bound - information,
    )


def marginal_fisher_information(
    design: DesignSpec,
    family: GlmFamily,
    eps: np.ndarray,
    index: int,
    quad: Optional[QuadratureSpec] = None,
) -> float:
    """
    Fisher information of `X` about coordinate `index` of `theta`, with
    the other coordinate integrated against its uniform prior.

    For the Gaussian family `X = L M theta + Z`, `Z ~ N(0, s L I)`.
    Projecting `X` on the nuisance column `b = L m_k` and its orthogonal
    complement splits it into an exact Gaussian channel for the
    complement and the scalar location channel
    `(u . a) theta_i + W`, `W = ||b|| theta_k + N(0, s L)`, whose noise
    is a uniform-Gaussian convolution. The information is
    `||P a||^2 / (s L) + (u . a)^2 J(W)` with `J` the location Fisher
    information of `W`, computed by quadrature.

    Parameters
    ----------
    design:
        An n x 2 design, `n <= 3`

    family:
        A Gaussian family

    eps:
        Prior interval lengths

    index:
        The coordinate, `0` or `1`

    quad:
        Grid sizes, defaults to `QuadratureSpec()`.

    Returns
    -------
    The marginal Fisher information
    """
    quad = QuadratureSpec() if quad is None else quad
    eps = _check_lemma2(design, family, eps)
    if index not in (0, 1):
        raise DomainError(f'Coordinate must be 0 or 1, got {index}')

    curvature_bound = family.curvature_bound
    variance = family.scale * curvature_bound
    a = curvature_bound * design.entries[:, index]
    b = curvature_bound * design.entries[:, 1 - index]
    b_norm = float(np.linalg.norm(b))
    half_width = b_norm * eps[1 - index] / 2
    if half_width == 0:
        return float(a @ a) / variance

    u = b / b_norm
    along = float(u @ a)
    orthogonal = a - along * u
    location_information = _self_converged(
        lambda q: np.array(
            [_convolution_fisher(half_width, math.sqrt(variance), q)]
        ),
        quad,
        'marginal Fisher information',
    )[0]
    return (
        float(orthogonal @ orthogonal) / variance
        + along**2 * location_information
    )


def verify_lemma2(
    design: DesignSpec,
    family: GlmFamily,
    eps: np.ndarray,
    quad: Optional[QuadratureSpec] = None,
) -> List[Tuple[float, float]]:
    """
    Checks that marginalizing the other coordinate loses Fisher
    information: `E[I_X(theta)]_ii >= I_X(theta_i)` for each coordinate
    of a Gaussian model with uniform prior.

    Parameters
    ----------
    design:
        An n x 2 design, `n <= 3`

    family:
        A Gaussian family

    eps:
        Prior interval lengths

    quad:
        Grid sizes, defaults to `QuadratureSpec()`.

    Returns
    -------
    `(lhs_i, rhs_i)` per coordinate
    """
    pairs = lemma2_pairs(design, family, eps, quad)
    for index, (lhs, rhs) in enumerate(pairs):
        if lhs < rhs - VERIFICATION_TOLERANCE:
            raise InvariantViolation(
                f'Coordinate {index}: averaged Fisher information {lhs:.12g}'
                f' is below the marginal information {rhs:.12g}'
            )
    return pairs


def lemma2_pairs(
    design: DesignSpec,
    family: GlmFamily,
    eps: np.ndarray,
    quad: Optional[QuadratureSpec] = None,
) -> List[Tuple[float, float]]:
    """
    Both sides of `verify_lemma2` without the assertion.
    """
    _check_lemma2(design, family, eps)
    # The Gaussian Fisher information L M^T M / s does not depend on theta
    lhs = (
        family.curvature_bound
        / family.scale
        * np.sum(design.entries**2, axis=0)
    )
    return [
        (
            float(lhs[index]),
            marginal_fisher_information(design, family, eps, index, quad),
        )
        for index in (0, 1)
    ]


def verify_entropy_chain(
    family: GlmFamily,
    slope: float,
    eps: float,
    quad: Optional[QuadratureSpec] = None,
) -> ChainReport:
    """
    Evaluates the entropy chain on the scalar channel of
    `mutual_information_1d`. The Bayes risk of the posterior mean is
    `Var(theta) - E[E[theta | X]^2]`, computed on the same grids as the
    mutual information.

    Parameters
    ----------
    family:
        The family

    slope:
        The design entry

    eps:
        Length of the prior interval, positive

    quad:
        Grid sizes, defaults to `QuadratureSpec()`.

    Returns
    -------
    The four terms of the chain
    """
    quad = QuadratureSpec() if quad is None else quad
    _check_channel(family, slope, eps)

    def compute(q: QuadratureSpec) -> np.ndarray:
        thetas, weights, log_density, x = _channel(family, slope, eps, q)
        log_marginal = special.logsumexp(
            log_density, b=weights[:, None], axis=0
        )
        marginal = np.exp(log_marginal)
        numerator = (weights * thetas) @ np.exp(log_density)
        posterior_mean = np.divide(
            numerator,
            marginal,
            out=np.zeros_like(marginal),
            where=marginal > 0,
        )
        variance = float(weights @ thetas**2)
        mmse = variance - _integrate(
            marginal * posterior_mean**2, x, family.discrete
        )
        return np.array(
            [
                _information_from(log_density, weights, x, family.discrete),
                max(mmse, 0.0),
            ]
        )

    information, mmse = _self_converged(compute, quad, 'entropy chain')
    expected_fisher = expected_fisher_information(family, slope, eps, quad)
    closed_form = slope**2 * family.curvature_bound / family.scale
    squared = eps**2
    return ChainReport(
        bayes_term=2 * math.pi * math.e * mmse,
        information_term=squared * math.exp(-2 * information),
        fisher_term=squared * math.exp(
            -2 * phi(squared / 12 * expected_fisher)
        ),
        closed_form_term=squared * math.exp(
            -2 * phi(squared / 12 * closed_form)
        ),
    )


def lemma1_grid(
    level: GridLevel = 'fine',
) -> List[Tuple[float, float, float]]:
    """
    `(slope, eps, scale)` instances of the mutual information check.
    """
    if level == 'coarse':
        return [
            (slope, eps, scale)
            for slope in (0.5, 2.0)
            for eps in (0.1, 1.0)
            for scale in (0.1, 1.0)
        ]
    return [
        (slope, eps, scale)
        for slope in (0.25, 0.5, 1.0, 2.0, 4.0)
        for eps in (0.01, 0.1, 0.5, 1.0, 2.0)
        for scale in (0.1, 1.0, 10.0)
    ]


def lemma2_cases(
    level: GridLevel = 'fine',
) -> List[Tuple[np.ndarray, np.ndarray]]:
    """
    `(design entries, eps)` instances of the marginal Fisher information
    check. The first two designs have orthogonal columns.
    """
    designs = [
        np.eye(2),
        np.array([[1.0, 0.0], [0.0, 0.5], [0.0, 0.0]]),
        np.array([[0.6, 0.3], [0.2, 0.7], [0.4, -0.2]]),
    ]
    epsilons = [
        np.array([1.0, 1.0]),
        np.array([1.5, 0.5]),
        np.array([1.0, 0.0]),
    ]
    if level == 'coarse':
        designs = designs[1:]
        epsilons = epsilons[:2]
    return [(entries, eps) for entries in designs for eps in epsilons]


def chain_grid(level: GridLevel = 'fine') -> List[Tuple[float, float]]:
    """
    `(slope, eps)` instances of the entropy chain check.
    """
    if level == 'coarse':
        return [(slope, eps) for slope in (0.5, 2.0) for eps in (0.1, 1.0)]
    return [
        (slope, eps)
        for slope in (0.5, 1.0, 2.0, 4.0)
        for eps in (0.01, 0.1, 0.5, 1.0, 2.0)
    ]


def run_suite(
    suite: VerificationSuite,
    level: GridLevel = 'fine',
    quad: Optional[QuadratureSpec] = None,
) -> List[VerificationRow]:
    """
    Runs a verification suite on the Gaussian family with `L = 1`.

    Parameters
    ----------
    suite:
        See `glmbound.base.types.VerificationSuite`.

    level:
        Grid size. See `glmbound.base.types.GridLevel`.

    quad:
        Grid sizes, defaults to `QuadratureSpec()`.

    Returns
    -------
    One row per checked inequality
    """
    if suite == 'lemma1':
        return [
            lemma1_check(Gaussian(1.0, scale), slope, eps, quad)
            for slope, eps, scale in lemma1_grid(level)
        ]

    if suite == 'lemma2':
        rows = []
        for case, (entries, eps) in enumerate(lemma2_cases(level)):
            pairs = lemma2_pairs(make_design(entries), Gaussian(), eps, quad)
            for index, (lhs, rhs) in enumerate(pairs):
                rows.append(
                    VerificationRow(
                        parameters={
                            'case': case,
                            'coordinate': index,
                            'eps_1': eps[0],
                            'eps_2': eps[1],
                        },
                        lhs=lhs,
                        rhs=rhs,
                        slack=lhs - rhs,
                    )
                )
        return rows

    if suite == 'chain':
        rows = []
        for slope, eps in chain_grid(level):
            report = verify_entropy_chain(Gaussian(), slope, eps, quad)
            terms = (
                report.bayes_term,
                report.information_term,
                report.fisher_term,
                report.closed_form_term,
            )
            for link, slack in enumerate(report.slacks, start=1):
                rows.append(
                    VerificationRow(
                        parameters={'slope': slope, 'eps': eps, 'link': link},
                        lhs=terms[link - 1],
                        rhs=terms[link],
                        slack=slack,
                    )
                )
        return rows

    raise DomainError(f'Unknown verification suite {suite!r}')


def _check_channel(family: GlmFamily, slope: float, eps: float) -> None:
    if not math.isfinite(slope):
        raise DomainError(f'Slope must be finite, got {slope}')
    if not eps > 0:
        raise DomainError(f'Prior length must be positive, got {eps}')
    reach = abs(slope) * eps / 2
    if not family.covers(-reach, reach):
        raise PreconditionError(
            f'{family.name} family is not certified on '
            f'[-{reach:.12g}, {reach:.12g}]'
        )


def _check_lemma2(
    design: DesignSpec, family: GlmFamily, eps: np.ndarray
) -> np.ndarray:
    if not isinstance(family, Gaussian):
        raise PreconditionError('Marginal channels need a Gaussian family')
    if design.d != 2 or design.n > 3:
        raise PreconditionError(
            f'Expected an n x 2 design with n <= 3, got '
            f'{design.n}x{design.d}'
        )
    eps = np.asarray(eps, dtype=float)
    if eps.shape != (2,) or np.any(eps < 0) or not np.all(np.isfinite(eps)):
        raise DomainError('Expected two nonnegative prior lengths')
    return eps


def expected_fisher_information(
    family: GlmFamily,
    slope: float,
    eps: float,
    quad: Optional[QuadratureSpec] = None,
) -> float:
    """
    `E I_X(theta)` under the uniform prior on `[-eps / 2, eps / 2]`, by
    Gauss-Legendre quadrature refined until it self-converges.
    """
    _check_channel(family, slope, eps)
    quad = QuadratureSpec() if quad is None else quad

    def compute(quad: QuadratureSpec) -> np.ndarray:
        nodes, weights = np.polynomial.legendre.leggauss(quad.prior_points)
        curvature = family.cumulant_d2(slope * nodes * eps / 2)
        return np.array([slope**2 * (weights @ curvature) / 2 / family.scale])

    return float(
        _self_converged(compute, quad, 'expected Fisher information')[0]
    )


def _prior_nodes(
    family: GlmFamily, slope: float, eps: float, quad: QuadratureSpec
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Gauss-Legendre nodes and normalized weights of the uniform prior,
    with more nodes when the channel means move by many noise standard
    deviations across the prior.
    """
    reach = abs(slope) * eps / 2
    edges = np.array([-reach, 0.0, reach])
    means = family.cumulant_d1(edges)
    sd = math.sqrt(family.scale * float(np.min(family.cumulant_d2(edges))))
    spread = float(np.max(means) - np.min(means))
    sharpness = spread / sd if sd > 0 else 0.0
    points = math.ceil(
        quad.prior_points * (1 + 3 * sharpness / QuadratureSpec.prior_points)
    )

    nodes, weights = np.polynomial.legendre.leggauss(points)
    return nodes * eps / 2, weights / np.sum(weights)


def _observation_grid(
    family: GlmFamily, eta: np.ndarray, quad: QuadratureSpec
) -> np.ndarray:
    if family.discrete:
        distribution = family.distribution(eta)
        lower = float(np.min(distribution.support()[0]))
        upper = min(
            float(np.max(distribution.support()[1])),
            float(np.max(distribution.isf(POISSON_TAIL))) + 10,
        )
        return np.arange(lower, upper + 1)

    means = family.cumulant_d1(eta)
    curvature = family.cumulant_d2(eta)
    sd_max = math.sqrt(family.scale * float(np.max(curvature)))
    sd_min = math.sqrt(family.scale * float(np.min(curvature)))
    lower = float(np.min(means)) - quad.obs_truncation * sd_max
    upper = float(np.max(means)) + quad.obs_truncation * sd_max
    intervals = _intervals(upper - lower, sd_min, quad)
    return np.linspace(lower, upper, intervals + 1)


def _intervals(width: float, sd: float, quad: QuadratureSpec) -> int:
    """
    Number of grid intervals, at least `STEPS_PER_SD` per standard
    deviation and scaled with `quad.obs_points`.
    """
    base = QuadratureSpec.obs_points - 1
    needed = max(base, math.ceil(width / sd * STEPS_PER_SD))
    return math.ceil(needed * (quad.obs_points - 1) / base)


def _channel(
    family: GlmFamily, slope: float, eps: float, quad: QuadratureSpec
) -> _Channel:
    """
    Prior nodes, their weights, the log-density matrix of shape
    `(nodes, observations)` and the observation grid.
    """
    thetas, weights = _prior_nodes(family, slope, eps, quad)
    eta = slope * thetas
    x = _observation_grid(family, eta, quad)
    distribution = family.distribution(eta[:, None])
    if family.discrete:
        log_density = distribution.logpmf(x[None, :])
    else:
        log_density = distribution.logpdf(x[None, :])
    return thetas, weights, log_density, x


def _integrate(values: np.ndarray, x: np.ndarray, discrete: bool) -> float:
    if discrete:
        return float(np.sum(values, axis=-1))
    return float(integrate.trapezoid(values, x, axis=-1))


def _information_from(
    log_density: np.ndarray,
    weights: np.ndarray,
    x: np.ndarray,
    discrete: bool,
) -> float:
    log_marginal = special.logsumexp(log_density, b=weights[:, None], axis=0)
    density = np.exp(log_density)
    integrand = np.where(
        density > 0, density * (log_density - log_marginal), 0.0
    )
    if discrete:
        divergences = np.sum(integrand, axis=1)
    else:
        divergences = integrate.trapezoid(integrand, x, axis=1)
    return max(float(weights @ divergences), 0.0)


def _mutual_information(
    family: GlmFamily, slope: float, eps: float, quad: QuadratureSpec
) -> float:
    _, weights, log_density, x = _channel(family, slope, eps, quad)
    return _information_from(log_density, weights, x, family.discrete)


def _discrete_information(masses: np.ndarray, weights: np.ndarray) -> float:
    """
    Mutual information of a channel given by a row-stochastic matrix.
    """
    marginal = weights @ masses
    ratio = np.divide(
        masses,
        marginal[None, :],
        out=np.ones_like(masses),
        where=masses > 0,
    )
    terms = np.where(masses > 0, masses * np.log(ratio), 0.0)
    return max(float(weights @ np.sum(terms, axis=1)), 0.0)


def _convolution_fisher(
    half_width: float, sd: float, quad: QuadratureSpec
) -> float:
    """
    Location Fisher information `int w'^2 / w` of
    `Unif(-h, h) + N(0, sd^2)`, whose density is
    `w(y) = (Phi((y + h) / sd) - Phi((y - h) / sd)) / (2 h)`.
    """
    upper = half_width + quad.obs_truncation * sd
    y = np.linspace(0.0, upper, _intervals(upper, sd, quad) + 1)
    # Survival functions keep the right tail free of cancellation, the
    # density is even so the left half is its mirror
    density = (
        stats.norm.sf((y - half_width) / sd)
        - stats.norm.sf((y + half_width) / sd)
    ) / (2 * half_width)
    derivative = (
        stats.norm.pdf((y + half_width) / sd)
        - stats.norm.pdf((y - half_width) / sd)
    ) / (2 * half_width * sd)
    integrand = np.divide(
        derivative**2,
        density,
        out=np.zeros_like(density),
        where=density > 0,
    )
    return 2 * float(integrate.trapezoid(integrand, y))


def _self_converged(
    compute: Callable[[QuadratureSpec], np.ndarray],
    quad: QuadratureSpec,
    quantity: str,
) -> np.ndarray:
    """
    Evaluates `compute` on successively doubled grids until two
    consecutive values agree within `quad`'s tolerances.
    """
    coarse = compute(quad)
    achieved = math.inf
    for _ in range(MAX_REFINEMENTS):
        quad = quad.refined()
        fine = compute(quad)
        if all(quad.converged(c, f) for c, f in zip(coarse, fine)):
            logger.debug(
                '%s converged with %d prior and %d observation points',
                quantity,
                quad.prior_points,
                quad.obs_points,
            )
            return fine
        achieved = float(
            np.max(np.abs(fine - coarse) / np.maximum(np.abs(fine), 1e-300))
        )
        coarse = fine
    raise ConvergenceError(f'{quantity} did not self-converge', achieved)
