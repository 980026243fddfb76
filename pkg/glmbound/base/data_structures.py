import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from glmbound.base.exceptions import DomainError, PreconditionError
from glmbound.base.types import EstimatorKind, PriorCase

#: Slack allowed on the prior support constraint sum(eps ** 2) <= 4
SUPPORT_TOLERANCE = 1e-12


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class DesignSpec:
    """
    Represents a design matrix together with its cached SVD.

    Attributes
    ----------
    entries:
        The n x d design matrix, rows are the vectors `m_i`

    singular_values:
        Nonincreasing singular values, `min(n, d)` of them

    right_factor:
        The d x d orthogonal matrix `V` of the SVD `M = U S V^T`

    rank:
        Number of singular values above the rank tolerance

    trace_inv_gram:
        `Tr((M^T M)^-1)`, `inf` when the design is rank-deficient
    """

    entries: np.ndarray
    singular_values: np.ndarray
    right_factor: np.ndarray
    rank: int
    trace_inv_gram: float

    def __post_init__(self) -> None:
        object.__setattr__(self, 'entries', _frozen(self.entries))
        object.__setattr__(
            self, 'singular_values', _frozen(self.singular_values)
        )
        object.__setattr__(self, 'right_factor', _frozen(self.right_factor))

    @property
    def n(self) -> int:
        """
        Number of observations (rows).
        """
        return self.entries.shape[0]

    @property
    def d(self) -> int:
        """
        Number of parameters (columns).
        """
        return self.entries.shape[1]

    @property
    def gram(self) -> np.ndarray:
        """
        The Gram matrix `M^T M`.
        """
        return self.entries.T @ self.entries

    @property
    def radius(self) -> float:
        """
        Largest row norm, `max_i ||m_i||_2`. Every natural parameter
        `<m_i, theta>` with `theta` in the unit ball lies in
        `[-radius, radius]`.
        """
        return float(np.max(np.linalg.norm(self.entries, axis=1)))

    @property
    def is_full_rank(self) -> bool:
        return self.rank == self.d


@dataclass(frozen=True)
class BoxPrior:
    """
    Product of uniform distributions `Unif(-eps_i / 2, eps_i / 2)`.

    Attributes
    ----------
    epsilons:
        Interval lengths, nonnegative with `sum(eps ** 2) <= 4` so the
        support lies in the unit ball.

    case:
        Which construction produced the prior. See
        `glmbound.base.types.PriorCase`.

    payoff:
        `sum_i eps_i^2 exp(-2 phi(eps_i^2 a_i))` for the weights `a_i`
        the construction used
    """

    epsilons: np.ndarray
    case: PriorCase
    payoff: float

    def __post_init__(self) -> None:
        epsilons = _frozen(self.epsilons)
        if epsilons.ndim != 1 or np.any(epsilons < 0):
            raise DomainError('Prior interval lengths must be nonnegative')
        if np.sum(epsilons**2) > 4 * (1 + SUPPORT_TOLERANCE):
            raise PreconditionError(
                'Prior is not supported in the unit ball '
                f'(sum of squared lengths {np.sum(epsilons ** 2):.12g})'
            )
        object.__setattr__(self, 'epsilons', epsilons)

    @property
    def d(self) -> int:
        return self.epsilons.shape[0]

    @property
    def variances(self) -> np.ndarray:
        """
        Coordinate variances, `eps_i^2 / 12`.
        """
        return self.epsilons**2 / 12

    def draw(self, uniforms: np.ndarray) -> np.ndarray:
        """
        Maps uniforms on `[0, 1)` to prior draws.

        Parameters
        ----------
        uniforms:
            Array whose last axis has length `d`

        Returns
        -------
        Draws of the same shape
        """
        return (uniforms - 0.5) * self.epsilons


@dataclass(frozen=True)
class BoundReport:
    """
    An evaluated minimax lower bound.

    Attributes
    ----------
    bound_value:
        `constant * raw_min_term`

    constant:
        The universal constant multiplying the bound

    raw_min_term:
        `min(s / L * Tr((M^T M)^-1), 1)`

    case:
        Construction case of the witnessing prior

    prior:
        The witnessing prior, in the coordinates of the reparametrized
        design

    bayes_bound:
        Certified Bayes risk lower bound of `prior`

    curvature_bound:
        The curvature bound `L` used

    scale:
        The scale `s` used

    trace_inv_gram:
        `Tr((M^T M)^-1)`

    n:
        Number of observations

    d:
        Number of parameters
    """

    bound_value: float
    constant: float
    raw_min_term: float
    case: PriorCase
    prior: BoxPrior
    bayes_bound: float
    curvature_bound: float
    scale: float
    trace_inv_gram: float
    n: int
    d: int


@dataclass(frozen=True)
class EstimatorConfig:
    """
    Configures a maximum-likelihood estimator.

    Attributes
    ----------
    kind:
        Estimator kind. See `glmbound.base.types.EstimatorKind`.

    max_iters:
        Maximum number of IRLS iterations, defaults to `100`.

    grad_tol:
        IRLS stops once the score norm falls below
        `grad_tol * (1 + ||x||)`, defaults to `1e-8`.

    step_damping:
        Initial step length of each IRLS iteration, defaults to `1`.

    project_to_ball:
        Whether the estimate is projected onto the unit ball, defaults
        to `True`.

    max_halvings:
        Maximum number of backtracking halvings per iteration, defaults
        to `30`.
    """

    kind: EstimatorKind = 'linear_mle'
    max_iters: int = 100
    grad_tol: float = 1e-8
    step_damping: float = 1.0
    project_to_ball: bool = True
    max_halvings: int = 30

    def __post_init__(self) -> None:
        if self.kind not in ('linear_mle', 'irls_mle', 'zero'):
            raise DomainError(f'Unknown estimator kind {self.kind!r}')
        if self.max_iters < 1:
            raise DomainError('max_iters must be at least 1')
        if not self.grad_tol > 0:
            raise DomainError('grad_tol must be positive')
        if not 0 < self.step_damping <= 1:
            raise DomainError('step_damping must lie in (0, 1]')
        if self.max_halvings < 0:
            raise DomainError('max_halvings must be nonnegative')


@dataclass(frozen=True)
class RiskEstimate:
    """
    Monte Carlo estimate of `E ||theta - theta_hat||^2`.

    Attributes
    ----------
    mean_sq_error:
        Mean of the squared errors over successful trials

    second_moment:
        Mean of the squared errors squared, kept so the confidence
        half-width can be recomputed

    trials:
        Number of successful trials

    seed:
        Master seed of the run

    failures:
        Number of trials whose estimator failed

    theta_at_max:
        Maximizing parameter of a worst-case search, `None` otherwise
    """

    mean_sq_error: float
    second_moment: float
    trials: int
    seed: int
    failures: int = 0
    theta_at_max: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise DomainError('A risk estimate needs at least one trial')

    @property
    def half_width(self) -> float:
        """
        95% normal-approximation half-width, `1.96 * std / sqrt(trials)`
        with the sample standard deviation.
        """
        if self.trials < 2:
            return math.inf
        variance = (
            (self.second_moment - self.mean_sq_error**2)
            * self.trials
            / (self.trials - 1)
        )
        return 1.96 * math.sqrt(max(variance, 0.0) / self.trials)

    @property
    def upper(self) -> float:
        return self.mean_sq_error + self.half_width

    @property
    def lower(self) -> float:
        return self.mean_sq_error - self.half_width


@dataclass(frozen=True)
class QuadratureSpec:
    """
    Grid sizes for the desk-scale quadratures.

    Attributes
    ----------
    prior_points:
        Minimum number of Gauss-Legendre nodes over the prior interval,
        defaults to `64`. Raised automatically when the channel is
        sharper than the grid.

    obs_points:
        Minimum number of observation grid points for continuous
        observations, defaults to `2001`.

    obs_truncation:
        Gaussian tail cut in standard deviations, defaults to `8`.

    rtol:
        Relative self-convergence tolerance, defaults to `1e-6`.

    atol:
        Absolute self-convergence floor, defaults to `1e-12`.
    """

    prior_points: int = 64
    obs_points: int = 2001
    obs_truncation: float = 8.0
    rtol: float = 1e-6
    atol: float = 1e-12

    def __post_init__(self) -> None:
        if self.prior_points < 2 or self.obs_points < 3:
            raise DomainError('Quadrature grids are too small')
        if not self.obs_truncation > 0:
            raise DomainError('obs_truncation must be positive')

    def refined(self) -> 'QuadratureSpec':
        """
        Returns the spec with both grids doubled.
        """
        return QuadratureSpec(
            prior_points=2 * self.prior_points,
            obs_points=2 * self.obs_points - 1,
            obs_truncation=self.obs_truncation,
            rtol=self.rtol,
            atol=self.atol,
        )

    def converged(self, coarse: float, fine: float) -> bool:
        return abs(fine - coarse) <= self.rtol * abs(fine) + self.atol


@dataclass(frozen=True)
class FavorabilityRow:
    """
    One family's row of the favorability report, comparing its measured
    risks with the shared lower bound and the Gaussian linear model.

    Attributes
    ----------
    family:
        Family name

    case:
        Construction case of the witnessing prior

    bound_value:
        The minimax lower bound

    bayes_bound:
        Certified Bayes risk lower bound of the witnessing prior

    bayes_risk:
        Measured Bayes risk under the witnessing prior

    worst_case_risk:
        Largest measured risk over the worst-case candidates

    gaussian_risk:
        `(s / L) Tr((M^T M)^-1)`, the exact linear MLE risk of the
        Gaussian model with the same `L` and `s`

    gaussian_empirical_risk:
        Measured linear MLE risk of that Gaussian model, `nan` for a
        rank-deficient design
    """

    family: str
    case: PriorCase
    bound_value: float
    bayes_bound: float
    bayes_risk: RiskEstimate
    worst_case_risk: RiskEstimate
    gaussian_risk: float
    gaussian_empirical_risk: float

    @property
    def achievability_ratio(self) -> float:
        """
        Gaussian empirical risk over the bound.
        """
        return self.gaussian_empirical_risk / self.bound_value

    @property
    def is_sound(self) -> bool:
        """
        Whether the worst-case risk, widened by its half-width, stays
        above the bound.
        """
        return self.worst_case_risk.upper >= self.bound_value


@dataclass(frozen=True)
class VerificationRow:
    """
    One checked inequality of a verification suite.

    Attributes
    ----------
    parameters:
        Instance parameters, in column order

    lhs:
        Left-hand side of the inequality

    rhs:
        Right-hand side of the inequality

    slack:
        Margin by which the inequality holds, negative when it fails
    """

    parameters: Dict[str, float]
    lhs: float
    rhs: float
    slack: float

    def holds(self, tolerance: float) -> bool:
        return self.slack >= -tolerance


@dataclass(frozen=True)
class ChainReport:
    """
    The single-coordinate entropy chain

        2 pi e mmse >= eps^2 e^(-2 I) >= eps^2 e^(-2 phi(Var E I_X))
                    >= eps^2 e^(-2 phi(eps^2 / 12 * slope^2 L / s))

    for `theta ~ Unif(-eps / 2, eps / 2)`.

    Attributes
    ----------
    bayes_term:
        `2 pi e` times the Bayes risk of the posterior mean

    information_term:
        `eps^2 exp(-2 I(X; theta))`

    fisher_term:
        `eps^2 exp(-2 phi(Var(theta) E I_X(theta)))`

    closed_form_term:
        `eps^2 exp(-2 phi(eps^2 / 12 * slope^2 L / s))`
    """

    bayes_term: float
    information_term: float
    fisher_term: float
    closed_form_term: float

    @property
    def slacks(self) -> Tuple[float, float, float]:
        """
        Margins of the three links of the chain.
        """
        return (
            self.bayes_term - self.information_term,
            self.information_term - self.fisher_term,
            self.fisher_term - self.closed_form_term,
        )

    def holds(self, tolerance: float) -> bool:
        return all(slack >= -tolerance for slack in self.slacks)
