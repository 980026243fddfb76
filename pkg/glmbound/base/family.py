from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from glmbound.base.data_structures import DesignSpec
from glmbound.base.exceptions import DomainError
from glmbound.utils.functions import substream

#: Slack on `||theta||_2 <= 1`
BALL_TOLERANCE = 1e-9
#: Relative slack on the certified natural parameter range
RANGE_TOLERANCE = 1e-12
#: Default number of grid points used to certify the curvature bound
CERTIFICATION_POINTS = 10_000
#: Bits of the uniform grid, whose midpoints are exact in float64
_UNIFORM_BITS = 52


def draw_uniforms(rng: np.random.Generator, size) -> np.ndarray:
    """
    Draws uniforms strictly inside `(0, 1)` so that every inverse CDF is
    finite.
    """
    return (
        rng.integers(0, 2**_UNIFORM_BITS, size=size) + 0.5
    ) * 2.0**-_UNIFORM_BITS


class GlmFamily(ABC):
    """
    Base exponential family of the GLM

        f(x; eta) = h(x) exp((eta x - Phi(eta)) / s)

    The base measure `h` lives in the `scipy.stats` distribution returned
    by `distribution`, which both the samplers and the quadratures use.

    Attributes
    ----------
    name:
        Family identifier

    scale:
        The scale `s(sigma)`

    curvature_bound:
        Uniform bound `L` on `Phi''` over `natural_param_range`

    natural_param_range:
        Closed interval on which `curvature_bound` is certified
    """

    #: Whether observations take integer values
    discrete: bool = False

    def __init__(
        self,
        name: str,
        scale: float,
        curvature_bound: float,
        natural_param_range: Tuple[float, float],
    ) -> None:
        """
        Initializes the family.

        Parameters
        ----------
        name:
            Family identifier

        scale:
            The scale `s(sigma)`, positive

        curvature_bound:
            The curvature bound `L`, positive

        natural_param_range:
            Interval `(lower, upper)` on which the bound holds
        """
        if not scale > 0:
            raise DomainError(f'Scale must be positive, got {scale}')
        if not curvature_bound > 0:
            raise DomainError(
                f'Curvature bound must be positive, got {curvature_bound}'
            )
        lower, upper = natural_param_range
        if not lower < upper:
            raise DomainError('Natural parameter range is empty')
        self.name: str = name
        self.scale: float = float(scale)
        self.curvature_bound: float = float(curvature_bound)
        self.natural_param_range: Tuple[float, float] = (
            float(lower),
            float(upper),
        )

    def __repr__(self) -> str:
        return (
            f'{type(self).__name__}(scale={self.scale!r}, '
            f'curvature_bound={self.curvature_bound!r})'
        )

    @abstractmethod
    def cumulant(self, t: np.ndarray) -> np.ndarray:
        """
        The cumulant function `Phi`.
        """

    @abstractmethod
    def cumulant_d1(self, t: np.ndarray) -> np.ndarray:
        """
        First derivative `Phi'`, the mean of an observation.
        """

    @abstractmethod
    def cumulant_d2(self, t: np.ndarray) -> np.ndarray:
        """
        Second derivative `Phi''`, the variance of an observation
        divided by the scale.
        """

    @abstractmethod
    def distribution(self, eta: np.ndarray):
        """
        Gets the frozen `scipy.stats` distribution of one observation
        with natural parameter `eta` (vectorized over `eta`).
        """

    def covers(self, lower: float, upper: float) -> bool:
        """
        Whether the certified range contains `[lower, upper]`.
        """
        slack = RANGE_TOLERANCE * max(1.0, abs(lower), abs(upper))
        range_lower, range_upper = self.natural_param_range
        return range_lower <= lower + slack and upper - slack <= range_upper

    def certify_curvature(
        self,
        lower: float,
        upper: float,
        points: int = CERTIFICATION_POINTS,
    ) -> bool:
        """
        Grid-checks `0 <= Phi'' <= L` on `[lower, upper]`.

        Parameters
        ----------
        lower:
            Left end of the interval

        upper:
            Right end of the interval

        points:
            Number of grid points, defaults to `10_000`.

        Returns
        -------
        Whether the check passed
        """
        grid = np.linspace(lower, upper, points)
        curvature = self.cumulant_d2(grid)
        return bool(
            np.all(curvature >= 0)
            and np.all(
                curvature <= self.curvature_bound * (1 + RANGE_TOLERANCE)
            )
        )

    def mean_and_variance(self, eta: float) -> Tuple[float, float]:
        """
        Mean and variance of an observation.

        Parameters
        ----------
        eta:
            Natural parameter, inside the certified range

        Returns
        -------
        `(Phi'(eta), s * Phi''(eta))`
        """
        if not self.covers(eta, eta):
            raise DomainError(
                f'Natural parameter {eta} is outside the certified range '
                f'{self.natural_param_range}'
            )
        return (
            float(self.cumulant_d1(eta)),
            self.scale * float(self.cumulant_d2(eta)),
        )

    def sample_from_uniforms(
        self, eta: np.ndarray, uniforms: np.ndarray
    ) -> np.ndarray:
        """
        Inverse-CDF sampling of observations.

        Parameters
        ----------
        eta:
            Natural parameters, broadcastable against `uniforms`

        uniforms:
            Uniforms strictly inside `(0, 1)`

        Returns
        -------
        Observations of the broadcast shape
        """
        return self.distribution(eta).ppf(uniforms)


@dataclass(frozen=True)
class GlmModel:
    """
    The multivariate GLM `f(x; theta)` whose coordinate `i` follows the
    family with natural parameter `<m_i, theta>`.

    Attributes
    ----------
    design:
        The design

    family:
        The exponential family
    """

    design: DesignSpec
    family: GlmFamily

    def __post_init__(self) -> None:
        radius = self.design.radius
        if not self.family.covers(-radius, radius):
            raise DomainError(
                f'{self.family.name} family is certified on '
                f'{self.family.natural_param_range}, which does not cover '
                f'the design radius {radius:.12g}'
            )
        if not self.family.certify_curvature(-radius, radius):
            raise DomainError(
                f'{self.family.name} curvature exceeds its bound on '
                f'[-{radius:.12g}, {radius:.12g}]'
            )

    def natural_parameters(self, theta: np.ndarray) -> np.ndarray:
        """
        Computes `M theta`, vectorized over leading axes of `theta`.
        """
        return np.asarray(theta) @ self.design.entries.T

    def check_theta(self, theta: np.ndarray) -> np.ndarray:
        """
        Validates that `theta` lies in the unit ball.

        Returns
        -------
        `theta` as a float array
        """
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.design.d,):
            raise DomainError(
                f'Expected a parameter of length {self.design.d}, got '
                f'shape {theta.shape}'
            )
        norm = np.linalg.norm(theta)
        if not norm <= 1 + BALL_TOLERANCE:
            raise DomainError(
                f'Parameter norm {norm:.12g} is outside the unit ball'
            )
        return theta

    def sample(self, theta: np.ndarray, seed: int) -> np.ndarray:
        """
        Draws one observation vector.

        Parameters
        ----------
        theta:
            The parameter, inside the unit ball

        seed:
            Seed of the draw

        Returns
        -------
        The n observations, independent given `theta`
        """
        theta = self.check_theta(theta)
        uniforms = draw_uniforms(substream(seed, 0), self.design.n)
        return self.sample_from_uniforms(theta, uniforms)

    def sample_from_uniforms(
        self, theta: np.ndarray, uniforms: np.ndarray
    ) -> np.ndarray:
        """
        Maps uniforms to observations, vectorized over leading axes of
        `theta` and `uniforms`.
        """
        return self.family.sample_from_uniforms(
            self.natural_parameters(theta), uniforms
        )

    def log_likelihood(self, theta: np.ndarray, x: np.ndarray) -> float:
        """
        The `theta`-dependent part of `log f(x; theta)`,
        `sum_i (x_i eta_i - Phi(eta_i)) / s`.
        """
        eta = self.natural_parameters(theta)
        return float(
            np.sum(x * eta - self.family.cumulant(eta)) / self.family.scale
        )

    def score(self, theta: np.ndarray, x: np.ndarray) -> np.ndarray:
        """
        Gradient of `log f(x; theta)` in `theta`,
        `M^T (x - Phi'(M theta)) / s`, vectorized over leading axes of
        `theta` and `x`.
        """
        eta = self.natural_parameters(theta)
        residual = x - self.family.cumulant_d1(eta)
        return residual @ self.design.entries / self.family.scale

    def fisher_information(self, theta: np.ndarray) -> np.ndarray:
        """
        Fisher information matrix of the observation vector.

        Parameters
        ----------
        theta:
            The parameter, inside the unit ball

        Returns
        -------
        `M^T diag(Phi''(M theta)) M / s`, symmetric positive
        semidefinite
        """
        theta = self.check_theta(theta)
        weights = self.family.cumulant_d2(self.natural_parameters(theta))
        entries = self.design.entries
        information = entries.T @ (weights[:, None] * entries)
        information /= self.family.scale
        return (information + information.T) / 2
