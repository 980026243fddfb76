import math

import numpy as np
from scipy import stats

from glmbound.base.exceptions import DomainError
from glmbound.base.family import GlmFamily


class Poisson(GlmFamily):
    """
    Poisson family (log-linear regression), `Phi(t) = e^t`.

    `Phi''` is unbounded on the real line, so the curvature bound is
    only certified on `[-design_radius, design_radius]`, the range of
    `<m_i, theta>` over the unit ball, where it equals
    `exp(design_radius)`. The scale is fixed to `1`.

    Attributes
    ----------
    design_radius:
        Largest row norm of the design the family was built for
    """

    discrete = True

    def __init__(self, design_radius: float) -> None:
        """
        Initializes the family.

        Parameters
        ----------
        design_radius:
            `max_i ||m_i||_2` of the intended design, positive
        """
        if not design_radius > 0:
            raise DomainError(
                f'Design radius must be positive, got {design_radius}'
            )
        super().__init__(
            'poisson',
            1.0,
            math.exp(design_radius),
            (-design_radius, design_radius),
        )
        self.design_radius: float = float(design_radius)

    def cumulant(self, t: np.ndarray) -> np.ndarray:
        return np.exp(t)

    def cumulant_d1(self, t: np.ndarray) -> np.ndarray:
        return np.exp(t)

    def cumulant_d2(self, t: np.ndarray) -> np.ndarray:
        return np.exp(t)

    def distribution(self, eta: np.ndarray):
        return stats.poisson(self.cumulant_d1(eta))
