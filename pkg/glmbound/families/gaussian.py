import math

import numpy as np
from scipy import stats

from glmbound.base.family import GlmFamily


class Gaussian(GlmFamily):
    """
    Gaussian family of the canonical linear model `X = L M theta + Z`
    with `Cov(Z) = s L I`.

    Its cumulant is `Phi(t) = L t^2 / 2`, so the curvature bound `L`
    holds exactly on the whole real line.
    """

    def __init__(self, curvature_bound: float = 1.0, scale: float = 1.0):
        """
        Initializes the family.

        Parameters
        ----------
        curvature_bound:
            The constant `L = Phi''`, defaults to `1`.

        scale:
            The scale `s(sigma) = sigma^2`, defaults to `1`.
        """
        super().__init__(
            'gaussian', scale, curvature_bound, (-math.inf, math.inf)
        )

    def cumulant(self, t: np.ndarray) -> np.ndarray:
        return self.curvature_bound * np.square(t) / 2

    def cumulant_d1(self, t: np.ndarray) -> np.ndarray:
        return self.curvature_bound * np.asarray(t, dtype=float)

    def cumulant_d2(self, t: np.ndarray) -> np.ndarray:
        return np.full_like(
            np.asarray(t, dtype=float), self.curvature_bound
        )

    def distribution(self, eta: np.ndarray):
        return stats.norm(
            loc=self.cumulant_d1(eta),
            scale=math.sqrt(self.scale * self.curvature_bound),
        )
