import math

import numpy as np
from scipy import stats
from scipy.special import expit

from glmbound.base.family import GlmFamily


class Bernoulli(GlmFamily):
    """
    Bernoulli family (logistic regression), `Phi(t) = log(1 + e^t)`.

    `Phi''(t) = sigmoid(t) (1 - sigmoid(t))` peaks at `t = 0`, so the
    curvature bound `1/4` holds on the whole real line. The scale is
    fixed to `1`.
    """

    discrete = True

    def __init__(self) -> None:
        super().__init__('bernoulli', 1.0, 0.25, (-math.inf, math.inf))

    def cumulant(self, t: np.ndarray) -> np.ndarray:
        return np.logaddexp(0.0, t)

    def cumulant_d1(self, t: np.ndarray) -> np.ndarray:
        return expit(t)

    def cumulant_d2(self, t: np.ndarray) -> np.ndarray:
        # sigmoid(-t) instead of 1 - sigmoid(t) keeps precision in the
        # tails
        return expit(t) * expit(np.negative(t))

    def distribution(self, eta: np.ndarray):
        return stats.bernoulli(self.cumulant_d1(eta))
