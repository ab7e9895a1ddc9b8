"""Pure-noise experts used to stress the weighting schemes."""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

from .base import FittedLearner, LearnerError

__all__ = ["FittedNoise", "make_noninformative"]

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _splitmix64(x: np.ndarray) -> np.ndarray:
    z = x + _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


class FittedNoise(FittedLearner):
    """Standard Gaussian prediction fixed by (seed, learner index, time)."""

    kind = "noninformative"

    def __init__(self, seed: int, index: int, n_features: int, clip: float):
        self.seed = int(seed)
        self.index = int(index)
        self.n_features = int(n_features)
        self.clip = float(clip)
        self._key = np.random.SeedSequence([self.seed, self.index]).generate_state(1, np.uint64)

    def draws(self, times) -> np.ndarray:
        t = np.atleast_1d(np.asarray(times, dtype=np.int64)).view(np.uint64)
        with np.errstate(over="ignore"):
            bits = _splitmix64(self._key[0] ^ _splitmix64(t))
        u = (bits >> np.uint64(11)).astype(float) * 2.0**-53 + 2.0**-54
        return np.clip(ndtri(u), -self.clip, self.clip)

    def predict(self, row, history=None, time=None) -> float:
        if time is None:
            raise LearnerError("noninformative learners predict by time index")
        self._check(row)
        return float(self.draws([time])[0])

    def predict_rows(self, X):
        raise LearnerError("noninformative learners predict by time index; use predict_panel")

    def predict_panel(self, panel) -> np.ndarray:
        return self.draws(panel.times)


def make_noninformative(seed: int, count: int, n_features: int = 1,
                        clip: float = 10.0) -> list[FittedNoise]:
    if count < 0:
        raise LearnerError("count must be nonnegative")
    return [FittedNoise(seed, j, n_features, clip) for j in range(count)]
