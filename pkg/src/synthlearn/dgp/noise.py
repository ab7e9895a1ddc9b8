"""Error processes: AR(1), ARMA(1,1) and AR-ARCH."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.signal import lfilter

__all__ = ["NoiseSpec", "gen_noise", "BURN_IN"]

BURN_IN = 200


@dataclass(frozen=True)
class NoiseSpec:
    """Parameters of one error process.

    ``ar1``     eps_t = rho eps_{t-1} + v_t,  v_t ~ N(0, sigma^2)
    ``arma11``  eps_t = rho eps_{t-1} + theta v_{t-1} + v_t
    ``ararch``  eps_t = rho eps_{t-1} + v_t,  v_t = sqrt(h_t) z_t,
                h_t = omega + gamma v_{t-1}^2
    """

    kind: str
    params: Mapping[str, float] = field(default_factory=dict)

    DEFAULTS = {
        "ar1": {"rho": 0.6, "sigma": 0.8},
        "arma11": {"rho": 0.5, "theta": 0.3, "sigma": 0.1},
        "ararch": {"rho": 0.8, "omega": 0.001, "gamma": 0.99},
    }

    def __post_init__(self):
        if self.kind not in self.DEFAULTS:
            raise ValueError(f"unknown noise kind {self.kind!r}")
        p = {**self.DEFAULTS[self.kind], **dict(self.params)}
        if not abs(p["rho"]) < 1:
            raise ValueError("noise requires |rho| < 1")
        if self.kind in ("ar1", "arma11") and not p["sigma"] > 0:
            raise ValueError("noise requires sigma > 0")
        if self.kind == "ararch":
            if not p["omega"] > 0:
                raise ValueError("ararch requires omega > 0")
            if not 0 <= p["gamma"] < 1:
                raise ValueError("ararch requires gamma in [0, 1)")
        object.__setattr__(self, "params", p)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params)}


def gen_noise(spec: NoiseSpec, length: int, seed=None, rng: np.random.Generator | None = None) -> np.ndarray:
    """Draw ``length`` values of the process.

    AR(1) starts from its stationary distribution; ARMA(1,1) and AR-ARCH
    start at zero and discard ``BURN_IN`` steps.
    """
    if length < 1:
        raise ValueError("length must be at least 1")
    if rng is None:
        rng = np.random.default_rng(seed)
    p = spec.params
    rho = p["rho"]
    if spec.kind == "ar1":
        v = rng.standard_normal(length) * p["sigma"]
        prev = rng.standard_normal() * p["sigma"] / np.sqrt(1 - rho * rho)
        return lfilter([1.0], [1.0, -rho], v, zi=[rho * prev])[0]
    n = length + BURN_IN
    z = rng.standard_normal(n)
    if spec.kind == "arma11":
        return lfilter([1.0, p["theta"]], [1.0, -rho], z * p["sigma"])[BURN_IN:]
    out = np.empty(n)
    e = 0.0
    v_prev = 0.0
    om, ga = p["omega"], p["gamma"]
    for t in range(n):
        h = om + ga * v_prev * v_prev
        v_prev = np.sqrt(h) * z[t]
        e = rho * e + v_prev
        out[t] = e
    return out[BURN_IN:]
