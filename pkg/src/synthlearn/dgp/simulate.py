"""Simulated panels DGP1 to DGP5.

Times follow the experimental layout ``1 .. T`` with learners trained on
``1 .. t_minus`` and treatment after ``T0``.  Internally the panel is
shifted so that ``t_minus`` maps to ``t = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.signal import lfilter

from ..panel import PanelSeries
from .noise import NoiseSpec, gen_noise

__all__ = [
    "DGP_IDS",
    "DgpSpec",
    "SimResult",
    "beta_vector",
    "simulate",
    "simulate_carryover",
    "naive_mean_gap",
    "carryover_bias",
]

DGP_IDS = ("dgp1", "dgp2a", "dgp2b", "dgp2c", "dgp3", "dgp4a", "dgp4b", "dgp4c", "dgp5")

_DESIGN = {"dgp1": "factor", "dgp5": "factor"}
_NOISE = {
    "dgp1": NoiseSpec("ar1", {"rho": 0.6, "sigma": 0.8}),
    "dgp5": NoiseSpec("ar1", {"rho": 0.6, "sigma": 0.8}),
    "a": NoiseSpec("arma11", {"rho": 0.5, "theta": 0.3, "sigma": 0.1}),
    "b": NoiseSpec("arma11", {"rho": 0.5, "theta": 0.3, "sigma": 1.0}),
    "c": NoiseSpec("ararch", {"rho": 0.8, "omega": 0.001, "gamma": 0.99}),
}


def beta_vector(J: int) -> np.ndarray:
    """``beta_j = 1/(1+j)^2`` for ``j < J``; the last entry makes the sum one."""
    if J < 1:
        raise ValueError("J must be at least 1")
    b = 1.0 / (1.0 + np.arange(1, J)) ** 2
    return np.append(b, 1.0 - b.sum())


@dataclass(frozen=True)
class DgpSpec:
    """One simulation design.

    Parameters
    ----------
    id : str
        One of ``DGP_IDS``.
    J : int
        Number of covariates.
    effect : float or sequence
        Treatment effect ``a_t`` after ``T0`` (constant or one value per
        post-treatment time).
    T, T0, t_minus : int
        Horizon, last pre-treatment time and learner training length.
    seed : int
    noise_scale : float
        Multiplies the outcome error and the idiosyncratic covariate error
        of the factor design; 0 gives a noiseless panel.
    factors : bool
        When false the factor design drops ``theta_t`` and ``F_t``.
    cate : {None, "linear", "quadratic"}
        Adds ``tau(X_t) = sum_j X_jt`` or ``sum_j X_jt^2`` after ``T0``.
    """

    id: str = "dgp1"
    J: int = 50
    effect: float | Sequence[float] = 0.0
    T: int = 300
    T0: int = 250
    t_minus: int = 125
    seed: int = 0
    noise_scale: float = 1.0
    factors: bool = True
    cate: str | None = None

    def __post_init__(self):
        if self.id not in DGP_IDS:
            raise ValueError(f"unknown DGP {self.id!r}")
        if self.J < 1:
            raise ValueError("J must be at least 1")
        if not 1 <= self.t_minus < self.T0 < self.T:
            raise ValueError("timeline requires 1 <= t_minus < T0 < T")
        if self.cate not in (None, "linear", "quadratic"):
            raise ValueError(f"unknown cate {self.cate!r}")
        if self.noise_scale < 0:
            raise ValueError("noise_scale must be nonnegative")
        eff = np.atleast_1d(np.asarray(self.effect, dtype=float))
        if eff.size not in (1, self.T - self.T0):
            raise ValueError("effect must be a scalar or one value per post-treatment time")
        if not isinstance(self.effect, (int, float)):
            object.__setattr__(self, "effect", tuple(float(v) for v in eff))

    @property
    def origin(self) -> int:
        return self.t_minus

    def internal_times(self) -> np.ndarray:
        return np.arange(1, self.T + 1) - self.t_minus + 1

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in ("id", "J", "effect", "T", "T0", "t_minus", "seed",
                                           "noise_scale", "factors", "cate")}
        if isinstance(d["effect"], tuple):
            d["effect"] = list(d["effect"])
        return d

    @classmethod
    def from_dict(cls, d) -> "DgpSpec":
        return cls(**dict(d))


@dataclass(frozen=True)
class SimResult:
    """Simulated panel plus the truth behind it.

    ``y0`` is the untreated outcome, ``effect`` the realised ``Y - Y(0)``
    at every time and ``tau`` the conditional effect ``tau(X_t)`` at every
    time when a CATE design is used.
    """

    panel: PanelSeries
    y0: np.ndarray
    effect: np.ndarray
    tau: np.ndarray | None = None
    theta: np.ndarray | None = None
    F: np.ndarray | None = None
    spec: DgpSpec | None = field(default=None, compare=False)


def _ar1_matrix(rng, n, J, rho, scale):
    sigma = np.sqrt(1 - rho * rho)
    v = rng.standard_normal((n, J)) * sigma
    prev = rng.standard_normal(J)  # stationary variance is one
    out = lfilter([1.0], [1.0, -rho], v, axis=0, zi=(rho * prev)[None, :])[0]
    return out * scale


def _factor_design(rng, n, J, scale, factors):
    j = np.arange(1, J + 1)
    mu = lam = (1.0 + j) / j
    theta = rng.standard_normal(n)
    F = rng.standard_normal(n)
    u = _ar1_matrix(rng, n, J, 0.6, scale)
    if not factors:
        theta = np.zeros(n)
        F = np.zeros(n)
    X = mu[None, :] + theta[:, None] + lam[None, :] * F[:, None] + u
    return X, theta, F


def _gauss_design(rng, n, J):
    idx = np.arange(J)
    Sigma = 0.5 ** np.abs(idx[:, None] - idx[None, :])
    L = np.linalg.cholesky(Sigma)
    h = rng.standard_normal((n, J)) @ L.T
    u = _ar1_matrix(rng, n, 1, 0.8, 1.0)[:, 0]
    return h + u[:, None]


def simulate(spec: DgpSpec) -> SimResult:
    """Draw one panel; bit-deterministic in ``spec``."""
    n = spec.T
    code = DGP_IDS.index(spec.id)
    s_design, s_noise = np.random.SeedSequence([int(spec.seed), code]).spawn(2)
    rd, rn = np.random.default_rng(s_design), np.random.default_rng(s_noise)
    beta = beta_vector(spec.J)
    theta = F = None
    if _DESIGN.get(spec.id) == "factor":
        X, theta, F = _factor_design(rd, n, spec.J, spec.noise_scale, spec.factors)
        noise = _NOISE[spec.id]
    else:
        X = _gauss_design(rd, n, spec.J)
        noise = _NOISE["a" if spec.id == "dgp3" else spec.id[-1]]
    eps = gen_noise(noise, n, rng=rn) * spec.noise_scale

    if spec.id == "dgp1":
        y0 = X @ beta + eps
    elif spec.id == "dgp5":
        y0 = 0.5 + theta + 0.5 * F + eps
    elif spec.id.startswith("dgp2"):
        y0 = 1.0 / (1.0 + np.exp(-(X @ beta + eps)))
    elif spec.id == "dgp3":
        y0 = X[:, : min(10, spec.J)].sum(axis=1) ** 2 + eps
    else:
        y0 = np.cos(X @ beta + eps)

    post = np.arange(1, n + 1) > spec.T0
    eff = np.zeros(n)
    eff[post] = np.asarray(spec.effect, dtype=float)
    tau = None
    if spec.cate == "linear":
        tau = X.sum(axis=1)
    elif spec.cate == "quadratic":
        tau = (X * X).sum(axis=1)
    if tau is not None:
        eff = eff + tau * post

    times = spec.internal_times()
    panel = PanelSeries(times, y0 + eff, X, spec.T0 - spec.t_minus + 1, 0)
    return SimResult(panel, y0, eff, tau, theta, F, spec)


def simulate_carryover(base: DgpSpec, alphas: Sequence[float]) -> SimResult:
    """Base outcome plus ``sum_{s=0}^{m} alpha_{s+1} D_{t-s}`` with ``m = len(alphas) - 1``."""
    alphas = np.asarray(alphas, dtype=float)
    m = alphas.size - 1
    if m < 1:
        raise ValueError("carryover needs at least two alphas (m >= 1)")
    res = simulate(base)
    D = res.panel.treated
    add = np.zeros(res.panel.n)
    for s, a in enumerate(alphas):
        add[s:] += a * D[: D.size - s]
    panel = PanelSeries(res.panel.times, res.panel.y + add, res.panel.X, res.panel.t0, m,
                        res.panel.names)
    return replace(res, panel=panel, effect=res.effect + add)


def naive_mean_gap(panel: PanelSeries, y=None) -> float:
    """Mean outcome after ``t0`` minus mean outcome up to ``t0``."""
    y = panel.y if y is None else np.asarray(y, dtype=float)
    post = panel.times > panel.t0
    return float(y[post].mean() - y[~post].mean())


def carryover_bias(alphas: Sequence[float], n_post: int) -> float:
    """Expected naive gap minus ``sum(alpha)`` for a constant untreated outcome.

    The first ``s`` post-treatment periods miss ``alpha_{s+1}``, so the gap
    falls short by ``sum_{s=1}^{m} s * alpha_{s+1} / n_post``.
    """
    a = np.asarray(alphas, dtype=float)
    s = np.arange(a.size)
    return float(-(s * a).sum() / n_post)
