"""Synthetic control and difference-in-differences comparators.

The permutation test fits the comparator on the whole sample of the
null-imposed outcome and compares the statistic over the true
post-treatment window with the statistic over every cyclic placement of
that window.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..learners import fit_ridge, fit_sc
from ..panel import NullSpec, PanelError, PanelSeries, apply_null

__all__ = [
    "DidModel",
    "did_fit",
    "full_sample_residuals",
    "PermutationResult",
    "permutation_test",
    "pre_period_counterfactual",
    "sc_statistic",
    "PERMUTATION_METHODS",
]

PERMUTATION_METHODS = ("sc", "did", "ls")


@dataclass(frozen=True)
class DidModel:
    """Two-group, two-period difference in differences.

    The control group is the cross-sectional mean of the covariate columns.
    ``alpha`` is the treated pre-period mean, ``beta`` the control change
    and ``delta`` the difference of the two changes.
    """

    alpha: float
    beta: float
    delta: float
    gamma: float  # treated minus control pre-period mean
    t0: int

    def predict(self, times, with_effect: bool = True) -> np.ndarray:
        """``alpha + (beta + delta) 1{t > t0}`` (``delta`` dropped when ``with_effect=False``)."""
        post = (np.asarray(times) > self.t0).astype(float)
        return self.alpha + (self.beta + (self.delta if with_effect else 0.0)) * post

    def counterfactual(self, times) -> np.ndarray:
        return self.predict(times, with_effect=False)


def did_fit(panel: PanelSeries, y=None, rows=None, restrict_delta: bool = False) -> DidModel:
    """Fit the 2x2 DiD on the given rows (default: all but the carryover window).

    With ``restrict_delta=True`` the interaction is fixed at zero and the
    common period effect is estimated by least squares over both groups.
    """
    y = panel.y if y is None else np.asarray(y, dtype=float)
    if rows is None:
        rows = np.nonzero(~((panel.times > panel.t0) & (panel.times <= panel.t0 + panel.m)))[0]
    t = panel.times[rows]
    yt = y[rows]
    yc = panel.X[rows].mean(axis=1)
    post = t > panel.t0
    if post.all() or not post.any():
        raise PanelError("DiD needs both pre- and post-treatment rows")
    a = float(yt[~post].mean())
    c_pre, c_post = float(yc[~post].mean()), float(yc[post].mean())
    t_post = float(yt[post].mean())
    if restrict_delta:
        # group intercepts plus a common post effect; with a shared time
        # grid the least-squares slope averages the two group changes
        beta = 0.5 * ((t_post - a) + (c_post - c_pre))
        pbar = float(post.mean())
        a_t = float(yt.mean() - beta * pbar)
        a_c = float(yc.mean() - beta * pbar)
        return DidModel(a_t, beta, 0.0, a_t - a_c, panel.t0)
    beta = c_post - c_pre
    delta = (t_post - a) - beta
    return DidModel(a, beta, delta, a - c_pre, panel.t0)


def _usable_rows(panel: PanelSeries) -> np.ndarray:
    carry = (panel.times > panel.t0) & (panel.times <= panel.t0 + panel.m)
    return np.nonzero(~carry)[0]


def full_sample_residuals(panel: PanelSeries, method: str, y_o=None) -> np.ndarray:
    """Residuals of ``method`` fitted on all usable rows of ``Y^o``."""
    if y_o is None:
        y_o = apply_null(panel)
    rows = _usable_rows(panel)
    X, y = panel.X[rows], y_o[rows]
    if method == "sc":
        model = fit_sc(X, y, intercept=True, clip=np.inf)
        return y - model.predict_rows(X)
    if method == "ls":
        model = fit_ridge(X, y, lam=0.0, intercept=True, clip=np.inf)
        return y - model.predict_rows(X)
    if method == "did":
        fit = did_fit(panel, y_o, rows, restrict_delta=True)
        return y - fit.predict(panel.times[rows])
    raise ValueError(f"unknown permutation method {method!r}")


def sc_statistic(resid) -> float:
    """``(T - T0)^{-1/2} sum |resid|^2`` over the post-treatment residuals."""
    r = np.asarray(resid, dtype=float)
    return float(r @ r / np.sqrt(r.size))


@dataclass(frozen=True)
class PermutationResult:
    statistic: float
    p_value: float
    reject: bool
    placements: np.ndarray


def permutation_test(panel: PanelSeries, method: str = "sc", null: NullSpec | None = None,
                     level: float = 0.05, y=None) -> PermutationResult:
    """Cyclic-placement permutation test of the sharp null.

    The p-value is the share of placements (the true one included) whose
    statistic is at least the statistic of the true placement.
    """
    if method not in PERMUTATION_METHODS:
        raise ValueError(f"unknown permutation method {method!r}")
    base = panel if y is None else panel.with_outcome(y)
    y_o = apply_null(base, null)
    u = full_sample_residuals(base, method, y_o)
    n, k = u.size, base.t_m
    if n < k + 1:
        raise PanelError("series too short for the number of placements")
    sq = np.concatenate([u * u, u * u])
    cs = np.concatenate([[0.0], np.cumsum(sq)])
    starts = (n - k + np.arange(n)) % n
    stats = (cs[starts + k] - cs[starts]) / np.sqrt(k)
    s0 = stats[0]
    # ties within rounding count as "at least as large"
    p = float(np.mean(stats >= s0 - 1e-12 * max(1.0, abs(s0))))
    return PermutationResult(float(s0), p, bool(p <= level), stats)


def pre_period_counterfactual(panel: PanelSeries, method: str) -> np.ndarray:
    """Counterfactual from a comparator fitted on all rows up to ``t0``."""
    pre = np.nonzero(panel.times <= panel.t0)[0]
    X, y = panel.X[pre], panel.y[pre]
    if method == "sc":
        return fit_sc(X, y, intercept=True, clip=np.inf).predict_rows(panel.X)
    if method == "ls":
        return fit_ridge(X, y, lam=0.0, intercept=True, clip=np.inf).predict_rows(panel.X)
    if method == "did":
        return did_fit(panel).counterfactual(panel.times)
    raise ValueError(f"unknown method {method!r}")
