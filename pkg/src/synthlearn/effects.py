"""Average and heterogeneous treatment effects.

The ATE is the mean post-treatment gap between the outcome and the
ensemble counterfactual, minus the same gap over the later half of the
pre-treatment period.  Heterogeneous effects use a T-learner (separate
pre- and post-treatment ensembles) or an X-learner (ensembles fitted to
imputed effects and mixed convexly).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .aggregation import WeightScheme, fit_weights, scheme_eta
from .learners import FittedLearner, fit_pool, prediction_matrix
from .panel import PanelError, PanelSeries, make_splits

__all__ = [
    "Ensemble",
    "fit_ensemble",
    "AteReport",
    "estimate_ate",
    "CateModel",
    "fit_t_learner",
    "fit_x_learner",
    "cate_mse",
    "rate_diagnostic",
    "post_split",
]


@dataclass(frozen=True)
class Ensemble:
    """Fitted experts and their aggregation weights."""

    learners: tuple
    weights: np.ndarray

    def predict_panel(self, panel: PanelSeries) -> np.ndarray:
        return prediction_matrix(self.learners, panel) @ self.weights


def fit_ensemble(specs, panel: PanelSeries, train_times, weight_times, scheme: WeightScheme,
                 seed: int = 0) -> Ensemble:
    """Fit ``specs`` on ``train_times`` and weights on ``weight_times``."""
    learners = fit_pool(specs, panel, train_times, seed=seed)
    P = prediction_matrix(learners, panel)
    rows = panel.rows(weight_times)
    eta = scheme_eta(scheme, P, panel.t_plus, rows.size)
    w = fit_weights(panel.y[rows], P[rows], scheme, eta)
    return Ensemble(tuple(learners), w)


@dataclass(frozen=True)
class AteReport:
    """``ate = post_mean_gap - pre_bias``."""

    ate: float
    post_mean_gap: float
    pre_bias: float
    weights: np.ndarray
    eval_window: tuple
    correct_window: tuple

    def to_dict(self) -> dict:
        return {
            "ate": self.ate,
            "post_mean_gap": self.post_mean_gap,
            "pre_bias": self.pre_bias,
            "weights": [float(v) for v in self.weights],
            "eval_window": list(self.eval_window),
            "correct_window": list(self.correct_window),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def estimate_ate(panel: PanelSeries, learners: Sequence[FittedLearner],
                 scheme: WeightScheme | None = None, preds: np.ndarray | None = None,
                 weights=None) -> AteReport:
    """Bias-corrected ATE from learners already fitted on ``[T-, 1]``.

    Weights are fitted on ``[2, t0]`` unless given.  The correction gap
    is averaged over ``[t0 // 2 + 1, t0]``; the effect gap over
    ``[t0 + m + 1, T+]``.
    """
    scheme = scheme or WeightScheme()
    plan = make_splits(panel)
    P = prediction_matrix(learners, panel) if preds is None else np.asarray(preds, dtype=float)
    if weights is None:
        rows = panel.rows(plan.weight)
        weights = fit_weights(panel.y[rows], P[rows], scheme,
                              scheme_eta(scheme, P, panel.t_plus, rows.size))
    weights = np.asarray(weights, dtype=float)
    gap = panel.y - P @ weights
    er, cr = panel.rows(plan.eval), panel.rows(plan.correct)
    if er.size == 0 or cr.size == 0:
        raise PanelError("empty evaluation or correction block")
    post = float(gap[er].mean())
    pre = float(gap[cr].mean())
    return AteReport(post - pre, post, pre, weights,
                     (int(plan.eval[0]), int(plan.eval[-1])),
                     (int(plan.correct[0]), int(plan.correct[-1])))


def post_split(panel: PanelSeries) -> tuple[np.ndarray, np.ndarray]:
    """Post-treatment training ``(t0+m, s]`` and weight ``(s, T+]`` times, ``s = (t0+m+T+)//2``."""
    if panel.t_m < 8:
        raise PanelError("post-treatment period too short for a post-period ensemble (need 8)")
    s = (panel.t0 + panel.m + panel.t_plus) // 2
    return np.arange(panel.t0 + panel.m + 1, s + 1), np.arange(s + 1, panel.t_plus + 1)


@dataclass(frozen=True)
class CateModel:
    """Heterogeneous-effect model.

    ``mode == "T"``: ``tau(x) = Y1(x) - Y0(x)`` from ``ens0`` and ``ens1``.
    ``mode == "X"``: ``tau(x) = mix[0] tau0(x) + mix[1] tau1(x)`` where
    ``tau0`` and ``tau1`` are ensembles fitted to imputed effects on the
    residual panel ``resid``.
    """

    mode: str
    ens0: Ensemble
    ens1: Ensemble
    tau0: Ensemble | None = None
    tau1: Ensemble | None = None
    mix: tuple = (0.5, 0.5)
    resid: np.ndarray | None = None
    sign_fix: bool = True

    def components(self, panel: PanelSeries) -> tuple[np.ndarray, np.ndarray]:
        """``(tau0, tau1)`` at every panel time (X mode)."""
        rp = panel.with_outcome(self.resid)
        return self.tau0.predict_panel(rp), self.tau1.predict_panel(rp)

    def predict_panel(self, panel: PanelSeries) -> np.ndarray:
        if self.mode == "T":
            return self.ens1.predict_panel(panel) - self.ens0.predict_panel(panel)
        t0, t1 = self.components(panel)
        return self.mix[0] * t0 + self.mix[1] * t1


def fit_t_learner(panel: PanelSeries, specs, scheme: WeightScheme | None = None,
                  seed: int = 0) -> CateModel:
    """Pre-treatment ensemble ``(w0, g0)`` and post-treatment ensemble ``(w1, g1)``."""
    scheme = scheme or WeightScheme()
    plan = make_splits(panel)
    tr1, wt1 = post_split(panel)
    ens0 = fit_ensemble(specs, panel, plan.train, plan.weight, scheme, seed)
    ens1 = fit_ensemble(specs, panel, tr1, wt1, scheme, seed + 7919)
    return CateModel("T", ens0, ens1)


def fit_x_learner(panel: PanelSeries, specs, scheme: WeightScheme | None = None,
                  residual_specs=None, x_learner_sign_fix: bool = True, seed: int = 0,
                  t_model: CateModel | None = None) -> CateModel:
    """X-learner on top of the T-learner ensembles.

    Imputed effects are ``Y - Y0hat`` after treatment and ``Y1hat - Y``
    before treatment (``Y - Y1hat`` when ``x_learner_sign_fix`` is off).
    Each is fitted by an ensemble over ``residual_specs`` using the same
    train/weight splits as the T-learner; the mixing weights are the pre-
    and post-treatment shares of the usable sample.
    """
    scheme = scheme or WeightScheme()
    residual_specs = specs if residual_specs is None else residual_specs
    t_model = t_model or fit_t_learner(panel, specs, scheme, seed)
    y0 = t_model.ens0.predict_panel(panel)
    y1 = t_model.ens1.predict_panel(panel)
    pre = panel.times <= panel.t0
    w0 = (y1 - panel.y) if x_learner_sign_fix else (panel.y - y1)
    resid = np.where(pre, w0, panel.y - y0)
    rp = panel.with_outcome(resid)
    plan = make_splits(panel)
    tr1, wt1 = post_split(panel)
    tau0 = fit_ensemble(residual_specs, rp, plan.train, plan.weight, scheme, seed + 104729)
    tau1 = fit_ensemble(residual_specs, rp, tr1, wt1, scheme, seed + 1299709)
    n_pre = int(pre.sum())
    n_post = panel.t_m
    n = n_pre + n_post
    return CateModel("X", t_model.ens0, t_model.ens1, tau0, tau1,
                     (n_pre / n, n_post / n), resid, x_learner_sign_fix)


def cate_mse(model: CateModel, panel: PanelSeries, truth) -> float:
    """Root mean squared error of ``tau_hat`` against ``truth`` over all panel times.

    ``truth`` is an array of ``tau(X_t)`` or a callable on the covariate
    matrix.
    """
    tau = truth(panel.X) if callable(truth) else np.asarray(truth, dtype=float)
    d = model.predict_panel(panel) - tau
    return float(np.sqrt(np.mean(d * d)))


def rate_diagnostic(mse_by_T: Mapping[int, float], step: int = 200) -> dict:
    """``S(T) = log sqrt(MSE(T) / MSE(T - step))`` for every ``T`` with a predecessor."""
    keys = sorted(mse_by_T)
    for a, b in zip(keys, keys[1:]):
        if b - a != step:
            raise ValueError(f"consecutive T values must differ by {step}")
    return {T: float(0.5 * np.log(mse_by_T[T] / mse_by_T[T - step]))
            for T in keys if T - step in mse_by_T}
