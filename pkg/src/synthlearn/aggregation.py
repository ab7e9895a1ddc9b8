"""Expert weighting, ensemble prediction and one-step-ahead regret.

Weights are potential-function weights over cumulative losses or
regrets.  ``online_weight_path`` returns, for every time of a block, the
weights built from strictly earlier times of that block.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .learners.linear import solve_ridge

__all__ = [
    "quadratic_loss",
    "absolute_loss",
    "LossMatrix",
    "loss_matrix",
    "WeightScheme",
    "exp_weights",
    "poly_weights",
    "ftl_weights",
    "ls_weights",
    "ensemble_predict",
    "online_weight_path",
    "fit_weights",
    "eta_testing",
    "eta_regret",
    "regret_bound",
    "scheme_eta",
    "RegretReport",
    "regret_report",
]


def quadratic_loss(y, yhat):
    """``(y - yhat)^2``, elementwise."""
    d = np.subtract(y, yhat)
    return d * d


def absolute_loss(y, yhat):
    return np.abs(np.subtract(y, yhat))


_LOSSES = {"quadratic": quadratic_loss, "absolute": absolute_loss}


@dataclass(frozen=True)
class LossMatrix:
    """Per-time, per-expert losses over a block.

    Attributes
    ----------
    times : ndarray, shape (T,)
    y : ndarray, shape (T,)
    preds : ndarray, shape (T, p)
    values : ndarray, shape (T, p)
        ``l(y_t, preds[t, j])``.
    loss : str
    """

    times: np.ndarray
    y: np.ndarray
    preds: np.ndarray
    values: np.ndarray
    loss: str = "quadratic"

    @property
    def p(self) -> int:
        return int(self.values.shape[1])

    def cumulative(self) -> np.ndarray:
        return self.values.sum(axis=0)


def loss_matrix(y, preds, times=None, loss: str = "quadratic") -> LossMatrix:
    y = np.asarray(y, dtype=float)
    preds = np.asarray(preds, dtype=float)
    if preds.ndim == 1:
        preds = preds[:, None]
    if preds.shape[0] != y.size:
        raise ValueError("preds must have one row per target")
    if loss not in _LOSSES:
        raise ValueError(f"unknown loss {loss!r}")
    vals = _LOSSES[loss](y[:, None], preds)
    if not np.all(np.isfinite(vals)):
        raise ValueError("losses must be finite")
    times = np.arange(1, y.size + 1) if times is None else np.asarray(times)
    return LossMatrix(times, y, preds, vals, loss)


def exp_weights(cumloss, eta: float) -> np.ndarray:
    """``w_j`` proportional to ``exp(-eta * cumloss_j)``, max-shifted."""
    c = np.asarray(cumloss, dtype=float)
    if not eta > 0:
        raise ValueError("eta must be positive")
    z = -eta * (c - c.min())
    w = np.exp(z)
    return w / w.sum()


def poly_weights(regret, q: float) -> np.ndarray:
    """``w_j`` proportional to ``(R_j)_+^(q-1)``; uniform if no regret is positive."""
    if not q > 1:
        raise ValueError("q must exceed 1")
    r = np.maximum(np.asarray(regret, dtype=float), 0.0)
    w = r ** (q - 1.0)
    s = w.sum()
    if not s > 0:
        return np.full(r.size, 1.0 / r.size)
    return w / s


def ftl_weights(cumloss) -> np.ndarray:
    """One-hot on the smallest cumulative loss; ties go to the lowest index."""
    c = np.asarray(cumloss, dtype=float)
    w = np.zeros(c.size)
    w[int(np.argmin(c))] = 1.0
    return w


def ls_weights(preds, y) -> np.ndarray:
    """Unconstrained least-squares stacking coefficients (no intercept)."""
    P = np.atleast_2d(np.asarray(preds, dtype=float))
    if P.shape[0] != np.size(y) and P.shape[1] == np.size(y):
        P = P.T
    return solve_ridge(P.T @ P, P.T @ np.asarray(y, dtype=float), 0.0)


def ensemble_predict(w, expert_preds):
    """``sum_j w_j * pred_j``; ``expert_preds`` may be a (T, p) matrix."""
    w = np.asarray(w, dtype=float)
    P = np.asarray(expert_preds, dtype=float)
    if P.shape[-1] != w.size:
        raise ValueError(f"expected {w.size} expert predictions, got {P.shape[-1]}")
    return P @ w


def eta_testing(t_plus: int, scale: float = 1.0) -> float:
    """Default learning rate ``scale / T+`` for testing and ATE."""
    return float(scale) / max(int(t_plus), 1)


def eta_regret(p: int, M: float, T0: int) -> float:
    """``sqrt(8 log p / (M^2 T0))``; experts live in ``[-M/2, M/2]``."""
    if p < 2:
        return 1.0
    return float(np.sqrt(8.0 * np.log(p) / (M * M * T0)))


def regret_bound(p: int, M: float, T0: int, ymax: float) -> float:
    """``C sqrt(log p / (2 T0))`` with ``C = 2M(max|Y| + M)``."""
    C = 2.0 * M * (ymax + M)
    return float(C * np.sqrt(np.log(p) / (2.0 * T0)))


@dataclass(frozen=True)
class WeightScheme:
    """How expert weights are computed.

    ``kind`` is one of ``exponential``, ``polynomial``, ``follow-leader``
    and ``least-squares``.  For the exponential kind ``eta_mode`` picks the
    learning rate: ``testing`` uses ``eta_scale / T+``, ``regret`` the
    regret-lemma rate and ``fixed`` the given ``eta``.
    """

    kind: str = "exponential"
    eta: float | None = None
    q: float = 2.0
    eta_mode: str = "testing"
    eta_scale: float = 1.0
    loss: str = "quadratic"

    KINDS = ("exponential", "polynomial", "follow-leader", "least-squares")
    MODES = ("testing", "regret", "fixed")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown weight scheme {self.kind!r}")
        if self.eta_mode not in self.MODES:
            raise ValueError(f"unknown eta mode {self.eta_mode!r}")
        if self.eta is not None and not self.eta > 0:
            raise ValueError("eta must be positive")
        if self.eta_mode == "fixed" and self.kind == "exponential" and self.eta is None:
            raise ValueError("fixed eta mode needs eta")
        if not self.q > 1:
            raise ValueError("q must exceed 1")
        if not self.eta_scale > 0:
            raise ValueError("eta_scale must be positive")
        if self.loss not in _LOSSES:
            raise ValueError(f"unknown loss {self.loss!r}")

    def resolve_eta(self, t_plus: int = 1, p: int = 2, M: float = 1.0, T0: int = 1) -> float:
        if self.eta is not None and self.eta_mode == "fixed":
            return float(self.eta)
        if self.eta_mode == "regret":
            return eta_regret(p, M, T0)
        if self.eta is not None:
            return float(self.eta)
        return eta_testing(t_plus, self.eta_scale)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "eta": self.eta,
            "q": self.q,
            "eta_mode": self.eta_mode,
            "eta_scale": self.eta_scale,
            "loss": self.loss,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: Mapping) -> "WeightScheme":
        d = dict(d)
        if d.get("eta") is not None and "eta_mode" not in d:
            d["eta_mode"] = "fixed"
        return cls(**{k: d[k] for k in ("kind", "eta", "q", "eta_mode", "eta_scale", "loss") if k in d})


def scheme_eta(scheme: WeightScheme, preds, t_plus: int, n_w: int) -> float | None:
    """Learning rate for ``scheme`` on a weight block of ``n_w`` rows.

    In regret mode ``M`` is twice the largest absolute expert prediction.
    Returns ``None`` for schemes without a learning rate.
    """
    if scheme.kind != "exponential":
        return None
    P = np.asarray(preds, dtype=float)
    M = 2.0 * float(np.max(np.abs(P))) if P.size else 1.0
    return scheme.resolve_eta(t_plus=t_plus, p=P.shape[-1], M=M if M > 0 else 1.0, T0=n_w)


def _ls_path(preds, y):
    T, p = preds.shape
    W = np.empty((T, p))
    W[0] = 1.0 / p
    G = np.zeros((p, p))
    c = np.zeros(p)
    for t in range(1, T):
        G += np.outer(preds[t - 1], preds[t - 1])
        c += preds[t - 1] * y[t - 1]
        W[t] = solve_ridge(G, c, 0.0)
    return W


def online_weight_path(losses: LossMatrix, scheme: WeightScheme, eta: float | None = None) -> np.ndarray:
    """Weights ``w^{t-1}`` used at each time of the block, shape ``(T, p)``.

    Row 0 is uniform; row ``k`` is computed from block rows ``0..k-1``.
    """
    T, p = losses.values.shape
    if T == 0:
        raise ValueError("empty block")
    if scheme.kind == "least-squares":
        return _ls_path(losses.preds, losses.y)
    cum = np.vstack([np.zeros(p), np.cumsum(losses.values, axis=0)[:-1]])
    if scheme.kind == "exponential":
        if eta is None:
            eta = scheme.resolve_eta()
        z = -eta * (cum - cum.min(axis=1, keepdims=True))
        W = np.exp(z)
        return W / W.sum(axis=1, keepdims=True)
    if scheme.kind == "follow-leader":
        W = np.zeros((T, p))
        W[np.arange(T), np.argmin(cum, axis=1)] = 1.0
        W[0] = 1.0 / p  # nothing observed yet
        return W
    # polynomial: regret against the ensemble's own one-step predictions
    lf = _LOSSES[losses.loss]
    W = np.empty((T, p))
    R = np.zeros(p)
    for t in range(T):
        W[t] = poly_weights(R, scheme.q)
        ens = float(losses.preds[t] @ W[t])
        R += lf(losses.y[t], ens) - losses.values[t]
    return W


def fit_weights(y, preds, scheme: WeightScheme, eta: float | None = None) -> np.ndarray:
    """Weights after observing the whole block (``w^T``)."""
    y = np.asarray(y, dtype=float)
    preds = np.asarray(preds, dtype=float)
    if scheme.kind == "least-squares":
        return ls_weights(preds, y)
    L = _LOSSES[scheme.loss](y[:, None], preds)
    if scheme.kind == "exponential":
        return exp_weights(L.sum(axis=0), scheme.resolve_eta() if eta is None else eta)
    if scheme.kind == "follow-leader":
        return ftl_weights(L.sum(axis=0))
    lm = LossMatrix(np.arange(y.size), y, preds, L, scheme.loss)
    W = online_weight_path(lm, scheme)
    ens = np.einsum("tp,tp->t", W, preds)
    R = (_LOSSES[scheme.loss](y, ens)[:, None] - L).sum(axis=0)
    return poly_weights(R, scheme.q)


@dataclass
class RegretReport:
    """One-step-ahead regret of the online ensemble over a block.

    ``regret`` is the average ensemble loss minus the best expert's
    average loss; ``regret_vector`` holds each expert's cumulative regret.
    """

    times: np.ndarray
    ensemble_cumloss: np.ndarray
    best_cumloss: np.ndarray
    regret_vector: np.ndarray
    regret: float
    bound: float
    eta: float
    M: float
    holds: bool = field(default=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["time", "ensemble_loss", "best_expert_loss", "regret"])
        for t, e, b in zip(self.times, self.ensemble_cumloss, self.best_cumloss):
            w.writerow([int(t), repr(float(e)), repr(float(b)), repr(float(e - b))])
        return buf.getvalue()


def regret_report(y, expert_preds, scheme: WeightScheme | None = None, M: float | None = None,
                  times=None) -> RegretReport:
    """Regret of the exponential ensemble with the regret-lemma learning rate.

    ``M`` defaults to twice the largest absolute expert prediction, so the
    experts lie in ``[-M/2, M/2]``.
    """
    y = np.asarray(y, dtype=float)
    P = np.asarray(expert_preds, dtype=float)
    if P.ndim == 1:
        P = P[:, None]
    T0, p = P.shape
    if M is None:
        M = 2.0 * float(np.max(np.abs(P))) if P.size else 1.0
        M = M if M > 0 else 1.0
    scheme = scheme or WeightScheme("exponential", eta_mode="regret")
    eta = scheme.resolve_eta(p=p, M=M, T0=T0)
    lm = loss_matrix(y, P, times)
    W = online_weight_path(lm, scheme, eta=eta)
    ens = np.einsum("tp,tp->t", W, P)
    ens_loss = quadratic_loss(y, ens)
    ens_cum = np.cumsum(ens_loss)
    exp_cum = np.cumsum(lm.values, axis=0)
    best_cum = exp_cum.min(axis=1)
    regret = float((ens_cum[-1] - best_cum[-1]) / T0)
    bound = regret_bound(p, M, T0, float(np.max(np.abs(y)))) if p > 1 else 0.0
    return RegretReport(
        times=lm.times,
        ensemble_cumloss=ens_cum,
        best_cumloss=best_cum,
        regret_vector=ens_cum[-1] - exp_cum[-1],
        regret=regret,
        bound=bound,
        eta=eta,
        M=M,
        holds=bool(regret <= bound + 1e-12),
    )
