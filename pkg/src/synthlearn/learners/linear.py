"""Linear experts: simplex-constrained synthetic control, ridge, AR(p)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .base import FittedLearner, LearnerError, default_clip

__all__ = [
    "SCWeights",
    "project_simplex",
    "fit_sc",
    "sc_objective",
    "fit_ridge",
    "fit_ar",
    "FittedSC",
    "FittedLinear",
    "FittedAR",
    "solve_ridge",
]

_FALLBACK_LAM = 1e-8


def project_simplex(v) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-based)."""
    v = np.asarray(v, dtype=float)
    # the projection commutes with a common shift; centring keeps the sums small
    v = v - v.max()
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / ind > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    w = np.maximum(v - theta, 0.0)
    return w / w.sum()


def solve_ridge(G: np.ndarray, c: np.ndarray, lam: float) -> np.ndarray:
    """Solve ``(G + lam I) b = c`` for symmetric PSD ``G``.

    An (almost) singular system at ``lam = 0`` is regularised with
    ``lam = 1e-8``.
    """
    J = G.shape[0]
    if lam == 0:
        eig = linalg.eigvalsh(G)
        if eig[0] <= 1e-12 * max(eig[-1], 1e-300):
            lam = _FALLBACK_LAM
    A = G + lam * np.eye(J)
    try:
        return linalg.solve(A, c, assume_a="sym")
    except (linalg.LinAlgError, ValueError):
        return linalg.solve(G + _FALLBACK_LAM * np.eye(J), c, assume_a="sym")


@dataclass(frozen=True)
class SCWeights:
    beta: np.ndarray
    intercept: float | None = None


def sc_objective(X, y, beta, intercept=None) -> float:
    r = np.asarray(y, float) - np.asarray(X, float) @ beta
    if intercept is not None:
        r = r - intercept
    return float(r @ r)


def _sc_pgd(X: np.ndarray, y: np.ndarray, tol: float, max_iter: int) -> np.ndarray:
    J = X.shape[1]
    G = X.T @ X
    c = X.T @ y
    yy = float(y @ y)
    L = 2.0 * float(linalg.eigvalsh(G)[-1])
    beta = np.full(J, 1.0 / J)
    if L <= 0:
        return beta
    f = float(beta @ G @ beta - 2 * c @ beta + yy)
    for _ in range(max_iter):
        grad = 2.0 * (G @ beta - c)
        beta = project_simplex(beta - grad / L)
        f_new = float(beta @ G @ beta - 2 * c @ beta + yy)
        if abs(f - f_new) < tol * max(1.0, abs(f_new)):
            break
        f = f_new
    return beta


class FittedSC(FittedLearner):
    kind = "sc-constrained"

    def __init__(self, weights: SCWeights, clip: float):
        self.weights = weights
        self.clip = float(clip)
        self.n_features = weights.beta.size

    def _raw(self, X):
        out = X @ self.weights.beta
        if self.weights.intercept is not None:
            out = out + self.weights.intercept
        return out


def fit_sc(X, y, intercept: bool = False, clip: float | None = None,
           tol: float = 1e-10, max_iter: int = 10_000) -> FittedSC:
    """Least squares with weights on the probability simplex.

    Solved by projected gradient descent with step ``1/L``; stops when
    the objective changes by less than ``tol`` (relative to the objective
    once it exceeds one) or after ``max_iter`` iterations.  With
    ``intercept=True`` an unconstrained intercept is fitted by centring.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2 or X.shape[1] < 1:
        raise LearnerError("fit_sc needs at least 2 rows and 1 column")
    if intercept:
        xm, ym = X.mean(axis=0), y.mean()
        beta = _sc_pgd(X - xm, y - ym, tol, max_iter)
        w = SCWeights(beta, float(ym - xm @ beta))
    else:
        w = SCWeights(_sc_pgd(X, y, tol, max_iter))
    return FittedSC(w, default_clip(y) if clip is None else clip)


class FittedLinear(FittedLearner):
    kind = "ridge"

    def __init__(self, beta, intercept: float, clip: float):
        self.beta = np.asarray(beta, dtype=float)
        self.intercept = float(intercept)
        self.clip = float(clip)
        self.n_features = self.beta.size

    def _raw(self, X):
        return X @ self.beta + self.intercept


def fit_ridge(X, y, lam: float = 0.0, intercept: bool = False,
              clip: float | None = None) -> FittedLinear:
    """Minimise ``||y - X b||^2 + lam ||b||^2`` via the normal equations.

    With ``intercept=True`` the intercept is unpenalised (fitted by
    centring).
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if lam < 0:
        raise LearnerError("lam must be nonnegative")
    if intercept:
        xm, ym = X.mean(axis=0), y.mean()
        Xc, yc = X - xm, y - ym
    else:
        xm, ym = np.zeros(X.shape[1]), 0.0
        Xc, yc = X, y
    beta = solve_ridge(Xc.T @ Xc, Xc.T @ yc, float(lam))
    b0 = float(ym - xm @ beta) if intercept else 0.0
    return FittedLinear(beta, b0, default_clip(y) if clip is None else clip)


class FittedAR(FittedLearner):
    """AR(p) with intercept; ignores covariates.

    Forecasts beyond ``origin`` are produced recursively from the last
    ``p`` outcomes observed up to ``origin``, clamping every step.
    """

    kind = "ar"

    def __init__(self, intercept, coefs, origin: int, tail, n_features: int, clip: float):
        self.intercept = float(intercept)
        self.coefs = np.asarray(coefs, dtype=float)
        self.origin = int(origin)
        self.tail = np.asarray(tail, dtype=float)
        self.n_features = int(n_features)
        self.clip = float(clip)
        s = 1.0 - self.coefs.sum()
        self._mean = self.intercept / s if abs(s) > 1e-8 else float(self.tail.mean())

    @property
    def lag(self) -> int:
        return self.coefs.size

    def _step(self, recent) -> float:
        # recent[-1] is the most recent value
        lags = np.asarray(recent, dtype=float)[::-1][: self.lag]
        return float(np.clip(self.intercept + lags @ self.coefs, -self.clip, self.clip))

    def forecast(self, horizon: int, history=None) -> np.ndarray:
        """Recursive forecasts for steps ``1 .. horizon`` after the history."""
        buf = list(self.tail if history is None else np.asarray(history, float)[-self.lag:])
        if len(buf) < self.lag:
            raise LearnerError(f"ar: need {self.lag} history values")
        out = np.empty(horizon)
        for h in range(horizon):
            out[h] = self._step(buf[-self.lag:])
            buf.append(out[h])
        return out

    def predict(self, row, history=None, time=None) -> float:
        self._check(row)
        return float(self.forecast(1, history)[0])

    def _raw(self, X):
        return np.full(X.shape[0], self._mean)

    def predict_panel(self, panel) -> np.ndarray:
        out = np.empty(panel.n)
        o = panel.rows([self.origin])[0]
        y = panel.y
        inside = self.intercept + sum(
            self.coefs[i] * np.r_[np.full(i + 1, np.nan), y[: -(i + 1)]]
            for i in range(self.lag)
        )
        inside = np.where(np.isnan(inside), self._mean, inside)
        out[: o + 1] = np.clip(inside[: o + 1], -self.clip, self.clip)
        if o + 1 < panel.n:
            out[o + 1:] = self.forecast(panel.n - o - 1)
        return out


def fit_ar(y, lag: int = 3, origin: int = 1, n_features: int = 1,
           clip: float | None = None) -> FittedAR:
    """Least-squares AR(``lag``) with unpenalised intercept.

    ``y`` is the training block ending at time ``origin``.
    """
    y = np.asarray(y, dtype=float)
    p = int(lag)
    if p < 1:
        raise LearnerError("lag must be >= 1")
    if y.size <= p + 1:
        raise LearnerError(f"ar: training length {y.size} must exceed lag + 1 = {p + 1}")
    Z = np.column_stack([y[p - i - 1: y.size - i - 1] for i in range(p)])
    target = y[p:]
    zm, tm = Z.mean(axis=0), target.mean()
    Zc = Z - zm
    coefs = solve_ridge(Zc.T @ Zc, Zc.T @ (target - tm), 0.0)
    b0 = tm - zm @ coefs
    return FittedAR(b0, coefs, origin, y[-p:], n_features,
                    default_clip(y) if clip is None else clip)
