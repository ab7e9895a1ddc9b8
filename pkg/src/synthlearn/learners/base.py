from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

__all__ = ["LearnerError", "LearnerSpec", "FittedLearner", "predict", "default_clip"]

KINDS = ("sc-constrained", "ridge", "knn", "ar", "honest-forest", "noninformative")


class LearnerError(ValueError):
    """Invalid learner config or input."""


@dataclass(frozen=True)
class LearnerSpec:
    """Declarative description of one expert.

    ``clip`` is the prediction bound M; ``None`` means ten times the
    largest absolute outcome in the training block.
    """

    kind: str
    params: Mapping[str, Any] = field(default_factory=dict)
    clip: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise LearnerError(f"unknown learner kind {self.kind!r}")
        if self.clip is not None and not self.clip > 0:
            raise LearnerError("clip must be positive")
        p = dict(self.params)
        checks = {
            "ridge": [("lam", lambda v: v >= 0, "lam >= 0")],
            "knn": [("k", lambda v: v >= 1, "k >= 1")],
            "ar": [("lag", lambda v: v >= 1, "lag >= 1")],
            "honest-forest": [
                ("trees", lambda v: v >= 1, "trees >= 1"),
                ("leaf_size", lambda v: v >= 1, "leaf_size >= 1"),
                ("block", lambda v: v >= 1, "block >= 1"),
                ("mtry", lambda v: v >= 1, "mtry >= 1"),
            ],
            "noninformative": [("count", lambda v: v >= 0, "count >= 0")],
        }
        for name, ok, msg in checks.get(self.kind, []):
            if name in p and p[name] is not None and not ok(p[name]):
                raise LearnerError(f"{self.kind}: requires {msg}")
        object.__setattr__(self, "params", p)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "params": dict(self.params)}
        if self.clip is not None:
            d["clip"] = self.clip
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "LearnerSpec":
        return cls(d["kind"], dict(d.get("params", {})), d.get("clip"))


def default_clip(y) -> float:
    """Prediction bound ``10 * max|y|`` (1.0 for an all-zero block)."""
    top = float(np.max(np.abs(y))) if np.size(y) else 0.0
    return 10.0 * top if top > 0 else 1.0


class FittedLearner:
    """Immutable fitted expert with predictions clamped to ``[-clip, clip]``.

    Subclasses implement ``_raw`` (row-wise predictions before clamping).
    Learners whose forecasts depend on time or outcome history override
    ``predict_panel``.
    """

    kind: str = ""
    clip: float = 1.0
    n_features: int = 0

    def _raw(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _check(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.n_features:
            raise LearnerError(
                f"{self.kind}: expected {self.n_features} covariates, got {X.shape[1]}"
            )
        return X

    def predict_rows(self, X) -> np.ndarray:
        return np.clip(self._raw(self._check(X)), -self.clip, self.clip)

    def predict(self, row, history=None, time=None) -> float:
        return float(self.predict_rows(row)[0])

    def predict_panel(self, panel) -> np.ndarray:
        """Predictions at every time of ``panel``."""
        return self.predict_rows(panel.X)


def predict(model: FittedLearner, row, history=None, time=None) -> float:
    """Clamped point prediction of ``model`` at one covariate row."""
    return model.predict(row, history=history, time=time)
