"""Expert pool: bounded base learners fitted on the training block."""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from ..panel import PanelSeries
from .base import KINDS, FittedLearner, LearnerError, LearnerSpec, default_clip, predict
from .forest import ForestModel, HonestTree, default_forest_block, fit_honest_forest, grow_tree
from .linear import (
    FittedAR,
    FittedLinear,
    FittedSC,
    SCWeights,
    fit_ar,
    fit_ridge,
    fit_sc,
    project_simplex,
    sc_objective,
    solve_ridge,
)
from .neighbors import FittedKNN, fit_knn
from .noise import FittedNoise, make_noninformative

__all__ = [
    "KINDS",
    "LearnerError",
    "LearnerSpec",
    "FittedLearner",
    "SCWeights",
    "ForestModel",
    "HonestTree",
    "default_clip",
    "predict",
    "fit_sc",
    "fit_ridge",
    "fit_knn",
    "fit_ar",
    "fit_honest_forest",
    "grow_tree",
    "default_forest_block",
    "make_noninformative",
    "project_simplex",
    "sc_objective",
    "solve_ridge",
    "fit_learner",
    "fit_pool",
    "prediction_matrix",
    "FittedAR",
    "FittedKNN",
    "FittedLinear",
    "FittedNoise",
    "FittedSC",
]


def fit_learner(spec: LearnerSpec, X, y, origin: int = 1, seed: int = 0) -> list[FittedLearner]:
    """Fit one spec on training rows ``(X, y)`` ending at time ``origin``.

    Returns a list because a ``noninformative`` spec expands to ``count``
    experts.
    """
    if isinstance(spec, dict):
        spec = LearnerSpec.from_dict(spec)
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    p = spec.params
    clip = spec.clip if spec.clip is not None else default_clip(y)
    kind = spec.kind
    if kind == "sc-constrained":
        return [fit_sc(X, y, intercept=bool(p.get("intercept", False)), clip=clip)]
    if kind == "ridge":
        return [fit_ridge(X, y, lam=float(p.get("lam", 0.0)),
                          intercept=bool(p.get("intercept", False)), clip=clip)]
    if kind == "knn":
        return [fit_knn(X, y, k=int(p.get("k", 5)), clip=clip)]
    if kind == "ar":
        return [fit_ar(y, lag=int(p.get("lag", 3)), origin=origin, n_features=X.shape[1], clip=clip)]
    if kind == "honest-forest":
        return [fit_honest_forest(
            X, y,
            leaf_size=int(p.get("leaf_size", 5)),
            block=p.get("block"),
            trees=int(p.get("trees", 200)),
            mtry=p.get("mtry"),
            seed=int(p.get("seed", seed)),
            clip=clip,
        )]
    if kind == "noninformative":
        return make_noninformative(int(p.get("seed", seed)), int(p.get("count", 1)),
                                   n_features=X.shape[1],
                                   clip=spec.clip if spec.clip is not None else 10.0)
    raise LearnerError(f"unknown learner kind {kind!r}")


def fit_pool(specs: Iterable, panel: PanelSeries, times: Sequence[int] | None = None,
             seed: int = 0) -> list[FittedLearner]:
    """Fit every spec on the panel rows at ``times`` (default ``[T-, 1]``)."""
    times = np.arange(panel.t_minus, 2) if times is None else np.asarray(times)
    rows = panel.rows(times)
    out: list[FittedLearner] = []
    for i, spec in enumerate(specs):
        out.extend(fit_learner(spec, panel.X[rows], panel.y[rows], origin=int(times[-1]),
                               seed=seed + i))
    if not out:
        raise LearnerError("the learner pool is empty")
    return out


def prediction_matrix(learners: Sequence[FittedLearner], panel: PanelSeries) -> np.ndarray:
    """Predictions of every learner at every panel time, shape ``(n, p)``."""
    return np.column_stack([m.predict_panel(panel) for m in learners])
