"""Honest random forest for time-ordered training blocks.

Each tree splits the training block in two halves by time.  A circular
block bootstrap sample I of the first half places the splits, a sample J
of the later half supplies the leaf means, and every leaf must hold at
least ``leaf_size`` J-points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..resample import circular_block_indices
from .base import FittedLearner, LearnerError, default_clip

__all__ = ["HonestTree", "ForestModel", "fit_honest_forest", "grow_tree", "default_forest_block"]


@dataclass(frozen=True)
class HonestTree:
    feature: np.ndarray  # -1 marks a leaf
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    n_split: np.ndarray  # I-points per node
    n_est: np.ndarray  # J-points per node
    split_rows: np.ndarray  # I sample, rows of the training block
    est_rows: np.ndarray  # J sample
    split_seed: tuple

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf node index for every row of ``X``."""
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = self.feature[node] >= 0
        while active.any():
            idx = np.nonzero(active)[0]
            nd = node[idx]
            go_left = X[idx, self.feature[nd]] <= self.threshold[nd]
            node[idx] = np.where(go_left, self.left[nd], self.right[nd])
            active = self.feature[node] >= 0
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]


def _best_split(X, y, I, J, cols, k):
    xi = X[np.ix_(I, cols)]
    order = np.argsort(xi, axis=0, kind="stable")
    xs = np.take_along_axis(xi, order, axis=0)
    yc = y[I] - y[I].mean()
    ys = yc[order]
    n = I.size
    cs = np.cumsum(ys, axis=0)[:-1]
    cs2 = np.cumsum(ys * ys, axis=0)[:-1]
    tot, tot2 = ys.sum(axis=0), (ys * ys).sum(axis=0)
    nl = np.arange(1, n)[:, None].astype(float)
    nr = n - nl
    sse_l = cs2 - cs * cs / nl
    sse_r = (tot2 - cs2) - (tot - cs) ** 2 / nr
    gain = (tot2 - tot * tot / n) - sse_l - sse_r
    thr = 0.5 * (xs[:-1] + xs[1:])
    valid = xs[:-1] < xs[1:]
    xj = X[np.ix_(J, cols)]
    jl = (xj[None, :, :] <= thr[:, None, :]).sum(axis=1)
    valid &= (jl >= k) & (J.size - jl >= k)
    gain = np.where(valid, gain, -np.inf)
    flat = int(np.argmax(gain))
    pos, c = divmod(flat, len(cols))
    if not np.isfinite(gain[pos, c]) or gain[pos, c] <= 0:
        return None
    return int(cols[c]), float(thr[pos, c])


def grow_tree(X, y, split_rows, est_rows, leaf_size: int, mtry: int, split_seed) -> HonestTree:
    """Grow one honest tree; a pure function of its arguments."""
    rng = np.random.default_rng(np.random.SeedSequence(list(split_seed)))
    J_all = X.shape[1]
    feature, threshold, left, right, value, n_split, n_est = [], [], [], [], [], [], []

    def new_node(I, Jr):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(float(y[Jr].mean()))
        n_split.append(I.size)
        n_est.append(Jr.size)
        return len(feature) - 1

    root = new_node(split_rows, est_rows)
    stack = [(root, split_rows, est_rows)]
    while stack:
        node, I, Jr = stack.pop()
        if I.size < 2 or Jr.size < 2 * leaf_size:
            continue
        cols = np.sort(rng.choice(J_all, size=min(mtry, J_all), replace=False))
        best = _best_split(X, y, I, Jr, cols, leaf_size)
        if best is None:
            continue
        f, t = best
        li, ri = I[X[I, f] <= t], I[X[I, f] > t]
        lj, rj = Jr[X[Jr, f] <= t], Jr[X[Jr, f] > t]
        feature[node], threshold[node] = f, t
        ln = new_node(li, lj)
        rn = new_node(ri, rj)
        left[node], right[node] = ln, rn
        # right pushed first so the left subtree is expanded first
        stack.append((rn, ri, rj))
        stack.append((ln, li, lj))

    return HonestTree(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        value=np.array(value),
        n_split=np.array(n_split, dtype=np.int64),
        n_est=np.array(n_est, dtype=np.int64),
        split_rows=np.asarray(split_rows),
        est_rows=np.asarray(est_rows),
        split_seed=tuple(split_seed),
    )


class ForestModel(FittedLearner):
    kind = "honest-forest"

    def __init__(self, trees, X, y, leaf_size, mtry, clip):
        self.trees = list(trees)
        self.X = X
        self.y = y
        self.leaf_size = int(leaf_size)
        self.mtry = int(mtry)
        self.clip = float(clip)
        self.n_features = X.shape[1]

    def _raw(self, X):
        return np.mean([t.predict(X) for t in self.trees], axis=0)


def default_forest_block(n: int) -> int:
    return max(1, int(np.ceil((n / 2) ** (1.0 / 3.0))))


def fit_honest_forest(X, y, leaf_size: int = 5, block: int | None = None, trees: int = 200,
                      mtry: int | None = None, seed: int = 0,
                      clip: float | None = None) -> ForestModel:
    """Fit an honest forest on a time-ordered training block (rows in time order)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, J = X.shape
    b = default_forest_block(n) if block is None else int(block)
    if n < 4 * b:
        raise LearnerError(f"honest-forest: training block of {n} rows is shorter than 4b = {4 * b}")
    mtry = int(np.ceil(J / 3)) if mtry is None else int(mtry)
    half = n // 2
    first, second = np.arange(half), np.arange(half, n)
    if second.size < leaf_size:
        raise LearnerError("honest-forest: estimation half holds fewer points than leaf_size")
    grown = []
    for i in range(int(trees)):
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), i, 0]))
        I = circular_block_indices(first, b, first.size, rng)
        Jr = circular_block_indices(second, b, second.size, rng)
        grown.append(grow_tree(X, y, I, Jr, leaf_size, mtry, (int(seed), i, 1)))
    return ForestModel(grown, X, y, leaf_size, mtry, default_clip(y) if clip is None else clip)
