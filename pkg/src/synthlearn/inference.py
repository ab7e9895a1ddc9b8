"""Sharp and average null tests with circular block bootstrap critical values.

Learners are fitted once.  Replicates resample the tuple
``(Y^o_t, g_1(X_t), ..., g_p(X_t))`` jointly over the weight and
evaluation blocks, recompute the weights on the pseudo weight block and
the statistic on the pseudo post block.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .aggregation import WeightScheme, fit_weights, scheme_eta
from .learners import LearnerSpec, fit_pool, prediction_matrix
from .panel import NullSpec, PanelError, PanelSeries, apply_null
from .resample import circular_block_indices, default_block_size, replicate_rng

__all__ = [
    "stat_sharp",
    "stat_average",
    "STATISTICS",
    "circular_block_indices",
    "TestSpec",
    "TestReport",
    "bootstrap_test",
    "bootstrap_predictions",
    "eligible_rows",
    "placebo_panels",
    "placebo_suite",
]


def stat_sharp(y_o, yhat) -> float:
    """``T_m^{-1/2} sum (y_o - yhat)^2``."""
    r = np.asarray(y_o, dtype=float) - np.asarray(yhat, dtype=float)
    if r.size == 0:
        raise ValueError("empty evaluation block")
    return float(r @ r / np.sqrt(r.size))


def stat_average(y_o, yhat) -> float:
    """``(sum (y_o - yhat))^2 / T_m``."""
    r = np.asarray(y_o, dtype=float) - np.asarray(yhat, dtype=float)
    if r.size == 0:
        raise ValueError("empty evaluation block")
    s = r.sum()
    return float(s * s / r.size)


STATISTICS = {"sharp": stat_sharp, "average": stat_average}


def _batch_stat(kind: str, R: np.ndarray) -> np.ndarray:
    # R: (B, T_m) residuals
    n = R.shape[1]
    if kind == "sharp":
        return np.einsum("bt,bt->b", R, R) / np.sqrt(n)
    s = R.sum(axis=1)
    return s * s / n


@dataclass(frozen=True)
class TestSpec:
    """Configuration of one bootstrap test.

    ``block=None`` selects ``max(2, round(n^(1/3)))`` with ``n`` the panel
    length.  ``null=None`` is the additive zero-effect null.
    """

    statistic: str = "sharp"
    null: NullSpec | None = None
    alpha: float = 0.05
    B: int = 200
    block: int | None = None
    scheme: WeightScheme = field(default_factory=WeightScheme)
    seed: int = 0

    __test__ = False

    def __post_init__(self):
        if self.statistic not in STATISTICS:
            raise ValueError(f"unknown statistic {self.statistic!r}")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if int(self.B) < 50:
            raise ValueError("B must be at least 50")
        if self.block is not None and int(self.block) < 2:
            raise ValueError("block size must be at least 2")

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "null": None if self.null is None else self.null.to_dict(),
            "alpha": self.alpha,
            "B": self.B,
            "block": self.block,
            "scheme": self.scheme.to_dict(),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: Mapping, panel: PanelSeries | None = None) -> "TestSpec":
        null = d.get("null")
        return cls(
            statistic=d.get("statistic", "sharp"),
            null=None if null is None else NullSpec.from_dict(null, panel),
            alpha=float(d.get("alpha", 0.05)),
            B=int(d.get("B", 200)),
            block=d.get("block"),
            scheme=WeightScheme.from_dict(d.get("scheme", {})),
            seed=int(d.get("seed", 0)),
        )


_JSON_FIELDS = ("statistic", "quantile", "p_value", "reject", "alpha", "B", "block", "kind",
                "weights")


@dataclass
class TestReport:
    """Outcome of a bootstrap test.

    ``reject`` holds iff ``statistic > quantile``; the p-value is
    ``(#{replicates >= statistic} + 1) / (B + 1)``.
    """

    statistic: float
    quantile: float
    p_value: float
    reject: bool
    alpha: float
    B: int
    block: int
    kind: str
    weights: np.ndarray
    replicates: np.ndarray

    __test__ = False

    def to_dict(self, replicates: bool = False) -> dict:
        d = {k: getattr(self, k) for k in _JSON_FIELDS}
        d["statistic"] = float(d["statistic"])
        d["quantile"] = float(d["quantile"])
        d["p_value"] = float(d["p_value"])
        d["reject"] = bool(d["reject"])
        d["weights"] = [float(v) for v in self.weights]
        if replicates:
            d["replicates"] = [float(v) for v in self.replicates]
        return d

    def to_json(self, replicates: bool = False) -> str:
        return json.dumps(self.to_dict(replicates), indent=2)

    @classmethod
    def from_dict(cls, d: Mapping) -> "TestReport":
        return cls(
            statistic=float(d["statistic"]),
            quantile=float(d["quantile"]),
            p_value=float(d["p_value"]),
            reject=bool(d["reject"]),
            alpha=float(d["alpha"]),
            B=int(d["B"]),
            block=int(d["block"]),
            kind=str(d["kind"]),
            weights=np.asarray(d["weights"], dtype=float),
            replicates=np.asarray(d.get("replicates", []), dtype=float),
        )


def eligible_rows(panel: PanelSeries) -> tuple[np.ndarray, np.ndarray]:
    """Row positions of the weight block ``[2, t0]`` and eval block ``(t0+m, T+]``."""
    w = panel.rows(np.arange(2, panel.t0 + 1))
    e = panel.rows(np.arange(panel.t0 + panel.m + 1, panel.t_plus + 1))
    return w, e


def _weights_batch(Yw: np.ndarray, Pw: np.ndarray, scheme: WeightScheme, eta) -> np.ndarray:
    # Yw: (B, n_w), Pw: (B, n_w, p) -> (B, p)
    if scheme.kind in ("exponential", "follow-leader"):
        d = Yw[:, :, None] - Pw
        L = (d * d if scheme.loss == "quadratic" else np.abs(d)).sum(axis=1)
        if scheme.kind == "follow-leader":
            W = np.zeros_like(L)
            W[np.arange(L.shape[0]), np.argmin(L, axis=1)] = 1.0
            return W
        z = -eta * (L - L.min(axis=1, keepdims=True))
        W = np.exp(z)
        return W / W.sum(axis=1, keepdims=True)
    return np.stack([fit_weights(Yw[i], Pw[i], scheme, eta) for i in range(Yw.shape[0])])


def bootstrap_predictions(y_o: np.ndarray, P: np.ndarray, w_rows: np.ndarray, e_rows: np.ndarray,
                          statistics: Sequence[str], B: int, block: int, scheme: WeightScheme,
                          seed: int, eta, threads: int = 1, chunk: int = 64) -> dict:
    """Replicate statistics from precomputed predictions.

    Returns a mapping from statistic name to an array of ``B`` values.
    Replicate ``r`` always draws from ``SeedSequence([seed, r])``.
    """
    eligible = np.concatenate([w_rows, e_rows])
    n_w, n_e = w_rows.size, e_rows.size
    if block > eligible.size:
        raise PanelError(f"block size {block} exceeds the {eligible.size} eligible times")

    def run(ids):
        idx = np.stack([circular_block_indices(eligible, block, n_w + n_e, replicate_rng(seed, r))
                        for r in ids])
        Yi, Pi = y_o[idx], P[idx]
        W = _weights_batch(Yi[:, :n_w], Pi[:, :n_w], scheme, eta)
        R = Yi[:, n_w:] - np.einsum("btp,bp->bt", Pi[:, n_w:], W)
        return {k: _batch_stat(k, R) for k in statistics}

    chunks = [range(s, min(s + chunk, B)) for s in range(0, B, chunk)]
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(run, chunks))
    else:
        parts = [run(c) for c in chunks]
    return {k: np.concatenate([p[k] for p in parts]) for k in statistics}


def _report(stat, reps, alpha, B, block, kind, w) -> TestReport:
    q = float(np.quantile(reps, 1.0 - alpha))
    p = (int(np.sum(reps >= stat)) + 1) / (B + 1)
    return TestReport(stat, q, p, bool(stat > q), alpha, B, block, kind, w, reps)


def bootstrap_test(panel: PanelSeries, learners, spec: TestSpec, threads: int = 1,
                   preds: np.ndarray | None = None, statistics: Sequence[str] | None = None):
    """Test the null in ``spec`` with circular block bootstrap critical values.

    Parameters
    ----------
    panel : PanelSeries
    learners : sequence of FittedLearner
        Already fitted on the training block; never refitted.
    spec : TestSpec
    threads : int
        Worker threads for replicates; results do not depend on it.
    preds : ndarray, optional
        Precomputed ``(n, p)`` prediction matrix.
    statistics : sequence of str, optional
        When given, a dict of reports (one per statistic) sharing the
        same replicates is returned instead of a single report.
    """
    if panel.t0 < 5:
        raise PanelError("pre-treatment period too short: need t0 >= 5")
    P = prediction_matrix(learners, panel) if preds is None else np.asarray(preds, dtype=float)
    y_o = apply_null(panel, spec.null)
    w_rows, e_rows = eligible_rows(panel)
    eta = scheme_eta(spec.scheme, P, panel.t_plus, w_rows.size)
    w = fit_weights(y_o[w_rows], P[w_rows], spec.scheme, eta)
    r = y_o[e_rows] - P[e_rows] @ w
    block = default_block_size(panel.n) if spec.block is None else int(spec.block)
    kinds = [spec.statistic] if statistics is None else list(statistics)
    reps = bootstrap_predictions(y_o, P, w_rows, e_rows, kinds, int(spec.B), block, spec.scheme,
                                 spec.seed, eta, threads)
    out = {k: _report(STATISTICS[k](r, 0.0), reps[k], spec.alpha, int(spec.B), block, k, w)
           for k in kinds}
    return out if statistics is not None else out[spec.statistic]


def placebo_panels(units: Mapping[str, np.ndarray], times, t0: int, m: int = 0) -> dict:
    """One panel per unit: that unit as outcome, all other units as covariates."""
    names = list(units)
    Y = np.column_stack([np.asarray(units[u], dtype=float) for u in names])
    out = {}
    for j, u in enumerate(names):
        others = [i for i in range(len(names)) if i != j]
        out[u] = PanelSeries(times, Y[:, j], Y[:, others], t0, m,
                             tuple(names[i] for i in others))
    return out


def placebo_suite(panels: Mapping[str, PanelSeries], specs: Sequence[LearnerSpec | dict],
                  spec: TestSpec, threads: int = 1) -> dict:
    """Bootstrap test for every unit of a placebo family (sharing one timeline)."""
    items = list(panels.items())
    if not items:
        raise ValueError("no panels")
    ref = items[0][1]
    for u, pnl in items:
        if not (np.array_equal(pnl.times, ref.times) and pnl.t0 == ref.t0 and pnl.m == ref.m):
            raise PanelError(f"panel {u!r} does not share the common timeline")
    out = {}
    for u, pnl in items:
        learners = fit_pool(specs, pnl, seed=spec.seed)
        out[u] = bootstrap_test(pnl, learners, spec, threads=threads)
    return out
