"""Monte Carlo power study.

Each replication draws one untreated panel per DGP, fits the learners
once and then adds ``alpha * D_t`` for every effect size on the grid, so
all effect sizes share the same draws.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ..aggregation import WeightScheme, fit_weights, scheme_eta
from ..inference import STATISTICS, TestSpec, bootstrap_test, eligible_rows
from ..learners import LearnerSpec, fit_pool, prediction_matrix
from .comparators import permutation_test, pre_period_counterfactual
from .simulate import DGP_IDS, DgpSpec, simulate

__all__ = ["METHODS", "PowerCurve", "power_study", "cell_seed", "sl_statistic",
           "default_pool", "oracle_critical_value"]

METHODS = ("synthetic-learner", "sc-perm", "did-perm", "ls-perm", "oracle-sl", "oracle-sc",
           "oracle-did")
CSV_COLUMNS = ("dgp", "method", "effect", "rejections", "reps", "level")


def default_pool() -> list[LearnerSpec]:
    return [
        LearnerSpec("sc-constrained", {"intercept": True}),
        LearnerSpec("ridge", {"lam": 1.0, "intercept": True}),
        LearnerSpec("knn", {"k": 5}),
    ]


def cell_seed(seed: int, *keys: int) -> int:
    """Derived 32-bit seed for one simulation cell."""
    return int(np.random.SeedSequence([int(seed), *map(int, keys)]).generate_state(1)[0])


@dataclass
class PowerCurve:
    """Rejection fractions per (dgp, method, effect).

    ``rows`` holds dicts with the keys of ``CSV_COLUMNS``; ``rejections``
    is the fraction of replications that rejected.
    """

    rows: list
    reps: int
    level: float
    config: dict = field(default_factory=dict)

    def fraction(self, dgp: str, method: str, effect: float) -> float:
        for r in self.rows:
            if r["dgp"] == dgp and r["method"] == method and np.isclose(r["effect"], effect):
                return r["rejections"]
        raise KeyError((dgp, method, effect))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow([r["dgp"], r["method"], repr(float(r["effect"])),
                        repr(float(r["rejections"])), r["reps"], repr(float(r["level"]))])
        return buf.getvalue()

    def plot_data(self) -> dict:
        """Two-column ``effect fraction`` text per (dgp, method) curve."""
        out = {}
        for r in self.rows:
            key = f"{r['dgp']}_{r['method']}.dat"
            out.setdefault(key, [f"# {r['dgp']} {r['method']}: effect rejection_fraction"])
            out[key].append(f"{float(r['effect']):.6g} {float(r['rejections']):.6g}")
        return {k: "\n".join(v) + "\n" for k, v in out.items()}

    def write(self, outdir) -> list:
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        paths = [outdir / "power.csv"]
        paths[0].write_text(self.to_csv())
        for name, text in self.plot_data().items():
            p = outdir / name
            p.write_text(text)
            paths.append(p)
        return paths


def sl_statistic(panel, P: np.ndarray, scheme: WeightScheme, statistic: str = "sharp") -> float:
    """Observed Synthetic Learner statistic from a prediction matrix."""
    w_rows, e_rows = eligible_rows(panel)
    eta = scheme_eta(scheme, P, panel.t_plus, w_rows.size)
    w = fit_weights(panel.y[w_rows], P[w_rows], scheme, eta)
    return STATISTICS[statistic](panel.y[e_rows], P[e_rows] @ w)


def _pre_stat(panel, method: str) -> float:
    cf = pre_period_counterfactual(panel, method)
    post = panel.times > panel.t0 + panel.m
    return STATISTICS["sharp"](panel.y[post], cf[post])


def oracle_critical_value(dgp_spec: DgpSpec, method: str, specs, scheme, level: float,
                          n_null: int, seed: int, statistic: str = "sharp") -> float:
    """``1 - level`` quantile of the statistic over ``n_null`` null simulations."""
    stats = np.empty(n_null)
    for i in range(n_null):
        spec = DgpSpec(**{**dgp_spec.to_dict(), "effect": 0.0, "seed": cell_seed(seed, 7, i)})
        panel = simulate(spec).panel
        if method == "oracle-sl":
            learners = fit_pool(specs, panel, seed=spec.seed)
            stats[i] = sl_statistic(panel, prediction_matrix(learners, panel), scheme, statistic)
        else:
            stats[i] = _pre_stat(panel, method.split("-")[1])
    return float(np.quantile(stats, 1.0 - level))


def power_study(dgps: Sequence[str], methods: Sequence[str], alphas: Sequence[float],
                reps: int = 200, seed: int = 0, T: int = 300, T0: int = 250,
                t_minus: int = 125, J: int = 50, specs=None, scheme: WeightScheme | None = None,
                B: int = 200, block: int | None = None, level: float = 0.05,
                statistic: str = "sharp", n_null: int = 2000, threads: int = 1) -> PowerCurve:
    """Rejection fractions at ``level`` for every (dgp, method, effect).

    ``specs`` is the Synthetic Learner pool (default: constrained SC, ridge
    and kNN); ``scheme`` its weighting.  Oracle methods calibrate their
    critical value on ``n_null`` separate null simulations.
    """
    if reps < 1:
        raise ValueError("reps must be positive")
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}")
    for d in dgps:
        if d not in DGP_IDS:
            raise ValueError(f"unknown DGP {d!r}")
    specs = default_pool() if specs is None else [
        s if isinstance(s, LearnerSpec) else LearnerSpec.from_dict(s) for s in specs]
    scheme = scheme or WeightScheme()
    alphas = [float(a) for a in alphas]
    counts = {(d, m, a): 0 for d in dgps for m in methods for a in alphas}
    for di, d in enumerate(dgps):
        base = DgpSpec(d, J=J, effect=0.0, T=T, T0=T0, t_minus=t_minus)
        crit = {m: oracle_critical_value(base, m, specs, scheme, level, n_null,
                                         cell_seed(seed, di, 1), statistic)
                for m in methods if m.startswith("oracle")}
        for r in range(reps):
            sim = simulate(DgpSpec(**{**base.to_dict(), "seed": cell_seed(seed, di, 0, r)}))
            panel0 = sim.panel
            D = panel0.treated
            need_sl = any(m in ("synthetic-learner", "oracle-sl") for m in methods)
            P = None
            if need_sl:
                learners = fit_pool(specs, panel0, seed=cell_seed(seed, di, 2, r))
                P = prediction_matrix(learners, panel0)
            tspec = TestSpec(statistic=statistic, alpha=level, B=B, block=block, scheme=scheme,
                             seed=cell_seed(seed, di, 3, r))
            for a in alphas:
                panel = panel0.with_outcome(panel0.y + a * D)
                for m in methods:
                    if m == "synthetic-learner":
                        rep = bootstrap_test(panel, None, tspec, threads=threads, preds=P)
                        hit = rep.reject
                    elif m.endswith("-perm"):
                        hit = permutation_test(panel, m.split("-")[0], level=level).reject
                    elif m == "oracle-sl":
                        hit = sl_statistic(panel, P, scheme, statistic) > crit[m]
                    else:
                        hit = _pre_stat(panel, m.split("-")[1]) > crit[m]
                    counts[(d, m, a)] += int(hit)
    rows = [{"dgp": d, "method": m, "effect": a, "rejections": counts[(d, m, a)] / reps,
             "reps": reps, "level": level}
            for d in dgps for m in methods for a in alphas]
    config = {"dgps": list(dgps), "methods": list(methods), "alphas": alphas, "reps": reps,
              "seed": seed, "T": T, "T0": T0, "t_minus": t_minus, "J": J,
              "specs": [s.to_dict() for s in specs], "scheme": scheme.to_dict(), "B": B,
              "block": block, "level": level, "statistic": statistic, "n_null": n_null}
    return PowerCurve(rows, reps, level, config)
