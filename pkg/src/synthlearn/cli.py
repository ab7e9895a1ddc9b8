"""Command-line entry points.

Every command reads one JSON config (``--config``); ``--seed``,
``--threads`` and ``--out`` override the corresponding fields.  Outputs
are assembled in memory and written only after the whole command
succeeds, so a failed run leaves no partial files.

Config keys
-----------
panel      {"path", "t0", "m", "origin", "schema"}    CSV panel source; missing
           fields are read from a <panel>.json sidecar
dgp        DgpSpec fields                               simulated panel source
learners   list of {"kind", "params", "clip"}
scheme     WeightScheme fields
test       {"statistic", "alpha", "B", "block", "null", "replicates"}
cate       {"mode": "T" | "X" | "both", "residual_learners", "x_learner_sign_fix"}
power      power_study keyword arguments
placebo    {"path", "t0", "m", "origin"} or {"units": int} (with "dgp")
seed       int
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
from pathlib import Path

from .aggregation import WeightScheme
from .dgp import DgpSpec, power_study, simulate
from .effects import cate_mse, estimate_ate, fit_t_learner, fit_x_learner
from .inference import TestSpec, bootstrap_test, placebo_panels, placebo_suite
from .learners import LearnerSpec, fit_pool, prediction_matrix
from .panel import PanelError, load_panel, panel_to_frame

__all__ = ["main", "build_parser", "ConfigError", "run", "toy_panel_path"]

DEFAULT_LEARNERS = [
    {"kind": "sc-constrained", "params": {"intercept": True}},
    {"kind": "ridge", "params": {"lam": 1.0, "intercept": True}},
    {"kind": "knn", "params": {"k": 5}},
]

HELP = {
    "test": "bootstrap test; writes report.json (statistic, quantile, p_value, reject, alpha, "
            "B, block, kind, weights[, replicates]) and series.dat (t observed counterfactual)",
    "ate": "bias-corrected ATE; writes ate.json (ate, post_mean_gap, pre_bias, weights, "
           "eval_window, correct_window)",
    "cate": "T/X-learner CATE; writes cate.json (mode -> rmse when the truth is known) and "
            "tau.csv (t, tau_<mode>[, tau_true])",
    "simulate": "draw a DGP panel; writes panel.csv (t, y, x1..xJ) with a panel.json "
                "sidecar (t0, m), truth.csv (t, y0, effect[, tau]) and spec.json",
    "power": "power study; writes power.csv (dgp, method, effect, rejections, reps, level) and "
             "one <dgp>_<method>.dat curve per method",
    "placebo": "placebo suite; writes placebo.json (unit -> test report)",
}

class ConfigError(ValueError):
    """Invalid or incomplete run configuration."""

def _dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"

def _sidecar(path) -> dict:
    # <panel>.json next to the CSV may carry t0, m, origin and schema
    side = Path(path).with_suffix(".json")
    if not side.is_file():
        return {}
    try:
        d = json.loads(side.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"sidecar {side} is not valid JSON: {exc}") from exc
    return {k: d[k] for k in ("t0", "m", "origin", "schema") if k in d}

def toy_panel_path() -> Path:
    """Path of the bundled toy panel CSV (its sidecar supplies t0 and origin)."""
    return Path(__file__).with_name("data") / "toy_panel.csv"

def _panel(cfg):
    has_path, has_dgp = "panel" in cfg, "dgp" in cfg
    if has_path == has_dgp:
        raise ConfigError("config needs exactly one panel source: 'panel' or 'dgp'")
    if has_path:
        p = cfg["panel"]
        if "path" not in p:
            raise ConfigError("'panel' needs 'path'")
        if not Path(p["path"]).is_file():
            raise ConfigError(f"panel file not found: {p['path']}")
        p = {**_sidecar(p["path"]), **p}
        if "t0" not in p:
            raise ConfigError("'panel' needs 't0' (in the config or a JSON sidecar)")
        return load_panel(p["path"], p.get("schema"), int(p["t0"]), int(p.get("m", 0)),
                          p.get("origin")), None
    spec = DgpSpec.from_dict({"seed": cfg["seed"], **cfg["dgp"]})
    sim = simulate(spec)
    return sim.panel, sim

def _learners(cfg):
    try:
        return [LearnerSpec.from_dict(d) for d in cfg.get("learners", DEFAULT_LEARNERS)]
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad learner spec: {exc}") from exc

def _scheme(cfg):
    return WeightScheme.from_dict(cfg.get("scheme", {}))

def _test_spec(cfg, panel):
    t = dict(cfg.get("test", {}))
    t.setdefault("seed", cfg["seed"])
    t["scheme"] = cfg.get("scheme", {})
    return TestSpec.from_dict(t, panel)

def cmd_test(cfg) -> dict:
    panel, _ = _panel(cfg)
    learners = fit_pool(_learners(cfg), panel, seed=cfg["seed"])
    spec = _test_spec(cfg, panel)
    P = prediction_matrix(learners, panel)
    rep = bootstrap_test(panel, learners, spec, threads=cfg["threads"], preds=P)
    cf = P @ rep.weights
    lines = ["# t observed counterfactual"]
    lines += [f"{int(t)} {float(y)!r} {float(c)!r}" for t, y, c in zip(panel.times, panel.y, cf)]
    return {"report.json": rep.to_json(bool(cfg.get("test", {}).get("replicates"))) + "\n",
            "series.dat": "\n".join(lines) + "\n"}

def cmd_ate(cfg) -> dict:
    panel, _ = _panel(cfg)
    learners = fit_pool(_learners(cfg), panel, seed=cfg["seed"])
    return {"ate.json": estimate_ate(panel, learners, _scheme(cfg)).to_json() + "\n"}

def cmd_cate(cfg) -> dict:
    panel, sim = _panel(cfg)
    c = cfg.get("cate", {})
    mode = c.get("mode", "both")
    if mode not in ("T", "X", "both"):
        raise ConfigError("cate.mode must be 'T', 'X' or 'both'")
    specs, scheme = _learners(cfg), _scheme(cfg)
    res = c.get("residual_learners")
    res = None if res is None else [LearnerSpec.from_dict(d) for d in res]
    tm = fit_t_learner(panel, specs, scheme, seed=cfg["seed"])
    models = {}
    if mode in ("T", "both"):
        models["T"] = tm
    if mode in ("X", "both"):
        models["X"] = fit_x_learner(panel, specs, scheme, res,
                                    bool(c.get("x_learner_sign_fix", True)), cfg["seed"], tm)
    truth = sim.tau if sim is not None else None
    out = {"rmse": {k: (cate_mse(m, panel, truth) if truth is not None else None)
                    for k, m in models.items()}}
    cols = {k: m.predict_panel(panel) for k, m in models.items()}
    buf = io.StringIO()
    buf.write(",".join(["t"] + [f"tau_{k}" for k in cols] + (["tau_true"] if truth is not None else [])) + "\n")
    for i, t in enumerate(panel.times):
        vals = [repr(float(cols[k][i])) for k in cols]
        if truth is not None:
            vals.append(repr(float(truth[i])))
        buf.write(",".join([str(int(t))] + vals) + "\n")
    return {"cate.json": _dumps(out), "tau.csv": buf.getvalue()}

def cmd_simulate(cfg) -> dict:
    if "dgp" not in cfg:
        raise ConfigError("simulate needs a 'dgp' section")
    spec = DgpSpec.from_dict({"seed": cfg["seed"], **cfg["dgp"]})
    sim = simulate(spec)
    panel_csv = panel_to_frame(sim.panel).to_csv(index=False, float_format="%.17g")
    buf = io.StringIO()
    buf.write("t,y0,effect" + (",tau" if sim.tau is not None else "") + "\n")
    for i, t in enumerate(sim.panel.times):
        row = [str(int(t)), repr(float(sim.y0[i])), repr(float(sim.effect[i]))]
        if sim.tau is not None:
            row.append(repr(float(sim.tau[i])))
        buf.write(",".join(row) + "\n")
    # times in panel.csv are already internal, so the sidecar needs no origin
    side = _dumps({"t0": int(sim.panel.t0), "m": int(sim.panel.m)})
    return {"panel.csv": panel_csv, "panel.json": side, "truth.csv": buf.getvalue(),
            "spec.json": _dumps(spec.to_dict())}

def cmd_power(cfg) -> dict:
    p = dict(cfg.get("power", {}))
    if "dgps" not in p or "alphas" not in p:
        raise ConfigError("power needs 'dgps' and 'alphas'")
    p.setdefault("methods", ["synthetic-learner", "sc-perm", "did-perm"])
    if "learners" in cfg:
        p["specs"] = _learners(cfg)
    p["scheme"] = _scheme(cfg)
    p["seed"] = cfg["seed"]
    p["threads"] = cfg["threads"]
    try:
        curve = power_study(**p)
    except TypeError as exc:
        raise ConfigError(f"bad power option: {exc}") from exc
    out = {"power.csv": curve.to_csv(), "config.json": _dumps(curve.config)}
    out.update(curve.plot_data())
    return out

def cmd_placebo(cfg) -> dict:
    pl = cfg.get("placebo")
    if pl is None:
        raise ConfigError("placebo needs a 'placebo' section")
    if "path" in pl:
        import pandas as pd

        if not Path(pl["path"]).is_file():
            raise ConfigError(f"placebo file not found: {pl['path']}")
        pl = {**_sidecar(pl["path"]), **pl}
        if "t0" not in pl:
            raise ConfigError("'placebo' needs 't0' (in the config or a JSON sidecar)")
        df = pd.read_csv(pl["path"], float_precision="round_trip").sort_values("t")
        shift = 0 if pl.get("origin") is None else 1 - int(pl["origin"])
        times = df["t"].to_numpy() + shift
        units = {c: df[c].to_numpy(dtype=float) for c in df.columns if c != "t"}
        panels = placebo_panels(units, times, int(pl["t0"]) + shift, int(pl.get("m", 0)))
    else:
        if "dgp" not in cfg:
            raise ConfigError("placebo without 'path' needs 'dgp' and 'units'")
        n = int(pl.get("units", 3))
        units, times, t0 = {}, None, None
        for i in range(n):
            sim = simulate(DgpSpec.from_dict({**cfg["dgp"], "seed": cfg["seed"] + i}))
            units[f"unit{i}"] = sim.panel.y
            times, t0 = sim.panel.times, sim.panel.t0
        panels = placebo_panels(units, times, t0, 0)
    spec = _test_spec(cfg, next(iter(panels.values())))
    reports = placebo_suite(panels, _learners(cfg), spec, threads=cfg["threads"])
    return {"placebo.json": _dumps({u: r.to_dict() for u, r in reports.items()})}

COMMANDS = {"test": cmd_test, "ate": cmd_ate, "cate": cmd_cate, "simulate": cmd_simulate,
            "power": cmd_power, "placebo": cmd_placebo}

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="synthlearn", description=__doc__.split("\n")[0],
                                 formatter_class=argparse.RawDescriptionHelpFormatter,
                                 epilog=__doc__.split("\n", 1)[1])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, help=HELP[name], description=HELP[name])
        sp.add_argument("--config", required=True, help="JSON run configuration")
        sp.add_argument("--seed", type=int, help="override the config seed")
        sp.add_argument("--threads", type=int, help="worker threads (default: all cores)")
        sp.add_argument("--out", help="output directory (default: config 'out' or '.')")
    return ap

def run(command: str, cfg: dict) -> dict:
    return COMMANDS[command](cfg)

def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {args.config}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        cfg["seed"] = int(args.seed if args.seed is not None else cfg.get("seed", 0))
        cfg["threads"] = int(args.threads or cfg.get("threads") or os.cpu_count() or 1)
        out = Path(args.out or cfg.get("out", "."))
        files = run(args.command, cfg)
    except (ConfigError, PanelError, ValueError, KeyError) as exc:
        print(f"synthlearn {args.command}: error: {exc}", file=sys.stderr)
        return 2
    try:
        out.mkdir(parents=True, exist_ok=True)
        for name, text in files.items():
            (out / name).write_text(text)
    except OSError as exc:
        print(f"synthlearn {args.command}: cannot write outputs: {exc}", file=sys.stderr)
        return 2
    return 0

if __name__ == "__main__":
    sys.exit(main())
