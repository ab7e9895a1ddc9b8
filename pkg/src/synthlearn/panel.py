"""Panel data model for a single treated unit observed over time.

Times are integers.  The learner training block always ends at ``t = 1``;
the treatment starts after ``t0`` and the ``m`` periods following ``t0`` are
a carryover window that no downstream computation may use.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import pandas as pd

__all__ = [
    "PanelError",
    "PanelSeries",
    "NullSpec",
    "SplitPlan",
    "load_panel",
    "apply_null",
    "invert_null",
    "make_splits",
]


class PanelError(ValueError):
    """Raised when panel data or a timeline is invalid."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class PanelSeries:
    """Outcome of the treated unit plus a covariate matrix over ``times``.

    Parameters
    ----------
    times : ndarray of int
        Contiguous increasing integer times ``T- .. T+``.
    y : ndarray, shape (n,)
        Outcome of the treated unit.
    X : ndarray, shape (n, J)
        Control-unit outcomes and covariates, one row per time.
    t0 : int
        Last pre-treatment time.
    m : int
        Carryover length.
    names : tuple of str, optional
        Covariate column names.
    """

    times: np.ndarray
    y: np.ndarray
    X: np.ndarray
    t0: int
    m: int = 0
    names: tuple = field(default=())

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.int64)
        y = np.asarray(self.y, dtype=float)
        # C order so BLAS reductions do not depend on how the panel was built
        X = np.ascontiguousarray(np.asarray(self.X, dtype=float))
        if X.ndim == 1:
            X = X[:, None]
        if times.ndim != 1 or times.size < 2:
            raise PanelError("times must be a 1-d sequence with at least two entries")
        if np.any(np.diff(times) != 1):
            raise PanelError("times must be contiguous and increasing")
        if y.shape != times.shape or X.shape[0] != times.size:
            raise PanelError("y and X must have one row per time")
        if X.shape[1] < 1:
            raise PanelError("at least one covariate column is required")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(X))):
            raise PanelError("panel contains non-finite values")
        t0, m = int(self.t0), int(self.m)
        t_minus, t_plus = int(times[0]), int(times[-1])
        if m < 0:
            raise PanelError("carryover m must be nonnegative")
        if not (t_minus <= 1 <= t0 < t_plus):
            raise PanelError(
                f"timeline requires T- <= 1 <= t0 < T+, got T-={t_minus}, t0={t0}, T+={t_plus}"
            )
        if t0 + m >= t_plus:
            raise PanelError("no post-treatment period remains after the carryover window")
        names = tuple(self.names) if self.names else tuple(f"x{j + 1}" for j in range(X.shape[1]))
        if len(names) != X.shape[1]:
            raise PanelError("names must match the number of covariate columns")
        object.__setattr__(self, "times", _frozen(times))
        object.__setattr__(self, "y", _frozen(y))
        object.__setattr__(self, "X", _frozen(X))
        object.__setattr__(self, "t0", t0)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "names", names)

    @property
    def t_minus(self) -> int:
        return int(self.times[0])

    @property
    def t_plus(self) -> int:
        return int(self.times[-1])

    @property
    def n(self) -> int:
        return int(self.times.size)

    @property
    def J(self) -> int:
        return int(self.X.shape[1])

    @property
    def t_m(self) -> int:
        """Number of usable post-treatment periods, ``T+ - t0 - m``."""
        return self.t_plus - self.t0 - self.m

    @property
    def treated(self) -> np.ndarray:
        """Treatment indicator ``D_t = 1{t > t0}``."""
        return (self.times > self.t0).astype(float)

    def rows(self, times) -> np.ndarray:
        """Row positions of the given times."""
        times = np.asarray(times, dtype=np.int64)
        if times.size and (times.min() < self.t_minus or times.max() > self.t_plus):
            raise PanelError("times outside the panel range")
        return times - self.t_minus

    def with_outcome(self, y) -> "PanelSeries":
        return PanelSeries(self.times, y, self.X, self.t0, self.m, self.names)

    def with_carryover(self, m: int) -> "PanelSeries":
        return PanelSeries(self.times, self.y, self.X, self.t0, m, self.names)


@dataclass(frozen=True)
class NullSpec:
    """Null hypothesis imposed on the post-treatment outcomes.

    ``trajectory`` holds ``a_t`` for every ``t`` in ``(t0 + m, T+]``.
    """

    kind: str
    trajectory: np.ndarray

    KINDS = ("additive", "multiplicative", "linear-trend")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise PanelError(f"unknown null kind {self.kind!r}")
        traj = np.atleast_1d(np.asarray(self.trajectory, dtype=float))
        if not np.all(np.isfinite(traj)):
            raise PanelError("null trajectory must be finite")
        if self.kind == "multiplicative" and np.any(traj == 0):
            raise PanelError("multiplicative null requires nonzero a_t")
        object.__setattr__(self, "trajectory", _frozen(traj))

    @classmethod
    def zero(cls, panel: PanelSeries) -> "NullSpec":
        """No effect: ``a_t = 0`` under the additive model."""
        return cls("additive", np.zeros(panel.t_m))

    @classmethod
    def constant(cls, panel: PanelSeries, value: float, kind: str = "additive") -> "NullSpec":
        return cls(kind, np.full(panel.t_m, float(value)))

    @classmethod
    def linear_trend(cls, panel: PanelSeries, delta: float) -> "NullSpec":
        """``a_t = delta * (t - t0)`` imposed additively."""
        t = np.arange(panel.t0 + panel.m + 1, panel.t_plus + 1)
        return cls("linear-trend", delta * (t - panel.t0))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "trajectory": self.trajectory.tolist()}

    @classmethod
    def from_dict(cls, d: Mapping, panel: PanelSeries | None = None) -> "NullSpec":
        if "delta" in d:
            if panel is None:
                raise PanelError("a linear-trend null given by delta needs the panel")
            return cls.linear_trend(panel, float(d["delta"]))
        if "value" in d:
            if panel is None:
                raise PanelError("a constant null needs the panel")
            return cls.constant(panel, float(d["value"]), d.get("kind", "additive"))
        return cls(d["kind"], np.asarray(d["trajectory"], dtype=float))


@dataclass(frozen=True)
class SplitPlan:
    """Time index sets used by the estimation and testing routines."""

    train: np.ndarray
    weight: np.ndarray
    correct: np.ndarray
    eval: np.ndarray


def _eval_slice(panel: PanelSeries, null: NullSpec) -> np.ndarray:
    if null.trajectory.size != panel.t_m:
        raise PanelError(
            f"null trajectory has length {null.trajectory.size}, expected {panel.t_m}"
        )
    return panel.rows(np.arange(panel.t0 + panel.m + 1, panel.t_plus + 1))


def apply_null(panel: PanelSeries, null: NullSpec | None = None) -> np.ndarray:
    """Outcome with the null imposed, ``Y^o``.

    Pre-treatment entries equal ``Y``.  Post-treatment entries are
    ``Y - a_t`` (additive, linear-trend) or ``Y / a_t`` (multiplicative).
    The carryover window ``(t0, t0 + m]`` is set to NaN.
    """
    if null is None:
        null = NullSpec.zero(panel)
    rows = _eval_slice(panel, null)
    yo = np.array(panel.y, dtype=float)
    if null.kind == "multiplicative":
        yo[rows] = yo[rows] / null.trajectory
    else:
        yo[rows] = yo[rows] - null.trajectory
    carry = (panel.times > panel.t0) & (panel.times <= panel.t0 + panel.m)
    yo[carry] = np.nan
    return yo


def invert_null(panel: PanelSeries, yo: np.ndarray, null: NullSpec) -> np.ndarray:
    """Map ``Y^o`` back to ``Y`` outside the carryover window."""
    rows = _eval_slice(panel, null)
    y = np.array(yo, dtype=float)
    if null.kind == "multiplicative":
        y[rows] = y[rows] * null.trajectory
    else:
        y[rows] = y[rows] + null.trajectory
    return y


def make_splits(panel: PanelSeries) -> SplitPlan:
    """Train ``[T-, 1]``, weight ``[2, t0]``, correct ``[t0//2 + 1, t0]``,
    eval ``[t0 + m + 1, T+]``."""
    if panel.t0 - 1 < 4:
        raise PanelError("pre-treatment period too short: need t0 >= 5")
    t0 = panel.t0
    return SplitPlan(
        train=np.arange(panel.t_minus, 2),
        weight=np.arange(2, t0 + 1),
        correct=np.arange(t0 // 2 + 1, t0 + 1),
        eval=np.arange(t0 + panel.m + 1, panel.t_plus + 1),
    )


def load_panel(
    path: str | Path,
    schema: Mapping | None = None,
    t0: int | None = None,
    m: int = 0,
    origin: int | None = None,
) -> PanelSeries:
    """Read a panel from CSV.

    The CSV has a header row, an integer time column (default ``t``), an
    outcome column (default ``y``) and one or more numeric covariate
    columns.  Missing times and empty cells are filled by linear
    interpolation; gaps at either end are an error.

    Parameters
    ----------
    schema : mapping, optional
        Keys ``time``, ``outcome`` and ``covariates`` (list of column names)
        override the default column mapping.
    t0, m : int
        Treatment timeline, in the units of the time column.
    origin : int, optional
        Time value that marks the end of the learner training block.  When
        given, all times are shifted so that ``origin`` becomes ``t = 1``.
    """
    schema = dict(schema or {})
    tcol = schema.get("time", "t")
    ycol = schema.get("outcome", "y")
    if t0 is None:
        raise PanelError("t0 is required")
    df = pd.read_csv(path, float_precision="round_trip")
    for col in (tcol, ycol):
        if col not in df.columns:
            raise PanelError(f"missing column {col!r}")
    covs = schema.get("covariates")
    if covs is None:
        covs = [c for c in df.columns if c not in (tcol, ycol)]
    missing = [c for c in covs if c not in df.columns]
    if missing:
        raise PanelError(f"missing covariate columns {missing}")
    if not covs:
        raise PanelError("at least one covariate column is required")

    try:
        times = pd.to_numeric(df[tcol], errors="raise")
    except (ValueError, TypeError) as exc:
        raise PanelError("time column must be integer") from exc
    if times.isna().any() or np.any(times != np.round(times)):
        raise PanelError("time column must be integer")
    data = df[[ycol, *covs]].apply(pd.to_numeric, errors="coerce")
    data.index = times.astype(np.int64).to_numpy()
    if data.index.has_duplicates:
        raise PanelError("duplicate times in panel")
    data = data.sort_index()
    full = np.arange(data.index[0], data.index[-1] + 1)
    data = data.reindex(full)
    if data.iloc[0].isna().any() or data.iloc[-1].isna().any():
        raise PanelError("leading or trailing gaps cannot be interpolated")
    data = data.interpolate(method="index", limit_area="inside")
    if data.isna().to_numpy().any() or not np.all(np.isfinite(data.to_numpy())):
        raise PanelError("non-numeric cells remain after interpolation")

    shift = 0 if origin is None else 1 - int(origin)
    t0 = int(t0) + shift
    tt = full + shift
    if not (tt[0] <= t0 < tt[-1]):
        raise PanelError(f"t0 outside the time range [{tt[0]}, {tt[-1]})")
    return PanelSeries(
        times=tt,
        y=data[ycol].to_numpy(),
        X=data[list(covs)].to_numpy(),
        t0=t0,
        m=m,
        names=tuple(covs),
    )


def panel_to_frame(panel: PanelSeries) -> pd.DataFrame:
    """CSV-ready frame in the load_panel column layout."""
    df = pd.DataFrame(panel.X, columns=list(panel.names))
    df.insert(0, "y", panel.y)
    df.insert(0, "t", panel.times)
    return df
