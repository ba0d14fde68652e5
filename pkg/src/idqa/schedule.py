"""Annealing control paths s(t) and schedule curves A(s), B(s).

The path maps time to the control fraction s in [0, 1]; the curves map s to
the driver and problem prefactors. Both are piecewise linear. Times are
dimensionless; physical times convert through DynamicsParams.time_scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class AnnealPath:
    """Piecewise-linear s(t), from (0, 0) to (total_time, 1), s non-decreasing."""

    breakpoints: tuple[tuple[float, float], ...]

    def __post_init__(self):
        pts = tuple((float(t), float(s)) for t, s in self.breakpoints)
        object.__setattr__(self, "breakpoints", pts)
        if len(pts) < 2:
            raise ValidationError("path needs at least 2 breakpoints")
        ts = [t for t, _ in pts]
        ss = [s for _, s in pts]
        if any(t1 >= t2 for t1, t2 in zip(ts, ts[1:])):
            raise ValidationError("breakpoint times must be strictly increasing")
        if any(s1 > s2 for s1, s2 in zip(ss, ss[1:])):
            raise ValidationError("s must be non-decreasing along the path")
        if pts[0] != (0.0, 0.0):
            raise ValidationError(f"path must start at (0, 0), got {pts[0]}")
        if ss[-1] != 1.0:
            raise ValidationError(f"path must end at s=1, got s={ss[-1]}")

    @property
    def total_time(self) -> float:
        return self.breakpoints[-1][0]

    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.breakpoints])

    def fractions(self) -> np.ndarray:
        return np.array([s for _, s in self.breakpoints])


@dataclass(frozen=True)
class ScheduleCurves:
    """Tabulated (s, A, B) rows, interpolated linearly.

    A is non-increasing with A(1) = 0; B is non-decreasing with B(0) = 0;
    s runs strictly from 0 to 1.
    """

    samples: tuple[tuple[float, float, float], ...]

    def __post_init__(self):
        rows = tuple((float(s), float(a), float(b)) for s, a, b in self.samples)
        object.__setattr__(self, "samples", rows)
        if len(rows) < 2:
            raise ValidationError("curve table needs at least 2 rows")
        s = [r[0] for r in rows]
        a = [r[1] for r in rows]
        b = [r[2] for r in rows]
        if any(x1 >= x2 for x1, x2 in zip(s, s[1:])):
            raise ValidationError("curve s column must be strictly increasing")
        if s[0] != 0.0 or s[-1] != 1.0:
            raise ValidationError("curve s column must span [0, 1]")
        if any(a1 < a2 - 1e-12 for a1, a2 in zip(a, a[1:])):
            raise ValidationError("A(s) must be non-increasing")
        if any(b1 > b2 + 1e-12 for b1, b2 in zip(b, b[1:])):
            raise ValidationError("B(s) must be non-decreasing")
        if abs(a[-1]) > 1e-9:
            raise ValidationError(f"A(1) must be 0, got {a[-1]}")
        if abs(b[0]) > 1e-9:
            raise ValidationError(f"B(0) must be 0, got {b[0]}")

    def s_grid(self) -> np.ndarray:
        return np.array([r[0] for r in self.samples])

    def a_values(self) -> np.ndarray:
        return np.array([r[1] for r in self.samples])

    def b_values(self) -> np.ndarray:
        return np.array([r[2] for r in self.samples])


#: Normalized default: A = 1 - s, B = s.
LINEAR_CURVES = ScheduleCurves(samples=((0.0, 1.0, 0.0), (1.0, 0.0, 1.0)))


def linear_path(tau: float) -> AnnealPath:
    """Standard ramp s(t) = t / tau."""
    if not tau > 0:
        raise ValidationError(f"tau must be > 0, got {tau}")
    return AnnealPath(breakpoints=((0.0, 0.0), (float(tau), 1.0)))


def make_pause_path(tau_anneal: float, tau_pause: float, s_pause: float) -> AnnealPath:
    """Anneal with a hold: ramp to s_pause, hold tau_pause, ramp to 1.

    The ramp rate is set by tau_anneal alone, so the hold starts at
    s_pause * tau_anneal and total_time = tau_anneal + tau_pause.
    """
    if not tau_anneal > 0:
        raise ValidationError(f"tau_anneal must be > 0, got {tau_anneal}")
    if tau_pause < 0:
        raise ValidationError(f"tau_pause must be >= 0, got {tau_pause}")
    if not 0.0 < s_pause < 1.0:
        raise ValidationError(f"s_pause must be in (0, 1), got {s_pause}")
    if tau_pause == 0.0:
        return AnnealPath(breakpoints=(
            (0.0, 0.0), (s_pause * tau_anneal, s_pause), (tau_anneal, 1.0)))
    t_hold = s_pause * tau_anneal
    return AnnealPath(breakpoints=(
        (0.0, 0.0),
        (t_hold, s_pause),
        (t_hold + tau_pause, s_pause),
        (tau_anneal + tau_pause, 1.0),
    ))


def eval_path(path: AnnealPath, t) -> float | np.ndarray:
    """s(t) by linear interpolation; t must lie inside [0, total_time]."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0.0) or np.any(t_arr > path.total_time):
        raise ValidationError(f"t={t} outside [0, {path.total_time}]")
    out = np.interp(t_arr, path.times(), path.fractions())
    return float(out) if np.isscalar(t) or t_arr.ndim == 0 else out


def eval_curves(curves: ScheduleCurves, s) -> tuple:
    """(A(s), B(s)) by linear interpolation of the table columns."""
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0.0) or np.any(s_arr > 1.0):
        raise ValidationError(f"s={s} outside [0, 1]")
    grid = curves.s_grid()
    a = np.interp(s_arr, grid, curves.a_values())
    b = np.interp(s_arr, grid, curves.b_values())
    if np.isscalar(s) or s_arr.ndim == 0:
        return float(a), float(b)
    return a, b


def load_curve_file(path) -> ScheduleCurves:
    """Read a plain-text curve table: three numeric columns (s, A, B).

    Lines starting with '#' and a single optional non-numeric header line are
    skipped; rows must be sorted by s.
    """
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            try:
                vals = [float(p) for p in parts]
            except ValueError:
                if not rows and lineno <= 2:  # header line
                    continue
                raise ValidationError(f"{path}:{lineno}: non-numeric row {text!r}")
            if len(vals) != 3:
                raise ValidationError(f"{path}:{lineno}: expected 3 columns, got {len(vals)}")
            rows.append(tuple(vals))
    if not rows:
        raise ValidationError(f"{path}: no data rows")
    return ScheduleCurves(samples=tuple(rows))
