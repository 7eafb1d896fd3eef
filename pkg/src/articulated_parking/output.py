"""Trajectory serialisation (CSV) and static two-panel SVG plots."""

from __future__ import annotations

import csv
import math
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .controller import Mode
from .errors import InvalidInputError, ParkingError
from .model import CartesianState, ControlCommand, PolarState
from .sim import StopReason, Trajectory, TrajectorySample

__all__ = [
    "CSV_HEADER",
    "OutputError",
    "format_value",
    "read_trajectory_csv",
    "render_trajectory_svg",
    "write_trajectory_csv",
]

CSV_HEADER = ("t", "x", "y", "psi", "phi", "e", "theta1", "theta2", "v", "omega", "V", "mode")


class OutputError(ParkingError, OSError):
    """Reading or writing an output file failed."""


def format_value(x: float) -> str:
    """Positional notation with 9 significant digits, trailing zeros trimmed."""
    if not math.isfinite(x):
        raise InvalidInputError(f"cannot serialise non-finite value {x!r}")
    if x == 0:
        return "0"
    return np.format_float_positional(x, precision=9, unique=False, fractional=False, trim="-")


def _row(s: TrajectorySample) -> list[str]:
    c, p, u = s.cartesian, s.polar, s.command
    values = (s.t, c.x, c.y, c.psi, c.phi, p.e, p.theta1, p.theta2, u.v, u.omega, s.V)
    return [format_value(v) for v in values] + [s.mode.value]


def write_trajectory_csv(traj: Trajectory, path: str | Path) -> Path:
    """Write one row per sample followed by a ``# stop_reason=...`` line."""
    path = Path(path)
    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            writer.writerows(_row(s) for s in traj.samples)
            fh.write(f"# stop_reason={traj.stop_reason.value}\n")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def read_trajectory_csv(path: str | Path) -> Trajectory:
    """Load a trajectory written by :func:`write_trajectory_csv`.

    Only the written columns survive; the controller's estimate is taken to
    be the true polar state.
    """
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    stop = StopReason.TIME_BUDGET
    rows = []
    for line in lines:
        if line.startswith("# stop_reason="):
            stop = StopReason(line.split("=", 1)[1].strip())
        elif line and not line.startswith("#"):
            rows.append(line)
    reader = csv.reader(rows)
    header = next(reader, None)
    if header is None or tuple(header) != CSV_HEADER:
        raise InvalidInputError(f"{path}: unexpected CSV header {header!r}")
    samples = []
    for i, row in enumerate(reader):
        try:
            t, x, y, psi, phi, e, t1, t2, v, w, V = map(float, row[:11])
            mode = Mode(row[11])
        except (ValueError, IndexError) as exc:
            raise InvalidInputError(f"{path}: bad row {i + 2}: {exc}") from None
        polar = PolarState(e, t1, t2, phi)
        samples.append(
            TrajectorySample(
                index=i,
                t=t,
                cartesian=CartesianState(x, y, psi, phi),
                polar=polar,
                estimate=polar,
                command=ControlCommand(v, w),
                V=V,
                mode=mode,
            )
        )
    if not samples:
        raise InvalidInputError(f"{path}: no samples")
    return Trajectory(samples, stop)


# --- SVG -------------------------------------------------------------------

_W = 640
_TOP_H = 420
_BOT_H = 280
_PAD = 48
_SERIES = (
    ("e", "e [m]", "#1f77b4"),
    ("theta1", "theta1 [rad]", "#d62728"),
    ("theta2", "theta2 [rad]", "#2ca02c"),
    ("phi", "phi [rad]", "#9467bd"),
)


def _nice_range(lo: float, hi: float) -> tuple[float, float]:
    if hi - lo < 1e-9:
        mid = 0.5 * (lo + hi)
        return mid - 0.5, mid + 0.5
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def _polyline(points, color: str, width: float = 1.5) -> str:
    pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in points)
    return f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="{width}"/>'


def _axes(x0: float, y0: float, w: float, h: float, xr, yr, xlabel: str, ylabel: str) -> list[str]:
    out = [
        f'<rect x="{x0}" y="{y0}" width="{w}" height="{h}" fill="white" stroke="#444"/>',
        f'<text x="{x0 + w / 2}" y="{y0 + h + 32}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="{x0 - 36}" y="{y0 + h / 2}" text-anchor="middle" '
        f'transform="rotate(-90 {x0 - 36} {y0 + h / 2})">{escape(ylabel)}</text>',
    ]
    for frac in (0.0, 0.5, 1.0):
        xv = xr[0] + frac * (xr[1] - xr[0])
        yv = yr[0] + frac * (yr[1] - yr[0])
        out.append(f'<text x="{x0 + frac * w:.1f}" y="{y0 + h + 14}" text-anchor="middle">{xv:.3g}</text>')
        out.append(f'<text x="{x0 - 4}" y="{y0 + h - frac * h + 4:.1f}" text-anchor="end">{yv:.3g}</text>')
    return out


def _path_panel(traj: Trajectory) -> list[str]:
    xs = traj.column("x")
    ys = traj.column("y")
    psis = traj.column("psi")
    lo = min(xs.min(), ys.min(), 0.0)
    hi = max(xs.max(), ys.max(), 0.0)
    lo, hi = _nice_range(lo, hi)
    x0, y0 = _PAD + 16, 24
    size = min(_W - x0 - 24, _TOP_H - y0 - _PAD)

    def to_px(x, y):
        return x0 + (x - lo) / (hi - lo) * size, y0 + size - (y - lo) / (hi - lo) * size

    out = _axes(x0, y0, size, size, (lo, hi), (lo, hi), "x [m]", "y [m]")
    out.append(_polyline([to_px(x, y) for x, y in zip(xs, ys)], "#1f77b4"))
    glyph = 0.04 * (hi - lo)
    stride = max(1, len(xs) // 20)
    for i in range(0, len(xs), stride):
        (ax, ay), (bx, by) = to_px(xs[i], ys[i]), to_px(
            xs[i] + glyph * math.cos(psis[i]), ys[i] + glyph * math.sin(psis[i])
        )
        out.append(f'<line x1="{ax:.2f}" y1="{ay:.2f}" x2="{bx:.2f}" y2="{by:.2f}" stroke="#ff7f0e"/>')
    sx, sy = to_px(xs[0], ys[0])
    out.append(f'<circle cx="{sx:.2f}" cy="{sy:.2f}" r="4" fill="#2ca02c"><title>start</title></circle>')
    gx, gy = to_px(0.0, 0.0)
    out.append(
        f'<path d="M{gx - 5:.2f},{gy - 5:.2f} L{gx + 5:.2f},{gy + 5:.2f} '
        f'M{gx - 5:.2f},{gy + 5:.2f} L{gx + 5:.2f},{gy - 5:.2f}" stroke="#d62728" stroke-width="2">'
        "<title>goal</title></path>"
    )
    return out


def _state_panel(traj: Trajectory) -> list[str]:
    t = traj.column("t")
    cols = {name: traj.column(name) for name, _, _ in _SERIES}
    ylo = min(float(c.min()) for c in cols.values())
    yhi = max(float(c.max()) for c in cols.values())
    yr = _nice_range(ylo, yhi)
    tr = _nice_range(float(t[0]), float(t[-1])) if len(t) > 1 else (float(t[0]) - 0.5, float(t[0]) + 0.5)
    x0, y0 = _PAD + 16, _TOP_H + 8
    w, h = _W - x0 - 130, _BOT_H - _PAD - 8

    def to_px(tv, yv):
        return x0 + (tv - tr[0]) / (tr[1] - tr[0]) * w, y0 + h - (yv - yr[0]) / (yr[1] - yr[0]) * h

    out = _axes(x0, y0, w, h, tr, yr, "t [s]", "state")
    for k, (name, label, color) in enumerate(_SERIES):
        pts = [to_px(tv, yv) for tv, yv in zip(t, cols[name])]
        if len(pts) == 1:
            px, py = pts[0]
            out.append(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="2.5" fill="{color}"/>')
        else:
            out.append(_polyline(pts, color))
        ly = y0 + 14 + 18 * k
        out.append(f'<line x1="{x0 + w + 10}" y1="{ly}" x2="{x0 + w + 30}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{x0 + w + 34}" y="{ly + 4}">{escape(label)}</text>')
    return out


def render_trajectory_svg(traj: Trajectory, path: str | Path, title: str | None = None) -> Path:
    """Draw the XY path (top) and e, theta1, theta2, phi against time (bottom)."""
    height = _TOP_H + _BOT_H
    body = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{height}" '
        f'viewBox="0 0 {_W} {height}" font-family="sans-serif" font-size="11">',
        f'<rect width="{_W}" height="{height}" fill="white"/>',
    ]
    if title:
        body.append(f'<text x="{_W / 2}" y="14" text-anchor="middle" font-size="13">{escape(title)}</text>')
    body += _path_panel(traj)
    body += _state_panel(traj)
    body.append("</svg>")
    path = Path(path)
    try:
        path.write_text("\n".join(body) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path
