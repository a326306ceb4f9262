"""CSV and SVG writers for plays, sweeps and fixed-point reports.

Play CSVs have one row per sample time.  Coordinate spaces use
``t,lx,ly,mx,my,dist`` (``lx,mx`` on an interval, ``lx,ly,lz,...`` for a
disc-by-interval sum) and graphs use ``t,l_edge,l_off,m_edge,m_off,dist``.
Values are written with 9 decimals.
"""
from __future__ import annotations

import csv
from pathlib import Path

from .geometry import ClosedDisc, LinfSum, MetricGraph

_AXES = "xyz"


def _fmt(v) -> str:
    if isinstance(v, int):
        return str(v)
    return f"{v:.9f}"


def play_header(space) -> list:
    if isinstance(space, MetricGraph):
        return ["t", "l_edge", "l_off", "m_edge", "m_off", "dist"]
    dim = len(space.coords(_probe_point(space)))
    return ["t"] + [f"l{_AXES[i]}" for i in range(dim)] + [f"m{_AXES[i]}" for i in range(dim)] + ["dist"]


def _probe_point(space):
    if isinstance(space, LinfSum):
        return (_probe_point(space.first), _probe_point(space.second))
    if getattr(space, "dim", 2) == 1:
        return 0.0
    return (0.0, 0.0)


def play_rows(record):
    space = record.lion.space
    for t, l, m in zip(record.lion.times, record.lion.points, record.man.points):
        yield [t, *space.coords(l), *space.coords(m), space.distance(l, m)]


def write_play_csv(record, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(play_header(record.lion.space))
        for row in play_rows(record):
            w.writerow([_fmt(v) for v in row])


def write_sweep_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["eps", "delta", "states", "elapsed_ms"])
        for r in rows:
            w.writerow([_fmt(r.eps), _fmt(r.delta), r.states, f"{r.elapsed_ms:.3f}"])


def write_fixed_point_csv(report, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "residual"])
        for i, res in enumerate(report.history):
            w.writerow([i, _fmt(res)])


# -- svg -----------------------------------------------------------------------


def _planar(space, p):
    if isinstance(space, LinfSum):
        return _planar(space.first, p[0])
    c = space.coords(p)
    return (c[0], c[1] if len(c) > 1 else 0.0)


def render_svg(record, size: int = 400) -> str:
    """Trajectory plot in a unit-square viewport: lion red, man blue, capture marked."""
    space = record.lion.space
    if isinstance(space, MetricGraph):
        raise ValueError("SVG plots are only drawn for coordinate spaces")
    lo_x, lo_y, hi_x, hi_y = space.bounds()
    span = max(hi_x - lo_x, hi_y - lo_y) or 1.0
    pad = 0.05

    def xy(p):
        x, y = _planar(space, p)
        u = pad + (1 - 2 * pad) * (x - lo_x) / span
        v = pad + (1 - 2 * pad) * (y - lo_y) / span if hi_y > lo_y else 0.5
        return u, 1 - v

    def poly(points):
        return " ".join(f"{u:.5f},{v:.5f}" for u, v in map(xy, points))

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 1 1">',
        '<rect x="0" y="0" width="1" height="1" fill="white"/>',
    ]
    disc = space.first if isinstance(space, LinfSum) else space
    if isinstance(disc, ClosedDisc):
        cu, cv = xy((0.0, 0.0)) if not isinstance(space, LinfSum) else xy(((0.0, 0.0), 0.0))
        r = (1 - 2 * pad) * disc.radius / span
        out.append(f'<circle cx="{cu:.5f}" cy="{cv:.5f}" r="{r:.5f}" fill="none" stroke="#999" stroke-width="0.003"/>')
    else:
        out.append(f'<rect x="{pad}" y="{pad}" width="{1 - 2 * pad}" height="{1 - 2 * pad}" '
                   'fill="none" stroke="#999" stroke-width="0.003"/>')
    out.append(f'<polyline points="{poly(record.lion.points)}" fill="none" stroke="red" stroke-width="0.004"/>')
    out.append(f'<polyline points="{poly(record.man.points)}" fill="none" stroke="blue" stroke-width="0.004"/>')
    if record.captured and record.capture_time is not None:
        cu, cv = xy(record.man.at(min(record.capture_time, record.man.horizon)))
        out.append(f'<circle cx="{cu:.5f}" cy="{cv:.5f}" r="0.015" fill="none" stroke="black" stroke-width="0.005"/>')
        out.append(f'<text x="{cu + 0.02:.5f}" y="{cv - 0.02:.5f}" font-size="0.035">capture t={record.capture_time:.3f}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(record, path) -> None:
    Path(path).write_text(render_svg(record))
