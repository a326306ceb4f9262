"""Experiments built on the engine: fixed-point capture search and scenario batteries.

For a man strategy on the unit disc, ``g(z)`` is where the man stands at
time 1 when the lion runs at constant speed from the centre straight to
``z``, arriving at time 1.  If the strategy is continuous, ``g`` maps the
disc into itself and has a fixed point; at that point the lion's path ends
on the man.  :func:`fixed_point_search` looks for it numerically.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .engine import GameConfig, play
from .geometry import ClosedDisc
from .strategy import ScriptedPath, as_reactive


@dataclass(frozen=True)
class FixedPointReport:
    z: tuple
    residual: float
    resolution: float
    refinements: int
    # best residual after the coarse grid and after each refinement
    history: tuple = ()
    evaluations: int = 0


def straight_lion(z, duration: float = 1.0) -> ScriptedPath:
    """Constant-speed path from the origin reaching ``z`` at ``duration``."""
    zx, zy = float(z[0]), float(z[1])
    return ScriptedPath(lambda t: (zx * t / duration, zy * t / duration), duration, window=duration)


def man_endpoint(make_man: Callable, z, man_start=(0.5, 0.0), dt: float = 1e-3, radius: float = 1.0):
    """``g(z)``: the man's position at time 1 against the straight lion to ``z``."""
    cfg = GameConfig(ClosedDisc(radius), (0.0, 0.0), man_start, 1.0, dt, 0.0)
    rec = play(straight_lion(z), as_reactive(make_man()), "lion", cfg, stop_on_capture=False)
    if rec.fault is not None:
        raise RuntimeError(f"man strategy faulted at z={z}: {rec.fault.message}")
    return rec.man.points[-1]


def _residual(args):
    make_man, z, man_start, dt, radius = args
    g = man_endpoint(make_man, z, man_start, dt, radius)
    return math.hypot(g[0] - z[0], g[1] - z[1])


def _clip(z, radius):
    r = math.hypot(*z)
    if r > radius:
        return (z[0] * radius / r, z[1] * radius / r)
    return z


def _coarse_grid(resolution, radius):
    k = int(math.floor(radius / resolution + 1e-9))
    pts = {(i * resolution, j * resolution) for i in range(-k, k + 1) for j in range(-k, k + 1)
           if math.hypot(i * resolution, j * resolution) <= radius + 1e-12}
    m = max(8, int(math.ceil(2 * math.pi * radius / resolution)))
    pts |= {(radius * math.cos(2 * math.pi * a / m), radius * math.sin(2 * math.pi * a / m)) for a in range(m)}
    return sorted(pts)


def fixed_point_search(make_man: Callable, resolution: float = 0.1, refinements: int = 3,
                       man_start=(0.5, 0.0), dt: float = 1e-3, radius: float = 1.0,
                       jobs: int = 1, zoom: int = 10, half_width: int = 5) -> FixedPointReport:
    """Grid search for ``g(z) = z`` followed by ``refinements`` rounds of ``zoom``-fold refinement.

    ``make_man`` builds a fresh man strategy per evaluation.  Each refinement
    evaluates a ``(2 * half_width + 1)``-point square lattice around the best
    point so far, clipped to the disc; the incumbent is kept, so the reported
    residuals never increase.
    """
    cache = {}

    def evaluate(points):
        todo = [p for p in points if p not in cache]
        args = [(make_man, p, man_start, dt, radius) for p in todo]
        if jobs > 1 and len(args) > 1:
            with ProcessPoolExecutor(jobs) as pool:
                vals = list(pool.map(_residual, args, chunksize=max(1, len(args) // (4 * jobs))))
        else:
            vals = [_residual(a) for a in args]
        cache.update(zip(todo, vals))

    def best_of(points):
        return min(points, key=lambda p: (cache[p], p))

    pts = _coarse_grid(resolution, radius)
    evaluate(pts)
    best = best_of(pts)
    history = [cache[best]]
    step = resolution
    for _ in range(refinements):
        step /= zoom
        local = {_clip((best[0] + i * step, best[1] + j * step), radius)
                 for i in range(-half_width, half_width + 1) for j in range(-half_width, half_width + 1)}
        local.add(best)
        local = sorted(local)
        evaluate(local)
        best = best_of(local)
        history.append(cache[best])
    return FixedPointReport(best, cache[best], resolution, refinements, tuple(history), len(cache))


# -- batteries ---------------------------------------------------------------


@dataclass(frozen=True)
class BatteryRow:
    name: str
    status: str  # "pass", "fail", "fault" or "error"
    measured: dict = field(default_factory=dict)
    message: str = ""
    elapsed: float = 0.0


def _run_one(scenario, overrides):
    from .scenario import execute, check_expectations

    clock = time.perf_counter()
    try:
        result = execute(scenario, **(overrides or {}))
    except Exception as e:  # noqa: BLE001 - a battery collects every failure
        return BatteryRow(scenario.name, "error", {}, f"{type(e).__name__}: {e}", time.perf_counter() - clock)
    if result.fault is not None:
        return BatteryRow(scenario.name, "fault", result.measured, result.fault, time.perf_counter() - clock)
    problems = check_expectations(scenario, result)
    status = "fail" if problems else "pass"
    return BatteryRow(scenario.name, status, result.measured, "; ".join(problems), time.perf_counter() - clock)


def run_battery(scenarios: Sequence, jobs: int = 1, overrides: Optional[dict] = None) -> list:
    """Run every scenario and compare against its ``expect`` block; never raises per scenario."""
    scenarios = list(scenarios)
    if jobs > 1 and len(scenarios) > 1:
        with ProcessPoolExecutor(jobs) as pool:
            return list(pool.map(_run_one, scenarios, [overrides] * len(scenarios)))
    return [_run_one(s, overrides) for s in scenarios]


def format_battery(rows) -> str:
    lines = []
    for r in rows:
        measured = " ".join(f"{k}={_fmt(v)}" for k, v in r.measured.items())
        line = f"{r.status.upper():5s} {r.name} {measured}".rstrip()
        if r.message:
            line += f"  [{r.message}]"
        lines.append(line)
    total = len(rows)
    passed = sum(r.status == "pass" for r in rows)
    lines.append(f"{passed}/{total} passed")
    return "\n".join(lines)


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, bool):
        return str(v).lower()
    return str(v)
