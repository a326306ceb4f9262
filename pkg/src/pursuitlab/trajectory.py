"""Unit-speed trajectories: validation, interpolation, separation."""
from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Optional

from .errors import DomainError, RangeError, SpeedViolation, UsageError
from .geometry import Space

SPEED_SLACK = 1e-9
# absolute floor for the speed check; relative slack alone is below float
# resolution on intervals shorter than ~1e-7
SPEED_FLOOR = 1e-12
SEPARATION_STEP = 1e-3


def speed_ok(space: Space, p, q, dt: float) -> bool:
    return space.distance(p, q) <= dt * (1.0 + SPEED_SLACK) + SPEED_FLOOR


def _interp(space, t0, p0, t1, p1, t):
    if t <= t0:
        return p0
    if t >= t1:
        return p1
    d = space.distance(p0, p1)
    if d == 0.0:
        return p0
    return space.geodesic_step(p0, p1, d * (t - t0) / (t1 - t0))


@dataclass(frozen=True)
class TimedPath:
    """Time-stamped samples of a speed-1 path, geodesic between samples."""

    space: Space
    times: tuple
    points: tuple

    @property
    def horizon(self) -> float:
        return self.times[-1]

    @property
    def start(self):
        return self.points[0]

    @property
    def end(self):
        return self.points[-1]

    def __len__(self):
        return len(self.times)

    def at(self, t: float):
        if t < 0 or t > self.horizon + 1e-12:
            raise RangeError(f"t={t} outside [0, {self.horizon}]")
        i = bisect_right(self.times, t)
        if i >= len(self.times):
            return self.points[-1]
        if self.times[i - 1] == t:
            return self.points[i - 1]
        return _interp(self.space, self.times[i - 1], self.points[i - 1], self.times[i], self.points[i], t)

    def samples(self):
        return zip(self.times, self.points)

    def resample(self, step: float) -> "TimedPath":
        return make_path(self.space, [(t, self.at(t)) for t in refined_grid(self.times, step)])


def make_path(space: Space, samples) -> TimedPath:
    """Validate ``[(t, point), ...]`` and wrap it as a :class:`TimedPath`."""
    samples = list(samples)
    if not samples:
        raise UsageError("a path needs at least one sample")
    times = tuple(float(t) for t, _ in samples)
    points = tuple(p for _, p in samples)
    if times[0] != 0.0:
        raise UsageError(f"first sample must be at t=0, got {times[0]}")
    for t, p in zip(times, points):
        if not space.contains(p):
            raise DomainError(f"sample at t={t}: {p!r} is not in {space.describe()}: {space._why_not(p)}")
    for i in range(len(times) - 1):
        t0, t1 = times[i], times[i + 1]
        if not t1 > t0:
            raise UsageError(f"sample times must increase strictly (t={t0} then t={t1})")
        if not speed_ok(space, points[i], points[i + 1], t1 - t0):
            d = space.distance(points[i], points[i + 1])
            raise SpeedViolation(
                f"speed violation on [{t0}, {t1}]: moved {d} in time {t1 - t0}", t0, t1
            )
    return TimedPath(space, times, points)


def evaluate(path: TimedPath, t: float):
    return path.at(t)


def refined_grid(times, step: float = SEPARATION_STEP):
    """``times`` with extra points so no gap exceeds ``step``."""
    out = [times[0]]
    for a, b in zip(times, times[1:]):
        gap = b - a
        if gap > step:
            k = math.ceil(gap / step - 1e-9)
            out.extend(a + gap * j / k for j in range(1, k))
        out.append(b)
    return out


@dataclass(frozen=True)
class SeparationReport:
    min_distance: float
    arg_time: float
    captured: bool
    capture_time: Optional[float]


def separation_series(a: TimedPath, b: TimedPath, step: float = SEPARATION_STEP):
    """``(times, distances)`` over the merged sample grid, refined to ``step``."""
    if a.space != b.space:
        raise UsageError("paths live in different spaces")
    if abs(a.horizon - b.horizon) > 1e-9:
        raise UsageError(f"horizons differ: {a.horizon} vs {b.horizon}")
    space = a.space
    if a.times == b.times:
        grid = refined_grid(a.times, step)
        if len(grid) == len(a.times):
            return list(a.times), [space.distance(p, q) for p, q in zip(a.points, b.points)]
    else:
        merged = sorted(set(a.times) | set(b.times))
        grid = refined_grid(merged, step)
    return grid, [space.distance(a.at(t), b.at(t)) for t in grid]


def min_separation(a: TimedPath, b: TimedPath, capture_tol: float, step: float = SEPARATION_STEP) -> SeparationReport:
    times, dists = separation_series(a, b, step)
    k = min(range(len(dists)), key=dists.__getitem__)
    capture_time = next((t for t, d in zip(times, dists) if d <= capture_tol), None)
    return SeparationReport(dists[k], times[k], capture_time is not None, capture_time)


class PathView:
    """Read-only prefix of a growing sample buffer, optionally with one extra tail sample.

    Strategies receive these inside a :class:`~pursuitlab.strategy.History`;
    the prefix length is fixed at construction, so later appends to the
    buffer are invisible.
    """

    __slots__ = ("space", "_times", "_points", "_n", "_tail")

    def __init__(self, space, times, points, n=None, tail=None):
        self.space = space
        self._times = times
        self._points = points
        self._n = len(times) if n is None else n
        self._tail = tail

    def __len__(self):
        return self._n + (1 if self._tail else 0)

    @property
    def now(self) -> float:
        return self._tail[0] if self._tail else self._times[self._n - 1]

    @property
    def last(self):
        return self._tail[1] if self._tail else self._points[self._n - 1]

    @property
    def start(self):
        return self._points[0]

    @property
    def times(self):
        out = self._times[: self._n]
        return out + [self._tail[0]] if self._tail else out

    @property
    def points(self):
        out = self._points[: self._n]
        return out + [self._tail[1]] if self._tail else out

    def at(self, t: float):
        if self._tail and t >= self._times[self._n - 1]:
            return _interp(self.space, self._times[self._n - 1], self._points[self._n - 1], *self._tail, t)
        if t > self.now + 1e-12:
            raise RangeError(f"t={t} is in the future of this history (now={self.now})")
        i = bisect_right(self._times, t, 0, self._n)
        if i >= self._n:
            return self._points[self._n - 1]
        if self._times[i - 1] == t:
            return self._points[i - 1]
        return _interp(self.space, self._times[i - 1], self._points[i - 1], self._times[i], self._points[i], t)

    def window(self, t0: float, t1: float):
        """Samples with ``t0 < t <= t1``."""
        i = bisect_right(self._times, t0, 0, self._n)
        j = bisect_right(self._times, t1, 0, self._n)
        out = list(zip(self._times[i:j], self._points[i:j]))
        if self._tail and t0 < self._tail[0] <= t1:
            out.append(self._tail)
        return out

    def truncated(self, t: float) -> "PathView":
        """View ending exactly at time ``t`` (interpolating a tail sample if needed)."""
        j = bisect_right(self._times, t, 0, self._n)
        if j > 0 and self._times[j - 1] == t:
            return PathView(self.space, self._times, self._points, j)
        return PathView(self.space, self._times, self._points, j, (t, self.at(t)))

    def extended(self, t: float, p) -> "PathView":
        """This view plus one hypothetical sample at time ``t``."""
        if self._tail:
            raise RangeError("view already has a tail sample")
        return PathView(self.space, self._times, self._points, self._n, (t, p))

    def to_path(self) -> TimedPath:
        return TimedPath(self.space, tuple(self.times), tuple(self.points))


class PathBuffer:
    """Append-only sample store used by the engine; validates every append."""

    def __init__(self, space: Space, start, t0: float = 0.0):
        space.check(start, "start point")
        self.space = space
        self.times = [t0]
        self.points = [start]

    def append(self, t: float, p, who: str = "player"):
        if not self.space.contains(p):
            raise DomainError(f"{who} left the space at t={t}: {p!r} ({self.space._why_not(p)})")
        t0 = self.times[-1]
        if not t > t0:
            raise SpeedViolation(f"{who}: non-increasing time {t} after {t0}", t0, t)
        if not speed_ok(self.space, self.points[-1], p, t - t0):
            d = self.space.distance(self.points[-1], p)
            raise SpeedViolation(f"{who} moved {d} in time {t - t0} on [{t0}, {t}]", t0, t)
        self.times.append(t)
        self.points.append(p)

    def view(self, n=None, tail=None) -> PathView:
        return PathView(self.space, self.times, self.points, n, tail)

    def freeze(self) -> TimedPath:
        return TimedPath(self.space, tuple(self.times), tuple(self.points))

    def __len__(self):
        return len(self.times)
