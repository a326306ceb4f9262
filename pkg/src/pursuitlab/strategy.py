"""Strategy contracts and concrete lion, man, porter and racer strategies.

Two contracts exist.  A :class:`ReactiveStrategy` returns its position at
``now + dt`` from the history it is handed; it may use the opponent's
position at ``now + dt`` when the opponent has already committed to it.  A
:class:`LocallyFiniteStrategy` looks at the history up to ``now`` and
commits a :class:`Segment` of strictly positive duration.

Strategy objects carry per-play state (step counters, locks, logs); build a
fresh one for every play.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable, Optional

from .errors import DomainError, StrategyFault, UsageError
from .geometry import (
    ClosedDisc,
    EuclideanBox,
    HalfPlaneWithTwoPoints,
    LinfBox,
    LinfSum,
    Space,
)
from .trajectory import PathView, make_path

EQ_TOL = 1e-12


@dataclass(frozen=True)
class History:
    space: Space
    own: PathView
    opponent: PathView
    now: float


@dataclass(frozen=True)
class Segment:
    """``position(tau)`` for ``0 <= tau <= duration``, starting at the committer's position."""

    duration: float
    position: Callable[[float], object]

    @classmethod
    def stay(cls, point, duration):
        return cls(duration, lambda tau: point)

    @classmethod
    def straight(cls, space, start, end, duration=None):
        """Unit-speed geodesic run; holds at ``end`` if ``duration`` exceeds the distance."""
        d = space.distance(start, end)
        if duration is None:
            duration = d
        return cls(duration, lambda tau: space.geodesic_step(start, end, min(tau, d)))


class ReactiveStrategy:
    name = "reactive"

    def next_position(self, history: History, dt: float):
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


class LocallyFiniteStrategy:
    name = "locally_finite"

    def commit(self, history: History) -> Segment:
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


class AsReactive(ReactiveStrategy):
    """Run a locally finite strategy in the reactive seat.

    Commitments are made from histories truncated at the commitment time, so
    no position depends on the future of the opponent.
    """

    def __init__(self, inner: LocallyFiniteStrategy):
        self.inner = inner
        self.name = inner.name
        self.segment = None
        self.seg_start = 0.0

    def next_position(self, history, dt):
        target = history.now + dt
        if self.segment is None:
            self._commit(history, history.now, None)
        while self.seg_start + self.segment.duration < target - 1e-12:
            e = self.seg_start + self.segment.duration
            self._commit(history, e, self.segment.position(self.segment.duration))
        return self.segment.position(target - self.seg_start)

    def _commit(self, history, t, own_point):
        own = history.own if own_point is None else history.own.extended(t, own_point)
        # in discrete play a commitment may fall inside a ply the opponent has not moved in yet
        opp = history.opponent
        h = History(history.space, own, opp.truncated(t) if t < opp.now else opp, t)
        seg = self.inner.commit(h)
        if not seg.duration > 0:
            raise StrategyFault(f"{self.inner.name} committed non-positive duration {seg.duration} at t={t}")
        self.segment, self.seg_start = seg, t


def as_reactive(strategy):
    return strategy if isinstance(strategy, ReactiveStrategy) else AsReactive(strategy)


# -- helpers -----------------------------------------------------------------


def _disc_part(space, p):
    return p[0] if isinstance(space, LinfSum) else p


def _with_disc_part(space, p, q):
    return (q, p[1]) if isinstance(space, LinfSum) else q


def _disc_space(space):
    return space.first if isinstance(space, LinfSum) else space


def _wrap(a):
    return (a + math.pi) % (2 * math.pi) - math.pi


# -- man strategies ----------------------------------------------------------


def besicovitch_radius_bound(r0: float, c: float) -> float:
    return math.sqrt(r0 * r0 + c * c * math.pi ** 2 / 6)


class Besicovitch(LocallyFiniteStrategy):
    """Perpendicular dashes of duration ``c / i`` away from the lion's side.

    On an :class:`LinfSum` whose first factor is a disc, the dashes happen in
    the disc coordinate and the other coordinate is held.  ``min_duration``
    floors the dash length; the default 0 keeps the exact ``c / i`` schedule.
    """

    name = "besicovitch"

    def __init__(self, c=0.5, tie_break=1, min_duration=0.0, first_index=1):
        if not c > 0:
            raise UsageError("besicovitch scale must be positive")
        self.c = float(c)
        self.tie_break = 1 if tie_break >= 0 else -1
        self.min_duration = float(min_duration)
        self.i = int(first_index)
        # (start time, radius at start, duration) for every dash
        self.steps = []

    def step_duration(self, i):
        return max(self.c / i, self.min_duration)

    def commit(self, history):
        space = history.space
        m = _disc_part(space, history.own.last)
        lion = _disc_part(space, history.opponent.last)
        t_i = self.step_duration(self.i)
        r = math.hypot(*m)
        if r == 0.0:
            direction = (0.0, float(self.tie_break))
        else:
            u = (-m[1] / r, m[0] / r)
            side = (lion[0] - m[0]) * u[0] + (lion[1] - m[1]) * u[1]
            if side > EQ_TOL:
                sign = -1.0
            elif side < -EQ_TOL:
                sign = 1.0
            else:
                sign = float(self.tie_break)
            direction = (sign * u[0], sign * u[1])
        self.steps.append((history.now, r, t_i))
        self.i += 1
        start = history.own.last
        mx, my = m

        def pos(tau, start=start):
            tau = min(tau, t_i)
            return _with_disc_part(space, start, (mx + tau * direction[0], my + tau * direction[1]))

        return Segment(t_i, pos)


class RunAway(ReactiveStrategy):
    """Run at full speed directly away from the lion, projected back onto the disc."""

    name = "run_away"

    def next_position(self, history, dt):
        space = history.space
        m, l = history.own.last, history.opponent.last
        dx, dy = m[0] - l[0], m[1] - l[1]
        d = math.hypot(dx, dy)
        if d == 0.0:
            return m
        x, y = m[0] + dt * dx / d, m[1] + dt * dy / d
        R = space.radius
        n = math.hypot(x, y)
        if n > R:
            x, y = x * R / n, y * R / n
        return (x, y)


class EscapeThenBesicovitch(LocallyFiniteStrategy):
    """Get out from underneath the lion in an l-infinity sum, then dash.

    Holds still for ``probe``, then checks whether the lion's disc coordinate
    followed the unit-speed ascent ``start + s * e`` (``e`` pointing at the
    second target) over that window.  If it did, the man runs to the first
    target, otherwise to the second, and then plays :class:`Besicovitch` in
    the disc coordinate.
    """

    name = "escape_underneath"

    def __init__(self, targets=((-0.5, 0.0), (0.5, 0.0)), probe=1e-3, c=0.5, tie_break=1, min_duration=0.0):
        self.targets = tuple(tuple(map(float, t)) for t in targets)
        self.probe = float(probe)
        self.then = Besicovitch(c, tie_break, min_duration)
        self.phase = "probe"
        self.t0 = None
        self.origin = None
        self.choice = None

    def commit(self, history):
        space = history.space
        if self.phase == "probe":
            self.phase = "decide"
            self.t0 = history.now
            self.origin = _disc_part(space, history.own.last)
            return Segment.stay(history.own.last, self.probe)
        if self.phase == "decide":
            self.phase = "run"
            o = self.origin
            far = self.targets[1]
            d = math.hypot(far[0] - o[0], far[1] - o[1])
            e = ((far[0] - o[0]) / d, (far[1] - o[1]) / d) if d else (1.0, 0.0)
            tracked = True
            for t, p in history.opponent.window(self.t0, history.now):
                s = t - self.t0
                q = _disc_part(space, p)
                if math.hypot(q[0] - o[0] - s * e[0], q[1] - o[1] - s * e[1]) > 1e-9:
                    tracked = False
                    break
            self.choice = 0 if tracked else 1
            here = history.own.last
            goal = _with_disc_part(space, here, self.targets[self.choice])
            seg = Segment.straight(space, here, goal)
            if seg.duration > 0:
                return seg
        return self.then.commit(history)


class LinfBoxEscape(LocallyFiniteStrategy):
    """Repeated escape for the l-infinity unit ball.

    In the frame where the man sits on the right edge, the man runs to
    (0, -1) if the lion is above him and to (0, 1) if below.  On a tie he
    holds still for ``probe`` and runs to (0, -1) exactly when the lion's
    edge coordinate climbed at unit speed over the probe window.
    """

    name = "escape_underneath"

    # rotations taking each edge to the right-hand edge, with their inverses
    _FRAMES = {
        "right": (lambda x, y: (x, y), lambda x, y: (x, y)),
        "top": (lambda x, y: (y, -x), lambda x, y: (-y, x)),
        "left": (lambda x, y: (-x, -y), lambda x, y: (-x, -y)),
        "bottom": (lambda x, y: (-y, x), lambda x, y: (y, -x)),
    }

    def __init__(self, probe=1e-3):
        self.probe = float(probe)
        self.pending = None  # (t0, frame, man edge coordinate) while probing
        self.runs = []

    @staticmethod
    def _edge(p):
        x, y = p
        if abs(x) >= abs(y):
            return "right" if x >= 0 else "left"
        return "top" if y > 0 else "bottom"

    def commit(self, history):
        space = history.space
        here = history.own.last
        lion = history.opponent.last
        if self.pending is not None:
            t0, frame, ym = self.pending
            self.pending = None
            fwd, back = self._FRAMES[frame]
            tracked = all(
                abs(fwd(*p)[1] - (ym + (t - t0))) <= 1e-9
                for t, p in history.opponent.window(t0, history.now)
            )
            return self._run(space, here, back(0.0, -1.0 if tracked else 1.0))
        frame = self._edge(here)
        fwd, back = self._FRAMES[frame]
        ym = fwd(*here)[1]
        yl = fwd(*lion)[1]
        if yl > ym + EQ_TOL:
            return self._run(space, here, back(0.0, -1.0))
        if yl < ym - EQ_TOL:
            return self._run(space, here, back(0.0, 1.0))
        self.pending = (history.now, frame, ym)
        return Segment.stay(here, self.probe)

    def _run(self, space, here, goal):
        h = space.halfwidth
        goal = (goal[0] * h, goal[1] * h)
        self.runs.append(goal)
        seg = Segment.straight(space, here, goal)
        if seg.duration <= 0:
            return Segment.stay(here, self.probe)
        return seg


def escape_underneath_man(space, run_targets=None, probe=1e-3, c=0.5, tie_break=1, min_duration=0.0):
    if isinstance(space, LinfBox):
        return LinfBoxEscape(probe)
    if isinstance(space, LinfSum) and isinstance(space.first, ClosedDisc):
        targets = run_targets or ((-0.5, 0.0), (0.5, 0.0))
        return EscapeThenBesicovitch(targets, probe, c, tie_break, min_duration)
    raise UsageError(f"escape_underneath needs a LinfBox or LinfSum(disc, .), got {space.describe()}")


# -- lion strategies ---------------------------------------------------------


class PursuitLion(ReactiveStrategy):
    """Curve of pursuit: step straight at the man's latest position."""

    name = "pursuit_lion"

    def next_position(self, history, dt):
        return history.space.geodesic_step(history.own.last, history.opponent.last, dt)


class RadiusLion(ReactiveStrategy):
    """Stay on the centre-to-man radius, spending the rest of the budget outward.

    Each step lands exactly on the man's current ray at the largest radius
    reachable with budget ``dt``, capped at the man's own radius.
    """

    name = "radius_lion"

    def next_position(self, history, dt):
        space = history.space
        l, m = history.own.last, history.opponent.last
        rm = math.hypot(*m)
        if rm == 0.0:
            return l
        ux, uy = m[0] / rm, m[1] / rm
        rl = math.hypot(*l)
        if rl == 0.0:
            R = min(dt, rm)
            return (R * ux, R * uy)
        dth = _wrap(math.atan2(m[1], m[0]) - math.atan2(l[1], l[0]))
        perp = rl * abs(math.sin(dth))
        if dt < perp:
            return space.geodesic_step(l, (rl * ux, rl * uy), dt)
        root = math.sqrt(dt * dt - perp * perp)
        hi = rl * math.cos(dth) + root
        lo = rl * math.cos(dth) - root
        if hi < 0.0:
            return space.geodesic_step(l, (rl * ux, rl * uy), dt)
        R = min(hi, rm)
        if R < lo:
            return space.geodesic_step(l, m, dt)
        R = max(R, 0.0)
        return (R * ux, R * uy)


class LinfSweep(ReactiveStrategy, LocallyFiniteStrategy):
    """Coordinate-wise chase in an l-infinity product.

    Reactive use: a coordinate that already equals the man's copies his
    move; any other coordinate runs at full speed toward his and locks on
    contact.  Committed use (``commit``): for ``window`` time, each unlocked
    coordinate runs toward where the man is now and locked ones hold.
    """

    name = "linf_sweep"

    def __init__(self, window=1e-3):
        self.window = float(window)
        self.locked = None

    def _init_locks(self, space, l, m_prev):
        fs = space.factors()
        ls, ms = space.split(l), space.split(m_prev)
        self.locked = [f.distance(a, b) <= EQ_TOL for f, a, b in zip(fs, ls, ms)]

    def next_position(self, history, dt):
        space = history.space
        if not isinstance(space, (LinfBox, LinfSum)):
            raise UsageError("linf_sweep needs an l-infinity product space")
        l = history.own.last
        m_prev = history.opponent.at(history.now)
        m = history.opponent.last
        if self.locked is None:
            self._init_locks(space, l, m_prev)
        out = []
        for k, (f, a, b_prev, b) in enumerate(zip(space.factors(), space.split(l), space.split(m_prev), space.split(m))):
            if not self.locked[k] and f.distance(a, b_prev) <= EQ_TOL:
                self.locked[k] = True
            if self.locked[k]:
                out.append(b)
                continue
            nxt = f.geodesic_step(a, b, dt)
            if f.distance(nxt, b) <= EQ_TOL:
                self.locked[k] = True
                nxt = b
            out.append(nxt)
        return space.join(out)

    def commit(self, history):
        space = history.space
        l, m = history.own.last, history.opponent.last
        fs = space.factors()
        ls, ms = space.split(l), space.split(m)

        def pos(tau):
            return space.join([f.geodesic_step(a, b, min(tau, self.window)) for f, a, b in zip(fs, ls, ms)])

        return Segment(self.window, pos)


# -- porter ------------------------------------------------------------------


_PORTER_EDGES = {
    "left": ((-1.0, 0.0), (-1.0, 1.0), (-1.0, -1.0)),
    "right": ((1.0, 0.0), (1.0, 1.0), (1.0, -1.0)),
    "top": ((0.0, 1.0), (1.0, 1.0), (-1.0, 1.0)),
    "bottom": ((0.0, -1.0), (1.0, -1.0), (-1.0, -1.0)),
}


def porter_start(side="left", halfwidth=1.0):
    p = _PORTER_EDGES[side][0]
    return (p[0] * halfwidth, p[1] * halfwidth)


class Porter(LocallyFiniteStrategy):
    """Locally finite edge guard for the box ``[-h, h]^2``.

    Keeps the porter no farther than the student from both corners of the
    guarded edge.  With slack ``d(student, c) - d(porter, c)`` at each
    corner: if both slacks are positive, wait for the smaller one; if one
    slack is zero, run toward that corner for half the other slack.
    """

    name = "porter"
    # slacks at or below this count as equality; waiting on smaller ones
    # would commit durations under the engine's time resolution
    ZERO = 1e-9

    def __init__(self, side="left", halfwidth=1.0):
        if side not in _PORTER_EDGES:
            raise UsageError(f"unknown porter side {side!r}")
        self.side = side
        _, c1, c2 = _PORTER_EDGES[side]
        self.corners = ((c1[0] * halfwidth, c1[1] * halfwidth), (c2[0] * halfwidth, c2[1] * halfwidth))
        # (t, slack at first corner, slack at second corner, action, duration)
        self.log = []

    def slacks(self, p, s):
        return tuple(math.dist(s, c) - math.dist(p, c) for c in self.corners)

    def commit(self, history):
        space = history.space
        p, s = history.own.last, history.opponent.last
        a, b = self.slacks(p, s)
        if min(a, b) < -self.ZERO:
            raise StrategyFault(
                f"porter invariant broken at t={history.now}: corner slacks {a:.3g}, {b:.3g}"
            )
        z = self.ZERO
        if a > z and b > z:
            action, dur, seg = "wait", min(a, b), Segment.stay(p, min(a, b))
        elif a <= z and b > z:
            action, dur = "run0", 0.5 * b
            seg = Segment.straight(space, p, self.corners[0], dur)
        elif b <= z and a > z:
            action, dur = "run1", 0.5 * a
            seg = Segment.straight(space, p, self.corners[1], dur)
        else:
            raise StrategyFault(f"student reached the porter at t={history.now} without being caught")
        self.log.append((history.now, a, b, action, dur))
        return seg


# -- race to a point ---------------------------------------------------------


class RaceA(ReactiveStrategy):
    """Racer from (1, 0) to (0, 0) that stays strictly inside its opponent's radius.

    In polar coordinates the racer sits at radius ``(r + 2 (1 - t)) / 3`` and
    angle ``t + radius - 1`` where ``r`` is the opponent's current radius.
    """

    name = "race_a"

    def __init__(self):
        self.arrival = None

    def position(self, t, r):
        s = (r + 2.0 * (1.0 - t)) / 3.0
        if s <= 0.0:
            return (0.0, 0.0), 0.0
        phi = t + s - 1.0
        return (s * math.cos(phi), s * math.sin(phi)), s

    def next_position(self, history, dt):
        if self.arrival is not None:
            return (0.0, 0.0)
        t = history.now + dt
        opp = history.opponent.last
        if not history.space.contains(opp):
            raise DomainError(f"opponent left the space at t={t}")
        p, s = self.position(t, math.hypot(*opp))
        if s == 0.0:
            self.arrival = t
        return p


# -- scripted and constant players ------------------------------------------


class Constant(LocallyFiniteStrategy, ReactiveStrategy):
    name = "constant"

    def __init__(self, window=1.0):
        self.window = float(window)

    def commit(self, history):
        return Segment.stay(history.own.last, self.window)

    def next_position(self, history, dt):
        return history.own.last


class ScriptedPath(LocallyFiniteStrategy, ReactiveStrategy):
    """A fixed path ``f(t)`` that ignores the opponent; holds its last point after ``horizon``."""

    name = "scripted_path"

    def __init__(self, f, horizon=math.inf, window=0.25):
        self.f = f
        self.horizon = horizon
        self.window = float(window)

    def where(self, t):
        return self.f(min(t, self.horizon))

    def commit(self, history):
        t0 = history.now
        return Segment(self.window, lambda tau: self.where(t0 + tau))

    def next_position(self, history, dt):
        return self.where(history.now + dt)


def waypoint_path(space, waypoints, window=0.25):
    """Piecewise geodesic through ``[(t, point), ...]``; validated for speed."""
    path = make_path(space, waypoints)
    return ScriptedPath(path.at, path.horizon, window)


def circle_runner(radius=1.0, angle0=0.0, direction=1, speed=1.0, window=0.25):
    """Run around the circle of the given radius at constant speed."""
    w = direction * speed / radius
    return ScriptedPath(lambda t: (radius * math.cos(angle0 + w * t), radius * math.sin(angle0 + w * t)), window=window)


def random_lipschitz_path(space, start, seed, horizon, legs=8, window=0.25):
    """Seeded piecewise-geodesic wandering path with random leg speeds in (0.2, 1]."""
    rng = random.Random(seed)
    lo_x, lo_y, hi_x, hi_y = space.bounds()
    pts = [(0.0, start)]
    t, here = 0.0, start
    for _ in range(legs):
        while True:
            cand = (rng.uniform(lo_x, hi_x), rng.uniform(lo_y, hi_y))
            if space.contains(cand):
                break
        speed = rng.uniform(0.2, 1.0)
        d = space.distance(here, cand)
        if d == 0:
            continue
        t += d / speed
        pts.append((t, cand))
        here = cand
        if t >= horizon:
            break
    return waypoint_path(space, pts, window)


def student_waypoints(seed, halfwidth=1.0, exit_left=True, legs=4):
    """Seeded student route from the centre of ``[-h, h]^2``.

    Wanders through one to ``legs`` interior points at random speeds; with
    ``exit_left`` it then runs at speed 1 to a random point of the left edge.
    Returns the waypoints and the touch time (None when it stays inside).
    """
    rng = random.Random(seed)
    inner = 0.9 * halfwidth
    pts = [(0.0, (0.0, 0.0))]
    t, here = 0.0, (0.0, 0.0)
    for _ in range(rng.randint(1, legs)):
        c = (rng.uniform(-inner, inner), rng.uniform(-inner, inner))
        t += math.dist(here, c) / rng.uniform(0.3, 1.0)
        pts.append((t, c))
        here = c
    if not exit_left:
        return pts, None
    end = (-halfwidth, rng.uniform(-inner, inner))
    t += math.dist(here, end)
    pts.append((t, end))
    return pts, t


def race_arc_path(bulge=0.5, wait=0.0, speed=1.0, window=0.25):
    """Circular arc from (1, 0) to (0, 0) through the upper half plane.

    ``bulge`` is the arc's height above the x axis at x = 1/2 (0.5 gives the
    semicircle); the racer waits ``wait`` at the start, then runs at ``speed``.
    """
    if not bulge > 0:
        raise UsageError("arc bulge must be positive")
    # circle through (0,0) and (1,0) with centre (1/2, k), top at k + rho = bulge
    k = (bulge * bulge - 0.25) / (2 * bulge)
    rho = bulge - k
    a_start = math.atan2(0.0 - k, 0.5)
    a_end = math.atan2(0.0 - k, -0.5)
    if a_end < a_start:
        a_end += 2 * math.pi
    length = rho * (a_end - a_start)
    run = length / speed

    def f(t):
        if t <= wait:
            return (1.0, 0.0)
        if t >= wait + run:
            return (0.0, 0.0)
        a = a_start + (a_end - a_start) * (t - wait) / run
        y = k + rho * math.sin(a)
        return (0.5 + rho * math.cos(a), max(y, 1e-300))

    return ScriptedPath(f, wait + run, window)


# -- registry ----------------------------------------------------------------


STRATEGY_IDS = (
    "besicovitch",
    "radius_lion",
    "pursuit_lion",
    "linf_sweep",
    "escape_underneath",
    "porter",
    "race_a",
    "constant",
    "scripted_path",
    "run_away",
)


def build(strategy_id, params=None, *, space=None, dt=1e-3, horizon=math.inf, start=None):
    """Instantiate a strategy from its scenario-file id and parameter map."""
    p = dict(params or {})
    f = lambda k, d: float(p.get(k, d))
    if strategy_id == "besicovitch":
        return Besicovitch(f("c", 0.5), int(f("tie_break", 1)), f("min_duration", 0.0))
    if strategy_id == "radius_lion":
        return RadiusLion()
    if strategy_id == "pursuit_lion":
        return PursuitLion()
    if strategy_id == "linf_sweep":
        return LinfSweep(f("window", dt))
    if strategy_id == "escape_underneath":
        targets = p.get("targets")
        if targets is not None:
            targets = tuple(tuple(float(v) for v in t) for t in targets)
        return escape_underneath_man(space, targets, f("probe", dt), f("c", 0.5),
                                     int(f("tie_break", 1)), f("min_duration", 0.0))
    if strategy_id == "porter":
        return Porter(p.get("side", "left"), getattr(space, "halfwidth", 1.0))
    if strategy_id == "race_a":
        return RaceA()
    if strategy_id == "constant":
        return Constant(f("window", 1.0))
    if strategy_id == "run_away":
        return RunAway()
    if strategy_id == "scripted_path":
        kind = p.get("kind", "waypoints")
        window = f("window", 0.25)
        if kind == "waypoints":
            return waypoint_path(space, [(float(t), pt) for t, pt in p["waypoints"]], window)
        if kind == "circle":
            return circle_runner(f("radius", 1.0), f("angle0", 0.0), int(f("direction", 1)), f("speed", 1.0), window)
        if kind == "random":
            return random_lipschitz_path(space, start, int(p.get("seed", 0)), horizon, int(f("legs", 8)), window)
        if kind == "student":
            pts, _ = student_waypoints(int(p.get("seed", 0)), getattr(space, "halfwidth", 1.0),
                                       bool(f("exit", 1)), int(f("legs", 4)))
            return waypoint_path(space, pts, window)
        if kind == "race_arc":
            return race_arc_path(f("bulge", 0.5), f("wait", 0.0), f("speed", 1.0), window)
        raise UsageError(f"unknown scripted path kind {kind!r}")
    raise UsageError(f"unknown strategy id {strategy_id!r}")
