"""Playing strategies against each other.

:func:`play` pairs a locally finite committer with a reactive opponent and
builds the unique compatible pair of paths segment by segment.  Two
reactive strategies cannot be played against each other in continuous
time: nothing guarantees that a compatible pair exists.

:func:`play_discrete` runs the alternating-move game in which each player
in turn walks a geodesic of length at most ``eps``.
"""
from __future__ import annotations

import math
import time as _time
from dataclasses import dataclass, field
from typing import Optional

from .errors import DomainError, PursuitLabError, SpeedViolation, StrategyFault, UsageError
from .geometry import Space
from .strategy import History, LocallyFiniteStrategy, ReactiveStrategy
from .trajectory import PathBuffer, SeparationReport, TimedPath, min_separation

GRID_EPS = 1e-12


@dataclass(frozen=True)
class GameConfig:
    space: Space
    lion_start: object
    man_start: object
    horizon: float
    dt: float = 1e-3
    capture_tol: float = 1e-6
    # races start both players at the same point
    distinct_starts: bool = True

    def __post_init__(self):
        if not self.horizon > 0:
            raise UsageError("horizon must be positive")
        if not self.dt > 0:
            raise UsageError("dt must be positive")
        ratio = self.horizon / self.dt
        if abs(ratio - round(ratio)) > 1e-6 * max(1.0, ratio):
            raise UsageError(f"horizon {self.horizon} is not a multiple of dt {self.dt}")
        self.space.check(self.lion_start, "lion start")
        self.space.check(self.man_start, "man start")
        if self.distinct_starts and self.space.distance(self.lion_start, self.man_start) == 0:
            raise UsageError("start points must be distinct")


@dataclass(frozen=True)
class Fault:
    role: str
    time: float
    message: str


@dataclass(frozen=True)
class PlayRecord:
    lion: TimedPath
    man: TimedPath
    separation: SeparationReport
    mode: str = "continuum"
    eps: Optional[float] = None
    order: Optional[str] = None
    fault: Optional[Fault] = None
    # committer segment boundaries (continuum) or ply boundaries (discrete)
    boundaries: tuple = ()
    elapsed: float = 0.0

    @property
    def captured(self) -> bool:
        return self.separation.captured

    @property
    def capture_time(self):
        return self.separation.capture_time


def play(committer: LocallyFiniteStrategy, reactor: ReactiveStrategy, committer_role: str, config: GameConfig,
         stop_on_capture: bool = True, time_budget: Optional[float] = None) -> PlayRecord:
    """Play a committed strategy against a reactive one on ``[0, horizon]``.

    ``committer_role`` is ``"lion"`` or ``"man"``.  The reactor is stepped in
    increments of at most ``dt`` inside each committed window and sees the
    committer's position at the end of each increment.  Strategy contract
    breaches end the play and are reported in ``PlayRecord.fault``;
    ``time_budget`` (wall-clock seconds) ends it the same way.
    """
    if committer_role not in ("lion", "man"):
        raise UsageError(f"committer_role must be 'lion' or 'man', got {committer_role!r}")
    if not hasattr(committer, "commit"):
        raise UsageError(f"{committer!r} cannot commit segments; one side must be locally finite")
    if not hasattr(reactor, "next_position"):
        raise UsageError(f"{reactor!r} is not a reactive strategy")
    reactor_role = "man" if committer_role == "lion" else "lion"
    space, T, dt, tol = config.space, config.horizon, config.dt, config.capture_tol
    starts = {"lion": config.lion_start, "man": config.man_start}
    cbuf = PathBuffer(space, starts[committer_role])
    rbuf = PathBuffer(space, starts[reactor_role])
    boundaries = [0.0]
    fault = None
    t = 0.0
    who = committer_role
    captured = space.distance(cbuf.points[0], rbuf.points[0]) <= tol
    clock = _time.perf_counter()
    try:
        while t < T - GRID_EPS and not (captured and stop_on_capture):
            n = len(cbuf)
            who = committer_role
            seg = committer.commit(History(space, cbuf.view(n), rbuf.view(n), t))
            if not (seg.duration > 0 and math.isfinite(seg.duration)):
                raise _Fault(committer_role, t, f"committed non-positive duration {seg.duration}")
            if t + seg.duration - GRID_EPS <= t:
                raise _Fault(committer_role, t, f"committed duration {seg.duration} is below the time resolution")
            first = seg.position(0.0)
            if space.distance(first, cbuf.points[-1]) > 1e-9:
                raise _Fault(committer_role, t, "segment does not start at the committer's position")
            s0 = t
            end = min(t + seg.duration, T)
            if T - end < GRID_EPS:
                end = T
            while t < end - GRID_EPS:
                nxt = t + dt
                if nxt > end - GRID_EPS:
                    nxt = end
                _append(cbuf, nxt, seg.position(nxt - s0), committer_role)
                n = len(rbuf)
                hist = History(space, rbuf.view(n), cbuf.view(n + 1), t)
                who = reactor_role
                _append(rbuf, nxt, reactor.next_position(hist, nxt - t), reactor_role)
                who = committer_role
                t = nxt
                if space.distance(cbuf.points[-1], rbuf.points[-1]) <= tol:
                    captured = True
                    if stop_on_capture:
                        break
            boundaries.append(t)
            if time_budget is not None and _time.perf_counter() - clock > time_budget:
                raise _Fault(committer_role, t, f"time budget of {time_budget}s exhausted at t={t}")
    except _Fault as f:
        fault = f.fault
    except (StrategyFault, PursuitLabError) as e:
        fault = Fault(who, t, str(e))
    # a fault may leave the committer one sample ahead of the reactor
    if len(cbuf) > len(rbuf):
        cbuf.times.pop()
        cbuf.points.pop()
    paths = {committer_role: cbuf.freeze(), reactor_role: rbuf.freeze()}
    sep = min_separation(paths["lion"], paths["man"], tol)
    return PlayRecord(paths["lion"], paths["man"], sep, "continuum", fault=fault,
                      boundaries=tuple(boundaries), elapsed=_time.perf_counter() - clock)


class _Fault(Exception):
    def __init__(self, role, t, message):
        super().__init__(message)
        self.fault = Fault(role, t, message)


def _append(buf, t, p, role):
    try:
        buf.append(t, p, role)
    except (SpeedViolation, DomainError) as e:
        raise _Fault(role, t, str(e)) from None


# -- race to a point ----------------------------------------------------------


@dataclass(frozen=True)
class RaceRecord:
    racer: TimedPath
    opponent: TimedPath
    racer_arrival: Optional[float]
    opponent_arrival: Optional[float]
    fault: Optional[Fault] = None

    @property
    def racer_first(self) -> bool:
        if self.racer_arrival is None:
            return False
        return self.opponent_arrival is None or self.racer_arrival < self.opponent_arrival


def arrival_time(path: TimedPath, target, tol: float = 1e-12) -> Optional[float]:
    space = path.space
    return next((t for t, p in zip(path.times, path.points) if space.distance(p, target) <= tol), None)


def race(racer: ReactiveStrategy, opponent: LocallyFiniteStrategy, space: Space, start, target,
         horizon: float, dt: float = 1e-3) -> RaceRecord:
    """Both players leave ``start`` for ``target``; the opponent commits, the racer reacts."""
    config = GameConfig(space, start, start, horizon, dt, 0.0, distinct_starts=False)
    rec = play(opponent, racer, "man", config, stop_on_capture=False)
    return RaceRecord(rec.lion, rec.man, arrival_time(rec.lion, target), arrival_time(rec.man, target), rec.fault)


# -- discrete alternating play -----------------------------------------------

OUTCOMES = ("rounds", "anytime")


def ply_score(space: Space, a, b, x, tol: float, outcome: str = "rounds") -> float:
    """Contribution of one ply (mover walks a -> b, opponent waits at x) to the outcome.

    A geodesic that comes within ``tol`` of the waiting player scores 0.  In
    ``"anytime"`` mode every point of the walk counts; in ``"rounds"`` mode
    only the crossing test applies and distances are read at round ends.
    """
    close = space.closest_approach(a, b, x)
    if close <= tol:
        return 0.0
    return close if outcome == "anytime" else math.inf


def play_discrete(lion: ReactiveStrategy, man: ReactiveStrategy, eps: float, order: str, config: GameConfig,
                  outcome: str = "rounds") -> PlayRecord:
    """Alternating-move game with ``n = horizon / eps`` rounds.

    Each ply lasts ``eps`` time units on the recorded timeline (so the
    record spans ``2 * horizon``); the mover walks the geodesic to the
    point its strategy returns while the other player waits.  Strategies see
    game time instead: a player's k-th move spans ``[k * eps, (k + 1) * eps]``,
    and the second mover of a round already sees the first mover's new point.

    ``outcome="rounds"`` scores the smallest distance seen at the start and
    at the end of every round, with any ply whose geodesic passes through
    the waiting player scoring 0.  ``outcome="anytime"`` scores the closest
    approach over the whole play.  The two differ by at most ``2 * eps``.
    """
    if order not in ("lion_first", "man_first"):
        raise UsageError(f"order must be 'lion_first' or 'man_first', got {order!r}")
    if outcome not in OUTCOMES:
        raise UsageError(f"outcome must be one of {OUTCOMES}, got {outcome!r}")
    n_float = config.horizon / eps
    n = round(n_float)
    if abs(n_float - n) > 1e-9 * max(1.0, n_float):
        raise UsageError(f"eps {eps} does not divide horizon {config.horizon}")
    space, tol = config.space, config.capture_tol
    bufs = {"lion": PathBuffer(space, config.lion_start), "man": PathBuffer(space, config.man_start)}
    # the same paths on the game clock, which is what strategies see
    game = {"lion": PathBuffer(space, config.lion_start), "man": PathBuffer(space, config.man_start)}
    strat = {"lion": lion, "man": man}
    movers = ("lion", "man") if order == "lion_first" else ("man", "lion")
    best = space.distance(config.lion_start, config.man_start)
    best_t = 0.0
    capture_t = 0.0 if best <= tol else None
    fault = None
    t = 0.0
    clock = _time.perf_counter()

    def note(value, when):
        nonlocal best, best_t, capture_t
        if value < best:
            best, best_t = value, when
        if capture_t is None and value <= tol:
            capture_t = when

    for k in range(n):
        for who in movers:
            other = "man" if who == "lion" else "lion"
            own, opp = bufs[who], bufs[other]
            try:
                view = History(space, game[who].view(), game[other].view(), k * eps)
                target = strat[who].next_position(view, eps)
                if not space.contains(target):
                    raise DomainError(f"{who} target {target!r} outside the space")
                if space.distance(own.points[-1], target) > eps * (1 + 1e-9) + 1e-12:
                    raise SpeedViolation(f"{who} move longer than eps at t={t}")
            except PursuitLabError as e:
                fault = Fault(who, t, str(e))
                break
            score = ply_score(space, own.points[-1], target, opp.points[-1], tol, outcome)
            t += eps
            own.append(t, target, who)
            opp.append(t, opp.points[-1], other)
            game[who].append((k + 1) * eps, target, who)
            note(score, t)
        if fault:
            break
        note(space.distance(bufs["lion"].points[-1], bufs["man"].points[-1]), t)
    sep = SeparationReport(best, best_t, capture_t is not None, capture_t)
    return PlayRecord(bufs["lion"].freeze(), bufs["man"].freeze(), sep, "discrete", eps, order, fault,
                      tuple(bufs["lion"].times), _time.perf_counter() - clock)
