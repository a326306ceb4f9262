import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pursuitlab.engine import GameConfig, play
from pursuitlab.errors import StrategyFault, UsageError
from pursuitlab.geometry import ClosedDisc, EuclideanBox, HalfPlaneWithTwoPoints, Interval, LinfBox, LinfSum
from pursuitlab.strategy import (
    STRATEGY_IDS,
    AsReactive,
    Besicovitch,
    Constant,
    EscapeThenBesicovitch,
    History,
    LinfBoxEscape,
    LinfSweep,
    Porter,
    PursuitLion,
    RaceA,
    RadiusLion,
    RunAway,
    ScriptedPath,
    besicovitch_radius_bound,
    build,
    circle_runner,
    race_arc_path,
)
from pursuitlab.trajectory import PathBuffer

DISC = ClosedDisc(1.0)
LBOX = LinfBox(1.0)
EBOX = EuclideanBox(1.0)
HALF = HalfPlaneWithTwoPoints()
SUM = LinfSum(ClosedDisc(1.0), Interval(0.0, 1.0))


def history(space, own, opp, t=0.0):
    return History(space, PathBuffer(space, own, t).view(), PathBuffer(space, opp, t).view(), t)


# -- besicovitch -------------------------------------------------------------


def test_besicovitch_first_dash():
    b = Besicovitch(c=0.5, tie_break=1)
    seg = b.commit(history(DISC, (0.3, 0.0), (0.1, 0.0)))
    assert seg.duration == 0.5
    end = seg.position(seg.duration)
    assert end == pytest.approx((0.3, 0.5))
    assert math.hypot(*end) == pytest.approx(0.58310, abs=1e-5)


def test_besicovitch_dashes_away_from_lion_side():
    b = Besicovitch(c=0.5)
    end = b.commit(history(DISC, (0.3, 0.0), (0.1, 0.2))).position(0.5)
    assert end[1] < 0


def test_besicovitch_at_origin_uses_tie_break():
    seg = Besicovitch(c=0.5, tie_break=-1).commit(history(DISC, (0.0, 0.0), (0.1, 0.0)))
    assert seg.position(0.5) == pytest.approx((0.0, -0.5))


def test_radius_bound_partial_sums():
    # frozen from sqrt(0.49 * sum(1/i^2, i <= 10**6)); the tail beyond is below 1e-6
    assert besicovitch_radius_bound(0.0, 0.7) == pytest.approx(0.8977846082195194, abs=1e-6)
    assert besicovitch_radius_bound(0.0, 0.7) < 1


def test_besicovitch_recursion_in_play():
    man = Besicovitch(c=0.5)
    rec = play(man, RadiusLion(), "man", GameConfig(DISC, (0.0, 0.0), (0.5, 0.0), 1.0, 1e-3))
    assert rec.fault is None
    steps = man.steps
    assert len(steps) > 2
    for (_, r0, t0), (_, r1, _) in zip(steps, steps[1:]):
        assert abs(r1 * r1 - (r0 * r0 + t0 * t0)) <= 1e-9
    bound = besicovitch_radius_bound(0.5, 0.5)
    assert max(math.hypot(*p) for p in rec.man.points) <= bound + 1e-6


# -- lions -------------------------------------------------------------------


def test_radius_lion_straight_pursuit_of_stationary_man():
    rec = play(Constant(), RadiusLion(), "man", GameConfig(DISC, (0.0, 0.0), (0.5, 0.0), 1.0, 1e-3))
    assert rec.capture_time == pytest.approx(0.5, abs=1e-3)


def test_pursuit_lion_stationary_man():
    rec = play(Constant(), PursuitLion(), "man", GameConfig(DISC, (0.0, 0.0), (0.5, 0.0), 1.0, 1e-3))
    assert rec.capture_time == pytest.approx(0.5, abs=1e-3)


def test_radius_lion_tracks_sine_against_boundary_runner():
    rec = play(circle_runner(), RadiusLion(), "man", GameConfig(DISC, (0.0, 0.0), (1.0, 0.0), 1.0, 1e-3),
               stop_on_capture=False)
    for t, p in zip(rec.lion.times[::100], rec.lion.points[::100]):
        assert math.hypot(*p) == pytest.approx(math.sin(t), abs=2e-3)


@pytest.mark.parametrize("tol, expected", [(1e-2, math.asin(0.99)), (1e-6, math.pi / 2)])
def test_radius_lion_capture_time_depends_on_tolerance(tol, expected):
    # the lion reaches radius 0.99 long before it closes the last hundredth
    rec = play(circle_runner(), RadiusLion(), "man", GameConfig(DISC, (0.0, 0.0), (1.0, 0.0), 3.0, 1e-3, tol))
    assert rec.captured
    assert rec.capture_time == pytest.approx(expected, abs=0.02)


def test_radius_lion_holds_when_man_at_origin():
    assert RadiusLion().next_position(history(DISC, (0.5, 0.0), (0.0, 0.0)), 0.1) == (0.5, 0.0)


def test_linf_sweep_lock_persists():
    man = ScriptedPath(lambda t: (1.0 - 0.3 * t, 0.8 + 0.2 * math.cos(3 * t)), 3.0)
    lion = LinfSweep()
    dt = 1e-3
    rec = play(man, lion, "man", GameConfig(LBOX, (-1.0, -1.0), (1.0, 1.0), 3.0, dt), stop_on_capture=False)
    assert rec.fault is None
    for k in range(2):
        locked_from = next(t for t, l, m in zip(rec.lion.times, rec.lion.points, rec.man.points)
                           if abs(l[k] - m[k]) <= 1e-12)
        for t, l, m in zip(rec.lion.times, rec.lion.points, rec.man.points):
            if t >= locked_from:
                assert abs(l[k] - m[k]) <= dt + 1e-12


# -- escape from underneath --------------------------------------------------


@pytest.mark.parametrize("y0, goal", [(0.3, (0.0, -1.0)), (-0.3, (0.0, 1.0))])
def test_box_escape_direction(y0, goal):
    seg = LinfBoxEscape().commit(history(LBOX, (1.0, 0.0), (0.2, y0)))
    assert seg.position(seg.duration) == pytest.approx(goal)
    assert seg.duration == pytest.approx(1.0)


def test_box_escape_against_mirroring_lion():
    man = LinfBoxEscape(probe=1e-3)
    lion = ScriptedPath(lambda t: (0.5, min(t, 1.0)), 1.0)
    rec = play(man, lion, "man", GameConfig(LBOX, (0.5, 0.0), (1.0, 0.0), 1.0, 1e-3))
    assert man.runs[0] == (0.0, -1.0)
    assert not rec.captured and rec.separation.min_distance > 0


def test_sum_escape_picks_branch():
    sweep = EscapeThenBesicovitch(probe=1e-3)
    # a lion that climbs toward the second target during the probe sends the man to the first
    lion = ScriptedPath(lambda t: ((min(t, 0.5), 0.0), 1.0), 1.0)
    play(sweep, lion, "man", GameConfig(SUM, ((0.0, 0.0), 1.0), ((0.0, 0.0), 0.0), 0.1, 1e-3))
    assert sweep.choice == 0
    other = EscapeThenBesicovitch(probe=1e-3)
    play(other, Constant(), "man", GameConfig(SUM, ((0.0, 0.0), 1.0), ((0.0, 0.0), 0.0), 0.1, 1e-3))
    assert other.choice == 1


# -- porter ------------------------------------------------------------------


def test_porter_waits_min_slack():
    seg = Porter("left").commit(history(EBOX, (-1.0, 0.0), (0.0, 0.0)))
    assert seg.duration == pytest.approx(math.sqrt(2) - 1, abs=1e-12)
    assert seg.position(seg.duration) == (-1.0, 0.0)


def test_porter_runs_toward_equal_corner():
    # student at equal distance 1 from the top corner as the porter
    por = Porter("left")
    seg = por.commit(history(EBOX, (-1.0, 0.0), (0.0, 1.0)))
    assert seg.duration == pytest.approx(0.5 * (math.sqrt(5) - 1), abs=1e-12)
    assert seg.position(seg.duration) == pytest.approx((-1.0, seg.duration))
    assert por.log[-1][3] == "run0"


def test_porter_fault_when_invariant_broken():
    with pytest.raises(StrategyFault, match="invariant"):
        Porter("left").commit(history(EBOX, (-1.0, 0.0), (-0.9, 0.9)))


# -- race --------------------------------------------------------------------


def test_race_against_standing_opponent():
    a = RaceA()
    p, s = a.position(1.0, 1.0)
    assert s == pytest.approx(1 / 3)
    assert math.atan2(p[1], p[0]) == pytest.approx(1 / 3)
    p0, s0 = a.position(0.0, 1.0)
    assert p0 == pytest.approx((1.0, 0.0)) and s0 == 1.0


@given(st.floats(0.02, 1.0), st.floats(0.0, 0.5), st.floats(0.3, 1.0))
@settings(max_examples=15)
def test_race_radius_below_opponent(bulge, wait, speed):
    from pursuitlab.engine import race

    rec = race(RaceA(), race_arc_path(bulge, wait, speed), HALF, (1.0, 0.0), (0.0, 0.0), 3.0, 1e-2)
    assert rec.fault is None and rec.racer_first
    for t, a, b in zip(rec.racer.times, rec.racer.points, rec.opponent.points):
        if 0 < t <= rec.racer_arrival:
            assert math.hypot(*a) < math.hypot(*b)


# -- no lookahead ------------------------------------------------------------


def _hold_after(f, t_split):
    return lambda t: f(min(t, t_split))


COMMITTERS = {
    "besicovitch": (DISC, lambda: Besicovitch(0.5), (0.5, 0.0), lambda t: (0.1 * math.cos(t), 0.1 * math.sin(t))),
    "porter": (EBOX, lambda: Porter("left"), (-1.0, 0.0), lambda t: (-0.4 * t, 0.3 * t)),
    "box_escape": (LBOX, lambda: LinfBoxEscape(0.01), (1.0, 1.0), lambda t: (-1 + 0.5 * t, -1 + 0.5 * t)),
    "sweep_commit": (LBOX, lambda: LinfSweep(0.05), (-1.0, -1.0), lambda t: (1 - 0.3 * t, 1.0)),
    "sum_escape": (SUM, lambda: EscapeThenBesicovitch(probe=0.01, min_duration=0.01), ((0.0, 0.0), 0.0),
                   lambda t: ((0.2 * t, 0.0), 1.0)),
    "constant": (DISC, lambda: Constant(0.1), (0.5, 0.0), lambda t: (-0.5 * t, 0.0)),
}

REACTORS = {
    "radius_lion": (DISC, RadiusLion, (0.0, 0.0), lambda t: (math.cos(t), math.sin(t))),
    "pursuit_lion": (DISC, PursuitLion, (0.0, 0.0), lambda t: (math.cos(t), math.sin(t))),
    "run_away": (DISC, RunAway, (0.5, 0.0), lambda t: (0.3 * t, 0.0)),
    "linf_sweep": (LBOX, LinfSweep, (-1.0, -1.0), lambda t: (1 - 0.3 * t, 1 - 0.2 * t)),
    "race_a": (HALF, RaceA, (1.0, 0.0), race_arc_path(0.5).where),
}


def _config(space, own, other, role):
    lion, man = (own, other) if role == "lion" else (other, own)
    return GameConfig(space, lion, man, 1.0, 1e-2, 0.0, distinct_starts=False)


@pytest.mark.parametrize("name", sorted(COMMITTERS))
@given(t_split=st.floats(0.05, 0.9))
@settings(max_examples=10)
def test_committer_no_lookahead(name, t_split):
    space, make, own, f = COMMITTERS[name]
    runs = []
    for g in (f, _hold_after(f, t_split)):
        opp = ScriptedPath(g, 1.0)
        rec = play(make(), opp, "man", _config(space, own, g(0.0), "man"), stop_on_capture=False)
        assert rec.fault is None
        runs.append(rec)
    a, b = runs
    # outputs agree up to the first commitment boundary at or after the split
    upto = min(t for t in a.boundaries if t >= t_split - 1e-12)
    for t, p, q in zip(a.man.times, a.man.points, b.man.points):
        if t <= upto + 1e-12:
            assert p == q


@pytest.mark.parametrize("name", sorted(REACTORS))
@given(t_split=st.floats(0.05, 0.9))
@settings(max_examples=10)
def test_reactor_no_lookahead(name, t_split):
    space, make, own, f = REACTORS[name]
    runs = []
    for g in (f, _hold_after(f, t_split)):
        opp = ScriptedPath(g, 1.0, window=0.1)
        rec = play(opp, make(), "man", _config(space, own, g(0.0), "lion"), stop_on_capture=False)
        assert rec.fault is None
        runs.append(rec)
    a, b = runs
    for t, p, q in zip(a.lion.times, a.lion.points, b.lion.points):
        if t <= t_split:
            assert p == q


def test_as_reactive_replays_commitments():
    inner = Besicovitch(0.5)
    r = AsReactive(inner)
    h = history(DISC, (0.3, 0.0), (0.1, 0.0))
    assert r.next_position(h, 0.25) == pytest.approx((0.3, 0.25))
    assert len(inner.steps) == 1


def test_registry_builds_every_id():
    spaces = {"linf_sweep": LBOX, "escape_underneath": LBOX, "porter": EBOX}
    for sid in STRATEGY_IDS:
        params = {"kind": "circle"} if sid == "scripted_path" else {}
        s = build(sid, params, space=spaces.get(sid, DISC))
        assert hasattr(s, "commit") or hasattr(s, "next_position")
    with pytest.raises(UsageError):
        build("nope")
