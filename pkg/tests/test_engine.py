import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pursuitlab.engine import GameConfig, ply_score, play, play_discrete, race
from pursuitlab.errors import UsageError
from pursuitlab.geometry import ClosedDisc, HalfPlaneWithTwoPoints, path_graph
from pursuitlab.strategy import (
    Besicovitch,
    Constant,
    PursuitLion,
    RaceA,
    RadiusLion,
    ScriptedPath,
    Segment,
    circle_runner,
    race_arc_path,
)

DISC = ClosedDisc(1.0)


def cfg(**kw):
    base = dict(space=DISC, lion_start=(0.0, 0.0), man_start=(0.5, 0.0), horizon=2.0, dt=1e-3)
    base.update(kw)
    return GameConfig(**base)


@pytest.mark.parametrize("kw", [dict(horizon=0.0), dict(dt=-1.0), dict(horizon=1.0005),
                                dict(man_start=(0.0, 0.0)), dict(man_start=(2.0, 0.0))])
def test_config_validation(kw):
    with pytest.raises(Exception):
        cfg(**kw)


def test_two_reactive_players_are_refused():
    with pytest.raises(UsageError, match="locally finite"):
        play(RadiusLion(), PursuitLion(), "lion", cfg())


def test_play_is_deterministic():
    a = play(Besicovitch(0.5), RadiusLion(), "man", cfg())
    b = play(Besicovitch(0.5), RadiusLion(), "man", cfg())
    assert a.lion == b.lion and a.man == b.man and a.separation == b.separation


def test_committer_path_is_its_segments():
    man = Besicovitch(0.5)
    rec = play(man, RadiusLion(), "man", cfg(), stop_on_capture=False)
    ends = {round(t, 9) for t in rec.boundaries}
    for (t0, r0, dur) in man.steps:
        assert round(t0, 9) in ends
        i = rec.man.times.index(min(rec.man.times, key=lambda t: abs(t - t0)))
        assert math.hypot(*rec.man.points[i]) == pytest.approx(r0, abs=1e-12)


class _Zero:
    name = "zero"

    def commit(self, history):
        return Segment.stay(history.own.last, 0.0)


class _Tiny:
    name = "tiny"

    def commit(self, history):
        return Segment.stay(history.own.last, 1e-15)


class _Teleport:
    name = "teleport"

    def next_position(self, history, dt):
        return (0.9, 0.0)


@pytest.mark.parametrize("committer, reactor, role, match", [
    (_Zero(), RadiusLion(), "man", "non-positive"),
    (_Tiny(), RadiusLion(), "man", "time resolution"),
    (Constant(), _Teleport(), "man", "moved"),
])
def test_faults_are_recorded(committer, reactor, role, match):
    rec = play(committer, reactor, role, cfg())
    assert rec.fault is not None and match in rec.fault.message
    assert rec.fault.role in ("lion", "man")
    assert len(rec.lion) == len(rec.man)


@given(st.floats(1e-4, 0.05), st.floats(1e-4, 0.05))
@settings(max_examples=20)
def test_capture_monotone_in_tolerance(a, b):
    lo, hi = sorted((a, b))
    r_lo = play(circle_runner(), PursuitLion(), "man", cfg(man_start=(1.0, 0.0), horizon=3.0, capture_tol=lo))
    r_hi = play(circle_runner(), PursuitLion(), "man", cfg(man_start=(1.0, 0.0), horizon=3.0, capture_tol=hi))
    if r_lo.captured:
        assert r_hi.captured and r_hi.capture_time <= r_lo.capture_time


def test_separation_recomputable():
    from pursuitlab.trajectory import min_separation

    rec = play(circle_runner(), RadiusLion(), "man", cfg(man_start=(1.0, 0.0), capture_tol=1e-2))
    assert min_separation(rec.lion, rec.man, 1e-2) == rec.separation
    assert rec.lion.horizon == rec.man.horizon


# -- discrete ---------------------------------------------------------------


def test_ply_score_crossing():
    G = path_graph(2.0, 2)
    a, b, x = G.point(0, 0.0), G.point(1, 1.0), G.point(0, 1.0)
    assert ply_score(G, a, b, x, 0.0) == 0.0
    assert ply_score(G, a, G.point(0, 0.5), x, 0.0, "rounds") == math.inf
    assert ply_score(G, a, G.point(0, 0.5), x, 0.0, "anytime") == 0.5


def test_discrete_rejects_bad_eps():
    G = path_graph(2.0, 2)
    with pytest.raises(UsageError):
        play_discrete(Constant(), Constant(), 0.3, "lion_first",
                      GameConfig(G, G.node_point(0), G.node_point(1), 1.0, 0.3 / 3, 0.0))


class _Walk:
    """Walk toward a fixed point at full ply length."""

    def __init__(self, goal):
        self.goal = goal

    def next_position(self, history, dt):
        return history.space.geodesic_step(history.own.last, self.goal, dt)


def test_discrete_chase_on_interval():
    G = path_graph(2.0, 2)
    config = GameConfig(G, G.node_point(0), G.node_point(1), 4.0, 0.25, 0.0)
    rec = play_discrete(_Walk(G.node_point(2)), Constant(), 0.25, "lion_first", config)
    # the fourth lion ply, the seventh ply overall, ends on the man
    assert rec.captured and rec.capture_time == pytest.approx(7 * 0.25)
    assert rec.lion.horizon == 2 * 4.0


def test_discrete_move_too_long_faults():
    config = GameConfig(DISC, (0.0, 0.0), (0.5, 0.0), 1.0, 0.1, 0.0)
    rec = play_discrete(_Walk((0.0, 0.9)), ScriptedPath(lambda t: (0.5, 0.0)), 0.1, "man_first", config)
    assert rec.fault is None
    bad = play_discrete(_Teleport(), Constant(), 0.1, "lion_first", config)
    assert bad.fault is not None and bad.fault.role == "lion"


def test_discrete_strategies_see_game_time():
    seen = []

    class Spy:
        def next_position(self, history, dt):
            seen.append(history.now)
            return history.own.last

    config = GameConfig(DISC, (0.0, 0.0), (0.5, 0.0), 1.0, 0.25, 0.0)
    play_discrete(Spy(), Constant(), 0.25, "lion_first", config)
    assert seen == [0.0, 0.25, 0.5, 0.75]


# -- race -------------------------------------------------------------------


def test_race_record():
    rec = race(RaceA(), race_arc_path(0.5), HalfPlaneWithTwoPoints(), (1.0, 0.0), (0.0, 0.0), 2.0, 1e-3)
    assert rec.racer_first
    assert rec.opponent_arrival == pytest.approx(math.pi / 2, abs=2e-3)
    assert rec.racer_arrival < rec.opponent_arrival
