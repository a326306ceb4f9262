import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import disc_points
from pursuitlab.errors import DomainError, RangeError, SpeedViolation, UsageError
from pursuitlab.geometry import ClosedDisc, HalfPlaneWithTwoPoints, path_graph
from pursuitlab.trajectory import (
    PathBuffer,
    evaluate,
    make_path,
    min_separation,
    refined_grid,
)

DISC = ClosedDisc(1.0)


def test_unit_speed_path_is_valid():
    p = make_path(DISC, [(0, (0.0, 0.0)), (1, (1.0, 0.0))])
    assert p.horizon == 1.0


def test_speed_violation_names_interval():
    with pytest.raises(SpeedViolation) as e:
        make_path(DISC, [(0, (0.0, 0.0)), (0.5, (0.25, 0.0)), (1, (1.0, 0.0))])
    assert (e.value.t0, e.value.t1) == (0.5, 1.0)


def test_excluded_boundary_point():
    with pytest.raises(DomainError):
        make_path(HalfPlaneWithTwoPoints(), [(0, (0.5, 0.0))])


@pytest.mark.parametrize("samples", [[], [(0.1, (0.0, 0.0))], [(0, (0.0, 0.0)), (0, (0.0, 0.0))]])
def test_malformed_samples(samples):
    with pytest.raises(UsageError):
        make_path(DISC, samples)


def test_evaluate_interpolates():
    p = make_path(DISC, [(0, (0.0, 0.0)), (1, (1.0, 0.0))])
    assert evaluate(p, 0.25) == pytest.approx((0.25, 0.0))
    assert evaluate(p, 1.0) == (1.0, 0.0)
    with pytest.raises(RangeError):
        evaluate(p, 1.5)


def test_graph_path_crosses_node():
    G = path_graph(2.0, 2)
    p = make_path(G, [(0, G.point(0, 0.5)), (1, G.point(1, 0.5))])
    q = p.at(0.75)
    # 0.5 to node 1, then 0.25 along edge 1
    assert q.edge == 1 and q.offset == pytest.approx(0.25)


def test_constant_paths():
    a = make_path(DISC, [(0, (0.0, 0.0)), (1, (0.0, 0.0))])
    b = make_path(DISC, [(0, (1.0, 0.0)), (1, (1.0, 0.0))])
    rep = min_separation(a, b, 1e-6)
    assert rep.min_distance == 1.0 and not rep.captured and rep.capture_time is None


def test_straight_chase_capture_time():
    a = make_path(DISC, [(0, (0.0, 0.0)), (0.5, (0.5, 0.0)), (1, (0.5, 0.0))])
    b = make_path(DISC, [(0, (0.5, 0.0)), (1, (0.5, 0.0))])
    rep = min_separation(a, b, 1e-6)
    assert rep.captured and rep.capture_time == pytest.approx(0.5, abs=1e-3)


def test_mismatched_horizons():
    a = make_path(DISC, [(0, (0.0, 0.0)), (1, (0.0, 0.0))])
    b = make_path(DISC, [(0, (0.0, 0.0)), (2, (0.0, 0.0))])
    with pytest.raises(UsageError):
        min_separation(a, b, 0.0)


@st.composite
def lipschitz_paths(draw):
    pts = [(0.0, draw(disc_points()))]
    for _ in range(draw(st.integers(1, 6))):
        q = draw(disc_points())
        d = DISC.distance(pts[-1][1], q)
        pts.append((pts[-1][0] + d / draw(st.floats(0.2, 1.0)) + 1e-3, q))
    return make_path(DISC, pts)


@given(lipschitz_paths(), st.floats(0.01, 0.3))
def test_resampling_keeps_path_valid(path, step):
    fine = path.resample(step)
    assert fine.horizon == path.horizon
    assert max(b - a for a, b in zip(fine.times, fine.times[1:])) <= step + 1e-12


@given(lipschitz_paths(), lipschitz_paths())
def test_min_separation_symmetric(a, b):
    T = min(a.horizon, b.horizon)
    a = make_path(DISC, [(t, a.at(t)) for t in refined_grid([0.0, T], 0.05)])
    b = make_path(DISC, [(t, b.at(t)) for t in refined_grid([0.0, T], 0.05)])
    ab, ba = min_separation(a, b, 0.1), min_separation(b, a, 0.1)
    assert ab.min_distance == ba.min_distance
    assert ab.captured == ba.captured == (ab.min_distance <= 0.1)


@given(lipschitz_paths(), st.data())
def test_interpolation_is_lipschitz(path, data):
    grid = refined_grid(path.times, 0.01)
    s = data.draw(st.sampled_from(grid))
    t = data.draw(st.sampled_from(grid))
    assert DISC.distance(path.at(s), path.at(t)) <= abs(s - t) + 2 * 0.01


def test_buffer_rejects_fast_step():
    buf = PathBuffer(DISC, (0.0, 0.0))
    buf.append(0.1, (0.1, 0.0))
    with pytest.raises(SpeedViolation):
        buf.append(0.2, (0.3, 0.0))
    with pytest.raises(DomainError):
        buf.append(0.3, (2.0, 0.0))


def test_view_is_a_frozen_prefix():
    buf = PathBuffer(DISC, (0.0, 0.0))
    buf.append(0.5, (0.5, 0.0))
    v = buf.view()
    buf.append(1.0, (0.5, 0.5))
    assert v.now == 0.5 and v.last == (0.5, 0.0)
    with pytest.raises(RangeError):
        v.at(0.75)
    assert v.truncated(0.25).last == pytest.approx((0.25, 0.0))
    assert math.isclose(v.extended(0.6, (0.5, 0.1)).at(0.55)[1], 0.05)
