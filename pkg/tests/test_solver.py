import math
from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pursuitlab.errors import ResourceError, UsageError
from pursuitlab.geometry import ClosedDisc, LinfBox, cycle_graph, path_graph
from pursuitlab.solver import (
    delta_sweep,
    grid_positions,
    load_tables,
    make_spec,
    replay,
    save_tables,
    solve,
)

INTERVAL = path_graph(2.0, 2)
CIRCLE = cycle_graph(4.0, 4)


def oracle(spec):
    """Plain recursive minimax over grid ids, written without the solver's tensors."""
    pos, space, tol, eps = spec.positions, spec.space, spec.tol, spec.eps
    P = len(pos)
    d = [[space.distance(pos[i], pos[j]) for j in range(P)] for i in range(P)]
    moves = [[j for j in range(P) if d[i][j] <= eps + 1e-9] for i in range(P)]

    def ply(a, b, x):
        c = space.closest_approach(pos[a], pos[b], pos[x])
        if c <= tol:
            return 0.0
        return c if spec.outcome == "anytime" else math.inf

    @lru_cache(maxsize=None)
    def W(k, l, m):
        if k == 0:
            return math.inf
        if spec.order == "lion_first":
            return min(min(ply(l, l2, m), max(min(ply(m, m2, l2), d[l2][m2], W(k - 1, l2, m2))
                                              for m2 in moves[m]))
                       for l2 in moves[l])
        return max(min(ply(m, m2, l), min(min(ply(l, l2, m2), d[l2][m2], W(k - 1, l2, m2))
                                          for l2 in moves[l]))
                   for m2 in moves[m])

    return min(d[spec.lion_start][spec.man_start], W(spec.rounds, spec.lion_start, spec.man_start))


def interval(eps, order="lion_first", outcome="rounds", **kw):
    return make_spec(INTERVAL, INTERVAL.node_point(0), INTERVAL.node_point(1), eps, 4.0, order,
                     outcome=outcome, **kw)


def circle(eps, order="lion_first", outcome="rounds", **kw):
    return make_spec(CIRCLE, CIRCLE.node_point(0), CIRCLE.node_point(2), eps, 4.0, order,
                     outcome=outcome, **kw)


def test_circle_value():
    assert solve(circle(0.5)).value == 2.0


def test_interval_value():
    assert solve(interval(0.25)).value == 0.0


def test_zero_rounds_is_initial_distance():
    spec = make_spec(CIRCLE, CIRCLE.node_point(0), CIRCLE.node_point(1), 0.5, 0.0)
    assert spec.rounds == 0 and solve(spec).value == 1.0


@pytest.mark.parametrize("order", ["lion_first", "man_first"])
@pytest.mark.parametrize("outcome", ["rounds", "anytime"])
@pytest.mark.parametrize("build", [interval, circle])
def test_matches_oracle(build, order, outcome):
    for eps in (0.5, 1.0):
        spec = build(eps, order, outcome)
        assert solve(spec).value == oracle(spec)


def test_anytime_differs_by_at_most_two_eps():
    for eps in (0.5, 0.25, 0.125):
        assert solve(circle(eps, outcome="anytime")).value == pytest.approx(2 - eps)
        assert solve(circle(eps)).value == 2.0


@pytest.mark.parametrize("build", [interval, circle])
@pytest.mark.parametrize("outcome", ["rounds", "anytime"])
def test_order_changes_value_by_at_most_eps(build, outcome):
    for eps in (0.5, 0.25, 0.125):
        a = solve(build(eps, "lion_first", outcome)).value
        b = solve(build(eps, "man_first", outcome)).value
        assert abs(a - b) <= eps + 1e-12


@pytest.mark.parametrize("build", [interval, circle])
@pytest.mark.parametrize("order", ["lion_first", "man_first"])
@pytest.mark.parametrize("outcome", ["rounds", "anytime"])
def test_replay_is_bit_equal(build, order, outcome):
    for eps in (0.5, 0.25, 0.125):
        res = solve(build(eps, order, outcome))
        rec = replay(res)
        assert rec.fault is None
        assert rec.separation.min_distance == res.value


def test_replay_on_lattice():
    spec = make_spec(LinfBox(1.0), (-1.0, -1.0), (1.0, 1.0), 1.0, 4.0)
    res = solve(spec)
    assert res.value <= 2 * 1.0
    assert replay(res).separation.min_distance == res.value


@given(st.sampled_from([0.5, 1.0]), st.sampled_from(["lion_first", "man_first"]))
@settings(max_examples=8)
def test_move_set_monotonicity(eps, order):
    base = solve(circle(eps, order, "anytime", h=0.5)).value
    man_more = solve(circle(eps, order, "anytime", h=0.5, man_eps=eps + 0.5)).value
    lion_more = solve(circle(eps, order, "anytime", h=0.5, lion_eps=eps + 0.5)).value
    assert man_more >= base >= lion_more


@given(st.integers(0, 8), st.integers(0, 8), st.sampled_from(["lion_first", "man_first"]))
@settings(max_examples=20)
def test_value_at_most_initial_distance(a, b, order):
    G = path_graph(2.0, 8)
    pa, pb = G.node_point(a), G.node_point(b)
    if a == b:
        return
    spec = make_spec(G, pa, pb, 0.25, 1.0, order)
    assert solve(spec).value <= G.distance(pa, pb)


def test_budget():
    with pytest.raises(ResourceError, match="coarser"):
        solve(make_spec(ClosedDisc(1.0), (0.0, 0.0), (0.5, 0.0), 0.1, 1.0), budget=1000)


def test_grid_must_divide_eps():
    with pytest.raises(UsageError):
        make_spec(INTERVAL, INTERVAL.node_point(0), INTERVAL.node_point(1), 0.3, 0.9)
    with pytest.raises(UsageError):
        make_spec(INTERVAL, INTERVAL.node_point(0), INTERVAL.node_point(1), 0.25, 0.9)


def test_grid_positions_cover_graph():
    pts = grid_positions(INTERVAL, 0.25)
    assert len(pts) == 9


def test_sweep_rows():
    rows = delta_sweep(lambda e: circle(e), [0.5, 0.25])
    assert [r.delta for r in rows] == [2.0, 2.0]
    assert rows[1].states > rows[0].states


def test_table_cache_round_trip(tmp_path):
    res = solve(circle(0.5))
    path = tmp_path / "c.plab"
    save_tables(res, path)
    back = load_tables(path, circle(0.5))
    assert back.value == res.value
    np.testing.assert_array_equal(back.lion_table, res.lion_table)
    np.testing.assert_array_equal(back.man_table, res.man_table)
    assert path.read_bytes()[:4] == b"PLAB"
    with pytest.raises(UsageError, match="match"):
        load_tables(path, circle(0.25))
    path.write_bytes(b"XXXX" + path.read_bytes()[4:])
    with pytest.raises(UsageError, match="cache"):
        load_tables(path, circle(0.5))


@given(st.integers(0, 10_000), st.sampled_from(["lion_first", "man_first"]), st.sampled_from(["rounds", "anytime"]),
       st.integers(1, 4))
@settings(max_examples=25)
def test_random_graphs_match_oracle(seed, order, outcome, rounds):
    import random

    from pursuitlab.geometry import MetricGraph

    rng = random.Random(seed)
    n = rng.randint(3, 6)
    edges = [(i, rng.randrange(i), 1.0) for i in range(1, n)]
    edges += [(a, b, 1.0) for a, b in {(rng.randrange(n), rng.randrange(n)) for _ in range(2)} if a != b]
    G = MetricGraph(tuple(range(n)), tuple(edges))
    a, b = rng.sample(range(n), 2)
    spec = make_spec(G, G.node_point(a), G.node_point(b), 1.0, float(rounds), order, h=0.5, outcome=outcome)
    res = solve(spec)
    assert res.value == oracle(spec)
    assert replay(res).separation.min_distance == res.value
