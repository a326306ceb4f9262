"""Scenario files: JSON descriptions of a space, two players and what to run.

Numbers are written as decimal strings (``"0.001"``, ``"1e-6"``).  A file
looks like::

    {
      "name": "besicovitch_vs_radius",
      "description": "Perpendicular dashes against the radius lion",
      "tags": ["disc", "besicovitch"],
      "space": {"kind": "closed_disc", "radius": "1"},
      "mode": "continuum",
      "T": "50", "dt": "0.001", "tol": "1e-6",
      "lion": {"strategy": "radius_lion", "start": ["0", "0"]},
      "man": {"strategy": "besicovitch", "params": {"c": "0.5"}, "start": ["0.5", "0"]},
      "expect": {"captured": false}
    }

Space kinds: ``closed_disc`` (radius), ``linf_box`` and ``euclidean_box``
(halfwidth), ``interval`` (lo, hi), ``half_plane_two_points``, ``linf_sum``
(first, second) and ``graph`` (``family`` one of path, cycle,
parallel_paths, spoke with its parameters, or explicit ``nodes`` and
``edges``).

Points are ``["x", "y"]`` in the plane, ``"x"`` on an interval,
``[first, second]`` in a sum, and ``{"node": id}`` or
``{"edge": "k", "offset": "x"}`` on a graph.

Modes and their keys:

``continuum``   T, dt, tol, optional ``committer`` ("lion" or "man")
``discrete``    T, eps, order, optional outcome and tol
``solve``       T, eps, order, optional h, tol, outcome
``sweep``       T, eps_list, order, optional h, tol, outcome
``fixedpoint``  man only; optional resolution, refinements, dt
``race``        players ``a`` (reacts) and ``b`` (commits) from one start, plus
                ``target``, T and dt

``expect`` holds checks used by batteries: captured, capture_time_min,
capture_time_max, min_sep_min, min_sep_max, delta, delta_max, deltas_all,
delta_le_eps_times, replay_equal, residual_max, a_first, a_ahead.

Every validation problem raises :class:`~pursuitlab.errors.ScenarioError`
carrying the line of the offending value.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from functools import partial
from pathlib import Path
from typing import Optional

from .errors import PursuitLabError, ScenarioError
from .geometry import (
    ClosedDisc,
    EuclideanBox,
    GraphPoint,
    HalfPlaneWithTwoPoints,
    Interval,
    LinfBox,
    LinfSum,
    MetricGraph,
    cycle_graph,
    parallel_paths_graph,
    path_graph,
    spoke_graph,
)
from .strategy import STRATEGY_IDS, as_reactive, build

MODES = ("continuum", "discrete", "solve", "sweep", "fixedpoint", "race")
EXPECT_KEYS = {
    "captured": bool,
    "capture_time_min": float,
    "capture_time_max": float,
    "min_sep_min": float,
    "min_sep_max": float,
    "delta": float,
    "delta_max": float,
    "deltas_all": float,
    "delta_le_eps_times": float,
    "replay_equal": bool,
    "residual_max": float,
    "a_first": bool,
    "a_ahead": bool,
}


# -- locating values in the source text --------------------------------------


def _skip_ws(text, i):
    while i < len(text) and text[i] in " \t\r\n":
        i += 1
    return i


def _skip_string(text, i):
    i += 1
    while text[i] != '"':
        i += 2 if text[i] == "\\" else 1
    return i + 1


def _skip_value(text, i):
    i = _skip_ws(text, i)
    if text[i] == '"':
        return _skip_string(text, i)
    if text[i] in "{[":
        depth = 0
        while True:
            c = text[i]
            if c == '"':
                i = _skip_string(text, i)
                continue
            if c in "{[":
                depth += 1
            elif c in "}]":
                depth -= 1
                if depth == 0:
                    return i + 1
            i += 1
    while i < len(text) and text[i] not in ",}] \t\r\n":
        i += 1
    return i


def line_of(text: str, path) -> Optional[int]:
    """1-based line where the value at ``path`` (keys and list indices) starts."""
    if not text:
        return None
    try:
        i = _skip_ws(text, 0)
        for step in path:
            if text[i] == "{":
                i = _skip_ws(text, i + 1)
                while text[i] != "}":
                    end = _skip_string(text, i)
                    key = json.loads(text[i:end])
                    i = _skip_ws(text, end) + 1  # past ':'
                    if key == step:
                        i = _skip_ws(text, i)
                        break
                    i = _skip_ws(text, _skip_value(text, i))
                    if text[i] == ",":
                        i = _skip_ws(text, i + 1)
                else:
                    return text.count("\n", 0, i) + 1
            elif text[i] == "[":
                i = _skip_ws(text, i + 1)
                for _ in range(int(step)):
                    i = _skip_ws(text, _skip_value(text, i))
                    if text[i] == ",":
                        i = _skip_ws(text, i + 1)
            else:
                break
        return text.count("\n", 0, i) + 1
    except (IndexError, ValueError):
        return None


# -- typed reading ------------------------------------------------------------


class _Reader:
    def __init__(self, data, text):
        self.data = data
        self.text = text

    def fail(self, path, message):
        where = ".".join(str(p) for p in path) or "<root>"
        raise ScenarioError(f"{where}: {message}", line_of(self.text, path))

    def get(self, path, default=KeyError):
        node = self.data
        for p in path:
            try:
                node = node[p]
            except (KeyError, IndexError, TypeError):
                if default is KeyError:
                    self.fail(path[:-1] if len(path) > 1 else path, f"missing required field {p!r}")
                return default
        return node

    def number(self, path, default=KeyError, positive=False):
        raw = self.get(path, default)
        if raw is default and default is not KeyError:
            return default
        if isinstance(raw, bool) or not isinstance(raw, str):
            self.fail(path, f"numbers must be decimal strings, got {json.dumps(raw)}")
        try:
            value = float(Decimal(raw.strip()))
        except (InvalidOperation, ValueError):
            self.fail(path, f"malformed number {raw!r}")
        if not math.isfinite(value):
            self.fail(path, f"number must be finite, got {raw!r}")
        if positive and not value > 0:
            self.fail(path, f"must be positive, got {raw!r}")
        return value

    def integer(self, path, default=KeyError):
        v = self.number(path, default)
        if v is default:
            return v
        if v != int(v):
            self.fail(path, f"expected an integer, got {self.get(path)!r}")
        return int(v)

    def choice(self, path, options, default=KeyError):
        v = self.get(path, default)
        if v not in options:
            self.fail(path, f"expected one of {list(options)}, got {v!r}")
        return v


def _space(r: _Reader, path):
    spec = r.get(path)
    if not isinstance(spec, dict):
        r.fail(path, "space must be an object")
    kind = r.choice(path + ("kind",), ("closed_disc", "linf_box", "euclidean_box", "interval",
                                       "half_plane_two_points", "linf_sum", "graph"))
    try:
        if kind == "closed_disc":
            return ClosedDisc(r.number(path + ("radius",), 1.0, positive=True))
        if kind == "linf_box":
            return LinfBox(r.number(path + ("halfwidth",), 1.0, positive=True))
        if kind == "euclidean_box":
            return EuclideanBox(r.number(path + ("halfwidth",), 1.0, positive=True))
        if kind == "interval":
            return Interval(r.number(path + ("lo",), 0.0), r.number(path + ("hi",), 1.0))
        if kind == "half_plane_two_points":
            return HalfPlaneWithTwoPoints()
        if kind == "linf_sum":
            return LinfSum(_space(r, path + ("first",)), _space(r, path + ("second",)))
        return _graph(r, path)
    except ScenarioError:
        raise
    except PursuitLabError as e:
        r.fail(path, str(e))


def _graph(r, path):
    family = r.get(path + ("family",), None)
    if family is None:
        nodes = r.get(path + ("nodes",))
        edges = r.get(path + ("edges",))
        if not isinstance(nodes, list) or not isinstance(edges, list):
            r.fail(path, "explicit graphs need 'nodes' and 'edges' lists")
        parsed = []
        for k, e in enumerate(edges):
            if not isinstance(e, list) or len(e) != 3:
                r.fail(path + ("edges", k), "edges are [from, to, length]")
            parsed.append((e[0], e[1], r.number(path + ("edges", k, 2), positive=True)))
        return MetricGraph(tuple(nodes), tuple(parsed))
    family = r.choice(path + ("family",), ("path", "cycle", "parallel_paths", "spoke"))
    if family == "path":
        return path_graph(r.number(path + ("length",), positive=True), r.integer(path + ("pieces",), 1))
    if family == "cycle":
        return cycle_graph(r.number(path + ("circumference",), positive=True), r.integer(path + ("pieces",), 4))
    if family == "parallel_paths":
        return parallel_paths_graph(r.integer(path + ("n",)))
    angles = lambda key: [r.number(path + (key, i)) for i in range(len(r.get(path + (key,), [])))]
    return spoke_graph(angles("a_angles"), angles("b_angles"), r.number(path + ("spoke_length",), 1.0, positive=True))


def _point(r: _Reader, space, path):
    raw = r.get(path)
    if isinstance(space, MetricGraph):
        if not isinstance(raw, dict):
            r.fail(path, "graph points are {\"node\": id} or {\"edge\": \"k\", \"offset\": \"x\"}")
        if "node" in raw:
            match = [n for n in space.nodes if n == raw["node"] or str(n) == str(raw["node"])]
            if not match:
                r.fail(path + ("node",), f"unknown node {raw['node']!r}")
            return space.node_point(match[0])
        p = GraphPoint(r.integer(path + ("edge",)), r.number(path + ("offset",)))
    elif isinstance(space, Interval):
        p = r.number(path)
    elif isinstance(space, LinfSum):
        if not isinstance(raw, list) or len(raw) != 2:
            r.fail(path, "points of a sum are [first, second]")
        p = (_point(r, space.first, path + (0,)), _point(r, space.second, path + (1,)))
    else:
        if not isinstance(raw, list) or len(raw) != 2:
            r.fail(path, "planar points are [\"x\", \"y\"]")
        p = (r.number(path + (0,)), r.number(path + (1,)))
    if not space.contains(p):
        r.fail(path, f"point {p!r} is not in {space.describe()}: {space._why_not(p)}")
    return p


def _params(r: _Reader, space, path, strategy_id):
    """Strategy parameters with numbers converted; strings that are not numbers stay strings."""
    raw = r.get(path, {})
    if not isinstance(raw, dict):
        r.fail(path, "params must be an object")
    out = {}
    for key, value in raw.items():
        p = path + (key,)
        if key == "waypoints":
            if not isinstance(value, list) or not value:
                r.fail(p, "waypoints are a non-empty list of [t, point]")
            out[key] = [(r.number(p + (i, 0)), _point(r, space, p + (i, 1))) for i in range(len(value))]
        elif key == "targets":
            out[key] = [[r.number(p + (i, j)) for j in range(2)] for i in range(len(value))]
        elif key in ("side", "kind"):
            out[key] = value
        else:
            out[key] = r.number(p)
    return out


@dataclass(frozen=True)
class PlayerSpec:
    strategy: str
    params: dict
    start: object


def _player(r, space, role, need_start=True):
    path = (role,)
    node = r.get(path)
    if not isinstance(node, dict):
        r.fail(path, "player must be an object")
    sid = r.get(path + ("strategy",))
    if sid not in STRATEGY_IDS:
        r.fail(path + ("strategy",), f"unknown strategy id {sid!r}; known: {', '.join(STRATEGY_IDS)}")
    params = _params(r, space, path + ("params",), sid)
    start = _point(r, space, path + ("start",)) if need_start or "start" in node else None
    return PlayerSpec(sid, params, start)


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    tags: tuple
    mode: str
    space: object
    lion: Optional[PlayerSpec]
    man: PlayerSpec
    T: Optional[float]
    dt: float
    tol: Optional[float]
    eps: Optional[float]
    eps_list: tuple
    order: str
    outcome: str
    h: Optional[float]
    committer: Optional[str]
    seed: int
    extra: dict
    expect: dict
    data: dict = field(repr=False, compare=False)
    text: str = field(default="", repr=False, compare=False)
    source: Optional[str] = field(default=None, compare=False)

    def to_json(self) -> str:
        return json.dumps(self.data, indent=2) + "\n"


def _divides(r, path, step, T, what):
    n = T / step
    if abs(n - round(n)) > 1e-9 * max(1.0, n):
        r.fail(path, f"{what} {step} does not divide T = {T}")


def parse(text: str, source: Optional[str] = None) -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"invalid JSON: {e.msg}", e.lineno) from None
    if not isinstance(data, dict):
        raise ScenarioError("a scenario file holds one JSON object", 1)
    r = _Reader(data, text)
    name = r.get(("name",))
    if not isinstance(name, str) or not name:
        r.fail(("name",), "name must be a non-empty string")
    tags = r.get(("tags",), [])
    if not isinstance(tags, list) or not all(isinstance(t, str) for t in tags):
        r.fail(("tags",), "tags must be a list of strings")
    mode = r.choice(("mode",), MODES)
    space = _space(r, ("space",))
    dt = r.number(("dt",), 1e-3, positive=True)
    seed = r.integer(("seed",), 0)
    extra = {}
    lion = None
    T = eps = None
    eps_list = ()
    if mode == "fixedpoint":
        if not isinstance(space, ClosedDisc):
            r.fail(("space",), "fixed-point search runs on a closed disc")
        man = _player(r, space, "man", need_start=False)
        extra["resolution"] = r.number(("resolution",), 0.1, positive=True)
        extra["refinements"] = r.integer(("refinements",), 3)
    elif mode == "race":
        lion = _player(r, space, "a")
        man = _player(r, space, "b")
        if space.distance(lion.start, man.start) != 0:
            r.fail(("b", "start"), "racers share a start point")
        extra["target"] = _point(r, space, ("target",))
        T = r.number(("T",), positive=True)
        _divides(r, ("dt",), dt, T, "dt")
    else:
        lion = _player(r, space, "lion")
        man = _player(r, space, "man")
        if space.distance(lion.start, man.start) == 0:
            r.fail(("man", "start"), "start points must be distinct")
        T = r.number(("T",), positive=True)
    tol = r.number(("tol",), None)
    if tol is not None and tol < 0:
        r.fail(("tol",), "tolerance must be non-negative")
    order = r.choice(("order",), ("lion_first", "man_first"), "lion_first")
    outcome = r.choice(("outcome",), ("rounds", "anytime"), "rounds")
    h = r.number(("h",), None, positive=True)
    committer = None
    if mode == "continuum":
        _divides(r, ("dt",), dt, T, "dt")
        committer = r.choice(("committer",), ("lion", "man", None), None)
    elif mode in ("discrete", "solve"):
        eps = r.number(("eps",), positive=True)
        _divides(r, ("eps",), eps, T, "eps")
    elif mode == "sweep":
        raw = r.get(("eps_list",))
        if not isinstance(raw, list) or not raw:
            r.fail(("eps_list",), "eps_list must be a non-empty list")
        eps_list = tuple(r.number(("eps_list", i), positive=True) for i in range(len(raw)))
        for i, e in enumerate(eps_list):
            _divides(r, ("eps_list", i), e, T, "eps")
    expect = {}
    raw_expect = r.get(("expect",), {})
    if not isinstance(raw_expect, dict):
        r.fail(("expect",), "expect must be an object")
    for key, value in raw_expect.items():
        if key not in EXPECT_KEYS:
            r.fail(("expect", key), f"unknown expectation {key!r}")
        if EXPECT_KEYS[key] is bool:
            if not isinstance(value, bool):
                r.fail(("expect", key), "expected true or false")
            expect[key] = value
        else:
            expect[key] = r.number(("expect", key))
    return Scenario(name, r.get(("description",), ""), tuple(tags), mode, space, lion, man, T, dt, tol, eps,
                    eps_list, order, outcome, h, committer, seed, extra, expect, data, text, source)


def load(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioError(f"cannot read {path}: {e.strerror}") from None
    return parse(text, str(path))


SHIPPED = Path(__file__).parent / "scenarios"


def shipped(tag: Optional[str] = None) -> list:
    out = [load(p) for p in sorted(SHIPPED.glob("*.json"))]
    if tag is not None:
        out = [s for s in out if tag in s.tags]
    return out


# -- execution ---------------------------------------------------------------


@dataclass
class RunResult:
    scenario: Scenario
    measured: dict
    record: object = None
    value: object = None
    sweep: list = field(default_factory=list)
    report: object = None
    fault: Optional[str] = None

    def summary(self) -> str:
        parts = [self.scenario.name]
        for k, v in self.measured.items():
            if isinstance(v, bool):
                v = str(v).lower()
            elif isinstance(v, float):
                v = f"{v:.9g}"
            elif isinstance(v, (list, tuple)):
                v = ",".join(f"{x:.9g}" if isinstance(x, float) else str(x) for x in v)
            parts.append(f"{k}={v}")
        if self.fault:
            parts.append(f"fault={self.fault!r}")
        return " ".join(parts)


def _strategy(spec: PlayerSpec, sc: Scenario, dt, seed):
    params = dict(spec.params)
    if spec.strategy == "scripted_path" and params.get("kind") == "random":
        params.setdefault("seed", seed)
    return build(spec.strategy, params, space=sc.space, dt=dt, horizon=sc.T or math.inf, start=spec.start)


def _record_measures(rec):
    m = {
        "captured": rec.captured,
        "min_sep": rec.separation.min_distance,
        "capture_time": rec.capture_time if rec.capture_time is not None else "none",
        "arg_time": rec.separation.arg_time,
    }
    return m


def execute(sc: Scenario, dt: Optional[float] = None, tol: Optional[float] = None, seed: Optional[int] = None,
            jobs: int = 1) -> RunResult:
    """Run a validated scenario; overrides replace the file's dt, tol and seed."""
    from .analysis import fixed_point_search
    from .engine import GameConfig, play, play_discrete
    from .solver import delta_sweep, make_spec, replay, solve

    dt = sc.dt if dt is None else dt
    seed = sc.seed if seed is None else seed
    tol = sc.tol if tol is None else tol
    graph = isinstance(sc.space, MetricGraph)
    if sc.mode == "fixedpoint":
        make_man = partial(build, sc.man.strategy, sc.man.params, space=sc.space, dt=dt)
        start = sc.man.start if sc.man.start is not None else (0.5, 0.0)
        rep = fixed_point_search(make_man, sc.extra["resolution"], sc.extra["refinements"], start, dt,
                                 sc.space.radius, jobs)
        return RunResult(sc, {"z": list(rep.z), "residual": rep.residual, "evaluations": rep.evaluations},
                         report=rep)
    if sc.mode == "race":
        return _execute_race(sc, dt, seed)
    if sc.mode == "continuum":
        cfg = GameConfig(sc.space, sc.lion.start, sc.man.start, sc.T, dt, 1e-6 if tol is None else tol)
        lion = _strategy(sc.lion, sc, dt, seed)
        man = _strategy(sc.man, sc, dt, seed)
        committer = sc.committer
        if committer is None:
            committer = "man" if hasattr(man, "commit") and hasattr(lion, "next_position") else "lion"
        if committer == "man":
            rec = play(man, as_reactive(lion), "man", cfg)
        else:
            rec = play(lion, as_reactive(man), "lion", cfg)
        fault = f"{rec.fault.role} at t={rec.fault.time:.6g}: {rec.fault.message}" if rec.fault else None
        return RunResult(sc, _record_measures(rec), record=rec, fault=fault)
    crossing_tol = tol if tol is not None else (0.0 if graph else dt)
    if sc.mode == "discrete":
        cfg = GameConfig(sc.space, sc.lion.start, sc.man.start, sc.T, sc.eps, crossing_tol)
        lion = as_reactive(_strategy(sc.lion, sc, sc.eps, seed))
        man = as_reactive(_strategy(sc.man, sc, sc.eps, seed))
        rec = play_discrete(lion, man, sc.eps, sc.order, cfg, sc.outcome)
        fault = f"{rec.fault.role} at t={rec.fault.time:.6g}: {rec.fault.message}" if rec.fault else None
        return RunResult(sc, _record_measures(rec), record=rec, fault=fault)
    build_spec = lambda e: make_spec(sc.space, sc.lion.start, sc.man.start, e, sc.T, sc.order, sc.h, tol, sc.outcome)
    if sc.mode == "solve":
        res = solve(make_spec(sc.space, sc.lion.start, sc.man.start, sc.eps, sc.T, sc.order, sc.h, tol, sc.outcome))
        measured = {"delta": res.value, "states": res.states, "elapsed_ms": res.elapsed_ms}
        rec = None
        if res.spec.rounds:
            rec = replay(res)
            measured["replay_delta"] = rec.separation.min_distance
            measured["replay_equal"] = rec.separation.min_distance == res.value
        return RunResult(sc, measured, record=rec, value=res)
    rows = delta_sweep(build_spec, sc.eps_list)
    measured = {"eps": [r.eps for r in rows], "deltas": [r.delta for r in rows], "states": sum(r.states for r in rows)}
    return RunResult(sc, measured, sweep=rows)


def _execute_race(sc, dt, seed):
    from .engine import race

    target = sc.extra["target"]
    rec = race(_strategy(sc.lion, sc, dt, seed), _strategy(sc.man, sc, dt, seed), sc.space, sc.lion.start,
               target, sc.T, dt)
    d = sc.space.distance
    stop = rec.racer_arrival if rec.racer_arrival is not None else sc.T
    ahead = all(d(a, target) < d(b, target) for t, a, b in zip(rec.racer.times, rec.racer.points, rec.opponent.points)
                if 0 < t <= stop)
    none = lambda v: "none" if v is None else v
    measured = {"a_arrival": none(rec.racer_arrival), "b_arrival": none(rec.opponent_arrival),
                "a_first": rec.racer_first, "a_ahead": ahead}
    fault = f"{rec.fault.role} at t={rec.fault.time:.6g}: {rec.fault.message}" if rec.fault else None
    return RunResult(sc, measured, fault=fault)


def check_expectations(sc: Scenario, result: RunResult) -> list:
    """Human-readable list of failed expectations (empty when all hold)."""
    m = result.measured
    bad = []
    for key, want in sc.expect.items():
        if key == "captured" and m.get("captured") != want:
            bad.append(f"captured={m.get('captured')} expected {want}")
        elif key in ("capture_time_min", "capture_time_max"):
            ct = m.get("capture_time")
            if not isinstance(ct, float):
                bad.append(f"no capture, expected {key}={want}")
            elif (key.endswith("min") and ct < want) or (key.endswith("max") and ct > want):
                bad.append(f"capture_time={ct:.6g} violates {key}={want}")
        elif key == "min_sep_min" and not m.get("min_sep", -1) >= want:
            bad.append(f"min_sep={m.get('min_sep')} below {want}")
        elif key == "min_sep_max" and not m.get("min_sep", math.inf) <= want:
            bad.append(f"min_sep={m.get('min_sep')} above {want}")
        elif key == "delta" and m.get("delta") != want:
            bad.append(f"delta={m.get('delta')} expected {want}")
        elif key == "delta_max" and not m.get("delta", math.inf) <= want:
            bad.append(f"delta={m.get('delta')} above {want}")
        elif key == "deltas_all" and any(d != want for d in m.get("deltas", [None])):
            bad.append(f"deltas={m.get('deltas')} expected all {want}")
        elif key == "delta_le_eps_times":
            for e, d in zip(m.get("eps", []), m.get("deltas", [])):
                if d > want * e + 1e-12:
                    bad.append(f"delta({e})={d} above {want}*eps")
        elif key == "replay_equal" and m.get("replay_equal") != want:
            bad.append(f"replay_equal={m.get('replay_equal')}")
        elif key in ("a_first", "a_ahead") and m.get(key) != want:
            bad.append(f"{key}={m.get(key)} expected {want}")
        elif key == "residual_max" and not m.get("residual", math.inf) < want:
            bad.append(f"residual={m.get('residual')} not below {want}")
    return bad
