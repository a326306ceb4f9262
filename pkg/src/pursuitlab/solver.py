"""Exact value of the alternating eps-move game on a finite grid of positions.

Positions are graph points spaced ``h`` apart along every edge, or lattice
points of spacing ``h`` in a coordinate space.  A move is a hop to any
position within distance ``eps``, staying put included.  Backward induction
over rounds gives the value, the best achievable closest distance under
optimal play, together with tables of optimal moves that
:class:`TableStrategy` replays through :func:`~pursuitlab.engine.play_discrete`.

The recursion (lion first, ``k`` rounds left, positions ``l`` and ``m``)::

    W_0(l, m)     = inf
    W_k(l, m)     = min over l' of min(g(l -> l', m),
                        max over m' of min(g(m -> m', l'), d(l', m'), W_{k-1}(l', m')))
    value         = min(d(l0, m0), W_n(l0, m0))

where ``g`` is :func:`~pursuitlab.engine.ply_score`.  Man first swaps the
roles of the two inner operators.  Ties go to the smallest position id.

Cache file layout (little endian)::

    0   4s   magic b"PLAB"
    4   u16  format version (1)
    6   u8   order (0 lion first, 1 man first)
    7   u8   outcome (0 rounds, 1 anytime)
    8   u32  P, number of positions
    12  u32  n, number of rounds
    16  f64  eps
    24  f64  value
    32  i32  lion table, n * P * P entries, C order [k - 1, l, m]
    ..  i32  man table, same shape

Lion first, the man table is indexed by the lion's position *after* its
move; man first, the lion table is indexed by the man's position after his.
"""
from __future__ import annotations

import math
import struct
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .engine import OUTCOMES
from .errors import DomainError, ResourceError, UsageError
from .geometry import ClosedDisc, EuclideanBox, GraphPoint, Interval, LinfBox, LinfSum, MetricGraph, Space
from .strategy import ReactiveStrategy

STATE_BUDGET = 10_000_000
GRID_TOL = 1e-9
MAGIC = b"PLAB"
VERSION = 1
_HEADER = struct.Struct("<4sHBBIIdd")


# -- grids -------------------------------------------------------------------


def _steps(length: float, h: float, what: str) -> int:
    k = round(length / h)
    if k < 1 or abs(k * h - length) > GRID_TOL * max(1.0, length):
        raise UsageError(f"grid spacing {h} does not divide {what} of length {length}")
    return k


def _axis(lo: float, hi: float, h: float):
    first = math.ceil(lo / h - GRID_TOL)
    last = math.floor(hi / h + GRID_TOL)
    return [j * h for j in range(first, last + 1)]


def grid_positions(space: Space, h: float) -> list:
    """All grid positions of spacing ``h`` in ``space``, in id order."""
    if not h > 0:
        raise UsageError("grid spacing must be positive")
    if isinstance(space, MetricGraph):
        out = [space.node_point(node) for node in space.nodes if space.incident[space.index[node]]]
        for e, (_, _, w) in enumerate(space.edges):
            k = _steps(w, h, f"edge {e}")
            out.extend(GraphPoint(e, w * j / k) for j in range(1, k))
        return out
    if isinstance(space, Interval):
        k = _steps(space.hi - space.lo, h, "the interval")
        return [space.lo + (space.hi - space.lo) * j / k for j in range(k + 1)]
    if isinstance(space, (LinfBox, EuclideanBox, ClosedDisc)):
        lo_x, lo_y, hi_x, hi_y = space.bounds()
        return [(x, y) for x in _axis(lo_x, hi_x, h) for y in _axis(lo_y, hi_y, h) if space.contains((x, y))]
    if isinstance(space, LinfSum):
        firsts = grid_positions(space.first, h)
        seconds = grid_positions(space.second, h)
        return [(a, b) for a in firsts for b in seconds]
    raise UsageError(f"no grid available for {space.describe()}")


def _snap(space, positions, p, what):
    best, arg = math.inf, None
    for i, q in enumerate(positions):
        d = space.distance(p, q)
        if d < best:
            best, arg = d, i
    if best > GRID_TOL:
        raise DomainError(f"{what} {p!r} is not a grid position (nearest is {best} away)")
    return arg


def _neighbours(D: np.ndarray, reach: float):
    """Sorted neighbour ids per row, padded by repeating the first entry."""
    rows = [np.flatnonzero(D[i] <= reach * (1 + GRID_TOL)) for i in range(len(D))]
    width = max(len(r) for r in rows)
    out = np.empty((len(D), width), dtype=np.int64)
    for i, r in enumerate(rows):
        out[i, : len(r)] = r
        out[i, len(r):] = r[0]
    return out


@dataclass
class DiscreteGameSpec:
    """A finite eps-move game: grid, move relation, rounds, order and starts.

    ``lion_eps``/``man_eps`` override the move length of one side only; they
    exist for the move-set monotonicity diagnostics.
    """

    space: Space
    positions: list
    eps: float
    rounds: int
    order: str
    lion_start: int
    man_start: int
    tol: float
    outcome: str = "rounds"
    lion_eps: Optional[float] = None
    man_eps: Optional[float] = None
    dist: np.ndarray = field(init=False, repr=False)
    lion_moves: np.ndarray = field(init=False, repr=False)
    man_moves: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.order not in ("lion_first", "man_first"):
            raise UsageError(f"order must be 'lion_first' or 'man_first', got {self.order!r}")
        if self.outcome not in OUTCOMES:
            raise UsageError(f"outcome must be one of {OUTCOMES}")
        if self.rounds < 0:
            raise UsageError("rounds must be non-negative")
        P = len(self.positions)
        D = np.empty((P, P))
        for i, p in enumerate(self.positions):
            for j in range(i, P):
                D[i, j] = D[j, i] = self.space.distance(p, self.positions[j])
        self.dist = D
        self.lion_moves = _neighbours(D, self.lion_eps or self.eps)
        self.man_moves = _neighbours(D, self.man_eps or self.eps)
        self.index = {self._key(p): i for i, p in enumerate(self.positions)}

    @staticmethod
    def _key(p):
        return p

    @property
    def horizon(self) -> float:
        return self.rounds * self.eps

    @property
    def states(self) -> int:
        return len(self.positions) ** 2 * max(self.rounds, 1)

    def id_of(self, p) -> int:
        i = self.index.get(self._key(p))
        if i is None:
            return _snap(self.space, self.positions, p, "position")
        return i


def make_spec(space: Space, lion_start, man_start, eps: float, horizon: float, order: str = "lion_first",
              h: Optional[float] = None, tol: Optional[float] = None, outcome: str = "rounds",
              lion_eps: Optional[float] = None, man_eps: Optional[float] = None) -> DiscreteGameSpec:
    """Build the grid game for ``space``.

    ``h`` defaults to ``eps`` on graphs and ``eps / 2`` on coordinate spaces;
    it must divide ``eps``.  ``tol`` is the crossing tolerance: 0 on graphs,
    1e-3 on coordinate spaces by default.
    """
    if not eps > 0:
        raise UsageError("eps must be positive")
    graph = isinstance(space, MetricGraph)
    if h is None:
        h = eps if graph else eps / 2
    _steps(eps, h, "eps")
    n = round(horizon / eps)
    if abs(n * eps - horizon) > GRID_TOL * max(1.0, horizon):
        raise UsageError(f"eps {eps} does not divide horizon {horizon}")
    if tol is None:
        tol = 0.0 if graph else 1e-3
    positions = grid_positions(space, h)
    li = _snap(space, positions, space.check(lion_start, "lion start"), "lion start")
    mi = _snap(space, positions, space.check(man_start, "man start"), "man start")
    return DiscreteGameSpec(space, positions, eps, n, order, li, mi, tol, outcome, lion_eps, man_eps)


# -- backward induction ------------------------------------------------------


@dataclass
class ValueResult:
    value: float
    lion_table: np.ndarray
    man_table: np.ndarray
    states: int
    elapsed: float
    spec: DiscreteGameSpec = field(repr=False)

    @property
    def elapsed_ms(self) -> float:
        return self.elapsed * 1e3


def _ply_tensor(spec: DiscreteGameSpec, moves: np.ndarray) -> np.ndarray:
    """``G[a, j, x]``: score of walking from ``a`` to ``moves[a, j]`` while the other waits at ``x``."""
    space, pos, tol = spec.space, spec.positions, spec.tol
    P, K = moves.shape
    arr = getattr(space, "closest_approach_array", None)
    # vectorised only when just the crossing test matters: scalar and array
    # arithmetic may differ in the last ulp, which "anytime" values would expose
    if arr is not None and spec.outcome == "rounds":
        A = np.array([space.coords(p) for p in pos], dtype=float)
        if isinstance(space, Interval):
            A = A[:, 0]
        close = arr(*np.broadcast_arrays(A[:, None, None], A[moves][:, :, None], A[None, None, :]))
    else:
        close = np.empty((P, K, P))
        for a in range(P):
            for j in range(K):
                b = moves[a, j]
                if j and b == moves[a, 0]:
                    close[a, j] = close[a, 0]
                    continue
                for x in range(P):
                    close[a, j, x] = space.closest_approach(pos[a], pos[b], pos[x])
    # the same rule as ply_score, applied elementwise
    if spec.outcome == "anytime":
        return np.where(close <= tol, 0.0, close)
    return np.where(close <= tol, 0.0, np.inf)


def solve(spec: DiscreteGameSpec, budget: int = STATE_BUDGET) -> ValueResult:
    """Backward induction over ``spec.rounds`` rounds."""
    P, n = len(spec.positions), spec.rounds
    if P * P * max(n, 1) > budget:
        raise ResourceError(
            f"{P} positions x {n} rounds = {P * P * max(n, 1)} states exceeds the budget of {budget}; "
            "use a coarser grid or fewer rounds"
        )
    clock = time.perf_counter()
    D = spec.dist
    NL, NM = spec.lion_moves, spec.man_moves
    lion_table = np.zeros((n, P, P), dtype=np.int32)
    man_table = np.zeros((n, P, P), dtype=np.int32)
    W = np.full((P, P), np.inf)
    if n:
        GL = _ply_tensor(spec, NL)  # [l, i, m]
        GM = _ply_tensor(spec, NM)  # [m, j, l]
        rows = np.arange(P)
    for k in range(1, n + 1):
        if spec.order == "lion_first":
            # man replies from m to m' = NM[m, j] with the lion already at l'
            reply = np.minimum(D[:, NM], W[:, NM])  # [l', m, j]
            reply = np.minimum(reply, GM.transpose(2, 0, 1))
            jm = reply.argmax(axis=2)
            M = np.take_along_axis(reply, jm[..., None], axis=2)[..., 0]  # [l', m]
            opts = np.minimum(GL, M[NL])  # [l, i, m]
            il = opts.argmin(axis=1)
            W = np.take_along_axis(opts, il[:, None, :], axis=1)[:, 0, :]
            lion_table[k - 1] = NL[rows[:, None], il]
            man_table[k - 1] = NM[rows[None, :], jm]
        else:
            # lion replies from l to l' = NL[l, i] with the man already at m'
            reply = np.minimum(D[NL], W[NL])  # [l, i, m']
            reply = np.minimum(reply, GL)
            il = reply.argmin(axis=1)
            L = np.take_along_axis(reply, il[:, None, :], axis=1)[:, 0, :]  # [l, m']
            opts = np.minimum(GM.transpose(2, 0, 1), L[:, NM])  # [l, m, j]
            jm = opts.argmax(axis=2)
            W = np.take_along_axis(opts, jm[..., None], axis=2)[..., 0]
            lion_table[k - 1] = NL[rows[:, None], il]
            man_table[k - 1] = NM[rows[None, :], jm]
    l0, m0 = spec.lion_start, spec.man_start
    value = float(min(D[l0, m0], W[l0, m0]))
    return ValueResult(value, lion_table, man_table, P * P * max(n, 1), time.perf_counter() - clock, spec)


# -- replay ------------------------------------------------------------------


class TableStrategy(ReactiveStrategy):
    """Play the recorded optimal moves of a solved game."""

    def __init__(self, result: ValueResult, role: str):
        if role not in ("lion", "man"):
            raise UsageError(f"role must be 'lion' or 'man', got {role!r}")
        self.result = result
        self.role = role
        self.name = f"table_{role}"
        self.moves = 0

    def next_position(self, history, dt):
        spec = self.result.spec
        k = spec.rounds - self.moves
        if k < 1:
            raise UsageError("table strategy asked to move after the last round")
        self.moves += 1
        own = spec.id_of(history.own.last)
        opp = spec.id_of(history.opponent.last)
        if self.role == "lion":
            nxt = self.result.lion_table[k - 1, own, opp]
        else:
            nxt = self.result.man_table[k - 1, opp, own]
        return spec.positions[int(nxt)]


def replay(result: ValueResult):
    """Play both tables against each other; the outcome equals ``result.value``."""
    from .engine import GameConfig, play_discrete

    spec = result.spec
    if spec.rounds == 0:
        raise UsageError("nothing to replay with zero rounds")
    cfg = GameConfig(spec.space, spec.positions[spec.lion_start], spec.positions[spec.man_start],
                     spec.horizon, spec.eps, spec.tol)
    return play_discrete(TableStrategy(result, "lion"), TableStrategy(result, "man"), spec.eps, spec.order, cfg,
                         spec.outcome)


# -- sweeps ------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    eps: float
    delta: float
    states: int
    elapsed_ms: float


def delta_sweep(build, eps_list: Sequence[float], budget: int = STATE_BUDGET) -> list:
    """Solve ``build(eps)`` for each eps and tabulate the values."""
    rows = []
    for eps in eps_list:
        res = solve(build(eps), budget)
        rows.append(SweepRow(float(eps), res.value, res.states, res.elapsed_ms))
    return rows


# -- cache -------------------------------------------------------------------


def save_tables(result: ValueResult, path) -> None:
    spec = result.spec
    P, n = len(spec.positions), spec.rounds
    header = _HEADER.pack(MAGIC, VERSION, 0 if spec.order == "lion_first" else 1,
                          OUTCOMES.index(spec.outcome), P, n, spec.eps, result.value)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(result.lion_table.astype("<i4").tobytes())
        fh.write(result.man_table.astype("<i4").tobytes())


def load_tables(path, spec: DiscreteGameSpec) -> ValueResult:
    """Read a cache written by :func:`save_tables` and check it matches ``spec``."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER.size:
        raise UsageError(f"{path}: truncated header")
    magic, version, order, outcome, P, n, eps, value = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise UsageError(f"{path}: not a table cache")
    if version != VERSION:
        raise UsageError(f"{path}: unsupported cache version {version}")
    expect = (0 if spec.order == "lion_first" else 1, OUTCOMES.index(spec.outcome), len(spec.positions), spec.rounds)
    if (order, outcome, P, n) != expect or eps != spec.eps:
        raise UsageError(f"{path}: cache does not match this game")
    size = n * P * P
    body = np.frombuffer(blob, dtype="<i4", offset=_HEADER.size)
    if body.size != 2 * size:
        raise UsageError(f"{path}: expected {2 * size} table entries, found {body.size}")
    lion = body[:size].reshape(n, P, P).astype(np.int32)
    man = body[size:].reshape(n, P, P).astype(np.int32)
    return ValueResult(value, lion, man, P * P * max(n, 1), 0.0, spec)
