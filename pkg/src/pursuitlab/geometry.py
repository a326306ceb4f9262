"""Metric spaces the games are played in.

Coordinate spaces use plain tuples for points: ``(x, y)`` in the plane,
a bare float for an :class:`Interval`, and ``(first, second)`` pairs for an
:class:`LinfSum`.  Points of a :class:`MetricGraph` are
:class:`GraphPoint` values, an edge index plus an offset measured from the
edge's first endpoint.

Every space is an immutable value with ``distance``, ``contains``,
``geodesic_step`` and ``closest_approach``.  The module-level functions of
the same name check membership first and are what callers outside the hot
simulation loops should use.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .errors import DomainError, UnreachableError

TOL = 1e-9
# slack on closed boundaries so that points produced by our own arithmetic
# (clipping, interpolation) are not rejected over the last ulp
BOUNDARY_SLACK = 1e-12


def _norm2(p):
    return math.hypot(p[0], p[1])


class Space:
    """Base class; subclasses are frozen dataclasses."""

    kind = "space"
    dim = 2

    def distance(self, p, q) -> float:
        raise NotImplementedError

    def contains(self, p) -> bool:
        raise NotImplementedError

    def geodesic_step(self, p, q, budget: float):
        raise NotImplementedError

    def closest_approach(self, a, b, x) -> float:
        """Smallest distance from ``x`` to the geodesic walked from ``a`` to ``b``."""
        raise NotImplementedError

    def check(self, p, what="point"):
        if not self.contains(p):
            raise DomainError(f"{what} {p!r} is not in {self.describe()}: {self._why_not(p)}")
        return p

    def _why_not(self, p) -> str:
        return "outside the space"

    def describe(self) -> str:
        return self.kind

    def coords(self, p) -> tuple:
        """Flat coordinate tuple, used for CSV and plotting."""
        return tuple(p)


# -- Euclidean plane pieces --------------------------------------------------


class _Planar(Space):
    def _as_pair(self, p):
        try:
            x, y = p
            return float(x), float(y)
        except (TypeError, ValueError):
            raise DomainError(f"expected an (x, y) coordinate pair, got {p!r}") from None

    def distance(self, p, q):
        return math.hypot(p[0] - q[0], p[1] - q[1])

    def geodesic_step(self, p, q, budget):
        d = self.distance(p, q)
        if budget >= d:
            return (float(q[0]), float(q[1]))
        s = budget / d
        out = (p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1]))
        return out

    def closest_approach(self, a, b, x):
        vx, vy = b[0] - a[0], b[1] - a[1]
        vv = vx * vx + vy * vy
        if vv == 0.0:
            return self.distance(a, x)
        s = ((x[0] - a[0]) * vx + (x[1] - a[1]) * vy) / vv
        s = min(1.0, max(0.0, s))
        return math.hypot(a[0] + s * vx - x[0], a[1] + s * vy - x[1])

    def closest_approach_array(self, A, B, X):
        A, B, X = (np.asarray(v, dtype=float) for v in (A, B, X))
        V = B - A
        vv = np.einsum("...i,...i->...", V, V)
        num = np.einsum("...i,...i->...", X - A, V)
        with np.errstate(invalid="ignore", divide="ignore"):
            s = np.where(vv > 0, num / np.where(vv > 0, vv, 1.0), 0.0)
        s = np.clip(s, 0.0, 1.0)
        P = A + s[..., None] * V - X
        return np.hypot(P[..., 0], P[..., 1])

    def distance_array(self, P, Q):
        D = np.asarray(P, float) - np.asarray(Q, float)
        return np.hypot(D[..., 0], D[..., 1])


@dataclass(frozen=True)
class ClosedDisc(_Planar):
    radius: float = 1.0
    kind = "closed_disc"

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError("disc radius must be positive")

    def contains(self, p):
        try:
            x, y = self._as_pair(p)
        except DomainError:
            return False
        return math.hypot(x, y) <= self.radius + BOUNDARY_SLACK

    def _why_not(self, p):
        return f"norm exceeds radius {self.radius}"

    def describe(self):
        return f"ClosedDisc({self.radius})"

    def bounds(self):
        r = self.radius
        return (-r, -r, r, r)


@dataclass(frozen=True)
class EuclideanBox(_Planar):
    """The square ``[-h, h]^2`` with the Euclidean metric."""

    halfwidth: float = 1.0
    kind = "euclidean_box"

    def contains(self, p):
        try:
            x, y = self._as_pair(p)
        except DomainError:
            return False
        h = self.halfwidth + BOUNDARY_SLACK
        return abs(x) <= h and abs(y) <= h

    def _why_not(self, p):
        return f"a coordinate exceeds halfwidth {self.halfwidth}"

    def describe(self):
        return f"EuclideanBox({self.halfwidth})"

    def bounds(self):
        h = self.halfwidth
        return (-h, -h, h, h)


@dataclass(frozen=True)
class HalfPlaneWithTwoPoints(_Planar):
    """Open upper half plane together with the two points (0, 0) and (1, 0)."""

    kind = "half_plane_two_points"
    extra: tuple = ((0.0, 0.0), (1.0, 0.0))

    def contains(self, p):
        try:
            x, y = self._as_pair(p)
        except DomainError:
            return False
        if y > 0.0:
            return True
        return (x, y) in self.extra

    def _why_not(self, p):
        return "y must be > 0 unless the point is (0, 0) or (1, 0)"

    def geodesic_step(self, p, q, budget):
        out = super().geodesic_step(p, q, budget)
        if not self.contains(out):
            raise UnreachableError(
                f"straight route from {p} to {q} leaves the open half plane"
            )
        return out

    def describe(self):
        return "OpenUpperHalfPlaneWithTwoPoints"

    def bounds(self):
        return (-1.0, 0.0, 1.5, 1.5)


OpenUpperHalfPlaneWithTwoPoints = HalfPlaneWithTwoPoints


# -- l-infinity spaces -------------------------------------------------------


@dataclass(frozen=True)
class Interval(Space):
    lo: float = 0.0
    hi: float = 1.0
    kind = "interval"
    dim = 1

    def __post_init__(self):
        if not self.hi > self.lo:
            raise DomainError("interval needs lo < hi")

    def contains(self, p):
        if isinstance(p, (tuple, list, np.ndarray)):
            return False
        try:
            v = float(p)
        except (TypeError, ValueError):
            return False
        return self.lo - BOUNDARY_SLACK <= v <= self.hi + BOUNDARY_SLACK

    def _why_not(self, p):
        return f"coordinate outside [{self.lo}, {self.hi}]"

    def distance(self, p, q):
        return abs(p - q)

    def geodesic_step(self, p, q, budget):
        if abs(q - p) <= budget:
            return float(q)
        return p + math.copysign(budget, q - p)

    def closest_approach(self, a, b, x):
        if min(a, b) <= x <= max(a, b):
            return 0.0
        return min(abs(a - x), abs(b - x))

    def closest_approach_array(self, A, B, X):
        A, B, X = (np.asarray(v, dtype=float) for v in (A, B, X))
        inside = (np.minimum(A, B) <= X) & (X <= np.maximum(A, B))
        return np.where(inside, 0.0, np.minimum(np.abs(A - X), np.abs(B - X)))

    def distance_array(self, P, Q):
        return np.abs(np.asarray(P, float) - np.asarray(Q, float))

    def coords(self, p):
        return (float(p),)

    def describe(self):
        return f"Interval({self.lo}, {self.hi})"

    def bounds(self):
        return (self.lo, 0.0, self.hi, 0.0)


@dataclass(frozen=True)
class LinfBox(Space):
    """The square ``[-h, h]^2`` with the max metric."""

    halfwidth: float = 1.0
    kind = "linf_box"

    def contains(self, p):
        try:
            x, y = p
            x, y = float(x), float(y)
        except (TypeError, ValueError):
            return False
        h = self.halfwidth + BOUNDARY_SLACK
        return abs(x) <= h and abs(y) <= h

    def _why_not(self, p):
        return f"a coordinate exceeds halfwidth {self.halfwidth}"

    def distance(self, p, q):
        return max(abs(p[0] - q[0]), abs(p[1] - q[1]))

    def geodesic_step(self, p, q, budget):
        # the coordinate straight line is always a geodesic of the max norm
        d = self.distance(p, q)
        if budget >= d:
            return (float(q[0]), float(q[1]))
        s = budget / d
        return (p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1]))

    def factors(self):
        h = self.halfwidth
        return (Interval(-h, h), Interval(-h, h))

    def split(self, p):
        return (p[0], p[1])

    def join(self, parts):
        return (float(parts[0]), float(parts[1]))

    def closest_approach(self, a, b, x):
        return float(self.closest_approach_array([a], [b], [x])[0])

    def closest_approach_array(self, A, B, X):
        A, B, X = (np.asarray(v, dtype=float) for v in (A, B, X))
        C = A - X
        V = B - A
        cands = [np.zeros(C.shape[:-1]), np.ones(C.shape[:-1])]
        with np.errstate(invalid="ignore", divide="ignore"):
            dim = C.shape[-1]
            for i in range(dim):
                cands.append(-C[..., i] / V[..., i])
                for j in range(i + 1, dim):
                    cands.append(-(C[..., i] - C[..., j]) / (V[..., i] - V[..., j]))
                    cands.append(-(C[..., i] + C[..., j]) / (V[..., i] + V[..., j]))
        S = np.stack(cands, axis=-1)
        S = np.where(np.isfinite(S), S, 0.0)
        S = np.clip(S, 0.0, 1.0)
        vals = np.abs(C[..., None, :] + S[..., :, None] * V[..., None, :]).max(axis=-1)
        return vals.min(axis=-1)

    def distance_array(self, P, Q):
        return np.abs(np.asarray(P, float) - np.asarray(Q, float)).max(axis=-1)

    def describe(self):
        return f"LinfBox({self.halfwidth})"

    def bounds(self):
        h = self.halfwidth
        return (-h, -h, h, h)


@dataclass(frozen=True)
class LinfSum(Space):
    """Product of two spaces with ``d = max(d_first, d_second)``."""

    first: Space
    second: Space
    kind = "linf_sum"

    def contains(self, p):
        try:
            a, b = p
        except (TypeError, ValueError):
            return False
        return self.first.contains(a) and self.second.contains(b)

    def _why_not(self, p):
        try:
            a, b = p
        except (TypeError, ValueError):
            return "expected a (first, second) pair"
        if not self.first.contains(a):
            return f"first coordinate {a!r}: {self.first._why_not(a)}"
        return f"second coordinate {b!r}: {self.second._why_not(b)}"

    def distance(self, p, q):
        return max(self.first.distance(p[0], q[0]), self.second.distance(p[1], q[1]))

    def geodesic_step(self, p, q, budget):
        da = self.first.distance(p[0], q[0])
        db = self.second.distance(p[1], q[1])
        d = max(da, db)
        if budget >= d:
            return (q[0], q[1])
        s = budget / d
        return (
            self.first.geodesic_step(p[0], q[0], s * da),
            self.second.geodesic_step(p[1], q[1], s * db),
        )

    def factors(self):
        return (self.first, self.second)

    def split(self, p):
        return (p[0], p[1])

    def join(self, parts):
        return (parts[0], parts[1])

    def _along(self, a, b, s):
        da = self.first.distance(a[0], b[0])
        db = self.second.distance(a[1], b[1])
        return (
            self.first.geodesic_step(a[0], b[0], s * da),
            self.second.geodesic_step(a[1], b[1], s * db),
        )

    def closest_approach(self, a, b, x):
        # distance to x is convex along the proportional straight route
        f = lambda s: self.distance(self._along(a, b, s), x)
        lo, hi = 0.0, 1.0
        g = (math.sqrt(5.0) - 1.0) / 2.0
        c, d = hi - g * (hi - lo), lo + g * (hi - lo)
        fc, fd = f(c), f(d)
        for _ in range(90):
            if fc <= fd:
                hi, d, fd = d, c, fc
                c = hi - g * (hi - lo)
                fc = f(c)
            else:
                lo, c, fc = c, d, fd
                d = lo + g * (hi - lo)
                fd = f(d)
        return min(f(0.0), f(1.0), fc, fd)

    def coords(self, p):
        return self.first.coords(p[0]) + self.second.coords(p[1])

    def describe(self):
        return f"LinfSum({self.first.describe()}, {self.second.describe()})"

    def bounds(self):
        return self.first.bounds()


# -- metric graphs -----------------------------------------------------------


class GraphPoint(NamedTuple):
    edge: int
    offset: float


@dataclass(frozen=True, eq=False)
class MetricGraph(Space):
    """Nodes joined by edges of positive length; path-length metric.

    Edges are ``(u, v, length)`` with ``u != v``; parallel edges are allowed
    (the spoke families need them).  The all-pairs node distance table is
    built once at construction.
    """

    nodes: tuple
    edges: tuple
    require_connected: bool = True
    kind = "metric_graph"
    index: dict = field(init=False, repr=False)
    table: np.ndarray = field(init=False, repr=False)
    pred: np.ndarray = field(init=False, repr=False)
    best_edge: dict = field(init=False, repr=False)
    incident: dict = field(init=False, repr=False)

    def __post_init__(self):
        nodes = tuple(self.nodes)
        edges = tuple((u, v, float(w)) for u, v, w in self.edges)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", edges)
        index = {n: i for i, n in enumerate(nodes)}
        if len(index) != len(nodes):
            raise DomainError("duplicate node ids")
        n = len(nodes)
        W = np.zeros((n, n))
        best = {}
        incident = {i: [] for i in range(n)}
        for k, (u, v, w) in enumerate(edges):
            if u not in index or v not in index:
                raise DomainError(f"edge {k} references an unknown node")
            if u == v:
                raise DomainError(f"edge {k} is a loop")
            if not w > 0:
                raise DomainError(f"edge {k} has non-positive length {w}")
            i, j = index[u], index[v]
            incident[i].append(k)
            incident[j].append(k)
            if (i, j) not in best or w < edges[best[(i, j)]][2]:
                best[(i, j)] = best[(j, i)] = k
                W[i, j] = W[j, i] = w
        D, pred = shortest_path(csr_matrix(W), method="D", directed=False, return_predecessors=True)
        if self.require_connected and not np.all(np.isfinite(D)):
            raise DomainError("graph is not connected")
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "table", D)
        object.__setattr__(self, "pred", pred)
        object.__setattr__(self, "best_edge", best)
        object.__setattr__(self, "incident", incident)

    # points

    def node_point(self, node) -> GraphPoint:
        i = self.index[node]
        if not self.incident[i]:
            raise DomainError(f"node {node!r} has no incident edge")
        k = min(self.incident[i])
        u, v, w = self.edges[k]
        return GraphPoint(k, 0.0 if u == node else w)

    def point(self, edge: int, offset: float) -> GraphPoint:
        return self.check(GraphPoint(int(edge), float(offset)))

    def contains(self, p):
        if not isinstance(p, GraphPoint):
            return False
        if not 0 <= p.edge < len(self.edges):
            return False
        return -BOUNDARY_SLACK <= p.offset <= self.edges[p.edge][2] + BOUNDARY_SLACK

    def _why_not(self, p):
        if not isinstance(p, GraphPoint):
            return "expected a GraphPoint(edge, offset)"
        if not 0 <= p.edge < len(self.edges):
            return f"edge {p.edge} does not exist"
        return f"offset {p.offset} outside [0, {self.edges[p.edge][2]}] on edge {p.edge}"

    def at_node(self, p, tol=BOUNDARY_SLACK):
        """Node index if ``p`` sits on a node, else None."""
        u, v, w = self.edges[p.edge]
        if p.offset <= tol:
            return self.index[u]
        if p.offset >= w - tol:
            return self.index[v]
        return None

    def _ends(self, p):
        u, v, w = self.edges[p.edge]
        return ((self.index[u], p.offset), (self.index[v], w - p.offset))

    def node_distance(self, a, b) -> float:
        return float(self.table[self.index[a], self.index[b]])

    def distance(self, p, q):
        best = math.inf
        if p.edge == q.edge:
            best = abs(p.offset - q.offset)
        for a, da in self._ends(p):
            for b, db in self._ends(q):
                best = min(best, da + self.table[a, b] + db)
        return float(best)

    def _node_path(self, a, b):
        path = [b]
        while path[-1] != a:
            prev = self.pred[a, path[-1]]
            if prev < 0:
                raise UnreachableError(f"no path between nodes {self.nodes[a]!r} and {self.nodes[b]!r}")
            path.append(prev)
        return path[::-1]

    def route(self, p, q):
        """Shortest route from p to q as ``[(edge, from_offset, to_offset), ...]``."""
        best, choice = math.inf, None
        if p.edge == q.edge:
            best, choice = abs(p.offset - q.offset), "direct"
        for (a, da) in self._ends(p):
            for (b, db) in self._ends(q):
                c = da + self.table[a, b] + db
                if c < best - 1e-15:
                    best, choice = c, (a, b)
        if not math.isfinite(best):
            raise UnreachableError(f"no path of finite length from {p} to {q}")
        if choice == "direct":
            return [(p.edge, p.offset, q.offset)] if p.offset != q.offset else []
        a, b = choice
        pieces = []
        u, v, w = self.edges[p.edge]
        pieces.append((p.edge, p.offset, 0.0 if self.index[u] == a else w))
        nodes = self._node_path(a, b)
        for x, y in zip(nodes, nodes[1:]):
            k = self.best_edge[(x, y)]
            eu, ev, ew = self.edges[k]
            pieces.append((k, 0.0, ew) if self.index[eu] == x else (k, ew, 0.0))
        u, v, w = self.edges[q.edge]
        pieces.append((q.edge, 0.0 if self.index[u] == b else w, q.offset))
        return [pc for pc in pieces if pc[1] != pc[2]]

    def geodesic_step(self, p, q, budget):
        left = budget
        for edge, o1, o2 in self.route(p, q):
            length = abs(o2 - o1)
            if left >= length:
                left -= length
                continue
            return GraphPoint(edge, o1 + math.copysign(left, o2 - o1))
        return q

    def closest_approach(self, a, b, x):
        best = self.distance(a, x)
        (xu, xdu), (xv, xdv) = self._ends(x)
        for edge, o1, o2 in self.route(a, b):
            lo, hi = min(o1, o2), max(o1, o2)
            u, v, w = self.edges[edge]
            iu, iv = self.index[u], self.index[v]
            to_u = min(self.table[iu, xu] + xdu, self.table[iu, xv] + xdv)
            to_v = min(self.table[iv, xu] + xdu, self.table[iv, xv] + xdv)
            cand = min(lo + to_u, (w - hi) + to_v)
            if x.edge == edge:
                cand = min(cand, 0.0 if lo <= x.offset <= hi else min(abs(x.offset - lo), abs(x.offset - hi)))
            best = min(best, cand)
        return float(best)

    def coords(self, p):
        return (p.edge, p.offset)

    def describe(self):
        return f"MetricGraph({len(self.nodes)} nodes, {len(self.edges)} edges)"


def dijkstra(graph: MetricGraph, source) -> dict:
    """Plain heap-based single-source shortest paths over node ids."""
    adj = {n: [] for n in graph.nodes}
    for u, v, w in graph.edges:
        adj[u].append((v, w))
        adj[v].append((u, w))
    dist = {source: 0.0}
    heap = [(0.0, 0, source)]
    tick = 1
    done = set()
    while heap:
        d, _, n = heapq.heappop(heap)
        if n in done:
            continue
        done.add(n)
        for m, w in adj[n]:
            nd = d + w
            if nd < dist.get(m, math.inf):
                dist[m] = nd
                heapq.heappush(heap, (nd, tick, m))
                tick += 1
    return dist


# -- graph families ----------------------------------------------------------


def path_graph(length: float, pieces: int = 1) -> MetricGraph:
    """An interval ``[0, length]`` as a graph with ``pieces`` equal edges."""
    nodes = tuple(range(pieces + 1))
    w = length / pieces
    return MetricGraph(nodes, tuple((i, i + 1, w) for i in range(pieces)))


def cycle_graph(circumference: float, pieces: int = 4) -> MetricGraph:
    nodes = tuple(range(pieces))
    w = circumference / pieces
    return MetricGraph(nodes, tuple((i, (i + 1) % pieces, w) for i in range(pieces)))


def parallel_paths_graph(n: int) -> MetricGraph:
    """Points x and y joined by disjoint paths of lengths 1 + 1/k, k = 1..n."""
    return MetricGraph(("x", "y"), tuple(("x", "y", 1.0 + 1.0 / k) for k in range(1, n + 1)))


def spoke_graph(a_angles: Sequence[float], b_angles: Sequence[float], spoke_length: float = 1.0) -> MetricGraph:
    """Two unit-circle arcs of angle 1 with radial spokes to a hub ``"O"``.

    Arc A runs from angle 0 to 1 starting at node ``"A:0"``; spokes leave it
    at the listed angles.  Arc B is the antipodal copy starting at ``"B:0"``.
    Angles must lie in (0, 1].
    """
    nodes = ["O"]
    edges = []
    for side, angles in (("A", a_angles), ("B", b_angles)):
        marks = sorted({0.0, 1.0, *map(float, angles)})
        if marks[0] < 0 or marks[-1] > 1:
            raise DomainError("spoke angles must lie in [0, 1]")
        names = [f"{side}:{m:g}" for m in marks]
        nodes.extend(names)
        for (m0, n0), (m1, n1) in zip(zip(marks, names), zip(marks[1:], names[1:])):
            edges.append((n0, n1, m1 - m0))
        for a in angles:
            edges.append((f"{side}:{float(a):g}", "O", spoke_length))
    return MetricGraph(tuple(nodes), tuple(edges))


# -- checked module-level operations ----------------------------------------


def distance(space: Space, p, q) -> float:
    space.check(p, "first point")
    space.check(q, "second point")
    return space.distance(p, q)


def contains(space: Space, p) -> bool:
    return space.contains(p)


def geodesic_step(space: Space, p, q, budget: float):
    space.check(p, "start")
    space.check(q, "target")
    if budget < 0:
        raise ValueError("budget must be non-negative")
    return space.geodesic_step(p, q, budget)


def closest_approach(space: Space, a, b, x) -> float:
    return space.closest_approach(a, b, x)
