"""Exact orthogonal drawings: data model, validation, allowed regions and graph queries.

Every coordinate is a :class:`fractions.Fraction`; nothing in here rounds.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction
from typing import Iterable, NamedTuple


class EmbeddingError(ValueError):
    """Base class for every validation failure of a drawing."""


class NonOrthogonalEdge(EmbeddingError):
    pass


class ZeroLengthEdge(EmbeddingError):
    pass


class DuplicateVertexCoordinates(EmbeddingError):
    pass


class VertexOnEdgeInterior(EmbeddingError):
    pass


class OverlappingEdges(EmbeddingError):
    pass


class ImproperCrossing(EmbeddingError):
    pass


class Disconnected(EmbeddingError):
    pass


class UnknownId(KeyError):
    pass


class EmptyResult(ValueError):
    pass


class DisconnectedInput(ValueError):
    pass


class Unreachable(ValueError):
    pass


class DisconnectedWarning(UserWarning):
    pass


def frac(value) -> Fraction:
    """Parse ints, Fractions and ``"p/q"`` strings. Floats are refused."""
    if isinstance(value, float):
        raise TypeError(f"float coordinate {value!r}; use an int or a 'p/q' string")
    return Fraction(value)


def frac_str(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


class Point(NamedTuple):
    x: Fraction
    y: Fraction

    def __sub__(self, other):
        return Point(self.x - other.x, self.y - other.y)

    def dot(self, other) -> Fraction:
        return self.x * other[0] + self.y * other[1]


HORIZONTAL = "horizontal"
VERTICAL = "vertical"


def _sign(q) -> int:
    return (q > 0) - (q < 0)


@dataclass(frozen=True)
class Embedding:
    """Validated orthogonal drawing. Build it with :func:`build_embedding`."""

    vertices: dict
    edges: dict
    allow_crossings: bool = False
    orientation: dict = field(default_factory=dict, compare=False)
    incident: dict = field(default_factory=dict, compare=False)

    def point(self, v) -> Point:
        try:
            return self.vertices[v]
        except KeyError:
            raise UnknownId(v) from None

    def ends(self, e) -> tuple:
        try:
            return self.edges[e]
        except KeyError:
            raise UnknownId(e) from None

    def length(self, e) -> Fraction:
        u, v = self.ends(e)
        d = self.vertices[v] - self.vertices[u]
        return abs(d.x) + abs(d.y)

    def axis(self, e) -> tuple[int, int]:
        """Unit vector pointing from the edge's first endpoint to its second."""
        u, v = self.ends(e)
        d = self.vertices[v] - self.vertices[u]
        return (_sign(d.x), _sign(d.y))

    def point_at(self, e, t: Fraction) -> Point:
        u, v = self.ends(e)
        a, b = self.vertices[u], self.vertices[v]
        return Point(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y))

    def min_gap(self) -> Fraction:
        """Smallest positive difference between two vertex x- or y-coordinates."""
        return self._min_gap

    @cached_property
    def _min_gap(self) -> Fraction:
        gaps = []
        for coords in ({p.x for p in self.vertices.values()}, {p.y for p in self.vertices.values()}):
            s = sorted(coords)
            gaps.extend(b - a for a, b in zip(s, s[1:]))
        if not gaps:
            return max((self.length(e) for e in self.edges), default=Fraction(1))
        return min(gaps)

    def to_spec(self) -> dict:
        return {
            "vertices": {v: [frac_str(p.x), frac_str(p.y)] for v, p in sorted(self.vertices.items())},
            "edges": {e: list(uv) for e, uv in sorted(self.edges.items())},
            "allow_crossings": self.allow_crossings,
        }

    def digest(self) -> str:
        blob = json.dumps(self.to_spec(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def is_connected(self) -> bool:
        if not self.vertices:
            return True
        start = min(self.vertices)
        seen = {start}
        todo = [start]
        while todo:
            v = todo.pop()
            for e in self.incident[v]:
                for w in self.edges[e]:
                    if w not in seen:
                        seen.add(w)
                        todo.append(w)
        return len(seen) == len(self.vertices)


def _segments_meet(p1: Point, p2: Point, q1: Point, q2: Point):
    """Intersection of two axis-aligned segments: None, a Point, or 'overlap'."""
    ax0, ax1 = sorted((p1.x, p2.x))
    ay0, ay1 = sorted((p1.y, p2.y))
    bx0, bx1 = sorted((q1.x, q2.x))
    by0, by1 = sorted((q1.y, q2.y))
    x0, x1 = max(ax0, bx0), min(ax1, bx1)
    y0, y1 = max(ay0, by0), min(ay1, by1)
    if x0 > x1 or y0 > y1:
        return None
    if x0 == x1 and y0 == y1:
        return Point(x0, y0)
    return "overlap"


def build_embedding(spec: dict, *, require_connected: bool = False) -> Embedding:
    """Validate a raw ``{"vertices", "edges", "allow_crossings"}`` mapping.

    Raises the matching :class:`EmbeddingError` subclass on the first problem found.
    A disconnected drawing raises :class:`Disconnected` only when
    ``require_connected`` is set, and warns otherwise.
    """
    allow = bool(spec.get("allow_crossings", False))
    vertices = {}
    for v, xy in spec.get("vertices", {}).items():
        x, y = xy
        vertices[str(v)] = Point(frac(x), frac(y))
    edges = {}
    for e, uv in spec.get("edges", {}).items():
        u, v = (str(w) for w in uv)
        for w in (u, v):
            if w not in vertices:
                raise UnknownId(w)
        edges[str(e)] = (u, v)

    seen = {}
    for v, p in sorted(vertices.items()):
        if p in seen:
            raise DuplicateVertexCoordinates(f"{seen[p]} and {v} both at {tuple(map(frac_str, p))}")
        seen[p] = v

    orientation = {}
    for e, (u, v) in sorted(edges.items()):
        a, b = vertices[u], vertices[v]
        if a == b:
            raise ZeroLengthEdge(e)
        if a.x != b.x and a.y != b.y:
            raise NonOrthogonalEdge(f"edge {e} from {u} to {v} is neither horizontal nor vertical")
        orientation[e] = HORIZONTAL if a.y == b.y else VERTICAL

    for e, (u, v) in sorted(edges.items()):
        a, b = vertices[u], vertices[v]
        for w, p in vertices.items():
            if w in (u, v):
                continue
            if min(a.x, b.x) <= p.x <= max(a.x, b.x) and min(a.y, b.y) <= p.y <= max(a.y, b.y):
                raise VertexOnEdgeInterior(f"vertex {w} lies inside edge {e}")

    names = sorted(edges)
    for i, e in enumerate(names):
        u, v = edges[e]
        for f in names[i + 1:]:
            s, t = edges[f]
            hit = _segments_meet(vertices[u], vertices[v], vertices[s], vertices[t])
            if hit is None:
                continue
            if hit == "overlap":
                raise OverlappingEdges(f"edges {e} and {f} overlap")
            shared = {u, v} & {s, t}
            if any(vertices[w] == hit for w in shared):
                continue
            if not allow:
                raise ImproperCrossing(f"edges {e} and {f} cross at {tuple(map(frac_str, hit))}")

    incident = {v: [] for v in vertices}
    for e in names:
        u, v = edges[e]
        incident[u].append(e)
        incident[v].append(e)

    emb = Embedding(vertices, edges, allow, orientation, {v: tuple(es) for v, es in incident.items()})
    if not emb.is_connected():
        if require_connected:
            raise Disconnected("drawing has more than one connected component")
        warnings.warn("drawing is disconnected", DisconnectedWarning, stacklevel=2)
    return emb


# -- positions -------------------------------------------------------------


@dataclass(frozen=True, order=True)
class AtVertex:
    vertex: str


@dataclass(frozen=True, order=True)
class OnEdge:
    edge: str
    t: Fraction


def position(emb: Embedding, e, t) -> AtVertex | OnEdge:
    """Canonical position for parameter ``t`` on edge ``e``."""
    t = Fraction(t)
    u, v = emb.ends(e)
    if t == 0:
        return AtVertex(u)
    if t == 1:
        return AtVertex(v)
    if not 0 < t < 1:
        raise ValueError(f"edge parameter {t} outside [0, 1]")
    return OnEdge(e, t)


def check_position(emb: Embedding, pos) -> None:
    if isinstance(pos, AtVertex):
        emb.point(pos.vertex)
    else:
        emb.ends(pos.edge)
        if not 0 < pos.t < 1:
            raise ValueError(f"non-canonical position {pos}")


def locate(emb: Embedding, pos) -> Point:
    if isinstance(pos, AtVertex):
        return emb.point(pos.vertex)
    emb.ends(pos.edge)
    return emb.point_at(pos.edge, pos.t)


def dist_sq(emb: Embedding, a, b) -> Fraction:
    d = locate(emb, a) - locate(emb, b)
    return d.x * d.x + d.y * d.y


@dataclass(frozen=True, order=True)
class Configuration:
    human: AtVertex | OnEdge
    puppy: AtVertex | OnEdge


@dataclass(frozen=True, order=True)
class Direction:
    edge: str
    vector: tuple[int, int]


def incident_directions(emb: Embedding, pos) -> list[Direction]:
    if isinstance(pos, AtVertex):
        emb.point(pos.vertex)
        out = []
        for e in emb.incident[pos.vertex]:
            u, v = emb.edges[e]
            ax = emb.axis(e)
            out.append(Direction(e, ax if u == pos.vertex else (-ax[0], -ax[1])))
        return out
    ax = emb.axis(pos.edge)
    return [Direction(pos.edge, ax), Direction(pos.edge, (-ax[0], -ax[1]))]


def param_of(emb: Embedding, pos, e) -> Fraction:
    """Parameter of ``pos`` along edge ``e`` (pos must lie on e)."""
    if isinstance(pos, OnEdge):
        if pos.edge != e:
            raise ValueError(f"{pos} is not on edge {e}")
        return pos.t
    u, v = emb.ends(e)
    if pos.vertex == u:
        return Fraction(0)
    if pos.vertex == v:
        return Fraction(1)
    raise ValueError(f"{pos} is not on edge {e}")


# -- allowed regions ---------------------------------------------------------


@dataclass(frozen=True)
class AboveHeight:
    m: Fraction


@dataclass(frozen=True)
class RemoveEdges:
    edges: frozenset


@dataclass(frozen=True)
class KeepComponent:
    """Keep only the listed edge fragments (a component, closure or piece)."""

    edges: frozenset


@dataclass(frozen=True)
class Compound:
    parts: tuple


class AllowedRegion:
    """Per-edge allowed parameter interval ``[a, b]`` with ``a < b``.

    Edges missing from the mapping are removed. Instances are immutable;
    :func:`restrict` returns a new one.
    """

    __slots__ = ("emb", "_iv", "_key")

    def __init__(self, emb: Embedding, intervals: dict):
        self.emb = emb
        self._iv = dict(sorted(intervals.items()))
        self._key = tuple(self._iv.items())

    @classmethod
    def full(cls, emb: Embedding) -> "AllowedRegion":
        return cls(emb, {e: (Fraction(0), Fraction(1)) for e in emb.edges})

    def __eq__(self, other):
        return isinstance(other, AllowedRegion) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"AllowedRegion({len(self._iv)} edges)"

    def __contains__(self, e) -> bool:
        return e in self._iv

    def interval(self, e):
        return self._iv.get(e)

    def items(self):
        return self._iv.items()

    def edges(self) -> list:
        return list(self._iv)

    def is_empty(self) -> bool:
        return not self._iv

    def measure(self) -> Fraction:
        return sum(((b - a) * self.emb.length(e) for e, (a, b) in self._iv.items()), Fraction(0))

    def node(self, e, t):
        return position(self.emb, e, t)

    def fragment_nodes(self, e) -> tuple:
        a, b = self._iv[e]
        return self.node(e, a), self.node(e, b)

    def nodes(self) -> set:
        out = set()
        for e in self._iv:
            out.update(self.fragment_nodes(e))
        return out

    def contains(self, pos) -> bool:
        if isinstance(pos, OnEdge):
            iv = self._iv.get(pos.edge)
            return iv is not None and iv[0] <= pos.t <= iv[1]
        for e in self.emb.incident.get(pos.vertex, ()):
            iv = self._iv.get(e)
            if iv is None:
                continue
            t = param_of(self.emb, pos, e)
            if iv[0] <= t <= iv[1]:
                return True
        return False

    def containing_edges(self, pos) -> list:
        """Allowed edges whose fragment contains ``pos``."""
        if isinstance(pos, OnEdge):
            return [pos.edge] if self.contains(pos) else []
        out = []
        for e in self.emb.incident.get(pos.vertex, ()):
            iv = self._iv.get(e)
            if iv is not None and iv[0] <= param_of(self.emb, pos, e) <= iv[1]:
                out.append(e)
        return out

    def to_json(self) -> dict:
        return {e: [frac_str(a), frac_str(b)] for e, (a, b) in self._iv.items()}

    @classmethod
    def from_json(cls, emb: Embedding, data: dict) -> "AllowedRegion":
        return cls(emb, {e: (frac(a), frac(b)) for e, (a, b) in data.items()})


def _clip_above(emb: Embedding, e, iv, m):
    a, b = iv
    p, q = emb.point_at(e, Fraction(0)), emb.point_at(e, Fraction(1))
    if p.y == q.y:
        return iv if p.y <= m else None
    # y(t) = p.y + t (q.y - p.y); keep y <= m
    t_cut = (m - p.y) / (q.y - p.y)
    if q.y > p.y:
        b = min(b, t_cut)
    else:
        a = max(a, t_cut)
    return (a, b) if a < b else None


def restrict(region: AllowedRegion, cut) -> AllowedRegion:
    """Apply a restriction descriptor; the result is pointwise inside ``region``."""
    emb = region.emb
    if isinstance(cut, Compound):
        for part in cut.parts:
            region = restrict(region, part)
        return region
    if isinstance(cut, AboveHeight):
        out = {}
        for e, iv in region.items():
            clipped = _clip_above(emb, e, iv, cut.m)
            if clipped is not None:
                out[e] = clipped
    elif isinstance(cut, RemoveEdges):
        out = {e: iv for e, iv in region.items() if e not in cut.edges}
    elif isinstance(cut, KeepComponent):
        out = {e: iv for e, iv in region.items() if e in cut.edges}
    else:
        raise TypeError(f"unknown restriction {cut!r}")
    if not out:
        raise EmptyResult(f"{cut} leaves nothing allowed")
    for e, (a, b) in out.items():
        pa, pb = region.interval(e)
        assert pa <= a < b <= pb, "restriction must shrink a single interval"
    return AllowedRegion(emb, out)


# -- structure ---------------------------------------------------------------


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def add(self, x):
        self.parent.setdefault(x, x)

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if _node_key(rb) < _node_key(ra):
                ra, rb = rb, ra
            self.parent[rb] = ra


def _node_key(n):
    return (0, n.vertex, 0) if isinstance(n, AtVertex) else (1, n.edge, n.t)


@dataclass(frozen=True)
class Component:
    edges: frozenset
    nodes: frozenset

    @property
    def name(self) -> str:
        return min(self.edges)


def components(region: AllowedRegion, minus: Iterable = ()) -> list[Component]:
    """Connected components of the allowed fragments not listed in ``minus``.

    Nodes touched only by removed fragments belong to no component.
    Components are returned sorted by their smallest edge id.
    """
    minus = set(minus)
    uf = _UnionFind()
    for e in region.edges():
        if e in minus:
            continue
        a, b = region.fragment_nodes(e)
        uf.add(a)
        uf.add(b)
        uf.union(a, b)
    groups: dict = {}
    for e in region.edges():
        if e in minus:
            continue
        root = uf.find(region.fragment_nodes(e)[0])
        es, ns = groups.setdefault(root, (set(), set()))
        es.add(e)
        ns.update(region.fragment_nodes(e))
    comps = [Component(frozenset(es), frozenset(ns)) for es, ns in groups.values()]
    return sorted(comps, key=lambda c: c.name)


def _adjacency(region: AllowedRegion, skip=()):
    adj: dict = {}
    for e in region.edges():
        if e in skip:
            continue
        a, b = region.fragment_nodes(e)
        adj.setdefault(a, []).append((b, e))
        adj.setdefault(b, []).append((a, e))
    for lst in adj.values():
        lst.sort(key=lambda ne: (ne[1], _node_key(ne[0])))
    return adj


def bridges(region: AllowedRegion) -> set:
    """Cut edges of the allowed region via an iterative lowpoint DFS."""
    adj = _adjacency(region)
    if not adj:
        return set()
    start = min(adj, key=_node_key)
    disc = {start: 0}
    low = {start: 0}
    out = set()
    stack = [(start, None, iter(adj[start]))]
    counter = 1
    while stack:
        node, via, it = stack[-1]
        advanced = False
        for nxt, e in it:
            if e == via:
                continue
            if nxt in disc:
                low[node] = min(low[node], disc[nxt])
            else:
                disc[nxt] = low[nxt] = counter
                counter += 1
                stack.append((nxt, e, iter(adj[nxt])))
                advanced = True
                break
        if advanced:
            continue
        stack.pop()
        if stack:
            parent = stack[-1][0]
            low[parent] = min(low[parent], low[node])
            if low[node] > disc[parent]:
                out.add(via)
    if len(disc) != len(adj):
        raise DisconnectedInput("allowed region is not connected")
    return out


@dataclass(frozen=True)
class ElementaryMove:
    edge: str
    start: Fraction
    end: Fraction

    def duration(self, emb: Embedding) -> Fraction:
        return abs(self.end - self.start) * emb.length(self.edge)


def _attachments(region: AllowedRegion, pos):
    """(node, edge, param-from, param-to) hops linking ``pos`` to region nodes."""
    if not region.contains(pos):
        raise Unreachable(f"{pos} is outside the allowed region")
    if isinstance(pos, OnEdge):
        a, b = region.interval(pos.edge)
        if pos.t in (a, b):
            return [(pos, None, None, None)]
        return [
            (region.node(pos.edge, a), pos.edge, pos.t, a),
            (region.node(pos.edge, b), pos.edge, pos.t, b),
        ]
    return [(pos, None, None, None)]


def path_between(region: AllowedRegion, start, goal) -> list[ElementaryMove]:
    """Fewest-fragment walk from ``start`` to ``goal`` inside ``region``."""
    emb = region.emb
    if start == goal:
        return []
    if isinstance(start, OnEdge) and isinstance(goal, OnEdge) and start.edge == goal.edge:
        if region.contains(start) and region.contains(goal):
            return [ElementaryMove(start.edge, start.t, goal.t)]
    if isinstance(start, OnEdge) != isinstance(goal, OnEdge):
        # a vertex and an interior point of one of its edges
        vpos, epos = (start, goal) if isinstance(start, AtVertex) else (goal, start)
        if vpos.vertex in emb.edges[epos.edge] and region.contains(start) and region.contains(goal):
            tv = param_of(emb, vpos, epos.edge)
            iv = region.interval(epos.edge)
            if iv[0] <= tv <= iv[1]:
                s, g = (tv, epos.t) if start is vpos else (epos.t, tv)
                return [ElementaryMove(epos.edge, s, g)]
    adj = _adjacency(region)
    heads = _attachments(region, start)
    tails = {n: (e, s, g) for n, e, s, g in _attachments(region, goal)}
    prev: dict = {}
    queue = deque()
    for n, e, s, g in heads:
        if n not in prev:
            prev[n] = (None, e, s, g)
            queue.append(n)
    found = None
    while queue:
        n = queue.popleft()
        if n in tails:
            found = n
            break
        for m, e in adj.get(n, ()):
            if m not in prev:
                prev[m] = (n, e, None, None)
                queue.append(m)
    if found is None:
        raise Unreachable(f"no allowed path from {start} to {goal}")
    moves = []
    n = found
    while True:
        back, e, s, g = prev[n]
        if back is None:
            if e is not None:
                moves.append(ElementaryMove(e, s, g))
            break
        moves.append(ElementaryMove(e, param_of(emb, back, e), param_of(emb, n, e)))
        n = back
    moves.reverse()
    e, s, g = tails[found]
    if e is not None:
        moves.append(ElementaryMove(e, g, s))
    return moves


def move_end(emb: Embedding, move: ElementaryMove):
    return position(emb, move.edge, move.end)


def move_start(emb: Embedding, move: ElementaryMove):
    return position(emb, move.edge, move.start)
