"""Independent oracles and trace checkers.

Nothing here reuses the code paths it checks: stability is sampled,
bridges are found by deleting edges one at a time, and domination is decided
by flood-filling the exact coordinate grid.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from fractions import Fraction

from .dynamics import Trace, puppy_at
from .geometry import (
    AllowedRegion,
    AtVertex,
    Configuration,
    Embedding,
    OnEdge,
    Point,
    build_embedding,
    dist_sq,
    locate,
    position,
)

LEMMA_LOWER = "LemmaLowerBreach"
CONTAINMENT = "ContainmentBreach"
MONOTONICITY = "MonotonicityBreach"
ORACLE_MISMATCH = "OracleMismatch"
PATH_PROPERTY = "PathPropertyBreach"


class MalformedTrace(ValueError):
    pass


class IncompatibleTraces(ValueError):
    pass


@dataclass(frozen=True)
class Violation:
    kind: str
    time: Fraction | None
    details: str


# -- stability ---------------------------------------------------------------


def _neighbours_at(emb: Embedding, pos, eps: Fraction):
    """Points at graph distance ``eps`` from ``pos`` along each incident edge."""
    if isinstance(pos, OnEdge):
        step = eps / emb.length(pos.edge)
        yield emb.point_at(pos.edge, pos.t + step)
        yield emb.point_at(pos.edge, pos.t - step)
        return
    here = emb.vertices[pos.vertex]
    for e, (u, v) in emb.edges.items():
        if pos.vertex not in (u, v):
            continue
        other = emb.vertices[v if u == pos.vertex else u]
        length = abs(other.x - here.x) + abs(other.y - here.y)
        f = eps / length
        yield Point(here.x + f * (other.x - here.x), here.y + f * (other.y - here.y))


def stability_oracle(emb: Embedding, config: Configuration, eps) -> bool:
    eps = Fraction(eps)
    if not 0 < eps <= emb.min_gap() / 4:
        raise ValueError(f"eps {eps} must lie in (0, min-gap/4]")
    h = locate(emb, config.human)
    p = locate(emb, config.puppy)
    here = (h.x - p.x) ** 2 + (h.y - p.y) ** 2
    return all((h.x - q.x) ** 2 + (h.y - q.y) ** 2 >= here for q in _neighbours_at(emb, config.puppy, eps))


def lattice_positions(emb: Embedding) -> list:
    """Vertices plus edge points whose free coordinate is a vertex coordinate or a midpoint between two.

    Distances between these points differ by at least half the minimum gap
    along each axis, which is what makes sampled stability exact.
    """
    xs = sorted({p.x for p in emb.vertices.values()})
    ys = sorted({p.y for p in emb.vertices.values()})
    grid_x = sorted(set(xs) | {(a + b) / 2 for a, b in zip(xs, xs[1:])})
    grid_y = sorted(set(ys) | {(a + b) / 2 for a, b in zip(ys, ys[1:])})
    out = [AtVertex(v) for v in sorted(emb.vertices)]
    for e in sorted(emb.edges):
        u, v = emb.edges[e]
        a, b = emb.vertices[u], emb.vertices[v]
        if a.y == b.y:
            lo, hi, free, start, span = min(a.x, b.x), max(a.x, b.x), grid_x, a.x, b.x - a.x
        else:
            lo, hi, free, start, span = min(a.y, b.y), max(a.y, b.y), grid_y, a.y, b.y - a.y
        for c in free:
            if lo < c < hi:
                out.append(position(emb, e, (c - start) / span))
    return out


def random_lattice_configurations(emb: Embedding, n: int, seed: int = 0) -> list:
    rng = random.Random(seed)
    pts = lattice_positions(emb)
    return [Configuration(rng.choice(pts), rng.choice(pts)) for _ in range(n)]


# -- bridges -------------------------------------------------------------------


def _fragment_graph(region: AllowedRegion):
    emb = region.emb
    ends = {}
    for e, (a, b) in region.items():
        ends[e] = (emb.point_at(e, a), emb.point_at(e, b))
    return ends


def _connected(ends: dict, skip=None) -> bool:
    adj: dict = {}
    for e, (p, q) in ends.items():
        adj.setdefault(p, [])
        adj.setdefault(q, [])
        if e == skip:
            continue
        adj[p].append(q)
        adj[q].append(p)
    if not adj:
        return True
    start = next(iter(adj))
    seen = {start}
    todo = [start]
    while todo:
        n = todo.pop()
        for nb in adj[n]:
            if nb not in seen:
                seen.add(nb)
                todo.append(nb)
    # nodes that only the skipped fragment touched become isolated points
    needed = {n for e, pq in ends.items() if e != skip for n in pq} | set(ends.get(skip, ()))
    return needed <= seen


def brute_bridges(region: AllowedRegion) -> set:
    ends = _fragment_graph(region)
    if not _connected(ends):
        raise ValueError("region is not connected")
    return {e for e in ends if not _connected(ends, skip=e)}


# -- domination ----------------------------------------------------------------


def domination_oracle(region: AllowedRegion, m, outer_edges, inner_edges) -> bool:
    """Flood fill on the coordinate grid with ``outer`` plus its closing line as walls."""
    m = Fraction(m)
    walls = [pq for e, pq in _fragment_graph(region).items() if e in outer_edges]
    inner = [pq for e, pq in _fragment_graph(region).items() if e in inner_edges]
    tops = sorted({p.x for seg in walls for p in seg if p.y == m})
    if len(tops) >= 2:
        walls.append((Point(tops[0], m), Point(tops[-1], m)))
    xs = sorted({p.x for seg in walls + inner for p in seg})
    ys = sorted({p.y for seg in walls + inner for p in seg} | {m})
    xs = [xs[0] - 1] + xs + [xs[-1] + 1]
    ys = [ys[0] - 1] + ys + [ys[-1] + 1]

    def coord(vals, k):
        return vals[k // 2] if k % 2 == 0 else (vals[k // 2] + vals[k // 2 + 1]) / 2

    def covered(segs, pt):
        for p, q in segs:
            if min(p.x, q.x) <= pt.x <= max(p.x, q.x) and min(p.y, q.y) <= pt.y <= max(p.y, q.y):
                return True
        return False

    nx, ny = 2 * len(xs) - 1, 2 * len(ys) - 1
    blocked = [[covered(walls, Point(coord(xs, i), coord(ys, j))) for j in range(ny)] for i in range(nx)]
    seen = [[False] * ny for _ in range(nx)]
    seen[0][0] = True
    queue = deque([(0, 0)])
    while queue:
        i, j = queue.popleft()
        for a, b in ((i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)):
            if 0 <= a < nx and 0 <= b < ny and not seen[a][b] and not blocked[a][b]:
                seen[a][b] = True
                queue.append((a, b))
    for i in range(nx):
        for j in range(ny):
            pt = Point(coord(xs, i), coord(ys, j))
            if pt.y < m and covered(inner, pt) and seen[i][j]:
                return False
    return True


# -- trace checks ----------------------------------------------------------------


def _event_heights(emb, ev):
    ys = [locate(emb, ev.puppy).y]
    for leg in ev.legs:
        ys.append(locate(emb, leg.start).y)
        ys.append(locate(emb, leg.end).y)
    return max(ys)


def lemma_lower_violations(emb: Embedding, events) -> list[Violation]:
    """For every event: once the puppy is not above the human, it stays below that line until the human rises."""
    n = len(events)
    hy = [locate(emb, ev.human).y for ev in events]
    py = [_event_heights(emb, ev) for ev in events]
    # first later index where the human is strictly higher
    nxt = [n] * n
    stack = []
    for i in range(n):
        while stack and hy[stack[-1]] < hy[i]:
            nxt[stack.pop()] = i
        stack.append(i)
    # sparse table for range max of puppy height
    table = [py[:]]
    k = 1
    while (1 << k) <= n:
        prev = table[-1]
        half = 1 << (k - 1)
        table.append([max(prev[i], prev[i + half]) for i in range(n - (1 << k) + 1)])
        k += 1

    def range_max(lo, hi):
        k = (hi - lo).bit_length() - 1
        return max(table[k][lo], table[k][hi - (1 << k)])

    out = []
    for i in range(n):
        if locate(emb, events[i].puppy).y > hy[i] or nxt[i] <= i + 1:
            continue
        if range_max(i + 1, nxt[i]) > hy[i]:
            j = next(j for j in range(i + 1, nxt[i]) if py[j] > hy[i])
            out.append(Violation(LEMMA_LOWER, events[j].time,
                                 f"puppy rose above y={hy[i]} (set at event {i}) while the human stayed below"))
    return out


def _positions(ev):
    yield ev.puppy
    for leg in ev.legs:
        yield leg.start
        yield leg.end


def check_trace(trace: Trace, prunings=None) -> list[Violation]:
    """Lower-line, containment and progress checks over a complete strategy trace."""
    if "embedding" not in trace.header:
        raise MalformedTrace("trace header lacks the embedding")
    emb = build_embedding(trace.header["embedding"])
    prunings = trace.prunings if prunings is None else prunings
    events = trace.events
    for a, b in zip(events, events[1:]):
        if b.time < a.time:
            raise MalformedTrace(f"event times go backwards at {b.time}")
    out = lemma_lower_violations(emb, events)

    region = AllowedRegion.full(emb)
    level = max(p.y for p in emb.vertices.values())
    measure = region.measure()
    bounds = [p.event_index for p in prunings] + [len(events)]
    start = 0
    for k, stop in enumerate(bounds):
        if k > 0:
            pr = prunings[k - 1]
            if not pr.measure_after < pr.measure_before:
                out.append(Violation(MONOTONICITY, pr.time, f"pruning {k} did not shrink the region"))
            if pr.measure_before != measure:
                out.append(Violation(MONOTONICITY, pr.time, f"pruning {k} starts from measure {pr.measure_before}, expected {measure}"))
            if pr.region.measure() != pr.measure_after:
                out.append(Violation(MONOTONICITY, pr.time, f"pruning {k} logs a region whose measure is not {pr.measure_after}"))
            region, measure = pr.region, pr.measure_after
            if pr.height is not None:
                level = pr.height
        if stop < start:
            raise MalformedTrace("pruning indices go backwards")
        epoch = events[start:stop]
        if epoch and all(locate(emb, ev.human).y <= level for ev in epoch):
            if locate(emb, epoch[0].puppy).y <= level:
                for ev in epoch:
                    if _event_heights(emb, ev) > level:
                        out.append(Violation(LEMMA_LOWER, ev.time, f"puppy above the epoch line y={level}"))
                        break
        for ev in epoch:
            for pos in _positions(ev):
                if not region.contains(pos):
                    out.append(Violation(CONTAINMENT, ev.time, f"puppy at {pos} outside the allowed region"))
                    break
            if not region.contains(ev.human):
                out.append(Violation(CONTAINMENT, ev.time, f"human at {ev.human} outside the allowed region"))
        start = stop
    return out


def compare_runs(exact: Trace, stepped: Trace, delta) -> list[Violation]:
    """Compare an event-driven trace with a fixed-step one of the same scenario."""
    delta = Fraction(delta)
    for key in ("embedding_hash", "policy", "seed"):
        if exact.header.get(key) != stepped.header.get(key):
            raise IncompatibleTraces(f"traces differ in {key}")
    if exact.header.get("initial") != stepped.header.get("initial"):
        raise IncompatibleTraces("traces start from different configurations")
    out = []
    if exact.captured != stepped.captured:
        out.append(Violation(ORACLE_MISMATCH, None, f"verdicts differ: {exact.outcome} vs {stepped.outcome}"))
        return out
    emb = build_embedding(exact.header["embedding"])
    end_a = exact.events[-1].time if exact.events else Fraction(0)
    end_b = stepped.events[-1].time if stepped.events else Fraction(0)
    horizon = min(end_a, end_b)
    for ev in stepped.events:
        if ev.time > horizon:
            break
        a = puppy_at(exact, emb, ev.time)
        b = locate(emb, ev.puppy)
        if abs(a.x - b.x) > 2 * delta or abs(a.y - b.y) > 2 * delta:
            out.append(Violation(ORACLE_MISMATCH, ev.time, f"puppy at {tuple(a)} vs {tuple(b)}"))
    return out


__all__ = [
    "Violation", "MalformedTrace", "IncompatibleTraces", "stability_oracle", "lattice_positions",
    "random_lattice_configurations", "brute_bridges", "domination_oracle", "check_trace",
    "lemma_lower_violations", "compare_runs", "dist_sq",
]
