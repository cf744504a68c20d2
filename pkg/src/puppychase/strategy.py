"""The catching strategy for orthogonal embeddings.

The human repeatedly walks to the top level ``m`` of the allowed region, works
out which component of (region minus the top edges) holds the puppy, walks
into the outermost component enclosing it and prunes everything the puppy
provably cannot reach any more. Every pruning removes at least one whole edge,
so the loop ends with the puppy caught.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from .dynamics import (
    CAP_EXCEEDED,
    CAPTURE,
    CAPTURED,
    CASCADE,
    Event,
    Pruning,
    Trace,
    coincident,
    make_header,
    simulate_move,
    stabilize,
)
from .geometry import (
    AboveHeight,
    AllowedRegion,
    AtVertex,
    Component,
    Compound,
    Configuration,
    EmptyResult,
    Embedding,
    KeepComponent,
    OnEdge,
    Point,
    RemoveEdges,
    Unreachable,
    _adjacency,
    components,
    locate,
    path_between,
    restrict,
)


class GDNotPath(RuntimeError):
    pass


class StrategyInvariantViolated(RuntimeError):
    pass


def top_edges(region: AllowedRegion):
    """``(m, T)`` with T the allowed horizontal edges at the greatest height, left to right."""
    emb = region.emb
    best = None
    level = []
    for e in region.edges():
        if emb.orientation[e] != "horizontal":
            continue
        y = emb.point_at(e, Fraction(0)).y
        if best is None or y > best:
            best, level = y, [e]
        elif y == best:
            level.append(e)
    if best is None:
        return None
    return best, sorted(level, key=lambda e: _x_range(region, e)[0])


def _x_range(region, e):
    a, b = region.interval(e)
    p, q = region.emb.point_at(e, a), region.emb.point_at(e, b)
    return min(p.x, q.x), max(p.x, q.x)


def _segments(region: AllowedRegion, edges):
    emb = region.emb
    for e in edges:
        a, b = region.interval(e)
        yield e, emb.point_at(e, a), emb.point_at(e, b)


# -- domination ----------------------------------------------------------------

_TURN = {(1, 0): 0, (0, 1): 1, (-1, 0): 2, (0, -1): 3}
_DIRS = [(1, 0), (0, 1), (-1, 0), (0, -1)]


def _unit(p: Point, q: Point):
    d = q - p
    return ((d.x > 0) - (d.x < 0), (d.y > 0) - (d.y < 0))


def _outer_walls(segs):
    """Segments bordering the unbounded face on exactly one side."""
    out = {}
    for i, (p, q) in enumerate(segs):
        out.setdefault(p, {})[_TURN[_unit(p, q)]] = (q, i)
        out.setdefault(q, {})[_TURN[_unit(q, p)]] = (p, i)
    used = set()
    faces = []
    for start in sorted(out):
        for k in sorted(out[start]):
            if (start, k) in used:
                continue
            face = []
            node, turn = start, k
            while (node, turn) not in used:
                used.add((node, turn))
                nxt, idx = out[node][turn]
                face.append((node, nxt, idx))
                back = (turn + 2) % 4
                for step in (3, 2, 1, 0):
                    cand = (back + step) % 4
                    if cand in out[nxt]:
                        node, turn = nxt, cand
                        break
            faces.append(face)
    def area(face):
        return sum(a.x * b.y - b.x * a.y for a, b, _ in face)
    outer = min(faces, key=area)
    counts: dict = {}
    for _, _, idx in outer:
        counts[idx] = counts.get(idx, 0) + 1
    return [segs[i] for i, c in counts.items() if c == 1]


def _closing_segments(region, comp: Component, m):
    xs = sorted({locate(region.emb, n).x for n in comp.nodes if locate(region.emb, n).y == m})
    return [(Point(a, m), Point(b, m)) for a, b in zip(xs, xs[1:])]


def _sample_point(region, comp: Component, m) -> Point:
    e, p, q = next(iter(_segments(region, sorted(comp.edges))))
    if p.y == q.y:
        return Point((p.x + q.x) / 2, p.y)
    lo, hi = sorted((p.y, q.y))
    return Point(p.x, (lo + min(hi, m)) / 2)


class _Enclosure:
    """Region bounded by one component and the line at height m."""

    def __init__(self, region, comp: Component, m):
        segs = [(p, q) for _, p, q in _segments(region, sorted(comp.edges))]
        segs += _closing_segments(region, comp, m)
        self.walls = [s for s in _outer_walls(segs) if s[0].y == s[1].y]
        self.xs = sorted({p.x for s in segs for p in s})

    def encloses(self, pt: Point) -> bool:
        bigger = [x for x in self.xs if x > pt.x]
        x = pt.x + ((bigger[0] - pt.x) / 2 if bigger else 1)
        hits = 0
        for p, q in self.walls:
            lo, hi = sorted((p.x, q.x))
            if lo < x < hi and p.y < pt.y:
                hits += 1
        return hits % 2 == 1


def dominates(region: AllowedRegion, m, outer: Component, inner: Component) -> bool:
    """Whether ``inner`` lies inside the region bounded by ``outer`` and the line y = m."""
    if outer == inner:
        return False
    return _Enclosure(region, outer, m).encloses(_sample_point(region, inner, m))


# -- decomposition -----------------------------------------------------------


@dataclass
class DecompositionContext:
    region: AllowedRegion
    clipped: AllowedRegion
    m: Fraction
    T: list
    comps: list
    attach: dict  # comp index -> sorted attachment x's at height m
    t_of: dict  # comp index -> T edges incident to the component
    span: dict  # comp index -> (left x, right x)
    dominated_by: dict  # comp index -> set of comp indices dominating it
    nondominated: list
    gd_edges: list
    node_owner: dict = field(default_factory=dict)

    def component_index(self, pos):
        """Index of the component holding ``pos``, or None when pos is only on T."""
        if isinstance(pos, OnEdge):
            for i, c in enumerate(self.comps):
                if pos.edge in c.edges and self.clipped.contains(pos):
                    return i
            return None
        return self.node_owner.get(pos)

    def top(self, i) -> int:
        """The nondominated component enclosing component ``i``."""
        doms = self.dominated_by[i]
        if not doms:
            return i
        outer = [j for j in doms if not self.dominated_by[j]]
        assert len(outer) == 1, "domination must be laminar"
        return outer[0]

    def closure(self, i) -> frozenset:
        """Edges of component ``i``, everything it dominates, and T edges in its span."""
        edges = set(self.comps[i].edges)
        for j, doms in self.dominated_by.items():
            if i in doms:
                edges |= self.comps[j].edges
        lo, hi = self.span[i]
        for e in self.T:
            a, b = _x_range(self.clipped, e)
            if lo <= a and b <= hi:
                edges.add(e)
        return frozenset(edges)


def decompose(region: AllowedRegion) -> DecompositionContext:
    top = top_edges(region)
    if top is None:
        raise ValueError("region has no horizontal edge")
    m, T = top
    try:
        clipped = restrict(region, AboveHeight(m))
    except EmptyResult:  # pragma: no cover - T itself stays
        clipped = region
    emb = region.emb
    comps = components(clipped, T)
    owner = {}
    for i, c in enumerate(comps):
        for n in c.nodes:
            owner[n] = i
    attach, t_of, span = {}, {}, {}
    t_nodes = {e: set(clipped.fragment_nodes(e)) for e in T}
    for i, c in enumerate(comps):
        xs = sorted({locate(emb, n).x for n in c.nodes if locate(emb, n).y == m})
        attach[i] = xs
        t_of[i] = [e for e in T if t_nodes[e] & c.nodes]
        span[i] = (xs[0], xs[-1]) if xs else None

    dominated_by = {i: set() for i in range(len(comps))}
    for i, c in enumerate(comps):
        if span[i] is None or span[i][0] == span[i][1]:
            continue
        enc = None
        for j, d in enumerate(comps):
            if i == j or span[j] is None:
                continue
            if not (span[i][0] <= span[j][0] and span[j][1] <= span[i][1]):
                continue
            enc = enc or _Enclosure(clipped, c, m)
            if enc.encloses(_sample_point(clipped, d, m)):
                dominated_by[j].add(i)

    nondominated = sorted((i for i in range(len(comps)) if not dominated_by[i]),
                          key=lambda i: span[i] or (Fraction(0), Fraction(0)))
    gd_edges = _gd_links(clipped, T, comps, owner, set(nondominated))
    ctx = DecompositionContext(region, clipped, m, T, comps, attach, t_of, span,
                               dominated_by, nondominated, gd_edges, owner)
    check_decomposition(ctx)
    return ctx


def _gd_links(clipped, T, comps, owner, keep):
    adj: dict = {}
    for e in T:
        a, b = clipped.fragment_nodes(e)
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    links = set()
    for i in sorted(keep):
        starts = [n for n in comps[i].nodes if n in adj]
        seen = set(starts)
        todo = list(starts)
        while todo:
            n = todo.pop()
            for nb in adj[n]:
                if nb in seen:
                    continue
                seen.add(nb)
                j = owner.get(nb)
                if j is None:
                    todo.append(nb)
                elif j in keep and j != i:
                    links.add((min(i, j), max(i, j)))
    return sorted(links)


def check_decomposition(ctx: DecompositionContext) -> None:
    """Raise :class:`GDNotPath` unless the nondominated components form a simple path."""
    nd = ctx.nondominated
    for a, b in zip(nd, nd[1:]):
        if ctx.span[a] is None or ctx.span[b] is None or ctx.span[a][1] >= ctx.span[b][0]:
            raise GDNotPath(f"attachment intervals of components {a} and {b} overlap")
    deg = {i: 0 for i in nd}
    for a, b in ctx.gd_edges:
        deg[a] += 1
        deg[b] += 1
    if len(ctx.gd_edges) != max(len(nd) - 1, 0) or any(d > 2 for d in deg.values()):
        raise GDNotPath(f"G_D has {len(nd)} vertices and links {ctx.gd_edges}")
    order = {i: k for k, i in enumerate(nd)}
    for a, b in ctx.gd_edges:
        if abs(order[a] - order[b]) != 1:
            raise GDNotPath(f"G_D links non-consecutive components {a} and {b}")
    for i, doms in ctx.dominated_by.items():
        for j in doms:
            if i in ctx.dominated_by[j]:
                raise GDNotPath("domination is not antisymmetric")
            if not ctx.dominated_by[j] <= doms:
                raise GDNotPath("domination is not transitive")
        chain = sorted(doms, key=lambda j: len(ctx.dominated_by[j]))
        for x, y in zip(chain, chain[1:]):
            if x not in ctx.dominated_by[y]:
                raise GDNotPath("domination is not laminar")


def assert_single_run(ctx: DecompositionContext) -> None:
    """Generic-position check: the top edges form one unbroken horizontal segment."""
    for a, b in zip(ctx.T, ctx.T[1:]):
        if _x_range(ctx.clipped, a)[1] != _x_range(ctx.clipped, b)[0]:
            raise AssertionError(f"top level splits into separate segments at {a} and {b}")


# -- planning ----------------------------------------------------------------


@dataclass
class Plan:
    moves: list
    restriction: object = None
    note: str = ""


def _y(emb, pos):
    return locate(emb, pos).y


def _walk_to_any(region: AllowedRegion, start, targets) -> list:
    """Fewest-fragment walk from ``start`` to the closest of ``targets``."""
    targets = set(targets)
    if start in targets:
        return []
    if not targets:
        raise Unreachable("no targets")
    adj = _adjacency(region)
    if start in adj:
        prev = {start: None}
        queue = deque([start])
        while queue:
            n = queue.popleft()
            if n in targets:
                return path_between(region, start, n)
            for nb, _ in adj[n]:
                if nb not in prev:
                    prev[nb] = n
                    queue.append(nb)
        raise Unreachable(f"no target reachable from {start}")
    best = None
    for t in sorted(targets, key=_pos_key):
        try:
            moves = path_between(region, start, t)
        except Unreachable:
            continue
        if best is None or len(moves) < len(best):
            best = moves
    if best is None:
        raise Unreachable(f"no target reachable from {start}")
    return best


def _pos_key(p):
    return (0, p.vertex, 0) if isinstance(p, AtVertex) else (1, p.edge, p.t)


def _puppy_slot(ctx: DecompositionContext, puppy):
    """Component index for the puppy, plus the T-level node joining it when the puppy is on T.

    A puppy on T takes the nearest component reachable along T.
    """
    i = ctx.component_index(puppy)
    if i is not None:
        return i, None
    emb = ctx.region.emb
    adj: dict = {}
    for e in ctx.T:
        a, b = ctx.clipped.fragment_nodes(e)
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    here = locate(emb, puppy)
    if isinstance(puppy, OnEdge):
        starts = list(ctx.clipped.fragment_nodes(puppy.edge))
    else:
        starts = [puppy]
    best = None
    seen = set()
    todo = list(starts)
    while todo:
        n = todo.pop()
        if n in seen:
            continue
        seen.add(n)
        j = ctx.node_owner.get(n)
        pt = locate(emb, n)
        if j is not None:
            key = (abs(pt.x - here.x), pt.x)
            if best is None or key < best[0]:
                best = (key, j, n)
            continue
        todo.extend(adj.get(n, ()))
    if best is None:
        raise StrategyInvariantViolated(f"puppy at {puppy} is attached to no component")
    return best[1], best[2]


def _height_nodes(region, nodes, m):
    return [n for n in nodes if _y(region.emb, n) == m]


def _pieces(ctx: DecompositionContext, closure: frozenset, star: int):
    """Connected pieces of the closure once the enclosing component is cut out."""
    cut = ctx.comps[star]
    rest = sorted(closure - cut.edges)
    parent = {e: e for e in rest}

    def find(e):
        while parent[e] != e:
            parent[e] = parent[parent[e]]
            e = parent[e]
        return e

    by_node: dict = {}
    for e in rest:
        for n in ctx.clipped.fragment_nodes(e):
            if n not in cut.nodes:
                by_node.setdefault(n, []).append(e)
    for es in by_node.values():
        for e in es[1:]:
            a, b = find(es[0]), find(e)
            if a != b:
                parent[max(a, b)] = min(a, b)
    groups: dict = {}
    for e in rest:
        groups.setdefault(find(e), set()).add(e)
    return [frozenset(g) for g in groups.values()]


def _inside(region: AllowedRegion, edges, pos, avoid=frozenset()) -> bool:
    if pos in avoid:
        return False
    return any(e in edges for e in region.containing_edges(pos))


def plan_iteration(ctx: DecompositionContext, config: Configuration) -> Plan:
    """Next human moves and the restriction to apply once they are done.

    An empty move list means the restriction is earned right now.
    """
    region = ctx.clipped
    emb = region.emb
    human, puppy = config.human, config.puppy
    m = ctx.m
    cut_top = AboveHeight(m)
    if not region.contains(puppy):
        raise StrategyInvariantViolated(f"puppy at {puppy} left the allowed region")
    if not region.contains(human):
        raise StrategyInvariantViolated(f"human at {human} left the allowed region")
    if not ctx.comps:
        return Plan(path_between(region, human, puppy)[:1], None, "top level only")

    slot, joint = _puppy_slot(ctx, puppy)
    if joint is not None:
        # the T run from the puppy to ``joint`` is straight, so standing there catches it
        if human == joint:
            raise StrategyInvariantViolated(f"puppy at {puppy} ignores the human on its T run")
        return Plan(_walk_to_any(region, human, [joint])[:1], None, "walk to the puppy's T run")
    h_slot = ctx.component_index(human) if _y(emb, human) == m else None
    if h_slot == slot:
        keep = ctx.comps[slot].edges
        return Plan([], Compound((cut_top, RemoveEdges(frozenset(ctx.T)), KeepComponent(keep))), "same component")

    star = ctx.top(slot)
    closure = ctx.closure(star)
    whole = frozenset(region.edges())
    if _inside(region, closure, human) and closure != whole:
        return Plan([], Compound((cut_top, KeepComponent(closure))), "keep closure")
    if not _inside(region, closure, human) or slot == star:
        goals = _height_nodes(region, ctx.comps[star].nodes, m)
        return Plan(_walk_to_any(region, human, goals)[:1], None, "walk to enclosing component")

    star_nodes = ctx.comps[star].nodes
    pieces = _pieces(ctx, closure, star)
    target = None
    for piece in pieces:
        if _inside(region, piece, puppy, avoid=star_nodes):
            target = piece
            break
    if target is None:
        raise StrategyInvariantViolated(f"puppy at {puppy} is in no piece below component {star}")
    piece_nodes = {n for e in target for n in region.fragment_nodes(e)} - star_nodes
    goals = _height_nodes(region, piece_nodes, m)
    if human in goals:
        return Plan([], Compound((cut_top, KeepComponent(target))), "keep piece")
    return Plan(_walk_to_any(region, human, goals)[:1], None, "walk into piece")


# -- controller --------------------------------------------------------------


@dataclass
class StrategyReport:
    outcome: str
    prunings: int
    moves: int
    trace: Trace
    pruning_log: list
    notes: list = field(default_factory=list)
    human_moves: list = field(default_factory=list)

    @property
    def captured(self) -> bool:
        return self.outcome == CAPTURED


class _Runner:
    def __init__(self, emb: Embedding, initial: Configuration, policy, move_cap, prune_cap, generic):
        self.emb = emb
        self.policy = policy
        self.region = AllowedRegion.full(emb)
        self.config = initial
        self.time = Fraction(0)
        self.moves = 0
        self.move_cap = move_cap
        self.prune_cap = prune_cap
        self.generic = generic
        self.trace = Trace(make_header(emb, initial, policy, simulator="strategy"))
        self.notes = []
        self.human_moves = []
        self.normalized = None

    def settle(self) -> bool:
        res = stabilize(self.emb, self.config, self.policy)
        self.config = Configuration(self.config.human, res.puppy)
        if res.legs:
            self.trace.events.append(Event(self.time, CASCADE, self.config.human, self.config.puppy, legs=res.legs))
        return self.finish_if_caught()

    def finish_if_caught(self) -> bool:
        if coincident(self.emb, self.config):
            if not self.trace.events or self.trace.events[-1].kind != CAPTURE:
                self.trace.events.append(Event(self.time, CAPTURE, self.config.human, self.config.puppy))
            self.trace.outcome, self.trace.capture_time = CAPTURED, self.time
            return True
        return False

    def step(self, move) -> bool:
        if self.moves >= self.move_cap:
            raise _Capped
        self.moves += 1
        self.human_moves.append(move)
        self.config, events = simulate_move(self.emb, self.config, move, self.policy, t0=self.time)
        self.trace.events.extend(events)
        self.time = events[-1].time
        return events[-1].kind == CAPTURE and self.finish_if_caught()

    def prune(self, cut, height) -> None:
        before = self.region.measure()
        new = restrict(self.region, cut)
        after = new.measure()
        if not after < before:
            raise StrategyInvariantViolated(f"pruning {cut} did not shrink the region")
        if not new.contains(self.config.puppy):
            raise StrategyInvariantViolated(f"pruning {cut} cuts off the puppy at {self.config.puppy}")
        if not new.contains(self.config.human):
            raise StrategyInvariantViolated(f"pruning {cut} cuts off the human at {self.config.human}")
        if len(self.trace.prunings) >= self.prune_cap:
            raise _Capped
        self.region = new
        self.trace.prunings.append(Pruning(len(self.trace.events), self.time, cut, before, after, new, height))

    def run(self) -> None:
        if self.settle():
            return
        while True:
            top = top_edges(self.region)
            if top is None:
                # a lone vertical segment: the puppy is already collinear with the human
                if self.step_along(path_between(self.region, self.config.human, self.config.puppy)):
                    return
                continue
            m, T = top
            y = _y(self.emb, self.config.human)
            if self.normalized != m:
                if y == m:
                    self.normalized = m
                else:
                    goals = _height_nodes(self.region, self.region.nodes(), m)
                    if self.step_along(_walk_to_any(self.region, self.config.human, goals)):
                        return
                    continue
            ctx = decompose(self.region)
            if self.generic:
                assert_single_run(ctx)
            plan = plan_iteration(ctx, self.config)
            if plan.moves:
                if self.step_along(plan.moves):
                    return
                continue
            if plan.restriction is None:
                raise StrategyInvariantViolated("plan has neither moves nor restriction")
            self.notes.append(plan.note)
            self.prune(plan.restriction, m)

    def step_along(self, moves) -> bool:
        if not moves:
            raise StrategyInvariantViolated("no progress possible")
        return self.step(moves[0])


class _Capped(Exception):
    pass


def default_caps(emb: Embedding) -> tuple[int, int]:
    n = len(emb.edges)
    return 10 * n * n, n


def run_strategy(emb: Embedding, initial: Configuration, policy, *, move_cap=None, prune_cap=None,
                 generic=False) -> StrategyReport:
    """Drive the human until capture or until a safety cap is hit."""
    if not emb.is_connected():
        raise ValueError("strategy needs a connected drawing")
    moves_default, prunes_default = default_caps(emb)
    runner = _Runner(emb, initial, policy,
                     moves_default if move_cap is None else move_cap,
                     prunes_default if prune_cap is None else prune_cap,
                     generic)
    try:
        runner.run()
    except _Capped:
        runner.trace.outcome = CAP_EXCEEDED
    trace = runner.trace
    return StrategyReport(trace.outcome, len(trace.prunings), runner.moves, trace, trace.prunings, runner.notes,
                          runner.human_moves)


def normalize_start(emb: Embedding, region: AllowedRegion, config: Configuration, policy):
    """Walk the human to the top height of ``region``; returns (config', events)."""
    top = top_edges(region)
    if top is None:
        return config, []
    m = top[0]
    goals = _height_nodes(region, region.nodes(), m)
    moves = _walk_to_any(region, config.human, goals)
    res = stabilize(emb, config, policy)
    config = Configuration(config.human, res.puppy)
    events = []
    time = Fraction(0)
    for mv in moves:
        config, evs = simulate_move(emb, config, mv, policy, t0=time)
        events.extend(evs)
        time = evs[-1].time
        if evs[-1].kind == CAPTURE:
            break
    return config, events
