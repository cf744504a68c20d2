"""Random connected, crossing-free orthogonal embeddings on an integer grid."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .geometry import AtVertex, Configuration, Embedding, OnEdge, build_embedding, frac_str


class GenerationFailed(RuntimeError):
    pass


@dataclass(frozen=True)
class GeneratorParams:
    seed: int = 0
    grid: int = 8
    min_edges: int = 10
    max_edges: int = 20
    extra_cycle_prob: float = 0.3
    generic_mode: bool = False

    def __post_init__(self):
        if self.min_edges < 1 or self.max_edges < self.min_edges:
            raise ValueError("need 1 <= min_edges <= max_edges")
        if self.grid < 2:
            raise ValueError("grid must be at least 2")


def _grid_tree(rng: random.Random, n: int, k: int):
    """Random tree with ``k`` unit edges grown from a random grid point."""
    start = (rng.randrange(n), rng.randrange(n))
    nodes = {start}
    edges = []
    frontier = []

    def push(p):
        x, y = p
        for q in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            if 0 <= q[0] < n and 0 <= q[1] < n:
                frontier.append((p, q))

    push(start)
    while len(edges) < k and frontier:
        i = rng.randrange(len(frontier))
        frontier[i], frontier[-1] = frontier[-1], frontier[i]
        p, q = frontier.pop()
        if q in nodes:
            continue
        nodes.add(q)
        edges.append((p, q))
        push(q)
    return nodes, edges


def _chains(edges):
    """Maximal horizontal chains as sets of grid points."""
    parent = {}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for p, q in edges:
        if p[1] != q[1]:
            continue
        for a in (p, q):
            parent.setdefault(a, a)
        ra, rb = find(p), find(q)
        if ra != rb:
            parent[rb] = ra
    groups = {}
    for a in parent:
        groups.setdefault(find(a), set()).add(a)
    return sorted((sorted(g) for g in groups.values()), key=lambda g: g[0])


def generate(params: GeneratorParams, retries: int = 50) -> Embedding:
    rng = random.Random(params.seed)
    for _ in range(retries):
        target = rng.randint(params.min_edges, params.max_edges)
        n = params.grid
        while n * n - 1 < target:
            n += 1
        tree_size = max(1, round(target / (1 + params.extra_cycle_prob)))
        tree_size = min(tree_size, target)
        nodes, edges = _grid_tree(rng, n, tree_size)
        have = {frozenset(e) for e in edges}
        spare = []
        for p in sorted(nodes):
            for q in ((p[0] + 1, p[1]), (p[0], p[1] + 1)):
                if q in nodes and frozenset((p, q)) not in have:
                    spare.append((p, q))
        rng.shuffle(spare)
        for p, q in spare:
            if len(edges) >= target:
                break
            if rng.random() < params.extra_cycle_prob:
                edges.append((p, q))
                have.add(frozenset((p, q)))
        if not params.min_edges <= len(edges) <= params.max_edges:
            continue
        lift = {p: Fraction(0) for p in nodes}
        if params.generic_mode:
            chains = _chains(edges)
            offsets = list(range(1, len(chains) + 1))
            rng.shuffle(offsets)
            for chain, k in zip(chains, offsets):
                for p in chain:
                    lift[p] = Fraction(k, 2 * (len(chains) + 1))
        used = sorted(nodes)
        names = {p: f"v{i:03d}" for i, p in enumerate(used)}
        spec = {
            "vertices": {names[p]: [frac_str(Fraction(p[0])), frac_str(p[1] + lift[p])] for p in used},
            "edges": {f"e{i:03d}": [names[p], names[q]] for i, (p, q) in enumerate(edges)},
            "allow_crossings": False,
        }
        return build_embedding(spec, require_connected=True)
    raise GenerationFailed(f"no embedding with {params.min_edges}..{params.max_edges} edges after {retries} tries")


def random_position(emb: Embedding, rng: random.Random):
    """A vertex or an edge midpoint, uniformly among those choices."""
    choices = [AtVertex(v) for v in sorted(emb.vertices)] + [OnEdge(e, Fraction(1, 2)) for e in sorted(emb.edges)]
    return rng.choice(choices)


def random_configuration(emb: Embedding, rng: random.Random) -> Configuration:
    while True:
        h, p = random_position(emb, rng), random_position(emb, rng)
        if h != p:
            return Configuration(h, p)
