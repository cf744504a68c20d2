"""Property tests over generated drawings."""

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from puppychase.dynamics import decreasing_directions, is_stable, make_policy, stabilize
from puppychase.generate import GeneratorParams, generate
from puppychase.geometry import (
    AboveHeight,
    AllowedRegion,
    Compound,
    Configuration,
    EmptyResult,
    RemoveEdges,
    bridges,
    components,
    dist_sq,
    frac,
    frac_str,
    locate,
    move_end,
    move_start,
    path_between,
    restrict,
)
from puppychase.scenario import Scenario
from puppychase.strategy import check_decomposition, decompose, dominates, run_strategy
from puppychase.verify import brute_bridges, check_trace, domination_oracle, lattice_positions, stability_oracle

PROPS = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])

seeds = st.integers(min_value=0, max_value=10_000)


def drawing(seed, generic=False, max_edges=25):
    return generate(GeneratorParams(seed=seed, min_edges=6, max_edges=max_edges, generic_mode=generic))


@st.composite
def drawn_config(draw, generic=None):
    gen = draw(st.booleans()) if generic is None else generic
    emb = drawing(draw(seeds), gen)
    pts = lattice_positions(emb)
    h = draw(st.sampled_from(pts))
    p = draw(st.sampled_from(pts))
    return emb, Configuration(h, p)


@PROPS
@given(st.fractions())
def test_rational_strings_roundtrip(q):
    assert frac(frac_str(q)) == q


@PROPS
@given(drawn_config())
def test_dist_sq_symmetric(case):
    emb, conf = case
    d = dist_sq(emb, conf.human, conf.puppy)
    assert d == dist_sq(emb, conf.puppy, conf.human) >= 0
    assert (d == 0) == (locate(emb, conf.human) == locate(emb, conf.puppy))


@PROPS
@given(drawn_config())
def test_stability_matches_sampling(case):
    emb, conf = case
    assert is_stable(emb, conf) == stability_oracle(emb, conf, emb.min_gap() / 4)
    assert is_stable(emb, conf) == (decreasing_directions(emb, conf) == [])


@PROPS
@given(drawn_config(), st.sampled_from(["first", "random", "adversarial"]))
def test_stabilize_ends_stable_and_closer(case, name):
    emb, conf = case
    res = stabilize(emb, conf, make_policy(name, 1))
    settled = Configuration(conf.human, res.puppy)
    assert is_stable(emb, settled) or res.captured
    assert dist_sq(emb, conf.human, res.puppy) <= dist_sq(emb, conf.human, conf.puppy)


@PROPS
@given(seeds, st.booleans())
def test_bridges_match_brute_force(seed, generic):
    region = AllowedRegion.full(drawing(seed, generic))
    assert bridges(region) == brute_bridges(region)


@PROPS
@given(seeds, st.data())
def test_restrict_shrinks(seed, data):
    emb = drawing(seed)
    full = AllowedRegion.full(emb)
    ys = sorted({p.y for p in emb.vertices.values()})
    m = data.draw(st.sampled_from(ys))
    drop = data.draw(st.sets(st.sampled_from(sorted(emb.edges)), max_size=3))
    try:
        r = restrict(full, Compound((AboveHeight(m), RemoveEdges(frozenset(drop)))))
    except EmptyResult:
        return
    assert r.measure() <= full.measure()
    assert all(e in full.edges() for e in r.edges())
    assert all(e not in drop for e in r.edges())
    # clipping is idempotent and respects the lower of two heights
    assert restrict(r, AboveHeight(m)) == r
    m2 = data.draw(st.sampled_from(ys))

    def twice():
        return restrict(restrict(full, AboveHeight(m)), AboveHeight(m2))

    try:
        once = restrict(full, AboveHeight(min(m, m2)))
    except EmptyResult:
        with pytest.raises(EmptyResult):
            twice()
    else:
        assert twice() == once


@PROPS
@given(drawn_config())
def test_path_between_is_contiguous(case):
    emb, conf = case
    region = AllowedRegion.full(emb)
    moves = path_between(region, conf.human, conf.puppy)
    if not moves:
        assert locate(emb, conf.human) == locate(emb, conf.puppy)
        return
    assert move_start(emb, moves[0]) == conf.human
    assert move_end(emb, moves[-1]) == conf.puppy
    for a, b in zip(moves, moves[1:]):
        assert move_end(emb, a) == move_start(emb, b)
    for mv in moves:
        lo, hi = region.interval(mv.edge)
        assert lo <= min(mv.start, mv.end) and max(mv.start, mv.end) <= hi


@PROPS
@given(seeds, st.booleans())
def test_decomposition_invariants(seed, generic):
    ctx = decompose(AllowedRegion.full(drawing(seed, generic)))
    check_decomposition(ctx)
    seen = set()
    for c in ctx.comps:
        assert not (c.edges & seen)
        seen |= c.edges
    assert len(components(ctx.clipped, ctx.T)) == len(ctx.comps)


@PROPS
@given(seeds)
def test_domination_matches_flood_fill(seed):
    ctx = decompose(AllowedRegion.full(drawing(seed, max_edges=20)))
    for a in ctx.comps:
        for b in ctx.comps:
            if a is not b:
                assert dominates(ctx.clipped, ctx.m, a, b) == domination_oracle(ctx.clipped, ctx.m, a.edges, b.edges)


@PROPS
@given(drawn_config(), st.sampled_from(["first", "random", "adversarial"]))
def test_strategy_captures_cleanly(case, name):
    emb, conf = case
    report = run_strategy(emb, conf, make_policy(name, 7))
    assert report.outcome == "Captured"
    assert report.prunings <= len(emb.edges)
    assert check_trace(report.trace) == []


@PROPS
@given(drawn_config(), st.sampled_from(["first", "random", "adversarial"]), st.integers(0, 99))
def test_scenario_roundtrip(case, name, seed):
    emb, conf = case
    scn = Scenario(emb, conf, name, seed)
    back = Scenario.from_json(scn.to_json())
    assert back.dumps() == scn.dumps()
    assert back.initial == conf


@settings(max_examples=15, deadline=None)
@given(seeds, st.booleans())
def test_generator_is_reproducible(seed, generic):
    assert drawing(seed, generic).digest() == drawing(seed, generic).digest()
