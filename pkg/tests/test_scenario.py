import json
from fractions import Fraction

import pytest

from puppychase import gallery_names, gallery_path
from puppychase.dynamics import CAPTURED
from puppychase.geometry import (
    AboveHeight,
    AtVertex,
    Compound,
    Configuration,
    ElementaryMove,
    KeepComponent,
    OnEdge,
    Point,
    RemoveEdges,
    UnknownId,
)
from puppychase.scenario import (
    MalformedTraceFile,
    Scenario,
    ScenarioError,
    load_scenario,
    parse_trace,
    point_position,
    pos_from_json,
    pos_to_json,
    read_trace,
    restriction_from_json,
    restriction_to_json,
    run_scenario,
    save_scenario,
    trace_lines,
    write_trace,
)


def test_position_codec(f1):
    for pos in (AtVertex("b"), OnEdge("e2", Fraction(1, 3))):
        assert pos_from_json(f1, json.loads(json.dumps(pos_to_json(pos)))) == pos


def test_point_lookup(f1):
    assert pos_from_json(f1, {"point": ["1", "2"]}) == OnEdge("e2", Fraction(1, 2))
    assert point_position(f1, Point(0, 2)) == AtVertex("b")
    with pytest.raises(ValueError):
        pos_from_json(f1, {"point": ["1", "1"]})


def test_unknown_ids_rejected(f1):
    with pytest.raises(UnknownId):
        pos_from_json(f1, {"vertex": "zz"})


def test_restriction_codec():
    cut = Compound((AboveHeight(Fraction(7, 2)), KeepComponent(frozenset({"a", "b"})), RemoveEdges(frozenset({"c"}))))
    assert restriction_from_json(json.loads(json.dumps(restriction_to_json(cut)))) == cut


def test_scenario_roundtrip(tmp_path, f3):
    scn = Scenario(f3, Configuration(AtVertex("tl"), AtVertex("bl")), mode="replay",
                   moves=[ElementaryMove("top", Fraction(0), Fraction(1))], name="rails")
    path = tmp_path / "s.json"
    save_scenario(scn, path)
    back = load_scenario(path)
    assert back.dumps() == scn.dumps()
    assert back.moves == scn.moves


def test_scenario_errors(tmp_path):
    with pytest.raises(ScenarioError):
        Scenario.from_json({"human": {"vertex": "a"}})
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ScenarioError):
        load_scenario(bad)


def test_bad_mode(f1):
    with pytest.raises(ScenarioError):
        Scenario(f1, Configuration(AtVertex("a"), AtVertex("d")), mode="chase")


def test_gallery_loads_and_captures():
    assert set(gallery_names()) >= {"f1_staple", "f2_five_components", "f3_two_rails", "fig1_stable",
                                    "fig1_unstable", "double_loop"}
    for name in gallery_names():
        scn = load_scenario(gallery_path(name))
        trace = run_scenario(scn)
        assert trace.outcome == CAPTURED, name


def test_trace_roundtrip(tmp_path):
    trace = run_scenario(load_scenario(gallery_path("f2_five_components")))
    path = tmp_path / "t.jsonl"
    write_trace(trace, path)
    back = read_trace(path)
    assert back.events == trace.events
    assert [p.region for p in back.prunings] == [p.region for p in trace.prunings]
    assert trace_lines(back) == trace_lines(trace)
    assert path.read_text().splitlines() == trace_lines(trace)


def test_trace_files_are_byte_stable(tmp_path):
    scn = load_scenario(gallery_path("f2_five_components"))
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    write_trace(run_scenario(scn), a)
    write_trace(run_scenario(scn), b)
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize("lines", [
    [],
    ["{"],
    ['{"type":"event"}'],
    ['{"type":"header"}', '{"type":"outcome","outcome":"Captured","capture_time":null}'],
])
def test_malformed_trace_files(lines):
    with pytest.raises(MalformedTraceFile):
        parse_trace(lines)


def test_corrupt_event_kind(tmp_path):
    lines = trace_lines(run_scenario(load_scenario(gallery_path("f1_staple"))))
    row = json.loads(lines[1])
    row["kind"] = "Teleport"
    lines[1] = json.dumps(row)
    with pytest.raises(MalformedTraceFile):
        parse_trace(lines)


def test_truncated_trace(tmp_path):
    lines = trace_lines(run_scenario(load_scenario(gallery_path("f1_staple"))))
    with pytest.raises(MalformedTraceFile):
        parse_trace(lines[:-1])
