"""Scenario files and JSONL traces.

Rationals are written as ``"p/q"`` strings (integers without the ``/1``), so no
float ever reaches a file. Every JSON document is dumped with sorted keys,
which keeps files byte-stable across runs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .dynamics import (
    CAP_EXCEEDED,
    CAPTURED,
    EVENT_KINDS,
    RUNNING,
    CapExceeded,
    Event,
    Leg,
    Pruning,
    Trace,
    make_header,
    make_policy,
    simulate_path,
)
from .geometry import (
    AboveHeight,
    AllowedRegion,
    AtVertex,
    Compound,
    Configuration,
    ElementaryMove,
    Embedding,
    KeepComponent,
    OnEdge,
    Point,
    RemoveEdges,
    UnknownId,
    build_embedding,
    check_position,
    frac,
    frac_str,
    locate,
    position,
)
from .strategy import run_strategy


class ScenarioError(ValueError):
    pass


# -- values ------------------------------------------------------------------


def pos_to_json(pos) -> dict:
    if isinstance(pos, AtVertex):
        return {"vertex": pos.vertex}
    return {"edge": pos.edge, "t": frac_str(pos.t)}


def pos_from_json(emb: Embedding, data) -> AtVertex | OnEdge:
    """Accepts ``{"vertex": v}``, ``{"edge": e, "t": q}`` or ``{"point": [x, y]}``."""
    if not isinstance(data, dict):
        raise ScenarioError(f"position must be an object, got {data!r}")
    if "vertex" in data:
        pos = AtVertex(data["vertex"])
    elif "edge" in data:
        pos = position(emb, data["edge"], frac(data["t"]))
    elif "point" in data:
        return point_position(emb, Point(frac(data["point"][0]), frac(data["point"][1])))
    else:
        raise ScenarioError(f"unrecognised position {data!r}")
    check_position(emb, pos)
    return pos


def point_position(emb: Embedding, pt: Point):
    """The position whose image is ``pt``; vertices win, then the smallest edge id."""
    for v in sorted(emb.vertices):
        if emb.vertices[v] == pt:
            return AtVertex(v)
    for e in sorted(emb.edges):
        a, b = emb.point_at(e, Fraction(0)), emb.point_at(e, Fraction(1))
        if a.x == b.x == pt.x and min(a.y, b.y) < pt.y < max(a.y, b.y):
            return position(emb, e, (pt.y - a.y) / (b.y - a.y))
        if a.y == b.y == pt.y and min(a.x, b.x) < pt.x < max(a.x, b.x):
            return position(emb, e, (pt.x - a.x) / (b.x - a.x))
    raise ScenarioError(f"point ({frac_str(pt.x)}, {frac_str(pt.y)}) is not on the drawing")


def config_to_json(config: Configuration) -> dict:
    return {"human": pos_to_json(config.human), "puppy": pos_to_json(config.puppy)}


def config_from_json(emb: Embedding, data: dict) -> Configuration:
    return Configuration(pos_from_json(emb, data["human"]), pos_from_json(emb, data["puppy"]))


def move_to_json(move: ElementaryMove) -> list:
    return [move.edge, frac_str(move.start), frac_str(move.end)]


def move_from_json(emb: Embedding, data) -> ElementaryMove:
    e, a, b = data
    if e not in emb.edges:
        raise UnknownId(e)
    a, b = frac(a), frac(b)
    if not (0 <= a <= 1 and 0 <= b <= 1):
        raise ScenarioError(f"move parameters must lie in [0, 1]: {data!r}")
    return ElementaryMove(e, a, b)


def restriction_to_json(cut) -> dict:
    if isinstance(cut, AboveHeight):
        return {"above_height": frac_str(cut.m)}
    if isinstance(cut, RemoveEdges):
        return {"remove_edges": sorted(cut.edges)}
    if isinstance(cut, KeepComponent):
        return {"keep_component": sorted(cut.edges)}
    if isinstance(cut, Compound):
        return {"compound": [restriction_to_json(p) for p in cut.parts]}
    raise TypeError(f"unknown restriction {cut!r}")


def restriction_from_json(data: dict):
    (key, value), = data.items()
    if key == "above_height":
        return AboveHeight(frac(value))
    if key == "remove_edges":
        return RemoveEdges(frozenset(value))
    if key == "keep_component":
        return KeepComponent(frozenset(value))
    if key == "compound":
        return Compound(tuple(restriction_from_json(p) for p in value))
    raise ScenarioError(f"unknown restriction {key!r}")


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


# -- scenarios ----------------------------------------------------------------


@dataclass
class Scenario:
    embedding: Embedding
    initial: Configuration
    policy: str = "first"
    seed: int = 0
    mode: str = "strategy"
    moves: list = field(default_factory=list)
    move_cap: int | None = None
    prune_cap: int | None = None
    generic: bool = False
    name: str = ""

    def __post_init__(self):
        if self.mode not in ("strategy", "replay"):
            raise ScenarioError(f"mode must be strategy or replay, not {self.mode!r}")
        make_policy(self.policy, self.seed)

    def to_json(self) -> dict:
        out = {
            "name": self.name,
            "embedding": self.embedding.to_spec(),
            "human": pos_to_json(self.initial.human),
            "puppy": pos_to_json(self.initial.puppy),
            "policy": {"name": self.policy, "seed": self.seed},
            "mode": self.mode,
            "generic": self.generic,
            "caps": {"moves": self.move_cap, "prunings": self.prune_cap},
        }
        if self.mode == "replay":
            out["moves"] = [move_to_json(m) for m in self.moves]
        return out

    @classmethod
    def from_json(cls, data: dict, *, allow_crossings: bool = False) -> "Scenario":
        try:
            spec = dict(data["embedding"])
            if allow_crossings:
                spec["allow_crossings"] = True
            emb = build_embedding(spec)
            initial = Configuration(pos_from_json(emb, data["human"]), pos_from_json(emb, data["puppy"]))
            pol = data.get("policy", {"name": "first"})
            caps = data.get("caps") or {}
            return cls(
                embedding=emb,
                initial=initial,
                policy=pol.get("name", "first"),
                seed=int(pol.get("seed", 0)),
                mode=data.get("mode", "strategy"),
                moves=[move_from_json(emb, m) for m in data.get("moves", [])],
                move_cap=caps.get("moves"),
                prune_cap=caps.get("prunings"),
                generic=bool(data.get("generic", False)),
                name=data.get("name", ""),
            )
        except KeyError as ex:
            if isinstance(ex, UnknownId):
                raise
            raise ScenarioError(f"scenario is missing {ex}") from None

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=1) + "\n"


def load_scenario(path, *, allow_crossings: bool = False) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as ex:
            raise ScenarioError(f"{path}: not a JSON document ({ex})") from None
    return Scenario.from_json(data, allow_crossings=allow_crossings)


def save_scenario(scn: Scenario, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(scn.dumps())


def run_scenario(scn: Scenario) -> Trace:
    """Run a scenario to completion; the outcome is recorded on the trace."""
    policy = make_policy(scn.policy, scn.seed)
    if scn.mode == "replay":
        cap = scn.move_cap if scn.move_cap is not None else 10 * len(scn.embedding.edges) ** 2
        try:
            return simulate_path(scn.embedding, scn.initial, scn.moves, policy, cap=cap)
        except CapExceeded:
            return Trace(make_header(scn.embedding, scn.initial, policy, simulator="event"), outcome=CAP_EXCEEDED)
    report = run_strategy(scn.embedding, scn.initial, policy, move_cap=scn.move_cap,
                          prune_cap=scn.prune_cap, generic=scn.generic)
    return report.trace


# -- traces ----------------------------------------------------------------


class MalformedTraceFile(ValueError):
    pass


def _header_to_json(header: dict) -> dict:
    out = {}
    for k, v in header.items():
        if isinstance(v, Configuration):
            v = config_to_json(v)
        elif isinstance(v, Fraction):
            v = frac_str(v)
        out[k] = v
    return out


def _event_to_json(ev: Event) -> dict:
    out = {
        "type": "event",
        "time": frac_str(ev.time),
        "kind": ev.kind,
        "human": pos_to_json(ev.human),
        "puppy": pos_to_json(ev.puppy),
    }
    if ev.legs:
        out["legs"] = [[leg.edge, pos_to_json(leg.start), pos_to_json(leg.end)] for leg in ev.legs]
    if ev.sliding:
        out["sliding"] = True
    return out


def _pruning_to_json(p: Pruning) -> dict:
    return {
        "type": "prune",
        "event_index": p.event_index,
        "time": frac_str(p.time),
        "restriction": restriction_to_json(p.restriction),
        "measure_before": frac_str(p.measure_before),
        "measure_after": frac_str(p.measure_after),
        "height": None if p.height is None else frac_str(p.height),
        "region": p.region.to_json(),
    }


def trace_lines(trace: Trace) -> list[str]:
    lines = [dumps({"type": "header", **_header_to_json(trace.header)})]
    pending = list(trace.prunings)
    for i, ev in enumerate(trace.events):
        while pending and pending[0].event_index <= i:
            lines.append(dumps(_pruning_to_json(pending.pop(0))))
        lines.append(dumps(_event_to_json(ev)))
    for p in pending:
        lines.append(dumps(_pruning_to_json(p)))
    cap = None if trace.capture_time is None else frac_str(trace.capture_time)
    lines.append(dumps({"type": "outcome", "outcome": trace.outcome, "capture_time": cap}))
    return lines


def write_trace(trace: Trace, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in trace_lines(trace):
            fh.write(line + "\n")


def parse_trace(lines) -> Trace:
    """Rebuild a trace from JSONL lines; the header must carry the embedding."""
    rows = []
    for n, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            rows.append(json.loads(line))
        except json.JSONDecodeError as ex:
            raise MalformedTraceFile(f"line {n}: {ex}") from None
    if not rows or rows[0].get("type") != "header":
        raise MalformedTraceFile("trace must start with a header line")
    if rows[-1].get("type") != "outcome":
        raise MalformedTraceFile("trace must end with an outcome line")
    head = dict(rows[0])
    del head["type"]
    if "embedding" not in head:
        raise MalformedTraceFile("header lacks the embedding")
    try:
        emb = build_embedding(head["embedding"])
        if "initial" in head:
            head["initial"] = config_from_json(emb, head["initial"])
        if "delta" in head:
            head["delta"] = frac(head["delta"])
        trace = Trace(head)
        for row in rows[1:-1]:
            kind = row.get("type")
            if kind == "event":
                if row["kind"] not in EVENT_KINDS:
                    raise MalformedTraceFile(f"unknown event kind {row['kind']!r}")
                legs = tuple(Leg(e, pos_from_json(emb, a), pos_from_json(emb, b)) for e, a, b in row.get("legs", []))
                trace.events.append(Event(frac(row["time"]), row["kind"], pos_from_json(emb, row["human"]),
                                          pos_from_json(emb, row["puppy"]), legs, bool(row.get("sliding", False))))
            elif kind == "prune":
                height = row.get("height")
                trace.prunings.append(Pruning(
                    int(row["event_index"]), frac(row["time"]), restriction_from_json(row["restriction"]),
                    frac(row["measure_before"]), frac(row["measure_after"]),
                    AllowedRegion.from_json(emb, row["region"]), None if height is None else frac(height)))
            else:
                raise MalformedTraceFile(f"unexpected line type {kind!r}")
        end = rows[-1]
        if end.get("outcome") not in (CAPTURED, RUNNING, CAP_EXCEEDED):
            raise MalformedTraceFile(f"unknown outcome {end.get('outcome')!r}")
        trace.outcome = end["outcome"]
        trace.capture_time = None if end.get("capture_time") is None else frac(end["capture_time"])
    except MalformedTraceFile:
        raise
    except (KeyError, TypeError, ValueError) as ex:
        raise MalformedTraceFile(f"bad trace content: {type(ex).__name__}: {ex}") from None
    return trace


def read_trace(path) -> Trace:
    with open(path, encoding="utf-8") as fh:
        return parse_trace(fh.readlines())


def trace_embedding(trace: Trace) -> Embedding:
    return build_embedding(trace.header["embedding"])


__all__ = [
    "Scenario", "ScenarioError", "MalformedTraceFile", "load_scenario", "save_scenario", "run_scenario",
    "pos_to_json", "pos_from_json", "point_position", "config_to_json", "config_from_json",
    "move_to_json", "move_from_json", "restriction_to_json", "restriction_from_json",
    "trace_lines", "write_trace", "parse_trace", "read_trace", "trace_embedding", "locate",
]
