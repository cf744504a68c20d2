"""Puppy behaviour: stability, instantaneous descent and event-driven coupling to the human.

The puppy moves at infinite speed, so between human waypoints it is either
resting (stable) or sliding along an edge parallel to the human's motion,
holding the perpendicular foot of the human. Every threshold is a linear
equation in time, which keeps every event time an exact rational.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .geometry import (
    AtVertex,
    Configuration,
    Direction,
    ElementaryMove,
    Embedding,
    check_position,
    dist_sq,
    incident_directions,
    locate,
    move_start,
    param_of,
    position,
)

SLIDE_START = "SlideStart"
SLIDE_END = "SlideEnd"
REACH_VERTEX = "ReachVertex"
CASCADE = "DescentCascade"
CAPTURE = "Capture"
WAYPOINT = "Waypoint"
STABILITY_BREAK = "StabilityBreak"
EVENT_KINDS = (SLIDE_START, SLIDE_END, REACH_VERTEX, CASCADE, CAPTURE, WAYPOINT, STABILITY_BREAK)

CAPTURED = "Captured"
RUNNING = "Running"
CAP_EXCEEDED = "CapExceeded"


class CapExceeded(RuntimeError):
    pass


class DiscontinuousPath(ValueError):
    pass


class ImpossibleChase(ValueError):
    pass


class PreconditionViolation(ValueError):
    pass


# -- policies ----------------------------------------------------------------


def _dot(emb, config, d: Direction) -> Fraction:
    return (locate(emb, config.human) - locate(emb, config.puppy)).dot(d.vector)


class FirstPolicy:
    """Steepest decreasing direction; ties broken by edge id, then vector."""

    name = "first"

    def __init__(self, seed: int = 0):
        self.seed = seed

    def fresh(self):
        return type(self)(self.seed)

    def choose(self, emb: Embedding, config: Configuration, dirs: list[Direction]) -> Direction:
        return min(dirs, key=lambda d: (-_dot(emb, config, d), d.edge, d.vector))


class RandomPolicy:
    name = "random"

    def __init__(self, seed: int = 0):
        self.seed = seed
        self._rng = random.Random(seed)

    def fresh(self):
        return type(self)(self.seed)

    def choose(self, emb, config, dirs):
        return self._rng.choice(sorted(dirs))


class AdversarialPolicy:
    """One-step lookahead: take the direction whose whole cascade ends farthest away.

    Cascades after the first leg follow :class:`FirstPolicy`.
    """

    name = "adversarial"

    def __init__(self, seed: int = 0):
        self.seed = seed
        self._follow = FirstPolicy()

    def fresh(self):
        return type(self)(self.seed)

    def choose(self, emb, config, dirs):
        def outcome(d):
            p = edge_local_min(emb, config.puppy, d, config.human)
            end = stabilize(emb, Configuration(config.human, p), self._follow).puppy
            return dist_sq(emb, config.human, end)

        scored = [(-outcome(d), d.edge, d.vector, d) for d in dirs]
        return min(scored)[-1]


POLICIES = {"first": FirstPolicy, "random": RandomPolicy, "adversarial": AdversarialPolicy}


def make_policy(name: str, seed: int = 0):
    try:
        return POLICIES[name](seed)
    except KeyError:
        raise ValueError(f"unknown policy {name!r}; expected one of {sorted(POLICIES)}") from None


# -- instantaneous behaviour -------------------------------------------------


def coincident(emb: Embedding, config: Configuration) -> bool:
    return locate(emb, config.human) == locate(emb, config.puppy)


def decreasing_directions(emb: Embedding, config: Configuration) -> list[Direction]:
    if coincident(emb, config):
        return []
    diff = locate(emb, config.human) - locate(emb, config.puppy)
    return [d for d in incident_directions(emb, config.puppy) if diff.dot(d.vector) > 0]


def is_stable(emb: Embedding, config: Configuration) -> bool:
    return not decreasing_directions(emb, config)


def advance(emb: Embedding, pos, d: Direction, dist: Fraction):
    """Walk ``dist`` along direction ``d`` from ``pos`` (staying on d.edge)."""
    t = param_of(emb, pos, d.edge)
    step = dist / emb.length(d.edge)
    return position(emb, d.edge, t + step if d.vector == emb.axis(d.edge) else t - step)


def room(emb: Embedding, pos, d: Direction) -> Fraction:
    """Length available from ``pos`` to the end of ``d.edge`` in direction ``d``."""
    t = param_of(emb, pos, d.edge)
    frac_left = 1 - t if d.vector == emb.axis(d.edge) else t
    return frac_left * emb.length(d.edge)


def edge_local_min(emb: Embedding, p, d: Direction, h):
    """Closest point to ``h`` on the part of ``d.edge`` ahead of ``p`` in direction ``d``."""
    ahead = (locate(emb, h) - locate(emb, p)).dot(d.vector)
    s = min(max(ahead, Fraction(0)), room(emb, p, d))
    return advance(emb, p, d, s)


@dataclass(frozen=True)
class Leg:
    edge: str
    start: object
    end: object


@dataclass(frozen=True)
class Stabilized:
    puppy: object
    captured: bool
    legs: tuple


def stabilize(emb: Embedding, config: Configuration, policy) -> Stabilized:
    human, puppy = config.human, config.puppy
    legs = []
    limit = len(emb.vertices) + 1
    while True:
        cfg = Configuration(human, puppy)
        dirs = decreasing_directions(emb, cfg)
        if not dirs:
            break
        d = policy.choose(emb, cfg, dirs)
        nxt = edge_local_min(emb, puppy, d, human)
        assert dist_sq(emb, human, nxt) < dist_sq(emb, human, puppy), "descent leg must shrink distance"
        legs.append(Leg(d.edge, puppy, nxt))
        puppy = nxt
        if len(legs) > limit:
            raise CapExceeded(f"descent cascade exceeded {limit} legs")
    return Stabilized(puppy, coincident(emb, Configuration(human, puppy)), tuple(legs))


# -- traces ------------------------------------------------------------------


@dataclass(frozen=True)
class Event:
    time: Fraction
    kind: str
    human: object
    puppy: object
    legs: tuple = ()
    sliding: bool = False


@dataclass
class Pruning:
    """One application of a restriction by the strategy."""

    event_index: int
    time: Fraction
    restriction: object
    measure_before: Fraction
    measure_after: Fraction
    region: object
    height: Fraction | None = None


@dataclass
class Trace:
    header: dict
    events: list = field(default_factory=list)
    prunings: list = field(default_factory=list)
    outcome: str = RUNNING
    capture_time: Fraction | None = None

    @property
    def captured(self) -> bool:
        return self.outcome == CAPTURED


def make_header(emb: Embedding, initial: Configuration, policy, **extra) -> dict:
    head = {
        "embedding_hash": emb.digest(),
        "policy": policy.name,
        "seed": policy.seed,
        "embedding": emb.to_spec(),
        "initial": initial,
    }
    head.update(extra)
    return head


# -- event-driven coupling ---------------------------------------------------


def _human_at(emb, move: ElementaryMove, s: Fraction):
    length = emb.length(move.edge)
    sign = 1 if move.end >= move.start else -1
    return position(emb, move.edge, move.start + sign * s / length)


def _motion_vector(emb, move: ElementaryMove):
    ax = emb.axis(move.edge)
    return ax if move.end > move.start else (-ax[0], -ax[1])


def simulate_move(emb: Embedding, config: Configuration, move: ElementaryMove, policy, *,
                  t0: Fraction = Fraction(0), cap: int = 10_000):
    """Advance one human move exactly.

    Returns ``(config', events)``; a :data:`CAPTURE` event ends the move early.
    The puppy must already be stable in ``config``.
    """
    duration = move.duration(emb)
    w = _motion_vector(emb, move)
    human, puppy = config.human, config.puppy
    events = []

    def emit(kind, s, **kw):
        events.append(Event(t0 + s, kind, human, puppy, **kw))
        if len(events) > cap:
            raise CapExceeded(f"more than {cap} events in one move")

    s = Fraction(0)
    if coincident(emb, Configuration(human, puppy)):
        emit(CAPTURE, s)
        return Configuration(human, puppy), events
    was_sliding = False
    while True:
        P = locate(emb, puppy)
        gap = locate(emb, human) - P
        ahead = [d for d in incident_directions(emb, puppy) if d.vector == w] if duration > s else []
        dw = ahead[0] if ahead else None
        if dw is not None and gap.dot(w) == 0:
            emit(SLIDE_START, s, sliding=True)
            s_end = s + room(emb, puppy, dw)
            if s_end > duration:
                puppy = advance(emb, puppy, dw, duration - s)
                s = duration
                human = _human_at(emb, move, s)
                emit(WAYPOINT, s)
                return Configuration(human, puppy), events
            puppy = advance(emb, puppy, dw, s_end - s)
            s = s_end
            human = _human_at(emb, move, s)
            emit(REACH_VERTEX, s)
            res = stabilize(emb, Configuration(human, puppy), policy)
            if res.legs:
                puppy = res.puppy
                emit(CASCADE, s, legs=res.legs)
            if res.captured:
                emit(CAPTURE, s)
                return Configuration(human, puppy), events
            was_sliding = True
            continue
        if was_sliding:
            emit(SLIDE_END, s)
            was_sliding = False
        assert dw is None or gap.dot(w) < 0, "puppy must be stable between events"
        nxt = duration
        s_break = s - gap.dot(w) if dw is not None else None
        if s_break is not None:
            nxt = min(nxt, s_break)
        s_cap = None
        toward = P - locate(emb, human)
        if (toward.x == 0 or toward.y == 0) and toward.dot(w) > 0:
            s_cap = s + abs(toward.x) + abs(toward.y)
        if s_cap is not None and s_cap <= nxt:
            s = s_cap
            human = _human_at(emb, move, s)
            emit(CAPTURE, s)
            return Configuration(human, puppy), events
        if s_break is not None and s_break < duration:
            s = s_break
            human = _human_at(emb, move, s)
            continue
        s = duration
        human = _human_at(emb, move, s)
        emit(WAYPOINT, s)
        return Configuration(human, puppy), events



def simulate_path(emb: Embedding, initial: Configuration, moves, policy, *, cap: int = 10_000) -> Trace:
    check_position(emb, initial.human)
    check_position(emb, initial.puppy)
    trace = Trace(make_header(emb, initial, policy, simulator="event"))
    _require_shared_component(emb, initial)
    time = Fraction(0)
    config = initial
    res = stabilize(emb, config, policy)
    config = Configuration(config.human, res.puppy)
    if res.legs:
        trace.events.append(Event(time, CASCADE, config.human, config.puppy, legs=res.legs))
    if res.captured:
        trace.events.append(Event(time, CAPTURE, config.human, config.puppy))
        trace.outcome, trace.capture_time = CAPTURED, time
        return trace
    for move in moves:
        if move_start(emb, move) != config.human:
            raise DiscontinuousPath(f"move {move} does not start at {config.human}")
        config, events = simulate_move(emb, config, move, policy, t0=time, cap=cap)
        trace.events.extend(events)
        time = events[-1].time
        if events[-1].kind == CAPTURE:
            trace.outcome, trace.capture_time = CAPTURED, time
            return trace
    return trace


def _require_shared_component(emb, config):
    if emb.is_connected():
        return
    seen = set()
    start = config.human.vertex if isinstance(config.human, AtVertex) else emb.edges[config.human.edge][0]
    todo = [start]
    seen.add(start)
    while todo:
        v = todo.pop()
        for e in emb.incident[v]:
            for w in emb.edges[e]:
                if w not in seen:
                    seen.add(w)
                    todo.append(w)
    target = config.puppy.vertex if isinstance(config.puppy, AtVertex) else emb.edges[config.puppy.edge][0]
    if target not in seen:
        raise ImpossibleChase("human and puppy are on different connected components")


def fixed_step_simulate(emb: Embedding, initial: Configuration, moves, policy, delta) -> Trace:
    """Independent cross-check: step the human by ``delta``, then fully re-stabilize."""
    delta = Fraction(delta)
    if not 0 < delta <= emb.min_gap() / 4:
        raise PreconditionViolation(f"delta {delta} must be positive and at most min-gap/4 = {emb.min_gap() / 4}")
    trace = Trace(make_header(emb, initial, policy, simulator="fixed-step", delta=delta))
    time = Fraction(0)
    human, puppy = initial.human, initial.puppy

    def settle():
        nonlocal puppy
        res = stabilize(emb, Configuration(human, puppy), policy)
        puppy = res.puppy
        trace.events.append(Event(time, CAPTURE if res.captured else WAYPOINT, human, puppy, legs=res.legs))
        if res.captured:
            trace.outcome, trace.capture_time = CAPTURED, time
        return res.captured

    if settle():
        return trace
    for move in moves:
        if move_start(emb, move) != human:
            raise DiscontinuousPath(f"move {move} does not start at {human}")
        duration = move.duration(emb)
        s = Fraction(0)
        while s < duration:
            step = min(delta, duration - s)
            s += step
            time += step
            human = _human_at(emb, move, s)
            if settle():
                return trace
    return trace


def puppy_at(trace: Trace, emb: Embedding, when: Fraction):
    """Puppy's plane location at time ``when`` reconstructed from an event trace."""
    events = trace.events
    if not events:
        return locate(emb, trace.header["initial"].puppy)
    idx = None
    for i, ev in enumerate(events):
        if ev.time <= when:
            idx = i
        else:
            break
    if idx is None:
        return locate(emb, trace.header["initial"].puppy)
    ev = events[idx]
    here = locate(emb, ev.puppy)
    if ev.sliding and idx + 1 < len(events) and events[idx + 1].time > ev.time:
        nxt = events[idx + 1]
        there = locate(emb, nxt.puppy)
        f = (when - ev.time) / (nxt.time - ev.time)
        return type(here)(here.x + f * (there.x - here.x), here.y + f * (there.y - here.y))
    return here
