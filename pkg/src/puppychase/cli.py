"""Command-line entry point: ``puppychase <command> ...``.

Exit codes: 0 ok or captured, 2 invalid input, 3 cap exceeded or no capture,
4 invariant violation or simulator mismatch, 5 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
import time
from fractions import Fraction

from .campaign import POLICY_NAMES, CampaignParams, run_campaign, summarize
from .dynamics import CAPTURED, DiscontinuousPath, PreconditionViolation, fixed_step_simulate, make_policy, simulate_path
from .generate import GenerationFailed, GeneratorParams, generate, random_configuration
from .geometry import EmbeddingError, UnknownId, build_embedding, frac_str
from .scenario import (
    MalformedTraceFile,
    Scenario,
    ScenarioError,
    load_scenario,
    read_trace,
    run_scenario,
    write_trace,
)
from .strategy import GDNotPath, StrategyInvariantViolated, run_strategy
from .verify import MalformedTrace, compare_runs, check_trace

EXIT_OK, EXIT_INVALID, EXIT_NO_CAPTURE, EXIT_VIOLATION, EXIT_IO = 0, 2, 3, 4, 5


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational P/Q: {text!r}") from None


def _load(path, allow_crossings=False) -> Scenario:
    """Read a scenario; a bare drawing (vertices/edges only) is also accepted for validation."""
    try:
        return load_scenario(path, allow_crossings=allow_crossings)
    except OSError as ex:
        raise CliError(EXIT_IO, f"cannot read {path}: {ex.strerror or ex}") from None
    except (EmbeddingError, ScenarioError, UnknownId, ValueError) as ex:
        raise CliError(EXIT_INVALID, f"{type(ex).__name__}: {ex}") from None


def _override(scn: Scenario, args) -> Scenario:
    if getattr(args, "policy", None):
        scn.policy = args.policy
    if getattr(args, "seed", None) is not None:
        scn.seed = args.seed
    if getattr(args, "cap_moves", None) is not None:
        scn.move_cap = args.cap_moves
    try:
        make_policy(scn.policy, scn.seed)
    except ValueError as ex:
        raise CliError(EXIT_INVALID, str(ex)) from None
    return scn


def _write(fn, *a):
    try:
        fn(*a)
    except OSError as ex:
        raise CliError(EXIT_IO, f"cannot write: {ex}") from None


# -- commands ----------------------------------------------------------------


def cmd_validate(args) -> int:
    try:
        with open(args.file, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as ex:
        raise CliError(EXIT_IO, f"cannot read {args.file}: {ex.strerror or ex}") from None
    except json.JSONDecodeError as ex:
        raise CliError(EXIT_INVALID, f"not JSON: {ex}") from None
    if isinstance(data, dict) and "vertices" in data:
        spec = dict(data)
        if args.allow_crossings:
            spec["allow_crossings"] = True
        try:
            emb = build_embedding(spec)
        except (EmbeddingError, UnknownId, ValueError) as ex:
            raise CliError(EXIT_INVALID, f"{type(ex).__name__}: {ex}") from None
    else:
        emb = _load(args.file, args.allow_crossings).embedding
    print(f"valid: {len(emb.vertices)} vertices, {len(emb.edges)} edges, "
          f"{'connected' if emb.is_connected() else 'disconnected'}, hash {emb.digest()[:16]}")
    return EXIT_OK


def cmd_run(args) -> int:
    scn = _override(_load(args.file, args.allow_crossings), args)
    try:
        trace = run_scenario(scn)
    except DiscontinuousPath as ex:
        raise CliError(EXIT_INVALID, f"DiscontinuousPath: {ex}") from None
    except (GDNotPath, StrategyInvariantViolated) as ex:
        raise CliError(EXIT_VIOLATION, f"{type(ex).__name__}: {ex}") from None
    except ValueError as ex:
        raise CliError(EXIT_INVALID, f"{type(ex).__name__}: {ex}") from None
    if args.trace:
        _write(write_trace, trace, args.trace)
    if args.svg:
        from .render import render_trace

        _write(render_trace, trace, args.svg)
    when = "" if trace.capture_time is None else f" at t={frac_str(trace.capture_time)}"
    print(f"{scn.name or os.path.basename(args.file)}: {trace.outcome}{when}; "
          f"{len(trace.events)} events, {len(trace.prunings)} prunings")
    if args.check and scn.mode == "strategy":
        found = check_trace(trace)
        for v in found:
            print(f"violation {v.kind} at t={v.time}: {v.details}")
        if found:
            return EXIT_VIOLATION
    return EXIT_OK if trace.outcome == CAPTURED else EXIT_NO_CAPTURE


def cmd_generate(args) -> int:
    try:
        params = GeneratorParams(seed=args.seed, grid=args.grid, min_edges=args.min_edges,
                                 max_edges=args.max_edges, extra_cycle_prob=args.extra_cycle_prob,
                                 generic_mode=args.generic)
        emb = generate(params)
    except (ValueError, GenerationFailed) as ex:
        raise CliError(EXIT_INVALID, f"{type(ex).__name__}: {ex}") from None
    start = random_configuration(emb, random.Random(args.seed))
    scn = Scenario(emb, start, args.policy or "first", args.seed, generic=args.generic,
                   name=f"generated-{args.seed}")
    text = scn.dumps()
    if args.output:
        try:
            with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as ex:
            raise CliError(EXIT_IO, f"cannot write {args.output}: {ex.strerror or ex}") from None
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_batch(args) -> int:
    policies = tuple(p for p in args.policies.split(",") if p)
    for p in policies:
        if p not in POLICY_NAMES:
            raise CliError(EXIT_INVALID, f"unknown policy {p!r}")
    if args.trace_dir:
        os.makedirs(args.trace_dir, exist_ok=True)
    params = CampaignParams(count=args.n, min_edges=args.min_edges, max_edges=args.max_edges, grid=args.grid,
                            policies=policies, starts=args.starts, seed=args.seed, check=args.check,
                            trace_dir=args.trace_dir)
    t0 = time.perf_counter()
    try:
        rows = run_campaign(params, workers=args.workers)
    except (ValueError, GenerationFailed) as ex:
        raise CliError(EXIT_INVALID, f"{type(ex).__name__}: {ex}") from None
    summary = summarize(rows)
    invalid = []
    for path in args.include:
        try:
            scn = _load(path)
        except CliError as ex:
            invalid.append({"file": path, "error": str(ex)})
            continue
        trace = run_scenario(scn)
        summary["runs"] += 1
        summary["captured"] += trace.outcome == CAPTURED
    summary["invalid_inputs"] = invalid
    report = {"params": {"count": args.n, "min_edges": args.min_edges, "max_edges": args.max_edges,
                         "grid": args.grid, "policies": list(policies), "starts": args.starts, "seed": args.seed},
              "summary": summary, "runs": [r.to_json() for r in rows]}
    if args.report:
        try:
            with open(args.report, "w", encoding="utf-8", newline="\n") as fh:
                json.dump(report, fh, sort_keys=True, indent=1)
                fh.write("\n")
        except OSError as ex:
            raise CliError(EXIT_IO, f"cannot write {args.report}: {ex.strerror or ex}") from None
    if args.svg:
        from .render import render_campaign

        _write(render_campaign, [r.to_json() for r in rows if r.error is None], args.svg)
    print(f"runs {summary['runs']}  captured {summary['captured']}  cap-exceeded {summary['cap_exceeded']}  "
          f"errors {summary['errors']}  violations {summary['violations']}  invalid {len(invalid)}  "
          f"({time.perf_counter() - t0:.1f}s)")
    for item in invalid:
        print(f"invalid input {item['file']}: {item['error']}")
    if summary["violations"] or summary["errors"] or summary["prunings_over_edges"] or summary["measure_failures"]:
        return EXIT_VIOLATION
    if invalid:
        return EXIT_INVALID
    if summary["captured"] != summary["runs"]:
        return EXIT_NO_CAPTURE
    return EXIT_OK


def cmd_render(args) -> int:
    from .render import render_trace

    try:
        trace = read_trace(args.trace)
    except OSError as ex:
        raise CliError(EXIT_IO, f"cannot read {args.trace}: {ex.strerror or ex}") from None
    except (MalformedTraceFile, EmbeddingError) as ex:
        raise CliError(EXIT_INVALID, f"MalformedTrace: {ex}") from None
    _write(render_trace, trace, args.svg)
    print(f"wrote {args.svg}")
    return EXIT_OK


def cmd_compare(args) -> int:
    scn = _override(_load(args.file, args.allow_crossings), args)
    if scn.policy == "random":
        raise CliError(EXIT_INVALID, "compare needs a deterministic policy (first or adversarial)")
    emb = scn.embedding
    delta = args.delta if args.delta is not None else emb.min_gap() / 4
    if scn.mode == "replay":
        moves = scn.moves
    else:
        moves = run_strategy(emb, scn.initial, make_policy(scn.policy, scn.seed), move_cap=scn.move_cap,
                             generic=scn.generic).human_moves
    try:
        stepped = fixed_step_simulate(emb, scn.initial, moves, make_policy(scn.policy, scn.seed), delta)
        if args.trace:
            try:
                exact = read_trace(args.trace)
            except OSError as ex:
                raise CliError(EXIT_IO, f"cannot read {args.trace}: {ex.strerror or ex}") from None
            except MalformedTraceFile as ex:
                raise CliError(EXIT_INVALID, f"MalformedTrace: {ex}") from None
        else:
            exact = simulate_path(emb, scn.initial, moves, make_policy(scn.policy, scn.seed))
        found = compare_runs(exact, stepped, delta)
    except PreconditionViolation as ex:
        raise CliError(EXIT_INVALID, f"PreconditionViolation: {ex}") from None
    except (DiscontinuousPath, MalformedTrace, ValueError) as ex:
        raise CliError(EXIT_INVALID, f"{type(ex).__name__}: {ex}") from None
    for v in found[:20]:
        print(f"{v.kind} at t={v.time}: {v.details}")
    print(f"compared {len(stepped.events)} samples at delta={frac_str(Fraction(delta))}: "
          f"{'agree' if not found else f'{len(found)} mismatches'} ({exact.outcome} / {stepped.outcome})")
    return EXIT_VIOLATION if found else EXIT_OK


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="puppychase", description="Puppy pursuit on orthogonal drawings.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a scenario or drawing file")
    p.add_argument("file")
    p.add_argument("--allow-crossings", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="run a scenario (strategy or replay)")
    p.add_argument("file")
    p.add_argument("--trace", metavar="PATH")
    p.add_argument("--svg", metavar="PATH")
    p.add_argument("--check", action="store_true", help="run the trace checker, exit 4 on any violation")
    p.add_argument("--policy", choices=POLICY_NAMES)
    p.add_argument("--seed", type=int)
    p.add_argument("--cap-moves", type=int)
    p.add_argument("--allow-crossings", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("generate", help="write a random scenario")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", type=int, default=8)
    p.add_argument("--min-edges", type=int, default=10)
    p.add_argument("--max-edges", type=int, default=20)
    p.add_argument("--extra-cycle-prob", type=float, default=0.3)
    p.add_argument("--generic", action="store_true", help="give every horizontal chain its own height")
    p.add_argument("--policy", choices=POLICY_NAMES)
    p.add_argument("-o", "--output", metavar="PATH")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("batch", help="run a campaign of generated scenarios")
    p.add_argument("--n", type=int, default=300)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", type=int, default=8)
    p.add_argument("--min-edges", type=int, default=10)
    p.add_argument("--max-edges", type=int, default=50)
    p.add_argument("--policies", default=",".join(POLICY_NAMES))
    p.add_argument("--starts", type=int, default=3)
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.add_argument("--check", action="store_true")
    p.add_argument("--report", metavar="PATH")
    p.add_argument("--svg", metavar="PATH")
    p.add_argument("--trace-dir", metavar="DIR")
    p.add_argument("--include", action="append", default=[], metavar="FILE",
                   help="extra scenario file to run alongside the generated ones")
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("render", help="draw a trace file as SVG")
    p.add_argument("trace")
    p.add_argument("--svg", metavar="PATH", required=True)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("compare", help="cross-check the event-driven and fixed-step simulators")
    p.add_argument("file")
    p.add_argument("--delta", type=_fraction, metavar="P/Q")
    p.add_argument("--trace", metavar="PATH", help="use this event-driven trace instead of recomputing it")
    p.add_argument("--policy", choices=POLICY_NAMES)
    p.add_argument("--seed", type=int)
    p.add_argument("--cap-moves", type=int)
    p.add_argument("--allow-crossings", action="store_true")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as ex:
        print(f"error: {ex}", file=sys.stderr)
        return ex.code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
