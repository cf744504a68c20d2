"""Batch campaigns over generated drawings.

Each job is one generated drawing run against every policy from several
random starts. Jobs are independent, so they fan out to a process pool and
are reassembled in job order, which keeps reports identical across worker
counts.
"""

from __future__ import annotations

import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .dynamics import make_policy
from .generate import GeneratorParams, generate, random_configuration
from .geometry import AllowedRegion
from .scenario import write_trace
from .strategy import StrategyInvariantViolated, GDNotPath, run_strategy
from .verify import check_trace

POLICY_NAMES = ("first", "random", "adversarial")


@dataclass(frozen=True)
class CampaignParams:
    count: int
    min_edges: int = 10
    max_edges: int = 50
    grid: int = 8
    extra_cycle_prob: float = 0.3
    policies: tuple = POLICY_NAMES
    starts: int = 3
    seed: int = 0
    check: bool = True
    trace_dir: str | None = None

    def generator(self, i: int) -> GeneratorParams:
        return GeneratorParams(seed=self.seed + i, grid=self.grid, min_edges=self.min_edges,
                               max_edges=self.max_edges, extra_cycle_prob=self.extra_cycle_prob,
                               generic_mode=i % 2 == 1)


@dataclass
class RunRow:
    job: int
    start: int
    policy: str
    edges: int
    generic: bool
    outcome: str
    prunings: int
    moves: int
    measure_ok: bool
    violations: list = field(default_factory=list)
    error: str | None = None

    def to_json(self) -> dict:
        return {
            "job": self.job, "start": self.start, "policy": self.policy, "edges": self.edges,
            "generic": self.generic, "outcome": self.outcome, "prunings": self.prunings, "moves": self.moves,
            "measure_ok": self.measure_ok, "violations": self.violations, "error": self.error,
        }


def run_job(params: CampaignParams, i: int) -> list[RunRow]:
    gen = params.generator(i)
    emb = generate(gen)
    rng = random.Random(gen.seed * 7919 + 17)
    starts = [random_configuration(emb, rng) for _ in range(params.starts)]
    rows = []
    for k, start in enumerate(starts):
        for name in params.policies:
            policy = make_policy(name, gen.seed * 100 + k)
            try:
                rep = run_strategy(emb, start, policy, generic=gen.generic_mode)
            except (GDNotPath, StrategyInvariantViolated, AssertionError) as ex:
                rows.append(RunRow(i, k, name, len(emb.edges), gen.generic_mode, "Error", 0, 0, False,
                                   error=f"{type(ex).__name__}: {ex}"))
                continue
            measures = [p.measure_before for p in rep.pruning_log] + [p.measure_after for p in rep.pruning_log[-1:]]
            ok = all(b < a for a, b in zip(measures, measures[1:])) and (
                not rep.pruning_log or rep.pruning_log[0].measure_before == AllowedRegion.full(emb).measure())
            found = [f"{v.kind}@{v.time}: {v.details}" for v in check_trace(rep.trace)] if params.check else []
            if params.trace_dir:
                write_trace(rep.trace, os.path.join(params.trace_dir, f"run-{i:04d}-{k}-{name}.jsonl"))
            rows.append(RunRow(i, k, name, len(emb.edges), gen.generic_mode, rep.outcome, rep.prunings,
                               rep.moves, ok, found))
    return rows


def _job(args):
    return run_job(*args)


def run_campaign(params: CampaignParams, workers: int = 1) -> list[RunRow]:
    jobs = [(params, i) for i in range(params.count)]
    if workers <= 1 or len(jobs) <= 1:
        batches = [_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    return [row for batch in batches for row in batch]


def summarize(rows: list[RunRow]) -> dict:
    runs = len(rows)
    captured = sum(r.outcome == "Captured" for r in rows)
    over = [r for r in rows if r.prunings > r.edges]
    return {
        "runs": runs,
        "captured": captured,
        "capture_rate": str(Fraction(captured, runs)) if runs else "1",
        "cap_exceeded": sum(r.outcome == "CapExceeded" for r in rows),
        "errors": sum(r.error is not None for r in rows),
        "violations": sum(len(r.violations) for r in rows),
        "prunings_over_edges": len(over),
        "measure_failures": sum(not r.measure_ok for r in rows if r.error is None),
        "max_prunings": max((r.prunings for r in rows), default=0),
    }


__all__ = ["CampaignParams", "RunRow", "run_job", "run_campaign", "summarize", "POLICY_NAMES"]
