"""Benchmark corpora, suite execution, and report rendering.

Benchmark file format (UTF-8, '#' lines ignored): one record per line with
tab-separated fields

    id  provided  in1  out1  in2  out2  in3  out3  in4  out4  in5  out5  [program]

Fields use the dataset escaping for tabs/newlines/backslashes. `provided` is
how many leading pairs the solver sees; the remaining pairs only validate the
returned program. A present reference program must be consistent with all
five pairs.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

import numpy as np

from .datagen import GenConfig, escape_field, generate_instances, unescape_field
from .dictionaries import data_path
from .dsl import Grammar, default_grammar, parse_program, print_program
from .errors import DataFormatError
from .interp import ExamplePair, consistent
from .r3nn import R3NN
from .search import neural_search, uniform_search

PAIRS_PER_BENCHMARK = 5
DEFAULT_PROVIDED = 2


@dataclass(frozen=True)
class Benchmark:
    id: str
    pairs: tuple[ExamplePair, ...]
    provided: int = DEFAULT_PROVIDED
    reference_program: str | None = None

    def examples(self) -> list[ExamplePair]:
        return list(self.pairs[:self.provided])


def load_benchmarks(path: Path | str, grammar: Grammar | None = None) -> list[Benchmark]:
    """Parse and validate a benchmark file; inconsistent references fail."""
    import warnings

    grammar = grammar or default_grammar()
    path = Path(path)
    out: list[Benchmark] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            fields = [unescape_field(f) for f in line.split("\t")]
            want = 2 + 2 * PAIRS_PER_BENCHMARK
            if len(fields) not in (want, want + 1):
                raise DataFormatError(
                    f"{path}:{lineno}: expected {want} or {want + 1} fields, "
                    f"got {len(fields)}")
            bench_id = fields[0]
            try:
                provided = int(fields[1])
            except ValueError as exc:
                raise DataFormatError(f"{path}:{lineno}: bad provided count") from exc
            pairs = tuple(ExamplePair(fields[i], fields[i + 1])
                          for i in range(2, 2 + 2 * PAIRS_PER_BENCHMARK, 2))
            if not 1 <= provided <= len(pairs):
                raise DataFormatError(f"{path}:{lineno}: provided out of range")
            program_text = fields[want] if len(fields) > want else ""
            reference = program_text or None
            if reference is not None:
                program = parse_program(reference, grammar)
                if not consistent(program, list(pairs), grammar.catalog):
                    raise DataFormatError(
                        f"{path}:{lineno}: reference program is inconsistent "
                        f"with the pairs of benchmark {bench_id!r}")
            out.append(Benchmark(bench_id, pairs, provided, reference))
    if not out:
        warnings.warn(f"benchmark file {path} contains no benchmarks", stacklevel=2)
    return out


def save_benchmarks(benches: list[Benchmark], path: Path | str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for b in benches:
            fields = [b.id, str(b.provided)]
            for p in b.pairs:
                fields.extend((p.input, p.output))
            fields.append(b.reference_program or "")
            fh.write("\t".join(escape_field(f) for f in fields) + "\n")


SYNTHETIC_SUITES = {
    "synthetic-regex6": dict(families=("regex",), max_size=6, n=50, seed=1101),
    "synthetic-full8": dict(families=("regex", "lookup", "transform"),
                            max_size=8, n=30, seed=1103),
}


def builtin_suite(name: str, grammar: Grammar | None = None) -> list[Benchmark]:
    if name == "paper-figures":
        return load_benchmarks(data_path() / "benchmarks" / "paper_figures.tsv",
                               grammar)
    if name in SYNTHETIC_SUITES:
        spec = SYNTHETIC_SUITES[name]
        cfg = GenConfig(max_size=spec["max_size"], families=spec["families"],
                        seed=spec["seed"])
        instances = generate_instances(spec["n"], cfg)
        return [Benchmark(f"{name}-{i:03d}", inst.pairs, PAIRS_PER_BENCHMARK,
                          print_program(inst.program))
                for i, inst in enumerate(instances)]
    raise DataFormatError(f"unknown suite {name!r}; expected 'paper-figures', "
                          f"one of {sorted(SYNTHETIC_SUITES)}, or a file path")


def resolve_suite(name_or_path: str, grammar: Grammar | None = None) -> list[Benchmark]:
    if name_or_path == "paper-figures" or name_or_path in SYNTHETIC_SUITES:
        return builtin_suite(name_or_path, grammar)
    return load_benchmarks(name_or_path, grammar)


# ---------------------------------------------------------------------------
# suite execution

@dataclass
class BenchRow:
    id: str
    found_at: int | None        # draw index of the first consistent program
    generalized: bool           # returned program reproduces all pairs
    program: str | None
    draws: int
    wall_s: float

    def solved_at(self, k: int) -> bool:
        return self.found_at is not None and self.found_at <= k and self.generalized


@dataclass
class RunReport:
    suite: str
    method: str
    ks: tuple[int, ...]
    seed: int
    rows: list[BenchRow] = field(default_factory=list)
    # evaluation protocol: how many pairs each benchmark showed the solver
    provided_counts: dict[int, int] = field(default_factory=dict)

    def solve_rate(self, k: int) -> float:
        if not self.rows:
            return 0.0
        return sum(1 for r in self.rows if r.solved_at(k)) / len(self.rows)

    def solved_ids(self, k: int) -> set[str]:
        return {r.id for r in self.rows if r.solved_at(k)}


def run_suite(benchmarks: list[Benchmark], method: str,
              ks: tuple[int, ...] = (10, 50, 100), seed: int = 0,
              model: R3NN | None = None,
              grammar: Grammar | None = None,
              suite_name: str = "suite",
              max_size: int | None = None,
              budget_s: float | None = None) -> RunReport:
    """Solve every benchmark from its provided pairs and validate on all five.

    One draw stream of max(ks) samples serves every k, so the solved sets are
    cumulative across ks by construction. Per-benchmark rng streams depend
    only on (seed, benchmark index): results do not change if benchmarks run
    in parallel.
    """
    grammar = grammar or (model.grammar if model else default_grammar())
    if method == "neural" and model is None:
        raise ValueError("neural method requires a loaded model checkpoint")
    k_max = max(ks)
    report = RunReport(suite=suite_name, method=method, ks=tuple(sorted(ks)),
                       seed=seed)
    for bench in benchmarks:
        report.provided_counts[bench.provided] = \
            report.provided_counts.get(bench.provided, 0) + 1
    for index, bench in enumerate(sorted(benchmarks, key=lambda b: b.id)):
        rng = np.random.default_rng(np.random.SeedSequence((seed, index)))
        deadline = time.monotonic() + budget_s if budget_s else None
        t0 = time.monotonic()
        if method == "uniform":
            result = uniform_search(bench.examples(), k_max, grammar, rng,
                                    max_size=max_size or grammar.max_size,
                                    deadline=deadline)
        elif method == "neural":
            result = neural_search(model, bench.examples(), k_max, rng,
                                   deadline=deadline)
        elif method == "neural-greedy":
            result = neural_search(model, bench.examples(), k_max, rng,
                                   greedy=True, deadline=deadline)
        else:
            raise ValueError(f"unknown method {method!r}")
        wall = time.monotonic() - t0
        generalized = bool(result.program) and consistent(
            result.program, list(bench.pairs), grammar.catalog)
        report.rows.append(BenchRow(
            id=bench.id,
            found_at=result.stats.found_at,
            generalized=generalized,
            program=print_program(result.program) if result.program else None,
            draws=result.stats.draws,
            wall_s=wall,
        ))
    return report


# ---------------------------------------------------------------------------
# rendering

def round_percent(fraction: float) -> int:
    """Round half away from zero to an integer percentage."""
    return int(Decimal(fraction * 100).quantize(Decimal("1"), ROUND_HALF_UP))


def render_report(report: RunReport, fmt: str = "text",
                  include_timings: bool = False) -> str:
    """Text table or JSON record. Timings are excluded by default so that the
    rendering is byte-stable for a fixed (suite, method, ks, seed)."""
    if fmt == "json":
        record = {
            "v": 1,
            "suite": report.suite,
            "method": report.method,
            "seed": report.seed,
            "samples": list(report.ks),
            "provided_pairs": {str(k): v
                               for k, v in sorted(report.provided_counts.items())},
            "solve_rate": {str(k): report.solve_rate(k) for k in report.ks},
            "solved": {str(k): sorted(report.solved_ids(k)) for k in report.ks},
            "benchmarks": [
                {
                    "id": r.id,
                    "found_at": r.found_at,
                    "generalized": r.generalized,
                    "program": r.program,
                    **({"wall_s": round(r.wall_s, 3)} if include_timings else {}),
                }
                for r in report.rows
            ],
        }
        return json.dumps(record, indent=2, sort_keys=True)
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    provided = ", ".join(f"{n} benchmarks x {k} pairs"
                         for k, n in sorted(report.provided_counts.items()))
    lines = [
        f"suite: {report.suite}   method: {report.method}   seed: {report.seed}",
        f"provided to solver: {provided}",
        "",
        "Samples    " + "".join(f"{k:>8}" for k in report.ks),
        "Solved     " + "".join(
            f"{sum(1 for r in report.rows if r.solved_at(k)):>8}" for k in report.ks),
        "Total      " + "".join(f"{len(report.rows):>8}" for _ in report.ks),
        "Rate       " + "".join(
            f"{round_percent(report.solve_rate(k)):>7}%" for k in report.ks),
        "",
    ]
    for r in report.rows:
        status = "-" if r.found_at is None else str(r.found_at)
        gen = "" if r.generalized or r.found_at is None else "  [does not generalize]"
        timing = f"  ({r.wall_s:.2f}s)" if include_timings else ""
        program = f"  {r.program}" if r.program else ""
        lines.append(f"  {r.id:<28} draw={status:<6}{gen}{program}{timing}")
    return "\n".join(lines) + "\n"
