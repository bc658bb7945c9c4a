"""Synthesis drivers: uniform baseline search and neural-guided search.

Both draw complete candidate programs and return the first one consistent
with the examples. The uniform baseline picks uniformly among the valid
expansions of the partial tree at every step, which biases it toward small
programs; rollouts that cannot complete within the size budget are discarded
but still count against the draw budget. Draws are sequential in index
order, so results are deterministic given the seed; the per-draw stream
construction would let draws run in parallel without changing the outcome.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .dsl import (
    DEFAULT_MAX_SIZE,
    Grammar,
    PartialTree,
    Program,
    default_grammar,
    tree_to_program,
)
from .interp import ExamplePair, consistent
from .r3nn import DEFAULT_MAX_STEPS, R3NN


@dataclass
class SearchStats:
    draws: int = 0
    found_at: int | None = None  # 1-based draw index of the first solution
    complete_draws: int = 0
    elapsed_s: float = 0.0
    timed_out: bool = False
    sizes: list[int] = field(default_factory=list)


@dataclass
class SearchResult:
    program: Program | None
    stats: SearchStats

    @property
    def found(self) -> bool:
        return self.program is not None


def _uniform_rollout(grammar: Grammar, rng: np.random.Generator,
                     max_size: int, max_steps: int) -> Program | None:
    t = PartialTree.initial()
    e_rules, f_rules = grammar.e_rules, grammar.f_rules
    for _ in range(max_steps):
        by_sym = {"E": e_rules, "F": f_rules}
        counts = [len(by_sym[t.nodes[leaf].sym]) for leaf in t.frontier]
        total = sum(counts)
        pick = int(rng.integers(total))
        for slot, leaf in enumerate(t.frontier):
            if pick < counts[slot]:
                rule = by_sym[t.nodes[leaf].sym][pick]
                break
            pick -= counts[slot]
        t = _apply_fast(t, leaf, rule)
        if t.rule_count + len(t.frontier) > max_size:
            return None
        if t.complete:
            return tree_to_program(t, grammar)
    return None


def _apply_fast(t: PartialTree, leaf: int, rule) -> PartialTree:
    # same semantics as dsl.apply_expansion without its validation cost
    from .dsl import TreeNode

    nodes = list(t.nodes)
    base = len(nodes)
    child_ids = tuple(range(base, base + rule.arity))
    old = nodes[leaf]
    nodes[leaf] = TreeNode(old.sym, rule.id, child_ids, old.path)
    for i, cid in enumerate(child_ids):
        nodes.append(TreeNode("F", None, (), old.path + (i,)))
    frontier = tuple(f for f in t.frontier if f != leaf) + child_ids
    return PartialTree(tuple(nodes), frontier)


def uniform_search(examples: list[ExamplePair], samples: int,
                   grammar: Grammar | None = None,
                   rng: np.random.Generator | None = None,
                   max_size: int = DEFAULT_MAX_SIZE,
                   max_steps: int = DEFAULT_MAX_STEPS,
                   deadline: float | None = None) -> SearchResult:
    """First consistent program among up to `samples` uniform draws."""
    if samples < 1:
        raise ValueError("need at least one sample")
    grammar = grammar or default_grammar()
    rng = rng or np.random.default_rng(0)
    catalog = grammar.catalog
    stats = SearchStats()
    t0 = time.monotonic()
    for draw in range(1, samples + 1):
        if deadline is not None and time.monotonic() > deadline:
            stats.timed_out = True
            break
        stats.draws = draw
        p = _uniform_rollout(grammar, rng, max_size, max_steps)
        if p is None:
            continue
        stats.complete_draws += 1
        if consistent(p, examples, catalog):
            stats.found_at = draw
            stats.elapsed_s = time.monotonic() - t0
            assert consistent(p, examples, catalog)
            return SearchResult(p, stats)
    stats.elapsed_s = time.monotonic() - t0
    return SearchResult(None, stats)


def neural_search(model: R3NN, examples: list[ExamplePair], samples: int,
                  rng: np.random.Generator | None = None,
                  greedy: bool = False,
                  max_steps: int = DEFAULT_MAX_STEPS,
                  deadline: float | None = None) -> SearchResult:
    """Guided search: encode the examples once, then draw from the model.

    `greedy` draws a single argmax rollout (1-best inference); otherwise up
    to `samples` stochastic rollouts are drawn and the first consistent
    program is returned.
    """
    stats = SearchStats()
    if samples < 1 and not greedy:
        return SearchResult(None, stats)
    catalog = model.grammar.catalog
    t0 = time.monotonic()
    with ad.no_grad():
        encoding = model.encode(examples)
    n_draws = 1 if greedy else samples
    rng = rng or np.random.default_rng(0)
    for draw in range(1, n_draws + 1):
        if deadline is not None and time.monotonic() > deadline:
            stats.timed_out = True
            break
        stats.draws = draw
        res = model.sample(encoding, rng, greedy=greedy, max_steps=max_steps)
        if res.program is None:
            continue
        stats.complete_draws += 1
        stats.sizes.append(res.steps)
        if consistent(res.program, examples, catalog):
            stats.found_at = draw
            stats.elapsed_s = time.monotonic() - t0
            return SearchResult(res.program, stats)
    stats.elapsed_s = time.monotonic() - t0
    return SearchResult(None, stats)


@dataclass
class BenchOutcome:
    benchmark_id: str
    first_solve_draw: int | None
    program_text: str | None
    draws: int
    elapsed_s: float

    def solved_at(self, k: int) -> bool:
        return self.first_solve_draw is not None and self.first_solve_draw <= k


def solve_rate(solver, benchmarks, k: int) -> tuple[float, list[BenchOutcome]]:
    """Fraction of benchmarks solved within k draws.

    `solver(examples, k, stream_index)` must return a SearchResult. An empty
    benchmark set is reported as rate 0.0 with a warning.
    """
    import warnings

    if not benchmarks:
        warnings.warn("solve_rate over an empty benchmark set", stacklevel=2)
        return 0.0, []
    outcomes = []
    for i, bench in enumerate(benchmarks):
        result = solver(bench.examples(), k, i)
        from .dsl import print_program

        outcomes.append(BenchOutcome(
            benchmark_id=bench.id,
            first_solve_draw=result.stats.found_at,
            program_text=print_program(result.program) if result.program else None,
            draws=result.stats.draws,
            elapsed_s=result.stats.elapsed_s,
        ))
    solved = sum(1 for o in outcomes if o.solved_at(k))
    return solved / len(benchmarks), outcomes
