"""Training corpus generation.

Programs are sampled uniformly over the set of complete programs within the
size bound. Naive uniform-per-expansion rollouts are heavily biased toward
shallow programs, so sampling is size-stratified: exact program counts per
size are computed by dynamic programming over the grammar, a size is drawn
proportionally, and a program is then drawn uniformly within that size.

Inputs are built to satisfy every API prerequisite reachable in the program
(required token counts, dictionary entries, delimiters), padded with noise
tokens, and always re-checked by executing the program. Generation is
deterministic given the seed: instance i draws from its own rng stream, so
workers could split the index range without changing the output.
"""

from __future__ import annotations

import bisect
import random
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

from .apis import ApiFamily, PRINTABLE_CHARS, default_catalog
from .dictionaries import load_constants, load_noise_words
from .dsl import (
    Apply,
    Concat,
    ConstStr,
    Expr,
    Grammar,
    InputVar,
    Program,
    print_program,
    parse_program,
    program_size,
)
from .errors import DataFormatError, UnsatisfiableProgramError
from .failure import Failure
from .interp import ExamplePair, consistent, evaluate
from .tokens import TokenClass

PAIRS_PER_INSTANCE = 5

ALL_FAMILIES = ("regex", "lookup", "transform")

# A compact, behaviorally diverse regex-API subset used by the scaled-down
# training experiments: positional extractors over every token class, char
# and digit prefixes, and the common rewriters.
REGEX_BENCH_SUBSET = (
    "GetFirstWord", "GetSecondWord", "GetLastWord", "GetSecondToLastWord",
    "GetFirstNumber", "GetSecondNumber", "GetLastNumber",
    "GetFirstAlpha", "GetLastAlpha",
    "GetFirstWS", "GetLastWS",
    "GetFirstCapsWord", "GetLastCapsWord",
    "GetFirstPropercaseWord", "GetLastPropercaseWord",
    "GetFirstChar", "GetFirstTwoChar", "GetFirstThreeChar",
    "GetFirstDigit", "GetFirstTwoDigit",
    "ToLowercase", "ToUppercase", "ToPropercase", "TrimSpaces", "GetIdentity",
    "GetStartToFirstSpace", "GetLastSpaceToEnd",
)


@dataclass(frozen=True)
class GenConfig:
    max_size: int = 10
    families: tuple[str, ...] = ALL_FAMILIES
    api_subset: tuple[str, ...] | None = None
    seed: int = 0
    min_input_len: int = 1
    max_input_len: int = 32
    max_attempts: int = 120
    ensure_coverage: bool = False

    def __post_init__(self):
        if self.max_size < 2:
            raise ValueError("max_size must be >= 2")
        for fam in self.families:
            if fam not in ALL_FAMILIES:
                raise ValueError(f"unknown family {fam!r}")

    @property
    def regex_only(self) -> bool:
        return tuple(self.families) == ("regex",)


@dataclass(frozen=True)
class TrainingInstance:
    program: Program
    pairs: tuple[ExamplePair, ...]


@lru_cache(maxsize=16)
def _grammar_for(families: tuple[str, ...], api_subset: tuple[str, ...] | None,
                 max_size: int) -> Grammar:
    fams = tuple(ApiFamily(f) for f in families)
    return Grammar(default_catalog(), load_constants(),
                   api_names=api_subset, families=fams, max_size=max_size)


def grammar_for(cfg: GenConfig) -> Grammar:
    return _grammar_for(tuple(cfg.families), cfg.api_subset, cfg.max_size)


# ---------------------------------------------------------------------------
# exact program counting and uniform sampling

def _cumulative(weights: list[int]) -> list[int]:
    out = []
    acc = 0
    for w in weights:
        acc += w
        out.append(acc)
    return out


def _pick_cumulative(rng: random.Random, cum: list[int]) -> int:
    return bisect.bisect_right(cum, rng.randrange(cum[-1]))


class ProgramCounter:
    """Exact counts of complete programs by derivation size.

    Counts are exact integers (they overflow 64 bits well before the default
    size bound), and every discrete choice during sampling uses precomputed
    cumulative weight tables.
    """

    def __init__(self, grammar: Grammar, max_size: int):
        self.grammar = grammar
        self.max_size = max_size
        self.leaf_rules = [r for r in grammar.f_rules if r.arity == 0]
        self.unary_rules = [r for r in grammar.f_rules if r.arity == 1]
        n_leaf, n_unary = len(self.leaf_rules), len(self.unary_rules)

        # f_count[s]: substring derivations using exactly s rules
        self.f_count = [0] * (max_size + 1)
        if max_size >= 1:
            self.f_count[1] = n_leaf
        for s in range(2, max_size + 1):
            self.f_count[s] = n_unary * self.f_count[s - 1]

        # forest[q][m]: ordered q-tuples of substring derivations totaling m rules
        max_q = len(grammar.e_rules)
        self.forest = [[0] * (max_size + 1) for _ in range(max_q + 1)]
        self.forest[0][0] = 1
        for q in range(1, max_q + 1):
            for m in range(1, max_size + 1):
                total = 0
                for j in range(1, m + 1):
                    if self.f_count[j] and self.forest[q - 1][m - j]:
                        total += self.f_count[j] * self.forest[q - 1][m - j]
                self.forest[q][m] = total

        # e_count[s]: complete programs of size exactly s
        self.e_count = [0] * (max_size + 1)
        for s in range(2, max_size + 1):
            self.e_count[s] = sum(self.forest[q][s - 1]
                                  for q in range(1, max_q + 1))
        self.total = sum(self.e_count)

        self._cum_size = _cumulative(self.e_count)
        self._cum_q = {m: _cumulative([self.forest[q][m] for q in range(1, max_q + 1)])
                       for m in range(1, max_size + 1)}
        # child-size split tables: (trees left after this one, rule budget)
        self._cum_split = {}
        for left in range(max_q):
            for m in range(1, max_size + 1):
                weights = [self.f_count[j] * self.forest[left][m - j]
                           for j in range(0, m + 1)]
                if sum(weights):
                    self._cum_split[(left, m)] = _cumulative(weights)

    def sample(self, rng: random.Random) -> Program:
        size = _pick_cumulative(rng, self._cum_size)
        return self.sample_of_size(rng, size)

    def sample_of_size(self, rng: random.Random, size: int) -> Program:
        budget = size - 1
        q = 1 + _pick_cumulative(rng, self._cum_q[budget])
        children = []
        remaining = budget
        for slot in range(q):
            left = q - slot - 1
            j = _pick_cumulative(rng, self._cum_split[(left, remaining)])
            children.append(self._sample_f(rng, j))
            remaining -= j
        return Concat(tuple(children))

    def _sample_f(self, rng: random.Random, size: int) -> Expr:
        if size == 1:
            rule = rng.choice(self.leaf_rules)
            if rule.kind == "var":
                return InputVar()
            if rule.kind == "const":
                return ConstStr(*rule.const)
            return Apply(rule.api, InputVar())
        rule = rng.choice(self.unary_rules)
        return Apply(rule.api, self._sample_f(rng, size - 1))


@lru_cache(maxsize=16)
def _counter_for(families: tuple[str, ...], api_subset, max_size: int) -> ProgramCounter:
    return ProgramCounter(_grammar_for(families, api_subset, max_size), max_size)


def counter_for(cfg: GenConfig) -> ProgramCounter:
    return _counter_for(tuple(cfg.families), cfg.api_subset, cfg.max_size)


def sample_program(rng: random.Random, cfg: GenConfig) -> Program:
    """One complete program, uniform over all programs of size <= max_size."""
    return counter_for(cfg).sample(rng)


# ---------------------------------------------------------------------------
# input construction

_PUNCT = ".,;:!?@#%&*()~`"
_CLASS_MAKERS = {
    TokenClass.NUMBER: lambda rng: _digits(rng, rng.randint(1, 3)),
    TokenClass.DIGIT: lambda rng: _digits(rng, 1),
    TokenClass.ALPHA: lambda rng: _letters(rng, rng.randint(2, 5)),
    TokenClass.WORD: lambda rng: _letters(rng, rng.randint(2, 5)),
    TokenClass.WS_TOKEN: lambda rng: _letters(rng, rng.randint(2, 5)),
    TokenClass.CAPS_WORD: lambda rng: _letters(rng, rng.randint(2, 4)).upper(),
    TokenClass.PROPERCASE_WORD:
        lambda rng: _letters(rng, rng.randint(2, 5)).capitalize(),
    TokenClass.CHAR: lambda rng: _letters(rng, 1),
}


def _digits(rng: random.Random, n: int) -> str:
    return "".join(rng.choice("0123456789") for _ in range(n))


def _letters(rng: random.Random, n: int) -> str:
    return "".join(rng.choice("abcdefghijklmnopqrstuvwxyz") for _ in range(n))


@lru_cache(maxsize=1)
def _noise_vocab() -> tuple[str, ...]:
    return load_noise_words()


def _noise_token(rng: random.Random) -> str:
    roll = rng.random()
    if roll < 0.55:
        return rng.choice(_noise_vocab())
    if roll < 0.75:
        return rng.choice(_PUNCT)
    return _digits(rng, rng.randint(1, 4))


def _program_apis(p: Program) -> list[str]:
    out: list[str] = []

    def walk(e):
        if isinstance(e, Apply):
            out.append(e.api)
            walk(e.arg)
        elif isinstance(e, Concat):
            for c in e.children:
                walk(c)

    walk(p)
    return out


def _has_input_var(e) -> bool:
    if isinstance(e, InputVar):
        return True
    if isinstance(e, Apply):
        return _has_input_var(e.arg)
    if isinstance(e, Concat):
        return any(_has_input_var(c) for c in e.children)
    return False


def _constant_subtree_fails(p: Program, catalog) -> bool:
    """True if some input-independent subexpression always evaluates to Failure."""

    def walk(e) -> bool:
        if isinstance(e, Concat):
            return any(walk(c) for c in e.children)
        if isinstance(e, Apply):
            if not _has_input_var(e):
                probe = Concat((e,))
                return isinstance(evaluate(probe, "x", catalog), Failure)
            return walk(e.arg)
        return False

    return walk(p)


def _char_flow_feasible(p: Program, grammar: Grammar) -> bool:
    """Sound pruning of programs no input can satisfy.

    Tracks an over-approximation of the characters each subexpression's
    output may contain; an API whose requirements cannot be met by its
    argument's possible characters makes the whole program unsatisfiable.
    """
    catalog = grammar.catalog
    registry = catalog.registry

    def expr_chars(e) -> frozenset | None:
        if isinstance(e, InputVar):
            return PRINTABLE_CHARS
        if isinstance(e, ConstStr):
            return frozenset(e.literal)
        arg = expr_chars(e.arg)
        if arg is None:
            return None
        flow = catalog.resolve(e.api).flow
        if flow is None:
            return PRINTABLE_CHARS
        return flow(arg, registry)

    return all(expr_chars(c) is not None for c in p.children)


@dataclass(frozen=True)
class _Needs:
    class_counts: tuple[tuple[TokenClass, int], ...]
    makers: tuple[object, ...]
    min_len: int


def _collect_needs(p: Program, grammar: Grammar, cfg: GenConfig) -> _Needs:
    catalog = grammar.catalog
    class_need: dict[TokenClass, int] = {}
    literal_makers: dict[str, object] = {}
    min_len = cfg.min_input_len
    for api in _program_apis(p):
        needs = catalog.resolve(api).needs
        for cls, k in needs.classes:
            class_need[cls] = max(class_need.get(cls, 0), k)
        if needs.make is not None:
            literal_makers.setdefault(api, needs.make)
        min_len = max(min_len, needs.min_len)
    return _Needs(tuple(class_need.items()), tuple(literal_makers.values()), min_len)


def _build_candidate(needs: _Needs, rng: random.Random, cfg: GenConfig,
                     grammar: Grammar) -> str | None:
    registry = grammar.catalog.registry
    required = [make(rng, registry) for make in needs.makers]
    for cls, k in needs.class_counts:
        required.extend(_CLASS_MAKERS[cls](rng) for _ in range(k))
    noise = [_noise_token(rng) for _ in range(rng.randint(0, 4))]
    tokens = [(tok, False) for tok in required] + [(tok, True) for tok in noise]
    rng.shuffle(tokens)

    budget = cfg.max_input_len
    while tokens and sum(len(t) for t, _ in tokens) + len(tokens) - 1 > budget:
        for i in range(len(tokens) - 1, -1, -1):
            if tokens[i][1]:
                del tokens[i]
                break
        else:
            return None
    text = " ".join(t for t, _ in tokens)
    while len(text) < needs.min_len:
        extra = _noise_token(rng)
        candidate = f"{text} {extra}" if text else extra
        if len(candidate) > budget:
            return None
        text = candidate
    return text or None


def generate_inputs(p: Program, rng: random.Random, cfg: GenConfig) -> list[str]:
    """Five inputs on which the program evaluates successfully.

    Requirement hints make success likely; every candidate is still verified
    by executing the program. Programs that defeat the budgeted attempt loop
    are reported as unsatisfiable and discarded by the pipeline.
    """
    grammar = grammar_for(cfg)
    catalog = grammar.catalog
    if not _char_flow_feasible(p, grammar) or _constant_subtree_fails(p, catalog):
        raise UnsatisfiableProgramError(p)
    needs = _collect_needs(p, grammar, cfg)
    inputs: list[str] = []
    unbuilt = failed = 0
    for _ in range(cfg.max_attempts):
        text = _build_candidate(needs, rng, cfg, grammar)
        if text is None:
            unbuilt += 1
            # required tokens repeatedly overflow the length budget
            if not inputs and unbuilt >= 20 and failed == 0:
                break
            continue
        out = evaluate(p, text, catalog)
        if isinstance(out, Failure) or len(out) > cfg.max_input_len:
            failed += 1
            # hint-satisfying inputs never succeed: semantically hopeless
            if not inputs and failed >= 40:
                break
            continue
        inputs.append(text)
        if len(inputs) == PAIRS_PER_INSTANCE:
            return inputs
    raise UnsatisfiableProgramError(p)


def make_instance(p: Program, rng: random.Random, cfg: GenConfig) -> TrainingInstance:
    grammar = grammar_for(cfg)
    inputs = generate_inputs(p, rng, cfg)
    pairs = tuple(ExamplePair(s, evaluate(p, s, grammar.catalog)) for s in inputs)
    return TrainingInstance(p, pairs)


def _instance_rng(seed: int, stream: int) -> random.Random:
    return random.Random(f"{seed}/{stream}")


def generate_instance(cfg: GenConfig, stream: int) -> TrainingInstance:
    """Deterministic instance for (cfg.seed, stream); resamples programs whose
    preconditions cannot be met."""
    rng = _instance_rng(cfg.seed, stream)
    while True:
        p = sample_program(rng, cfg)
        try:
            return make_instance(p, rng, cfg)
        except UnsatisfiableProgramError:
            continue


def generate_instances(n: int, cfg: GenConfig) -> list[TrainingInstance]:
    return [generate_instance(cfg, i) for i in range(n)]


def _ensure_coverage(instances: list[TrainingInstance], n: int,
                     cfg: GenConfig) -> tuple[list[TrainingInstance], list[str]]:
    grammar = grammar_for(cfg)
    counts: dict[str, int] = {}
    for inst in instances:
        for api in _program_apis(inst.program):
            counts[api] = counts.get(api, 0) + 1
    missing = [a for a in grammar.apis if counts.get(a, 0) == 0]
    stream = n
    budget = 50 * max(n, 1)
    while missing and stream < n + budget:
        inst = generate_instance(cfg, stream)
        stream += 1
        used = set(_program_apis(inst.program))
        if not used & set(missing):
            continue
        for j in range(n - 1, -1, -1):
            old = set(_program_apis(instances[j].program))
            if all(counts.get(a, 0) > 1 for a in old):
                for a in old:
                    counts[a] -= 1
                instances[j] = inst
                for a in used:
                    counts[a] = counts.get(a, 0) + 1
                missing = [a for a in grammar.apis if counts.get(a, 0) == 0]
                break
        else:
            break
    return instances, missing


# ---------------------------------------------------------------------------
# serialization

def escape_field(s: str) -> str:
    return (s.replace("\\", "\\\\").replace("\t", "\\t")
             .replace("\n", "\\n").replace("\r", "\\r"))


def unescape_field(s: str) -> str:
    out = []
    i = 0
    while i < len(s):
        c = s[i]
        if c == "\\" and i + 1 < len(s):
            nxt = s[i + 1]
            out.append({"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}.get(nxt, nxt))
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def format_instance(inst: TrainingInstance) -> str:
    fields = [print_program(inst.program)]
    for pair in inst.pairs:
        fields.append(pair.input)
        fields.append(pair.output)
    return "\t".join(escape_field(f) for f in fields)


def parse_instance(line: str, grammar: Grammar | None = None) -> TrainingInstance:
    fields = [unescape_field(f) for f in line.split("\t")]
    if len(fields) != 1 + 2 * PAIRS_PER_INSTANCE:
        raise DataFormatError(
            f"expected {1 + 2 * PAIRS_PER_INSTANCE} fields, got {len(fields)}")
    program = parse_program(fields[0], grammar)
    pairs = tuple(ExamplePair(fields[i], fields[i + 1])
                  for i in range(1, len(fields), 2))
    return TrainingInstance(program, pairs)


def emit_dataset(n: int, cfg: GenConfig, path: Path | str) -> Path:
    """Write n instances plus a manifest; byte-identical for a fixed seed."""
    path = Path(path)
    instances = generate_instances(n, cfg)
    missing: list[str] = []
    if cfg.ensure_coverage:
        instances, missing = _ensure_coverage(instances, n, cfg)
    with open(path, "w", encoding="utf-8") as fh:
        for inst in instances:
            fh.write(format_instance(inst) + "\n")
    manifest = Path(str(path) + ".manifest")
    grammar = grammar_for(cfg)
    lines = [
        "format=dapip-dataset-v1",
        f"count={len(instances)}",
        f"seed={cfg.seed}",
        f"max_size={cfg.max_size}",
        f"families={','.join(cfg.families)}",
        f"api_subset={','.join(cfg.api_subset) if cfg.api_subset else '*'}",
        f"max_input_len={cfg.max_input_len}",
        f"grammar={grammar.fingerprint()}",
        f"coverage_missing={','.join(missing) if missing else '-'}",
    ]
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def load_dataset(path: Path | str, grammar: Grammar | None = None,
                 validate: bool = False,
                 max_size: int | None = None) -> list[TrainingInstance]:
    out = []
    grammar = grammar or None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            try:
                inst = parse_instance(line, grammar)
            except Exception as exc:
                raise DataFormatError(f"{path}:{lineno}: {exc}") from exc
            if max_size is not None and program_size(inst.program) > max_size:
                raise DataFormatError(
                    f"{path}:{lineno}: program exceeds max size {max_size}")
            if validate and not consistent(inst.program, list(inst.pairs)):
                raise DataFormatError(f"{path}:{lineno}: inconsistent instance")
            out.append(inst)
    return out
