"""Grammar, program AST, partial derivation trees, parsing, and printing.

Programs are concatenations of substring expressions:

    program := "(Concat" expr+ ")"
    expr    := "inp" | "(ConstStr" IDENT ")" | "(" APINAME " (arg " expr "))"

Concatenation is realized as four fixed-arity rules (one to four children) so
every rule has a fixed number of non-terminal right-hand-side symbols, which
the generation model requires. Regex and transform APIs take an arbitrary
substring expression; lookup APIs and constants apply directly to the input,
so their rules carry no non-terminal children.

All types here are immutable values, safe to share across threads.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from functools import lru_cache

from .apis import ApiCatalog, ApiFamily, default_catalog
from .dictionaries import load_constants
from .errors import (
    ArityError,
    CompleteTreeError,
    DslSyntaxError,
    InvalidExpansionError,
    UnknownApiError,
)

MAX_CONCAT_ARITY = 4
DEFAULT_MAX_SIZE = 10

SYM_E = "E"
SYM_F = "F"


# ---------------------------------------------------------------------------
# AST

@dataclass(frozen=True)
class InputVar:
    pass


@dataclass(frozen=True)
class ConstStr:
    ident: str
    literal: str


@dataclass(frozen=True)
class Apply:
    api: str
    arg: "Expr"


@dataclass(frozen=True)
class Concat:
    children: tuple["Expr", ...]


Expr = InputVar | ConstStr | Apply
Program = Concat

INP = InputVar()


def program_size(p: Program) -> int:
    """Number of rule applications in the program's derivation."""
    return 1 + sum(_expr_size(c) for c in p.children)


def _expr_size(e: Expr) -> int:
    if isinstance(e, (InputVar, ConstStr)):
        return 1
    if isinstance(e, Apply):
        # a lookup application is a single rule: its argument is fixed to inp
        if isinstance(e.arg, InputVar) and _is_lookup(e.api):
            return 1
        return 1 + _expr_size(e.arg)
    raise TypeError(f"not an expression: {e!r}")


@lru_cache(maxsize=None)
def _is_lookup(api: str) -> bool:
    return default_catalog().resolve(api).family is ApiFamily.LOOKUP


# ---------------------------------------------------------------------------
# grammar

@dataclass(frozen=True)
class GrammarRule:
    """One production. `arity` counts non-terminal RHS symbols."""

    id: int
    lhs: str
    kind: str  # "concat" | "api" | "const" | "var"
    arity: int
    api: str | None = None
    const: tuple[str, str] | None = None  # (ident, literal)

    @property
    def label(self) -> str:
        if self.kind == "concat":
            return f"E->Concat_{self.arity}(" + ",".join(["F"] * self.arity) + ")"
        if self.kind == "api":
            arg = "F" if self.arity else "v"
            return f"F->{self.api}({arg})"
        if self.kind == "const":
            return f"F->ConstStr_{self.const[0]}"
        return "F->v"


class Grammar:
    """Fixed, ordered rule set over a catalog subset and a constant universe.

    Rule ids are assigned deterministically: the four concatenation rules
    first, then one rule per API in catalog order (regex, lookup, transform),
    then one per constant in file order, then the input variable.
    """

    def __init__(self, catalog: ApiCatalog,
                 constants: tuple[tuple[str, str], ...],
                 api_names: tuple[str, ...] | None = None,
                 families: tuple[ApiFamily, ...] = tuple(ApiFamily),
                 max_size: int = DEFAULT_MAX_SIZE):
        self.catalog = catalog
        self.constants = constants
        self.const_by_ident = dict(constants)
        self.max_size = max_size
        allowed = set(api_names) if api_names is not None else None

        rules: list[GrammarRule] = []
        for q in range(1, MAX_CONCAT_ARITY + 1):
            rules.append(GrammarRule(len(rules), SYM_E, "concat", q))
        self.apis: list[str] = []
        for family in (ApiFamily.REGEX, ApiFamily.LOOKUP, ApiFamily.TRANSFORM):
            if family not in families:
                continue
            for spec in catalog.list(family):
                if allowed is not None and spec.name not in allowed:
                    continue
                arity = 0 if family is ApiFamily.LOOKUP else 1
                rules.append(GrammarRule(len(rules), SYM_F, "api", arity, api=spec.name))
                self.apis.append(spec.name)
        for ident, literal in constants:
            rules.append(GrammarRule(len(rules), SYM_F, "const", 0,
                                     const=(ident, literal)))
        rules.append(GrammarRule(len(rules), SYM_F, "var", 0))

        self.rules: tuple[GrammarRule, ...] = tuple(rules)
        self.e_rules = tuple(r for r in rules if r.lhs == SYM_E)
        self.f_rules = tuple(r for r in rules if r.lhs == SYM_F)
        self._rules_for = {SYM_E: self.e_rules, SYM_F: self.f_rules}
        self._api_rule = {r.api: r for r in rules if r.kind == "api"}
        self._const_rule = {r.const[0]: r for r in rules if r.kind == "const"}
        self._var_rule = rules[-1]

    def rules_for(self, symbol: str) -> tuple[GrammarRule, ...]:
        return self._rules_for[symbol]

    def rule_for_node(self, e: Expr | Program) -> GrammarRule:
        if isinstance(e, Concat):
            return self.e_rules[len(e.children) - 1]
        if isinstance(e, InputVar):
            return self._var_rule
        if isinstance(e, ConstStr):
            rule = self._const_rule.get(e.ident)
            if rule is None:
                raise UnknownApiError(f"constant {e.ident!r} not in this grammar")
            return rule
        rule = self._api_rule.get(e.api)
        if rule is None:
            raise UnknownApiError(f"API {e.api!r} not in this grammar")
        return rule

    def fingerprint(self) -> str:
        text = "\n".join(r.label for r in self.rules)
        return hashlib.sha256(text.encode()).hexdigest()

    def const(self, ident: str) -> ConstStr:
        if ident not in self.const_by_ident:
            raise UnknownApiError(f"constant {ident!r} not in this grammar")
        return ConstStr(ident, self.const_by_ident[ident])


_DEFAULT: Grammar | None = None


def default_grammar() -> Grammar:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = Grammar(default_catalog(), load_constants())
    return _DEFAULT


def validate_program(p: Program, grammar: Grammar | None = None) -> None:
    """Raise if `p` does not conform to the grammar's shape constraints."""
    grammar = grammar or default_grammar()
    if not isinstance(p, Concat):
        raise ArityError("program root must be a concatenation")
    if not 1 <= len(p.children) <= MAX_CONCAT_ARITY:
        raise ArityError(
            f"concatenation takes 1..{MAX_CONCAT_ARITY} children, got {len(p.children)}")
    for child in p.children:
        _validate_expr(child, grammar)


def _validate_expr(e: Expr, grammar: Grammar) -> None:
    if isinstance(e, InputVar):
        return
    if isinstance(e, ConstStr):
        grammar.const(e.ident)
        return
    if isinstance(e, Apply):
        spec = grammar.catalog.resolve(e.api)
        grammar.rule_for_node(e)
        if spec.family is ApiFamily.LOOKUP and not isinstance(e.arg, InputVar):
            raise DslSyntaxError(f"lookup API {e.api} applies to inp only", 0)
        _validate_expr(e.arg, grammar)
        return
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# parsing and printing

_TOKEN_RE = re.compile(r"\(|\)|[^\s()]+")


def _tokenize(text: str) -> list[tuple[str, int]]:
    return [(m.group(), m.start()) for m in _TOKEN_RE.finditer(text)]


class _Parser:
    def __init__(self, text: str, grammar: Grammar):
        self.text = text
        self.grammar = grammar
        self.tokens = _tokenize(text)
        self.i = 0

    def _peek(self) -> tuple[str, int]:
        if self.i >= len(self.tokens):
            raise DslSyntaxError("unexpected end of input", len(self.text))
        return self.tokens[self.i]

    def _next(self) -> tuple[str, int]:
        tok = self._peek()
        self.i += 1
        return tok

    def _expect(self, want: str) -> int:
        tok, pos = self._next()
        if tok != want:
            raise DslSyntaxError(f"expected {want!r}, found {tok!r}", pos)
        return pos

    def parse(self) -> Program:
        self._expect("(")
        tok, pos = self._next()
        if tok != "Concat":
            raise DslSyntaxError(f"program must start with (Concat ...), found {tok!r}", pos)
        children = []
        while True:
            tok, pos = self._peek()
            if tok == ")":
                self._next()
                break
            children.append(self._expr())
        if not 1 <= len(children) <= MAX_CONCAT_ARITY:
            raise ArityError(
                f"Concat takes 1..{MAX_CONCAT_ARITY} children, got {len(children)}")
        if self.i != len(self.tokens):
            raise DslSyntaxError("trailing input after program", self.tokens[self.i][1])
        return Concat(tuple(children))

    def _expr(self) -> Expr:
        tok, pos = self._next()
        if tok == "inp":
            return INP
        if tok != "(":
            raise DslSyntaxError(f"expected an expression, found {tok!r}", pos)
        head, hpos = self._next()
        if head == "ConstStr":
            ident, ipos = self._next()
            literal = self.grammar.const_by_ident.get(ident)
            if literal is None:
                raise DslSyntaxError(f"unknown constant id {ident!r}", ipos)
            self._expect(")")
            return ConstStr(ident, literal)
        if head in ("(", ")"):
            raise DslSyntaxError("expected an API name", hpos)
        if not self.grammar.catalog.has(head):
            raise UnknownApiError(f"unknown API: {head!r}")
        spec = self.grammar.catalog.resolve(head)
        self._expect("(")
        self._expect("arg")
        arg = self._expr()
        self._expect(")")
        self._expect(")")
        if spec.family is ApiFamily.LOOKUP and not isinstance(arg, InputVar):
            raise DslSyntaxError(f"lookup API {spec.name} applies to inp only", hpos)
        return Apply(spec.name, arg)


def parse_program(text: str, grammar: Grammar | None = None) -> Program:
    """Parse the canonical s-expression surface syntax into an AST."""
    return _Parser(text, grammar or default_grammar()).parse()


def print_program(p: Program) -> str:
    """Canonical single-line rendering; parse(print(p)) == p."""
    return "(Concat " + " ".join(_print_expr(c) for c in p.children) + ")"


def _print_expr(e: Expr) -> str:
    if isinstance(e, InputVar):
        return "inp"
    if isinstance(e, ConstStr):
        return f"(ConstStr {e.ident})"
    if isinstance(e, Apply):
        return f"({e.api} (arg {_print_expr(e.arg)}))"
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# partial trees and expansions

@dataclass(frozen=True)
class TreeNode:
    """Either an unexpanded symbol leaf (rule_id None) or an applied rule."""

    sym: str
    rule_id: int | None
    children: tuple[int, ...]
    path: tuple[int, ...]


@dataclass(frozen=True)
class PartialTree:
    """A derivation in progress. Node 0 is the root.

    `frontier` holds ids of unexpanded leaves; expanding a leaf appends the
    rule's non-terminal children to the end of the frontier.
    """

    nodes: tuple[TreeNode, ...]
    frontier: tuple[int, ...]

    @staticmethod
    def initial() -> "PartialTree":
        return PartialTree((TreeNode(SYM_E, None, (), ()),), (0,))

    @property
    def complete(self) -> bool:
        return not self.frontier

    @property
    def rule_count(self) -> int:
        return sum(1 for n in self.nodes if n.rule_id is not None)


@dataclass(frozen=True)
class Expansion:
    leaf: int
    rule: GrammarRule


def enumerate_expansions(t: PartialTree, grammar: Grammar | None = None) -> list[Expansion]:
    """Every applicable (frontier leaf, rule) pair, frontier order x rule order."""
    grammar = grammar or default_grammar()
    if t.complete:
        raise CompleteTreeError("tree has no unexpanded leaves")
    out = []
    for leaf in t.frontier:
        for rule in grammar.rules_for(t.nodes[leaf].sym):
            out.append(Expansion(leaf, rule))
    return out


def apply_expansion(t: PartialTree, e: Expansion) -> PartialTree:
    """Expand one frontier leaf; returns a new tree, the input is unchanged."""
    if e.leaf not in t.frontier:
        raise InvalidExpansionError(f"node {e.leaf} is not on the frontier")
    leaf = t.nodes[e.leaf]
    if leaf.rule_id is not None or leaf.sym != e.rule.lhs:
        raise InvalidExpansionError(
            f"rule {e.rule.label} does not apply to a {leaf.sym} leaf")
    nodes = list(t.nodes)
    base = len(nodes)
    child_ids = tuple(range(base, base + e.rule.arity))
    nodes[e.leaf] = TreeNode(leaf.sym, e.rule.id, child_ids, leaf.path)
    for i, cid in enumerate(child_ids):
        nodes.append(TreeNode(SYM_F, None, (), leaf.path + (i,)))
    frontier = tuple(f for f in t.frontier if f != e.leaf) + child_ids
    return PartialTree(tuple(nodes), frontier)


def tree_to_program(t: PartialTree, grammar: Grammar | None = None) -> Program:
    """Convert a complete tree back to its unique program."""
    grammar = grammar or default_grammar()
    if not t.complete:
        raise CompleteTreeError("tree still has unexpanded leaves")

    def build(nid: int) -> Expr | Program:
        node = t.nodes[nid]
        rule = grammar.rules[node.rule_id]
        if rule.kind == "concat":
            return Concat(tuple(build(c) for c in node.children))
        if rule.kind == "var":
            return INP
        if rule.kind == "const":
            return ConstStr(*rule.const)
        if rule.arity == 0:
            return Apply(rule.api, INP)
        return Apply(rule.api, build(node.children[0]))

    return build(0)


def program_to_derivation(p: Program, grammar: Grammar | None = None) -> dict[tuple[int, ...], int]:
    """Map from tree path to the rule id the program applies there."""
    grammar = grammar or default_grammar()
    out: dict[tuple[int, ...], int] = {}

    def walk(e, path):
        rule = grammar.rule_for_node(e)
        out[path] = rule.id
        if isinstance(e, Concat):
            for i, c in enumerate(e.children):
                walk(c, path + (i,))
        elif isinstance(e, Apply) and rule.arity == 1:
            walk(e.arg, path + (0,))

    walk(p, ())
    return out


def program_to_tree(p: Program, grammar: Grammar | None = None) -> PartialTree:
    """Replay the program's derivation, expanding leaves left to right."""
    grammar = grammar or default_grammar()
    target = program_to_derivation(p, grammar)
    t = PartialTree.initial()
    while not t.complete:
        leaf = t.frontier[0]
        rule = grammar.rules[target[t.nodes[leaf].path]]
        t = apply_expansion(t, Expansion(leaf, rule))
    return t
