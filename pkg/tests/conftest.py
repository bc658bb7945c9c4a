"""Shared fixtures and independent test oracles."""

from __future__ import annotations

import pytest

from dapip.apis import default_catalog
from dapip.dictionaries import load_constants
from dapip.dsl import Apply, Concat, ConstStr, Grammar, InputVar


def enumerate_programs(grammar: Grammar, max_size: int):
    """Brute-force enumeration of every complete program within the bound.

    Deliberately independent of the sampler's counting tables: recursive
    generate-and-combine over the AST, no dynamic programming.
    """
    leaf_rules = [r for r in grammar.f_rules if r.arity == 0]
    unary_rules = [r for r in grammar.f_rules if r.arity == 1]

    def exprs(size):
        if size < 1:
            return
        if size == 1:
            for r in leaf_rules:
                if r.kind == "var":
                    yield InputVar()
                elif r.kind == "const":
                    yield ConstStr(*r.const)
                else:
                    yield Apply(r.api, InputVar())
            return
        for r in unary_rules:
            for sub in exprs(size - 1):
                yield Apply(r.api, sub)

    def forests(q, budget):
        if q == 0:
            if budget == 0:
                yield ()
            return
        for j in range(1, budget - (q - 1) + 1):
            for head in exprs(j):
                for rest in forests(q - 1, budget - j):
                    yield (head,) + rest

    for size in range(2, max_size + 1):
        for q in range(1, len(grammar.e_rules) + 1):
            for kids in forests(q, size - 1):
                yield Concat(kids)


TINY_APIS = ("GetFirstWord", "GetLastWord", "ToLowercase")
TINY_CONSTANTS = (("DOT", "."), ("SPACE", " "))


@pytest.fixture(scope="session")
def tiny_grammar() -> Grammar:
    """3 APIs, 2 constants: 4 + 3 + 2 + 1 = 10 rules."""
    return Grammar(default_catalog(), TINY_CONSTANTS, api_names=TINY_APIS,
                   max_size=6)


@pytest.fixture(scope="session")
def full_grammar() -> Grammar:
    return Grammar(default_catalog(), load_constants())
