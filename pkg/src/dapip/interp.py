"""Program evaluation and consistency checks against example pairs.

Evaluation is strict: a Failure anywhere makes the whole program Failure.
Everything here is pure, so programs can be evaluated in parallel freely.
"""

from __future__ import annotations

from dataclasses import dataclass

from .apis import ApiCatalog, default_catalog
from .dsl import Apply, ConstStr, Expr, InputVar, Program
from .failure import FAILURE, Failure


@dataclass(frozen=True)
class ExamplePair:
    input: str
    output: str

    def __post_init__(self):
        if not self.input:
            raise ValueError("example input must be non-empty")


def evaluate(p: Program, input_str: str,
             catalog: ApiCatalog | None = None) -> str | Failure:
    catalog = catalog or default_catalog()
    parts = []
    for child in p.children:
        val = _eval_expr(child, input_str, catalog)
        if isinstance(val, Failure):
            return FAILURE
        parts.append(val)
    return "".join(parts)


def _eval_expr(e: Expr, input_str: str, catalog: ApiCatalog) -> str | Failure:
    if isinstance(e, InputVar):
        return input_str
    if isinstance(e, ConstStr):
        return e.literal
    if isinstance(e, Apply):
        arg = _eval_expr(e.arg, input_str, catalog)
        if isinstance(arg, Failure):
            return FAILURE
        return catalog.eval(e.api, arg)
    raise TypeError(f"not an expression: {e!r}")


def consistent(p: Program, examples: list[ExamplePair],
               catalog: ApiCatalog | None = None) -> bool:
    """True iff the program maps every example input exactly to its output."""
    if not examples:
        raise ValueError("need at least one example")
    catalog = catalog or default_catalog()
    for ex in examples:
        if evaluate(p, ex.input, catalog) != ex.output:
            return False
    return True


def apply_all(p: Program, inputs: list[str],
              catalog: ApiCatalog | None = None) -> list[str | Failure]:
    catalog = catalog or default_catalog()
    return [evaluate(p, s, catalog) for s in inputs]
