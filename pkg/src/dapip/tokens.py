"""Token classes and positional span matching over plain strings.

All classes are ASCII-based: letters are A-Z/a-z, digits 0-9; any other code
point acts as a separator and is passed through untouched by the rewriting
helpers. Occurrences of a class are maximal runs, non-overlapping, ordered
left to right.
"""

from __future__ import annotations

import enum
import re

from .failure import FAILURE, Failure


class TokenClass(enum.Enum):
    NUMBER = "number"            # maximal digit run
    ALPHA = "alpha"              # maximal letter run
    WORD = "word"                # maximal alphanumeric run
    WS_TOKEN = "ws"              # maximal non-whitespace run
    CAPS_WORD = "caps"           # all-uppercase alpha run, length >= 2
    PROPERCASE_WORD = "proper"   # one uppercase letter then >= 1 lowercase
    DIGIT = "digit"              # single digit
    CHAR = "char"                # single code point


_RUN_RE = {
    TokenClass.NUMBER: re.compile(r"[0-9]+"),
    TokenClass.ALPHA: re.compile(r"[A-Za-z]+"),
    TokenClass.WORD: re.compile(r"[A-Za-z0-9]+"),
    TokenClass.WS_TOKEN: re.compile(r"\S+"),
    TokenClass.DIGIT: re.compile(r"[0-9]"),
    TokenClass.CHAR: re.compile(r"(?s)."),
}

_CAPS_RE = re.compile(r"^[A-Z]{2,}$")
_PROPER_RE = re.compile(r"^[A-Z][a-z]+$")


def spans(cls: TokenClass, s: str) -> list[tuple[int, int]]:
    """All occurrence spans of `cls` in `s`, half-open offsets, left to right."""
    if cls is TokenClass.CAPS_WORD:
        return [m.span() for m in _RUN_RE[TokenClass.ALPHA].finditer(s)
                if _CAPS_RE.match(m.group())]
    if cls is TokenClass.PROPERCASE_WORD:
        return [m.span() for m in _RUN_RE[TokenClass.ALPHA].finditer(s)
                if _PROPER_RE.match(m.group())]
    return [m.span() for m in _RUN_RE[cls].finditer(s)]


def match_token(cls: TokenClass, k: int, from_end: bool, s: str) -> tuple[int, int] | Failure:
    """Span of the k-th (1-based) occurrence of `cls`, counted from either end."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    occ = spans(cls, s)
    if len(occ) < k:
        return FAILURE
    return occ[-k] if from_end else occ[k - 1]


def is_ascii_alnum(ch: str) -> bool:
    return ("a" <= ch <= "z") or ("A" <= ch <= "Z") or ("0" <= ch <= "9")


_LOWER = str.maketrans({chr(c): chr(c + 32) for c in range(ord("A"), ord("Z") + 1)})
_UPPER = str.maketrans({chr(c): chr(c - 32) for c in range(ord("a"), ord("z") + 1)})


def ascii_lower(s: str) -> str:
    return s.translate(_LOWER)


def ascii_upper(s: str) -> str:
    return s.translate(_UPPER)


def ascii_propercase(s: str) -> str:
    """Uppercase the first letter of every alpha run, lowercase the rest."""
    out = []
    for piece, is_alpha in _alpha_pieces(s):
        if is_alpha:
            out.append(ascii_upper(piece[0]) + ascii_lower(piece[1:]))
        else:
            out.append(piece)
    return "".join(out)


def _alpha_pieces(s: str):
    pos = 0
    for m in _RUN_RE[TokenClass.ALPHA].finditer(s):
        if m.start() > pos:
            yield s[pos:m.start()], False
        yield m.group(), True
        pos = m.end()
    if pos < len(s):
        yield s[pos:], False
