"""The API catalog: 104 regex, 18 lookup, and 13 transform string functions.

Every API is a pure unary partial function from strings to strings; a missed
pattern or dictionary entry yields the FAILURE value rather than an error.
The catalog and its dictionaries are immutable after construction, so
evaluation is reentrant and thread-safe.
"""

from __future__ import annotations

import datetime
import enum
import re
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable

from .dictionaries import Registry, default_registry
from .errors import UnknownApiError
from .failure import FAILURE, Failure
from .tokens import (
    TokenClass,
    ascii_lower,
    ascii_propercase,
    ascii_upper,
    is_ascii_alnum,
    match_token,
    spans,
)


class ApiFamily(enum.Enum):
    REGEX = "regex"
    LOOKUP = "lookup"
    TRANSFORM = "transform"


@dataclass(frozen=True)
class InputNeeds:
    """What a generated input must contain for this API to succeed.

    `classes` are (token class, minimum occurrence count) requirements on the
    raw input; `make` produces one literal token to plant; `min_len` is a
    lower bound on input length. These are hints: generated inputs are always
    re-checked by actually evaluating the program.
    """

    classes: tuple[tuple[TokenClass, int], ...] = ()
    min_len: int = 0
    make: Callable | None = None  # (rng, registry) -> str


@dataclass(frozen=True)
class ApiSpec:
    name: str
    family: ApiFamily
    description: str
    fn: Callable  # (s, registry) -> str | Failure
    needs: InputNeeds = field(default_factory=InputNeeds)
    # char-flow abstraction: (possible argument chars, registry) -> possible
    # output chars, or None when the API can never succeed on such arguments;
    # None here means "no information" (output unrestricted, no requirement)
    flow: Callable | None = None

    def __repr__(self) -> str:
        return f"ApiSpec({self.name}, {self.family.value})"


# ---------------------------------------------------------------------------
# character-set abstraction used to prune unsatisfiable nested programs

PRINTABLE_CHARS = frozenset(chr(c) for c in range(32, 127))
LOWER_CHARS = frozenset("abcdefghijklmnopqrstuvwxyz")
UPPER_CHARS = frozenset("ABCDEFGHIJKLMNOPQRSTUVWXYZ")
DIGIT_CHARS = frozenset("0123456789")
LETTER_CHARS = LOWER_CHARS | UPPER_CHARS
ALNUM_CHARS = LETTER_CHARS | DIGIT_CHARS
WS_CHARS = frozenset(" \t\r\n")


# ---------------------------------------------------------------------------
# shared matching machinery

def boundary_ok(s: str, i: int, j: int) -> bool:
    """A span may only match a dictionary entry at token boundaries.

    A side is a boundary when it touches the string edge, a non-alphanumeric
    neighbour, or the entry itself starts/ends with punctuation (so 'Mr.'
    may be followed directly by a letter).
    """
    left = i == 0 or not is_ascii_alnum(s[i - 1]) or not is_ascii_alnum(s[i])
    right = j == len(s) or not is_ascii_alnum(s[j]) or not is_ascii_alnum(s[j - 1])
    return left and right


@lru_cache(maxsize=64)
def _entry_pattern(entries: tuple[str, ...]) -> re.Pattern:
    """One alternation over all entries, longest first, boundary-guarded.

    The regex scan is leftmost and, with longer alternatives listed first,
    prefers the longest entry at the leftmost matching position. Boundary
    lookarounds are skipped on a side where the entry itself starts or ends
    with punctuation (so 'Mr.' may be followed directly by a letter).
    """
    alts = []
    for e in sorted(entries, key=len, reverse=True):
        left = r"(?<![A-Za-z0-9])" if is_ascii_alnum(e[0]) else ""
        right = r"(?![A-Za-z0-9])" if is_ascii_alnum(e[-1]) else ""
        alts.append(f"{left}{re.escape(e)}{right}")
    return re.compile("|".join(alts))


def find_dict_entry(s: str, entries) -> str | Failure:
    """Leftmost boundary-anchored occurrence of any entry; ties prefer longest.

    Case-sensitive by design: 'WA' the abbreviation and 'Wa' a word prefix
    are different things.
    """
    if not isinstance(entries, tuple):
        entries = tuple(entries)
    m = _entry_pattern(entries).search(s)
    return m.group() if m else FAILURE


def _nth_index(s: str, sub: str, n: int, from_end: bool = False) -> int | None:
    """Start offset of the n-th occurrence of `sub` (1-based)."""
    hits = []
    start = 0
    while True:
        i = s.find(sub, start)
        if i < 0:
            break
        hits.append(i)
        start = i + 1
    if len(hits) < n:
        return None
    return hits[-n] if from_end else hits[n - 1]


def _span_api(s: str, opener: tuple[str, int, bool] | None,
              closer: tuple[str, int, bool] | None, strip: bool = False) -> str | Failure:
    """Substring between two delimiter anchors.

    `opener`/`closer` are (substring, occurrence index, from_end); None means
    the string start/end. A missing opener is a Failure; a missing closer
    extends the span to the end of the string.
    """
    lo = 0
    if opener is not None:
        sub, n, from_end = opener
        i = _nth_index(s, sub, n, from_end)
        if i is None:
            return FAILURE
        lo = i + len(sub)
    hi = len(s)
    if closer is not None:
        sub, n, from_end = closer
        j = _nth_index(s[lo:], sub, n, from_end)
        if j is not None:
            hi = lo + j
    out = s[lo:hi]
    return out.strip() if strip else out


# ---------------------------------------------------------------------------
# regex family

_ORDINALS = (("First", 1), ("Second", 2), ("Third", 3), ("Fourth", 4), ("Fifth", 5))
_FROM_END = (("Last", 1), ("SecondToLast", 2), ("ThirdToLast", 3),
             ("FourthToLast", 4), ("FifthToLast", 5))

_CLASS_WORDS = {
    TokenClass.WORD: ("Word", "word"),
    TokenClass.NUMBER: ("Number", "number"),
    TokenClass.ALPHA: ("Alpha", "letter run"),
    TokenClass.WS_TOKEN: ("WS", "whitespace-delimited token"),
    TokenClass.CAPS_WORD: ("CapsWord", "all-caps word"),
    TokenClass.PROPERCASE_WORD: ("PropercaseWord", "propercase word"),
}

_NUMBER_RUN = re.compile(r"[0-9]+")


def _positional(cls: TokenClass, k: int, from_end: bool):
    def fn(s: str, reg: Registry):
        span = match_token(cls, k, from_end, s)
        if isinstance(span, Failure):
            return FAILURE
        return s[span[0]:span[1]]
    return fn


def _positional_specs() -> list[ApiSpec]:
    specs = []
    for cls in (TokenClass.WORD, TokenClass.NUMBER, TokenClass.ALPHA,
                TokenClass.WS_TOKEN, TokenClass.CAPS_WORD, TokenClass.PROPERCASE_WORD):
        word, noun = _CLASS_WORDS[cls]
        for label, k in _ORDINALS:
            specs.append(ApiSpec(
                f"Get{label}{word}", ApiFamily.REGEX,
                f"{noun} number {k} from the start",
                _positional(cls, k, False),
                InputNeeds(classes=((cls, k),)),
            ))
        for label, k in _FROM_END:
            specs.append(ApiSpec(
                f"Get{label}{word}", ApiFamily.REGEX,
                f"{noun} number {k} from the end",
                _positional(cls, k, True),
                InputNeeds(classes=((cls, k),)),
            ))
    return specs


def _first_k_chars(k: int):
    def fn(s: str, reg: Registry):
        return s[:k] if len(s) >= k else FAILURE
    return fn


def _first_k_digits(k: int):
    pat = re.compile(rf"[0-9]{{{k}}}")
    def fn(s: str, reg: Registry):
        m = pat.search(s)
        return m.group() if m else FAILURE
    return fn


def _all_numbers(s: str, reg: Registry):
    runs = _NUMBER_RUN.findall(s)
    return "".join(runs) if runs else FAILURE


def _all_letters(s: str, reg: Registry):
    out = [c for c in s if ("a" <= c <= "z") or ("A" <= c <= "Z")]
    return "".join(out) if out else FAILURE


def _all_propercase(s: str, reg: Registry):
    got = [s[a:b] for a, b in spans(TokenClass.PROPERCASE_WORD, s)]
    return " ".join(got) if got else FAILURE


def _start_to_end_of_first_number(s: str, reg: Registry):
    m = _NUMBER_RUN.search(s)
    return s[:m.end()] if m else FAILURE


def _trim_leading_zeros(s: str, reg: Registry):
    return s.lstrip("0")


# small token factories used by input hints
def _piece(rng, n=2):
    return "".join(rng.choice("abcdefghijklmnopqrstuvwxyz") for _ in range(n))


def _num(rng, lo=1, hi=3):
    return "".join(rng.choice("0123456789") for _ in range(rng.randint(lo, hi)))


def _mk(fmt):
    def make(rng, reg):
        return fmt(rng, reg)
    return make


def _plain_regex_specs() -> list[ApiSpec]:
    char_words = ("", "Two", "Three", "Four", "Five")
    specs = [
        ApiSpec("TrimSpaces", ApiFamily.REGEX,
                "input without leading or trailing whitespace",
                lambda s, r: s.strip()),
        ApiSpec("TrimLeadingZeros", ApiFamily.REGEX,
                "input without leading zero characters", _trim_leading_zeros),
        ApiSpec("GetIdentity", ApiFamily.REGEX, "the input unchanged",
                lambda s, r: s),
        ApiSpec("ReplaceSpacesWithDashes", ApiFamily.REGEX,
                "input with every space replaced by a dash",
                lambda s, r: s.replace(" ", "-")),
        ApiSpec("ReplaceSpacesWithCommas", ApiFamily.REGEX,
                "input with every space replaced by a comma",
                lambda s, r: s.replace(" ", ",")),
        ApiSpec("ReplaceSpacesWithUnderscores", ApiFamily.REGEX,
                "input with every space replaced by an underscore",
                lambda s, r: s.replace(" ", "_")),
        ApiSpec("ToLowercase", ApiFamily.REGEX, "input lowercased",
                lambda s, r: ascii_lower(s)),
        ApiSpec("ToUppercase", ApiFamily.REGEX, "input uppercased",
                lambda s, r: ascii_upper(s)),
        ApiSpec("ToPropercase", ApiFamily.REGEX,
                "input with every word capitalized",
                lambda s, r: ascii_propercase(s)),
        ApiSpec("GetWordBetweenStartAndAt", ApiFamily.REGEX,
                "text before the first '@', trimmed",
                lambda s, r: _span_api(s, None, ("@", 1, False), strip=True)),
        ApiSpec("GetWordBetweenAtAndEnd", ApiFamily.REGEX,
                "text after the first '@', trimmed",
                lambda s, r: _span_api(s, ("@", 1, False), None, strip=True),
                InputNeeds(make=_mk(lambda rng, reg: f"{_piece(rng, 4)}@{_piece(rng, 3)}"))),
        ApiSpec("GetWordBetweenStartAndDot", ApiFamily.REGEX,
                "text before the first '.', trimmed",
                lambda s, r: _span_api(s, None, (".", 1, False), strip=True)),
        ApiSpec("GetWordBetweenDotAndEnd", ApiFamily.REGEX,
                "text after the first '.', trimmed",
                lambda s, r: _span_api(s, (".", 1, False), None, strip=True),
                InputNeeds(make=_mk(lambda rng, reg: f"{_piece(rng)}.{_piece(rng)}"))),
        ApiSpec("GetStartToFirstSpace", ApiFamily.REGEX,
                "text before the first space",
                lambda s, r: _span_api(s, None, (" ", 1, False))),
        ApiSpec("GetFirstSpaceToEnd", ApiFamily.REGEX,
                "text after the first space",
                lambda s, r: _span_api(s, (" ", 1, False), None),
                InputNeeds(classes=((TokenClass.WS_TOKEN, 2),))),
        ApiSpec("GetStartToLastSpace", ApiFamily.REGEX,
                "text before the last space",
                lambda s, r: _span_api(s, None, (" ", 1, True))),
        ApiSpec("GetLastSpaceToEnd", ApiFamily.REGEX,
                "text after the last space",
                lambda s, r: _span_api(s, (" ", 1, True), None),
                InputNeeds(classes=((TokenClass.WS_TOKEN, 2),))),
        ApiSpec("GetStartToDash", ApiFamily.REGEX,
                "text before the first dash",
                lambda s, r: _span_api(s, None, ("-", 1, False))),
        ApiSpec("GetFirstDashToSecondDash", ApiFamily.REGEX,
                "text between the first and second dashes",
                lambda s, r: _span_api(s, ("-", 1, False), ("-", 1, False)),
                InputNeeds(make=_mk(lambda rng, reg: f"{_num(rng)}-{_num(rng)}-{_num(rng)}"))),
        ApiSpec("GetLastDashToEnd", ApiFamily.REGEX,
                "text after the last dash",
                lambda s, r: _span_api(s, ("-", 1, True), None),
                InputNeeds(make=_mk(lambda rng, reg: f"{_piece(rng)}-{_piece(rng)}"))),
        ApiSpec("GetStartToFirstComma", ApiFamily.REGEX,
                "text before the first comma",
                lambda s, r: _span_api(s, None, (",", 1, False))),
        ApiSpec("GetWordBetweenFirstAndSecondComma", ApiFamily.REGEX,
                "text between the first and second commas, trimmed",
                lambda s, r: _span_api(s, (",", 1, False), (",", 1, False), strip=True),
                InputNeeds(make=_mk(lambda rng, reg: f"{_piece(rng)}, {_piece(rng)}, {_piece(rng)}"))),
        ApiSpec("GetWordBetweenSecondAndThirdComma", ApiFamily.REGEX,
                "text between the second and third commas, trimmed",
                lambda s, r: _span_api(s, (",", 2, False), (",", 1, False), strip=True),
                InputNeeds(make=_mk(lambda rng, reg: f"{_piece(rng)}, {_piece(rng)}, {_piece(rng)}, {_piece(rng)}"))),
        ApiSpec("GetLastCommaToEnd", ApiFamily.REGEX,
                "text after the last comma",
                lambda s, r: _span_api(s, (",", 1, True), None),
                InputNeeds(make=_mk(lambda rng, reg: f"{_piece(rng)},{_piece(rng)}"))),
        ApiSpec("GetWordBetweenCommaSpaceAndEnd", ApiFamily.REGEX,
                "text after the first comma-space, trimmed",
                lambda s, r: _span_api(s, (", ", 1, False), None, strip=True),
                InputNeeds(make=_mk(lambda rng, reg: f"{_piece(rng)}, {_piece(rng)}"))),
        ApiSpec("GetStartToParan", ApiFamily.REGEX,
                "text before the first opening parenthesis",
                lambda s, r: _span_api(s, None, ("(", 1, False))),
        ApiSpec("GetStartToFirstColon", ApiFamily.REGEX,
                "text before the first colon",
                lambda s, r: _span_api(s, None, (":", 1, False))),
        ApiSpec("GetStartToSecondColon", ApiFamily.REGEX,
                "text before the second colon",
                lambda s, r: _span_api(s, None, (":", 2, False))),
        ApiSpec("GetStringBetweenLastColonToEnd", ApiFamily.REGEX,
                "text after the last colon",
                lambda s, r: _span_api(s, (":", 1, True), None),
                InputNeeds(make=_mk(lambda rng, reg: f"{_num(rng)}:{_num(rng)}"))),
        ApiSpec("GetStringBetweenLastFirstAndSecondQuote", ApiFamily.REGEX,
                "text between the first and second double quotes",
                lambda s, r: _span_api(s, ('"', 1, False), ('"', 1, False)),
                InputNeeds(make=_mk(lambda rng, reg: f'"{_piece(rng, 3)}"'))),
        ApiSpec("GetStartToEndOfFirstNumber", ApiFamily.REGEX,
                "text from the start through the first number",
                _start_to_end_of_first_number,
                InputNeeds(classes=((TokenClass.NUMBER, 1),))),
    ]
    for i, word in enumerate(char_words, start=1):
        name = f"GetFirst{word}Char" if word else "GetFirstChar"
        noun = "character" if i == 1 else f"{i} characters"
        specs.append(ApiSpec(name, ApiFamily.REGEX, f"the first {noun}",
                             _first_k_chars(i), InputNeeds(min_len=i)))
    for i, word in enumerate(char_words, start=1):
        name = f"GetFirst{word}Digit" if word else "GetFirstDigit"
        noun = "digit" if i == 1 else f"{i} consecutive digits"
        specs.append(ApiSpec(name, ApiFamily.REGEX, f"the first {noun}",
                             _first_k_digits(i),
                             InputNeeds(make=_mk(lambda rng, reg, k=i: _num(rng, k, k + 1)))))
    specs.append(ApiSpec("GetAllPropercaseWords", ApiFamily.REGEX,
                         "every propercase word, space separated", _all_propercase,
                         InputNeeds(classes=((TokenClass.PROPERCASE_WORD, 1),))))
    specs.append(ApiSpec("GetAllLetters", ApiFamily.REGEX,
                         "every letter, concatenated", _all_letters,
                         InputNeeds(classes=((TokenClass.ALPHA, 1),))))
    specs.append(ApiSpec("GetAllNumbers", ApiFamily.REGEX,
                         "every digit, concatenated", _all_numbers,
                         InputNeeds(classes=((TokenClass.NUMBER, 1),))))
    return specs


# Appendix-style catalog order: positional families first, then the rest.
_REGEX_ORDER_HINT = None  # ordering is construction order below


# ---------------------------------------------------------------------------
# lookup family

_STREET_SUFFIXES = ("Street", "Avenue", "Boulevard", "Drive", "Road", "Lane",
                    "Blvd.", "Ave.", "St.", "Dr.", "Rd.", "Ln.", "Way")
_APT_MARKERS = {"Apt", "Apt.", "Unit", "Suite", "Ste."}

_MONTH_NAMES = ("January", "February", "March", "April", "May", "June", "July",
                "August", "September", "October", "November", "December")

_DATE_ISO = re.compile(r"(?<!\d)((?:19|20)\d\d)-(0?[1-9]|1[0-2])-(0?[1-9]|[12]\d|3[01])(?!\d)")
_DATE_US = re.compile(r"(?<!\d)(0?[1-9]|1[0-2])/(0?[1-9]|[12]\d|3[01])/((?:19|20)\d\d)(?!\d)")
_DATE_LONG = re.compile(
    r"\b(" + "|".join(_MONTH_NAMES) + r") (0?[1-9]|[12]\d|3[01]), ((?:19|20)\d\d)\b")


def _find_date(s: str):
    """Leftmost date in any supported format -> (year, month, day, span)."""
    best = None
    m = _DATE_ISO.search(s)
    if m:
        best = (m.start(), int(m.group(1)), int(m.group(2)), int(m.group(3)), m.span())
    m = _DATE_US.search(s)
    if m and (best is None or m.start() < best[0]):
        best = (m.start(), int(m.group(3)), int(m.group(1)), int(m.group(2)), m.span())
    m = _DATE_LONG.search(s)
    if m and (best is None or m.start() < best[0]):
        best = (m.start(), int(m.group(3)), _MONTH_NAMES.index(m.group(1)) + 1,
                int(m.group(2)), m.span())
    if best is None:
        return None
    _, y, mo, d, span = best
    return y, mo, d, span


def _strip_edge_punct(tok: str) -> str:
    i, j = 0, len(tok)
    while i < j and not is_ascii_alnum(tok[i]):
        i += 1
    while j > i and not is_ascii_alnum(tok[j - 1]):
        j -= 1
    return tok[i:j]


_PROPER_TOKEN = re.compile(r"^[A-Z][a-z]+$")


def _street_name(s: str, reg: Registry):
    toks = s.split()
    for i in range(len(toks) - 1):
        if not _PROPER_TOKEN.match(_strip_edge_punct(toks[i])):
            continue
        nxt = toks[i + 1]
        for suf in _STREET_SUFFIXES:
            if nxt.startswith(suf) and not any(is_ascii_alnum(c) for c in nxt[len(suf):]):
                return _strip_edge_punct(toks[i]) + " " + suf
    return FAILURE


def _street_num(s: str, reg: Registry):
    for m in _NUMBER_RUN.finditer(s):
        if 1 <= len(m.group()) <= 4:
            return m.group()
    return FAILURE


def _apt_num(s: str, reg: Registry):
    toks = s.split()
    for i, tok in enumerate(toks):
        if tok in _APT_MARKERS and i + 1 < len(toks):
            nxt = _strip_edge_punct(toks[i + 1])
            if nxt:
                return nxt
        if tok.startswith("#"):
            rest = _strip_edge_punct(tok)
            if rest:
                return rest
    return FAILURE


def _zipcode(s: str, reg: Registry):
    for m in _NUMBER_RUN.finditer(s):
        if len(m.group()) == 5:
            return m.group()
    return FAILURE


def _year(s: str, reg: Registry):
    for m in _NUMBER_RUN.finditer(s):
        if len(m.group()) == 4 and 1900 <= int(m.group()) <= 2099:
            return m.group()
    return FAILURE


def _date(s: str, reg: Registry):
    found = _find_date(s)
    if found is None:
        return FAILURE
    a, b = found[3]
    return s[a:b]


def _table_lookup(table: str):
    def fn(s: str, reg: Registry):
        return find_dict_entry(s, reg.lookup(table))
    return fn


def _pick(table: str):
    def make(rng, reg: Registry):
        return rng.choice(reg.lookup(table))
    return make


def _make_date(rng, reg: Registry):
    y = rng.randint(1950, 2029)
    mo = rng.randint(1, 12)
    d = rng.randint(1, 28)
    style = rng.randrange(3)
    if style == 0:
        return f"{y}-{mo:02d}-{d:02d}"
    if style == 1:
        return f"{mo}/{d}/{y}"
    return f"{_MONTH_NAMES[mo - 1]} {d}, {y}"


def _lookup_specs() -> list[ApiSpec]:
    return [
        ApiSpec("GetStreetNum", ApiFamily.LOOKUP, "street number (1-4 digit run)",
                _street_num, InputNeeds(make=_mk(lambda rng, reg: _num(rng, 1, 4)))),
        ApiSpec("GetStreetName", ApiFamily.LOOKUP,
                "propercase word followed by a street suffix", _street_name,
                InputNeeds(make=_mk(lambda rng, reg:
                                    f"{_piece(rng, 4).capitalize()} {rng.choice(('St.', 'Ave.', 'Dr.', 'Rd.'))}"))),
        ApiSpec("GetAptNum", ApiFamily.LOOKUP, "token after an apartment marker",
                _apt_num, InputNeeds(make=_mk(lambda rng, reg: f"Apt {_num(rng, 1, 2)}B"))),
        ApiSpec("GetCityName", ApiFamily.LOOKUP, "US city found in the input",
                _table_lookup("cities"), InputNeeds(make=_pick("cities"))),
        ApiSpec("GetStateName", ApiFamily.LOOKUP, "US state name found in the input",
                _table_lookup("states"), InputNeeds(make=_pick("states"))),
        ApiSpec("GetStateAbbr", ApiFamily.LOOKUP,
                "two-letter state abbreviation found in the input",
                _table_lookup("state_abbrs"), InputNeeds(make=_pick("state_abbrs"))),
        ApiSpec("GetZipcode", ApiFamily.LOOKUP, "five-digit run found in the input",
                _zipcode, InputNeeds(make=_mk(lambda rng, reg: _num(rng, 5, 5)))),
        ApiSpec("GetFirstName", ApiFamily.LOOKUP, "first name found in the input",
                _table_lookup("first_names"), InputNeeds(make=_pick("first_names"))),
        ApiSpec("GetLastName", ApiFamily.LOOKUP, "last name found in the input",
                _table_lookup("last_names"), InputNeeds(make=_pick("last_names"))),
        ApiSpec("GetTitle", ApiFamily.LOOKUP, "personal title found in the input",
                _table_lookup("titles"), InputNeeds(make=_pick("titles"))),
        ApiSpec("GetSuffix", ApiFamily.LOOKUP, "name suffix found in the input",
                _table_lookup("suffixes"), InputNeeds(make=_pick("suffixes"))),
        ApiSpec("GetCompany", ApiFamily.LOOKUP, "company name found in the input",
                _table_lookup("companies"), InputNeeds(make=_pick("companies"))),
        ApiSpec("GetCEO", ApiFamily.LOOKUP, "CEO name found in the input",
                _table_lookup("ceos"), InputNeeds(make=_pick("ceos"))),
        ApiSpec("GetStockSymbol", ApiFamily.LOOKUP, "stock symbol found in the input",
                _table_lookup("stock_symbols"), InputNeeds(make=_pick("stock_symbols"))),
        ApiSpec("GetWeekday", ApiFamily.LOOKUP, "weekday name found in the input",
                _table_lookup("weekdays"), InputNeeds(make=_pick("weekdays"))),
        ApiSpec("GetMonth", ApiFamily.LOOKUP, "month name found in the input",
                _table_lookup("months"), InputNeeds(make=_pick("months"))),
        ApiSpec("GetYear", ApiFamily.LOOKUP, "four-digit year found in the input",
                _year, InputNeeds(make=_mk(lambda rng, reg: str(rng.randint(1900, 2099))))),
        ApiSpec("GetDate", ApiFamily.LOOKUP, "date found in the input", _date,
                InputNeeds(make=_make_date)),
    ]


# ---------------------------------------------------------------------------
# transform family

def _table_transform(table: str):
    def fn(s: str, reg: Registry):
        mapping = reg.transform(table)
        e = find_dict_entry(s, mapping.keys())
        if isinstance(e, Failure):
            return FAILURE
        return mapping[e]
    return fn


def _pick_source(table: str):
    def make(rng, reg: Registry):
        return rng.choice(list(reg.transform(table)))
    return make


def _initial(table: str):
    def fn(s: str, reg: Registry):
        e = find_dict_entry(s, reg.lookup(table))
        if isinstance(e, Failure):
            return FAILURE
        return e[0] + "."
    return fn


def _ordinal(day: int) -> str:
    if 10 <= day % 100 <= 13:
        return f"{day}th"
    return f"{day}{ {1: 'st', 2: 'nd', 3: 'rd'}.get(day % 10, 'th') }"


def _date_part(part: str):
    def fn(s: str, reg: Registry):
        found = _find_date(s)
        if found is None:
            return FAILURE
        y, mo, d, _ = found
        if part == "year":
            return str(y)
        if part == "month":
            return _MONTH_NAMES[mo - 1]
        if part == "ordinal":
            return _ordinal(d)
        try:
            wd = datetime.date(y, mo, d).weekday()
        except ValueError:
            return FAILURE
        return ("Monday", "Tuesday", "Wednesday", "Thursday",
                "Friday", "Saturday", "Sunday")[wd]
    return fn


def _transform_specs() -> list[ApiSpec]:
    return [
        ApiSpec("GetStateFromCity", ApiFamily.TRANSFORM,
                "state abbreviation of a city found in the input",
                _table_transform("city_to_state"), InputNeeds(make=_pick_source("city_to_state"))),
        ApiSpec("GetCityFromZipcode", ApiFamily.TRANSFORM,
                "city of a zipcode found in the input",
                _table_transform("zip_to_city"), InputNeeds(make=_pick_source("zip_to_city"))),
        ApiSpec("GetStateAbbrFromState", ApiFamily.TRANSFORM,
                "abbreviation of a state name found in the input",
                _table_transform("state_to_abbr"), InputNeeds(make=_pick_source("state_to_abbr"))),
        ApiSpec("GetStateFromStateAbbr", ApiFamily.TRANSFORM,
                "state name of an abbreviation found in the input",
                _table_transform("abbr_to_state"), InputNeeds(make=_pick_source("abbr_to_state"))),
        ApiSpec("GetFirstInitial", ApiFamily.TRANSFORM,
                "initial of a first name found in the input",
                _initial("first_names"), InputNeeds(make=_pick("first_names"))),
        ApiSpec("GetLastInitial", ApiFamily.TRANSFORM,
                "initial of a last name found in the input",
                _initial("last_names"), InputNeeds(make=_pick("last_names"))),
        ApiSpec("GetStockSymbolFromCEO", ApiFamily.TRANSFORM,
                "stock symbol of a CEO found in the input",
                _table_transform("ceo_to_symbol"), InputNeeds(make=_pick_source("ceo_to_symbol"))),
        ApiSpec("GetCEOFromCompany", ApiFamily.TRANSFORM,
                "CEO of a company found in the input",
                _table_transform("company_to_ceo"), InputNeeds(make=_pick_source("company_to_ceo"))),
        ApiSpec("GetCompanyFromStockSymbol", ApiFamily.TRANSFORM,
                "company of a stock symbol found in the input",
                _table_transform("symbol_to_company"), InputNeeds(make=_pick_source("symbol_to_company"))),
        ApiSpec("GetOrdinalFromDate", ApiFamily.TRANSFORM,
                "ordinal day of a date found in the input",
                _date_part("ordinal"), InputNeeds(make=_make_date)),
        ApiSpec("GetMonthFromDate", ApiFamily.TRANSFORM,
                "month name of a date found in the input",
                _date_part("month"), InputNeeds(make=_make_date)),
        ApiSpec("GetWeekdayFromDate", ApiFamily.TRANSFORM,
                "weekday of a date found in the input",
                _date_part("weekday"), InputNeeds(make=_make_date)),
        ApiSpec("GetYearFromDate", ApiFamily.TRANSFORM,
                "year of a date found in the input",
                _date_part("year"), InputNeeds(make=_make_date)),
    ]


# ---------------------------------------------------------------------------
# char-flow definitions
#
# flow(possible, registry) -> frozenset | None. `possible` over-approximates
# the characters the argument string may contain; the result over-approximates
# the output, None meaning the API cannot succeed on any such argument. Flows
# must stay conservative: pruning a satisfiable program is a bug, keeping an
# unsatisfiable one only costs time.

_CLASS_FLOW_SETS = {
    TokenClass.NUMBER: (DIGIT_CHARS, PRINTABLE_CHARS - DIGIT_CHARS),
    TokenClass.ALPHA: (LETTER_CHARS, PRINTABLE_CHARS - LETTER_CHARS),
    TokenClass.WORD: (ALNUM_CHARS, PRINTABLE_CHARS - ALNUM_CHARS),
    TokenClass.WS_TOKEN: (PRINTABLE_CHARS - frozenset(" "), frozenset(" ")),
    TokenClass.CAPS_WORD: (UPPER_CHARS, PRINTABLE_CHARS - LETTER_CHARS),
    TokenClass.PROPERCASE_WORD: (LETTER_CHARS, PRINTABLE_CHARS - LETTER_CHARS),
}


def _flow_positional(cls: TokenClass, k: int):
    token_chars, sep_chars = _CLASS_FLOW_SETS[cls]

    def flow(possible, reg):
        if cls is TokenClass.PROPERCASE_WORD:
            if not (possible & UPPER_CHARS) or not (possible & LOWER_CHARS):
                return None
        elif not (possible & token_chars):
            return None
        if k >= 2 and not (possible & sep_chars):
            return None
        return possible & token_chars

    return flow


def _flow_span(required: str = ""):
    req = frozenset(required)

    def flow(possible, reg):
        if req and not req <= possible:
            return None
        return possible

    return flow


def _flow_filter(keep: frozenset, extra: frozenset = frozenset(),
                 require_any: tuple[frozenset, ...] = ()):
    def flow(possible, reg):
        for alt in require_any:
            if not (possible & alt):
                return None
        return (possible & keep) | extra

    return flow


def _lower_of(chars):
    return frozenset(c.lower() for c in chars)


def _upper_of(chars):
    return frozenset(c.upper() for c in chars)


def _flow_lower(possible, reg):
    return (possible - UPPER_CHARS) | _lower_of(possible & UPPER_CHARS)


def _flow_upper(possible, reg):
    return (possible - LOWER_CHARS) | _upper_of(possible & LOWER_CHARS)


def _flow_proper(possible, reg):
    letters = possible & LETTER_CHARS
    return (possible - LETTER_CHARS) | _lower_of(letters) | _upper_of(letters)


def _flow_replace_space(repl: str):
    def flow(possible, reg):
        if " " in possible:
            return (possible - frozenset(" ")) | frozenset(repl)
        return possible

    return flow


@lru_cache(maxsize=64)
def _table_char_info(entries: tuple[str, ...]):
    sets = tuple(frozenset(e) for e in entries)
    union = frozenset().union(*sets) if sets else frozenset()
    return sets, union


def _feasible_union(pairs, possible):
    """Union of value charsets over (key_chars, value_chars) pairs whose key
    is representable within `possible`."""
    out = set()
    any_feasible = False
    for key_chars, value_chars in pairs:
        if key_chars <= possible:
            any_feasible = True
            out |= value_chars
    return frozenset(out) if any_feasible else None


def _flow_lookup_table(table: str):
    def flow(possible, reg):
        sets, union = _table_char_info(reg.lookup(table))
        if union <= possible:
            return union
        return _feasible_union([(s, s) for s in sets], possible)

    return flow


def _flow_transform_table(table: str):
    def flow(possible, reg):
        mapping = reg.transform(table)
        keys = tuple(mapping)
        key_sets, key_union = _table_char_info(keys)
        value_sets, value_union = _table_char_info(tuple(mapping.values()))
        if key_union <= possible:
            return value_union
        return _feasible_union(list(zip(key_sets, value_sets)), possible)

    return flow


def _flow_initial(table: str):
    def flow(possible, reg):
        sets, _ = _table_char_info(reg.lookup(table))
        feas = [s for s in sets if s <= possible]
        if not feas:
            return None
        entries = [e for e in reg.lookup(table) if frozenset(e) <= possible]
        return frozenset(e[0] for e in entries) | frozenset(".")

    return flow


_DATE_OUT = DIGIT_CHARS | frozenset("-/, ") | frozenset("JanuryFebMchpilJgstOcoDvm")
_ORDINAL_OUT = DIGIT_CHARS | frozenset("stndrh")
_MONTH_OUT = frozenset("".join(_MONTH_NAMES))
_WEEKDAY_OUT = frozenset("MondayTuesWdhrFiSt")


def _flow_const(out: frozenset, require_any: tuple[frozenset, ...] = ()):
    def flow(possible, reg):
        for alt in require_any:
            if not (possible & alt):
                return None
        return out

    return flow


def _build_flows() -> dict:
    flows: dict[str, Callable] = {}
    for cls in (TokenClass.WORD, TokenClass.NUMBER, TokenClass.ALPHA,
                TokenClass.WS_TOKEN, TokenClass.CAPS_WORD, TokenClass.PROPERCASE_WORD):
        word, _ = _CLASS_WORDS[cls]
        for label, k in _ORDINALS + _FROM_END:
            flows[f"Get{label}{word}"] = _flow_positional(cls, k)

    ident = _flow_span()
    flows.update({
        "TrimSpaces": ident,
        "TrimLeadingZeros": ident,
        "GetIdentity": ident,
        "ReplaceSpacesWithDashes": _flow_replace_space("-"),
        "ReplaceSpacesWithCommas": _flow_replace_space(","),
        "ReplaceSpacesWithUnderscores": _flow_replace_space("_"),
        "ToLowercase": _flow_lower,
        "ToUppercase": _flow_upper,
        "ToPropercase": _flow_proper,
        "GetWordBetweenStartAndAt": _flow_span(),
        "GetWordBetweenAtAndEnd": _flow_span("@"),
        "GetWordBetweenStartAndDot": _flow_span(),
        "GetWordBetweenDotAndEnd": _flow_span("."),
        "GetStartToFirstSpace": _flow_span(),
        "GetFirstSpaceToEnd": _flow_span(" "),
        "GetStartToLastSpace": _flow_span(),
        "GetLastSpaceToEnd": _flow_span(" "),
        "GetStartToDash": _flow_span(),
        "GetFirstDashToSecondDash": _flow_span("-"),
        "GetLastDashToEnd": _flow_span("-"),
        "GetStartToFirstComma": _flow_span(),
        "GetWordBetweenFirstAndSecondComma": _flow_span(","),
        "GetWordBetweenSecondAndThirdComma": _flow_span(","),
        "GetLastCommaToEnd": _flow_span(","),
        "GetWordBetweenCommaSpaceAndEnd": _flow_span(", "),
        "GetStartToParan": _flow_span(),
        "GetStartToFirstColon": _flow_span(),
        "GetStartToSecondColon": _flow_span(),
        "GetStringBetweenLastColonToEnd": _flow_span(":"),
        "GetStringBetweenLastFirstAndSecondQuote": _flow_span('"'),
        "GetStartToEndOfFirstNumber": _flow_filter(
            PRINTABLE_CHARS, require_any=(DIGIT_CHARS,)),
        "GetAllNumbers": _flow_filter(DIGIT_CHARS, require_any=(DIGIT_CHARS,)),
        "GetAllLetters": _flow_filter(LETTER_CHARS, require_any=(LETTER_CHARS,)),
        "GetAllPropercaseWords": _flow_filter(
            LETTER_CHARS, extra=frozenset(" "),
            require_any=(UPPER_CHARS, LOWER_CHARS)),
    })
    for i, word in enumerate(("", "Two", "Three", "Four", "Five"), start=1):
        flows[f"GetFirst{word}Char" if word else "GetFirstChar"] = _flow_span()
        flows[f"GetFirst{word}Digit" if word else "GetFirstDigit"] = _flow_filter(
            DIGIT_CHARS, require_any=(DIGIT_CHARS,))

    flows.update({
        "GetStreetNum": _flow_filter(DIGIT_CHARS, require_any=(DIGIT_CHARS,)),
        "GetStreetName": _flow_filter(
            LETTER_CHARS | frozenset(" ."),
            require_any=(UPPER_CHARS, LOWER_CHARS, frozenset(" "))),
        "GetAptNum": _flow_filter(ALNUM_CHARS),
        "GetCityName": _flow_lookup_table("cities"),
        "GetStateName": _flow_lookup_table("states"),
        "GetStateAbbr": _flow_lookup_table("state_abbrs"),
        "GetZipcode": _flow_filter(DIGIT_CHARS, require_any=(DIGIT_CHARS,)),
        "GetFirstName": _flow_lookup_table("first_names"),
        "GetLastName": _flow_lookup_table("last_names"),
        "GetTitle": _flow_lookup_table("titles"),
        "GetSuffix": _flow_lookup_table("suffixes"),
        "GetCompany": _flow_lookup_table("companies"),
        "GetCEO": _flow_lookup_table("ceos"),
        "GetStockSymbol": _flow_lookup_table("stock_symbols"),
        "GetWeekday": _flow_lookup_table("weekdays"),
        "GetMonth": _flow_lookup_table("months"),
        "GetYear": _flow_filter(DIGIT_CHARS, require_any=(DIGIT_CHARS,)),
        "GetDate": _flow_const(_DATE_OUT, require_any=(DIGIT_CHARS,)),
        "GetStateFromCity": _flow_transform_table("city_to_state"),
        "GetCityFromZipcode": _flow_transform_table("zip_to_city"),
        "GetStateAbbrFromState": _flow_transform_table("state_to_abbr"),
        "GetStateFromStateAbbr": _flow_transform_table("abbr_to_state"),
        "GetFirstInitial": _flow_initial("first_names"),
        "GetLastInitial": _flow_initial("last_names"),
        "GetStockSymbolFromCEO": _flow_transform_table("ceo_to_symbol"),
        "GetCEOFromCompany": _flow_transform_table("company_to_ceo"),
        "GetCompanyFromStockSymbol": _flow_transform_table("symbol_to_company"),
        "GetOrdinalFromDate": _flow_const(_ORDINAL_OUT, require_any=(DIGIT_CHARS,)),
        "GetMonthFromDate": _flow_const(_MONTH_OUT, require_any=(DIGIT_CHARS,)),
        "GetWeekdayFromDate": _flow_const(_WEEKDAY_OUT, require_any=(DIGIT_CHARS,)),
        "GetYearFromDate": _flow_const(DIGIT_CHARS, require_any=(DIGIT_CHARS,)),
    })
    return flows


# ---------------------------------------------------------------------------
# catalog

# Shorthand names appearing in running text and existing program renderings.
ALIASES = {
    "GetCity": "GetCityName",
    "GetState": "GetStateName",
    "GetFirstNum": "GetFirstNumber",
    "GetSecondNum": "GetSecondNumber",
    "GetThirdNum": "GetThirdNumber",
    "GetBetFirstAndSecondCommas": "GetWordBetweenFirstAndSecondComma",
    "GetFirstNameInitial": "GetFirstInitial",
}

# APIs that return a rewritten string rather than a contiguous span of input.
REWRITING_APIS = frozenset({
    "TrimSpaces", "TrimLeadingZeros",
    "ReplaceSpacesWithDashes", "ReplaceSpacesWithCommas", "ReplaceSpacesWithUnderscores",
    "ToLowercase", "ToUppercase", "ToPropercase",
    "GetAllPropercaseWords", "GetAllLetters", "GetAllNumbers",
})

IDEMPOTENT_APIS = frozenset({
    "ToLowercase", "ToUppercase", "ToPropercase", "TrimSpaces", "TrimLeadingZeros",
    "ReplaceSpacesWithDashes", "ReplaceSpacesWithCommas", "ReplaceSpacesWithUnderscores",
})


class ApiCatalog:
    """Ordered, immutable collection of every ApiSpec plus its registry."""

    def __init__(self, registry: Registry):
        self.registry = registry
        regex = _positional_specs() + _plain_regex_specs()
        lookup = _lookup_specs()
        transform = _transform_specs()
        assert len(regex) == 104, len(regex)
        assert len(lookup) == 18, len(lookup)
        assert len(transform) == 13, len(transform)
        flows = _build_flows()
        self.specs: tuple[ApiSpec, ...] = tuple(
            replace(spec, flow=flows.get(spec.name))
            for spec in regex + lookup + transform)
        self._by_name = {spec.name: spec for spec in self.specs}
        assert len(self._by_name) == 135, "duplicate API names"
        for alias, target in ALIASES.items():
            self._by_name[alias] = self._by_name[target]

    def resolve(self, name: str) -> ApiSpec:
        spec = self._by_name.get(name)
        if spec is None:
            raise UnknownApiError(f"unknown API: {name!r}")
        return spec

    def has(self, name: str) -> bool:
        return name in self._by_name

    def eval(self, name: str, s: str) -> str | Failure:
        spec = self.resolve(name)
        return spec.fn(s, self.registry)

    def list(self, family: ApiFamily | None = None) -> tuple[ApiSpec, ...]:
        if family is None:
            return self.specs
        return tuple(spec for spec in self.specs if spec.family == family)

    def export(self) -> list[dict]:
        """Machine-readable listing for the service and UI."""
        return [{"name": s.name, "family": s.family.value, "description": s.description}
                for s in self.specs]


_DEFAULT: ApiCatalog | None = None


def default_catalog() -> ApiCatalog:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = ApiCatalog(default_registry())
    return _DEFAULT


def eval_api(name: str, s: str, catalog: ApiCatalog | None = None) -> str | Failure:
    return (catalog or default_catalog()).eval(name, s)


def list_apis(family: ApiFamily | None = None,
              catalog: ApiCatalog | None = None) -> tuple[ApiSpec, ...]:
    return (catalog or default_catalog()).list(family)
