"""Dictionary registry and data-file loading.

File formats (UTF-8, one record per line, '#' lines are comments):
  lookup tables     entry
  transform tables  source<TAB>target
  constants         IDENT<TAB>literal   (literal kept verbatim, spaces included)

Entry sets for the lookup side of paired tables (state names, cities,
companies, ...) are derived from the transform sources so the two can never
disagree. The registry is immutable after load; evaluation only reads it.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DataFormatError, MissingTableError

TRANSFORM_FILES = (
    "state_to_abbr",
    "abbr_to_state",
    "city_to_state",
    "zip_to_city",
    "company_to_ceo",
    "ceo_to_symbol",
    "symbol_to_company",
)

ENTRY_FILES = (
    "months",
    "weekdays",
    "titles",
    "suffixes",
    "first_names",
    "last_names",
)


def data_path() -> Path:
    """Directory holding the bundled data files."""
    return Path(str(importlib.resources.files("dapip").joinpath("data")))


def _lines(path: Path) -> list[tuple[int, str]]:
    if not path.exists():
        raise MissingTableError(f"missing data file: {path}")
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line or line.startswith("#"):
                continue
            out.append((lineno, line))
    return out


def read_entries(path: Path) -> tuple[str, ...]:
    """One entry per line; entries must be unique and non-empty."""
    seen: dict[str, int] = {}
    for lineno, line in _lines(path):
        if line in seen:
            raise DataFormatError(f"{path}:{lineno}: duplicate entry {line!r}")
        seen[line] = lineno
    return tuple(seen)


def read_pairs(path: Path) -> dict[str, str]:
    """source<TAB>target per line; sources must be unique."""
    mapping: dict[str, str] = {}
    for lineno, line in _lines(path):
        if "\t" not in line:
            raise DataFormatError(f"{path}:{lineno}: expected source<TAB>target")
        source, target = line.split("\t", 1)
        if not source or not target:
            raise DataFormatError(f"{path}:{lineno}: empty source or target")
        if source in mapping:
            raise DataFormatError(f"{path}:{lineno}: duplicate source {source!r}")
        mapping[source] = target
    return mapping


def load_constants(path: Path | None = None) -> tuple[tuple[str, str], ...]:
    """Ordered (IDENT, literal) table for the constant-string universe."""
    path = path or data_path() / "constants.tsv"
    out: list[tuple[str, str]] = []
    seen = set()
    for lineno, line in _lines(path):
        if "\t" not in line:
            raise DataFormatError(f"{path}:{lineno}: expected IDENT<TAB>literal")
        ident, literal = line.split("\t", 1)
        if not ident or not literal:
            raise DataFormatError(f"{path}:{lineno}: empty ident or literal")
        if ident in seen:
            raise DataFormatError(f"{path}:{lineno}: duplicate ident {ident!r}")
        seen.add(ident)
        out.append((ident, literal))
    return tuple(out)


def load_noise_words(path: Path | None = None) -> tuple[str, ...]:
    return read_entries(path or data_path() / "noise_words.tsv")


@dataclass(frozen=True)
class Registry:
    """All lookup entry sets and transform mappings, keyed by table name."""

    lookups: dict[str, tuple[str, ...]] = field(default_factory=dict)
    transforms: dict[str, dict[str, str]] = field(default_factory=dict)

    def lookup(self, name: str) -> tuple[str, ...]:
        return self.lookups[name]

    def transform(self, name: str) -> dict[str, str]:
        return self.transforms[name]


def load_dictionaries(data_dir: Path | str | None = None) -> Registry:
    """Load every table from `data_dir` (defaults to the bundled data)."""
    base = Path(data_dir) if data_dir is not None else data_path()

    transforms: dict[str, dict[str, str]] = {}
    for name in TRANSFORM_FILES:
        mapping = read_pairs(base / f"{name}.tsv")
        if not mapping:
            raise MissingTableError(f"{base / (name + '.tsv')}: table is empty")
        transforms[name] = mapping

    lookups: dict[str, tuple[str, ...]] = {}
    for name in ENTRY_FILES:
        entries = read_entries(base / f"{name}.tsv")
        if not entries:
            raise MissingTableError(f"{base / (name + '.tsv')}: table is empty")
        lookups[name] = entries

    # entry sets derived from transform sources
    lookups["states"] = tuple(transforms["state_to_abbr"])
    lookups["state_abbrs"] = tuple(transforms["abbr_to_state"])
    lookups["cities"] = tuple(transforms["city_to_state"])
    lookups["companies"] = tuple(transforms["company_to_ceo"])
    lookups["ceos"] = tuple(transforms["ceo_to_symbol"])
    lookups["stock_symbols"] = tuple(transforms["symbol_to_company"])

    if len(lookups["states"]) != 50:
        raise DataFormatError(
            f"state table must have exactly 50 entries, found {len(lookups['states'])}"
        )
    return Registry(lookups=lookups, transforms=transforms)


_DEFAULT: Registry | None = None


def default_registry() -> Registry:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = load_dictionaries()
    return _DEFAULT
