"""Mapping harvested language names and codes onto ISO 639-3."""

from __future__ import annotations

import csv
import re
import unicodedata
from collections import defaultdict
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

UNMAPPED = None

_CODE3 = re.compile(r"^[a-z]{3}$")
_PAREN = re.compile(r"\s*[(\[][^()\[\]]*[)\]]\s*")
_TAG = re.compile(r"^([a-z]{2,3})(?:[-_][a-z0-9]{1,8})+$")

ISO_COLUMNS = ("Id", "Part2b", "Part2t", "Part1", "Scope", "Language_Type", "Ref_Name", "Comment")


class IsoTableError(ValueError):
    pass


class AliasError(ValueError):
    pass


def fold_name(raw: str) -> str:
    """Case-fold, strip diacritics and collapse whitespace; qualifiers are kept."""
    text = unicodedata.normalize("NFKD", str(raw))
    text = "".join(ch for ch in text if not unicodedata.combining(ch))
    return " ".join(text.casefold().split())


def normalize_name(raw: str) -> str:
    """Canonical lookup form of a language name.

    >>> normalize_name("  Portuguese (Brazil) ")
    'portuguese'
    >>> normalize_name("Français")
    'francais'
    """
    folded = fold_name(raw)
    stripped = _PAREN.sub(" ", folded)
    return " ".join(stripped.split())


@dataclass(frozen=True)
class IsoEntry:
    code: str
    reference_name: str
    part1: str | None = None
    part2b: str | None = None
    part2t: str | None = None
    scope: str = "I"
    language_type: str = "L"


class Iso639Table:
    """The ISO 639-3 code table with secondary indexes by part1/part2 code and name."""

    def __init__(self, entries):
        self.entries: dict[str, IsoEntry] = {}
        self._alt: dict[str, str] = {}
        for e in entries:
            if not _CODE3.match(e.code):
                raise IsoTableError(f"malformed ISO 639-3 code {e.code!r}")
            if e.code in self.entries:
                raise IsoTableError(f"duplicate ISO 639-3 code {e.code!r}")
            self.entries[e.code] = e
        for e in self.entries.values():
            for alt in (e.part1, e.part2b, e.part2t):
                if alt and alt != e.code:
                    if alt in self._alt and self._alt[alt] != e.code:
                        raise IsoTableError(f"{alt!r} maps to both {self._alt[alt]} and {e.code}")
                    self._alt[alt] = e.code

        by_name: dict[str, set[str]] = defaultdict(set)
        by_stripped: dict[str, set[str]] = defaultdict(set)
        for e in self.entries.values():
            by_name[fold_name(e.reference_name)].add(e.code)
            by_stripped[normalize_name(e.reference_name)].add(e.code)
        # ambiguous names are left to the alias table
        self._by_name = {k: next(iter(v)) for k, v in by_name.items() if len(v) == 1}
        self._by_stripped = {k: next(iter(v)) for k, v in by_stripped.items() if len(v) == 1}
        self.ambiguous_names = sorted(k for k, v in by_name.items() if len(v) > 1)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, code) -> bool:
        return code in self.entries

    def __iter__(self):
        return iter(sorted(self.entries))

    @property
    def codes(self) -> list[str]:
        return sorted(self.entries)

    def name(self, code: str) -> str:
        return self.entries[code].reference_name

    def resolve_code(self, token: str) -> str | None:
        """639-3, 639-2 (B or T) or 639-1 code, or a language tag like ``pt-BR``."""
        token = token.strip().lower()
        m = _TAG.match(token)
        if m:
            token = m.group(1)
        if token in self.entries:
            return token
        return self._alt.get(token)

    def lookup_name(self, folded: str, stripped: bool = False) -> str | None:
        return (self._by_stripped if stripped else self._by_name).get(folded)

    @classmethod
    def from_tab(cls, path) -> "Iso639Table":
        """Parse the official tab-separated ``iso-639-3.tab`` download."""
        path = Path(path)
        with path.open(encoding="utf-8-sig", newline="") as fh:
            return cls.from_lines(fh, str(path))

    @classmethod
    def from_lines(cls, lines, origin: str = "<iso table>") -> "Iso639Table":
        reader = csv.reader(lines, delimiter="\t", quoting=csv.QUOTE_NONE)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:7]] != list(ISO_COLUMNS[:7]):
            raise IsoTableError(f"{origin}: not an ISO 639-3 code table (header {header!r})")
        entries = []
        for lineno, row in enumerate(reader, start=2):
            if not row or not any(c.strip() for c in row):
                continue
            if len(row) < 7:
                raise IsoTableError(f"{origin}:{lineno}: expected at least 7 columns, got {len(row)}")
            code, p2b, p2t, p1, scope, ltype, ref = (c.strip() for c in row[:7])
            if not _CODE3.match(code) or not ref:
                raise IsoTableError(f"{origin}:{lineno}: malformed row {row!r}")
            entries.append(
                IsoEntry(code, ref, p1 or None, p2b or None, p2t or None, scope, ltype)
            )
        try:
            return cls(entries)
        except IsoTableError as exc:
            raise IsoTableError(f"{origin}: {exc}") from None

    @classmethod
    def default(cls) -> "Iso639Table":
        """The code table bundled with the package."""
        ref = resources.files("dlsscale") / "data" / "iso-639-3.tab"
        with ref.open(encoding="utf-8-sig", newline="") as fh:
            return cls.from_lines(fh, "iso-639-3.tab")


@dataclass
class AliasTable:
    """Curated name → ISO 639-3 code mappings, keyed by folded name."""

    mappings: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        self.mappings = {fold_name(k): v.strip().lower() for k, v in self.mappings.items()}

    def get(self, key: str) -> str | None:
        return self.mappings.get(key)

    def validate(self, iso: Iso639Table) -> None:
        bad = sorted(f"{k}->{v}" for k, v in self.mappings.items() if v not in iso)
        if bad:
            raise AliasError(f"alias targets not in the ISO table: {', '.join(bad)}")

    @classmethod
    def load(cls, path, iso: Iso639Table | None = None) -> "AliasTable":
        """Read a tab-separated ``name<TAB>code`` file.

        Extra columns are ignored and rows with an empty code are skipped, so a
        curator-completed unmapped report loads directly. ``#`` starts a comment line.
        """
        mappings: dict[str, str] = {}
        with Path(path).open(encoding="utf-8-sig", newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh, delimiter="\t"), start=1):
                if not row or row[0].startswith("#"):
                    continue
                if lineno == 1 and row[0].strip().lower() in ("name", "normalized_name"):
                    continue
                if len(row) < 2:
                    raise AliasError(f"{path}:{lineno}: expected name and code columns")
                name, code = row[0].strip(), row[1].strip().lower()
                if not name or not code:
                    continue
                key = fold_name(name)
                if key in mappings and mappings[key] != code:
                    raise AliasError(f"{path}:{lineno}: {name!r} already maps to {mappings[key]}")
                mappings[key] = code
        table = cls(mappings)
        if iso is not None:
            table.validate(iso)
        return table


def map_name(raw: str, iso: Iso639Table, aliases: AliasTable | None = None) -> str | None:
    """Resolve one harvested name to an ISO 639-3 code, or ``UNMAPPED`` (None).

    Order: code (639-3/2/1 or tag), then the full folded name against reference
    names and aliases, then the same with parenthetical qualifiers removed.
    """
    aliases = aliases or AliasTable()
    code = iso.resolve_code(raw)
    if code:
        return code
    full = fold_name(raw)
    bare = normalize_name(raw)
    for key, stripped in ((full, False), (bare, True)):
        if not key:
            continue
        hit = iso.lookup_name(key, stripped=stripped) or aliases.get(key)
        if hit:
            return hit
    if bare != full:
        code = iso.resolve_code(bare)
        if code:
            return code
    return UNMAPPED


@dataclass(frozen=True)
class UnmappedRow:
    name: str
    frequency: int
    tools: tuple[str, ...]
    raw_forms: tuple[str, ...]


@dataclass
class UnmappedReport:
    rows: list[UnmappedRow] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)

    def write(self, path) -> None:
        """Tab-separated; filling the ``code`` column turns it into an alias file."""
        with Path(path).open("w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, delimiter="\t", lineterminator="\n")
            w.writerow(["normalized_name", "code", "frequency", "tools", "raw_forms"])
            for r in self.rows:
                w.writerow([r.name, "", r.frequency, ";".join(r.tools), ";".join(r.raw_forms)])


def map_harvest(records, iso: Iso639Table, aliases: AliasTable | None = None):
    """Resolve every record's names.

    Returns ``(code_sets, report)`` where ``code_sets`` maps tool_id to the
    sorted, de-duplicated tuple of codes in record order.
    """
    code_sets: dict[str, tuple[str, ...]] = {}
    misses: dict[str, dict] = {}
    for rec in records:
        codes = set()
        for raw in rec.raw_names:
            code = map_name(raw, iso, aliases)
            if code is None:
                key = normalize_name(raw) or raw
                slot = misses.setdefault(key, {"tools": [], "raw": []})
                if rec.tool_id not in slot["tools"]:
                    slot["tools"].append(rec.tool_id)
                if raw not in slot["raw"]:
                    slot["raw"].append(raw)
            else:
                codes.add(code)
        code_sets[rec.tool_id] = tuple(sorted(codes))
    rows = [
        UnmappedRow(name, len(v["tools"]), tuple(v["tools"]), tuple(v["raw"]))
        for name, v in misses.items()
    ]
    rows.sort(key=lambda r: (-r.frequency, r.name))
    return code_sets, UnmappedReport(rows)
