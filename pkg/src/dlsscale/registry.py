"""Tool registry loading and harvesting of supported-language lists.

A registry is a JSON document::

    {"tools": [
        {"tool_id": "gtrans", "category": "Meaning",
         "source": "sources/gtrans.html",
         "extractor": {"kind": "regex", "arg": "<option[^>]*>([^<]+)</option>"},
         "notes": "..."}
    ]}

Relative ``source`` paths are resolved against the registry file's directory.
Sources starting with ``http://`` or ``https://`` are fetched over the network.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import jsonpointer

from .categories import Category, UnknownCategoryError

logger = logging.getLogger(__name__)

EXTRACTOR_KINDS = ("lines", "split", "regex", "json-pointer")


class RegistryError(ValueError):
    """Registry file could not be parsed or violates a registry invariant."""


class DuplicateToolError(RegistryError):
    pass


class ExtractorError(ValueError):
    """An extraction rule is malformed or cannot be applied to the fetched body."""


class FetchError(OSError):
    pass


@dataclass(frozen=True)
class Extractor:
    kind: str
    arg: str | None = None

    def __post_init__(self):
        if self.kind not in EXTRACTOR_KINDS:
            raise ExtractorError(
                f"unknown extractor kind {self.kind!r}; expected one of {EXTRACTOR_KINDS}"
            )
        if self.kind == "split" and not self.arg:
            raise ExtractorError("split extractor needs a non-empty separator")
        if self.kind == "regex":
            try:
                groups = re.compile(self.arg or "").groups
            except re.error as exc:
                raise ExtractorError(f"invalid regex {self.arg!r}: {exc}") from exc
            if groups != 1:
                raise ExtractorError(
                    f"regex extractor needs exactly one capture group, got {groups}"
                )
        if self.kind == "json-pointer":
            try:
                jsonpointer.JsonPointer(self.arg or "")
            except jsonpointer.JsonPointerException as exc:
                raise ExtractorError(f"invalid JSON pointer {self.arg!r}: {exc}") from exc

    def extract(self, body: str) -> list[str]:
        if self.kind == "lines":
            items = body.splitlines()
        elif self.kind == "split":
            items = body.split(self.arg)
        elif self.kind == "regex":
            items = re.findall(self.arg, body)
        else:
            try:
                doc = json.loads(body)
                value = jsonpointer.resolve_pointer(doc, self.arg)
            except (ValueError, jsonpointer.JsonPointerException) as exc:
                raise ExtractorError(f"cannot resolve {self.arg!r}: {exc}") from exc
            if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
                raise ExtractorError(f"{self.arg!r} does not point to an array of strings")
            items = value
        return [s.strip() for s in items if s.strip()]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "arg": self.arg}


@dataclass(frozen=True)
class ToolSpec:
    tool_id: str
    category: Category
    source: str
    extractor: Extractor
    notes: str = ""

    @property
    def is_remote(self) -> bool:
        return self.source.startswith(("http://", "https://"))

    def to_dict(self) -> dict:
        return {
            "tool_id": self.tool_id,
            "category": self.category.value,
            "source": self.source,
            "extractor": self.extractor.to_dict(),
            "notes": self.notes,
        }


@dataclass(frozen=True)
class HarvestRecord:
    tool_id: str
    raw_names: tuple[str, ...]
    retrieved_at: str
    source_digest: str
    warnings: tuple[str, ...] = ()

    @property
    def empty(self) -> bool:
        return not self.raw_names

    def to_dict(self) -> dict:
        return {
            "tool_id": self.tool_id,
            "raw_names": list(self.raw_names),
            "retrieved_at": self.retrieved_at,
            "source_digest": self.source_digest,
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HarvestRecord":
        return cls(
            tool_id=d["tool_id"],
            raw_names=tuple(d["raw_names"]),
            retrieved_at=d["retrieved_at"],
            source_digest=d["source_digest"],
            warnings=tuple(d.get("warnings", ())),
        )


@dataclass(frozen=True)
class HarvestFailure:
    tool_id: str
    error: str
    message: str

    def to_dict(self) -> dict:
        return {"tool_id": self.tool_id, "error": self.error, "message": self.message}


@dataclass
class HarvestRun:
    """Outcome of harvesting a registry: successful records plus per-tool failures."""

    records: list[HarvestRecord] = field(default_factory=list)
    failures: list[HarvestFailure] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "records": [r.to_dict() for r in self.records],
            "failures": [f.to_dict() for f in self.failures],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HarvestRun":
        return cls(
            records=[HarvestRecord.from_dict(r) for r in d.get("records", [])],
            failures=[HarvestFailure(**f) for f in d.get("failures", [])],
        )

    def save(self, path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(cls, path) -> "HarvestRun":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _field(entry: dict, name: str, where: str):
    if name not in entry:
        raise RegistryError(f"{where}: missing field {name!r}")
    value = entry[name]
    if not isinstance(value, str) or not value.strip():
        raise RegistryError(f"{where}.{name}: expected a non-empty string, got {value!r}")
    return value.strip()


def parse_registry(doc, base_dir: Path | None = None) -> list[ToolSpec]:
    """Build tool specs from an already-decoded registry document."""
    if isinstance(doc, dict):
        entries = doc.get("tools")
    else:
        entries = doc
    if not isinstance(entries, list):
        raise RegistryError("registry must be a list of tools or an object with a 'tools' list")

    specs: list[ToolSpec] = []
    seen: set[str] = set()
    for i, entry in enumerate(entries):
        where = f"tools[{i}]"
        if not isinstance(entry, dict):
            raise RegistryError(f"{where}: expected an object")
        tool_id = _field(entry, "tool_id", where)
        if tool_id in seen:
            raise DuplicateToolError(f"{where}: duplicate tool_id {tool_id!r}")
        seen.add(tool_id)
        category = Category.parse(_field(entry, "category", where))
        source = _field(entry, "source", where)
        if base_dir is not None and not source.startswith(("http://", "https://")):
            if not os.path.isabs(source):
                source = str(base_dir / source)

        rule = entry.get("extractor")
        if not isinstance(rule, dict):
            raise RegistryError(f"{where}.extractor: expected an object with 'kind' and 'arg'")
        try:
            extractor = Extractor(kind=rule.get("kind"), arg=rule.get("arg"))
        except ExtractorError as exc:
            raise RegistryError(f"{where}.extractor: {exc}") from exc
        specs.append(ToolSpec(tool_id, category, source, extractor, str(entry.get("notes", ""))))
    return specs


def load_registry(path) -> list[ToolSpec]:
    """Read a registry file.

    Raises :class:`RegistryError` (with line or field context),
    :class:`DuplicateToolError` or :class:`~dlsscale.categories.UnknownCategoryError`.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise RegistryError(
            f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    try:
        return parse_registry(doc, base_dir=path.parent)
    except UnknownCategoryError as exc:
        exc.args = (f"{path}: {exc}",)
        raise
    except RegistryError as exc:
        raise type(exc)(f"{path}: {exc}") from None


def _timestamp() -> str:
    # SOURCE_DATE_EPOCH pins the clock for reproducible archives.
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    now = (
        datetime.fromtimestamp(int(epoch), tz=timezone.utc)
        if epoch
        else datetime.now(timezone.utc)
    )
    return now.replace(microsecond=0).isoformat()


def fetch(source: str, timeout: float = 30.0) -> bytes:
    try:
        if source.startswith(("http://", "https://")):
            req = urllib.request.Request(source, headers={"User-Agent": "dlsscale-harvester"})
            with urllib.request.urlopen(req, timeout=timeout) as resp:
                return resp.read()
        return Path(source).read_bytes()
    except OSError as exc:
        raise FetchError(f"cannot fetch {source}: {exc}") from exc


def harvest_tool(spec: ToolSpec, timeout: float = 30.0) -> HarvestRecord:
    """Fetch one tool's source and extract its raw language list.

    An extraction that yields nothing is not an error; the record comes back
    with an empty ``raw_names`` and a warning.
    """
    body = fetch(spec.source, timeout=timeout)
    names = spec.extractor.extract(body.decode("utf-8-sig", errors="replace"))
    warnings: tuple[str, ...] = ()
    if not names:
        msg = f"{spec.tool_id}: extractor {spec.extractor.kind!r} yielded no names"
        logger.warning(msg)
        warnings = (msg,)
    return HarvestRecord(
        tool_id=spec.tool_id,
        raw_names=tuple(names),
        retrieved_at=_timestamp(),
        source_digest="sha256:" + hashlib.sha256(body).hexdigest(),
        warnings=warnings,
    )


def harvest_all(registry: list[ToolSpec], max_workers: int = 8) -> HarvestRun:
    """Harvest every tool; failures are collected rather than raised.

    Output order follows the registry regardless of fetch completion order.
    """

    def attempt(spec):
        try:
            return harvest_tool(spec)
        except (FetchError, ExtractorError) as exc:
            return HarvestFailure(spec.tool_id, type(exc).__name__, str(exc))

    run = HarvestRun()
    if not registry:
        return run
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        for outcome in pool.map(attempt, registry):
            if isinstance(outcome, HarvestFailure):
                logger.warning("harvest failed for %s: %s", outcome.tool_id, outcome.message)
                run.failures.append(outcome)
            else:
                run.records.append(outcome)
    return run
