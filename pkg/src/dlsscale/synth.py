"""Seeded synthetic registries for tests and demos.

Languages get a latent support level; each tool has a threshold that rises
with the hardness of its category. In Guttman mode a tool supports exactly
the languages above its threshold, so supports are strictly nested.
Otherwise support is drawn from a logistic curve around the threshold.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np
from scipy.special import expit

from .categories import CATEGORIES
from .codemap import ISO_COLUMNS, Iso639Table, map_name

# major languages always included, with the endonym used as an alias
ENDONYMS = {
    "eng": "English",
    "deu": "Deutsch",
    "fra": "Français",
    "spa": "Español",
    "por": "Português",
    "rus": "Русский",
    "hin": "हिन्दी",
    "swh": "Kiswahili",
}

JUNK_NAMES = ("Elvish (Sindarin)", "Klingon-ish", "Moon-speak", "Pig Latin")


def _round_trips(code: str, iso: Iso639Table) -> bool:
    """Every surface form the generator may emit resolves back to ``code``."""
    ref = iso.entries[code].reference_name
    forms = (ref, ref.upper(), f"{ref} (Latin script)")
    return all(map_name(f, iso) == code for f in forms)


def _tool_categories(n_tools: int):
    """Round-robin over categories, easiest first."""
    return [CATEGORIES[i % len(CATEGORIES)] for i in range(n_tools)]


def _render(kind: str, names: list[str]) -> tuple[str, dict]:
    if kind == "lines":
        return "\n".join(names) + "\n", {"kind": "lines", "arg": None}
    if kind == "split":
        return " | ".join(names) + "\n", {"kind": "split", "arg": "|"}
    if kind == "regex":
        opts = "\n".join(f'  <option value="{i}">{n}</option>' for i, n in enumerate(names))
        body = f"<html><body>\n<select name=\"lang\">\n{opts}\n</select>\n</body></html>\n"
        return body, {"kind": "regex", "arg": r"<option[^>]*>([^<]+)</option>"}
    body = json.dumps({"service": "synthetic", "languages": names}, ensure_ascii=False, indent=1)
    return body + "\n", {"kind": "json-pointer", "arg": "/languages"}


def generate(out_dir, seed: int = 42, n_languages: int = 200, n_tools: int = 20,
             guttman: bool = False, iso: Iso639Table | None = None) -> dict:
    """Write ``registry.json``, ``sources/``, ``iso-639-3.tab`` and ``aliases.tsv``.

    Returns the paths written, keyed by role.
    """
    if n_languages < len(ENDONYMS) or n_tools < 1:
        raise ValueError(f"need at least {len(ENDONYMS)} languages and 1 tool")
    rng = np.random.default_rng(seed)
    iso = iso or Iso639Table.default()
    out = Path(out_dir)
    (out / "sources").mkdir(parents=True, exist_ok=True)

    pool = sorted(
        c for c in iso.codes
        if iso.entries[c].scope == "I" and iso.entries[c].language_type == "L"
        and c not in ENDONYMS and _round_trips(c, iso)
    )
    picked = list(rng.choice(pool, size=n_languages - len(ENDONYMS), replace=False))
    codes = sorted(list(ENDONYMS) + [str(c) for c in picked])

    # latent level: major languages on top, the rest heavy-tailed toward zero
    theta = {c: float(v) for c, v in zip(codes, rng.exponential(1.0, len(codes)))}
    for i, c in enumerate(sorted(ENDONYMS)):
        theta[c] = 6.0 + 0.1 * i
    cats = _tool_categories(n_tools)
    hardness = np.array([CATEGORIES.index(c) for c in cats], dtype=float)
    thresholds = 0.3 + 0.45 * hardness + rng.uniform(0.0, 0.4, n_tools)

    kinds = ("lines", "split", "regex", "json-pointer")
    tools = []
    for t in range(n_tools):
        lv = np.array([theta[c] for c in codes])
        if guttman:
            supported = lv > thresholds[t]
        else:
            supported = rng.random(len(codes)) < expit(3.0 * (lv - thresholds[t]))
        names = []
        for c, s in zip(codes, supported):
            if not s:
                continue
            form = rng.integers(0, 5)
            entry = iso.entries[c]
            if c in ENDONYMS and form < 2:
                names.append(ENDONYMS[c])
            elif form == 0:
                names.append(c)
            elif form == 1 and entry.part1:
                names.append(entry.part1.upper())
            elif form == 2:
                names.append(f"{entry.reference_name} (Latin script)")
            else:
                names.append(entry.reference_name.upper() if form == 3 else entry.reference_name)
        if not guttman and rng.random() < 0.5:
            names.append(JUNK_NAMES[int(rng.integers(0, len(JUNK_NAMES)))])
        kind = kinds[t % len(kinds)]
        body, extractor = _render(kind, names)
        tool_id = f"{cats[t].value.lower()}-{t:02d}"
        ext = {"lines": "txt", "split": "txt", "regex": "html", "json-pointer": "json"}[kind]
        src = f"sources/{tool_id}.{ext}"
        (out / src).write_text(body, encoding="utf-8")
        tools.append({
            "tool_id": tool_id,
            "category": cats[t].value,
            "source": src,
            "extractor": extractor,
            "notes": "synthetic",
        })

    registry = out / "registry.json"
    registry.write_text(
        json.dumps({"tools": tools}, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )

    iso_path = out / "iso-639-3.tab"
    with iso_path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(ISO_COLUMNS)
        for c in codes:
            e = iso.entries[c]
            w.writerow([c, e.part2b or "", e.part2t or "", e.part1 or "", e.scope,
                        e.language_type, e.reference_name, ""])

    alias_path = out / "aliases.tsv"
    with alias_path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(["normalized_name", "code"])
        for c in sorted(ENDONYMS):
            w.writerow([ENDONYMS[c], c])

    return {"registry": registry, "iso_table": iso_path, "aliases": alias_path}


def demo_path():
    """Directory of the bundled 12-tool, 40-language demo inputs."""
    from importlib import resources

    return Path(str(resources.files("dlsscale") / "data" / "demo"))
