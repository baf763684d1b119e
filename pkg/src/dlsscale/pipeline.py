"""Stage runners that read and write the persisted pipeline artifacts.

Each stage reads only files written by earlier stages (plus the input
tables), so any stage can be re-run after deleting its outputs.

harvest -> harvest.json, mapped.json, unmapped.tsv
score   -> matrix.csv, boundaries.csv, subscales.csv
analyze -> homogeneity.csv, homogeneity_pairs.csv, homogeneity_steps.csv,
           item_counts.csv, irf.csv, difficulty.csv, assessments.csv,
           assessments.json, curve.csv, curve_fit.json, levels.csv
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .categories import CATEGORY_NAMES, N_LEVELS
from .codemap import AliasTable, Iso639Table, map_harvest
from .growth import GrowthCurveClassifier, LEVEL_ORDER, rank_transform, summarize_levels
from .irt import RestScoreIRT
from .mokken import expand_items, h_polytomous, h_report, item_counts
from .registry import HarvestRun, harvest_all, load_registry
from .scoring import (
    SubscaleScorer,
    SupportMatrix,
    boundaries_table,
    build_matrix,
    category_counts,
)

logger = logging.getLogger(__name__)

HARVEST_FILES = ("harvest.json", "mapped.json", "unmapped.tsv")
SCORE_FILES = ("matrix.csv", "boundaries.csv", "subscales.csv")
ANALYZE_FILES = (
    "homogeneity.csv", "homogeneity_pairs.csv", "homogeneity_steps.csv", "item_counts.csv",
    "irf.csv", "difficulty.csv", "assessments.csv", "assessments.json", "curve.csv",
    "curve_fit.json", "levels.csv",
)


class StageError(RuntimeError):
    """A stage cannot run because an earlier artifact is missing or inconsistent."""


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return "" if np.isnan(v) else format(float(v), ".10g")
    return str(v)


def _num(v: float) -> float:
    return float(format(float(v), ".12g"))


def write_csv(path, rows) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in rows:
            w.writerow([fmt(v) for v in row])


def read_csv(path) -> list[dict]:
    with Path(path).open(encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def write_json(path, doc) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def _need(out: Path, name: str) -> Path:
    p = out / name
    if not p.exists():
        raise StageError(f"missing artifact {p}; run the earlier stage first")
    return p


# -- harvest ---------------------------------------------------------------

def run_harvest(registry_path, iso: Iso639Table, aliases: AliasTable | None, out) -> HarvestRun:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    registry = load_registry(registry_path)
    run = harvest_all(registry)
    run.save(out / "harvest.json")

    code_sets, report = map_harvest(run.records, iso, aliases)
    failed = {f.tool_id for f in run.failures}
    write_json(out / "mapped.json", {
        "tools": [
            {"tool_id": t.tool_id, "category": t.category.value, "codes": list(code_sets[t.tool_id])}
            for t in registry if t.tool_id not in failed
        ],
        "failures": sorted(failed),
    })
    report.write(out / "unmapped.tsv")
    return run


# -- score -----------------------------------------------------------------

@dataclass
class ScoreResult:
    matrix: SupportMatrix
    counts: np.ndarray
    scorer: SubscaleScorer
    levels: np.ndarray


def score_matrix(matrix: SupportMatrix) -> ScoreResult:
    counts = category_counts(matrix)
    scorer = SubscaleScorer().fit(counts)
    return ScoreResult(matrix, counts, scorer, scorer.transform(counts))


def run_score(out, iso: Iso639Table, matrix_path=None) -> ScoreResult:
    """Build (or re-import) the matrix, then write boundaries and subscale levels."""
    out = Path(out)
    if matrix_path is not None:
        matrix = SupportMatrix.read_csv(matrix_path)
        unknown = [c for c in matrix.languages if c not in iso]
        if unknown:
            raise StageError(f"matrix rows not in the ISO table: {', '.join(unknown[:5])}")
    else:
        doc = json.loads(_need(out, "mapped.json").read_text(encoding="utf-8"))
        code_sets = {t["tool_id"]: t["codes"] for t in doc["tools"]}
        matrix = build_matrix(code_sets, [(t["tool_id"], t["category"]) for t in doc["tools"]], iso)
    out.mkdir(parents=True, exist_ok=True)
    res = score_matrix(matrix)
    matrix.write_csv(out / "matrix.csv")
    write_csv(out / "boundaries.csv", boundaries_table(CATEGORY_NAMES, res.scorer.boundaries_))
    rows = [["code", "name", *CATEGORY_NAMES]]
    for code, lv in zip(matrix.languages, res.levels):
        name = iso.name(code) if code in iso else ""
        rows.append([code, name, *lv.tolist()])
    write_csv(out / "subscales.csv", rows)
    return res


# -- analyze ---------------------------------------------------------------

@dataclass(frozen=True)
class DLSAssessment:
    code: str
    name: str
    raw: int
    adjusted: float
    proportion: float
    rank: int
    level: str


def assess(levels, codes, names=None, categories=CATEGORY_NAMES):
    """Run the analysis chain on a subscale level table.

    Returns a dict with the homogeneity reports, the fitted IRT and growth
    estimators and the per-language assessments.
    """
    levels = np.asarray(levels)
    codes = list(codes)
    names = list(names) if names is not None else [""] * len(codes)
    bank = expand_items(levels, categories, codes)
    poly = h_polytomous(levels, categories)
    steps = h_report(bank)

    irt = RestScoreIRT(item_ids=bank.item_ids).fit(bank.responses)
    adjusted = irt.score_samples(bank.responses)
    raw = bank.raw_scores
    max_score = len(categories) * N_LEVELS

    X = np.column_stack([raw, adjusted])
    growth = GrowthCurveClassifier(max_score=max_score).fit(X, codes=codes)
    level_labels = growth.predict(X, codes=codes)
    _, rank, x = rank_transform(adjusted, raw, codes)

    assessments = [
        DLSAssessment(c, n, int(r), float(a), float(a / max_score), int(rk), str(lv))
        for c, n, r, a, rk, lv in zip(codes, names, raw, adjusted, rank, level_labels)
    ]
    return {
        "bank": bank,
        "polytomous": poly,
        "steps": steps,
        "irt": irt,
        "growth": growth,
        "x": x,
        "assessments": assessments,
    }


def run_analyze(out, categories=CATEGORY_NAMES) -> dict:
    out = Path(out)
    rows = read_csv(_need(out, "subscales.csv"))
    codes = [r["code"] for r in rows]
    names = [r["name"] for r in rows]
    levels = np.array([[int(r[c]) for c in categories] for r in rows], dtype=np.int64)
    levels = levels.reshape(len(rows), len(categories))
    res = assess(levels, codes, names, categories)
    poly, steps = res["polytomous"], res["steps"]

    F, E = poly.item_totals
    table = [["item", "H", "F", "E"]]
    for i, cat in reversed(list(enumerate(poly.items))):
        if poly.used[i]:
            table.append([cat, _num(1 - F[i] / E[i]), _num(F[i]), _num(E[i])])
        else:
            table.append([cat, "", "", ""])
    sf, se = poly.scale_totals
    table.append(["Full scale", _num(poly.scale), _num(sf), _num(se)])
    write_csv(out / "homogeneity.csv", table)

    Hij = poly.pairwise
    write_csv(out / "homogeneity_pairs.csv",
              [["item", *poly.items]]
              + [[a, *(_num(v) if not np.isnan(v) else float("nan") for v in Hij[i])]
                 for i, a in enumerate(poly.items)])

    groups = {c: [f"{c}{s}" for s in range(1, N_LEVELS + 1)] for c in categories}
    by_cat = steps.group_h(groups)
    sF, sE = steps.item_totals
    step_rows = [["item", "H", "F", "E"]]
    for i, it in enumerate(steps.items):
        if steps.used[i]:
            step_rows.append([it, _num(1 - sF[i] / sE[i]), _num(sF[i]), _num(sE[i])])
        else:
            step_rows.append([it, "", "", ""])
    for cat in reversed(categories):
        step_rows.append([f"{cat}*", _num(by_cat[cat]) if cat in by_cat else "", "", ""])
    tf, te = steps.scale_totals
    step_rows.append(["Full scale", _num(steps.scale), _num(tf), _num(te)])
    write_csv(out / "homogeneity_steps.csv", step_rows)

    write_csv(out / "item_counts.csv", [["item", "languages"], *item_counts(res["bank"])])

    irt = res["irt"]
    irf_rows = [["item", "b0", "b1", "difficulty", "iterations", "converged", "separated", "status"]]
    for it in irt.item_ids_:
        m = irt.models_.get(it)
        if m is None:
            irf_rows.append([it, "", "", "", "", "", "", "constant"])
        else:
            irf_rows.append([it, _num(m.intercept), _num(m.slope), _num(m.difficulty),
                             m.iterations, m.converged, m.separated, "ok"])
    write_csv(out / "irf.csv", irf_rows)
    write_csv(out / "difficulty.csv",
              [["item", "difficulty"], *((i, _num(d)) for i, d in irt.difficulties_)])

    assessments = res["assessments"]
    write_csv(out / "assessments.csv",
              [["code", "name", "raw", "adjusted", "proportion", "rank", "level"]]
              + [[a.code, a.name, a.raw, _num(a.adjusted), _num(a.proportion), a.rank, a.level]
                 for a in assessments])
    write_json(out / "assessments.json", [
        {**asdict(a), "adjusted": _num(a.adjusted), "proportion": _num(a.proportion)}
        for a in assessments
    ])

    curve = res["growth"].curve_
    x = res["x"]
    ranked = sorted((a for a in assessments if a.raw > 0), key=lambda a: a.rank, reverse=True)
    idx = {c: i for i, c in enumerate(codes)}
    curve_rows = [["code", "x", "y", "fitted"]]
    for a in ranked:
        xi = x[idx[a.code]]
        curve_rows.append([a.code, _num(xi), _num(a.proportion), _num(curve.predict(xi))])
    write_csv(out / "curve.csv", curve_rows)
    write_json(out / "curve_fit.json", {k: (_num(v) if isinstance(v, float) else v)
                                        for k, v in asdict(curve).items()})

    summary = summarize_levels([a.level for a in assessments],
                               [a.adjusted for a in assessments], codes)
    name_of = dict(zip(codes, names))
    lvl_rows = [["level", "languages", "highest", "highest_name", "lowest", "lowest_name"]]
    for s in summary:
        lvl_rows.append([s.level.value, s.count, s.highest or "", name_of.get(s.highest, ""),
                         s.lowest or "", name_of.get(s.lowest, "")])
    write_csv(out / "levels.csv", lvl_rows)
    return res


# -- report ----------------------------------------------------------------

def collect_report(out) -> dict:
    """Tables 1-3 style summaries from persisted artifacts."""
    out = Path(out)
    doc = {"boundaries": read_csv(_need(out, "boundaries.csv"))}
    for key, name in (("homogeneity", "homogeneity.csv"), ("levels", "levels.csv"),
                      ("difficulty", "difficulty.csv")):
        p = out / name
        if p.exists():
            doc[key] = read_csv(p)
    return doc


def render_text(doc: dict) -> str:
    lines = ["Tools supporting a language, per subscale level", ""]
    lines.append(f"{'Category':<11}{'1':>8}{'2':>8}{'3':>8}{'4':>8}")
    for r in doc["boundaries"]:
        if r["status"] == "empty":
            lines.append(f"{r['category']:<11}{'(no supported languages)':>32}")
        else:
            cells = [r[f"level_{i}"] or "-" for i in range(1, 5)]
            lines.append(f"{r['category']:<11}" + "".join(f"{c:>8}" for c in cells))
    if "homogeneity" in doc:
        lines += ["", "Coefficient of homogeneity H", ""]
        for r in doc["homogeneity"]:
            h = f"{float(r['H']):.3f}" if r["H"] else "n/a"
            lines.append(f"{r['item']:<11}{h:>8}")
    if "levels" in doc:
        lines += ["", "Languages per level", ""]
        for r in doc["levels"]:
            ex = ", ".join(x for x in (r["highest_name"], r["lowest_name"]) if x)
            lines.append(f"{r['level']:<11}{r['languages']:>6}  {ex}")
    return "\n".join(lines) + "\n"


__all__ = [
    "DLSAssessment", "LEVEL_ORDER", "StageError", "assess", "collect_report", "render_text",
    "run_analyze", "run_harvest", "run_score", "score_matrix",
]
