"""Support matrix, per-category tool counts and quartile subscale levels."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .categories import CATEGORY_NAMES, Category
from .validation import check_counts


class UnknownCodeError(ValueError):
    pass


class EmptyCategoryError(ValueError):
    pass


@dataclass(frozen=True)
class SupportMatrix:
    """Dense Boolean languages × tools matrix.

    Rows are sorted ISO 639-3 codes; columns keep registry order.
    """

    languages: tuple[str, ...]
    tools: tuple[str, ...]
    categories: tuple[str, ...]
    cells: np.ndarray

    def __post_init__(self):
        if self.cells.shape != (len(self.languages), len(self.tools)):
            raise ValueError("cells shape does not match languages × tools")
        if len(self.categories) != len(self.tools):
            raise ValueError("one category per tool is required")

    def __eq__(self, other):
        if not isinstance(other, SupportMatrix):
            return NotImplemented
        return (
            self.languages == other.languages
            and self.tools == other.tools
            and self.categories == other.categories
            and np.array_equal(self.cells, other.cells)
        )

    def write_csv(self, path) -> None:
        """Two header rows (tool ids, then categories), then one 0/1 row per code."""
        with Path(path).open("w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["code", *self.tools])
            w.writerow(["category", *self.categories])
            for code, row in zip(self.languages, self.cells):
                w.writerow([code, *row.astype(np.uint8).tolist()])

    @classmethod
    def read_csv(cls, path) -> "SupportMatrix":
        with Path(path).open(encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
        if len(rows) < 2 or rows[0][0] != "code" or rows[1][0] != "category":
            raise ValueError(f"{path}: missing 'code' and 'category' header rows")
        tools, cats = tuple(rows[0][1:]), tuple(rows[1][1:])
        for c in cats:
            Category.parse(c)
        langs, cells = [], []
        for lineno, row in enumerate(rows[2:], start=3):
            if len(row) != len(tools) + 1 or any(v not in ("0", "1") for v in row[1:]):
                raise ValueError(f"{path}:{lineno}: malformed matrix row")
            langs.append(row[0])
            cells.append([v == "1" for v in row[1:]])
        arr = np.array(cells, dtype=bool).reshape(len(langs), len(tools))
        return cls(tuple(langs), tools, cats, arr)


def build_matrix(code_sets, tools, iso) -> SupportMatrix:
    """Assemble the support matrix with a row for every code in ``iso``.

    ``tools`` is a sequence of ``(tool_id, category)`` pairs or ToolSpecs in
    registry order; tools absent from ``code_sets`` (failed harvests) are dropped.
    """
    languages = tuple(sorted(iso))
    index = {code: i for i, code in enumerate(languages)}
    pairs = []
    for t in tools:
        tool_id, cat = (t.tool_id, t.category) if hasattr(t, "tool_id") else t
        if tool_id in code_sets:
            pairs.append((tool_id, str(Category.parse(str(cat)))))
    cells = np.zeros((len(languages), len(pairs)), dtype=bool)
    for j, (tool_id, _) in enumerate(pairs):
        for code in code_sets[tool_id]:
            if code not in index:
                raise UnknownCodeError(f"tool {tool_id!r} emitted unknown code {code!r}")
            cells[index[code], j] = True
    return SupportMatrix(
        languages, tuple(p[0] for p in pairs), tuple(p[1] for p in pairs), cells
    )


def category_counts(m: SupportMatrix, categories=CATEGORY_NAMES) -> np.ndarray:
    """Number of supporting tools per language (rows) and category (columns)."""
    cats = np.asarray(m.categories)
    out = np.zeros((len(m.languages), len(categories)), dtype=np.int64)
    for k, cat in enumerate(categories):
        cols = cats == cat
        if cols.any():
            out[:, k] = m.cells[:, cols].sum(axis=1)
    return out


@dataclass(frozen=True)
class Boundaries:
    """Cut counts for one category: level L covers counts in (c[L-1], c[L]]."""

    c1: int
    c2: int
    c3: int
    max_count: int
    n_supported: int

    @property
    def cuts(self) -> tuple[int, int, int]:
        return (self.c1, self.c2, self.c3)

    def ranges(self) -> list[tuple[int, int] | None]:
        """Inclusive count range per level 1..4, ``None`` when the level is empty."""
        edges = [0, self.c1, self.c2, self.c3, self.max_count]
        return [
            (edges[i] + 1, edges[i + 1]) if edges[i + 1] > edges[i] else None
            for i in range(4)
        ]

    def level(self, count: int) -> int:
        if count <= 0:
            return 0
        return 1 + sum(count > c for c in self.cuts)


def compute_boundaries(counts) -> Boundaries:
    """Quartile cuts over the languages with at least one supporting tool.

    Each cut is the nearest-rank percentile: the value at 1-based position
    ``ceil(p * n)`` of the sorted positive counts. Counts equal to a cut fall
    in the lower level, so ties push the boundary upward.
    """
    counts = np.asarray(counts)
    s = np.sort(counts[counts >= 1])
    n = s.size
    if n == 0:
        raise EmptyCategoryError("no language is supported in this category")
    c1, c2, c3 = (int(s[(k * n + 3) // 4 - 1]) for k in (1, 2, 3))
    return Boundaries(c1, c2, c3, int(s[-1]), n)


def score_all(counts, boundaries) -> np.ndarray:
    """Apply per-category boundaries (``None`` for an empty category) to a count table."""
    counts = check_counts(counts)
    levels = np.zeros_like(counts)
    for k, b in enumerate(boundaries):
        if b is None:
            continue
        col = counts[:, k]
        levels[:, k] = np.where(col > 0, 1 + (col[:, None] > np.array(b.cuts)).sum(axis=1), 0)
    return levels


class SubscaleScorer(TransformerMixin, BaseEstimator):
    """Learn quartile boundaries from tool counts and map counts to levels 0-4.

    Parameters
    ----------
    categories : sequence of str
        Column names of the count table, in order.

    Attributes
    ----------
    boundaries_ : list of Boundaries or None
        One entry per category; ``None`` marks a category nobody supports.
    """

    def __init__(self, categories=CATEGORY_NAMES):
        self.categories = categories

    def fit(self, X, y=None):
        X = check_counts(X, n_columns=len(self.categories))
        self.boundaries_ = []
        for k in range(X.shape[1]):
            try:
                self.boundaries_.append(compute_boundaries(X[:, k]))
            except EmptyCategoryError:
                self.boundaries_.append(None)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "boundaries_")
        X = check_counts(X, n_columns=self.n_features_in_)
        return score_all(X, self.boundaries_)

    @property
    def empty_categories_(self) -> list[str]:
        check_is_fitted(self, "boundaries_")
        return [c for c, b in zip(self.categories, self.boundaries_) if b is None]


def _fmt_range(r):
    if r is None:
        return ""
    lo, hi = r
    return str(lo) if lo == hi else f"{lo}-{hi}"


def boundaries_table(categories, boundaries) -> list[list[str]]:
    """Rows in the published layout: hardest category first, one range column per level."""
    rows = [["category", "level_1", "level_2", "level_3", "level_4", "n_supported", "status"]]
    for cat, b in reversed(list(zip(categories, boundaries))):
        if b is None:
            rows.append([str(cat), "", "", "", "", "0", "empty"])
        else:
            rows.append(
                [str(cat), *(_fmt_range(r) for r in b.ranges()), str(b.n_supported), "ok"]
            )
    return rows
