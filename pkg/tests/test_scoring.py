from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dlsscale.codemap import Iso639Table, IsoEntry
from dlsscale.scoring import (
    Boundaries,
    EmptyCategoryError,
    SubscaleScorer,
    SupportMatrix,
    UnknownCodeError,
    boundaries_table,
    build_matrix,
    category_counts,
    compute_boundaries,
    score_all,
)

from .oracles import nearest_rank


def _iso(codes):
    return Iso639Table([IsoEntry(c, f"Lang {c}") for c in codes])


def test_oracle_example_values():
    S = [1, 1, 1, 2, 2, 3, 5, 9]
    assert [nearest_rank(S, Fraction(k, 4)) for k in (1, 2, 3)] == [1, 2, 3]
    b = compute_boundaries(S)
    assert b.cuts == (1, 2, 3) and b.max_count == 9
    assert b.ranges() == [(1, 1), (2, 2), (3, 3), (4, 9)]
    assert sum(1 for v in S if b.level(v) == 1) / len(S) == 3 / 8


def test_all_ties_collapse_to_level_one():
    b = compute_boundaries([1, 1, 1, 1])
    assert b.cuts == (1, 1, 1)
    assert b.ranges() == [(1, 1), None, None, None]


def test_zeros_are_ignored():
    assert compute_boundaries([0, 0, 0, 1, 1, 1, 2, 2, 3, 5, 9]).cuts == (1, 2, 3)


def test_empty_category():
    with pytest.raises(EmptyCategoryError):
        compute_boundaries([0, 0, 0])


def test_published_table_layout():
    # Assistant row: 1 | 2 | 3-4 | 5-11
    b = Boundaries(1, 2, 4, 11, 100)
    rows = boundaries_table(["Assistant"], [b])
    assert rows[1] == ["Assistant", "1", "2", "3-4", "5-11", "100", "ok"]


def test_table_marks_empty_category():
    rows = boundaries_table(["Content", "Assistant"], [compute_boundaries([1, 2]), None])
    assert rows[1][0] == "Assistant" and rows[1][-1] == "empty"
    assert rows[2][0] == "Content"


def test_score_all_rules():
    b = Boundaries(1, 3, 6, 10, 20)
    counts = np.array([[0], [1], [2], [3], [4], [6], [7], [10]])
    assert score_all(counts, [b]).ravel().tolist() == [0, 1, 2, 2, 3, 3, 4, 4]


def test_score_all_empty_category_is_zero():
    # S = {1, 2}: cuts (1, 1, 2), so a count of 2 sits at level 3
    b = compute_boundaries([2, 1])
    assert b.cuts == (1, 1, 2)
    assert score_all(np.array([[0, 2], [0, 1]]), [None, b]).tolist() == [[0, 3], [0, 1]]


@settings(max_examples=1000, deadline=None)
@given(st.lists(st.integers(min_value=0, max_value=40), min_size=1, max_size=300))
def test_quartile_properties(counts):
    counts = np.array(counts)
    pos = counts[counts >= 1]
    if pos.size == 0:
        return
    b = compute_boundaries(counts)
    assert b.cuts == tuple(nearest_rank(pos.tolist(), Fraction(k, 4)) for k in (1, 2, 3))
    assert 1 <= b.c1 <= b.c2 <= b.c3 <= b.max_count
    levels = np.array([b.level(int(v)) for v in pos])
    assert set(levels.tolist()) <= {1, 2, 3, 4}
    assert 4 * np.sum(levels == 1) >= pos.size
    # monotone in count
    order = np.argsort(pos, kind="stable")
    assert np.all(np.diff(levels[order]) >= 0)


def test_build_matrix_basic():
    iso = _iso(["aaa", "bbb", "ccc"])
    m = build_matrix({"T": {"aaa", "bbb"}}, [("T", "Content")], iso)
    assert m.languages == ("aaa", "bbb", "ccc")
    assert m.cells[:, 0].tolist() == [True, True, False]


def test_build_matrix_no_tools():
    m = build_matrix({}, [], _iso(["aaa", "bbb"]))
    assert m.cells.shape == (2, 0)
    assert category_counts(m).sum() == 0


def test_build_matrix_unknown_code():
    with pytest.raises(UnknownCodeError):
        build_matrix({"T": {"zzz"}}, [("T", "Content")], _iso(["aaa"]))


def test_build_matrix_drops_failed_tools():
    m = build_matrix({"A": {"aaa"}}, [("A", "Content"), ("B", "Speech")], _iso(["aaa"]))
    assert m.tools == ("A",)


def test_category_counts():
    iso = _iso(["aaa", "bbb"])
    m = build_matrix(
        {"c1": {"aaa"}, "c2": {"aaa", "bbb"}, "c3": set(), "s1": {"bbb"}},
        [("c1", "Content"), ("c2", "Content"), ("c3", "Content"), ("s1", "Speech")],
        iso,
    )
    counts = category_counts(m)
    assert counts[0, 0] == 2 and counts[1, 0] == 1
    assert counts[1, 5] == 1 and counts[0, 5] == 0
    assert counts.sum(axis=1).tolist() == m.cells.sum(axis=1).tolist()


def test_matrix_csv_round_trip(tmp_path):
    iso = _iso(["aaa", "bbb", "ccc"])
    m = build_matrix({"x": {"aaa"}, "y": {"bbb", "ccc"}}, [("x", "Surface"), ("y", "Meaning")], iso)
    m.write_csv(tmp_path / "m.csv")
    assert SupportMatrix.read_csv(tmp_path / "m.csv") == m


def test_subscale_scorer_estimator():
    rng = np.random.default_rng(0)
    X = rng.integers(0, 6, size=(50, 7))
    X[:, 3] = 0
    scorer = SubscaleScorer().fit(X)
    L = scorer.transform(X)
    assert scorer.empty_categories_ == ["Localized"]
    assert (L[:, 3] == 0).all()
    assert ((L == 0) == (X == 0)).all()
    assert scorer.get_params() == {"categories": scorer.categories}
