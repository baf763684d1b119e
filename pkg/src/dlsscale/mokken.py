"""Cumulative step items and Loevinger homogeneity coefficients.

Every coefficient is carried as a pair of totals, observed Guttman errors ``F``
and errors expected under independence ``E``, with ``H = 1 - F/E``. For
dichotomous items these are literal error counts; for polytomous items they
are ``n * (cov_max - cov)`` and ``n * cov_max``, where ``cov_max`` is the
covariance of the comonotonic coupling of the two margins.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .categories import CATEGORY_NAMES, N_LEVELS
from .validation import check_binary, check_counts, check_levels

logger = logging.getLogger(__name__)


class ConstantItemError(ValueError):
    pass


class TooFewItemsError(ValueError):
    pass


@dataclass(frozen=True)
class ItemBank:
    """Per-language dichotomous responses on the cumulative step items."""

    languages: tuple[str, ...]
    item_ids: tuple[str, ...]
    responses: np.ndarray

    @property
    def popularity(self) -> np.ndarray:
        if self.responses.shape[0] == 0:
            return np.zeros(len(self.item_ids))
        return self.responses.mean(axis=0)

    @property
    def raw_scores(self) -> np.ndarray:
        return self.responses.sum(axis=1)

    def column(self, item) -> np.ndarray:
        return self.responses[:, self.item_ids.index(item)]


def expand_items(levels, categories=CATEGORY_NAMES, languages=None, n_levels=N_LEVELS) -> ItemBank:
    """Cumulative coding: item ``<Cat><L>`` is positive iff the category level is >= L."""
    levels = check_levels(levels, n_columns=len(categories), max_level=n_levels)
    steps = np.arange(1, n_levels + 1)
    responses = (levels[:, :, None] >= steps[None, None, :]).reshape(
        levels.shape[0], levels.shape[1] * n_levels
    )
    if languages is None:
        languages = tuple(str(i) for i in range(levels.shape[0]))
    ids = tuple(f"{c}{s}" for c in categories for s in steps)
    return ItemBank(tuple(languages), ids, responses)


def item_counts(bank: ItemBank) -> list[tuple[str, int]]:
    """Languages per item, ascending by count then item id."""
    counts = bank.responses.sum(axis=0).astype(int)
    return sorted(zip(bank.item_ids, counts.tolist()), key=lambda t: (t[1], t[0]))


@dataclass(frozen=True)
class PairH:
    h: float
    f: float
    e: float
    cov: float
    cov_max: float


def h_pairwise(x_i, x_j) -> PairH:
    """Homogeneity of two dichotomous items.

    ``F`` counts pairs failing the more popular item while passing the less
    popular one; ``E = n (1 - p_more) p_less``.
    """
    x_i = np.asarray(x_i, dtype=bool)
    x_j = np.asarray(x_j, dtype=bool)
    if x_i.shape != x_j.shape or x_i.ndim != 1 or x_i.size < 2:
        raise ValueError("need two equal-length response vectors with n >= 2")
    n = x_i.size
    ni, nj = int(x_i.sum()), int(x_j.sum())
    if ni in (0, n) or nj in (0, n):
        raise ConstantItemError("constant item: expected Guttman errors are zero")
    more, less = (x_i, x_j) if ni >= nj else (x_j, x_i)
    f = float(np.sum(~more & less))
    e = (n - more.sum()) * less.sum() / n
    p_i, p_j = ni / n, nj / n
    cov = float(np.mean(x_i & x_j)) - p_i * p_j
    cov_max = min(p_i, p_j) - p_i * p_j
    return PairH(1.0 - f / e, f, float(e), cov, cov_max)


def _pair_errors_binary(X: np.ndarray):
    n = X.shape[0]
    Xi = X.astype(np.int64)
    both = Xi.T @ Xi
    tot = Xi.sum(axis=0)
    less = np.minimum(tot[:, None], tot[None, :])
    more = np.maximum(tot[:, None], tot[None, :])
    F = (less - both).astype(float)
    E = (n - more) * less / n
    return F, E


def comonotonic_cross_moment(a, b) -> float:
    """Largest attainable mean of ``a * b`` given the two empirical margins.

    Walks the merged cumulative distributions of both variables, so the
    coupling is built from the margins alone.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    n = a.size
    va, ca = np.unique(a, return_counts=True)
    vb, cb = np.unique(b, return_counts=True)
    cum_a, cum_b = np.cumsum(ca), np.cumsum(cb)
    cuts = np.union1d(cum_a, cum_b)
    widths = np.diff(np.concatenate(([0], cuts)))
    ia = np.searchsorted(cum_a, cuts)
    ib = np.searchsorted(cum_b, cuts)
    return float(np.sum(widths * va[ia].astype(float) * vb[ib].astype(float)) / n)


def _pair_errors_poly(L: np.ndarray):
    n, k = L.shape
    Lf = L.astype(float)
    mean = Lf.mean(axis=0)
    cross = Lf.T @ Lf / n
    cov = cross - np.outer(mean, mean)
    cov_max = np.zeros((k, k))
    for i in range(k):
        for j in range(i, k):
            cov_max[i, j] = cov_max[j, i] = (
                comonotonic_cross_moment(L[:, i], L[:, j]) - mean[i] * mean[j]
            )
    return n * (cov_max - cov), n * cov_max


@dataclass
class HReport:
    """Homogeneity coefficients with the error totals behind each one."""

    items: tuple[str, ...]
    pair_f: np.ndarray
    pair_e: np.ndarray
    excluded: tuple[str, ...] = ()
    kind: str = "dichotomous"
    used: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.used is None:
            self.used = np.array([it not in self.excluded for it in self.items])
        if self.used.sum() < 2:
            raise TooFewItemsError("fewer than 2 non-constant items")

    @property
    def pairwise(self) -> np.ndarray:
        """H per item pair; NaN on the diagonal and for excluded items."""
        with np.errstate(divide="ignore", invalid="ignore"):
            H = 1.0 - self.pair_f / self.pair_e
        return np.where(self._mask(), H, np.nan)

    def _mask(self):
        mask = np.outer(self.used, self.used)
        np.fill_diagonal(mask, False)
        return mask

    @property
    def item_totals(self) -> tuple[np.ndarray, np.ndarray]:
        mask = self._mask()
        return (self.pair_f * mask).sum(axis=1), (self.pair_e * mask).sum(axis=1)

    @property
    def per_item(self) -> dict[str, float]:
        F, E = self.item_totals
        return {
            it: float(1.0 - F[i] / E[i])
            for i, it in enumerate(self.items)
            if self.used[i]
        }

    @property
    def scale_totals(self) -> tuple[float, float]:
        mask = np.triu(self._mask(), 1)
        return float((self.pair_f * mask).sum()), float((self.pair_e * mask).sum())

    @property
    def scale(self) -> float:
        F, E = self.scale_totals
        return 1.0 - F / E

    def group_h(self, groups: dict[str, list[str]]) -> dict[str, float]:
        """H for sets of items, counting only pairs that cross the group boundary."""
        mask = self._mask()
        idx = {it: i for i, it in enumerate(self.items)}
        out = {}
        for name, members in groups.items():
            inside = np.zeros(len(self.items), dtype=bool)
            inside[[idx[m] for m in members]] = True
            cross = mask & np.outer(inside, ~inside)
            E = (self.pair_e * cross).sum()
            if E > 0:
                out[name] = float(1.0 - (self.pair_f * cross).sum() / E)
        return out


def _constant(X) -> np.ndarray:
    return (X == X[:1]).all(axis=0) if X.shape[0] else np.ones(X.shape[1], dtype=bool)


def _report(X, items, kind):
    const = _constant(X)
    excluded = tuple(it for it, c in zip(items, const) if c)
    if excluded:
        logger.warning("excluding constant items: %s", ", ".join(excluded))
    if (~const).sum() < 2:
        raise TooFewItemsError("fewer than 2 non-constant items")
    F, E = _pair_errors_binary(X) if kind == "dichotomous" else _pair_errors_poly(X)
    return HReport(tuple(items), F, E, excluded, kind, ~const)


def h_report(bank: ItemBank) -> HReport:
    """Pairwise, per-item and scale H over the dichotomous step items."""
    return _report(check_binary(bank.responses), bank.item_ids, "dichotomous")


def h_item(bank: ItemBank, item: str) -> float:
    rep = h_report(bank)
    if item in rep.excluded:
        raise ConstantItemError(f"item {item!r} is constant")
    return rep.per_item[item]


def h_scale(bank: ItemBank) -> float:
    return h_report(bank).scale


def h_polytomous(levels, categories=CATEGORY_NAMES) -> HReport:
    """H over the polytomous category items (level variables 0..4)."""
    levels = check_counts(levels, n_columns=len(categories))
    return _report(levels, list(categories), "polytomous")


class MokkenScale(BaseEstimator):
    """Loevinger homogeneity of a set of ordered items.

    Works on 0/1 responses and on integer item scores alike; for 0/1 data the
    covariance-ratio form reduces to the Guttman-error count form.

    Parameters
    ----------
    item_names : sequence of str, optional
        Column labels; defaults to ``item0``, ``item1``, ...
    strong_threshold : float
        Scale H above which the scale is flagged strong.
    """

    def __init__(self, item_names=None, strong_threshold=0.5):
        self.item_names = item_names
        self.strong_threshold = strong_threshold

    def fit(self, X, y=None):
        X = check_counts(X)
        names = (
            list(self.item_names)
            if self.item_names is not None
            else [f"item{i}" for i in range(X.shape[1])]
        )
        if len(names) != X.shape[1]:
            raise ValueError("item_names length does not match the number of columns")
        kind = "dichotomous" if X.max(initial=0) <= 1 else "polytomous"
        self.report_ = _report(X, names, kind)
        self.n_features_in_ = X.shape[1]
        self.H_ = self.report_.scale
        self.Hi_ = self.report_.per_item
        self.Hij_ = self.report_.pairwise
        self.excluded_ = list(self.report_.excluded)
        return self

    def score(self, X=None, y=None):
        check_is_fitted(self, "H_")
        if X is None:
            return self.H_
        return self.__class__(**self.get_params()).fit(X).H_

    @property
    def is_strong_(self) -> bool:
        check_is_fitted(self, "H_")
        return self.H_ > self.strong_threshold
