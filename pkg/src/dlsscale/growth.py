"""Logistic growth curve over log-rank and the five summary levels.

Both axes are normalised to the unit square: ``x`` is the flipped log rank
divided by ``log10(N)`` and ``y`` is the adjusted score as a proportion of
the maximum. A stretch of curve is "more vertical than horizontal" where its
slope exceeds 1 on these axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import expit
from sklearn.base import BaseEstimator
from sklearn.utils import check_array
from sklearn.utils.validation import check_is_fitted

from .categories import MAX_SCORE


class Level(str, Enum):
    STILL = "Still"
    EMERGING = "Emerging"
    ASCENDING = "Ascending"
    VITAL = "Vital"
    THRIVING = "Thriving"

    def __str__(self):
        return self.value


# highest first, as reported
LEVEL_ORDER = (Level.THRIVING, Level.VITAL, Level.ASCENDING, Level.EMERGING, Level.STILL)


class CurveFitError(ValueError):
    pass


class DegenerateDataError(CurveFitError):
    pass


@dataclass(frozen=True)
class CurveFit:
    """``y = L / (1 + exp(-k (x - x0)))`` plus its unit-slope breakpoints."""

    L: float
    k: float
    x0: float
    rss: float
    iterations: int
    x_low: float
    x_mid: float
    x_high: float
    collapsed: bool

    def predict(self, x) -> np.ndarray:
        return logistic(x, self.L, self.k, self.x0)

    def slope(self, x) -> np.ndarray:
        s = expit(self.k * (np.asarray(x, dtype=float) - self.x0))
        return self.L * self.k * s * (1.0 - s)


def logistic(x, L, k, x0):
    return L * expit(k * (np.asarray(x, dtype=float) - x0))


def rank_transform(adjusted, raw, codes=None):
    """Flipped log-rank coordinates of the languages with a nonzero raw score.

    Ranks run 1 (highest adjusted score) to N, ties broken by code. Returns
    ``(mask, rank, x_norm)`` where ``mask`` selects the ranked languages and
    the other two arrays are aligned with the input (NaN / 0 elsewhere).
    """
    adjusted = np.asarray(adjusted, dtype=float)
    raw = np.asarray(raw)
    if codes is None:
        codes = np.array([f"{i:012d}" for i in range(adjusted.size)])
    codes = np.asarray(codes, dtype=str)
    mask = raw > 0
    idx = np.flatnonzero(mask)
    n = idx.size
    if n < 2:
        raise DegenerateDataError("need at least 2 languages with a nonzero score")
    order = idx[np.lexsort((codes[idx], -adjusted[idx]))]
    rank = np.zeros(adjusted.size, dtype=np.int64)
    rank[order] = np.arange(1, n + 1)
    x = np.full(adjusted.size, np.nan)
    x[idx] = np.log10(n / rank[idx]) / np.log10(n)
    return mask, rank, x


def _jacobian(x, L, k, x0):
    s = expit(k * (x - x0))
    ds = s * (1.0 - s)
    return np.column_stack([s, L * (x - x0) * ds, -L * k * ds])


def fit_curve(x, y, max_iter: int = 200, rtol: float = 1e-10) -> CurveFit:
    """Damped Gauss-Newton least squares for the three-parameter logistic.

    Starts from ``L = max(y)``, ``x0`` at the point whose ``y`` is closest to
    ``L/2`` and ``k = 4 / range(x)``. Steps are halved until the residual sum
    of squares drops; ``L`` is held to ``(0, 1]``. Stops when the relative RSS
    change falls below ``rtol``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be equal-length vectors")
    if x.size < 10:
        raise CurveFitError("need at least 10 points")
    if np.ptp(y) == 0:
        raise DegenerateDataError("all y values are equal")
    if np.ptp(x) == 0:
        raise DegenerateDataError("all x values are equal")

    L = min(float(y.max()), 1.0)
    x0 = float(x[np.argmin(np.abs(y - L / 2))])
    k = 4.0 / float(np.ptp(x))
    theta = np.array([L, k, x0])

    def rss_of(t):
        r = y - logistic(x, *t)
        return float(r @ r)

    rss = rss_of(theta)
    for it in range(1, max_iter + 1):
        r = y - logistic(x, *theta)
        J = _jacobian(x, *theta)
        step, *_ = np.linalg.lstsq(J, r, rcond=None)
        t = 1.0
        new_theta, new_rss = theta, rss
        for _ in range(50):
            cand = theta + t * step
            cand[0] = min(cand[0], 1.0)
            if cand[0] > 0:
                cand_rss = rss_of(cand)
                if cand_rss < rss:
                    new_theta, new_rss = cand, cand_rss
                    break
            t *= 0.5
        change = (rss - new_rss) / rss if rss > 0 else 0.0
        theta, rss = new_theta, new_rss
        if change < rtol or rss < 1e-30:
            break
    else:
        raise CurveFitError(f"Gauss-Newton did not converge in {max_iter} iterations")

    L, k, x0 = (float(v) for v in theta)
    if k <= 0:
        raise DegenerateDataError(f"fitted curve is not increasing (k={k:.4g})")
    return _with_breakpoints(L, k, x0, rss, it)


def breakpoints(L: float, k: float, x0: float) -> tuple[float, float, float, bool]:
    """Points where the curve's slope is exactly 1, around the midpoint.

    The slope is ``L k s (1 - s)``; setting it to 1 gives
    ``s = (1 +- q) / 2`` with ``q = sqrt(1 - 4 / (L k))``, i.e. offsets of
    ``2 atanh(q) / k`` either side of ``x0``. If ``L k <= 4`` the curve is
    never steeper than 1 and all three points collapse onto ``x0``.
    """
    lk = L * k
    if lk <= 4.0:
        return x0, x0, x0, True
    q = math.sqrt(1.0 - 4.0 / lk)
    d = 2.0 * math.atanh(q) / k
    return x0 - d, x0, x0 + d, False


def _with_breakpoints(L, k, x0, rss, iterations) -> CurveFit:
    lo, mid, hi, collapsed = breakpoints(L, k, x0)
    return CurveFit(L, k, x0, rss, iterations, lo, mid, hi, collapsed)


def make_curve(L: float, k: float, x0: float) -> CurveFit:
    """A CurveFit from known parameters, with breakpoints filled in."""
    return _with_breakpoints(float(L), float(k), float(x0), 0.0, 0)


def assign_level(x: float, raw: float, fit: CurveFit) -> Level:
    if raw <= 0:
        return Level.STILL
    if x < fit.x_low:
        return Level.EMERGING
    if x < fit.x_mid:
        return Level.ASCENDING
    if x < fit.x_high:
        return Level.VITAL
    return Level.THRIVING


def classify(raw, x, fit: CurveFit) -> list[Level]:
    """Summary level per language; ``x`` is ignored where ``raw`` is 0."""
    return [assign_level(xi, ri, fit) for xi, ri in zip(np.asarray(x), np.asarray(raw))]


@dataclass(frozen=True)
class LevelSummary:
    level: Level
    count: int
    highest: str | None
    lowest: str | None


def summarize_levels(levels, adjusted, codes) -> list[LevelSummary]:
    """Counts per level with the highest- and lowest-scoring member as examples."""
    adjusted = np.asarray(adjusted, dtype=float)
    codes = list(codes)
    out = []
    for lvl in LEVEL_ORDER:
        members = [i for i, l in enumerate(levels) if l == lvl]
        if not members:
            out.append(LevelSummary(lvl, 0, None, None))
            continue
        members.sort(key=lambda i: (-adjusted[i], codes[i]))
        out.append(LevelSummary(lvl, len(members), codes[members[0]], codes[members[-1]]))
    return out


class GrowthCurveClassifier(BaseEstimator):
    """Fit the S-curve to ranked adjusted scores and label each language.

    ``X`` has two columns: raw score and adjusted score. Ranking is relative
    to the rows passed in, so ``predict`` ranks its own input and applies the
    fitted breakpoints, which live on normalised axes and carry across
    population sizes.

    Parameters
    ----------
    max_score : float
        Denominator turning adjusted scores into proportions.
    """

    def __init__(self, max_score=MAX_SCORE):
        self.max_score = max_score

    def _coords(self, X, codes):
        X = check_array(X, dtype=float, ensure_min_samples=2)
        if X.shape[1] != 2:
            raise ValueError("X must have two columns: raw score, adjusted score")
        raw, adjusted = X[:, 0], X[:, 1]
        mask, rank, x = rank_transform(adjusted, raw, codes)
        return raw, adjusted, mask, rank, x

    def fit(self, X, y=None, codes=None):
        raw, adjusted, mask, rank, x = self._coords(X, codes)
        self.curve_ = fit_curve(x[mask], adjusted[mask] / self.max_score)
        self.n_features_in_ = 2
        return self

    def predict(self, X, codes=None):
        check_is_fitted(self, "curve_")
        raw, _, mask, _, x = self._coords(X, codes)
        return np.array([lvl.value for lvl in classify(raw, x, self.curve_)], dtype=object)

    def fit_predict(self, X, y=None, codes=None):
        return self.fit(X, codes=codes).predict(X, codes=codes)
