"""Rest-score item response functions, item difficulty and adjusted scores."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, log1p
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .validation import check_binary

logger = logging.getLogger(__name__)

RIDGE = 1e-6
SEPARATION_SLOPE = 50.0
MAX_ITER = 100


class IRFFitError(ValueError):
    pass


class ConvergenceError(IRFFitError):
    pass


@dataclass(frozen=True)
class IRFModel:
    item_id: str
    intercept: float
    slope: float
    difficulty: float
    iterations: int = 0
    converged: bool = True
    separated: bool = False
    regularized: bool = True

    def prob(self, rest) -> np.ndarray:
        """``1 / (1 + exp(-(b0 + b1 * r)))``."""
        return expit(self.intercept + self.slope * np.asarray(rest, dtype=float))


def rest_scores(bank_or_responses, item) -> np.ndarray:
    """Total over all other items, per language."""
    if hasattr(bank_or_responses, "responses"):
        X = bank_or_responses.responses
        if isinstance(item, str):
            item = bank_or_responses.item_ids.index(item)
    else:
        X = np.asarray(bank_or_responses)
    X = X.astype(np.int64)
    return X.sum(axis=1) - X[:, item]


def _design(rest):
    rest = np.asarray(rest, dtype=float)
    return np.column_stack([np.ones_like(rest), rest])


def penalized_loglik(beta, rest, y, lam=RIDGE) -> float:
    eta = _design(rest) @ np.asarray(beta, dtype=float)
    y = np.asarray(y, dtype=float)
    # log(1 + e^eta) computed stably
    softplus = np.where(eta > 0, eta + log1p(np.exp(-eta)), log1p(np.exp(eta)))
    return float(np.sum(y * eta - softplus) - lam * np.dot(beta, beta))


def penalized_gradient(beta, rest, y, lam=RIDGE) -> np.ndarray:
    X = _design(rest)
    mu = expit(X @ np.asarray(beta, dtype=float))
    return X.T @ (np.asarray(y, dtype=float) - mu) - 2.0 * lam * np.asarray(beta, dtype=float)


def _separation_midpoint(y, rest):
    """Midpoint between the highest negative and the lowest positive rest score, or None."""
    neg, pos = rest[~y], rest[y]
    if neg.max() < pos.min():
        return 0.5 * (neg.max() + pos.min())
    return None


def fit_irf(y, rest, item_id: str = "", lam: float = RIDGE, max_iter: int = MAX_ITER,
            tol: float = 1e-10, trace: list | None = None) -> IRFModel:
    """Ridge-penalised logistic regression of an item on the rest score by IRLS.

    Each Newton step is halved until the penalised log-likelihood does not
    decrease. Completely separated data, or a slope beyond the separation
    guard, is flagged ``separated``; its difficulty then falls back to the
    midpoint between the highest negative and lowest positive rest score,
    and the IRF is pinned to slope 50 through that point.
    """
    y = np.asarray(y).astype(bool)
    rest = np.asarray(rest, dtype=float)
    if y.shape != rest.shape or y.ndim != 1:
        raise ValueError("responses and rest scores must be equal-length vectors")
    if y.all() or not y.any():
        raise IRFFitError(f"item {item_id!r} is constant")
    if np.unique(rest).size < 2:
        raise IRFFitError(f"item {item_id!r}: need at least 2 distinct rest scores")

    X = _design(rest)
    yf = y.astype(float)
    p = yf.mean()
    beta = np.array([np.log(p / (1 - p)), 0.0])
    ll = penalized_loglik(beta, rest, yf, lam)
    if trace is not None:
        trace.append(ll)
    penalty = 2.0 * lam * np.eye(2)
    converged = False
    blown = False
    it = 0
    for it in range(1, max_iter + 1):
        mu = expit(X @ beta)
        w = mu * (1.0 - mu)
        grad = X.T @ (yf - mu) - 2.0 * lam * beta
        hess = (X * w[:, None]).T @ X + penalty
        step = np.linalg.solve(hess, grad)
        t = 1.0
        for _ in range(60):
            cand = beta + t * step
            ll_new = penalized_loglik(cand, rest, yf, lam)
            if ll_new >= ll:
                break
            t *= 0.5
        else:
            cand, ll_new = beta, ll
        delta = np.max(np.abs(cand - beta))
        beta, ll = cand, ll_new
        if trace is not None:
            trace.append(ll)
        if abs(beta[1]) > SEPARATION_SLOPE:
            blown = True
            break
        if delta < tol * (1.0 + np.max(np.abs(beta))):
            converged = True
            break

    b0, b1 = float(beta[0]), float(beta[1])
    midpoint = _separation_midpoint(y, rest)
    if midpoint is None and blown:
        # overlap at the boundary: centre of the overlapping band
        midpoint = 0.5 * (rest[~y].max() + rest[y].min())
    if midpoint is not None:
        midpoint = float(midpoint)
        return IRFModel(item_id, -SEPARATION_SLOPE * midpoint, SEPARATION_SLOPE, midpoint,
                        it, converged, True, lam > 0)
    if not converged:
        raise ConvergenceError(f"item {item_id!r}: IRLS did not converge in {max_iter} iterations")
    if b1 <= 0:
        logger.warning("item %s has a non-increasing IRF (slope %.4g)", item_id, b1)
    return IRFModel(item_id, b0, b1, -b0 / b1, it, True, False, lam > 0)


@dataclass(frozen=True)
class AdjustedScores:
    raw: np.ndarray
    adjusted: np.ndarray
    contributions: np.ndarray


def fit_items(bank) -> tuple[dict[str, IRFModel], dict[str, str]]:
    """Fit every item; failures are reported per item rather than raised."""
    models, errors = {}, {}
    for k, item in enumerate(bank.item_ids):
        try:
            models[item] = fit_irf(bank.responses[:, k], rest_scores(bank.responses, k), item)
        except IRFFitError as exc:
            errors[item] = str(exc)
    return models, errors


def difficulties(bank) -> list[tuple[str, float]]:
    """Item difficulties ascending (ties by item id), skipping items that cannot be fit."""
    models, _ = fit_items(bank)
    return sorted(((m.item_id, m.difficulty) for m in models.values()), key=lambda t: (t[1], t[0]))


def adjusted_scores(responses, item_ids, models) -> AdjustedScores:
    """Score every positive response by its IRF at the language's rest score.

    Items without a model are constant in the fitting data; a positive
    response to such an item counts 1.
    """
    X = check_binary(responses, n_columns=len(item_ids), ensure_min_samples=0)
    total = X.sum(axis=1)
    contrib = np.zeros(X.shape, dtype=float)
    for k, item in enumerate(item_ids):
        pos = X[:, k]
        if item in models:
            contrib[pos, k] = models[item].prob(total[pos] - 1)
        else:
            contrib[pos, k] = 1.0
    return AdjustedScores(total, contrib.sum(axis=1), contrib)


class RestScoreIRT(TransformerMixin, BaseEstimator):
    """One logistic IRF per dichotomous item against its rest score.

    ``transform`` returns the per-item probability contributions of positive
    responses; ``score_samples`` their row sums (the adjusted scores).

    Parameters
    ----------
    item_ids : sequence of str, optional
    lam : float
        Ridge penalty on intercept and slope.
    """

    def __init__(self, item_ids=None, lam=RIDGE):
        self.item_ids = item_ids
        self.lam = lam

    def _ids(self, n):
        ids = list(self.item_ids) if self.item_ids is not None else [f"item{i}" for i in range(n)]
        if len(ids) != n:
            raise ValueError("item_ids length does not match the number of columns")
        return ids

    def fit(self, X, y=None):
        X = check_binary(X)
        ids = self._ids(X.shape[1])
        self.models_, self.fit_errors_ = {}, {}
        for k, item in enumerate(ids):
            try:
                self.models_[item] = fit_irf(X[:, k], rest_scores(X, k), item, lam=self.lam)
            except IRFFitError as exc:
                self.fit_errors_[item] = str(exc)
        self.item_ids_ = ids
        self.n_features_in_ = X.shape[1]
        self.difficulties_ = sorted(
            ((m.item_id, m.difficulty) for m in self.models_.values()), key=lambda t: (t[1], t[0])
        )
        return self

    def transform(self, X):
        check_is_fitted(self, "models_")
        return adjusted_scores(X, self.item_ids_, self.models_).contributions

    def score_samples(self, X):
        check_is_fitted(self, "models_")
        return adjusted_scores(X, self.item_ids_, self.models_).adjusted
