"""Brute-force reference computations, independent of the package code paths."""

import itertools
import math
from fractions import Fraction

import numpy as np


def nearest_rank(values, p):
    """Textbook nearest-rank percentile: sorted value at 1-based position ceil(p n)."""
    s = sorted(values)
    return s[math.ceil(Fraction(p) * len(s)) - 1]


def guttman_pair_oracle(a, b):
    """Count errors subject by subject; the less popular item is the 'harder' one."""
    n = len(a)
    pa, pb = sum(a) / n, sum(b) / n
    easy, hard = (a, b) if pa >= pb else (b, a)
    p_easy, p_hard = max(pa, pb), min(pa, pb)
    F = sum(1 for e, h in zip(easy, hard) if not e and h)
    E = n * (1 - p_easy) * p_hard
    return F, E


def scale_h_oracle(X):
    X = [list(map(bool, row)) for row in X]
    cols = list(zip(*X))
    usable = [c for c in cols if 0 < sum(c) < len(c)]
    F = E = 0.0
    for a, b in itertools.combinations(usable, 2):
        f, e = guttman_pair_oracle(a, b)
        F += f
        E += e
    return 1 - F / E


def covmax_sorted_oracle(a, b):
    a, b = sorted(a), sorted(b)
    n = len(a)
    ma, mb = sum(a) / n, sum(b) / n
    return sum(x * y for x, y in zip(a, b)) / n - ma * mb


def covmax_permutation_oracle(a, b):
    n = len(a)
    ma, mb = sum(a) / n, sum(b) / n
    best = max(sum(x * y for x, y in zip(a, perm)) / n for perm in itertools.permutations(b))
    return best - ma * mb


def poly_h_oracle(L):
    L = np.asarray(L, dtype=float)
    k = L.shape[1]
    num = den = 0.0
    for i, j in itertools.combinations(range(k), 2):
        a, b = L[:, i].tolist(), L[:, j].tolist()
        cov = sum(x * y for x, y in zip(a, b)) / len(a) - (sum(a) / len(a)) * (sum(b) / len(b))
        num += cov
        den += covmax_sorted_oracle(a, b)
    return num / den
