"""Independent reference implementations used to check the real ones.

Everything here favors obviousness over speed: exhaustive enumeration,
linear scans, direct transcriptions of the defining formulas. Tests compare
library output against these on small inputs, and several frozen constants
in the test files were produced by running them once.
"""

from __future__ import annotations

import itertools

import numpy as np


def pairwise_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row i, column j holds ||a_i - b_j||, accumulated in float64."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt((diff * diff).sum(axis=2))


def brute_force_assignment(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, float]:
    """Exhaustive minimum over all N! bijections; ties to the
    lexicographically smallest mapping. Only sane for N <= 8."""
    n = len(a)
    c = pairwise_distances(a, b)
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64)
    totals = c[np.arange(n), perms].sum(axis=1)
    best = perms[int(np.argmin(totals))]
    return best, float(totals.min())


def brute_force_emd(a: np.ndarray, b: np.ndarray) -> float:
    _, total = brute_force_assignment(a, b)
    return total / len(a)


def linear_scan_knn(points: np.ndarray, center: int, k: int) -> np.ndarray:
    """k nearest neighbors of points[center], center first, then the rest
    ordered by (squared distance, index). Distances use the same row-wise
    float64 expression as the tree's leaf scan so results match bitwise."""
    pts = np.asarray(points, dtype=np.float64)
    diff = pts - pts[center]
    d2 = (diff * diff).sum(axis=1)
    others = np.array([i for i in range(len(pts)) if i != center], dtype=np.int64)
    order = others[np.lexsort((others, d2[others]))]
    return np.concatenate(([center], order[: k - 1])).astype(np.int64)


def reference_fps(points: np.ndarray, n: int, start: int) -> np.ndarray:
    """Farthest point sampling, one candidate at a time. Tie rule: first
    index attaining the max. Picked points are masked with -1 so duplicate
    coordinates can never be picked twice."""
    pts = np.asarray(points, dtype=np.float64)
    picked = [start]
    d2min = ((pts - pts[start]) ** 2).sum(axis=1)
    d2min[start] = -1.0
    for _ in range(n - 1):
        nxt = int(np.argmax(d2min))
        picked.append(nxt)
        d2 = ((pts - pts[nxt]) ** 2).sum(axis=1)
        d2min = np.minimum(d2min, d2)
        d2min[nxt] = -1.0
    return np.asarray(picked, dtype=np.int64)


def mixed_points(x1: np.ndarray, x2: np.ndarray, mapping: np.ndarray, keep: np.ndarray) -> np.ndarray:
    """Direct transcription of the combine rule: kept rows from x1,
    replaced rows from x2 re-ordered by the assignment."""
    out = x2[mapping].copy()
    out[keep] = x1[keep]
    return out


def mixed_label(y1: np.ndarray, y2: np.ndarray, lam: float) -> np.ndarray:
    return lam * np.asarray(y1, dtype=np.float64) + (1.0 - lam) * np.asarray(y2, dtype=np.float64)
