"""Optimal point assignment and Earth Mover's Distance between equal-size clouds.

The ground cost is the unsquared Euclidean distance. Small instances are
solved exactly by a shortest-augmenting-path assignment solver; larger
ones by an epsilon-scaling auction whose final prices certify that the
returned cost exceeds the optimum by at most N * epsilon_final.

All arithmetic runs in 64-bit regardless of the 32-bit point storage.
Solvers are pure functions: concurrent solves on distinct inputs are safe.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from .core import Assignment, PointCloud

# Above this size the auction solver recomputes cost rows on demand
# instead of materializing the full N x N matrix.
DENSE_MATRIX_LIMIT = 4096

# Row blocks used by the matrix-free path, sized to bound temp memory.
_CHUNK_ELEMENTS = 1 << 22


class ConvergenceError(RuntimeError):
    """Auction exceeded its bid budget; input is pathological for the
    configured epsilon (caller may retry with a looser epsilon_final)."""


@dataclass(frozen=True)
class SolverConfig:
    exact_threshold: int = 256  # largest N routed to the exact solver
    epsilon_final: float = 1e-4  # per-point price precision of the auction
    epsilon_scaling_factor: float = 4.0
    max_auction_rounds: int = 10_000_000  # budget in individual bid operations

    def __post_init__(self):
        if self.exact_threshold < 1:
            raise ValueError("exact_threshold must be >= 1")
        if not self.epsilon_final > 0:
            raise ValueError("epsilon_final must be > 0")
        if not self.epsilon_scaling_factor > 1:
            raise ValueError("epsilon_scaling_factor must be > 1")
        if self.max_auction_rounds < 1:
            raise ValueError("max_auction_rounds must be >= 1")


DEFAULT_CONFIG = SolverConfig()


def _require_same_size(x1: PointCloud, x2: PointCloud) -> int:
    if len(x1) != len(x2):
        raise ValueError(f"cloud sizes differ: {len(x1)} vs {len(x2)}")
    return len(x1)


def cost(x1: PointCloud, i: int, x2: PointCloud, j: int) -> float:
    """Euclidean distance between point i of x1 and point j of x2."""
    if not 0 <= i < len(x1):
        raise IndexError(f"index {i} out of range for cloud of {len(x1)} points")
    if not 0 <= j < len(x2):
        raise IndexError(f"index {j} out of range for cloud of {len(x2)} points")
    d = x1.points[i].astype(np.float64) - x2.points[j].astype(np.float64)
    return float(np.sqrt(np.dot(d, d)))


def cost_matrix(x1: PointCloud, x2: PointCloud) -> np.ndarray:
    """Dense float64 matrix of pairwise Euclidean distances."""
    _require_same_size(x1, x2)
    return cdist(x1.points.astype(np.float64), x2.points.astype(np.float64))


def _total_cost(c: np.ndarray, mapping: np.ndarray) -> float:
    return float(c[np.arange(c.shape[0]), mapping].sum())


def solve_exact(x1: PointCloud, x2: PointCloud) -> Assignment:
    """Minimum-cost bijection, solved exactly.

    O(N^3); intended for N up to the configured exact threshold, though
    nothing but patience caps it.
    """
    n = _require_same_size(x1, x2)
    c = cost_matrix(x1, x2)
    _, mapping = linear_sum_assignment(c)
    return Assignment(mapping.astype(np.int64), _total_cost(c, mapping), True)


def solve_auction(
    x1: PointCloud, x2: PointCloud, config: SolverConfig = DEFAULT_CONFIG
) -> Assignment:
    """Approximate minimum-cost bijection via an epsilon-scaling auction.

    Terminates with a complete assignment satisfying epsilon-complementary
    slackness at the final epsilon, so the returned total cost is within
    N * config.epsilon_final of the exact optimum. Deterministic for fixed
    inputs and config.
    """
    n = _require_same_size(x1, x2)
    if n == 1:
        return Assignment(np.zeros(1, dtype=np.int64), cost(x1, 0, x2, 0), False)

    a = x1.points.astype(np.float64)
    b = x2.points.astype(np.float64)
    dense = n <= DENSE_MATRIX_LIMIT
    c = cdist(a, b) if dense else None

    if dense:
        max_cost = float(c.max())

        def benefit_rows(rows):
            return -c[rows]

    else:
        rows_per_chunk = max(1, _CHUNK_ELEMENTS // n)
        max_cost = 0.0
        for lo in range(0, n, rows_per_chunk):
            max_cost = max(max_cost, float(cdist(a[lo : lo + rows_per_chunk], b).max()))

        def benefit_rows(rows):
            if len(rows) <= rows_per_chunk:
                return -cdist(a[rows], b)
            out = np.empty((len(rows), n))
            for lo in range(0, len(rows), rows_per_chunk):
                out[lo : lo + rows_per_chunk] = -cdist(a[rows[lo : lo + rows_per_chunk]], b)
            return out

    if max_cost <= 0.0:
        # Every pairwise distance is zero: any bijection is optimal.
        mapping = np.arange(n, dtype=np.int64)
        return Assignment(mapping, 0.0, False)

    prices = np.zeros(n)
    eps = max(max_cost / 4.0, config.epsilon_final)
    bids_used = 0

    while True:
        item_of = np.full(n, -1, dtype=np.int64)  # bidder -> item
        owner = np.full(n, -1, dtype=np.int64)  # item -> bidder
        unassigned = n
        while unassigned > 0:
            bidders = np.flatnonzero(item_of < 0)
            u = bidders.size
            bids_used += u
            if bids_used > config.max_auction_rounds:
                raise ConvergenceError(
                    f"auction exceeded {config.max_auction_rounds} bids at epsilon {eps:g}"
                )
            values = benefit_rows(bidders) - prices
            rows = np.arange(u)
            best_item = np.argmax(values, axis=1)
            best_value = values[rows, best_item]
            values[rows, best_item] = -np.inf
            second_value = values.max(axis=1)
            increment = best_value - second_value + eps

            # Per contested item keep the highest bid, ties to the smaller
            # bidder index, so rounds are fully deterministic.
            order = np.lexsort((bidders, -increment, best_item))
            ordered_items = best_item[order]
            is_first = np.ones(u, dtype=bool)
            is_first[1:] = ordered_items[1:] != ordered_items[:-1]
            winner_rows = order[is_first]

            items = best_item[winner_rows]
            winners = bidders[winner_rows]
            prices[items] += increment[winner_rows]
            displaced = owner[items]
            item_of[displaced[displaced >= 0]] = -1
            owner[items] = winners
            item_of[winners] = items
            unassigned = int(np.count_nonzero(item_of < 0))

        if eps <= config.epsilon_final:
            break
        eps = max(eps / config.epsilon_scaling_factor, config.epsilon_final)

    if dense:
        total = _total_cost(c, item_of)
    else:
        total = float(np.linalg.norm(a - b[item_of], axis=1).sum())
    return Assignment(item_of, total, False)


def optimal_assignment(
    x1: PointCloud, x2: PointCloud, config: SolverConfig = DEFAULT_CONFIG
) -> Assignment:
    """Entry point used by the mixer: exact up to (and including) the
    configured threshold, auction above it."""
    n = _require_same_size(x1, x2)
    if n <= config.exact_threshold:
        return solve_exact(x1, x2)
    return solve_auction(x1, x2, config)


def emd(x1: PointCloud, x2: PointCloud, config: SolverConfig = DEFAULT_CONFIG) -> float:
    """Earth Mover's Distance: mean displacement under the optimal assignment."""
    assignment = optimal_assignment(x1, x2, config)
    return assignment.total_cost / len(assignment)
