"""
Lyapunov Module - Потенциал L(p) = Σ u_i(p) + Σ p_j

- lyapunov: значение и разложение по участникам
- delta_up / delta_down: формулы изменения L при сдвиге цен на 1_S
- submodularity_check / scan_submodularity: L(p∧q) + L(p∨q) <= L(p) + L(q)
- grid_minimize_lyapunov: полный перебор сетки [0, B]^m
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from .demand import GRID_CHUNK, auction_redundant, auction_requirement, max_utility, utility_matrix
from .instance import (
    Instance,
    ItemSet,
    PriceVector,
    join,
    lower_prices,
    meet,
    price_grid,
    raise_prices,
    set_size,
)

# -------------------- Logging Setup --------------------
logger = logging.getLogger("walras-lyapunov")


@dataclass(frozen=True)
class LyapunovReport:
    value: int
    per_bidder_utilities: Tuple[int, ...]
    price_mass: int

    def to_dict(self) -> Dict[str, object]:
        return {
            "value": self.value,
            "per_bidder_utilities": list(self.per_bidder_utilities),
            "price_mass": self.price_mass,
        }


def lyapunov(inst: Instance, p: PriceVector) -> LyapunovReport:
    utilities = tuple(max_utility(v, p) for v in inst.bidders)
    mass = sum(p)
    return LyapunovReport(sum(utilities) + mass, utilities, mass)


def lyapunov_value(inst: Instance, p: PriceVector) -> int:
    return lyapunov(inst, p).value


# -------------------- Unit moves --------------------
@dataclass(frozen=True)
class DeltaCheck:
    predicted: int
    actual: int

    @property
    def agrees(self) -> bool:
        return self.predicted == self.actual


def delta_up(inst: Instance, p: PriceVector, s: ItemSet) -> DeltaCheck:
    """L(p + 1_S) predicted as L(p) - l^p(S) + |S| against the direct value."""
    base = lyapunov_value(inst, p)
    predicted = base - auction_requirement(inst, p, s) + set_size(s)
    return DeltaCheck(predicted, lyapunov_value(inst, raise_prices(p, s)))


def delta_down(inst: Instance, p: PriceVector, s: ItemSet) -> DeltaCheck:
    """L(p - 1_S) predicted as L(p) + h^p(S) - |S|; needs p >= 1_S."""
    lowered = lower_prices(p, s)
    base = lyapunov_value(inst, p)
    predicted = base + auction_redundant(inst, p, s) - set_size(s)
    return DeltaCheck(predicted, lyapunov_value(inst, lowered))


# -------------------- Submodularity --------------------
@dataclass(frozen=True)
class SubmodularityCheck:
    p: PriceVector
    q: PriceVector
    lhs_meet_join: int
    rhs_sum: int

    @property
    def holds(self) -> bool:
        return self.lhs_meet_join <= self.rhs_sum

    def to_dict(self) -> Dict[str, object]:
        return {
            "p": list(self.p),
            "q": list(self.q),
            "lhs": self.lhs_meet_join,
            "rhs": self.rhs_sum,
            "holds": self.holds,
        }


def submodularity_check(inst: Instance, p: PriceVector, q: PriceVector) -> SubmodularityCheck:
    lhs = lyapunov_value(inst, meet(p, q)) + lyapunov_value(inst, join(p, q))
    rhs = lyapunov_value(inst, p) + lyapunov_value(inst, q)
    return SubmodularityCheck(tuple(p), tuple(q), lhs, rhs)


def grid_pairs(inst: Instance, sample: int, seed: int = 0) -> Iterator[Tuple[PriceVector, PriceVector]]:
    """All unordered grid pairs, or `sample` seeded random pairs when there are more."""
    grid = list(inst.grid())
    total = len(grid) * (len(grid) + 1) // 2
    if total <= sample:
        for a in range(len(grid)):
            for b in range(a, len(grid)):
                yield grid[a], grid[b]
        return
    rng = np.random.default_rng(seed)
    picks = rng.integers(0, len(grid), size=(sample, 2))
    for a, b in picks:
        yield grid[int(a)], grid[int(b)]


def scan_submodularity(inst: Instance, sample: int = 100_000, seed: int = 0) -> Tuple[int, Optional[SubmodularityCheck]]:
    """Count checked pairs; return the first violating pair if any."""
    checked = 0
    for p, q in grid_pairs(inst, sample, seed):
        checked += 1
        result = submodularity_check(inst, p, q)
        if not result.holds:
            logger.info(f"❌ [SUBMODULARITY] violated at p={list(p)} q={list(q)}")
            return checked, result
    return checked, None


# -------------------- Grid minimization --------------------
@dataclass(frozen=True)
class LyapunovMinimum:
    min_value: int
    minimizers: Tuple[PriceVector, ...]

    def to_dict(self) -> Dict[str, object]:
        return {"min_value": self.min_value, "minimizers": [list(p) for p in self.minimizers]}


def lyapunov_grid_values(inst: Instance, prices: np.ndarray) -> np.ndarray:
    """L(p) for every row of prices."""
    prices = np.atleast_2d(np.asarray(prices, dtype=np.int64))
    total = prices.sum(axis=1)
    for v in inst.bidders:
        total = total + utility_matrix(v, prices).max(axis=1)
    return total


def _chunks(grid: Sequence[PriceVector]) -> Iterator[Sequence[PriceVector]]:
    for start in range(0, len(grid), GRID_CHUNK):
        yield grid[start:start + GRID_CHUNK]


def _scan_chunk(args: Tuple[Instance, Sequence[PriceVector]]) -> Tuple[int, List[PriceVector]]:
    inst, chunk = args
    values = lyapunov_grid_values(inst, np.asarray(chunk, dtype=np.int64))
    best = int(values.min())
    return best, [tuple(int(x) for x in chunk[i]) for i in np.flatnonzero(values == best)]


def grid_minimize_lyapunov(inst: Instance, jobs: int = 1, progress: bool = False) -> LyapunovMinimum:
    """min of L over [0, B]^m with every argmin, lexicographic order."""
    grid = list(price_grid(inst.m, inst.grid_bound))
    tasks = [(inst, chunk) for chunk in _chunks(grid)]
    bar = dict(total=len(tasks), desc="lyapunov-min", unit="chunk", disable=not progress)
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(tqdm(pool.map(_scan_chunk, tasks), **bar))
    else:
        results = [_scan_chunk(task) for task in tqdm(tasks, **bar)]

    best = min(value for value, _ in results)
    minimizers = tuple(p for value, points in results if value == best for p in points)
    logger.info(f"📉 [LYAPUNOV MIN] min L = {best} at {len(minimizers)} grid point(s)")
    return LyapunovMinimum(best, minimizers)
