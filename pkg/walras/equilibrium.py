"""
Equilibrium Module - Равновесие Вальраса и характеризация цен

Этот модуль содержит переборные оракулы и характеризацию:
- max_welfare: максимальное общественное благосостояние (полный перебор)
- is_walrasian / is_envy_free: поиск распределения по наборам спроса
- walrasian_set / walrasian_bounds: все Walrasian цены на сетке, min и max
- characterize: вердикт только по OD/UD/WOD/WUD, без поиска распределений
- lattice_check: замкнутость относительно покоординатных min и max
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache, reduce
from operator import or_
from typing import Dict, List, Optional, Sequence, Tuple

from .demand import DemandClass, classify_set, demand_sets, require_gross_substitute
from .errors import NoEquilibriumError, PreconditionError, PremiseError
from .instance import (
    Instance,
    ItemSet,
    PriceVector,
    all_sets,
    can_lower,
    dominates,
    format_set,
    join,
    meet,
    price_grid,
    submasks,
)

# -------------------- Logging Setup --------------------
logger = logging.getLogger("walras-equilibrium")


# -------------------- Types --------------------
@dataclass(frozen=True)
class Allocation:
    m: int
    bundles: Tuple[ItemSet, ...]

    @property
    def disjoint(self) -> bool:
        used = 0
        for b in self.bundles:
            if used & b:
                return False
            used |= b
        return True

    @property
    def is_partition(self) -> bool:
        return self.disjoint and reduce(lambda a, b: a | b, self.bundles, 0) == (1 << self.m) - 1

    def welfare(self, inst: Instance) -> int:
        return sum(v.values[b] for v, b in zip(inst.bidders, self.bundles))

    def to_dict(self, labels: Optional[Sequence[str]] = None) -> Dict[str, object]:
        return {
            "bundles": [format_set(b, labels) for b in self.bundles],
            "partition": self.is_partition,
        }


@dataclass(frozen=True)
class EquilibriumCertificate:
    price: PriceVector
    allocation: Allocation
    welfare: int

    def to_dict(self, labels: Optional[Sequence[str]] = None) -> Dict[str, object]:
        return {
            "price": list(self.price),
            "allocation": self.allocation.to_dict(labels),
            "welfare": self.welfare,
        }


# -------------------- Welfare --------------------
def _welfare_with(inst: Instance, fixed: Tuple[ItemSet, ...]) -> int:
    """Best welfare when bidder i must receive fixed[i]; free items go anywhere."""
    n = inst.n

    @lru_cache(maxsize=None)
    def best(i: int, free: ItemSet) -> int:
        values = inst.bidders[i].values
        if i == n - 1:
            return values[fixed[i] | free]
        return max(values[fixed[i] | sub] + best(i + 1, free & ~sub) for sub in submasks(free))

    taken = reduce(or_, fixed, 0)
    return best(0, inst.full & ~taken)


def max_welfare(inst: Instance) -> Tuple[int, Allocation]:
    """Optimal welfare over all assignments of items to bidders.

    The optimum comes from a dynamic program over (bidder, unassigned items).
    The allocation returned is the first optimal assignment in item-major,
    bidder-minor order: item 0 goes to the lowest bidder that still allows
    the optimum, then item 1, and so on.
    """
    value = _welfare_with(inst, (0,) * inst.n)
    fixed = [0] * inst.n
    for j in range(inst.m):
        for i in range(inst.n):
            fixed[i] |= 1 << j
            if _welfare_with(inst, tuple(fixed)) == value:
                break
            fixed[i] &= ~(1 << j)
    return value, Allocation(inst.m, tuple(fixed))


# -------------------- Allocation search --------------------
def _search_allocation(inst: Instance, p: PriceVector, exact: bool) -> Optional[Tuple[ItemSet, ...]]:
    """Disjoint bundles, one demanded bundle per bidder; exact=True requires a partition."""
    demand = [demand_sets(v, p).sets for v in inst.bidders]
    full = inst.full
    # Объединение спроса оставшихся участников, для отсечения
    reach = [0] * (inst.n + 1)
    for i in range(inst.n - 1, -1, -1):
        reach[i] = reach[i + 1] | reduce(lambda a, b: a | b, demand[i], 0)
    if exact and reach[0] != full:
        return None

    chosen: List[ItemSet] = []

    def search(i: int, used: ItemSet) -> bool:
        if i == inst.n:
            return not exact or used == full
        if exact and (used | reach[i]) != full:
            return False
        for d in demand[i]:
            if d & used:
                continue
            chosen.append(d)
            if search(i + 1, used | d):
                return True
            chosen.pop()
        return False

    return tuple(chosen) if search(0, 0) else None


def is_walrasian(inst: Instance, p: PriceVector) -> Optional[EquilibriumCertificate]:
    """First partition (bidder order, ascending bundles) giving every bidder a demanded set."""
    bundles = _search_allocation(inst, p, exact=True)
    if bundles is None:
        return None
    allocation = Allocation(inst.m, bundles)
    return EquilibriumCertificate(tuple(p), allocation, allocation.welfare(inst))


def is_envy_free(inst: Instance, p: PriceVector) -> Optional[Allocation]:
    """Allocation, not necessarily exact, where every bidder gets a demanded set."""
    bundles = _search_allocation(inst, p, exact=False)
    return Allocation(inst.m, bundles) if bundles is not None else None


def _walrasian_flags(args: Tuple[Instance, Sequence[PriceVector]]) -> List[bool]:
    inst, chunk = args
    return [is_walrasian(inst, p) is not None for p in chunk]


def walrasian_set(inst: Instance, jobs: int = 1) -> List[PriceVector]:
    """Every Walrasian vector in [0, B]^m, lexicographic order."""
    grid = list(price_grid(inst.m, inst.grid_bound))
    size = max(1, len(grid) // max(1, jobs * 4))
    tasks = [(inst, grid[i:i + size]) for i in range(0, len(grid), size)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            flags = [f for chunk in pool.map(_walrasian_flags, tasks) for f in chunk]
    else:
        flags = [f for task in tasks for f in _walrasian_flags(task)]
    result = [p for p, ok in zip(grid, flags) if ok]
    logger.info(f"🔍 [WALRASIAN SET] {len(result)} of {len(grid)} grid points are Walrasian")
    return result


@dataclass(frozen=True)
class WalrasianBounds:
    minimum: PriceVector
    maximum: PriceVector
    count: int
    min_closed: bool
    max_closed: bool

    def to_dict(self) -> Dict[str, object]:
        return {
            "min": list(self.minimum),
            "max": list(self.maximum),
            "count": self.count,
            "min_closed": self.min_closed,
            "max_closed": self.max_closed,
        }


def walrasian_bounds(inst: Instance, prices: Optional[List[PriceVector]] = None, jobs: int = 1) -> WalrasianBounds:
    """Meet and join of the Walrasian set, with a closure check on each."""
    prices = walrasian_set(inst, jobs) if prices is None else prices
    if not prices:
        raise NoEquilibriumError("no Walrasian price vector on the grid")
    low = reduce(meet, prices)
    high = reduce(join, prices)
    low_ok = is_walrasian(inst, low) is not None and all(dominates(p, low) for p in prices)
    high_ok = is_walrasian(inst, high) is not None and all(dominates(high, p) for p in prices)
    return WalrasianBounds(low, high, len(prices), low_ok, high_ok)


def min_walrasian(inst: Instance, prices: Optional[List[PriceVector]] = None) -> PriceVector:
    bounds = walrasian_bounds(inst, prices)
    if not bounds.min_closed:
        raise PremiseError(f"meet {list(bounds.minimum)} of the Walrasian set is not Walrasian")
    return bounds.minimum


def max_walrasian(inst: Instance, prices: Optional[List[PriceVector]] = None) -> PriceVector:
    bounds = walrasian_bounds(inst, prices)
    if not bounds.max_closed:
        raise PremiseError(f"join {list(bounds.maximum)} of the Walrasian set is not Walrasian")
    return bounds.maximum


# -------------------- Price characterization --------------------
@dataclass(frozen=True)
class Evidence:
    set: ItemSet
    cls: DemandClass

    def to_dict(self, labels: Optional[Sequence[str]] = None) -> Dict[str, object]:
        return {"set": format_set(self.set, labels), "class": self.cls.value}


@dataclass(frozen=True)
class CharacterizationVerdict:
    price: PriceVector
    is_walrasian: bool
    is_min_walrasian: bool
    is_max_walrasian: bool
    evidence: Optional[Evidence]
    min_evidence: Optional[Evidence]
    max_evidence: Optional[Evidence]
    forced: bool = False

    def to_dict(self, labels: Optional[Sequence[str]] = None) -> Dict[str, object]:
        def ev(e: Optional[Evidence]):
            return e.to_dict(labels) if e else "none"

        return {
            "price": list(self.price),
            "is_walrasian": self.is_walrasian,
            "is_min_walrasian": self.is_min_walrasian,
            "is_max_walrasian": self.is_max_walrasian,
            "evidence": ev(self.evidence),
            "min_evidence": ev(self.min_evidence),
            "max_evidence": ev(self.max_evidence),
            "forced": self.forced,
        }


def characterize(inst: Instance, p: PriceVector, force: bool = False, check_cap: Optional[int] = None) -> CharacterizationVerdict:
    """Walrasian / minimum / maximum verdict from set classifications alone.

    Walrasian iff OD(p) and UD(p) are empty; minimum iff additionally
    WUD(p) = {∅}; maximum iff WOD(p) = {∅} and UD(p) is empty. A non-trivial
    weakly under-demanded set is a nonempty T with p >= 1_T. Requires all
    bidders gross substitute unless forced.
    """
    if not force:
        require_gross_substitute(inst, check_cap)

    evidence = min_evidence = max_evidence = None
    for s in all_sets(inst.m, nonempty=True):
        c = classify_set(inst, p, s)
        if evidence is None and (c.od or c.ud):
            evidence = Evidence(s, DemandClass.OD if c.od else DemandClass.UD)
        if min_evidence is None and c.wud and can_lower(p, s):
            min_evidence = Evidence(s, DemandClass.WUD)
        if max_evidence is None and c.wod:
            max_evidence = Evidence(s, DemandClass.WOD)

    walrasian = evidence is None
    verdict = CharacterizationVerdict(
        price=tuple(p),
        is_walrasian=walrasian,
        is_min_walrasian=walrasian and min_evidence is None,
        is_max_walrasian=walrasian and max_evidence is None,
        evidence=evidence,
        min_evidence=min_evidence,
        max_evidence=max_evidence,
        forced=force,
    )
    logger.debug(f"[CHARACTERIZE] p={list(p)} walrasian={walrasian}")
    return verdict


# -------------------- Lattice --------------------
@dataclass(frozen=True)
class LatticeCheck:
    meet: PriceVector
    join: PriceVector
    meet_walrasian: bool
    join_walrasian: bool

    @property
    def holds(self) -> bool:
        return self.meet_walrasian and self.join_walrasian


def lattice_check(inst: Instance, p: PriceVector, q: PriceVector) -> LatticeCheck:
    for x in (p, q):
        if is_walrasian(inst, x) is None:
            raise PreconditionError(f"{list(x)} is not a Walrasian price vector")
    low, high = meet(p, q), join(p, q)
    return LatticeCheck(low, high, is_walrasian(inst, low) is not None, is_walrasian(inst, high) is not None)
