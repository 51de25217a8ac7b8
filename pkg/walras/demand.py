"""
Demand Module - Оракулы спроса и классификация множеств

Этот модуль содержит все операции над спросом участников:
- utility / demand_sets: полезность и все максимизирующие наборы D(p)
- requirement / redundant: l_p(S) и h_p(S), суммы по участникам l^p, h^p
- classify_set / enumerate_class: OD, WOD, UD, WUD
- is_gross_substitute: проверка условия 2 (или 1) эквивалентности GS на сетке
- is_gross_substitute_by_definition / is_submodular: независимые проверки
- single_improvement / non_gs_configuration: свойства из приложения
"""

import enum
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .errors import CapExceededError, PreconditionError, PremiseError
from .instance import (
    Instance,
    ItemSet,
    PriceVector,
    Valuation,
    ValuationKind,
    all_sets,
    can_lower,
    format_set,
    is_subset,
    items_of,
    lower_prices,
    price_grid,
    raise_prices,
    set_size,
)

# -------------------- Logging Setup --------------------
logger = logging.getLogger("walras-demand")

DEFAULT_GS_CHECK_CAP = 5
GRID_CHUNK = 4096


# -------------------- Bundle tables --------------------
@lru_cache(maxsize=None)
def incidence(m: int) -> np.ndarray:
    """(2^m, m) 0/1 matrix, row S marks the items of S."""
    sets = np.arange(1 << m, dtype=np.int64)
    return (sets[:, None] >> np.arange(m, dtype=np.int64)[None, :]) & 1


@lru_cache(maxsize=None)
def overlap_table(m: int) -> np.ndarray:
    """(2^m, 2^m) matrix of |S ∩ D|."""
    inc = incidence(m)
    return inc @ inc.T


def utility_matrix(v: Valuation, prices: np.ndarray) -> np.ndarray:
    """u_p(S) = v(S) - p(S) for every row p of prices and every bundle S."""
    prices = np.atleast_2d(np.asarray(prices, dtype=np.int64))
    return v.array[None, :] - prices @ incidence(v.m).T


# -------------------- Demand --------------------
@dataclass(frozen=True)
class DemandResult:
    """u(p) and every maximizer D(p), ascending bitmask order."""

    max_utility: int
    sets: Tuple[ItemSet, ...]

    def __contains__(self, s: ItemSet) -> bool:
        return s in self.sets

    def to_dict(self, labels: Optional[Sequence[str]] = None) -> Dict[str, object]:
        return {
            "max_utility": self.max_utility,
            "sets": [format_set(s, labels) for s in self.sets],
            "masks": list(self.sets),
        }


def utility(v: Valuation, p: PriceVector, s: ItemSet) -> int:
    """v(S) - sum of p_j over S; may be negative."""
    return v.values[s] - sum(x for j, x in enumerate(p) if s >> j & 1)


def _compute_demand(v: Valuation, p: PriceVector) -> DemandResult:
    util = utility_matrix(v, np.asarray(p, dtype=np.int64))[0]
    best = int(util.max())
    return DemandResult(best, tuple(int(s) for s in np.flatnonzero(util == best)))


# Мемоизация по (оценка, цена) внутри процесса; результат не зависит от кэша
_demand_cached = lru_cache(maxsize=65536)(_compute_demand)


def configure_demand_cache(size: int) -> None:
    global _demand_cached
    _demand_cached = lru_cache(maxsize=size)(_compute_demand)


def demand_sets(v: Valuation, p: PriceVector) -> DemandResult:
    """Exhaustive argmax of u_p over all 2^m bundles."""
    return _demand_cached(v, tuple(int(x) for x in p))


def max_utility(v: Valuation, p: PriceVector) -> int:
    return demand_sets(v, p).max_utility


# -------------------- Requirement / redundant --------------------
def requirement(v: Valuation, p: PriceVector, s: ItemSet) -> int:
    """l_p(S): least overlap of S with a demanded bundle."""
    return min(set_size(s & d) for d in demand_sets(v, p).sets)


def redundant(v: Valuation, p: PriceVector, s: ItemSet) -> int:
    """h_p(S): largest overlap of S with a demanded bundle."""
    return max(set_size(s & d) for d in demand_sets(v, p).sets)


def auction_requirement(inst: Instance, p: PriceVector, s: ItemSet) -> int:
    return sum(requirement(v, p, s) for v in inst.bidders)


def auction_redundant(inst: Instance, p: PriceVector, s: ItemSet) -> int:
    return sum(redundant(v, p, s) for v in inst.bidders)


# -------------------- Over / under demand --------------------
class DemandClass(str, enum.Enum):
    OD = "OD"
    WOD = "WOD"
    UD = "UD"
    WUD = "WUD"


@dataclass(frozen=True)
class SetClassification:
    set: ItemSet
    requirement: int
    redundant: int
    size: int

    @property
    def od(self) -> bool:
        return self.requirement > self.size

    @property
    def wod(self) -> bool:
        return self.requirement >= self.size

    @property
    def ud(self) -> bool:
        return self.redundant < self.size

    @property
    def wud(self) -> bool:
        return self.redundant <= self.size

    def has(self, cls: DemandClass) -> bool:
        return {
            DemandClass.OD: self.od,
            DemandClass.WOD: self.wod,
            DemandClass.UD: self.ud,
            DemandClass.WUD: self.wud,
        }[DemandClass(cls)]

    @property
    def flags(self) -> FrozenSet[DemandClass]:
        return frozenset(c for c in DemandClass if self.has(c))

    def to_dict(self, labels: Optional[Sequence[str]] = None) -> Dict[str, object]:
        return {
            "set": format_set(self.set, labels),
            "requirement": self.requirement,
            "redundant": self.redundant,
            "size": self.size,
            "flags": sorted(c.value for c in self.flags),
        }


def classify_set(inst: Instance, p: PriceVector, s: ItemSet) -> SetClassification:
    return SetClassification(s, auction_requirement(inst, p, s), auction_redundant(inst, p, s), set_size(s))


def enumerate_class(inst: Instance, p: PriceVector, cls: DemandClass) -> List[ItemSet]:
    """Every S ⊆ Ω carrying the flag, ascending bitmask order."""
    return [s for s in all_sets(inst.m) if classify_set(inst, p, s).has(cls)]


def is_weakly_under_demanded(inst: Instance, p: PriceVector, s: ItemSet) -> bool:
    return auction_redundant(inst, p, s) <= set_size(s)


def is_weakly_over_demanded(inst: Instance, p: PriceVector, s: ItemSet) -> bool:
    return auction_requirement(inst, p, s) >= set_size(s)


def nontrivial_weakly_under_demanded(inst: Instance, p: PriceVector) -> List[ItemSet]:
    """Nonempty T ∈ WUD(p) with p >= 1_T; only those admit the move p - 1_T on natural prices."""
    return [t for t in all_sets(inst.m, nonempty=True) if can_lower(p, t) and is_weakly_under_demanded(inst, p, t)]


def nontrivial_weakly_over_demanded(inst: Instance, p: PriceVector) -> List[ItemSet]:
    return [t for t in all_sets(inst.m, nonempty=True) if is_weakly_over_demanded(inst, p, t)]


# -------------------- Gross substitutes --------------------
@dataclass(frozen=True)
class GSWitness:
    """A grid point where the condition-2 (or condition-1) equality fails."""

    price: PriceVector
    set: ItemSet
    lhs: int
    rhs: int
    condition: int = 2

    def to_dict(self, labels: Optional[Sequence[str]] = None) -> Dict[str, object]:
        return {
            "condition": self.condition,
            "price": list(self.price),
            "set": format_set(self.set, labels),
            "lhs": self.lhs,
            "rhs": self.rhs,
        }


@dataclass(frozen=True)
class GSCheck:
    witness: Optional[GSWitness]
    bound: int
    points: int

    @property
    def holds(self) -> bool:
        return self.witness is None

    def to_dict(self, labels: Optional[Sequence[str]] = None) -> Dict[str, object]:
        return {
            "gross_substitute": self.holds,
            "bound": self.bound,
            "points": self.points,
            "witness": self.witness.to_dict(labels) if self.witness else None,
        }


def _require_checkable(v: Valuation, check_cap: Optional[int]) -> int:
    if not v.is_normalized or not v.is_monotone:
        raise PreconditionError("gross substitute checks need a normalized monotone valuation")
    cap = DEFAULT_GS_CHECK_CAP if check_cap is None else check_cap
    if v.m > cap:
        raise CapExceededError(f"m = {v.m} exceeds the GS check cap {cap}")
    return v.grand_value + 1


def _grid_chunks(m: int, bound: int) -> Iterator[np.ndarray]:
    chunk: List[PriceVector] = []
    for p in price_grid(m, bound):
        chunk.append(p)
        if len(chunk) == GRID_CHUNK:
            yield np.asarray(chunk, dtype=np.int64)
            chunk = []
    if chunk:
        yield np.asarray(chunk, dtype=np.int64)


@lru_cache(maxsize=1024)
def _gs_check(v: Valuation, bound: int, condition: int) -> GSCheck:
    m = v.m
    inc = incidence(m)
    overlaps = overlap_table(m)
    points = 0
    for prices in _grid_chunks(m, bound):
        util = utility_matrix(v, prices)
        u = util.max(axis=1)
        demanded = util == u[:, None]
        violations = np.zeros((len(prices), 1 << m), dtype=bool)
        rhs_table = np.zeros((len(prices), 1 << m), dtype=np.int64)
        for s in range(1, 1 << m):
            overlap = overlaps[s][None, :]
            if condition == 2:
                # u(p) = u(p + 1_S) + l_p(S)
                low = np.where(demanded, overlap, m + 1).min(axis=1)
                rhs = (util - overlap).max(axis=1) + low
                violations[:, s] = u != rhs
            else:
                # u(p) = u(p - 1_S) - h_p(S), только при p >= 1_S
                high = np.where(demanded, overlap, -1).max(axis=1)
                rhs = (util + overlap).max(axis=1) - high
                lowerable = (prices[:, inc[s] == 1] >= 1).all(axis=1)
                violations[:, s] = lowerable & (u != rhs)
            rhs_table[:, s] = rhs
        points += len(prices)
        rows = np.flatnonzero(violations.any(axis=1))
        if rows.size:
            row = int(rows[0])
            s = int(np.flatnonzero(violations[row])[0])
            witness = GSWitness(
                tuple(int(x) for x in prices[row]), s, int(u[row]), int(rhs_table[row, s]), condition
            )
            logger.info(f"❌ [GS CHECK] condition {condition} fails at p={list(witness.price)} S={format_set(s)}")
            return GSCheck(witness, bound, points)
    logger.debug(f"✅ [GS CHECK] condition {condition} holds on {points} grid points")
    return GSCheck(None, bound, points)


def is_gross_substitute(v: Valuation, check_cap: Optional[int] = None, condition: int = 2) -> GSCheck:
    """GS utility equality over every p in [0, v(Ω)+1]^m and nonempty S.

    Returns the lexicographically first (p, S) violation as the witness.
    """
    if condition not in (1, 2):
        raise PreconditionError("condition must be 1 or 2")
    bound = _require_checkable(v, check_cap)
    return _gs_check(v, bound, condition)


def dual_gs_check(v: Valuation, p: PriceVector, s: ItemSet) -> Tuple[int, int]:
    """Both sides of u(p) = u(p - 1_S) - h_p(S)."""
    lowered = lower_prices(p, s)
    return max_utility(v, p), max_utility(v, lowered) - redundant(v, p, s)


@dataclass(frozen=True)
class DifferenceBounds:
    raise_holds: bool
    lower_holds: Optional[bool]


def difference_bounds(v: Valuation, p: PriceVector, s: ItemSet) -> DifferenceBounds:
    """u(p+1_S) >= u(p) - l_p(S) and u(p-1_S) >= u(p) + h_p(S); hold for any valuation."""
    u = max_utility(v, p)
    up = max_utility(v, raise_prices(p, s)) >= u - requirement(v, p, s)
    down = None
    if can_lower(p, s):
        down = max_utility(v, lower_prices(p, s)) >= u + redundant(v, p, s)
    return DifferenceBounds(up, down)


def gs_premise(inst: Instance, check_cap: Optional[int] = None, trust_kinds: bool = False) -> List[GSCheck]:
    """One GS verdict per bidder; additive and unit-demand kinds may be trusted without a scan."""
    checks = []
    for v in inst.bidders:
        if trust_kinds and v.kind in (ValuationKind.ADDITIVE, ValuationKind.UNIT_DEMAND):
            checks.append(GSCheck(None, v.grand_value + 1, 0))
        else:
            checks.append(is_gross_substitute(v, check_cap))
    return checks


def require_gross_substitute(inst: Instance, check_cap: Optional[int] = None, trust_kinds: bool = False) -> None:
    for i, check in enumerate(gs_premise(inst, check_cap, trust_kinds)):
        if not check.holds:
            raise PremiseError(f"bidder {i} is not gross substitute", bidder=i, witness=check.witness)


# -------------------- Definition-level checks --------------------
@dataclass(frozen=True)
class DefinitionWitness:
    """S ∈ D(p), q >= p, and no S' ∈ D(q) keeps the items of S whose price stayed."""

    price: PriceVector
    raised: PriceVector
    set: ItemSet


def is_gross_substitute_by_definition(v: Valuation, check_cap: Optional[int] = None) -> Optional[DefinitionWitness]:
    """Kelso–Crawford definition on the bounded grid; None when it holds."""
    bound = _require_checkable(v, check_cap)
    grid = list(price_grid(v.m, bound))
    for p in grid:
        demanded = demand_sets(v, p).sets
        for q in grid:
            if any(b < a for a, b in zip(p, q)):
                continue
            kept = demand_sets(v, q).sets
            for s in demanded:
                unchanged = s & sum(1 << j for j in range(v.m) if p[j] == q[j])
                if not any(is_subset(unchanged, d) for d in kept):
                    return DefinitionWitness(p, q, s)
    return None


def is_submodular(v: Valuation) -> Optional[Tuple[ItemSet, ItemSet]]:
    """First pair with v(S) + v(T) < v(S ∪ T) + v(S ∩ T), or None."""
    values = v.values
    for s in all_sets(v.m):
        for t in range(s + 1, 1 << v.m):
            if values[s] + values[t] < values[s | t] + values[s & t]:
                return s, t
    return None


# -------------------- Single improvement --------------------
def single_improvement(v: Valuation, p: PriceVector, s: ItemSet) -> Optional[ItemSet]:
    """Smallest T with u_p(T) > u_p(S), |T \\ S| <= 1 and |S \\ T| <= 1."""
    demand = demand_sets(v, p)
    if s in demand:
        raise PreconditionError(f"{format_set(s)} is demanded at {list(p)}")
    base = utility(v, p, s)
    for t in all_sets(v.m):
        if set_size(t & ~s) <= 1 and set_size(s & ~t) <= 1 and utility(v, p, t) > base:
            return t
    return None


# -------------------- Non gross substitute configurations --------------------
@dataclass(frozen=True)
class NonGSConfiguration:
    """D(q) ⊇ {A, A ∪ {j1,j2}} (form 1) or {A ∪ {j3}, A ∪ {j1,j2}} (form 2)."""

    price: PriceVector
    base: ItemSet
    pair: Tuple[int, int]
    third: Optional[int]
    demand: Tuple[ItemSet, ...]

    @property
    def form(self) -> int:
        return 1 if self.third is None else 2

    @property
    def collection(self) -> Tuple[ItemSet, ItemSet]:
        j1, j2 = self.pair
        first = self.base if self.third is None else self.base | 1 << self.third
        return first, self.base | 1 << j1 | 1 << j2

    @property
    def exact(self) -> bool:
        return set(self.demand) == set(self.collection)

    def to_dict(self, labels: Optional[Sequence[str]] = None) -> Dict[str, object]:
        return {
            "price": list(self.price),
            "form": self.form,
            "A": format_set(self.base, labels),
            "pair": list(self.pair),
            "third": self.third,
            "demand": [format_set(d, labels) for d in self.demand],
            "exact": self.exact,
        }


@dataclass(frozen=True)
class NonGSSearch:
    exact: Optional[NonGSConfiguration]
    near_misses: Tuple[NonGSConfiguration, ...]

    @property
    def found(self) -> bool:
        return self.exact is not None


def _configurations(q: PriceVector, demand: Tuple[ItemSet, ...], m: int) -> Iterator[NonGSConfiguration]:
    present = set(demand)
    for top in demand:
        for j1 in items_of(top):
            for j2 in items_of(top):
                if j2 <= j1:
                    continue
                base = top & ~(1 << j1) & ~(1 << j2)
                if base in present:
                    yield NonGSConfiguration(q, base, (j1, j2), None, demand)
                for j3 in range(m):
                    if not top >> j3 & 1 and base | 1 << j3 in present:
                        yield NonGSConfiguration(q, base, (j1, j2), j3, demand)


def non_gs_configuration(v: Valuation, bound: Optional[int] = None, near_miss_limit: int = 10) -> NonGSSearch:
    """Scan q in [0, B]^m for a demand collection of either non-GS shape.

    Only exact collections count as found; supersets are kept as near misses.
    """
    if v.m < 2:
        raise PreconditionError("non gross substitute configurations need at least two items")
    if not v.is_monotone:
        raise PreconditionError("valuation must be monotone")
    bound = v.grand_value + 1 if bound is None else bound
    if v.m > DEFAULT_GS_CHECK_CAP and bound ** v.m > 10 ** 7:
        raise CapExceededError(f"grid [0,{bound}]^{v.m} is too large for a configuration scan")
    near: List[NonGSConfiguration] = []
    for q in price_grid(v.m, bound):
        for config in _configurations(q, demand_sets(v, q).sets, v.m):
            if config.exact:
                return NonGSSearch(config, tuple(near))
            if len(near) < near_miss_limit:
                near.append(config)
    return NonGSSearch(None, tuple(near))
