"""
Auction Module - Универсальные восходящий и нисходящий аукционы

Этот модуль содержит фреймворк excess / dearth demand:
- excess_demand_sets / dearth_demand_sets: системы множеств ED(p) и DD(p)
- minimal_minimizer / maximal_minimizer: классические шаги по L
- Policy: правила выбора множества (minimal-minimizer, lex-first, random, largest...)
- run_ascending / run_descending: движки с проверкой контракта на каждом раунде
- demonstrate_asc_necessity / demonstrate_desc_necessity: свидетели нижних оценок
- ed_reading_comparison: T ⊆ S против T ⊂ S в определениях ED/DD
"""

import enum
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import get_settings
from .demand import (
    classify_set,
    is_weakly_over_demanded,
    is_weakly_under_demanded,
    nontrivial_weakly_over_demanded,
    nontrivial_weakly_under_demanded,
    require_gross_substitute,
)
from .errors import ContractViolation, PreconditionError
from .instance import (
    Instance,
    ItemSet,
    PriceVector,
    all_sets,
    can_lower,
    format_set,
    is_subset,
    items_of,
    lower_prices,
    raise_prices,
    set_size,
    submasks,
    zero_price,
)
from .lyapunov import lyapunov_value

# -------------------- Logging Setup --------------------
logger = logging.getLogger("walras-auction")


# -------------------- Excess / dearth demand --------------------
def is_excess_demand(inst: Instance, p: PriceVector, s: ItemSet, proper: bool = False) -> bool:
    """S ∈ OD(p) and no nonempty T ⊆ S (T ⊂ S when proper) is in WUD(p + 1_S)."""
    if not classify_set(inst, p, s).od:
        return False
    raised = raise_prices(p, s)
    for t in submasks(s, nonempty=True):
        if proper and t == s:
            continue
        if is_weakly_under_demanded(inst, raised, t):
            return False
    return True


def is_dearth_demand(inst: Instance, p: PriceVector, s: ItemSet, proper: bool = False) -> bool:
    """S ∈ UD(p), p >= 1_S, and no nonempty T ⊆ S is in WOD(p - 1_S)."""
    if not can_lower(p, s) or not classify_set(inst, p, s).ud:
        return False
    lowered = lower_prices(p, s)
    for t in submasks(s, nonempty=True):
        if proper and t == s:
            continue
        if is_weakly_over_demanded(inst, lowered, t):
            return False
    return True


def excess_demand_sets(inst: Instance, p: PriceVector, proper: bool = False) -> List[ItemSet]:
    return [s for s in all_sets(inst.m, nonempty=True) if is_excess_demand(inst, p, s, proper)]


def dearth_demand_sets(inst: Instance, p: PriceVector, proper: bool = False) -> List[ItemSet]:
    return [s for s in all_sets(inst.m, nonempty=True) if is_dearth_demand(inst, p, s, proper)]


@dataclass(frozen=True)
class ReadingComparison:
    """Sets whose ED / DD membership changes between T ⊆ S and T ⊂ S."""

    price: PriceVector
    ed_disagreements: Tuple[ItemSet, ...]
    dd_disagreements: Tuple[ItemSet, ...]

    @property
    def agree(self) -> bool:
        return not self.ed_disagreements and not self.dd_disagreements

    def to_dict(self, labels: Optional[Sequence[str]] = None) -> Dict[str, object]:
        return {
            "price": list(self.price),
            "agree": self.agree,
            "ed_disagreements": [format_set(s, labels) for s in self.ed_disagreements],
            "dd_disagreements": [format_set(s, labels) for s in self.dd_disagreements],
        }


def ed_reading_comparison(inst: Instance, p: PriceVector) -> ReadingComparison:
    ed = tuple(
        s for s in all_sets(inst.m, nonempty=True)
        if is_excess_demand(inst, p, s) != is_excess_demand(inst, p, s, proper=True)
    )
    dd = tuple(
        s for s in all_sets(inst.m, nonempty=True)
        if is_dearth_demand(inst, p, s) != is_dearth_demand(inst, p, s, proper=True)
    )
    return ReadingComparison(tuple(p), ed, dd)


# -------------------- Minimal / maximal minimizers --------------------
@dataclass(frozen=True)
class MinimizerResult:
    set: ItemSet
    value: int
    unique: bool
    candidates: Tuple[ItemSet, ...]


def _extremal(argmins: List[ItemSet], minimal: bool) -> List[ItemSet]:
    if minimal:
        return [s for s in argmins if not any(t != s and is_subset(t, s) for t in argmins)]
    return [s for s in argmins if not any(t != s and is_subset(s, t) for t in argmins)]


def minimal_minimizer(inst: Instance, p: PriceVector) -> Optional[MinimizerResult]:
    """Inclusion-minimal argmin of L(p + 1_S), or None when L cannot decrease."""
    base = lyapunov_value(inst, p)
    values = {s: lyapunov_value(inst, raise_prices(p, s)) for s in all_sets(inst.m)}
    best = min(values.values())
    if best >= base:
        return None
    minimal = _extremal([s for s, val in values.items() if val == best], minimal=True)
    if len(minimal) > 1:
        logger.info(f"⚠️ [MINIMIZER] {len(minimal)} incomparable minimal minimizers at p={list(p)}")
    return MinimizerResult(minimal[0], best, len(minimal) == 1, tuple(minimal))


def maximal_minimizer(inst: Instance, p: PriceVector) -> Optional[MinimizerResult]:
    """Argmin of L(p - 1_S) over S with p >= 1_S, strict against every proper subset of S."""
    base = lyapunov_value(inst, p)
    values = {s: lyapunov_value(inst, lower_prices(p, s)) for s in all_sets(inst.m) if can_lower(p, s)}
    best = min(values.values())
    if best >= base:
        return None
    strict = _extremal([s for s, val in values.items() if val == best], minimal=True)
    if len(strict) > 1:
        logger.info(f"⚠️ [MINIMIZER] {len(strict)} incomparable maximal minimizers at p={list(p)}")
    return MinimizerResult(strict[0], best, len(strict) == 1, tuple(strict))


# -------------------- Policies --------------------
class Direction(str, enum.Enum):
    ASCENDING = "ascending"
    DESCENDING = "descending"


class PolicyKind(str, enum.Enum):
    MINIMAL_MINIMIZER = "minimal-minimizer"
    MAXIMAL_MINIMIZER = "maximal-minimizer"
    LEX_FIRST = "lex-first"
    RANDOM = "random"
    LARGEST = "largest-cardinality"
    # Намеренно плохие правила для режима --unchecked
    OVERDEMANDED = "overdemanded"
    UNDERDEMANDED = "underdemanded"


POLICY_ALIASES = {"largest": PolicyKind.LARGEST}

_DUALS = {
    PolicyKind.MINIMAL_MINIMIZER: PolicyKind.MAXIMAL_MINIMIZER,
    PolicyKind.MAXIMAL_MINIMIZER: PolicyKind.MINIMAL_MINIMIZER,
    PolicyKind.OVERDEMANDED: PolicyKind.UNDERDEMANDED,
    PolicyKind.UNDERDEMANDED: PolicyKind.OVERDEMANDED,
}

ASCENDING_POLICIES = (PolicyKind.MINIMAL_MINIMIZER, PolicyKind.LEX_FIRST, PolicyKind.RANDOM, PolicyKind.LARGEST)
DESCENDING_POLICIES = (PolicyKind.MAXIMAL_MINIMIZER, PolicyKind.LEX_FIRST, PolicyKind.RANDOM, PolicyKind.LARGEST)


@dataclass(frozen=True)
class Policy:
    """Selection rule over the candidate collection ED(p) or DD(p)."""

    kind: PolicyKind
    seed: Optional[int] = None

    @classmethod
    def parse(cls, name: str, seed: Optional[int] = None) -> "Policy":
        kind = POLICY_ALIASES.get(name) or PolicyKind(name)
        if kind is PolicyKind.RANDOM and seed is None:
            seed = 0
        return cls(kind, seed)

    def for_direction(self, direction: Direction) -> "Policy":
        """Map a policy to the kind that fits the direction (minimal <-> maximal minimizer)."""
        wants_ascending = direction is Direction.ASCENDING
        ascending_kinds = (PolicyKind.MINIMAL_MINIMIZER, PolicyKind.OVERDEMANDED)
        descending_kinds = (PolicyKind.MAXIMAL_MINIMIZER, PolicyKind.UNDERDEMANDED)
        if (wants_ascending and self.kind in descending_kinds) or (not wants_ascending and self.kind in ascending_kinds):
            return Policy(_DUALS[self.kind], self.seed)
        return self

    @property
    def name(self) -> str:
        return self.kind.value

    def select(
        self,
        inst: Instance,
        p: PriceVector,
        candidates: Sequence[ItemSet],
        direction: Direction,
        rng: np.random.Generator,
    ) -> Optional[ItemSet]:
        kind = self.kind
        if kind is PolicyKind.LEX_FIRST:
            return candidates[0]
        if kind is PolicyKind.LARGEST:
            return max(candidates, key=lambda s: (set_size(s), -s))
        if kind is PolicyKind.RANDOM:
            return candidates[int(rng.integers(len(candidates)))]
        if kind is PolicyKind.MINIMAL_MINIMIZER:
            result = minimal_minimizer(inst, p)
            return result.set if result else None
        if kind is PolicyKind.MAXIMAL_MINIMIZER:
            result = maximal_minimizer(inst, p)
            return result.set if result else None
        if kind is PolicyKind.OVERDEMANDED:
            od = [s for s in all_sets(inst.m, nonempty=True) if classify_set(inst, p, s).od]
            return od[0] if od else None
        ud = [s for s in all_sets(inst.m, nonempty=True) if can_lower(p, s) and classify_set(inst, p, s).ud]
        return ud[0] if ud else None


# -------------------- Traces --------------------
@dataclass(frozen=True)
class AuctionRound:
    price: PriceVector
    chosen: ItemSet
    lyapunov_before: int
    lyapunov_after: int
    in_framework: bool = True
    culprit: Optional[ItemSet] = None

    def to_dict(self, labels: Sequence[str]) -> Dict[str, object]:
        record: Dict[str, object] = {
            "price": list(self.price),
            "set": [labels[j] for j in items_of(self.chosen)],
            "L_before": self.lyapunov_before,
            "L_after": self.lyapunov_after,
        }
        if not self.in_framework:
            record["in_framework"] = False
            record["culprit"] = [labels[j] for j in items_of(self.culprit)] if self.culprit else None
        return record


@dataclass(frozen=True)
class AuctionTrace:
    direction: Direction
    policy: Policy
    start_price: PriceVector
    final_price: PriceVector
    rounds: Tuple[AuctionRound, ...] = field(default_factory=tuple)
    unchecked: bool = False

    @property
    def clean(self) -> bool:
        return all(r.in_framework for r in self.rounds)

    def prices(self) -> List[PriceVector]:
        """Every visited price, start and final included."""
        return [r.price for r in self.rounds] + [self.final_price]

    def to_dict(self, labels: Sequence[str]) -> Dict[str, object]:
        return {
            "direction": self.direction.value,
            "policy": self.policy.name,
            "seed": self.policy.seed,
            "unchecked": self.unchecked,
            "start_price": list(self.start_price),
            "rounds": [r.to_dict(labels) for r in self.rounds],
            "final_price": list(self.final_price),
        }


# -------------------- Engines --------------------
def _first_weak(inst: Instance, p: PriceVector, under: bool) -> Optional[ItemSet]:
    weak = nontrivial_weakly_under_demanded(inst, p) if under else nontrivial_weakly_over_demanded(inst, p)
    return weak[0] if weak else None


def _run(
    inst: Instance,
    policy: Policy,
    direction: Direction,
    unchecked: bool,
    check_cap: Optional[int],
    max_rounds: Optional[int],
) -> AuctionTrace:
    if not unchecked:
        require_gross_substitute(inst, check_cap)
    ascending = direction is Direction.ASCENDING
    policy = policy.for_direction(direction)
    max_rounds = max_rounds or get_settings().max_rounds
    rng = np.random.default_rng(policy.seed if policy.seed is not None else 0)

    start = zero_price(inst.m) if ascending else (inst.vmax,) * inst.m
    p = start
    rounds: List[AuctionRound] = []
    logger.info(f"🔨 [AUCTION START] {direction.value} policy={policy.name} seed={policy.seed} p={list(p)}")

    while True:
        candidates = excess_demand_sets(inst, p) if ascending else dearth_demand_sets(inst, p)
        if not candidates:
            break
        if len(rounds) >= max_rounds:
            raise ContractViolation(f"round cap {max_rounds} reached", len(rounds), p, 0)

        chosen = policy.select(inst, p, candidates, direction, rng)
        in_framework = chosen is not None and chosen in candidates
        if not in_framework:
            family = "ED" if ascending else "DD"
            message = (
                f"policy {policy.name} selected {format_set(chosen, inst.labels) if chosen is not None else 'nothing'} "
                f"outside {family}({list(p)}) in round {len(rounds)}"
            )
            if chosen is None or not unchecked:
                logger.error(f"❌ [CONTRACT VIOLATION] {message}")
                raise ContractViolation(message, len(rounds), p, chosen or 0)
            logger.warning(f"⚠️ [UNCHECKED] {message}")

        moved = raise_prices(p, chosen) if ascending else lower_prices(p, chosen)
        culprit = None if in_framework else _first_weak(inst, moved, under=ascending)
        record = AuctionRound(p, chosen, lyapunov_value(inst, p), lyapunov_value(inst, moved), in_framework, culprit)
        logger.debug(
            f"[AUCTION ROUND] {len(rounds)}: {list(p)} -{inst.fmt(chosen)}-> {list(moved)} "
            f"L {record.lyapunov_before} -> {record.lyapunov_after}"
        )
        rounds.append(record)
        p = moved

    logger.info(f"🏁 [AUCTION END] {direction.value} final={list(p)} after {len(rounds)} round(s)")
    return AuctionTrace(direction, policy, start, p, tuple(rounds), unchecked)


def run_ascending(
    inst: Instance,
    policy: Policy,
    unchecked: bool = False,
    check_cap: Optional[int] = None,
    max_rounds: Optional[int] = None,
) -> AuctionTrace:
    """From 0^m raise 1_S for S = policy(ED(p)) until ED(p) is empty."""
    return _run(inst, policy, Direction.ASCENDING, unchecked, check_cap, max_rounds)


def run_descending(
    inst: Instance,
    policy: Policy,
    unchecked: bool = False,
    check_cap: Optional[int] = None,
    max_rounds: Optional[int] = None,
) -> AuctionTrace:
    """From (Vmax, ..., Vmax) lower 1_S for S = policy(DD(p)) until DD(p) is empty."""
    return _run(inst, policy, Direction.DESCENDING, unchecked, check_cap, max_rounds)


# -------------------- Necessity --------------------
@dataclass(frozen=True)
class LowerBoundWitness:
    """Moving S outside ED (DD) creates a nonempty weakly under (over) demanded culprit."""

    price: PriceVector
    set: ItemSet
    moved: PriceVector
    culprit: Optional[ItemSet]
    direction: Direction

    @property
    def found(self) -> bool:
        return self.culprit is not None

    def to_dict(self, labels: Optional[Sequence[str]] = None) -> Dict[str, object]:
        return {
            "direction": self.direction.value,
            "price": list(self.price),
            "set": format_set(self.set, labels),
            "moved": list(self.moved),
            "culprit": format_set(self.culprit, labels) if self.culprit is not None else None,
        }


def demonstrate_asc_necessity(inst: Instance, p: PriceVector, s: ItemSet) -> LowerBoundWitness:
    """Smallest nonempty T ∈ WUD(p + 1_S) for nonempty S ∉ ED(p)."""
    if s == 0:
        raise PreconditionError("S must be nonempty")
    if is_excess_demand(inst, p, s):
        raise PreconditionError(f"{inst.fmt(s)} is in ED({list(p)})")
    moved = raise_prices(p, s)
    return LowerBoundWitness(tuple(p), s, moved, _first_weak(inst, moved, under=True), Direction.ASCENDING)


def demonstrate_desc_necessity(inst: Instance, p: PriceVector, s: ItemSet) -> LowerBoundWitness:
    """Smallest nonempty T ∈ WOD(p - 1_S) for nonempty S ∉ DD(p), p >= 1_S."""
    if s == 0:
        raise PreconditionError("S must be nonempty")
    moved = lower_prices(p, s)
    if is_dearth_demand(inst, p, s):
        raise PreconditionError(f"{inst.fmt(s)} is in DD({list(p)})")
    return LowerBoundWitness(tuple(p), s, moved, _first_weak(inst, moved, under=False), Direction.DESCENDING)
