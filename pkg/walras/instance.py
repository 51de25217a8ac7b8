"""
Instance Module - Предметы, цены, оценки и аукционы

Этот модуль содержит базовые типы и их построение:
- ItemSet / PriceVector: битовая маска подмножества предметов и вектор цен
- Valuation: таблица ценностей на всех 2^m подмножествах
- make_additive / make_unit_demand / make_table: конструкторы оценок
- Instance: m предметов и n участников
- validate: отчет о нормализации, монотонности и границе сетки B
- parse_instance / serialize_instance: JSON документ аукциона
"""

import enum
import itertools
import logging
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Annotated, Dict, Iterable, Iterator, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
import orjson
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .errors import CapExceededError, InstanceError, MonotonicityError, PreconditionError

# -------------------- Logging Setup --------------------
logger = logging.getLogger("walras-instance")

# -------------------- Caps --------------------
MAX_ITEMS = 16
MAX_BIDDERS = 16

ItemSet = int
PriceVector = Tuple[int, ...]


# -------------------- Item sets --------------------
def full_set(m: int) -> ItemSet:
    return (1 << m) - 1


def set_size(s: ItemSet) -> int:
    return s.bit_count()


def items_of(s: ItemSet) -> Tuple[int, ...]:
    """Item indices contained in the mask, ascending."""
    return tuple(j for j in range(s.bit_length()) if s >> j & 1)


def set_of(items: Iterable[int]) -> ItemSet:
    mask = 0
    for j in items:
        mask |= 1 << j
    return mask


def is_subset(s: ItemSet, t: ItemSet) -> bool:
    return s & ~t == 0


def submasks(s: ItemSet, nonempty: bool = False) -> Iterator[ItemSet]:
    """All subsets of s in ascending bitmask order."""
    sub = 0
    if not nonempty:
        yield 0
    while True:
        sub = (sub - s) & s
        if sub == 0:
            return
        yield sub


def all_sets(m: int, nonempty: bool = False) -> range:
    return range(1 if nonempty else 0, 1 << m)


def default_item_label(j: int) -> str:
    return chr(ord("a") + j)


def format_set(s: ItemSet, labels: Optional[Sequence[str]] = None) -> str:
    names = [labels[j] if labels else default_item_label(j) for j in items_of(s)]
    return "{" + ",".join(names) + "}"


def parse_set(text: str, m: int, labels: Optional[Sequence[str]] = None) -> ItemSet:
    """Parse "a,b" (labels) or "0,1" (indices); "" or "{}" is the empty set."""
    text = text.strip().strip("{}").strip()
    if not text:
        return 0
    names = list(labels) if labels else [default_item_label(j) for j in range(m)]
    mask = 0
    for token in (t.strip() for t in text.split(",")):
        if token in names:
            j = names.index(token)
        elif token.isdigit():
            j = int(token)
        else:
            raise InstanceError(f"unknown item '{token}'")
        if not 0 <= j < m:
            raise InstanceError(f"item index {j} outside 0..{m - 1}")
        mask |= 1 << j
    return mask


# -------------------- Price vectors --------------------
def zero_price(m: int) -> PriceVector:
    return (0,) * m


def raise_prices(p: PriceVector, s: ItemSet) -> PriceVector:
    """p + 1_S."""
    return tuple(x + (s >> j & 1) for j, x in enumerate(p))


def can_lower(p: PriceVector, s: ItemSet) -> bool:
    return all(x >= 1 for j, x in enumerate(p) if s >> j & 1)


def lower_prices(p: PriceVector, s: ItemSet) -> PriceVector:
    """p - 1_S; requires p_j >= 1 on S."""
    if not can_lower(p, s):
        raise PreconditionError(f"cannot lower {list(p)} on {format_set(s)}: a price would turn negative")
    return tuple(x - (s >> j & 1) for j, x in enumerate(p))


def meet(p: PriceVector, q: PriceVector) -> PriceVector:
    return tuple(min(a, b) for a, b in zip(p, q))


def join(p: PriceVector, q: PriceVector) -> PriceVector:
    return tuple(max(a, b) for a, b in zip(p, q))


def dominates(p: PriceVector, q: PriceVector) -> bool:
    """p >= q coordinate-wise."""
    return all(a >= b for a, b in zip(p, q))


def price_grid(m: int, bound: int) -> Iterator[PriceVector]:
    """[0, bound]^m in lexicographic order."""
    return itertools.product(range(bound + 1), repeat=m)


def parse_price(text: str, m: int) -> PriceVector:
    try:
        price = tuple(int(x) for x in text.replace(" ", "").strip("[]()").split(",") if x != "")
    except ValueError as e:
        raise InstanceError(f"price '{text}' is not a list of integers") from e
    if len(price) != m:
        raise InstanceError(f"price has {len(price)} entries, instance has {m} items")
    if any(x < 0 for x in price):
        raise InstanceError("prices must be natural numbers")
    return price


# -------------------- Valuations --------------------
class ValuationKind(str, enum.Enum):
    TABLE = "table"
    ADDITIVE = "additive"
    UNIT_DEMAND = "unit_demand"


@dataclass(frozen=True)
class Valuation:
    """Value of every bundle, values[S] for the bitmask S."""

    m: int
    values: Tuple[int, ...]
    kind: ValuationKind = ValuationKind.TABLE

    def __post_init__(self):
        if len(self.values) != 1 << self.m:
            raise InstanceError(f"table has {len(self.values)} entries, expected 2^{self.m}")

    def __hash__(self) -> int:
        return self._hash

    @cached_property
    def _hash(self) -> int:
        return hash((self.m, self.values, self.kind))

    @cached_property
    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.int64)

    def value(self, s: ItemSet) -> int:
        return self.values[s]

    @property
    def grand_value(self) -> int:
        """v(Ω)."""
        return self.values[-1]

    @property
    def item_values(self) -> Tuple[int, ...]:
        return tuple(self.values[1 << j] for j in range(self.m))

    def marginal(self, s: ItemSet, j: int) -> int:
        return self.values[s | 1 << j] - self.values[s]

    @property
    def is_normalized(self) -> bool:
        return self.values[0] == 0

    def monotonicity_witness(self) -> Optional[Tuple[ItemSet, ItemSet]]:
        """First (S, S ∪ {j}) with v(S) > v(S ∪ {j}); single-item steps suffice."""
        for s in range(1 << self.m):
            for j in range(self.m):
                if not s >> j & 1 and self.marginal(s, j) < 0:
                    return s, s | 1 << j
        return None

    @property
    def is_monotone(self) -> bool:
        return self.monotonicity_witness() is None

    def to_document(self) -> Dict[str, object]:
        if self.kind is ValuationKind.TABLE:
            return {"kind": self.kind.value, "values": list(self.values)}
        return {"kind": self.kind.value, "values": list(self.item_values)}


def _check_item_values(item_values: Sequence[int], m: Optional[int]) -> Tuple[int, ...]:
    values = tuple(item_values)
    if m is not None and len(values) != m:
        raise InstanceError(f"expected {m} item values, got {len(values)}")
    if not 1 <= len(values) <= MAX_ITEMS:
        raise CapExceededError(f"item count {len(values)} outside 1..{MAX_ITEMS}")
    if any(isinstance(x, bool) or not isinstance(x, (int, np.integer)) or x < 0 for x in values):
        raise InstanceError("item values must be natural numbers")
    return tuple(int(x) for x in values)


def make_additive(item_values: Sequence[int], m: Optional[int] = None) -> Valuation:
    """v(S) = sum of the item values in S."""
    values = _check_item_values(item_values, m)
    table = [0] * (1 << len(values))
    for s in range(1, len(table)):
        low = (s & -s).bit_length() - 1
        table[s] = table[s & (s - 1)] + values[low]
    return Valuation(len(values), tuple(table), ValuationKind.ADDITIVE)


def make_unit_demand(item_values: Sequence[int], m: Optional[int] = None) -> Valuation:
    """v(S) = max of the item values in S, v(∅) = 0."""
    values = _check_item_values(item_values, m)
    table = [0] * (1 << len(values))
    for s in range(1, len(table)):
        low = (s & -s).bit_length() - 1
        table[s] = max(table[s & (s - 1)], values[low])
    return Valuation(len(values), tuple(table), ValuationKind.UNIT_DEMAND)


def make_table(values: Sequence[int], strict: bool = True) -> Valuation:
    """Table valuation indexed by bitmask; strict mode rejects non-normalized or non-monotone tables."""
    size = len(values)
    if size < 2 or size & (size - 1):
        raise InstanceError(f"table length {size} is not a power of two >= 2")
    m = size.bit_length() - 1
    if m > MAX_ITEMS:
        raise CapExceededError(f"item count {m} exceeds cap {MAX_ITEMS}")
    if any(isinstance(x, bool) or not isinstance(x, (int, np.integer)) or x < 0 for x in values):
        raise InstanceError("table values must be natural numbers")
    valuation = Valuation(m, tuple(int(x) for x in values), ValuationKind.TABLE)
    if strict:
        if not valuation.is_normalized:
            raise InstanceError(f"v(∅) = {valuation.values[0]}, valuations must be normalized")
        witness = valuation.monotonicity_witness()
        if witness is not None:
            raise MonotonicityError(*witness)
    return valuation


# -------------------- Instances --------------------
@dataclass(frozen=True)
class Instance:
    """An auction: m items and n bidder valuations on the same items."""

    m: int
    bidders: Tuple[Valuation, ...]
    item_labels: Optional[Tuple[str, ...]] = None
    bidder_labels: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        if not 1 <= self.m <= MAX_ITEMS:
            raise CapExceededError(f"item count {self.m} outside 1..{MAX_ITEMS}")
        if not 1 <= len(self.bidders) <= MAX_BIDDERS:
            raise CapExceededError(f"bidder count {len(self.bidders)} outside 1..{MAX_BIDDERS}")
        for i, v in enumerate(self.bidders):
            if v.m != self.m:
                raise InstanceError(f"bidder {i} is defined on {v.m} items, instance has {self.m}")
        if self.item_labels is not None and len(self.item_labels) != self.m:
            raise InstanceError("one item label per item is required")
        if self.bidder_labels is not None and len(self.bidder_labels) != len(self.bidders):
            raise InstanceError("one bidder label per bidder is required")

    def __hash__(self) -> int:
        return self._hash

    @cached_property
    def _hash(self) -> int:
        return hash((self.m, self.bidders, self.item_labels, self.bidder_labels))

    @property
    def n(self) -> int:
        return len(self.bidders)

    @property
    def full(self) -> ItemSet:
        return full_set(self.m)

    @property
    def vmax(self) -> int:
        return max(v.grand_value for v in self.bidders)

    @property
    def grid_bound(self) -> int:
        """B = Vmax + 1; the scanned grid is [0, B]^m."""
        return self.vmax + 1

    def grid(self) -> Iterator[PriceVector]:
        return price_grid(self.m, self.grid_bound)

    @property
    def labels(self) -> Tuple[str, ...]:
        return self.item_labels or tuple(default_item_label(j) for j in range(self.m))

    def fmt(self, s: ItemSet) -> str:
        return format_set(s, self.labels)

    def parse_set(self, text: str) -> ItemSet:
        return parse_set(text, self.m, self.labels)


def make_instance(bidders: Sequence[Valuation], labels: Optional[Sequence[str]] = None) -> Instance:
    if not bidders:
        raise CapExceededError("an instance needs at least one bidder")
    return Instance(bidders[0].m, tuple(bidders), tuple(labels) if labels else None)


# -------------------- Validation --------------------
@dataclass(frozen=True)
class BidderViolation:
    bidder: int
    kind: Literal["normalization", "monotonicity"]
    detail: str
    witness: Optional[Tuple[ItemSet, ItemSet]] = None


@dataclass(frozen=True)
class ValidationReport:
    violations: Tuple[BidderViolation, ...]
    vmax: int
    grid_bound: int

    @property
    def well_formed(self) -> bool:
        return not self.violations

    def to_dict(self) -> Dict[str, object]:
        return {
            "well_formed": self.well_formed,
            "vmax": self.vmax,
            "grid_bound": self.grid_bound,
            "violations": [
                {
                    "bidder": v.bidder,
                    "kind": v.kind,
                    "detail": v.detail,
                    "witness": list(v.witness) if v.witness else None,
                }
                for v in self.violations
            ],
        }


def validate(inst: Instance) -> ValidationReport:
    """Per-bidder normalization and monotonicity report plus Vmax and B."""
    violations: List[BidderViolation] = []
    for i, v in enumerate(inst.bidders):
        if not v.is_normalized:
            violations.append(BidderViolation(i, "normalization", f"v(∅) = {v.values[0]} != 0"))
        witness = v.monotonicity_witness()
        if witness is not None:
            s, t = witness
            violations.append(BidderViolation(
                i, "monotonicity",
                f"v({inst.fmt(s)}) = {v.values[s]} > v({inst.fmt(t)}) = {v.values[t]}",
                witness,
            ))
    report = ValidationReport(tuple(violations), inst.vmax, inst.grid_bound)
    logger.debug(f"[VALIDATE] well_formed={report.well_formed} vmax={report.vmax}")
    return report


def require_well_formed(inst: Instance) -> Instance:
    report = validate(inst)
    if not report.well_formed:
        first = report.violations[0]
        if first.kind == "monotonicity" and first.witness:
            raise MonotonicityError(*first.witness, message=f"bidder {first.bidder}: {first.detail}")
        raise InstanceError(f"bidder {first.bidder}: {first.detail}")
    return inst


# -------------------- Instance documents --------------------
Natural = Annotated[int, Field(strict=True, ge=0)]


class BidderDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["additive", "unit_demand", "table"]
    values: List[Natural]


class LabelsDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    items: Optional[List[str]] = None
    bidders: Optional[List[str]] = None


class InstanceDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    m: Annotated[int, Field(strict=True)]
    bidders: List[BidderDocument]
    labels: Optional[LabelsDocument] = None


def _bidder_from_document(doc: BidderDocument, m: int, strict: bool) -> Valuation:
    if doc.kind == "additive":
        return make_additive(doc.values, m)
    if doc.kind == "unit_demand":
        return make_unit_demand(doc.values, m)
    if len(doc.values) != 1 << m:
        raise InstanceError(f"table bidder needs 2^{m} = {1 << m} values, got {len(doc.values)}")
    return make_table(doc.values, strict=strict)


def instance_from_document(doc: InstanceDocument, strict: bool = True) -> Instance:
    if not 1 <= doc.m <= MAX_ITEMS:
        raise CapExceededError(f"m = {doc.m} outside 1..{MAX_ITEMS}")
    if not 1 <= len(doc.bidders) <= MAX_BIDDERS:
        raise CapExceededError(f"n = {len(doc.bidders)} outside 1..{MAX_BIDDERS}")
    bidders = tuple(_bidder_from_document(b, doc.m, strict) for b in doc.bidders)
    labels = doc.labels or LabelsDocument()
    return Instance(
        doc.m,
        bidders,
        tuple(labels.items) if labels.items is not None else None,
        tuple(labels.bidders) if labels.bidders is not None else None,
    )


def parse_instance(text: Union[str, bytes], strict: bool = True) -> Instance:
    """Parse an instance JSON document; strict=False keeps non-monotone tables for reporting."""
    try:
        raw = orjson.loads(text)
    except orjson.JSONDecodeError as e:
        raise InstanceError(f"malformed instance document: {e}") from e
    if isinstance(raw, dict) and isinstance(raw.get("m"), int) and not 1 <= raw["m"] <= MAX_ITEMS:
        raise CapExceededError(f"m = {raw['m']} outside 1..{MAX_ITEMS}")
    try:
        doc = InstanceDocument.model_validate(raw)
    except ValidationError as e:
        raise InstanceError(f"invalid instance document: {e.errors()[0]['msg']} at {e.errors()[0]['loc']}") from e
    return instance_from_document(doc, strict=strict)


def instance_to_document(inst: Instance) -> Dict[str, object]:
    doc: Dict[str, object] = {"m": inst.m, "bidders": [v.to_document() for v in inst.bidders]}
    if inst.item_labels is not None or inst.bidder_labels is not None:
        labels: Dict[str, object] = {}
        if inst.item_labels is not None:
            labels["items"] = list(inst.item_labels)
        if inst.bidder_labels is not None:
            labels["bidders"] = list(inst.bidder_labels)
        doc["labels"] = labels
    return doc


def serialize_instance(inst: Instance) -> str:
    return orjson.dumps(instance_to_document(inst), option=orjson.OPT_INDENT_2).decode("utf-8")


def load_instance(path: Union[str, Path], strict: bool = True) -> Instance:
    path = Path(path)
    logger.info(f"📄 [LOAD] Reading instance from {path}")
    return parse_instance(path.read_bytes(), strict=strict)


def save_instance(inst: Instance, path: Union[str, Path]) -> None:
    Path(path).write_text(serialize_instance(inst) + "\n", encoding="utf-8")


# -------------------- Canonical fixtures --------------------
def fixture_e1() -> Instance:
    """Three identical additive bidders, two items each worth 1."""
    return make_instance([make_additive([1, 1]) for _ in range(3)])


def fixture_u1() -> Instance:
    """Two identical unit-demand bidders with item values (2, 1)."""
    return make_instance([make_unit_demand([2, 1]) for _ in range(2)])


def fixture_x1() -> Instance:
    """Single bidder (0,1,1,3): monotone, complementary, not gross substitute."""
    return make_instance([make_table([0, 1, 1, 3])])


def fixture_z0() -> Instance:
    """Single all-zero bidder on two items."""
    return make_instance([make_unit_demand([0, 0])])


FIXTURES = {
    "E1": fixture_e1,
    "U1": fixture_u1,
    "X1": fixture_x1,
    "Z0": fixture_z0,
}
