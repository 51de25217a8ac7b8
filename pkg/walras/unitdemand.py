"""
Unit Demand Module - Λ, Ξ и классические определения для unit-demand

- item_demand: спрос по отдельным предметам (+ outside option)
- lambda_set / xi_set: Λ_p(S) и Ξ_p(S)
- mt_over_demanded / mt_under_demanded: определения Mishra–Talman как напечатаны
- andersson_excess: excess demand по Andersson et al.
- compare_with_general: таблица против OD / UD / ED (только отчет)
"""

import csv
import io
import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Tuple

from .auction import is_excess_demand
from .demand import classify_set
from .errors import PreconditionError
from .instance import Instance, ItemSet, PriceVector, ValuationKind, all_sets, format_set, set_size, submasks

# -------------------- Logging Setup --------------------
logger = logging.getLogger("walras-unitdemand")


@dataclass(frozen=True)
class BidderItemDemand:
    demanded_items: ItemSet
    outside_option: bool


@dataclass(frozen=True)
class ItemDemand:
    per_bidder: Tuple[BidderItemDemand, ...]


def _require_unit_demand(inst: Instance) -> None:
    for i, v in enumerate(inst.bidders):
        if v.kind is not ValuationKind.UNIT_DEMAND:
            raise PreconditionError(f"bidder {i} is {v.kind.value}, unit-demand valuations are required")


def item_demand(inst: Instance, p: PriceVector) -> ItemDemand:
    """Utility-maximizing single items with nonnegative utility; outside option when the maximum is <= 0."""
    _require_unit_demand(inst)
    bidders = []
    for v in inst.bidders:
        utilities = [v.values[1 << j] - p[j] for j in range(inst.m)]
        best = max(utilities)
        demanded = sum(1 << j for j, u in enumerate(utilities) if u == best) if best >= 0 else 0
        bidders.append(BidderItemDemand(demanded, best <= 0))
    return ItemDemand(tuple(bidders))


def lambda_set(inst: Instance, p: PriceVector, s: ItemSet) -> FrozenSet[int]:
    """Bidders whose nonempty item demand lies inside S."""
    demand = item_demand(inst, p).per_bidder
    return frozenset(i for i, d in enumerate(demand) if d.demanded_items and d.demanded_items & ~s == 0)


def xi_set(inst: Instance, p: PriceVector, s: ItemSet) -> FrozenSet[int]:
    """Bidders demanding at least one item of S."""
    demand = item_demand(inst, p).per_bidder
    return frozenset(i for i, d in enumerate(demand) if d.demanded_items & s)


def mt_over_demanded(inst: Instance, p: PriceVector, s: ItemSet) -> bool:
    return len(lambda_set(inst, p, s)) >= set_size(s)


def mt_under_demanded(inst: Instance, p: PriceVector, s: ItemSet) -> bool:
    return len(xi_set(inst, p, s)) <= set_size(s)


def andersson_excess(inst: Instance, p: PriceVector, s: ItemSet) -> bool:
    """|Λ_p(S) ∩ Ξ_p(T)| > |T| for every nonempty T ⊆ S; false for S = ∅."""
    if s == 0:
        return False
    inside = lambda_set(inst, p, s)
    return all(len(inside & xi_set(inst, p, t)) > set_size(t) for t in submasks(s, nonempty=True))


# -------------------- Comparison --------------------
@dataclass(frozen=True)
class ComparisonRow:
    set: ItemSet
    mt_over: bool
    od: bool
    mt_under: bool
    ud: bool
    andersson: bool
    ed: bool

    @property
    def disagreements(self) -> List[str]:
        pairs = [("mt_over/OD", self.mt_over, self.od), ("mt_under/UD", self.mt_under, self.ud),
                 ("andersson/ED", self.andersson, self.ed)]
        return [name for name, left, right in pairs if left != right]


@dataclass(frozen=True)
class ComparisonReport:
    price: PriceVector
    rows: Tuple[ComparisonRow, ...]
    labels: Tuple[str, ...]

    @property
    def disagreement_count(self) -> Dict[str, int]:
        counts = {"mt_over/OD": 0, "mt_under/UD": 0, "andersson/ED": 0}
        for row in self.rows:
            for name in row.disagreements:
                counts[name] += 1
        return counts

    @property
    def notes(self) -> List[str]:
        return [
            "Mishra–Talman over-demand uses |Λ| >= |S| as printed; OD uses the strict l^p(S) > |S|.",
            "Agreement with OD/UD/ED is reported, not asserted.",
        ]

    def to_dict(self) -> Dict[str, object]:
        return {
            "price": list(self.price),
            "rows": [
                {
                    "set": format_set(r.set, self.labels),
                    "mt_over": r.mt_over,
                    "od": r.od,
                    "mt_under": r.mt_under,
                    "ud": r.ud,
                    "andersson": r.andersson,
                    "ed": r.ed,
                    "disagreements": r.disagreements,
                }
                for r in self.rows
            ],
            "disagreement_count": self.disagreement_count,
            "notes": self.notes,
        }

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer)
        writer.writerow(["set", "mt_over", "od", "mt_under", "ud", "andersson", "ed"])
        for r in self.rows:
            writer.writerow([format_set(r.set, self.labels), r.mt_over, r.od, r.mt_under, r.ud, r.andersson, r.ed])
        return buffer.getvalue()


def compare_with_general(inst: Instance, p: PriceVector) -> ComparisonReport:
    _require_unit_demand(inst)
    rows = []
    for s in all_sets(inst.m):
        c = classify_set(inst, p, s)
        rows.append(ComparisonRow(
            set=s,
            mt_over=mt_over_demanded(inst, p, s),
            od=c.od,
            mt_under=mt_under_demanded(inst, p, s),
            ud=c.ud,
            andersson=andersson_excess(inst, p, s),
            ed=is_excess_demand(inst, p, s),
        ))
    report = ComparisonReport(tuple(p), tuple(rows), inst.labels)
    logger.info(f"📊 [UNIT DEMAND] p={list(p)} disagreements={report.disagreement_count}")
    return report
