"""
Selftest Module - Полная проверка свойств на сетке [0, B]^m

Этот модуль прогоняет все наборы проверок над одним аукционом:
- premise-free: не требуют gross substitute
- premise-dependent: выполняются только когда все участники GS
- SweepReport: дайджест, счетчики и первый контрпример по каждому набору

Каждый контрпример содержит имя операции и аргументы для повторного запуска.
"""

import hashlib
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, Iterable, List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from .auction import (
    Policy,
    demonstrate_asc_necessity,
    demonstrate_desc_necessity,
    excess_demand_sets,
    dearth_demand_sets,
    is_dearth_demand,
    is_excess_demand,
    maximal_minimizer,
    minimal_minimizer,
    run_ascending,
    run_descending,
)
from .config import get_settings
from .demand import (
    classify_set,
    demand_sets,
    difference_bounds,
    dual_gs_check,
    enumerate_class,
    DemandClass,
    gs_premise,
    max_utility,
    nontrivial_weakly_over_demanded,
    nontrivial_weakly_under_demanded,
    requirement,
    single_improvement,
)
from .equilibrium import characterize, is_envy_free, is_walrasian, lattice_check, max_welfare, walrasian_set
from .errors import CapExceededError, ContractViolation, PreconditionError
from .instance import Instance, PriceVector, all_sets, can_lower, join, meet, raise_prices, serialize_instance
from .lyapunov import delta_down, delta_up, grid_minimize_lyapunov, lyapunov_grid_values, scan_submodularity

# -------------------- Logging Setup --------------------
logger = logging.getLogger("walras-selftest")

PREMISE_FREE = ("classification-consistency", "difference-bounds", "weak-duality", "first-welfare")
PREMISE_DEPENDENT = (
    "gs-equalities",
    "lyapunov-deltas",
    "characterization",
    "duality",
    "envy-free",
    "ascending-framework",
    "descending-framework",
    "non-stalling",
    "minimizer-in-ed",
    "necessity",
    "submodularity",
    "lattice",
    "gs-monotonicity",
    "single-improvement",
)
ALL_SUITES = PREMISE_FREE + PREMISE_DEPENDENT

FRAMEWORK_POLICIES = (
    ("minimal-minimizer", None),
    ("lex-first", None),
    ("random", 1),
    ("random", 2),
    ("random", 3),
    ("largest-cardinality", None),
)


# -------------------- Report types --------------------
@dataclass
class SuiteResult:
    name: str
    checks: int = 0
    failures: int = 0
    counterexample: Optional[Dict[str, object]] = None
    skipped: bool = False
    reason: Optional[str] = None

    @property
    def passed(self) -> bool:
        return not self.skipped and self.failures == 0

    def tally(self, ok: bool) -> bool:
        self.checks += 1
        if not ok:
            self.failures += 1
        return ok

    def witness(self, operation: str, **values) -> None:
        """Keep the first counterexample only."""
        if self.counterexample is None:
            self.counterexample = {"operation": operation, **values}

    def to_dict(self) -> Dict[str, object]:
        record: Dict[str, object] = {
            "name": self.name,
            "status": "skipped" if self.skipped else ("pass" if self.passed else "fail"),
            "checks": self.checks,
            "failures": self.failures,
        }
        if self.counterexample is not None:
            record["counterexample"] = self.counterexample
        if self.reason:
            record["reason"] = self.reason
        return record


@dataclass
class SweepReport:
    digest: str
    premise_holds: bool
    premise_witness: Optional[Dict[str, object]]
    suites: List[SuiteResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.premise_holds and all(s.passed for s in self.suites if not s.skipped)

    @property
    def failed(self) -> List[SuiteResult]:
        return [s for s in self.suites if not s.skipped and not s.passed]

    @property
    def skipped(self) -> List[str]:
        return [s.name for s in self.suites if s.skipped]

    def suite(self, name: str) -> SuiteResult:
        return next(s for s in self.suites if s.name == name)

    def to_dict(self) -> Dict[str, object]:
        return {
            "digest": self.digest,
            "passed": self.passed,
            "gs_premise": self.premise_holds,
            "premise_witness": self.premise_witness,
            "suites": [s.to_dict() for s in self.suites],
            "skipped": self.skipped,
        }


def instance_digest(inst: Instance) -> str:
    return hashlib.sha256(serialize_instance(inst).encode("utf-8")).hexdigest()[:16]


# -------------------- Sweep context --------------------
class SweepContext:
    """Grid and brute-force oracles shared by the suites of one sweep."""

    def __init__(self, inst: Instance, jobs: int = 1, progress: bool = False):
        self.inst = inst
        self.jobs = jobs
        self.progress = progress
        self.grid: List[PriceVector] = list(inst.grid())

    def points(self, suite: str) -> Iterable[PriceVector]:
        return tqdm(self.grid, desc=suite, disable=not self.progress, leave=False)

    def fmt(self, s: int) -> str:
        return self.inst.fmt(s)

    @cached_property
    def welfare(self) -> int:
        return max_welfare(self.inst)[0]

    @cached_property
    def walrasian(self) -> List[PriceVector]:
        return walrasian_set(self.inst, self.jobs)

    @cached_property
    def walrasian_lookup(self) -> frozenset:
        return frozenset(self.walrasian)

    @cached_property
    def lyapunov_values(self) -> np.ndarray:
        return lyapunov_grid_values(self.inst, np.asarray(self.grid, dtype=np.int64))


# -------------------- Premise-free suites --------------------
def _classification_consistency(ctx: SweepContext, res: SuiteResult) -> None:
    for p in ctx.points(res.name):
        for s in all_sets(ctx.inst.m):
            c = classify_set(ctx.inst, p, s)
            ok = (not c.od or c.wod) and (not c.ud or c.wud) and c.requirement <= c.redundant
            if s == 0:
                ok = ok and c.wod and c.wud and not c.od and not c.ud
            if not res.tally(ok):
                res.witness("classify_set", price=list(p), set=ctx.fmt(s), values=c.to_dict(ctx.inst.labels))


def _difference_bounds(ctx: SweepContext, res: SuiteResult) -> None:
    for p in ctx.points(res.name):
        for i, v in enumerate(ctx.inst.bidders):
            for s in all_sets(ctx.inst.m, nonempty=True):
                bounds = difference_bounds(v, p, s)
                if not res.tally(bounds.raise_holds and bounds.lower_holds is not False):
                    res.witness(
                        "difference_bounds", bidder=i, price=list(p), set=ctx.fmt(s),
                        values={"raise": bounds.raise_holds, "lower": bounds.lower_holds},
                    )


def _weak_duality(ctx: SweepContext, res: SuiteResult) -> None:
    for p, value in zip(ctx.grid, ctx.lyapunov_values):
        if not res.tally(int(value) >= ctx.welfare):
            res.witness("lyapunov", price=list(p), values={"L": int(value), "max_welfare": ctx.welfare})


def _first_welfare(ctx: SweepContext, res: SuiteResult) -> None:
    for p in ctx.walrasian:
        certificate = is_walrasian(ctx.inst, p)
        if not res.tally(certificate is not None and certificate.welfare == ctx.welfare):
            res.witness(
                "is_walrasian", price=list(p),
                values={"welfare": certificate.welfare if certificate else None, "max_welfare": ctx.welfare},
            )


# -------------------- Premise-dependent suites --------------------
def _gs_equalities(ctx: SweepContext, res: SuiteResult) -> None:
    for p in ctx.points(res.name):
        for i, v in enumerate(ctx.inst.bidders):
            u = max_utility(v, p)
            for s in all_sets(ctx.inst.m, nonempty=True):
                rhs = max_utility(v, raise_prices(p, s)) + requirement(v, p, s)
                if not res.tally(u == rhs):
                    res.witness("gs_equality", condition=2, bidder=i, price=list(p), set=ctx.fmt(s),
                                values={"lhs": u, "rhs": rhs})
                if can_lower(p, s):
                    lhs, dual = dual_gs_check(v, p, s)
                    if not res.tally(lhs == dual):
                        res.witness("dual_gs_check", condition=1, bidder=i, price=list(p), set=ctx.fmt(s),
                                    values={"lhs": lhs, "rhs": dual})


def _lyapunov_deltas(ctx: SweepContext, res: SuiteResult) -> None:
    for p in ctx.points(res.name):
        for s in all_sets(ctx.inst.m, nonempty=True):
            up = delta_up(ctx.inst, p, s)
            if not res.tally(up.agrees):
                res.witness("delta_up", price=list(p), set=ctx.fmt(s),
                            values={"predicted": up.predicted, "actual": up.actual})
            if can_lower(p, s):
                down = delta_down(ctx.inst, p, s)
                if not res.tally(down.agrees):
                    res.witness("delta_down", price=list(p), set=ctx.fmt(s),
                                values={"predicted": down.predicted, "actual": down.actual})


def _characterization(ctx: SweepContext, res: SuiteResult) -> None:
    if not res.tally(bool(ctx.walrasian)):
        res.witness("walrasian_set", values={"walrasian": []})
        return
    low, high = meet_all(ctx.walrasian), join_all(ctx.walrasian)
    min_lyapunov = int(ctx.lyapunov_values.min())
    for p, value in zip(ctx.points(res.name), ctx.lyapunov_values):
        verdict = characterize(ctx.inst, p, force=True)
        expected = (p in ctx.walrasian_lookup, p == low, p == high)
        actual = (verdict.is_walrasian, verdict.is_min_walrasian, verdict.is_max_walrasian)
        if not res.tally(expected == actual):
            res.witness("characterize", price=list(p),
                        values={"expected": list(expected), "verdict": verdict.to_dict(ctx.inst.labels)})
        # OD или UD множество исключает минимум L
        if verdict.evidence is not None and not res.tally(int(value) > min_lyapunov):
            res.witness("lyapunov", price=list(p), values={"L": int(value), "min_L": min_lyapunov})


def _duality(ctx: SweepContext, res: SuiteResult) -> None:
    minimum = grid_minimize_lyapunov(ctx.inst, ctx.jobs)
    if not res.tally(minimum.min_value == ctx.welfare):
        res.witness("grid_minimize_lyapunov", values={"min_L": minimum.min_value, "max_welfare": ctx.welfare})
    if not res.tally(list(minimum.minimizers) == ctx.walrasian):
        res.witness("grid_minimize_lyapunov", values={
            "minimizers": [list(p) for p in minimum.minimizers],
            "walrasian": [list(p) for p in ctx.walrasian],
        })


def _envy_free(ctx: SweepContext, res: SuiteResult) -> None:
    for p in ctx.points(res.name):
        envy_free = is_envy_free(ctx.inst, p) is not None
        over = enumerate_class(ctx.inst, p, DemandClass.OD)
        if not res.tally(envy_free == (not over)):
            res.witness("is_envy_free", price=list(p),
                        values={"envy_free": envy_free, "over_demanded": [ctx.fmt(s) for s in over]})


def _framework(ctx: SweepContext, res: SuiteResult, ascending: bool) -> None:
    if not ctx.walrasian:
        res.tally(False)
        res.witness("walrasian_set", values={"walrasian": []})
        return
    target = meet_all(ctx.walrasian) if ascending else join_all(ctx.walrasian)
    run = run_ascending if ascending else run_descending
    operation = "run_ascending" if ascending else "run_descending"
    weak = nontrivial_weakly_under_demanded if ascending else nontrivial_weakly_over_demanded
    for name, seed in FRAMEWORK_POLICIES:
        policy = Policy.parse(name, seed)
        try:
            # посылка уже проверена; выход за ED/DD виден как in_framework=False
            trace = run(ctx.inst, policy, unchecked=True)
        except ContractViolation as e:
            res.tally(False)
            res.witness(operation, policy=name, seed=seed, values=e.to_dict())
            continue
        if not res.tally(trace.clean):
            bad = next(r for r in trace.rounds if not r.in_framework)
            res.witness(operation, policy=name, seed=seed, price=list(bad.price), set=ctx.fmt(bad.chosen),
                        values={"in_framework": False})
        if not res.tally(trace.final_price == target):
            res.witness(operation, policy=name, seed=seed,
                        values={"final": list(trace.final_price), "expected": list(target)})
        for r in trace.rounds:
            if not res.tally(r.lyapunov_after < r.lyapunov_before):
                res.witness(operation, policy=name, seed=seed, price=list(r.price), set=ctx.fmt(r.chosen),
                            values={"L_before": r.lyapunov_before, "L_after": r.lyapunov_after})
        for p in trace.prices():
            found = weak(ctx.inst, p)
            if not res.tally(not found):
                res.witness(operation, policy=name, seed=seed, price=list(p),
                            values={"weak_sets": [ctx.fmt(s) for s in found]})


def meet_all(prices: List[PriceVector]) -> PriceVector:
    low = prices[0]
    for p in prices[1:]:
        low = meet(low, p)
    return low


def join_all(prices: List[PriceVector]) -> PriceVector:
    high = prices[0]
    for p in prices[1:]:
        high = join(high, p)
    return high


def _ascending_framework(ctx: SweepContext, res: SuiteResult) -> None:
    _framework(ctx, res, ascending=True)


def _descending_framework(ctx: SweepContext, res: SuiteResult) -> None:
    _framework(ctx, res, ascending=False)


def _non_stalling(ctx: SweepContext, res: SuiteResult) -> None:
    for p in ctx.points(res.name):
        if enumerate_class(ctx.inst, p, DemandClass.OD) and not res.tally(bool(excess_demand_sets(ctx.inst, p))):
            res.witness("excess_demand_sets", price=list(p), values={"excess_demand": []})
    # нисходящая сторона: цены, посещенные нисходящим аукционом
    trace = run_descending(ctx.inst, Policy.parse("lex-first"), unchecked=True)
    for p in trace.prices():
        under = [s for s in enumerate_class(ctx.inst, p, DemandClass.UD) if s]
        if under and not res.tally(bool(dearth_demand_sets(ctx.inst, p))):
            res.witness("dearth_demand_sets", price=list(p), values={"dearth_demand": []})


def _minimizer_in_ed(ctx: SweepContext, res: SuiteResult) -> None:
    for p in ctx.points(res.name):
        low = minimal_minimizer(ctx.inst, p)
        for s in low.candidates if low else ():
            if not res.tally(is_excess_demand(ctx.inst, p, s)):
                res.witness("minimal_minimizer", price=list(p), set=ctx.fmt(s), values={"in_excess_demand": False})
        high = maximal_minimizer(ctx.inst, p)
        for s in high.candidates if high else ():
            if not res.tally(is_dearth_demand(ctx.inst, p, s)):
                res.witness("maximal_minimizer", price=list(p), set=ctx.fmt(s), values={"in_dearth_demand": False})


def _necessity(ctx: SweepContext, res: SuiteResult) -> None:
    for p in ctx.points(res.name):
        for s in all_sets(ctx.inst.m, nonempty=True):
            if not is_excess_demand(ctx.inst, p, s):
                witness = demonstrate_asc_necessity(ctx.inst, p, s)
                if not res.tally(witness.found):
                    res.witness("demonstrate_asc_necessity", price=list(p), set=ctx.fmt(s), values={"culprit": None})
            if can_lower(p, s) and not is_dearth_demand(ctx.inst, p, s):
                witness = demonstrate_desc_necessity(ctx.inst, p, s)
                if not res.tally(witness.found):
                    res.witness("demonstrate_desc_necessity", price=list(p), set=ctx.fmt(s), values={"culprit": None})


def _submodularity(ctx: SweepContext, res: SuiteResult) -> None:
    settings = get_settings()
    checked, violation = scan_submodularity(ctx.inst, settings.submodularity_sample, settings.sample_seed)
    res.checks += checked
    if violation is not None:
        res.failures += 1
        res.witness("submodularity_check", values=violation.to_dict())


def _lattice(ctx: SweepContext, res: SuiteResult) -> None:
    prices = ctx.walrasian
    for a in range(len(prices)):
        for b in range(a + 1, len(prices)):
            check = lattice_check(ctx.inst, prices[a], prices[b])
            if not res.tally(check.holds):
                res.witness("lattice_check", p=list(prices[a]), q=list(prices[b]),
                            values={"meet": list(check.meet), "join": list(check.join)})


def _gs_monotonicity(ctx: SweepContext, res: SuiteResult) -> None:
    full = ctx.inst.full
    for p in ctx.points(res.name):
        for i, v in enumerate(ctx.inst.bidders):
            for s in all_sets(ctx.inst.m, nonempty=True):
                base = requirement(v, p, s)
                rest = full & ~s
                t = rest
                while t:
                    raised = requirement(v, raise_prices(p, t), s)
                    if not res.tally(raised >= base):
                        res.witness("requirement", bidder=i, price=list(p), set=ctx.fmt(s), raised=ctx.fmt(t),
                                    values={"before": base, "after": raised})
                    t = (t - 1) & rest


def _single_improvement(ctx: SweepContext, res: SuiteResult) -> None:
    for p in ctx.points(res.name):
        for i, v in enumerate(ctx.inst.bidders):
            demanded = demand_sets(v, p)
            for s in all_sets(ctx.inst.m):
                if s in demanded:
                    continue
                if not res.tally(single_improvement(v, p, s) is not None):
                    res.witness("single_improvement", bidder=i, price=list(p), set=ctx.fmt(s), values={"improvement": None})


SUITES: Dict[str, Callable[[SweepContext, SuiteResult], None]] = {
    "classification-consistency": _classification_consistency,
    "difference-bounds": _difference_bounds,
    "weak-duality": _weak_duality,
    "first-welfare": _first_welfare,
    "gs-equalities": _gs_equalities,
    "lyapunov-deltas": _lyapunov_deltas,
    "characterization": _characterization,
    "duality": _duality,
    "envy-free": _envy_free,
    "ascending-framework": _ascending_framework,
    "descending-framework": _descending_framework,
    "non-stalling": _non_stalling,
    "minimizer-in-ed": _minimizer_in_ed,
    "necessity": _necessity,
    "submodularity": _submodularity,
    "lattice": _lattice,
    "gs-monotonicity": _gs_monotonicity,
    "single-improvement": _single_improvement,
}


def _execute(ctx: SweepContext, name: str) -> SuiteResult:
    res = SuiteResult(name)
    SUITES[name](ctx, res)
    status = "✅" if res.passed else "❌"
    logger.info(f"{status} [SELFTEST] {name}: {res.checks} checks, {res.failures} failure(s)")
    return res


def run_suite(inst: Instance, name: str, jobs: int = 1, progress: bool = False) -> SuiteResult:
    return _execute(SweepContext(inst, jobs, progress), name)


def _run_suite_task(args: Tuple[Instance, str]) -> SuiteResult:
    inst, name = args
    return run_suite(inst, name)


# -------------------- Sweep --------------------
def run_selftest(
    inst: Instance,
    suites: Optional[Iterable[str]] = None,
    jobs: int = 1,
    progress: bool = False,
    check_cap: Optional[int] = None,
    trust_kinds: bool = False,
) -> SweepReport:
    """Run the premise-free suites, then the premise-dependent ones when every bidder is GS."""
    names = list(suites) if suites is not None else list(ALL_SUITES)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ValueError(f"unknown suite(s): {', '.join(unknown)}")

    premise_witness = None
    skip_reason = None
    try:
        checks = gs_premise(inst, check_cap, trust_kinds)
        failing = next((i for i, c in enumerate(checks) if not c.holds), None)
        if failing is not None:
            premise_witness = {"bidder": failing, **checks[failing].witness.to_dict(inst.labels)}
            skip_reason = f"bidder {failing} is not gross substitute"
    except (CapExceededError, PreconditionError) as e:
        skip_reason = str(e)
        premise_witness = {"error": str(e)}
    premise_holds = skip_reason is None
    logger.info(f"🔍 [SELFTEST] digest={instance_digest(inst)} gs_premise={premise_holds}")

    runnable = [n for n in names if premise_holds or n in PREMISE_FREE]
    if jobs > 1 and len(runnable) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = dict(zip(runnable, pool.map(_run_suite_task, [(inst, n) for n in runnable])))
    else:
        ctx = SweepContext(inst, jobs, progress)
        results = {n: _execute(ctx, n) for n in runnable}

    report = SweepReport(instance_digest(inst), premise_holds, premise_witness)
    for n in names:
        report.suites.append(results.get(n) or SuiteResult(n, skipped=True, reason=skip_reason))
    return report
