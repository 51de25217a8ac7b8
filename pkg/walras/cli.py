"""
CLI Module - Командная строка walras

Команды: validate, demand, classify, gs-check, lyapunov, lyapunov-min,
characterize, equilibrium, auction, unitdemand, selftest, generate.

Коды выхода: 0 ok, 1 ошибка ввода, 2 нарушение контракта аукциона,
3 провал проверки (GS свидетель, провал self-test, нет равновесия).
"""

import functools
import logging
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import click
import orjson
from dotenv import load_dotenv

from .auction import (
    ASCENDING_POLICIES,
    POLICY_ALIASES,
    Direction,
    Policy,
    PolicyKind,
    ed_reading_comparison,
    run_ascending,
    run_descending,
)
from .config import get_settings, setup_logging
from .demand import (
    DemandClass,
    classify_set,
    configure_demand_cache,
    demand_sets,
    enumerate_class,
    is_gross_substitute,
    is_gross_substitute_by_definition,
    non_gs_configuration,
)
from .equilibrium import characterize, is_walrasian, max_welfare, walrasian_bounds, walrasian_set
from .errors import ContractViolation, NoEquilibriumError, PremiseError, WalrasError, InstanceError
from .generator import KINDS, GeneratorSpec, generate_instance
from .instance import FIXTURES, Instance, all_sets, load_instance, parse_price, serialize_instance, validate
from .lyapunov import delta_down, delta_up, grid_minimize_lyapunov, lyapunov
from .selftest import ALL_SUITES, run_selftest
from .unitdemand import compare_with_general

# -------------------- Logging Setup --------------------
logger = logging.getLogger("walras-cli")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONTRACT = 2
EXIT_CHECK = 3

POLICY_NAMES = [k.value for k in PolicyKind] + list(POLICY_ALIASES)
DIRECTIONS = {"asc": Direction.ASCENDING, "ascending": Direction.ASCENDING,
              "desc": Direction.DESCENDING, "descending": Direction.DESCENDING}


# -------------------- Helpers --------------------
class WalrasGroup(click.Group):
    """Click group whose usage errors exit with 1; 2 is reserved for contract violations."""

    def make_context(self, *args, **kwargs):
        try:
            return super().make_context(*args, **kwargs)
        except click.UsageError as e:
            e.exit_code = EXIT_USAGE
            raise

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except click.UsageError as e:
            e.exit_code = EXIT_USAGE
            raise


def _exit(code: int) -> None:
    click.get_current_context().exit(code)


def handle_errors(func: Callable) -> Callable:
    """Map package exceptions to exit codes."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except ContractViolation as e:
            logger.error(f"❌ [CONTRACT VIOLATION] {e}")
            click.echo(f"❌ [CONTRACT VIOLATION] {e}", err=True)
            _exit(EXIT_CONTRACT)
        except (PremiseError, NoEquilibriumError) as e:
            logger.error(f"❌ [CHECK FAILED] {e}")
            click.echo(f"❌ [CHECK FAILED] {e}", err=True)
            _exit(EXIT_CHECK)
        except WalrasError as e:
            logger.error(f"❌ [INPUT ERROR] {e}")
            click.echo(f"❌ [INPUT ERROR] {e}", err=True)
            _exit(EXIT_USAGE)

    return wrapper


def load(source: str, strict: bool = True) -> Instance:
    """Instance file path, or one of the built-in fixture names E1, U1, X1, Z0."""
    path = Path(source)
    if path.is_file():
        return load_instance(path, strict=strict)
    if source.upper() in FIXTURES:
        return FIXTURES[source.upper()]()
    raise InstanceError(f"no instance file or fixture named '{source}'")


def bidder_indices(inst: Instance, bidder: Optional[int]) -> Sequence[int]:
    """Every bidder, or only the given one after a range check."""
    if bidder is None:
        return range(inst.n)
    if not 0 <= bidder < inst.n:
        raise InstanceError(f"bidder {bidder} outside 0..{inst.n - 1}")
    return [bidder]


def emit_json(data: object) -> None:
    click.echo(orjson.dumps(data, option=orjson.OPT_INDENT_2).decode("utf-8"))


def fmt_price(p) -> str:
    return "[" + ", ".join(str(x) for x in p) + "]"


format_option = click.option(
    "--format", "fmt", type=click.Choice(["text", "json"]), default="text", show_default=True,
    help="Human-readable text or stable JSON.",
)
price_option = click.option("--price", "-p", "price_text", required=True, help="Price vector, e.g. 1,0")
jobs_option = click.option("--jobs", "-j", default=1, show_default=True, type=click.IntRange(min=1),
                           help="Worker processes for grid scans.")
instance_argument = click.argument("instance")


# -------------------- Group --------------------
@click.group(cls=WalrasGroup)
@click.option("--verbose", "-v", is_flag=True, help="DEBUG logging.")
def cli(verbose: bool):
    """Walrasian equilibrium toolkit: demand oracles, price characterization and auctions."""
    load_dotenv()
    settings = get_settings()
    setup_logging(settings, verbose)
    configure_demand_cache(settings.demand_cache_size)


# -------------------- validate --------------------
@cli.command("validate")
@instance_argument
@format_option
@handle_errors
def validate_command(instance: str, fmt: str):
    """Report normalization, monotonicity, Vmax and the grid bound B."""
    inst = load(instance, strict=False)
    report = validate(inst)
    if fmt == "json":
        emit_json({"m": inst.m, "n": inst.n, **report.to_dict()})
    else:
        click.echo(f"📄 m={inst.m} n={inst.n} Vmax={report.vmax} B={report.grid_bound}")
        for v in report.violations:
            click.echo(f"❌ bidder {v.bidder}: {v.kind}: {v.detail}")
        if report.well_formed:
            click.echo("✅ well-formed")
    if not report.well_formed:
        _exit(EXIT_USAGE)


# -------------------- demand --------------------
@cli.command("demand")
@instance_argument
@price_option
@click.option("--bidder", "-b", type=int, default=None, help="Only this bidder (0-based).")
@format_option
@handle_errors
def demand_command(instance: str, price_text: str, bidder: Optional[int], fmt: str):
    """Demand sets D_i(p) and maximum utilities."""
    inst = load(instance)
    p = parse_price(price_text, inst.m)
    results = {i: demand_sets(inst.bidders[i], p) for i in bidder_indices(inst, bidder)}
    if fmt == "json":
        emit_json({"price": list(p), "bidders": [{"bidder": i, **r.to_dict(inst.labels)} for i, r in results.items()]})
        return
    for i, r in results.items():
        sets = " ".join(inst.fmt(s) for s in r.sets)
        click.echo(f"👤 bidder {i}: u={r.max_utility} D={sets}")


# -------------------- classify --------------------
@cli.command("classify")
@instance_argument
@price_option
@click.option("--set", "-s", "set_text", default=None, help="One set, e.g. a,b")
@click.option("--class", "cls", type=click.Choice([c.value for c in DemandClass]), default=None,
              help="List every set of this class.")
@click.option("--compare-readings", is_flag=True,
              help="Also list sets whose ED / DD membership differs between T ⊆ S and T ⊂ S.")
@format_option
@handle_errors
def classify_command(instance: str, price_text: str, set_text: Optional[str], cls: Optional[str],
                     compare_readings: bool, fmt: str):
    """OD / WOD / UD / WUD flags with l^p(S) and h^p(S)."""
    inst = load(instance)
    p = parse_price(price_text, inst.m)
    readings = ed_reading_comparison(inst, p) if compare_readings else None
    data: Dict[str, object] = {"price": list(p)}
    if cls is not None:
        members = enumerate_class(inst, p, DemandClass(cls))
        data.update({"class": cls, "sets": [inst.fmt(s) for s in members]})
        lines = [f"📊 {cls}({fmt_price(p)}) = " + " ".join(inst.fmt(s) for s in members)]
    else:
        sets = [inst.parse_set(set_text)] if set_text is not None else list(all_sets(inst.m))
        rows = [classify_set(inst, p, s) for s in sets]
        data["sets"] = [r.to_dict(inst.labels) for r in rows]
        lines = []
        for r in rows:
            flags = ",".join(sorted(c.value for c in r.flags)) or "-"
            lines.append(f"📊 {inst.fmt(r.set):<12} l={r.requirement} h={r.redundant} |S|={r.size} {flags}")
    if readings is not None:
        data["readings"] = readings.to_dict(inst.labels)
        if readings.agree:
            lines.append("✅ T ⊆ S and T ⊂ S readings agree on ED and DD")
        else:
            ed = " ".join(inst.fmt(s) for s in readings.ed_disagreements) or "-"
            dd = " ".join(inst.fmt(s) for s in readings.dd_disagreements) or "-"
            lines.append(f"⚠️ readings differ: ED {ed}; DD {dd}")
    if fmt == "json":
        emit_json(data)
        return
    for text in lines:
        click.echo(text)


# -------------------- gs-check --------------------
@cli.command("gs-check")
@instance_argument
@click.option("--bidder", "-b", type=int, default=None, help="Only this bidder (0-based).")
@click.option("--condition", type=click.Choice(["1", "2"]), default="2", show_default=True)
@click.option("--definition", is_flag=True, help="Also check the substitutes definition directly.")
@click.option("--configuration", is_flag=True, help="Search a non-GS demand configuration for failing bidders.")
@click.option("--cap", type=int, default=None, help="Largest m the exhaustive check accepts.")
@format_option
@handle_errors
def gs_check_command(instance: str, bidder: Optional[int], condition: str, definition: bool,
                     configuration: bool, cap: Optional[int], fmt: str):
    """Exhaustive gross substitute check per bidder; exit 3 when a witness is found."""
    inst = load(instance)
    indices = bidder_indices(inst, bidder)
    cap = cap if cap is not None else get_settings().gs_check_cap
    reports: List[Dict[str, object]] = []
    failed = False
    for i in indices:
        v = inst.bidders[i]
        check = is_gross_substitute(v, cap, int(condition))
        record: Dict[str, object] = {"bidder": i, **check.to_dict(inst.labels)}
        if definition:
            witness = is_gross_substitute_by_definition(v, cap)
            record["definition_holds"] = witness is None
        if configuration and not check.holds and v.m >= 2:
            search = non_gs_configuration(v)
            record["configuration"] = search.exact.to_dict(inst.labels) if search.exact else None
            record["near_misses"] = [c.to_dict(inst.labels) for c in search.near_misses]
        failed = failed or not check.holds
        reports.append(record)

    if fmt == "json":
        emit_json({"bidders": reports})
    else:
        for record in reports:
            if record["gross_substitute"]:
                click.echo(f"✅ bidder {record['bidder']}: gross substitute ({record['points']} grid points)")
            else:
                w = record["witness"]
                click.echo(
                    f"❌ bidder {record['bidder']}: condition {w['condition']} fails at p={fmt_price(w['price'])} "
                    f"S={w['set']}: {w['lhs']} vs {w['rhs']}"
                )
            if "definition_holds" in record:
                click.echo(f"   definition: {'holds' if record['definition_holds'] else 'fails'}")
            if record.get("near_misses"):
                click.echo(f"   configuration: {'exact' if record['configuration'] else 'none exact'}, "
                           f"{len(record['near_misses'])} near miss(es)")
    if failed:
        _exit(EXIT_CHECK)


# -------------------- lyapunov --------------------
@cli.command("lyapunov")
@instance_argument
@price_option
@click.option("--set", "-s", "set_text", default=None, help="Also predict L(p ± 1_S).")
@format_option
@handle_errors
def lyapunov_command(instance: str, price_text: str, set_text: Optional[str], fmt: str):
    """L(p) = Σ u_i(p) + Σ p_j with its decomposition."""
    inst = load(instance)
    p = parse_price(price_text, inst.m)
    report = lyapunov(inst, p)
    data: Dict[str, object] = {"price": list(p), **report.to_dict()}
    if set_text is not None:
        s = inst.parse_set(set_text)
        up = delta_up(inst, p, s)
        data["up"] = {"predicted": up.predicted, "actual": up.actual}
        try:
            down = delta_down(inst, p, s)
            data["down"] = {"predicted": down.predicted, "actual": down.actual}
        except WalrasError:
            data["down"] = None
    if fmt == "json":
        emit_json(data)
        return
    click.echo(f"📉 L({fmt_price(p)}) = {report.value}  (utilities {list(report.per_bidder_utilities)}, "
               f"price mass {report.price_mass})")
    if set_text is not None:
        click.echo(f"   L(p + 1_S): predicted {data['up']['predicted']}, actual {data['up']['actual']}")
        if data["down"]:
            click.echo(f"   L(p - 1_S): predicted {data['down']['predicted']}, actual {data['down']['actual']}")


@cli.command("lyapunov-min")
@instance_argument
@jobs_option
@click.option("--progress", is_flag=True, help="Show a progress bar.")
@format_option
@handle_errors
def lyapunov_min_command(instance: str, jobs: int, progress: bool, fmt: str):
    """Minimum of L over the grid [0, B]^m and every minimizer."""
    inst = load(instance)
    result = grid_minimize_lyapunov(inst, jobs, progress)
    if fmt == "json":
        emit_json(result.to_dict())
        return
    click.echo(f"📉 min L = {result.min_value}")
    for p in result.minimizers:
        click.echo(f"   {fmt_price(p)}")


# -------------------- characterize --------------------
@cli.command("characterize")
@instance_argument
@price_option
@click.option("--force", is_flag=True, help="Skip the GS premise check; the verdict may then be meaningless.")
@format_option
@handle_errors
def characterize_command(instance: str, price_text: str, force: bool, fmt: str):
    """Walrasian / minimum / maximum verdict from demand classes alone."""
    inst = load(instance)
    p = parse_price(price_text, inst.m)
    verdict = characterize(inst, p, force=force, check_cap=get_settings().gs_check_cap)
    if fmt == "json":
        emit_json(verdict.to_dict(inst.labels))
        return

    def line(label: str, ok: bool, evidence) -> str:
        mark = "✅" if ok else "❌"
        suffix = f" (evidence {inst.fmt(evidence.set)} {evidence.cls.value})" if evidence and not ok else ""
        return f"{mark} {label}{suffix}"

    click.echo(f"🔍 p = {fmt_price(p)}{' (forced)' if force else ''}")
    click.echo(line("Walrasian", verdict.is_walrasian, verdict.evidence))
    click.echo(line("minimum Walrasian", verdict.is_min_walrasian, verdict.evidence or verdict.min_evidence))
    click.echo(line("maximum Walrasian", verdict.is_max_walrasian, verdict.evidence or verdict.max_evidence))


# -------------------- equilibrium --------------------
@cli.command("equilibrium")
@instance_argument
@click.option("--price", "-p", "price_text", default=None, help="Only certify this price vector.")
@jobs_option
@format_option
@handle_errors
def equilibrium_command(instance: str, price_text: Optional[str], jobs: int, fmt: str):
    """Walrasian set with its minimum and maximum, or a certificate for one price."""
    inst = load(instance)
    if price_text is not None:
        p = parse_price(price_text, inst.m)
        certificate = is_walrasian(inst, p)
        if fmt == "json":
            emit_json({"price": list(p), "walrasian": certificate is not None,
                       "certificate": certificate.to_dict(inst.labels) if certificate else None})
        elif certificate:
            bundles = " ".join(inst.fmt(b) for b in certificate.allocation.bundles)
            click.echo(f"✅ {fmt_price(p)} is Walrasian: {bundles} (welfare {certificate.welfare})")
        else:
            click.echo(f"❌ {fmt_price(p)} is not Walrasian")
        return

    prices = walrasian_set(inst, jobs)
    bounds = walrasian_bounds(inst, prices)
    welfare, allocation = max_welfare(inst)
    certificates = {"min": is_walrasian(inst, bounds.minimum), "max": is_walrasian(inst, bounds.maximum)}
    if fmt == "json":
        emit_json({
            "walrasian_set": [list(p) for p in prices],
            **bounds.to_dict(),
            "max_welfare": welfare,
            "optimal_allocation": allocation.to_dict(inst.labels),
            **{f"{end}_certificate": c.to_dict(inst.labels) if c else None for end, c in certificates.items()},
        })
        return
    click.echo(f"📈 {bounds.count} Walrasian price vector(s), max welfare {welfare}")
    click.echo(f"   min {fmt_price(bounds.minimum)}, max {fmt_price(bounds.maximum)}")
    for end, c in certificates.items():
        if c:
            bundles = " ".join(inst.fmt(b) for b in c.allocation.bundles)
            click.echo(f"✅ {end} certificate {fmt_price(c.price)}: {bundles} (welfare {c.welfare})")
    if not (bounds.min_closed and bounds.max_closed):
        click.echo("⚠️ meet or join of the Walrasian set is not Walrasian")


# -------------------- auction --------------------
@cli.command("auction")
@instance_argument
@click.option("--direction", "-d", type=click.Choice(sorted(DIRECTIONS)), default="asc", show_default=True)
@click.option("--policy", type=click.Choice(POLICY_NAMES), default=ASCENDING_POLICIES[0].value, show_default=True)
@click.option("--seed", type=int, default=None, help="Seed of the random policy.")
@click.option("--unchecked", is_flag=True, help="Record out-of-framework rounds instead of aborting.")
@click.option("--trace", "trace_path", type=click.Path(dir_okay=False), default=None, help="Write the trace JSON here.")
@format_option
@handle_errors
def auction_command(instance: str, direction: str, policy: str, seed: Optional[int], unchecked: bool,
                    trace_path: Optional[str], fmt: str):
    """Run the universal ascending or descending auction."""
    inst = load(instance)
    run = run_ascending if DIRECTIONS[direction] is Direction.ASCENDING else run_descending
    trace = run(inst, Policy.parse(policy, seed), unchecked=unchecked, check_cap=get_settings().gs_check_cap)
    data = trace.to_dict(inst.labels)
    if trace_path:
        Path(trace_path).write_bytes(orjson.dumps(data, option=orjson.OPT_INDENT_2))
        logger.info(f"💾 [AUCTION] trace written to {trace_path}")
    if fmt == "json":
        emit_json(data)
    else:
        click.echo(f"🔨 {trace.direction.value} auction, policy {trace.policy.name}"
                   + (f" seed {trace.policy.seed}" if trace.policy.seed is not None else ""))
        for k, r in enumerate(trace.rounds):
            marker = "" if r.in_framework else f"  ⚠️ outside framework, culprit {inst.fmt(r.culprit) if r.culprit else 'none'}"
            click.echo(f"   round {k}: {fmt_price(r.price)} {inst.fmt(r.chosen)}  L {r.lyapunov_before} -> {r.lyapunov_after}{marker}")
        click.echo(f"🏁 final price {fmt_price(trace.final_price)} after {len(trace.rounds)} round(s)")
    if not trace.clean:
        _exit(EXIT_CONTRACT)


# -------------------- unitdemand --------------------
@cli.command("unitdemand")
@instance_argument
@price_option
@click.option("--format", "fmt", type=click.Choice(["text", "json", "csv"]), default="text", show_default=True)
@handle_errors
def unitdemand_command(instance: str, price_text: str, fmt: str):
    """Mishra–Talman and Andersson definitions against OD / UD / ED."""
    inst = load(instance)
    p = parse_price(price_text, inst.m)
    report = compare_with_general(inst, p)
    if fmt == "json":
        emit_json(report.to_dict())
        return
    if fmt == "csv":
        click.echo(report.to_csv(), nl=False)
        return
    click.echo(f"📊 p = {fmt_price(p)}")
    for r in report.rows:
        flags = " ".join(f"{name}={'Y' if value else 'n'}" for name, value in (
            ("mt_over", r.mt_over), ("OD", r.od), ("mt_under", r.mt_under), ("UD", r.ud),
            ("andersson", r.andersson), ("ED", r.ed)))
        warn = f"  ⚠️ {', '.join(r.disagreements)}" if r.disagreements else ""
        click.echo(f"   {inst.fmt(r.set):<12} {flags}{warn}")
    for note in report.notes:
        click.echo(f"💡 {note}")


# -------------------- selftest --------------------
@cli.command("selftest")
@instance_argument
@click.option("--suite", "suites", multiple=True, type=click.Choice(list(ALL_SUITES)), help="Run only these suites.")
@click.option("--trust-kinds", is_flag=True, help="Treat additive and unit-demand bidders as GS without a scan.")
@click.option("--progress", is_flag=True, help="Show progress bars.")
@jobs_option
@format_option
@handle_errors
def selftest_command(instance: str, suites, trust_kinds: bool, progress: bool, jobs: int, fmt: str):
    """Every property suite over the full grid; exit 3 on any failure."""
    inst = load(instance)
    report = run_selftest(inst, suites or None, jobs=jobs, progress=progress,
                          check_cap=get_settings().gs_check_cap, trust_kinds=trust_kinds)
    if fmt == "json":
        emit_json(report.to_dict())
    else:
        click.echo(f"🔍 selftest {report.digest}  GS premise: {'✅' if report.premise_holds else '❌'}")
        if report.premise_witness:
            click.echo(f"   premise witness: {report.premise_witness}")
        for s in report.suites:
            if s.skipped:
                click.echo(f"⏭️  {s.name:<28} skipped ({s.reason})")
                continue
            click.echo(f"{'✅' if s.passed else '❌'} {s.name:<28} {s.checks} checks, {s.failures} failure(s)")
            if s.counterexample:
                click.echo(f"   counterexample: {s.counterexample}")
    if not report.passed:
        _exit(EXIT_CHECK)


# -------------------- generate --------------------
@cli.command("generate")
@click.option("--items", "-m", "m", type=int, required=True)
@click.option("--bidders", "-n", "n", type=int, required=True)
@click.option("--max-value", type=click.IntRange(min=0), default=4, show_default=True)
@click.option("--kinds", type=click.Choice(list(KINDS)), default="mixed", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--output", "-o", type=click.Path(dir_okay=False), default=None, help="Write here instead of stdout.")
@handle_errors
def generate_command(m: int, n: int, max_value: int, kinds: str, seed: int, output: Optional[str]):
    """Deterministic random instance of additive and/or unit-demand bidders."""
    inst = generate_instance(GeneratorSpec(m, n, max_value, kinds, seed))
    text = serialize_instance(inst)
    if output:
        Path(output).write_text(text + "\n", encoding="utf-8")
        click.echo(f"💾 instance written to {output}", err=True)
    else:
        click.echo(text)


def main() -> None:
    cli(prog_name="walras")


if __name__ == "__main__":
    main()
