"""
Walras Package - Равновесие Вальраса, gross substitutes и универсальные аукционы

Этот пакет содержит все модули, организованные по уровням:
- instance: предметы, цены, оценки, документы аукциона
- demand: спрос, requirement / redundant, OD/WOD/UD/WUD, проверка GS
- lyapunov: потенциал L(p), формулы сдвига, субмодулярность
- equilibrium: переборные оракулы, множество Walrasian цен, характеризация
- auction: excess / dearth demand, восходящий и нисходящий аукционы
- unitdemand: Λ / Ξ и классические определения для unit-demand
- generator / selftest / cli: генерация, проверка свойств, командная строка
"""

import logging
from typing import Any, Dict

logger = logging.getLogger("walras")

# -------------------- Импорты модулей --------------------
from .errors import (
    ContractViolation,
    InstanceError,
    NoEquilibriumError,
    PreconditionError,
    PremiseError,
    WalrasError,
)
from .instance import (
    FIXTURES,
    Instance,
    Valuation,
    ValuationKind,
    load_instance,
    make_additive,
    make_instance,
    make_table,
    make_unit_demand,
    parse_instance,
    serialize_instance,
    validate,
)
from .demand import (
    DemandClass,
    classify_set,
    demand_sets,
    enumerate_class,
    is_gross_substitute,
    requirement,
    redundant,
)
from .lyapunov import grid_minimize_lyapunov, lyapunov, lyapunov_value
from .equilibrium import (
    characterize,
    is_envy_free,
    is_walrasian,
    max_walrasian,
    max_welfare,
    min_walrasian,
    walrasian_set,
)
from .auction import (
    Policy,
    dearth_demand_sets,
    excess_demand_sets,
    maximal_minimizer,
    minimal_minimizer,
    run_ascending,
    run_descending,
)
from .unitdemand import compare_with_general
from .generator import GeneratorSpec, generate_instance
from .selftest import run_selftest

__version__ = "1.0.0"

# -------------------- Категории операций --------------------
OPERATION_CATEGORIES = {
    "instance": [make_additive, make_unit_demand, make_table, parse_instance, validate],
    "demand": [demand_sets, classify_set, enumerate_class, is_gross_substitute],
    "lyapunov": [lyapunov, grid_minimize_lyapunov],
    "equilibrium": [max_welfare, is_walrasian, walrasian_set, characterize],
    "auction": [excess_demand_sets, dearth_demand_sets, run_ascending, run_descending],
    "unitdemand": [compare_with_general],
}


# -------------------- Информация о пакете --------------------
def get_package_info() -> Dict[str, Any]:
    return {
        "package": "walras",
        "version": __version__,
        "fixtures": sorted(FIXTURES),
        "categories": list(OPERATION_CATEGORIES),
        "operations_by_category": {
            category: [op.__name__ for op in ops] for category, ops in OPERATION_CATEGORIES.items()
        },
    }


# -------------------- Быстрая проверка --------------------
def quick_check() -> Dict[str, bool]:
    """Load every built-in fixture and confirm it is well-formed."""
    logger.info("⚡ [QUICK CHECK] Validating built-in fixtures...")
    results: Dict[str, bool] = {}
    for name, build in FIXTURES.items():
        try:
            results[name] = validate(build()).well_formed
        except WalrasError as e:
            logger.error(f"❌ [QUICK CHECK] {name} failed: {e}")
            results[name] = False
    logger.info(f"✅ [QUICK CHECK] {sum(results.values())}/{len(results)} fixtures well-formed")
    return results


# -------------------- Экспорт основных элементов --------------------
__all__ = [
    "__version__",
    "OPERATION_CATEGORIES",
    "get_package_info",
    "quick_check",
    # Ошибки
    "WalrasError",
    "InstanceError",
    "PreconditionError",
    "PremiseError",
    "NoEquilibriumError",
    "ContractViolation",
    # Аукцион
    "FIXTURES",
    "Instance",
    "Valuation",
    "ValuationKind",
    "load_instance",
    "make_additive",
    "make_instance",
    "make_table",
    "make_unit_demand",
    "parse_instance",
    "serialize_instance",
    "validate",
    # Спрос
    "DemandClass",
    "classify_set",
    "demand_sets",
    "enumerate_class",
    "is_gross_substitute",
    "requirement",
    "redundant",
    # Ляпунов и равновесие
    "lyapunov",
    "lyapunov_value",
    "grid_minimize_lyapunov",
    "characterize",
    "is_envy_free",
    "is_walrasian",
    "max_walrasian",
    "max_welfare",
    "min_walrasian",
    "walrasian_set",
    # Аукционы
    "Policy",
    "excess_demand_sets",
    "dearth_demand_sets",
    "minimal_minimizer",
    "maximal_minimizer",
    "run_ascending",
    "run_descending",
    "compare_with_general",
    # Генерация и проверки
    "GeneratorSpec",
    "generate_instance",
    "run_selftest",
]
