"""
Generator Module - Случайные аукционы для проверок

- GeneratorSpec: параметры генерации (m, n, max_value, kinds, seed)
- generate_instance: детерминированный аукцион из additive / unit-demand участников
- generate_corpus: набор аукционов для self-test и приемочных тестов
"""

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .config import get_settings
from .demand import is_gross_substitute
from .errors import CapExceededError, InstanceError
from .instance import MAX_BIDDERS, MAX_ITEMS, Instance, Valuation, make_additive, make_instance, make_unit_demand

# -------------------- Logging Setup --------------------
logger = logging.getLogger("walras-generator")

KINDS = ("additive", "unit_demand", "mixed")


@dataclass(frozen=True)
class GeneratorSpec:
    m: int
    n: int
    max_value: int = 4
    kinds: str = "mixed"
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.m <= MAX_ITEMS:
            raise CapExceededError(f"m = {self.m} outside 1..{MAX_ITEMS}")
        if not 1 <= self.n <= MAX_BIDDERS:
            raise CapExceededError(f"n = {self.n} outside 1..{MAX_BIDDERS}")
        if self.max_value < 0:
            raise InstanceError("max_value must be a natural number")
        if self.kinds not in KINDS:
            raise InstanceError(f"kinds must be one of {', '.join(KINDS)}, got {self.kinds!r}")


def _bidder(rng: np.random.Generator, m: int, max_value: int, kind: str) -> Valuation:
    item_values = [int(x) for x in rng.integers(0, max_value + 1, size=m)]
    if kind == "additive":
        return make_additive(item_values)
    return make_unit_demand(item_values)


def generate_instance(spec: GeneratorSpec, verify: Optional[bool] = None) -> Instance:
    """Same spec, same instance; verify (default: settings.debug) re-checks GS on every bidder."""
    rng = np.random.default_rng(spec.seed)
    bidders = []
    for _ in range(spec.n):
        kind = spec.kinds if spec.kinds != "mixed" else ("additive", "unit_demand")[int(rng.integers(2))]
        bidders.append(_bidder(rng, spec.m, spec.max_value, kind))
    inst = make_instance(bidders)

    settings = get_settings()
    verify = settings.debug if verify is None else verify
    if verify and spec.m <= settings.gs_check_cap:
        for i, v in enumerate(inst.bidders):
            check = is_gross_substitute(v, settings.gs_check_cap)
            # additive и unit-demand всегда GS
            assert check.holds, f"generated bidder {i} failed the GS check: {check.witness}"
        logger.debug(f"✅ [GENERATE] GS verified for {inst.n} bidder(s)")

    logger.info(f"🎲 [GENERATE] m={spec.m} n={spec.n} max_value={spec.max_value} kinds={spec.kinds} seed={spec.seed}")
    return inst


def generate_corpus(
    count: int,
    seed: int = 0,
    max_items: int = 4,
    max_bidders: int = 4,
    max_value: int = 4,
    kinds: str = "mixed",
) -> List[Instance]:
    """count instances with m, n drawn from 1..max_items, 1..max_bidders; seeds derive from seed."""
    rng = np.random.default_rng(seed)
    corpus = []
    for _ in range(count):
        spec = GeneratorSpec(
            m=int(rng.integers(1, max_items + 1)),
            n=int(rng.integers(1, max_bidders + 1)),
            max_value=max_value,
            kinds=kinds,
            seed=int(rng.integers(2**31)),
        )
        corpus.append(generate_instance(spec, verify=False))
    return corpus
