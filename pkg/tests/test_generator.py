import pytest

from walras.demand import is_gross_substitute
from walras.errors import CapExceededError, InstanceError
from walras.generator import GeneratorSpec, generate_corpus, generate_instance
from walras.instance import ValuationKind, validate


def test_same_spec_same_instance():
    spec = GeneratorSpec(m=3, n=3, max_value=4, seed=11)
    assert generate_instance(spec) == generate_instance(spec)


def test_kinds_and_value_range():
    inst = generate_instance(GeneratorSpec(m=3, n=4, max_value=2, kinds="additive", seed=5))
    assert inst.n == 4 and inst.m == 3
    assert all(v.kind is ValuationKind.ADDITIVE for v in inst.bidders)
    assert all(0 <= x <= 2 for v in inst.bidders for x in v.item_values)


def test_generated_unit_demand_is_well_formed():
    inst = generate_instance(GeneratorSpec(m=2, n=2, kinds="unit_demand", seed=1), verify=True)
    assert validate(inst).well_formed
    assert all(is_gross_substitute(v).holds for v in inst.bidders)


@pytest.mark.parametrize(
    "kwargs, error",
    [
        ({"m": 0, "n": 1}, CapExceededError),
        ({"m": 2, "n": 17}, CapExceededError),
        ({"m": 2, "n": 1, "max_value": -1}, InstanceError),
        ({"m": 2, "n": 1, "kinds": "table"}, InstanceError),
    ],
)
def test_spec_validation(kwargs, error):
    with pytest.raises(error):
        GeneratorSpec(**kwargs)


def test_corpus_shape():
    corpus = generate_corpus(8, seed=3, max_items=2, max_bidders=3, max_value=2)
    assert len(corpus) == 8
    assert all(1 <= inst.m <= 2 and 1 <= inst.n <= 3 for inst in corpus)
    assert corpus == generate_corpus(8, seed=3, max_items=2, max_bidders=3, max_value=2)
