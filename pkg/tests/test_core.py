import json
import math
import random
from fractions import Fraction

import pytest

from nswlp import (
    Allocation,
    EmptyInstance,
    NegativeValue,
    OverlappingBundles,
    WeightSumError,
    check_ef1,
    log_nsw,
    make_instance,
    nsw,
    scale_values,
    validate,
)
from nswlp import jsonio
from conftest import ef1_by_quantifiers


def test_validate_minimal_instance():
    validate(make_instance(["1"], [[5]]))


def test_validate_weight_sum():
    with pytest.raises(WeightSumError):
        validate(make_instance(["1/2", "1/3"], [[1], [1]]))


def test_validate_negative_value():
    with pytest.raises(NegativeValue):
        validate(make_instance(["1"], [[-1]]))


def test_validate_negative_weight():
    with pytest.raises(NegativeValue):
        validate(make_instance(["-1", "2"], [[1], [1]]))


def test_validate_empty():
    with pytest.raises(EmptyInstance):
        validate(make_instance([], []))


def test_log_nsw_single_agent():
    inst = make_instance(["1"], [[5]])
    assert log_nsw(inst, Allocation((0,))) == pytest.approx(math.log(5))


def test_log_nsw_geometric_mean():
    inst = make_instance(["1/2", "1/2"], [[4, 0], [0, 9]])
    lw = log_nsw(inst, Allocation((0, 1)))
    assert lw == pytest.approx(0.5 * math.log(4) + 0.5 * math.log(9))
    assert nsw(inst, Allocation((0, 1))) == pytest.approx(6.0)


def test_log_nsw_zero_weight_agent_is_ignored():
    inst = make_instance(["1", "0"], [[3, 0], [0, 7]])
    assert log_nsw(inst, Allocation((0, None))) == pytest.approx(math.log(3))


def test_log_nsw_worthless_bundle_is_minus_infinity():
    inst = make_instance(["1/2", "1/2"], [[2, 0], [0, 2]])
    assert log_nsw(inst, Allocation((0, None))) == -math.inf
    assert nsw(inst, Allocation((0, None))) == 0.0


def test_nsw_two_identical_items():
    inst = make_instance(["1/2", "1/2"], [[2, 2], [2, 2]])
    assert nsw(inst, Allocation((0, 1))) == pytest.approx(2.0)


def test_scale_values_divides_by_min_positive():
    inst = make_instance(["1"], [["0.5", "2", "0"]])
    scaled = scale_values(inst)
    assert scaled.agents[0].values == (Fraction(1), Fraction(4), Fraction(0))
    assert scaled.scales == (Fraction(1, 2),)


def test_scale_values_non_integer_ratio():
    inst = make_instance(["1"], [[3, 7]])
    scaled = scale_values(inst)
    assert scaled.agents[0].values == (Fraction(1), Fraction(7, 3))
    assert scaled.scales == (Fraction(3),)


def test_scale_values_all_zero_row_unchanged():
    inst = make_instance(["1/2", "1/2"], [[0, 0], [1, 2]])
    scaled = scale_values(inst)
    assert scaled.agents[0].values == (Fraction(0), Fraction(0))
    assert scaled.scales[0] == 1


def test_scale_values_preserves_log_nsw():
    rng = random.Random(4)
    for _ in range(40):
        n, m = rng.randint(1, 3), rng.randint(1, 5)
        weights = [Fraction(1, n)] * n
        values = [[rng.randint(0, 8) for _ in range(m)] for _ in range(n)]
        inst = make_instance(weights, values)
        scaled = scale_values(inst)
        for _ in range(2):
            owner = tuple(rng.choice([None] + list(range(n))) for _ in range(m))
            a = Allocation(owner)
            lw = log_nsw(inst, a)
            lw_scaled = log_nsw(scaled, a)
            if lw == -math.inf:
                assert lw_scaled == -math.inf
            else:
                assert lw_scaled == pytest.approx(lw, abs=1e-12)


def test_log_nsw_permutation_equivariance():
    rng = random.Random(11)
    for _ in range(25):
        n, m = rng.randint(1, 3), rng.randint(1, 5)
        weights = [Fraction(1, n)] * n
        values = [[rng.randint(0, 9) for _ in range(m)] for _ in range(n)]
        inst = make_instance(weights, values)
        owner = tuple(rng.randrange(n) for _ in range(m))
        perm_items = list(range(m))
        rng.shuffle(perm_items)
        perm_agents = list(range(n))
        rng.shuffle(perm_agents)
        values2 = [
            [values[perm_agents[i]][perm_items[j]] for j in range(m)]
            for i in range(n)
        ]
        weights2 = [weights[perm_agents[i]] for i in range(n)]
        inst2 = make_instance(weights2, values2)
        inv_agent = {perm_agents[i]: i for i in range(n)}
        owner2 = tuple(inv_agent[owner[perm_items[j]]] for j in range(m))
        a, b = log_nsw(inst, Allocation(owner)), log_nsw(inst2, Allocation(owner2))
        if a == -math.inf:
            assert b == -math.inf
        else:
            assert b == pytest.approx(a, abs=1e-12)


def test_nsw_matches_exp_of_log():
    rng = random.Random(3)
    for _ in range(50):
        n, m = rng.randint(1, 3), rng.randint(1, 5)
        inst = make_instance(
            [Fraction(1, n)] * n,
            [[rng.randint(1, 9) for _ in range(m)] for _ in range(n)],
        )
        owner = tuple(rng.randrange(n) for _ in range(m))
        a = Allocation(owner)
        assert nsw(inst, a) == pytest.approx(math.exp(log_nsw(inst, a)), rel=1e-12)


# -- EF1 -------------------------------------------------------------------


def test_ef1_examples():
    assert check_ef1([3, 2, 1], [[0], [1, 2]]) is True
    assert check_ef1([1, 1, 1, 1], [[], [0, 1, 2, 3]]) is False
    assert check_ef1([5, 1, 1, 1], [[0], [1, 2, 3]]) is True


def test_ef1_overlap_rejected():
    with pytest.raises(OverlappingBundles):
        check_ef1([1, 1], [[0], [0, 1]])
    assert check_ef1([1, 1], [[0], [0, 1]], require_disjoint=False) is True


def test_ef1_matches_quantifier_oracle():
    rng = random.Random(8)
    for _ in range(300):
        m = rng.randint(1, 8)
        values = [rng.randint(0, 6) for _ in range(m)]
        k = rng.randint(1, 3)
        assign = [rng.randrange(k + 1) for _ in range(m)]  # k+1 = leave out
        bundles = [[j for j in range(m) if assign[j] == b] for b in range(k)]
        assert check_ef1(values, bundles) == ef1_by_quantifiers(values, bundles)


# -- JSON ------------------------------------------------------------------


def test_instance_json_roundtrip():
    inst = make_instance(["1/3", "2/3"], [["0.25", "4"], ["1/7", "0"]])
    obj = jsonio.instance_to_obj(inst)
    assert obj["agents"][0]["weight"] == "1/3"
    assert obj["agents"][0]["values"] == ["1/4", "4"]
    back = jsonio.instance_from_obj(json.loads(json.dumps(obj)))
    assert back == inst


def test_instance_json_accepts_decimal_and_fraction_notation():
    obj = {
        "num_items": 2,
        "agents": [
            {"weight": "0.5", "values": ["1/2", "3"]},
            {"weight": "1/2", "values": ["0.125", "0"]},
        ],
    }
    inst = jsonio.instance_from_obj(obj)
    assert inst.agents[0].weight == Fraction(1, 2)
    assert inst.agents[1].values[0] == Fraction(1, 8)


def test_allocation_json_roundtrip():
    alloc = Allocation((1, None, 0))
    obj = jsonio.allocation_to_obj(alloc)
    assert obj == {"owner": [1, None, 0]}
    assert jsonio.allocation_from_obj(obj) == alloc


def test_malformed_instance_rejected():
    from nswlp import InvalidInstance

    with pytest.raises(InvalidInstance):
        jsonio.instance_from_obj({"num_items": 2, "agents": [{"weight": "1", "values": ["1"]}]})
    with pytest.raises(InvalidInstance):
        jsonio.instance_from_obj({"agents": []})
    with pytest.raises(InvalidInstance):
        jsonio.instance_from_obj({"num_items": 1, "agents": [{"weight": "x/y", "values": ["1"]}]})
