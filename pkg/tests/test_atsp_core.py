import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from modulift.atsp_core import (
    AtspInstance,
    OracleRangeError,
    Tour,
    TsplibError,
    all_tours,
    exact_optimum,
    format_tsplib,
    parse_tsplib,
    random_instance,
    ranked_tours,
    tour_cost,
    validate_tour,
)

THREE = """NAME: three
TYPE: ATSP
DIMENSION: 3
EDGE_WEIGHT_TYPE: EXPLICIT
EDGE_WEIGHT_FORMAT: FULL_MATRIX
EDGE_WEIGHT_SECTION
0 2 9
1 0 6
15 7 0
EOF
"""


@pytest.fixture
def three():
    return parse_tsplib(THREE)


def test_parse_maps_fields(three):
    assert three.n == 3
    assert three.name == "three"
    assert three.cost(0, 1) == 2
    assert three.cost(2, 0) == 15
    assert three.num_arcs == 6


def test_parse_rejects_euc_2d():
    text = THREE.replace("EXPLICIT", "EUC_2D")
    with pytest.raises(TsplibError, match="unsupported weight type"):
        parse_tsplib(text)


def test_parse_rejects_other_format():
    with pytest.raises(TsplibError, match="unsupported weight format"):
        parse_tsplib(THREE.replace("FULL_MATRIX", "UPPER_ROW"))


def test_parse_rejects_zero_cost():
    with pytest.raises(TsplibError, match="non-positive cost"):
        parse_tsplib(THREE.replace("1 0 6", "0 0 6"))


def test_parse_rejects_short_matrix():
    with pytest.raises(TsplibError, match="dimension mismatch"):
        parse_tsplib(THREE.replace("15 7 0\n", "15 7\n"))


def test_tsplib_round_trip():
    inst = random_instance(7, 1, 500, 99)
    again = parse_tsplib(format_tsplib(inst))
    assert again == inst


def test_random_instance_deterministic():
    assert random_instance(4, 1, 100, 7) == random_instance(4, 1, 100, 7)
    assert random_instance(4, 1, 100, 7) != random_instance(4, 1, 100, 8)


@pytest.mark.parametrize("args", [(2, 1, 100, 0), (4, 0, 10, 0), (4, 10, 5, 0)])
def test_random_instance_rejects(args):
    with pytest.raises(ValueError):
        random_instance(*args)


def test_constant_costs_every_tour_optimal():
    inst = random_instance(6, 5, 5, 1)
    assert {tour_cost(inst, t) for t in all_tours(6)} == {30}
    assert exact_optimum(inst).optimal_cost == 30


def test_tour_cost_hand_sums(three):
    assert tour_cost(three, Tour.from_labels("1,2,3")) == 23
    assert tour_cost(three, Tour.from_labels("1,3,2")) == 17


def test_exact_optimum_three(three):
    for method in ("held_karp", "brute_force"):
        res = exact_optimum(three, method)
        assert res.optimal_cost == 17
        assert res.optimal_tour.labels() == [1, 3, 2]
        assert res.method == method


def test_sparse_missing_arc():
    arcs = {(0, 1), (1, 2), (2, 0), (1, 0)}
    costs = [[None, 1, None], [3, None, 4], [5, None, None]]
    inst = AtspInstance("sparse", costs, arcs)
    assert inst.num_arcs == 4
    assert tour_cost(inst, Tour((0, 1, 2))) == 10
    with pytest.raises(ValueError, match="missing arc"):
        tour_cost(inst, Tour((0, 2, 1)))
    assert exact_optimum(inst).optimal_cost == 10


def test_instance_rejects_bad_data():
    with pytest.raises(ValueError):
        AtspInstance("x", [[0, 1], [1, 0]])
    with pytest.raises(ValueError, match="non-positive"):
        AtspInstance("x", [[0, 1, -2], [1, 0, 1], [1, 1, 0]])


def test_rational_costs_stay_exact():
    inst = AtspInstance("q", [[0, Fraction(1, 3), 1], [1, 0, Fraction(1, 6)], [Fraction(1, 2), 1, 0]])
    assert tour_cost(inst, Tour((0, 1, 2))) == 1


def test_oracle_limits():
    with pytest.raises(OracleRangeError, match="oracle out of range"):
        exact_optimum(random_instance(11, 1, 9, 0), "brute_force")
    with pytest.raises(OracleRangeError):
        exact_optimum(random_instance(15, 1, 9, 0))


def test_validate_passes_tour(three):
    assert validate_tour(three, Tour((0, 2, 1)))


def test_validate_two_cycles():
    inst = random_instance(4, 1, 9, 3)
    x = {(0, 1): 1, (1, 0): 1, (2, 3): 1, (3, 2): 1}
    res = validate_tour(inst, x)
    assert not res.ok
    assert res.constraint == "subtour"
    assert set(res.subset) == {0, 1}


def test_validate_out_degree():
    inst = random_instance(4, 1, 9, 3)
    x = {(0, 1): 1, (0, 2): 1, (1, 2): 1, (2, 3): 1, (3, 0): 1}
    res = validate_tour(inst, x)
    assert res.constraint == "out_degree"
    assert res.vertex == 0


def test_validate_in_degree():
    inst = random_instance(4, 1, 9, 3)
    x = {(0, 1): 1, (1, 2): 1, (2, 1): 1, (3, 0): 1}
    res = validate_tour(inst, x)
    assert res.constraint == "in_degree"


def test_ranked_tours_second_best():
    inst = random_instance(5, 1, 100, 42)
    ranked = ranked_tours(inst)
    assert len(ranked) == 24
    assert ranked[0][0] == exact_optimum(inst).optimal_cost
    assert ranked[1][0] >= ranked[0][0]


@settings(max_examples=40, deadline=None)
@given(n=st.integers(4, 8), seed=st.integers(0, 2**32))
def test_held_karp_matches_brute_force(n, seed):
    inst = random_instance(n, 1, 60, seed)
    hk = exact_optimum(inst, "held_karp")
    bf = exact_optimum(inst, "brute_force")
    assert hk.optimal_cost == bf.optimal_cost
    assert tour_cost(inst, hk.optimal_tour) == hk.optimal_cost


@settings(max_examples=40, deadline=None)
@given(n=st.integers(3, 8), seed=st.integers(0, 2**16), shift=st.integers(0, 7))
def test_cost_invariant_under_rotation(n, seed, shift):
    inst = random_instance(n, 1, 100, seed)
    order = list(range(n))
    random.Random(seed).shuffle(order)
    k = shift % n
    assert tour_cost(inst, Tour(tuple(order))) == tour_cost(inst, Tour(tuple(order[k:] + order[:k])))


def test_reversal_changes_cost(three):
    t = Tour((0, 1, 2))
    assert tour_cost(three, t) != tour_cost(three, t.reversed())


def test_validation_agrees_with_permutations():
    """Exactly the (n-1)! Hamiltonian cycles pass among all perfect assignments."""
    n = 5
    inst = random_instance(n, 1, 9, 0)
    passing = 0
    for perm in itertools.permutations(range(n)):
        if any(perm[v] == v for v in range(n)):
            continue
        x = {(v, perm[v]): 1 for v in range(n)}
        passing += bool(validate_tour(inst, x))
    assert passing == 24
