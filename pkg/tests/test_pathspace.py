import math
from fractions import Fraction

import pytest

from corrheight.algebraic import INF, AlgebraicNumber, from_rational
from corrheight.correspondence import parse_correspondence
from corrheight.errors import BudgetExceeded, ValidationError
from corrheight.pathspace import (
    All,
    ByIndex,
    Path,
    PathPrefix,
    RandomWeighted,
    extend,
    is_periodic,
    is_repetitive,
    rational_path_search,
    rationals_up_to_height,
    repetitive_start_search,
    sample_path,
)

E1 = parse_correspondence("y^2 - x^3 - 1")
E2 = parse_correspondence("y^2 - x^3 + x - 1")
R = from_rational
SQRT2 = AlgebraicNumber((-2, 0, 1), 1)


def prefix(C, *nodes):
    return PathPrefix(C, tuple(nodes), (1,) * (len(nodes) - 1))


def test_shift():
    p = prefix(E1, R(0), R(1), SQRT2)
    assert p.shift().nodes == (R(1), SQRT2)
    assert p.shift().shift().length == 0
    with pytest.raises(ValidationError):
        prefix(E1, R(0)).shift()


def test_extend_all_one_step():
    level = extend(prefix(E1, R(0)), All(), 1)
    assert sorted(p.nodes[-1].as_fraction() for p in level) == [-1, 1]
    assert all(p.probability() == Fraction(1, 2) for p in level)


def test_extend_forced_double_edge():
    level = extend(prefix(E1, R(-1)), All(), 1)
    assert len(level) == 1 and level[0].nodes[-1] == R(0) and level[0].multiplicities == (2,)
    assert level[0].probability() == 1


def test_extend_by_index_is_deterministic():
    a = extend(prefix(E1, R(0)), ByIndex((0,)), 8)
    b = extend(prefix(E1, R(0)), ByIndex((0,)), 8)
    assert len(a) == 1 and a[0].length == 8 and a[0].nodes == b[0].nodes


def test_tree_probabilities_sum_to_one():
    level = extend(prefix(E1, R(0)), All(), 3)
    assert sum(p.probability() for p in level) == 1


def test_repetitive_examples():
    assert is_repetitive(prefix(E1, R(0), R(-1), R(0))) == (0, 2)
    assert is_repetitive(prefix(E1, R(0), R(1), SQRT2)) is None
    assert is_repetitive(prefix(E2, R(1), R(1))) == (0, 1)


def test_periodic_examples():
    assert is_periodic(prefix(E1, R(0), R(-1), R(0), R(-1), R(0))) == (0, 2)
    assert is_periodic(prefix(E1, R(0), R(-1), R(0), R(1))) is None
    assert is_periodic(prefix(E1, R(5))) is None


def test_path_lazy_nodes_and_shift_share_storage():
    P = Path(E1, R(0), ByIndex((1,)))
    assert P.node(2) == SQRT2
    Q = P.shift()
    assert Q.node(1) == SQRT2 and Q.start == R(1)


def test_pad_versus_cycle():
    pad = Path(E1, R(0), ByIndex((0, 0, 1), "pad")).prefix(6)
    cyc = Path(E1, R(0), ByIndex((0, 0, 1), "cycle")).prefix(6)
    # steps 3 and 4 use index 0 either way; step 5 uses 0 (pad) or 1 (cycle)
    assert pad.nodes[:4] == (R(0), R(-1), R(0), R(1))
    assert pad.nodes[:6] == cyc.nodes[:6]
    assert pad.nodes[6] != cyc.nodes[6]


def test_sample_path_forced_and_infinite():
    for seed in range(5):
        assert sample_path(E1, R(-1), 1, seed).nodes == (R(-1), R(0))
        assert sample_path(E2, INF, 3, seed).nodes == (INF,) * 4


def test_sample_path_branch_frequencies():
    # seeds 0..9999 as a fixed, pre-declared block
    n = 10000
    ones = sum(sample_path(E1, R(0), 1, s).nodes[1] == R(1) for s in range(n))
    sigma = math.sqrt(n * 0.25)
    assert abs(ones - n / 2) <= 3 * sigma


def test_sample_path_branch_frequencies_large_block():
    n = 400000
    ones = sum(sample_path(E1, R(0), 1, s).nodes[1] == R(1) for s in range(n))
    assert abs(ones - n / 2) <= 3 * math.sqrt(n * 0.25)


def test_random_strategy_is_order_independent():
    a = Path(E1, R(0), RandomWeighted((3, 9))).prefix(4)
    b = Path(E1, R(0), RandomWeighted((3, 9)))
    b.node(2)
    assert b.prefix(4).nodes == a.nodes


def test_rationals_up_to_height_counts():
    # brute force over the box |p|, q <= N
    for N in (1, 2, 5, 10):
        got = rationals_up_to_height(math.log(N))
        brute = {Fraction(p, q) for q in range(1, N + 1) for p in range(-N, N + 1)
                 if math.gcd(p, q) == 1 or p == 0}
        assert len(got) == len(set(got)) == len(brute)
        assert set(got) == brute


def test_rational_search_depth_one_includes_integral_points():
    res = rational_path_search(E2, math.log(100), 1)
    for r in (-1, 0, 1, 3, 5, 56):
        assert Fraction(r) in res.starts


def test_rational_search_identity_keeps_everything():
    res = rational_path_search(parse_correspondence("y - x"), math.log(10), 10)
    assert sorted(res.starts) == sorted(rationals_up_to_height(math.log(10)))


def test_repetitive_search_examples():
    got = repetitive_start_search(E1, math.log(10), 4)
    rationals = {p.as_fraction() for p in got.points if p is not INF and p.is_rational}
    assert {0, -1} <= rationals
    got2 = repetitive_start_search(E2, math.log(10), 4)
    assert Fraction(1) in {p.as_fraction() for p in got2.points if p is not INF and p.is_rational}
    assert repetitive_start_search(parse_correspondence("y - x + 1"), math.log(10), 6).points == []


def test_repetitive_search_budget_keeps_partial_results():
    with pytest.raises(BudgetExceeded) as info:
        repetitive_start_search(E1, math.log(10), 6, node_budget=5)
    assert info.value.partial is not None
