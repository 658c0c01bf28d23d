import math
from fractions import Fraction

import mpmath
import pytest
from conftest import arb_close

from corrheight.algebraic import AlgebraicNumber, from_rational
from corrheight.correspondence import kappa_bound, parse_correspondence
from corrheight.errors import ValidationError
from corrheight.heights import (
    FamilyCorrespondence,
    canonical_height,
    exact_expected_height,
    expected_height,
    expected_height_relation_check,
    hmin_hmax,
    kappa_prime,
    local_canonical_height,
    local_global_check,
    scaling_relation_check,
    shift_scaling_check,
    specialization_experiment,
    tree_continuity_check,
)
from corrheight.pathspace import ByIndex, Path, RandomWeighted

E1 = parse_correspondence("y^2 - x^3 - 1")
MONO = parse_correspondence("y^2 - x^3")
SQUARE = parse_correspondence("y - x^2")
R = from_rational
I_UNIT = AlgebraicNumber((1, 0, 1), 0)

mpmath.mp.dps = 50


def positive_branch_from_two(depth):
    # successors of a positive real 2^e on y^2 = x^3 are -2^(3e/2) and 2^(3e/2); index 1 is positive
    return Path(MONO, R(2), ByIndex((1,)))


def test_monomial_closed_form():
    res = canonical_height(positive_branch_from_two(12), 12)
    assert res.estimate.certified
    assert arb_close(res.estimate.ball, mpmath.log(2))
    assert res.radius <= 1e-4
    # every node along the way is 2^((3/2)^n) exactly
    node = Path(MONO, R(2), ByIndex((1,))).node(2)
    assert node.ints == (-(2 ** 9), 0, 0, 0, 1)


@pytest.mark.parametrize("start", [R(1), R(-1), I_UNIT, AlgebraicNumber((1, 1, 1), 0)])
def test_root_of_unity_start_has_zero_height(start):
    res = canonical_height(Path(MONO, start, RandomWeighted((5,))), 8)
    assert res.estimate.contains(Fraction(0))
    assert res.radius <= 1e-4


def test_periodic_path_has_zero_height():
    res = canonical_height(Path(E1, R(0), ByIndex((0,))), 8)
    assert res.estimate.contains(Fraction(0))
    assert res.estimate.certified


def test_radius_formula():
    k = kappa_bound(E1)
    res = canonical_height(Path(E1, R(0), ByIndex((1,))), 6, k)
    lo, hi = res.estimate.interval()
    height_half = (hi - lo) / 2 - Fraction(2, 3) ** 6 * 3 * k.exact
    # the remainder is the scaled radius of the node's own height enclosure
    assert 0 <= height_half < Fraction(1, 10 ** 30)


def test_shift_scaling_monomial():
    P = positive_branch_from_two(10)
    check = shift_scaling_check(P, 10)
    assert check["pass"]
    assert arb_close(check["left"].estimate.ball, 1.5 * mpmath.log(2))


def test_shift_scaling_rejects_identity():
    with pytest.raises(ValidationError):
        shift_scaling_check(Path(parse_correspondence("y - x"), R(2), ByIndex((0,))), 3)


def test_scaling_relation_for_prepended_loop():
    P = Path(E1, R(0), ByIndex((1,)))
    Q = Path(E1, R(0), ByIndex((0, 0) + (1,) * 12))
    assert Q.prefix(4).nodes[:4] == (R(0), R(-1), R(0), R(1))
    check = scaling_relation_check(P, Q, Fraction(4, 9), 8)
    assert check["pass"]


def test_hmin_hmax_unique_path():
    res = hmin_hmax(SQUARE, R(2))
    assert arb_close(res.hmin.ball, mpmath.log(2), slack=1e-30)
    assert arb_close(res.hmax.ball, mpmath.log(2), slack=1e-30)
    assert not res.truncated


def test_hmin_hmax_root_of_unity():
    res = hmin_hmax(MONO, R(1))
    assert res.hmin.contains(Fraction(0)) and res.hmax.contains(Fraction(0))
    assert res.hmax.radius == 0


def test_hmin_at_zero_uses_cycle():
    res = hmin_hmax(E1, R(0), node_budget=40)
    assert res.cycle_found
    assert res.hmin.value == 0 and res.hmin.radius == 0
    # the positive-branch path has hhat about 0.148 and must lie below hmax
    assert res.hmax.upper >= 0.148


def test_expected_height_matches_exhaustive_tree():
    a = R(-1)
    est = expected_height(E1, a, 4000, 5, seed=1)
    exact = float(exact_expected_height(E1, a, 5))
    assert est.stderr > 0
    assert abs(est.mean - exact) <= 3 * est.stderr


def test_expected_height_unique_path_is_exact():
    est = expected_height(SQUARE, R(2), 20, 6, seed=0)
    assert est.stderr == 0
    assert abs(est.mean - math.log(2)) < 1e-15


def test_expected_height_root_of_unity_is_zero():
    est = expected_height(MONO, I_UNIT, 50, 6, seed=0)
    assert est.mean == 0 and est.stderr == 0


def test_expected_height_is_seed_deterministic():
    a = expected_height(E1, R(0), 200, 5, seed=9)
    b = expected_height(E1, R(0), 200, 5, seed=9)
    assert (a.mean, a.stderr) == (b.mean, b.stderr)


def test_relation_closed_form():
    rep = expected_height_relation_check(MONO, R(2), 30, 6, seed=0)
    assert rep.passed
    assert abs(rep.successor_mean - 1.5 * math.log(2)) < 1e-12


def test_relation_zero_subtree():
    rep = expected_height_relation_check(MONO, R(1), 30, 5, seed=0)
    assert rep.passed and rep.successor_mean == 0 == rep.scaled_start


def test_local_heights_monomial():
    P = positive_branch_from_two(6)
    for n in range(1, 7):
        v = local_canonical_height(P, "inf", n)
        assert arb_close(v.value.ball, mpmath.log(2), slack=1e-30)
        assert local_canonical_height(P, 5, n).value.value == 0


def test_local_heights_periodic_are_zero():
    P = Path(E1, R(0), ByIndex((0,)))
    for place in ("inf", 2, 3):
        assert local_canonical_height(P, place, 6).value.value == 0


@pytest.mark.parametrize("path,depth", [
    (Path(MONO, R(2), ByIndex((1,))), 8),
    (Path(E1, R(0), ByIndex((0,))), 8),
    (Path(E1, R(0), ByIndex((1,))), 8),
    (Path(parse_correspondence("2*y^2 - x^3 - 1"), R(3), RandomWeighted((4,))), 6),
])
def test_local_global(path, depth):
    rep = local_global_check(path, depth, 1e-3)
    assert rep.passed


def test_local_global_sees_finite_places():
    C = parse_correspondence("2*y^2 - x^3 - 1")
    rep = local_global_check(Path(C, R(3), ByIndex((1,))), 4, 1e-3)
    assert "2" in rep.contributions and rep.passed


def test_tree_continuity_examples():
    P = Path(E1, R(0), ByIndex((1,)))
    Q = Path(E1, R(0), ByIndex((0,)))
    assert tree_continuity_check(P, Q, 0).status == "verified"
    assert tree_continuity_check(P, P, 3).status == "verified"
    deep = Path(E1, R(0), ByIndex((1,) * 6 + (0,)))
    rep = tree_continuity_check(P, deep, 6)
    assert rep.status == "verified"
    assert rep.bound == pytest.approx(float(2 * kappa_prime(E1) / Fraction(3, 2) ** 6))


def test_tree_continuity_requires_agreement():
    P = Path(E1, R(0), ByIndex((1,)))
    Q = Path(E1, R(0), ByIndex((0,)))
    with pytest.raises(ValidationError):
        tree_continuity_check(P, Q, 2)


def test_family_specialize():
    fam = FamilyCorrespondence("y^2 - x^3 - t")
    assert fam.generic_alpha() == Fraction(3, 2)
    C = fam.specialize(5)
    assert C.F == parse_correspondence("y^2 - x^3 - 5").F


def test_specialization_root_of_unity_rows():
    table = specialization_experiment("y^2 - x^3 - t", 1, (1,), [0], 6)
    assert table.rows[0].hhat.estimate.contains(Fraction(0))


def test_specialization_constant_family_ratio_shrinks():
    table = specialization_experiment("y^2 - x^3 - 1 + 0*t", 2, (1,), [2, 4, 8, 16], 5)
    ratios = [row.ratio for row in table.rows]
    assert all(b < a for a, b in zip(ratios, ratios[1:]))


def test_specialization_skips_degenerate_fibres():
    # at t = 0 the family factors with a repeated component
    table = specialization_experiment("y^2 - t*x^3 - 1", 0, (0,), [0, 1], 4)
    assert [str(t) for t, _ in table.skipped] == ["0"]
    assert len(table.rows) == 1
