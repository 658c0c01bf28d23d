import random
from fractions import Fraction

import mpmath
import pytest
from conftest import arb_close

from corrheight.algebraic import INF, AlgebraicNumber, from_rational, height
from corrheight.errors import ValidationError
from corrheight.places import (
    NewtonSegment,
    enumerate_place_values,
    height_from_places,
    newton_polygon,
    product_formula_check,
    valuation,
)
from corrheight.poly import UniPoly, factor_over_rationals

mpmath.mp.dps = 60


def brute_valuation(n, q):
    v = 0
    while n % q == 0:
        n //= q
        v += 1
    return v


@pytest.mark.parametrize("n,q", [(12, 2), (3 ** 40 * 7, 3), (5, 5), (1, 7), (-(2 ** 70), 2)])
def test_valuation(n, q):
    assert valuation(n, q) == brute_valuation(abs(n), q)


def test_newton_polygon_examples():
    assert newton_polygon((-2, 0, 1), 2) == [NewtonSegment(Fraction(-1, 2), 2)]
    assert newton_polygon((-12, 0, 1), 2) == [NewtonSegment(Fraction(-1), 2)]
    # the root 3/2 has 3-adic valuation 1; with this sign convention the segment slope is -1
    assert newton_polygon((-3, 2), 3) == [NewtonSegment(Fraction(-1), 1)]


def test_newton_polygon_two_segments():
    # roots 2 and 1/3 over q = 2 and q = 3
    p = UniPoly([-2, 1]) * UniPoly([-1, 3])
    segs2 = newton_polygon(p, 2)
    assert sorted(s.slope for s in segs2) == [Fraction(-1), Fraction(0)]
    segs3 = newton_polygon(p, 3)
    assert sorted(s.slope for s in segs3) == [Fraction(0), Fraction(1)]


def test_newton_polygon_rejects_zero_constant():
    with pytest.raises(ValidationError):
        newton_polygon((0, 1, 1), 2)


def values(a):
    return {(pv.place.kind, pv.place.prime, pv.weight): float(pv.logabs.mid())
            for pv in enumerate_place_values(a)}


def test_places_of_two():
    got = enumerate_place_values(from_rational(2))
    assert [(p.place.kind, p.place.prime, p.weight) for p in got] == [("arch", 0, 1), ("finite", 2, 1)]
    assert abs(float(got[0].logabs.mid()) - 0.6931471805599453) < 1e-15
    assert abs(float(got[1].logabs.mid()) + 0.6931471805599453) < 1e-15


def test_places_of_sqrt2():
    got = enumerate_place_values(AlgebraicNumber((-2, 0, 1), 1))
    arch = [p for p in got if p.place.kind == "arch"]
    fin = [p for p in got if p.place.kind == "finite"]
    assert [p.weight for p in arch] == [Fraction(1, 2)] * 2
    assert all(abs(float(p.logabs.mid()) - 0.34657359027997264) < 1e-15 for p in arch)
    assert len(fin) == 1 and fin[0].weight == 1 and abs(float(fin[0].logabs.mid()) + 0.34657359027997264) < 1e-15


def test_places_of_three_halves():
    got = values(from_rational(Fraction(3, 2)))
    assert abs(got[("arch", 0, 1)] - 0.4054651081081644) < 1e-15
    assert abs(got[("finite", 3, 1)] + 1.0986122886681098) < 1e-15
    assert abs(got[("finite", 2, 1)] - 0.6931471805599453) < 1e-15


def test_conjugate_pair_weight():
    got = enumerate_place_values(AlgebraicNumber((1, -1, 0, 1)))
    assert sorted(p.weight for p in got if p.place.kind == "arch") == [Fraction(1, 3), Fraction(2, 3)]


@pytest.mark.parametrize("a", [from_rational(2), AlgebraicNumber((-2, 0, 1), 1),
                               AlgebraicNumber((-1, -1, 1), 0), AlgebraicNumber((3, 1, 0, 5), 0)])
def test_product_formula(a):
    total = product_formula_check(a)
    assert total.contains(0) and float(total.rad()) < 1e-30


@pytest.mark.parametrize("a,want", [
    (from_rational(2), lambda: mpmath.log(2)),
    (from_rational(Fraction(1, 3)), lambda: mpmath.log(3)),
    (AlgebraicNumber((-2, 0, 1), 0), lambda: mpmath.log(2) / 2),
])
def test_height_from_places(a, want):
    assert arb_close(height_from_places(a).ball, want())


def test_height_from_places_at_infinity_and_zero():
    assert height_from_places(INF).value == 0
    assert height_from_places(from_rational(0)).value == 0


def random_algebraic(rng, max_degree=6):
    while True:
        d = rng.randint(1, max_degree)
        coeffs = [rng.randint(-40, 40) for _ in range(d)] + [rng.choice([1, 2, 3, 4, 6, 9, 12, 25])]
        if coeffs[0] == 0:
            continue
        fac, _ = factor_over_rationals(UniPoly(coeffs))[0]
        ints = fac.primitive()[1]
        if ints[0] == 0:
            continue
        return AlgebraicNumber(ints, rng.randrange(len(ints) - 1))


def test_places_height_equals_mahler_height_random():
    rng = random.Random(20240611)
    for _ in range(40):
        a = random_algebraic(rng)
        via_places = height_from_places(a).ball
        via_mahler = height(a).ball
        assert via_places.overlaps(via_mahler)
        assert product_formula_check(a).contains(0)
