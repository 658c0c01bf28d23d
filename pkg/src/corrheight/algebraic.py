"""Exact algebraic numbers and their Weil heights.

An :class:`AlgebraicNumber` is an irreducible integer polynomial together
with the index of one of its roots in a canonical, cached list of certified
root boxes.  Two numbers are equal exactly when they share the polynomial and
the index, which is decided by certified isolation rather than by comparing
floating-point approximations.
"""

import math
from fractions import Fraction
from functools import lru_cache

import flint

from .errors import PrecisionExhausted
from .poly import UniPoly
from .roots import DEFAULT_PRECISION, ComplexBox, arb_to_fraction, refine_box, roots_of_squarefree

HEIGHT_PRECISION = 128


# ---------------------------------------------------------------------------
# real enclosures


def _round_up(x):
    return math.nextafter(x, math.inf) if math.isfinite(x) else x


def log_plus(L):
    """Enclosure of ``max(0, L)`` for an ``arb`` enclosure ``L``."""
    if L.lower() >= 0:
        return L
    if L.upper() <= 0:
        return flint.arb(0)
    return flint.arb(0).union(L.upper())


class HeightEstimate:
    """A real enclosure ``value +- radius`` with a certification flag.

    When ``certified`` is true the true quantity lies in the closed interval
    ``[lower, upper]``.  Heuristic estimates carry the same fields but make
    no such promise.

    ``ball`` is always present.  Estimates built by :meth:`from_center` also
    keep an exact rational centre and half-width; ``arb`` stores radii with a
    30-bit mantissa, so the exact pair gives the tighter statement and is
    used whenever it is available.
    """

    __slots__ = ("ball", "certified", "center", "half_width")

    def __init__(self, ball, certified=True, center=None, half_width=None):
        self.ball = ball if isinstance(ball, flint.arb) else flint.arb(ball)
        self.certified = bool(certified)
        self.center = center
        self.half_width = half_width

    @classmethod
    def exact(cls, value):
        value = Fraction(value)
        return cls.from_center(value, Fraction(0))

    @classmethod
    def from_center(cls, center, half_width, certified=True):
        center, half_width = Fraction(center), Fraction(half_width)
        with flint.ctx.workprec(HEIGHT_PRECISION):
            ball = flint.arb(_fmpq(center)) + flint.arb(0, _fmpq(half_width))
        return cls(ball, certified, center, half_width)

    @classmethod
    def from_interval(cls, lo, hi, certified=True):
        lo, hi = Fraction(lo), Fraction(hi)
        return cls.from_center((lo + hi) / 2, (hi - lo) / 2, certified)

    @property
    def is_exact(self):
        return self.center is not None

    def interval(self):
        """Exact rational endpoints ``(lo, hi)``."""
        if self.is_exact:
            return self.center - self.half_width, self.center + self.half_width
        mid = arb_to_fraction(self.ball.mid())
        rad = arb_to_fraction(self.ball.rad())
        return mid - rad, mid + rad

    @property
    def value(self):
        if self.is_exact:
            return float(self.center)
        return float(self.ball.mid())

    @property
    def radius(self):
        """Float half-width about :attr:`value`, rounded up so it still encloses."""
        lo, hi = self.interval()
        v = Fraction(self.value)
        r = max(hi - v, v - lo)
        f = float(r)
        if Fraction(f) < r:
            f = _round_up(f)
        return f

    @property
    def lower(self):
        lo = self.interval()[0]
        f = float(lo)
        return math.nextafter(f, -math.inf) if Fraction(f) > lo else f

    @property
    def upper(self):
        hi = self.interval()[1]
        f = float(hi)
        return _round_up(f) if Fraction(f) < hi else f

    def contains(self, x):
        if isinstance(x, HeightEstimate):
            lo, hi = self.interval()
            xlo, xhi = x.interval()
            return lo <= xlo and xhi <= hi
        if isinstance(x, (int, Fraction)):
            lo, hi = self.interval()
            return lo <= x <= hi
        return self.ball.contains(x)

    def overlaps(self, other):
        lo, hi = self.interval()
        if isinstance(other, HeightEstimate):
            olo, ohi = other.interval()
        else:
            olo = arb_to_fraction(other.lower())
            ohi = arb_to_fraction(other.upper())
        return lo <= ohi and olo <= hi

    def _combine(self, other, sign):
        certified = self.certified and other.certified
        if self.is_exact and other.is_exact:
            return HeightEstimate.from_center(self.center + sign * other.center,
                                              self.half_width + other.half_width, certified)
        with flint.ctx.workprec(HEIGHT_PRECISION):
            ball = self.ball + other.ball if sign > 0 else self.ball - other.ball
        return HeightEstimate(ball, certified)

    def __add__(self, other):
        if not isinstance(other, HeightEstimate):
            other = HeightEstimate.exact(other) if isinstance(other, (int, Fraction)) else HeightEstimate(other)
        return self._combine(other, 1)

    def __sub__(self, other):
        if not isinstance(other, HeightEstimate):
            other = HeightEstimate.exact(other) if isinstance(other, (int, Fraction)) else HeightEstimate(other)
        return self._combine(other, -1)

    def scale(self, factor):
        factor = Fraction(factor)
        if self.is_exact:
            return HeightEstimate.from_center(self.center * factor, self.half_width * abs(factor),
                                              self.certified)
        with flint.ctx.workprec(HEIGHT_PRECISION):
            return HeightEstimate(self.ball * _fmpq(factor), self.certified)

    def widen(self, amount):
        """Add ``[-amount, amount]`` to the enclosure."""
        amount = Fraction(amount)
        if self.is_exact:
            return HeightEstimate.from_center(self.center, self.half_width + amount, self.certified)
        with flint.ctx.workprec(HEIGHT_PRECISION):
            return HeightEstimate(self.ball + flint.arb(0, _fmpq(amount)), self.certified)

    def exactly(self):
        """The same enclosure with an exact centre and half-width."""
        if self.is_exact:
            return self
        lo, hi = self.interval()
        return HeightEstimate.from_interval(lo, hi, self.certified)

    def __repr__(self):
        tag = "certified" if self.certified else "heuristic"
        return f"HeightEstimate({self.value:.12g} +- {self.radius:.3g}, {tag})"

    def to_record(self):
        return {"mid": self.value, "rad": self.radius, "certified": self.certified}


def _fmpq(f):
    return flint.fmpq(f.numerator, f.denominator)


# ---------------------------------------------------------------------------
# points


@lru_cache(maxsize=4096)
def canonical_roots(ints):
    """Cached certified boxes for every root of the irreducible ``ints``."""
    if len(ints) == 2:
        return (ComplexBox.point(Fraction(-ints[0], ints[1])),)
    return tuple(roots_of_squarefree(ints, DEFAULT_PRECISION))


def _normalize(ints):
    ints = list(ints)
    while ints and ints[-1] == 0:
        ints.pop()
    g = 0
    for v in ints:
        g = math.gcd(g, v)
    if ints[-1] < 0:
        g = -g
    return tuple(v // g for v in ints)


class Infinity:
    """The point at infinity of the projective line."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    is_infinite = True
    is_rational = True
    degree = 1

    def __repr__(self):
        return "inf"

    def render(self):
        return "inf"

    def sort_key(self):
        return (2, 0.0, 0.0, ())

    def __reduce__(self):
        return (Infinity, ())


INF = Infinity()


class AlgebraicNumber:
    """A root of an irreducible primitive integer polynomial with positive lc."""

    __slots__ = ("ints", "index", "_hash")

    is_infinite = False

    def __init__(self, ints, index=0):
        self.ints = tuple(int(v) for v in ints)
        self.index = index
        self._hash = hash((self.ints, self.index))

    @classmethod
    def from_rational(cls, r):
        r = Fraction(r)
        return cls((-r.numerator, r.denominator), 0)

    @classmethod
    def from_box(cls, minpoly, box, budget=None):
        """Locate the canonical root of ``minpoly`` inside the certified ``box``."""
        ints = _normalize(minpoly.primitive()[1] if isinstance(minpoly, UniPoly) else minpoly)
        canon = canonical_roots(ints)
        if len(canon) == 1:
            return cls(ints, 0)
        candidates = [i for i, b in enumerate(canon) if b.overlaps(box)]
        width = box.width
        refined = {i: canon[i] for i in candidates}
        while len(candidates) != 1:
            if not candidates:
                raise PrecisionExhausted("box does not meet any root of its polynomial")
            width = width / (1 << 32)
            box = refine_box(ints, box, width, budget)
            for i in candidates:
                refined[i] = refine_box(ints, refined[i], width, budget)
            candidates = [i for i in candidates if refined[i].overlaps(box)]
        return cls(ints, candidates[0])

    @property
    def minpoly(self):
        return UniPoly(self.ints)

    @property
    def degree(self):
        return len(self.ints) - 1

    @property
    def is_rational(self):
        return len(self.ints) == 2

    def as_fraction(self):
        if not self.is_rational:
            raise ValueError("not a rational number")
        return Fraction(-self.ints[0], self.ints[1])

    @property
    def box(self):
        return canonical_roots(self.ints)[self.index]

    def refined_box(self, width, budget=None):
        return refine_box(self.ints, self.box, width, budget)

    def approx(self):
        if self.is_rational:
            return complex(float(self.as_fraction()), 0.0)
        return self.box.midpoint()

    def to_acb(self, width=None):
        box = self.box if width is None else self.refined_box(width)
        return box.to_acb()

    def __eq__(self, other):
        return isinstance(other, AlgebraicNumber) and self.ints == other.ints and self.index == other.index

    def __hash__(self):
        return self._hash

    def sort_key(self):
        z = self.approx()
        return (round(z.real, 12), round(z.imag, 12), self.ints, self.index)

    def render(self):
        if self.is_rational:
            f = self.as_fraction()
            return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"
        z = self.approx()
        approx = f"{z.real:.10g}" if z.imag == 0 else f"{z.real:.10g}{z.imag:+.10g}j"
        return f"root({self.minpoly.to_text()}, {approx})"

    def __repr__(self):
        return self.render()

    def __reduce__(self):
        return (AlgebraicNumber, (self.ints, self.index))


def from_rational(r):
    """Degree-one algebraic number with minimal polynomial ``q*x - p``."""
    return AlgebraicNumber.from_rational(r)


def equals(a, b):
    """Certified equality of projective points."""
    if a is INF or b is INF:
        return a is b
    return a == b


def conjugate_boxes(a, precision=DEFAULT_PRECISION, budget=None):
    """One certified box per root of the minimal polynomial, in canonical order."""
    if a.is_rational:
        return [ComplexBox.point(a.as_fraction(), precision)]
    if precision <= DEFAULT_PRECISION:
        return list(canonical_roots(a.ints))
    return roots_of_squarefree(a.ints, precision, budget)


def _mahler_log(ints, boxes, prec):
    with flint.ctx.workprec(prec):
        total = flint.arb(abs(ints[-1])).log()
        for b in boxes:
            z = b.to_acb()
            m = abs(z)
            if m.upper() <= 1:
                continue
            if m.lower() <= 0:
                total += flint.arb(0).union(flint.arb(m.upper()).log())
                continue
            total += log_plus(m.log())
        return total


@lru_cache(maxsize=8192)
def _height_ball(ints, precision):
    if len(ints) == 2:
        with flint.ctx.workprec(HEIGHT_PRECISION):
            return flint.arb(max(abs(ints[0]), abs(ints[1]))).log()
    if ints[-1] == 1 and flint.fmpz_poly(list(ints)).is_cyclotomic():
        # roots of unity have height exactly 0
        return flint.arb(0)
    boxes = conjugate_boxes(AlgebraicNumber(ints), precision)
    with flint.ctx.workprec(HEIGHT_PRECISION):
        return _mahler_log(ints, boxes, HEIGHT_PRECISION) / (len(ints) - 1)


def height(a, precision=DEFAULT_PRECISION):
    """Certified Weil height ``(log|lc| + sum log+|root|) / degree``; ``h(inf) = 0``.

    A larger ``precision`` tightens the enclosure.
    """
    if a is INF:
        return HeightEstimate(flint.arb(0), True)
    return HeightEstimate(_height_ball(a.ints, precision), True)


def mahler_measure_log(p, precision=DEFAULT_PRECISION):
    """``log M(p)`` for a squarefree integer polynomial, as an ``arb``."""
    ints = _normalize(p.primitive()[1] if isinstance(p, UniPoly) else p)
    content = p.primitive()[0] if isinstance(p, UniPoly) else 1
    boxes = roots_of_squarefree(ints, precision) if len(ints) > 2 else [
        ComplexBox.point(Fraction(-ints[0], ints[1]))]
    with flint.ctx.workprec(HEIGHT_PRECISION):
        ball = _mahler_log(ints, boxes, HEIGHT_PRECISION)
        if content != 1:
            ball += flint.arb(flint.fmpq(abs(content.numerator), content.denominator)).log()
        return ball
