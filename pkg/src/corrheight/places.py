"""Places of the field generated by an algebraic number.

Archimedean places come from the complex embeddings: a real root carries
weight ``1/d`` and a conjugate pair is listed once with weight ``2/d``.
Finite places above a prime ``q`` are read off the Newton polygon of the
minimal polynomial.  All places on one segment share the same absolute
value, so each segment is reported as a single packet whose weight is the
segment length over the degree.

Sign convention: a segment of slope ``s`` (rise over run on the points
``(i, v_q(c_i))``) holds roots of valuation ``-s``, so ``log|a|_q = s*log q``.
For ``a = 2`` at ``q = 2`` the single segment has slope ``-1`` and the value
is ``-log 2``.
"""

from dataclasses import dataclass
from fractions import Fraction

import flint

from .algebraic import INF, HeightEstimate, conjugate_boxes, log_plus
from .errors import ValidationError

WORK_PRECISION = 128


@dataclass(frozen=True)
class NewtonSegment:
    slope: Fraction
    length: int


@dataclass(frozen=True)
class Place:
    """``kind`` is ``"arch"`` or ``"finite"``.

    For archimedean places ``index`` points into the canonical conjugate list
    and ``real`` tells a real embedding from a conjugate pair.  For finite
    places ``prime`` and the segment ``index`` identify the packet.
    """

    kind: str
    index: int
    prime: int = 0
    real: bool = True

    def render(self):
        if self.kind == "arch":
            return f"arch#{self.index}"
        return f"p={self.prime}#seg{self.index}"

    def __str__(self):
        return self.render()


@dataclass(frozen=True)
class PlaceValue:
    place: Place
    weight: Fraction
    logabs: object  # arb enclosure of log|a|_v

    def to_record(self):
        return {
            "place": self.place.render(),
            "weight": str(self.weight),
            "logabs": {"mid": float(self.logabs.mid()), "rad": float(self.logabs.rad())},
        }


def valuation(n, q):
    """``v_q(n)`` for a nonzero integer ``n``."""
    if n == 0:
        raise ValueError("valuation of zero")
    n = abs(n)
    v = 0
    # strip large powers first so huge coefficients stay cheap
    step = q
    steps = [(q, 1)]
    while n % (step * step) == 0:
        step = step * step
        steps.append((step, steps[-1][1] * 2))
    for power, count in reversed(steps):
        while n % power == 0:
            n //= power
            v += count
    return v


def _ints(p):
    if hasattr(p, "primitive"):
        return p.primitive()[1]
    return tuple(p)


def newton_polygon(p, q):
    """Lower convex hull of ``(i, v_q(c_i))`` as a list of segments."""
    ints = _ints(p)
    d = len(ints) - 1
    if d < 1:
        return []
    if ints[0] % q and ints[-1] % q:
        # both ends at height 0 and every other point is at height >= 0
        return [NewtonSegment(Fraction(0), d)]
    pts = [(i, valuation(c, q)) for i, c in enumerate(ints) if c]
    hull = []
    for pt in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop the middle point if it is on or above the chord
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    segs = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        segs.append(NewtonSegment(Fraction(y2 - y1, x2 - x1), x2 - x1))
    # zero coefficients below the first nonzero one give roots at 0
    if pts[0][0] > 0:
        raise ValidationError("polynomial vanishes at 0; not a minimal polynomial of a nonzero number")
    return segs


def relevant_primes(ints, scope="all"):
    """Primes where some root has nonzero valuation.

    ``scope="poles"`` keeps only primes dividing the leading coefficient,
    which are the only ones where ``log+|a|_v`` can be positive.
    """
    values = [ints[-1]] if scope == "poles" else [ints[-1], ints[0]]
    primes = set()
    for v in values:
        if abs(v) > 1:
            primes.update(int(pr) for pr, _ in flint.fmpz(v).factor())
    return sorted(primes)


def enumerate_place_values(a, scope="all"):
    """Weighted places of ``Q(a)`` with enclosures of ``log|a|_v``.

    ``scope="all"`` covers every place where ``log|a|_v`` is nonzero.
    ``scope="poles"`` skips primes that divide only the constant term, which
    avoids factoring the huge constant terms of deep path nodes.
    """
    if a is INF:
        raise ValidationError("the point at infinity has no finite absolute values")
    ints = a.ints
    if ints[0] == 0:
        raise ValidationError("log|a|_v is undefined at a = 0")
    d = len(ints) - 1
    out = []
    with flint.ctx.workprec(WORK_PRECISION):
        if a.is_rational:
            val = a.as_fraction()
            out.append(PlaceValue(Place("arch", 0), Fraction(1),
                                  flint.arb(flint.fmpq(abs(val.numerator), val.denominator)).log()))
        else:
            boxes = conjugate_boxes(a)
            for k, box in enumerate(boxes):
                if box.is_real:
                    w = Fraction(1, d)
                elif box.im_lo > 0:
                    w = Fraction(2, d)
                else:
                    continue
                z = box.to_acb()
                out.append(PlaceValue(Place("arch", k, 0, box.is_real), w, abs(z).log()))
        for q in relevant_primes(ints, scope):
            logq = flint.arb(q).log()
            for s, seg in enumerate(newton_polygon(ints, q)):
                out.append(PlaceValue(Place("finite", s, q),
                                      Fraction(seg.length, d),
                                      logq * flint.fmpq(seg.slope.numerator, seg.slope.denominator)))
    return out


def product_formula_check(a):
    """``sum(weight * log|a|_v)``; the enclosure must contain 0."""
    with flint.ctx.workprec(WORK_PRECISION):
        total = flint.arb(0)
        for pv in enumerate_place_values(a, "all"):
            total += pv.logabs * flint.fmpq(pv.weight.numerator, pv.weight.denominator)
        return total


def height_from_places(a):
    """``sum(weight * log+|a|_v)`` as a certified estimate."""
    if a is INF or a.ints[0] == 0:
        return HeightEstimate(flint.arb(0), True)
    with flint.ctx.workprec(WORK_PRECISION):
        total = flint.arb(0)
        for pv in enumerate_place_values(a, "poles"):
            total += log_plus(pv.logabs) * flint.fmpq(pv.weight.numerator, pv.weight.denominator)
        return HeightEstimate(total, True)
