"""Certified complex root isolation and refinement.

A :class:`ComplexBox` is an axis-aligned rectangle with exact dyadic
endpoints.  Isolation is delegated to FLINT's certified root finder; a box
returned here is guaranteed to contain exactly one root of the squarefree
part of the polynomial.  Refinement first tries a Krawczyk contraction at
the box and falls back to a fresh isolation at higher precision.
"""

import os
from fractions import Fraction

import flint

from .errors import PrecisionExhausted
from .poly import squarefree_decomposition, squarefree_part, UniPoly

DEFAULT_PRECISION = 64
DEFAULT_BUDGET = int(os.environ.get("CORRHEIGHT_PRECISION", 1 << 15))


def arb_to_fraction(x):
    man, exp = x.man_exp()
    man, exp = int(man), int(exp)
    return Fraction(man * (1 << exp)) if exp >= 0 else Fraction(man, 1 << -exp)


def _arb_endpoints(x):
    mid = arb_to_fraction(x.mid())
    rad = arb_to_fraction(x.rad())
    return mid - rad, mid + rad


def _fmpq(f):
    return flint.fmpq(f.numerator, f.denominator)


def _bits(f):
    return max(f.numerator.bit_length(), f.denominator.bit_length())


class ComplexBox:
    """Rectangle ``[re_lo, re_hi] x [im_lo, im_hi]`` with dyadic endpoints."""

    __slots__ = ("re_lo", "re_hi", "im_lo", "im_hi", "precision")

    def __init__(self, re_lo, re_hi, im_lo, im_hi, precision=DEFAULT_PRECISION):
        if re_lo > re_hi or im_lo > im_hi:
            raise ValueError("empty box")
        self.re_lo = Fraction(re_lo)
        self.re_hi = Fraction(re_hi)
        self.im_lo = Fraction(im_lo)
        self.im_hi = Fraction(im_hi)
        self.precision = precision

    @classmethod
    def point(cls, value, precision=DEFAULT_PRECISION):
        value = Fraction(value)
        return cls(value, value, 0, 0, precision)

    @classmethod
    def from_acb(cls, z, precision):
        re_lo, re_hi = _arb_endpoints(z.real)
        im_lo, im_hi = _arb_endpoints(z.imag)
        return cls(re_lo, re_hi, im_lo, im_hi, precision)

    def to_acb(self):
        prec = max(self.precision, 53) + 64
        with flint.ctx.workprec(prec):
            re = flint.arb(_fmpq((self.re_lo + self.re_hi) / 2), _fmpq((self.re_hi - self.re_lo) / 2))
            im = flint.arb(_fmpq((self.im_lo + self.im_hi) / 2), _fmpq((self.im_hi - self.im_lo) / 2))
            return flint.acb(re, im)

    @property
    def width(self):
        return max(self.re_hi - self.re_lo, self.im_hi - self.im_lo)

    @property
    def is_real(self):
        return self.im_lo == 0 and self.im_hi == 0

    def midpoint(self):
        return complex(float((self.re_lo + self.re_hi) / 2), float((self.im_lo + self.im_hi) / 2))

    def conjugate(self):
        return ComplexBox(self.re_lo, self.re_hi, -self.im_hi, -self.im_lo, self.precision)

    def contains(self, other):
        return (self.re_lo <= other.re_lo and other.re_hi <= self.re_hi
                and self.im_lo <= other.im_lo and other.im_hi <= self.im_hi)

    def overlaps(self, other):
        return not (self.re_hi < other.re_lo or other.re_hi < self.re_lo
                    or self.im_hi < other.im_lo or other.im_hi < self.im_lo)

    def contains_point(self, z):
        z = complex(z)
        return self.re_lo <= z.real <= self.re_hi and self.im_lo <= z.imag <= self.im_hi

    def __eq__(self, other):
        return isinstance(other, ComplexBox) and (
            self.re_lo, self.re_hi, self.im_lo, self.im_hi
        ) == (other.re_lo, other.re_hi, other.im_lo, other.im_hi)

    def __hash__(self):
        return hash((self.re_lo, self.re_hi, self.im_lo, self.im_hi))

    def __repr__(self):
        z = self.midpoint()
        return f"ComplexBox({z.real:.6g}{z.imag:+.6g}j, width={float(self.width):.2e})"


def _sort_key(z):
    # reals first by value, then pairs by real part and |imag|, upper half first
    re = float(z.real.mid())
    im = float(z.imag.mid())
    return (0 if im == 0 else 1, re, abs(im), -im)


def _check_budget(precision, budget):
    if precision > budget:
        raise PrecisionExhausted(
            f"needed {precision} bits, budget is {budget}; raise CORRHEIGHT_PRECISION"
        )


def roots_of_squarefree(ints, precision=DEFAULT_PRECISION, budget=None):
    """Certified boxes for the roots of a squarefree integer polynomial.

    ``ints`` holds integer coefficients, constant term first.  Real roots
    come first in increasing order, then conjugate pairs with the upper root
    before its mirror.  Lower-half boxes are exact mirrors of upper ones.
    """
    budget = DEFAULT_BUDGET if budget is None else budget
    _check_budget(precision, budget)
    p = flint.fmpz_poly(list(ints))
    with flint.ctx.workprec(precision):
        found = [z for z, _ in p.complex_roots()]
    found.sort(key=_sort_key)
    boxes = []
    for z in found:
        if z.imag.is_zero():
            boxes.append(ComplexBox.from_acb(z, precision))
        elif z.imag > 0:
            b = ComplexBox.from_acb(z, precision)
            boxes.append(b)
            boxes.append(b.conjugate())
    if len(boxes) != len(ints) - 1:
        raise PrecisionExhausted("conjugate pairing failed; roots not separated")
    return boxes


def isolate_roots(p, precision=DEFAULT_PRECISION, budget=None):
    """Return ``[(ComplexBox, multiplicity), ...]``, one entry per distinct root."""
    if p.is_zero():
        raise ValueError("isolate_roots of the zero polynomial")
    out = []
    for factor, mult in squarefree_decomposition(p):
        for box in roots_of_squarefree(factor.primitive()[1], precision, budget):
            out.append((box, mult))
    keyed = [(0 if b.is_real else 1, float((b.re_lo + b.re_hi) / 2),
              abs(float(b.im_lo + b.im_hi)), -float(b.im_lo + b.im_hi)) for b, _ in out]
    order = sorted(range(len(out)), key=lambda i: keyed[i])
    return [out[i] for i in order]


def _acb_poly(ints):
    return flint.acb_poly([flint.acb(c) for c in ints])


def krawczyk_step(ints, box):
    """One Krawczyk contraction; returns the new box or ``None`` if it fails.

    Success certifies that ``box`` contains exactly one root of the
    polynomial and that the root lies in the returned box.  Real boxes are
    handled with real interval arithmetic.
    """
    prec = box.precision
    with flint.ctx.workprec(prec + 32):
        if box.is_real:
            p = flint.arb_poly([flint.arb(c) for c in ints])
            B = box.to_acb().real
        else:
            p = _acb_poly(ints)
            B = box.to_acb()
        dp = p.derivative()
        m = B.mid()
        dpm = dp(m).mid()
        if dpm.is_zero():
            return None
        Y = (1 / dpm).mid()
        K = m - Y * p(m) + (1 - Y * dp(B)) * (B - m)
        if box.is_real:
            if not B.contains_interior(K):
                return None
            lo, hi = _arb_endpoints(K)
            return ComplexBox(lo, hi, 0, 0, prec)
        if not B.contains_interior(K):
            return None
        return ComplexBox.from_acb(K, prec)


def refine_box(p, box, target_width, budget=None):
    """Shrink a certified box for ``p`` until its width is at most ``target_width``.

    ``p`` may be a :class:`UniPoly` (its squarefree part is used) or a tuple
    of integer coefficients of a squarefree polynomial.
    """
    budget = DEFAULT_BUDGET if budget is None else budget
    target_width = Fraction(target_width)
    if isinstance(p, UniPoly):
        ints = p.primitive()[1] if p.degree <= 1 else _squarefree_ints(p)
    else:
        ints = tuple(p)
    if len(ints) == 2:
        root = Fraction(-ints[0], ints[1])
        return ComplexBox.point(root, max(box.precision, DEFAULT_PRECISION))
    if box.width <= target_width:
        return box
    prec = max(box.precision, _width_bits(target_width) + 64)
    _check_budget(prec, budget)
    current = ComplexBox(box.re_lo, box.re_hi, box.im_lo, box.im_hi, prec)
    while current.width > target_width:
        nxt = krawczyk_step(ints, current)
        if nxt is None or not nxt.width < current.width:
            return _refine_by_isolation(ints, box, target_width, prec, budget)
        current = _clip(nxt, current)
    return current


def _clip(inner, outer):
    return ComplexBox(
        max(inner.re_lo, outer.re_lo), min(inner.re_hi, outer.re_hi),
        max(inner.im_lo, outer.im_lo), min(inner.im_hi, outer.im_hi),
        inner.precision,
    )


def _width_bits(w):
    if w <= 0:
        return 64
    return max(int(-_log2_floor(w)), 1)


def _log2_floor(w):
    return w.numerator.bit_length() - w.denominator.bit_length()


def _refine_by_isolation(ints, box, target_width, precision, budget):
    precision = max(precision, _width_bits(target_width) + 16)
    while True:
        _check_budget(precision, budget)
        candidates = [b for b in roots_of_squarefree(ints, precision, budget) if b.overlaps(box)]
        if len(candidates) == 1 and candidates[0].width <= target_width:
            return _clip(candidates[0], box)
        precision *= 2


def _squarefree_ints(p):
    return squarefree_part(p).primitive()[1]
