"""Correspondences ``F(x, y) = 0`` on the projective line.

A correspondence joins ``a`` to every ``b`` with ``F(a, b) = 0``.  Successors
of an algebraic point are found exactly: eliminate ``x`` against the minimal
polynomial of ``a``, factor the resultant over the rationals, and keep the
roots that certified interval evaluation places over ``a`` itself.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import flint

from .algebraic import INF, AlgebraicNumber, HeightEstimate, height
from .errors import PrecisionExhausted, ValidationError
from .poly import (
    BiPoly,
    UniPoly,
    factor_with_content,
    mpoly_context,
    resultant_in_x,
)
from .polytext import parse_polynomial
from .roots import arb_to_fraction

MATCH_ROUNDS = 12


@dataclass(frozen=True)
class KappaBound:
    """Telescoping constant with its provenance (``"split-form"`` or ``"sampled"``)."""

    value: float
    certified: bool
    provenance: str
    detail: dict = field(default_factory=dict, compare=False, hash=False)
    exact: Fraction = None

    def __post_init__(self):
        # ``exact`` is the tighter dyadic bound used in radii; ``value`` rounds it up
        if self.exact is None:
            object.__setattr__(self, "exact", Fraction(self.value))

    def to_record(self):
        return {"value": self.value, "certified": self.certified, "provenance": self.provenance}


@dataclass(frozen=True, eq=False)
class Correspondence:
    F: BiPoly
    d_x: int
    d_y: int
    alpha: Fraction
    split: tuple = None
    warnings: tuple = ()
    text: str = ""

    def __eq__(self, other):
        return isinstance(other, Correspondence) and self.F == other.F

    def __hash__(self):
        return hash(self.F)

    def swapped(self):
        """The transposed correspondence ``F(y, x)``."""
        return _swapped(self)

    def successors(self, a, budget=None):
        return successors(self, a, budget)

    def predecessors(self, b, budget=None):
        return predecessors(self, b, budget)

    def to_record(self):
        rec = {
            "F": self.F.to_text(),
            "d_x": self.d_x,
            "d_y": self.d_y,
            "alpha": str(self.alpha),
            "warnings": list(self.warnings),
        }
        if self.split:
            rec["split"] = {"f": self.split[0].to_text("x"), "g": self.split[1].to_text("y")}
        return rec


@lru_cache(maxsize=64)
def _swapped(C):
    G = C.F.swap()
    return Correspondence(G, C.d_y, C.d_x, Fraction(C.d_y, C.d_x),
                          _detect_split(G), C.warnings, C.text)


# ---------------------------------------------------------------------------
# validation


def _content_gcd(polys):
    from .poly import poly_gcd

    g = UniPoly()
    for p in polys:
        if not p.is_zero():
            g = poly_gcd(g, p)
    return g


def _detect_split(F):
    terms = F.terms()
    if any(i and j for i, j in terms):
        return None
    f = UniPoly([-terms.get((i, 0), 0) for i in range(F.d_x + 1)])
    g = UniPoly([0] + [terms.get((0, j), 0) for j in range(1, F.d_y + 1)])
    if g.lc() < 0:
        f, g = -f, -g
    return (f, g)


def validate(F, text=""):
    """Check ``F`` and wrap it as a :class:`Correspondence`.

    Rejects polynomials with a factor in one variable only (a projection
    would not be finite) and polynomials that are not squarefree.  A
    reducible ``F`` is accepted with a warning.
    """
    if isinstance(F, str):
        text = text or F
        F = BiPoly.from_terms(parse_polynomial(F))
    if F.is_zero():
        raise ValidationError("the zero polynomial does not define a correspondence")
    _, F = F.primitive()
    if F.d_x < 1 or F.d_y < 1:
        raise ValidationError(
            "univariate factor: F must involve both x and y",
            None,
        )
    cx = _content_gcd([F.coeff_in_y(j) for j in range(F.d_y + 1)])
    if cx.degree > 0:
        raise ValidationError(f"univariate factor {cx.to_text('x')} in x alone",
                              "remove the vertical component")
    cy = _content_gcd([F.coeff_in_x(i) for i in range(F.d_x + 1)])
    if cy.degree > 0:
        raise ValidationError(f"univariate factor {cy.to_text('y')} in y alone",
                              "remove the horizontal component")
    ctx = mpoly_context()
    _, factors = F.to_fmpz_mpoly(ctx).factor()
    warnings = []
    if any(m > 1 for _, m in factors):
        part = ctx.from_dict({(0, 0): 1})
        for fac, _ in factors:
            part = part * fac
        text_part = BiPoly.from_terms(
            {(int(k[0]), int(k[1])): Fraction(int(c)) for k, c in part.to_dict().items()}
        ).to_text()
        raise ValidationError("F is not squarefree", f"squarefree part {text_part}")
    if len(factors) > 1:
        warnings.append(f"F is reducible over Q ({len(factors)} factors); paths follow every component")
    return Correspondence(F, F.d_x, F.d_y, Fraction(F.d_x, F.d_y), _detect_split(F),
                         tuple(warnings), text or F.to_text())


def parse_correspondence(text):
    return validate(BiPoly.from_terms(parse_polynomial(text)), text)


# ---------------------------------------------------------------------------
# interval evaluation


def _acb_fmpq(c):
    return flint.acb(flint.fmpq(c.numerator, c.denominator))


def _eval_uni(coeffs, z):
    acc = flint.acb(0)
    for c in reversed(coeffs):
        acc = acc * z + (_acb_fmpq(c) if isinstance(c, Fraction) else c)
    return acc


def _eval_rows(rows_y, a, b):
    """Evaluate ``sum_j rows_y[j](a) * b^j`` where ``rows_y[j]`` is a UniPoly in x."""
    acc = flint.acb(0)
    for row in reversed(rows_y):
        acc = acc * b + _eval_uni(row.coeffs, a)
    return acc


# ---------------------------------------------------------------------------
# arithmetic in Q(a)[y] for the rare non-squarefree fibres


class _NumberField:
    def __init__(self, modulus):
        self.p = modulus

    def reduce(self, u):
        return u % self.p if u.degree >= self.p.degree else u

    def mul(self, u, v):
        return self.reduce(u * v)

    def inv(self, u):
        # extended Euclid in Q[x]
        r0, r1 = self.p, u
        s0, s1 = UniPoly(), UniPoly((1,))
        while not r1.is_zero():
            q, r = r0.divmod(r1)
            r0, r1 = r1, r
            s0, s1 = s1, s0 - q * s1
        if r0.degree != 0:
            raise ArithmeticError("element is not invertible")
        return self.reduce(s0.scale(1 / r0.lc()))


def _kpoly_trim(f):
    f = list(f)
    while f and f[-1].is_zero():
        f.pop()
    return f


def _kpoly_monic(K, f):
    inv = K.inv(f[-1])
    return [K.mul(c, inv) for c in f]


def _kpoly_divmod(K, f, g):
    f = list(f)
    inv = K.inv(g[-1])
    dg = len(g) - 1
    q = [UniPoly()] * max(len(f) - dg, 0)
    for k in range(len(f) - dg - 1, -1, -1):
        c = K.mul(f[k + dg], inv)
        q[k] = c
        if not c.is_zero():
            for j in range(dg + 1):
                f[k + j] = K.reduce(f[k + j] - c * g[j])
    return _kpoly_trim(q), _kpoly_trim(f[:dg])


def _kpoly_gcd(K, f, g):
    f, g = _kpoly_trim(f), _kpoly_trim(g)
    while g:
        _, r = _kpoly_divmod(K, f, g)
        f, g = g, r
    return _kpoly_monic(K, f) if f else f


def _kpoly_deriv(f):
    return _kpoly_trim([c.scale(i) for i, c in enumerate(f)][1:])


def _kpoly_sub(f, g):
    n = max(len(f), len(g))
    f = f + [UniPoly()] * (n - len(f))
    g = g + [UniPoly()] * (n - len(g))
    return _kpoly_trim([u - v for u, v in zip(f, g)])


def _kpoly_exact_div(K, f, g):
    q, r = _kpoly_divmod(K, f, g)
    if r:
        raise ArithmeticError("inexact division in K[y]")
    return q


def _kpoly_yun(K, f):
    """Squarefree decomposition of a polynomial over ``K`` (Yun)."""
    f = _kpoly_monic(K, f)
    df = _kpoly_deriv(f)
    a = _kpoly_gcd(K, f, df)
    b = _kpoly_exact_div(K, f, a)
    c = _kpoly_exact_div(K, df, a)
    d = _kpoly_sub(c, _kpoly_deriv(b))
    out = []
    i = 1
    while len(b) > 1:
        a = _kpoly_gcd(K, b, d)
        if len(a) > 1:
            out.append((a, i))
        b = _kpoly_exact_div(K, b, a)
        c = _kpoly_exact_div(K, d, a)
        d = _kpoly_sub(c, _kpoly_deriv(b))
        i += 1
    return out


# ---------------------------------------------------------------------------
# successors


def _rows_to_bipoly(rows_y):
    """BiPoly from a list of UniPoly in x indexed by the power of y."""
    dx = max((r.degree for r in rows_y), default=0)
    return BiPoly([[rows_y[j][i] for j in range(len(rows_y))] for i in range(dx + 1)])


def _roots_of_rational_poly(P):
    """Successors from a polynomial with rational coefficients."""
    out = []
    if P.degree <= 0:
        return out
    _, facs = factor_with_content(P)
    for fac, mult in facs:
        ints = fac.primitive()[1]
        for k in range(fac.degree):
            out.append((AlgebraicNumber(ints, k), mult))
    return out


@lru_cache(maxsize=256)
def _discriminant_y(G):
    ctx = mpoly_context()
    D = G.to_fmpz_mpoly(ctx).discriminant("y")
    out = [Fraction(0)] * (D.degrees()[0] + 1 if not D.is_zero() else 0)
    for (i, _j), c in D.to_dict().items():
        out[i] += int(c)
    return UniPoly(out)


def _match_roots(a, rows_y, expected, budget=None):
    """Roots ``b`` of ``S(a, y) = sum rows_y[j](a) y^j`` among resultant factors.

    ``S(a, y)`` must be squarefree of degree ``expected``.  Candidates come
    from the irreducible factors of ``Res_x(minpoly(a), S)``; a candidate is
    kept while interval evaluation of ``S`` at the two boxes contains zero.
    Boxes are refined until exactly ``expected`` candidates survive.
    """
    p = a.minpoly
    R = resultant_in_x(p, _rows_to_bipoly(rows_y))
    _, facs = factor_with_content(R)
    cands = []
    for fac, _mult in facs:
        ints = fac.primitive()[1]
        for k in range(fac.degree):
            cands.append(AlgebraicNumber(ints, k))
    boxes = {c: c.box for c in cands}
    abox = a.box
    width = None
    for _ in range(MATCH_ROUNDS):
        prec = max(64, 2 * _bits_of(abox.width) + 64)
        with flint.ctx.workprec(prec):
            az = abox.to_acb()
            kept = [c for c in cands if _eval_rows(rows_y, az, boxes[c].to_acb()).contains(0)]
        if len(kept) == expected:
            return kept
        if len(kept) < expected:
            raise PrecisionExhausted("fewer fibre roots than expected; boxes are not certified")
        cands = kept
        width = (width or max(abox.width, max(boxes[c].width for c in cands))) / (1 << 32)
        abox = a.refined_box(width, budget)
        for c in cands:
            boxes[c] = c.refined_box(width, budget)
    raise PrecisionExhausted("could not separate the fibre roots")


def _bits_of(w):
    if w <= 0:
        return 64
    return max(w.denominator.bit_length() - w.numerator.bit_length(), 0)


def _finite_successors(C, a, budget):
    F = C.F
    p = a.minpoly
    rows_y = [F.coeff_in_y(j) for j in range(C.d_y + 1)]
    # e = degree of F(a, y): drop leading coefficients that vanish at a
    e = C.d_y
    while e >= 0 and (rows_y[e] % p).is_zero():
        e -= 1
    if e < 0:
        raise ValidationError("degenerate fibre: F(a, y) vanishes identically")
    rows_y = rows_y[: e + 1]
    out = []
    if e >= 1:
        D = _discriminant_y(_rows_to_bipoly(rows_y)) if e >= 2 else UniPoly((1,))
        if e == 1 or not (D % p).is_zero():
            for b in _match_roots(a, rows_y, e, budget):
                out.append((b, 1))
        else:
            K = _NumberField(p)
            for part, mult in _kpoly_yun(K, [K.reduce(r) for r in rows_y]):
                for b in _match_roots(a, part, len(part) - 1, budget):
                    out.append((b, mult))
    return out, C.d_y - e


def _sort_successors(items):
    finite = [(b, m) for b, m in items if b is not INF]
    finite.sort(key=lambda bm: bm[0].sort_key())
    inf = [(b, m) for b, m in items if b is INF]
    return finite + inf


@lru_cache(maxsize=20000)
def _successors_cached(C, a, budget):
    if a is INF:
        top = C.F.coeff_in_x(C.d_x)
        items = _roots_of_rational_poly(top)
        inf_mult = C.d_y - top.degree
    elif a.is_rational:
        P = C.F.eval_x(a.as_fraction())
        items = _roots_of_rational_poly(P)
        inf_mult = C.d_y - P.degree
    else:
        items, inf_mult = _finite_successors(C, a, budget)
    if inf_mult:
        items = items + [(INF, inf_mult)]
    out = tuple(_sort_successors(items))
    if sum(m for _, m in out) != C.d_y:
        raise PrecisionExhausted("successor multiplicities do not add up to d_y")
    return out


def successors(C, a, budget=None):
    """Distinct successors of ``a`` with multiplicities summing to ``d_y``.

    The order is deterministic: finite points by real then imaginary part,
    then infinity.
    """
    return list(_successors_cached(C, a, budget))


def predecessors(C, b, budget=None):
    """Distinct predecessors of ``b`` with multiplicities summing to ``d_x``."""
    return list(_successors_cached(C.swapped(), b, budget))


# ---------------------------------------------------------------------------
# telescoping constant


def _fmpq(c):
    return flint.fmpq(c.numerator, c.denominator)


def _abs_p(c, q):
    """``log|c|_q`` for a nonzero rational ``c``."""
    from .places import valuation

    v = 0
    if c.numerator % q == 0:
        v += valuation(c.numerator, q)
    if c.denominator % q == 0:
        v -= valuation(c.denominator, q)
    return -v


def _primes_of(values):
    primes = set()
    for c in values:
        for n in (c.numerator, c.denominator):
            if abs(n) > 1:
                primes.update(int(pr) for pr, _ in flint.fmpz(n).factor())
    return sorted(primes)


def _archimedean_lower(coeffs, prec=128):
    """``min_r max(d log r, -log|c_d| - log(1 - T(r)))`` over a grid, rigorously."""
    d = len(coeffs) - 1
    lead = abs(coeffs[-1])
    ratios = [abs(c / coeffs[-1]) for c in coeffs[:-1]]
    best = None
    with flint.ctx.workprec(prec):
        neg_log_lead = -flint.arb(_fmpq(lead)).log()
        for k in range(0, 1601):
            r = flint.arb(2) ** (flint.fmpq(k, 80))
            T = flint.arb(0)
            for i, q in enumerate(ratios):
                if q:
                    T += flint.arb(_fmpq(q)) * r ** (i - d)
            if not T < 1:
                continue
            bound = (d * r.log()).max(neg_log_lead - (1 - T).log()).upper()
            if best is None or bound < best:
                best = bound
    return best


def polynomial_height_bound(f):
    """``B`` with ``|h(f(z)) - deg(f) h(z)| <= B`` for every algebraic ``z``.

    Computed place by place: an upper bound from the triangle inequality and
    a lower bound from the dominance of the leading term.  Returned as an
    ``arb`` upper bound.
    """
    coeffs = list(f.coeffs)
    d = len(coeffs) - 1
    nonzero = [c for c in coeffs if c]
    with flint.ctx.workprec(128):
        if d == 0:
            raise ValidationError("constant polynomial has no height bound")
        s = sum(abs(c) for c in nonzero)
        upper = flint.arb(_fmpq(s)).log().max(flint.arb(0))
        lower = flint.arb(_archimedean_lower(coeffs))
        lead = coeffs[-1]
        for q in _primes_of(nonzero):
            logq = flint.arb(q).log()
            m = max(_abs_p(c, q) for c in nonzero)
            upper += logq * max(m, 0)
            rel = [_abs_p(c / lead, q) for c in coeffs[:-1] if c]
            big = max(rel) if rel else 0
            lower += logq * max(d * max(big, 0), max(-_abs_p(lead, q), 0))
        return upper.max(lower)


@lru_cache(maxsize=64)
def kappa_bound(C, samples=40):
    """Constant ``kappa`` with ``|h(b)/alpha - h(a)| <= kappa`` along every edge.

    Certified for split form ``g(y) = f(x)``; otherwise estimated as twice the
    largest discrepancy over small rational starts and flagged heuristic.
    """
    if C.split is not None:
        f, g = C.split
        Bf = polynomial_height_bound(f)
        Bg = polynomial_height_bound(g)
        with flint.ctx.workprec(128):
            upper = ((Bf + Bg) / C.d_x).upper()
            exact = arb_to_fraction(upper)
        value = float(exact)
        if exact:
            # strictly above the exact bound so radii built from ``exact`` stay below
            # anything computed from the reported value
            while Fraction(value) <= exact:
                value = math.nextafter(value, math.inf)
        return KappaBound(value, True, "split-form",
                          {"B_f": float(Bf.upper()), "B_g": float(Bg.upper())}, exact)
    worst = 0.0
    starts = _small_rationals(samples)
    for r in starts:
        a = AlgebraicNumber.from_rational(r)
        ha = height(a)
        for b, _ in successors(C, a):
            hb = height(b)
            gap = abs(hb.value / float(C.alpha) - ha.value)
            worst = max(worst, gap)
    return KappaBound(2 * worst, False, "sampled", {"samples": len(starts)})


def _small_rationals(n):
    out = []
    den = 1
    while len(out) < n:
        for num in range(-2 * den, 2 * den + 1):
            f = Fraction(num, den)
            if f.denominator == den and f not in out:
                out.append(f)
        den += 1
    return out[:n]


def edge_discrepancy(C, a, b):
    """``h(b)/alpha - h(a)`` as a certified estimate."""
    hb = height(b)
    ha = height(a)
    return hb.scale(1 / C.alpha) - ha


__all__ = [
    "Correspondence",
    "KappaBound",
    "HeightEstimate",
    "validate",
    "parse_correspondence",
    "successors",
    "predecessors",
    "kappa_bound",
    "polynomial_height_bound",
]
