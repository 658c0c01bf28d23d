"""Exact univariate and bivariate polynomials over the rationals.

``UniPoly`` is dense with the constant term first.  ``BiPoly`` stores a dense
matrix ``rows[i][j]`` holding the coefficient of ``x^i y^j``.

The gcd, squarefree decomposition and resultant routines are written out in
full.  Factorisation over the rationals and the resultant of large inputs are
delegated to FLINT through python-flint.
"""

from fractions import Fraction
from math import gcd, lcm

import flint

from .errors import ValidationError

# Above this product of degrees the pure-Python subresultant is slower than
# FLINT's multivariate resultant by orders of magnitude.
_SUBRESULTANT_LIMIT = 24


def _frac(c):
    return c if isinstance(c, Fraction) else Fraction(c)


class UniPoly:
    """Immutable dense polynomial with rational coefficients."""

    __slots__ = ("coeffs", "_hash")

    def __init__(self, coeffs=()):
        cs = [_frac(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)
        self._hash = None

    @classmethod
    def x(cls):
        return cls((0, 1))

    @classmethod
    def constant(cls, c):
        return cls((c,))

    @classmethod
    def from_flint(cls, p):
        """Build from an ``fmpz_poly`` or ``fmpq_poly``."""
        return cls([Fraction(int(c.p), int(c.q)) if hasattr(c, "q") else Fraction(int(c))
                    for c in p.coeffs()])

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def is_zero(self):
        return not self.coeffs

    def lc(self):
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __getitem__(self, i):
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else Fraction(0)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = UniPoly((other,))
        return isinstance(other, UniPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.coeffs)
        return self._hash

    def __repr__(self):
        return f"UniPoly({self.to_text()!r})"

    def to_text(self, var="x"):
        if not self.coeffs:
            return "0"
        parts = []
        for i in range(self.degree, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            sign = "-" if c < 0 else "+"
            mag = -c if c < 0 else c
            if i == 0:
                body = str(mag)
            else:
                mono = var if i == 1 else f"{var}^{i}"
                if mag == 1:
                    body = mono
                elif mag.denominator == 1:
                    body = f"{mag}*{mono}"
                else:
                    body = f"({mag})*{mono}"
            parts.append((sign, body))
        first_sign, first = parts[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __add__(self, other):
        other = _as_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return UniPoly([self[i] + other[i] for i in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return UniPoly([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        other = _as_poly(other)
        if not self.coeffs or not other.coeffs:
            return UniPoly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return UniPoly(out)

    __rmul__ = __mul__

    def __pow__(self, e):
        out = UniPoly((1,))
        base = self
        while e:
            if e & 1:
                out = out * base
            e >>= 1
            if e:
                base = base * base
        return out

    def scale(self, c):
        c = _frac(c)
        return UniPoly([c * a for a in self.coeffs])

    def divmod(self, other):
        other = _as_poly(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        inv = 1 / other.lc()
        quot = [Fraction(0)] * max(len(rem) - dq, 0)
        for k in range(len(rem) - dq - 1, -1, -1):
            c = rem[k + dq] * inv
            quot[k] = c
            if c:
                for j in range(dq + 1):
                    rem[k + j] -= c * other.coeffs[j]
        return UniPoly(quot), UniPoly(rem[:dq] if dq > 0 else [])

    def __floordiv__(self, other):
        return self.divmod(other)[0]

    def __mod__(self, other):
        return self.divmod(other)[1]

    def exact_div(self, other):
        q, r = self.divmod(other)
        if not r.is_zero():
            raise ArithmeticError("inexact polynomial division")
        return q

    def __call__(self, value):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * value + c
        return acc

    def derivative(self):
        return UniPoly([i * c for i, c in enumerate(self.coeffs)][1:])

    def monic(self):
        if not self.coeffs:
            return self
        return self.scale(1 / self.lc())

    def reverse(self, n=None):
        """Coefficients reversed as a degree-``n`` polynomial (``x^n p(1/x)``)."""
        n = self.degree if n is None else n
        return UniPoly([self[n - i] for i in range(n + 1)])

    def primitive(self):
        """Return ``(content, ints)`` with ``self = content * ints``, ``ints`` primitive, lc > 0."""
        if not self.coeffs:
            return Fraction(0), ()
        den = 1
        for c in self.coeffs:
            den = lcm(den, c.denominator)
        ints = [int(c * den) for c in self.coeffs]
        g = 0
        for v in ints:
            g = gcd(g, v)
        if ints[-1] < 0:
            g = -g
        ints = tuple(v // g for v in ints)
        return Fraction(g, den), ints

    def primitive_part(self):
        return UniPoly(self.primitive()[1])

    def integer_coeffs(self):
        """Coefficients as ints; raises if any is non-integral."""
        out = []
        for c in self.coeffs:
            if c.denominator != 1:
                raise ValueError("polynomial has non-integral coefficients")
            out.append(c.numerator)
        return tuple(out)

    def to_fmpz_poly(self):
        return flint.fmpz_poly(list(self.primitive()[1]))

    def to_fmpq_poly(self):
        return flint.fmpq_poly([flint.fmpq(c.numerator, c.denominator) for c in self.coeffs])


def _as_poly(value):
    if isinstance(value, UniPoly):
        return value
    return UniPoly((value,))


# ---------------------------------------------------------------------------
# gcd and squarefree decomposition


def _int_prem(a, b):
    """Pseudo-remainder of integer coefficient tuples (constant term first)."""
    r = list(a)
    db = len(b) - 1
    lb = b[-1]
    while len(r) - 1 >= db and r:
        k = len(r) - 1 - db
        lr = r[-1]
        r = [v * lb for v in r]
        for j in range(db + 1):
            r[k + j] -= lr * b[j]
        while r and r[-1] == 0:
            r.pop()
    return r


def _int_primitive(a):
    g = 0
    for v in a:
        g = gcd(g, v)
    if a[-1] < 0:
        g = -g
    return [v // g for v in a]


def poly_gcd(p, q):
    """Monic greatest common divisor, by the primitive remainder sequence."""
    if p.is_zero():
        return q.monic()
    if q.is_zero():
        return p.monic()
    a = list(p.primitive()[1])
    b = list(q.primitive()[1])
    if len(a) < len(b):
        a, b = b, a
    while b:
        if len(b) == 1:
            return UniPoly((1,))
        r = _int_prem(a, b)
        a, b = b, (_int_primitive(r) if r else [])
    return UniPoly(a).monic()


def squarefree_decomposition(p):
    """Yun's algorithm: list of ``(factor, multiplicity)`` with monic squarefree factors.

    The product of ``factor**multiplicity`` equals ``monic(p)``.
    """
    if p.is_zero():
        raise ValidationError("squarefree decomposition of the zero polynomial")
    p = p.monic()
    if p.degree == 0:
        return []
    dp = p.derivative()
    a = poly_gcd(p, dp)
    b = p.exact_div(a)
    c = dp.exact_div(a)
    d = c - b.derivative()
    out = []
    i = 1
    while b.degree > 0:
        a = poly_gcd(b, d)
        if a.degree > 0:
            out.append((a, i))
        b = b.exact_div(a)
        c = d.exact_div(a)
        d = c - b.derivative()
        i += 1
    return out


def squarefree_part(p):
    """Product of the distinct irreducible factors of ``p``, made monic."""
    if p.is_zero():
        raise ValidationError("squarefree part of the zero polynomial")
    return p.monic().exact_div(poly_gcd(p, p.derivative()))


# ---------------------------------------------------------------------------
# factorisation


def factor_with_content(p):
    """Return ``(content, [(factor, multiplicity), ...])`` over the rationals.

    Each factor is primitive with integer coefficients and positive leading
    coefficient, and ``content * prod(factor**m)`` reproduces ``p`` exactly.
    """
    if p.is_zero():
        raise ValidationError("cannot factor the zero polynomial")
    content, ints = p.primitive()
    c, facs = flint.fmpz_poly(list(ints)).factor()
    content = content * int(c)
    out = []
    for f, m in facs:
        coeffs = [int(v) for v in f.coeffs()]
        if coeffs[-1] < 0:
            coeffs = [-v for v in coeffs]
            if m % 2:
                content = -content
        out.append((UniPoly(coeffs), int(m)))
    out.sort(key=lambda fm: (fm[0].degree, fm[0].coeffs))
    return content, out


def factor_over_rationals(p):
    """Irreducible factors of ``p`` with multiplicities (primitive, lc > 0)."""
    return factor_with_content(p)[1]


# ---------------------------------------------------------------------------
# bivariate polynomials and resultants


class BiPoly:
    """Dense polynomial in ``x`` and ``y``; ``rows[i][j]`` multiplies ``x^i y^j``."""

    __slots__ = ("rows", "_hash")

    def __init__(self, rows):
        rows = [[_frac(c) for c in row] for row in rows]
        width = max((len(r) for r in rows), default=0)
        rows = [r + [Fraction(0)] * (width - len(r)) for r in rows]
        while rows and not any(rows[-1]):
            rows.pop()
        while rows and rows[0] and not any(r[-1] for r in rows):
            rows = [r[:-1] for r in rows]
        self.rows = tuple(tuple(r) for r in rows)
        self._hash = None

    @classmethod
    def from_terms(cls, terms):
        """Build from ``{(i, j): c}``; any third exponent must be zero."""
        if not terms:
            return cls([])
        keys = [k[:2] for k in terms]
        dx = max(k[0] for k in keys)
        dy = max(k[1] for k in keys)
        rows = [[Fraction(0)] * (dy + 1) for _ in range(dx + 1)]
        for k, c in terms.items():
            if len(k) > 2 and any(k[2:]):
                raise ValidationError("polynomial mentions a variable other than x and y")
            rows[k[0]][k[1]] += c
        return cls(rows)

    def terms(self):
        return {(i, j): c for i, row in enumerate(self.rows) for j, c in enumerate(row) if c}

    @property
    def d_x(self):
        return len(self.rows) - 1

    @property
    def d_y(self):
        return len(self.rows[0]) - 1 if self.rows else -1

    def is_zero(self):
        return not self.rows

    def __eq__(self, other):
        return isinstance(other, BiPoly) and self.rows == other.rows

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.rows)
        return self._hash

    def __repr__(self):
        return f"BiPoly({self.to_text()!r})"

    def to_text(self):
        parts = []
        for (i, j), c in sorted(self.terms().items(), key=lambda t: (-(t[0][0] + t[0][1]), -t[0][0])):
            mono = "*".join(
                v if e == 1 else f"{v}^{e}" for v, e in (("x", i), ("y", j)) if e
            )
            mag = abs(c)
            sign = "-" if c < 0 else "+"
            if not mono:
                body = str(mag)
            elif mag == 1:
                body = mono
            elif mag.denominator == 1:
                body = f"{mag}*{mono}"
            else:
                body = f"({mag})*{mono}"
            parts.append((sign, body))
        if not parts:
            return "0"
        out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def swap(self):
        """Exchange the roles of ``x`` and ``y``."""
        if not self.rows:
            return self
        return BiPoly([list(col) for col in zip(*self.rows)])

    def coeff_in_x(self, i):
        """Coefficient of ``x^i`` as a polynomial in ``y``."""
        return UniPoly(self.rows[i]) if 0 <= i < len(self.rows) else UniPoly()

    def coeff_in_y(self, j):
        """Coefficient of ``y^j`` as a polynomial in ``x``."""
        return UniPoly([row[j] for row in self.rows]) if 0 <= j <= self.d_y else UniPoly()

    def eval_x(self, value):
        """Substitute ``x = value`` and return a polynomial in ``y``."""
        out = [Fraction(0)] * (self.d_y + 1)
        for row in reversed(self.rows):
            out = [o * value + c for o, c in zip(out, row)]
        return UniPoly(out)

    def eval_xy(self, x, y):
        acc = 0
        for row in reversed(self.rows):
            inner = 0
            for c in reversed(row):
                inner = inner * y + c
            acc = acc * x + inner
        return acc

    def as_poly_in_x(self):
        """List of ``UniPoly`` in ``y``, one per power of ``x``."""
        return [UniPoly(row) for row in self.rows]

    def scale(self, c):
        return BiPoly([[c * v for v in row] for row in self.rows])

    def primitive(self):
        """Return ``(content, F/content)`` with integer coefficients and positive leading term."""
        terms = self.terms()
        den = 1
        for c in terms.values():
            den = lcm(den, c.denominator)
        g = 0
        for c in terms.values():
            g = gcd(g, int(c * den))
        lead = self.rows[-1][max(j for j, c in enumerate(self.rows[-1]) if c)]
        if lead < 0:
            g = -g
        content = Fraction(g, den)
        return content, self.scale(1 / content)

    def to_fmpz_mpoly(self, ctx):
        _, prim = self.primitive()
        return ctx.from_dict({(i, j): int(c) for (i, j), c in prim.terms().items()})


_MPOLY_CTX = {}


def mpoly_context(names=("x", "y")):
    key = tuple(names)
    if key not in _MPOLY_CTX:
        _MPOLY_CTX[key] = flint.fmpz_mpoly_ctx.get(key)
    return _MPOLY_CTX[key]


def _subresultant(a, b):
    """Resultant of ``a`` and ``b`` whose coefficients are ``UniPoly`` in ``y``.

    Both arguments are lists of coefficients, constant term first, with
    nonzero leading entry.  The arithmetic is the subresultant remainder
    sequence over the integral domain ``Q[y]`` so every division is exact.
    """
    da, db = len(a) - 1, len(b) - 1
    sign = 1
    if da < db:
        a, b = b, a
        da, db = db, da
        if da % 2 and db % 2:
            sign = -sign
    one = UniPoly((1,))
    g = one
    h = one
    while True:
        if db < 0:
            return UniPoly()
        if db == 0:
            break
        delta = da - db
        if da % 2 and db % 2:
            sign = -sign
        r = _prem_over_ring(a, b)
        a = b
        divisor = g * h ** delta
        b = [c.exact_div(divisor) for c in r]
        da, db = db, len(b) - 1
        g = a[-1]
        if delta:
            h = (g ** delta).exact_div(h ** (delta - 1))
        if db < 0:
            return UniPoly()
    # b is a nonzero constant in x
    res = (b[0] ** da).exact_div(h ** (da - 1)) if da > 0 else one
    return res.scale(sign)


def _prem_over_ring(a, b):
    # lb^(delta+1) * a = q*b + r exactly, even when a step drops several degrees
    r = list(a)
    db = len(b) - 1
    lb = b[-1]
    steps = len(a) - len(b) + 1
    while len(r) - 1 >= db and r:
        k = len(r) - 1 - db
        lr = r[-1]
        r = [v * lb for v in r]
        for j in range(db + 1):
            r[k + j] = r[k + j] - lr * b[j]
        while r and r[-1].is_zero():
            r.pop()
        steps -= 1
    if steps and r:
        factor = lb ** steps
        r = [v * factor for v in r]
    return r


def resultant_subresultant(p, F):
    """``Res_x(p(x), F(x, y))`` by the subresultant sequence (pure Python)."""
    a = [UniPoly((c,)) for c in p.coeffs]
    b = F.as_poly_in_x()
    if not a or not b:
        return UniPoly()
    if len(a) == 1:
        return UniPoly((a[0].lc() ** (len(b) - 1),))
    return _subresultant(a, b)


def resultant_flint(p, F):
    """``Res_x(p(x), F(x, y))`` through FLINT's multivariate resultant."""
    ctx = mpoly_context()
    pc, pp = p.primitive()
    fc, _ = F.primitive()
    P = ctx.from_dict({(i, 0): int(c) for i, c in enumerate(pp) if c})
    G = F.to_fmpz_mpoly(ctx)
    R = P.resultant(G, "x")
    out = [Fraction(0)] * (R.degrees()[1] + 1 if not R.is_zero() else 0)
    for (i, j), c in R.to_dict().items():
        out[j] += int(c)
    # Res(c1*P, c2*G) = c1^deg G * c2^deg P * Res(P, G), degrees in x
    scale = pc ** F.d_x * fc ** p.degree
    return UniPoly(out).scale(scale)


def resultant_in_x(p, F):
    """Resultant ``Res_x(p(x), F(x, y))`` as a polynomial in ``y``.

    Small inputs use the pure-Python subresultant sequence; larger ones go to
    FLINT.  Raises :class:`ValidationError` when the resultant vanishes
    identically, which means ``p`` and ``F`` share a vertical component.
    """
    if p.is_zero() or F.is_zero():
        raise ValidationError("resultant with the zero polynomial")
    if p.degree * max(F.d_x, 1) <= _SUBRESULTANT_LIMIT:
        res = resultant_subresultant(p, F)
    else:
        res = resultant_flint(p, F)
    if res.is_zero():
        raise ValidationError(
            "degenerate elimination: the resultant vanishes identically",
            "remove the common vertical component",
        )
    return res
