"""Parser for polynomial text such as ``y^2 - x^3 - 1``.

Coefficients are integers or rationals (``3/2``, ``(1/2)*x``), variables are
``x``, ``y`` and ``t``, and the operators are ``+ - * / ^`` (``**`` is
accepted as ``^``).  Division is only allowed by a nonzero constant.
Juxtaposition such as ``2x`` or ``3(x+1)`` multiplies.

The result is a sparse dict mapping exponent triples ``(i, j, k)`` for
``x^i y^j t^k`` to :class:`fractions.Fraction` coefficients.
"""

from fractions import Fraction

from .errors import ParseError

VARIABLES = ("x", "y", "t")


def _tokenize(text):
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j + 1 < n and text[j] == "." and text[j + 1].isdigit():
                # exact decimal literal
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
                tokens.append(("num", Fraction(text[i:j]), i))
            else:
                tokens.append(("num", int(text[i:j]), i))
            i = j
        elif ch in VARIABLES:
            tokens.append(("var", ch, i))
            i += 1
        elif text.startswith("**", i):
            tokens.append(("op", "^", i))
            i += 2
        elif ch in "+-*/^()":
            tokens.append(("op", ch, i))
            i += 1
        else:
            raise ParseError(f"unexpected character {ch!r}", text, i)
    tokens.append(("end", None, n))
    return tokens


def _add(p, q):
    out = dict(p)
    for k, c in q.items():
        v = out.get(k, 0) + c
        if v:
            out[k] = v
        else:
            out.pop(k, None)
    return out


def _neg(p):
    return {k: -c for k, c in p.items()}


def _mul(p, q):
    out = {}
    for (a1, b1, c1), u in p.items():
        for (a2, b2, c2), v in q.items():
            k = (a1 + a2, b1 + b2, c1 + c2)
            w = out.get(k, 0) + u * v
            if w:
                out[k] = w
            else:
                out.pop(k, None)
    return out


def _pow(p, e):
    out = {(0, 0, 0): Fraction(1)}
    base = p
    while e:
        if e & 1:
            out = _mul(out, base)
        e >>= 1
        if e:
            base = _mul(base, base)
    return out


def _constant_value(p):
    if not p:
        return Fraction(0)
    if set(p) == {(0, 0, 0)}:
        return p[(0, 0, 0)]
    return None


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, message, tok=None):
        tok = tok or self.peek()
        raise ParseError(message, self.text, tok[2])

    def parse(self):
        if self.peek()[0] == "end":
            self.fail("empty polynomial")
        value = self.expr()
        if self.peek()[0] != "end":
            self.fail(f"unexpected {self.peek()[1]!r}")
        return value

    def expr(self):
        value = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            rhs = self.term()
            value = _add(value, rhs if op == "+" else _neg(rhs))
        return value

    def _starts_atom(self, tok):
        return tok[0] in ("num", "var") or tok[:2] == ("op", "(")

    def term(self):
        value = self.unary()
        while True:
            tok = self.peek()
            if tok[:2] == ("op", "*"):
                self.take()
                value = _mul(value, self.unary())
            elif tok[:2] == ("op", "/"):
                self.take()
                divisor_tok = self.peek()
                divisor = _constant_value(self.unary())
                if divisor is None:
                    self.fail("division by a non-constant", divisor_tok)
                if divisor == 0:
                    self.fail("division by zero", divisor_tok)
                value = {k: c / divisor for k, c in value.items()}
            elif self._starts_atom(tok):
                value = _mul(value, self.power())
            else:
                return value

    def unary(self):
        tok = self.peek()
        if tok[:2] == ("op", "-"):
            self.take()
            return _neg(self.unary())
        if tok[:2] == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            tok = self.peek()
            if tok[0] != "num" or not isinstance(tok[1], int):
                self.fail("exponent must be a nonnegative integer", tok)
            self.take()
            return _pow(base, tok[1])
        return base

    def atom(self):
        tok = self.take()
        kind, val, _ = tok
        if kind == "num":
            return {(0, 0, 0): Fraction(val)} if val else {}
        if kind == "var":
            idx = VARIABLES.index(val)
            exps = [0, 0, 0]
            exps[idx] = 1
            return {tuple(exps): Fraction(1)}
        if tok[:2] == ("op", "("):
            inner = self.expr()
            if self.peek()[:2] != ("op", ")"):
                self.fail("expected ')'")
            self.take()
            return inner
        if kind == "end":
            self.fail("unexpected end of input", tok)
        self.fail(f"unexpected {val!r}", tok)


def parse_polynomial(text):
    """Parse ``text`` into ``{(i, j, k): Fraction}`` for ``x^i y^j t^k``."""
    return _Parser(text).parse()


def parse_rational(text):
    """Parse ``"3"``, ``"-3/2"`` or any constant expression into a Fraction."""
    poly = parse_polynomial(text)
    value = _constant_value(poly)
    if value is None:
        raise ParseError("expected a rational constant", text, 0)
    return value
