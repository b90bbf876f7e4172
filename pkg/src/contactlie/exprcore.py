"""Exact scalar arithmetic over a chart.

The universal scalar is a normalized quotient of multivariate polynomials
with Fraction coefficients, optionally extended by the chart's exponential
atoms (treated as fresh polynomial symbols; differentiation applies their
derivation rule).  Normal form: numerator and denominator coprime, and the
denominator integer-primitive with positive leading coefficient under the
graded-lex term order.  Equality is therefore a syntactic check.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .charts import Chart
from .errors import (ExprSyntaxError, InputError, PoleError,
                     UnknownIdentifierError, ZeroDenominatorError)

_ZERO = Fraction(0)
_ONE = Fraction(1)


def _frac_gcd(a, b):
    # gcd on Q: gcd of numerators over lcm of denominators; positive
    return Fraction(math.gcd(a.numerator, b.numerator),
                    (a.denominator * b.denominator)
                    // math.gcd(a.denominator, b.denominator))


def _grlex_key(exps):
    return (sum(exps), exps)


class Poly:
    """Multivariate polynomial: map from exponent vector to Fraction.

    Exponent vectors are aligned with a fixed symbol tuple (chart variables
    followed by atom names).  No zero coefficients are stored.
    """

    __slots__ = ("vars", "terms")

    def __init__(self, vars, terms):
        self.vars = vars
        self.terms = {e: c for e, c in terms.items() if c}

    @classmethod
    def zero(cls, vars):
        return cls(vars, {})

    @classmethod
    def const(cls, vars, value):
        value = Fraction(value)
        zero = (0,) * len(vars)
        return cls(vars, {zero: value} if value else {})

    @classmethod
    def symbol(cls, vars, index):
        e = tuple(1 if i == index else 0 for i in range(len(vars)))
        return cls(vars, {e: _ONE})

    def is_zero(self):
        return not self.terms

    def is_constant(self):
        return not self.terms or (len(self.terms) == 1
                                  and not any(next(iter(self.terms))))

    def constant_value(self):
        if not self.terms:
            return _ZERO
        return self.terms[(0,) * len(self.vars)]

    def is_monomial(self):
        return len(self.terms) == 1

    def leading(self):
        """(exponents, coefficient) of the graded-lex leading term."""
        e = max(self.terms, key=_grlex_key)
        return e, self.terms[e]

    def total_degree(self):
        return max((sum(e) for e in self.terms), default=-1)

    def degree_in(self, i):
        return max((e[i] for e in self.terms), default=-1)

    def uses(self, i):
        return any(e[i] for e in self.terms)

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return (isinstance(other, Poly) and self.vars == other.vars
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.vars, frozenset(self.terms.items())))

    def __neg__(self):
        return Poly(self.vars, {e: -c for e, c in self.terms.items()})

    def __add__(self, other):
        terms = dict(self.terms)
        for e, c in other.terms.items():
            s = terms.get(e, _ZERO) + c
            if s:
                terms[e] = s
            elif e in terms:
                del terms[e]
        return Poly(self.vars, terms)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, Fraction):
            if not other:
                return Poly.zero(self.vars)
            return Poly(self.vars, {e: c * other for e, c in self.terms.items()})
        if not self.terms or not other.terms:
            return Poly.zero(self.vars)
        terms = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = terms.get(e, _ZERO) + c1 * c2
                if s:
                    terms[e] = s
                elif e in terms:
                    del terms[e]
        return Poly(self.vars, terms)

    def __pow__(self, n):
        result = Poly.const(self.vars, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def content(self):
        """Positive rational c with self/c integer-coprime; 0 for the zero poly."""
        c = _ZERO
        for coeff in self.terms.values():
            c = _frac_gcd(c, coeff) if c else abs(coeff)
        return c

    def monomial_content(self):
        """Componentwise min exponent vector over all terms."""
        it = iter(self.terms)
        m = next(it)
        for e in it:
            m = tuple(min(a, b) for a, b in zip(m, e))
            if not any(m):
                break
        return m

    def shift_down(self, m):
        """Divide by the monomial with exponent vector m (must divide  exactly)."""
        return Poly(self.vars, {tuple(a - b for a, b in zip(e, m)): c
                                for e, c in self.terms.items()})

    def eval_frac(self, values):
        """Exact evaluation; values aligned with self.vars."""
        total = _ZERO
        for e, c in self.terms.items():
            term = c
            for v, k in zip(values, e):
                if k:
                    term *= v ** k
            total += term
        return total

    def eval_float(self, values):
        total = 0.0
        for e, c in self.terms.items():
            term = float(c)
            for v, k in zip(values, e):
                if k:
                    term *= v ** k
            total += term
        return total

    def diff_symbol(self, i):
        """Plain d/d(symbol i), ignoring atom rules."""
        terms = {}
        for e, c in self.terms.items():
            if e[i]:
                e2 = e[:i] + (e[i] - 1,) + e[i + 1:]
                s = terms.get(e2, _ZERO) + c * e[i]
                if s:
                    terms[e2] = s
                elif e2 in terms:
                    del terms[e2]
        return Poly(self.vars, terms)


def poly_divexact(a, b):
    """Exact division a/b in Q[vars]; raises if the division is not exact."""
    if b.is_zero():
        raise ZeroDivisionError("polynomial division by zero")
    if b.is_constant():
        inv = 1 / b.constant_value()
        return a * inv
    quot = {}
    rem = Poly(a.vars, dict(a.terms))
    eb, cb = b.leading()
    while rem.terms:
        er, cr = rem.leading()
        eq = tuple(x - y for x, y in zip(er, eb))
        if any(k < 0 for k in eq):
            raise ArithmeticError("inexact polynomial division")
        cq = cr / cb
        quot[eq] = cq
        rem = rem - b * Poly(a.vars, {eq: cq})
    return Poly(a.vars, quot)


def _primitive(p):
    """Scale to integer coprime coefficients, positive leading coefficient."""
    if p.is_zero():
        return p
    c = p.content()
    _, lead = p.leading()
    if lead < 0:
        c = -c
    return p * (1 / c)


def _univariate_view(p, i):
    """p as dict degree-in-symbol-i -> coefficient Poly (exponent i zeroed)."""
    coeffs = {}
    for e, c in p.terms.items():
        d = e[i]
        e2 = e[:i] + (0,) + e[i + 1:]
        co = coeffs.setdefault(d, {})
        co[e2] = co.get(e2, _ZERO) + c
    return {d: Poly(p.vars, co) for d, co in coeffs.items() if any(co.values())}


def _from_univariate(vars, i, coeffs):
    terms = {}
    for d, poly in coeffs.items():
        for e, c in poly.terms.items():
            terms[e[:i] + (d,) + e[i + 1:]] = c
    return Poly(vars, terms)


def _content_in(p, i):
    """Polynomial content of p seen as univariate in symbol i."""
    g = None
    for coeff in _univariate_view(p, i).values():
        g = coeff if g is None else poly_gcd(g, coeff)
        if g.is_constant():
            break
    return _primitive(g)


def _pseudo_rem(a, b, i):
    """Pseudo-remainder of a by b, univariate in symbol i over Q[other vars]."""
    ua, ub = _univariate_view(a, i), _univariate_view(b, i)
    db = max(ub)
    lb = ub[db]
    r = ua
    while r and max(r) >= db:
        dr = max(r)
        lr = r[dr]
        shift = dr - db
        nr = {}
        for d, c in r.items():
            nr[d] = c * lb
        for d, c in ub.items():
            t = nr.get(d + shift, Poly.zero(a.vars)) - c * lr
            nr[d + shift] = t
        r = {d: c for d, c in nr.items() if not c.is_zero()}
        r.pop(dr, None)
    return _from_univariate(a.vars, i, r)


def poly_gcd(a, b):
    """Primitive gcd in Q[vars] (positive leading coefficient); constants -> 1."""
    if a.is_zero():
        return _primitive(b)
    if b.is_zero():
        return _primitive(a)
    # common monomial factor comes out first; it covers most denominators here
    ma, mb = a.monomial_content(), b.monomial_content()
    m = tuple(min(x, y) for x, y in zip(ma, mb))
    if any(m):
        core = poly_gcd(a.shift_down(ma), b.shift_down(mb))
        return core * Poly(a.vars, {m: _ONE})
    if any(ma):
        a = a.shift_down(ma)
    if any(mb):
        b = b.shift_down(mb)
    if a.is_constant() or b.is_constant():
        return Poly.const(a.vars, 1)
    if a.is_monomial() or b.is_monomial():
        # no shared monomial factor remains
        return Poly.const(a.vars, 1)
    # main symbol: lowest combined degree among symbols used by both
    common = [i for i in range(len(a.vars)) if a.uses(i) and b.uses(i)]
    if not common:
        return Poly.const(a.vars, 1)
    i = min(common, key=lambda k: a.degree_in(k) + b.degree_in(k))
    ca, cb = _content_in(a, i), _content_in(b, i)
    pa, pb = poly_divexact(a, ca), poly_divexact(b, cb)
    if pa.degree_in(i) < pb.degree_in(i):
        pa, pb = pb, pa
    # primitive Euclidean remainder sequence
    while not pb.is_zero():
        r = _pseudo_rem(pa, pb, i)
        if not r.is_zero():
            r = poly_divexact(r, _content_in(r, i))
        pa, pb = pb, _primitive(r)
    return _primitive(poly_gcd(ca, cb) * pa)


class RationalExpr:
    """Normalized rational function on a chart.  Immutable."""

    __slots__ = ("chart", "num", "den")

    def __init__(self, chart, num, den, _normalized=False):
        if den.is_zero():
            raise ZeroDenominatorError("division by the zero polynomial")
        if not _normalized:
            num, den = self._normalize(num, den)
        self.chart = chart
        self.num = num
        self.den = den

    @staticmethod
    def _normalize(num, den):
        if num.is_zero():
            return num, Poly.const(num.vars, 1)
        g = poly_gcd(num, den)
        if not (g.is_constant() and g.constant_value() == 1):
            num = poly_divexact(num, g)
            den = poly_divexact(den, g)
        # canonical scaling: denominator integer-coprime, leading coeff > 0
        c = den.content()
        _, lead = den.leading()
        if lead < 0:
            c = -c
        if c != 1:
            inv = 1 / c
            num, den = num * inv, den * inv
        return num, den

    # -- constructors -------------------------------------------------------

    @classmethod
    def const(cls, chart, value):
        vars = chart.symbols
        return cls(chart, Poly.const(vars, value), Poly.const(vars, 1),
                   _normalized=True)

    @classmethod
    def symbol(cls, chart, name):
        vars = chart.symbols
        return cls(chart, Poly.symbol(vars, chart.index(name)),
                   Poly.const(vars, 1), _normalized=True)

    @classmethod
    def from_poly(cls, chart, poly):
        return cls(chart, poly, Poly.const(chart.symbols, 1), _normalized=True)

    # -- predicates ----------------------------------------------------------

    def is_zero(self):
        return self.num.is_zero()

    def is_constant(self):
        return self.num.is_constant() and self.den.is_constant()

    def constant_value(self):
        return self.num.constant_value() / self.den.constant_value()

    def is_polynomial(self):
        return self.den.is_constant()

    def __bool__(self):
        return not self.num.is_zero()

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = RationalExpr.const(self.chart, other)
        return (isinstance(other, RationalExpr) and self.chart == other.chart
                and self.num == other.num and self.den == other.den)

    def __hash__(self):
        return hash((self.num, self.den))

    # -- arithmetic ----------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, (int, Fraction)):
            return RationalExpr.const(self.chart, other)
        if not isinstance(other, RationalExpr):
            return NotImplemented
        if other.chart != self.chart:
            raise InputError("operands live on different charts")
        return other

    def __neg__(self):
        return RationalExpr(self.chart, -self.num, self.den, _normalized=True)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.den == other.den:
            return RationalExpr(self.chart, self.num + other.num, self.den)
        return RationalExpr(self.chart,
                            self.num * other.den + other.num * self.den,
                            self.den * other.den)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.is_zero() or other.is_zero():
            return RationalExpr.const(self.chart, 0)
        return RationalExpr(self.chart, self.num * other.num,
                            self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.is_zero():
            raise ZeroDenominatorError("division by the zero expression")
        return RationalExpr(self.chart, self.num * other.den,
                            self.den * other.num)

    def __rtruediv__(self, other):
        return RationalExpr.const(self.chart, other) / self

    def __pow__(self, n):
        if n < 0:
            if self.is_zero():
                raise ZeroDenominatorError("negative power of zero")
            return RationalExpr(self.chart, self.den ** (-n), self.num ** (-n))
        return RationalExpr(self.chart, self.num ** n, self.den ** n,
                            _normalized=True)

    def __repr__(self):
        return f"<{self.chart.id}: {to_string(self)}>"

    def __str__(self):
        return to_string(self)


# -- differentiation ---------------------------------------------------------

def _poly_partial(p, chart, var_index):
    """d/d(variable var_index), applying atom derivation rules."""
    result = p.diff_symbol(var_index)
    for atom_index, (base, scale) in chart.atom_rules().items():
        if base != var_index:
            continue
        # d(u^k)/dx = k*scale*u^k when du/dx = scale*u
        terms = {}
        for e, c in p.terms.items():
            if e[atom_index]:
                s = terms.get(e, _ZERO) + c * e[atom_index] * scale
                if s:
                    terms[e] = s
                elif e in terms:
                    del terms[e]
        result = result + Poly(p.vars, terms)
    return result


def partial(f, var_name):
    """Partial derivative of a RationalExpr along a chart variable."""
    chart = f.chart
    i = chart.var_index(var_name)
    dn = _poly_partial(f.num, chart, i)
    dd = _poly_partial(f.den, chart, i)
    if dd.is_zero():
        if dn.is_zero():
            return RationalExpr.const(chart, 0)
        return RationalExpr(chart, dn, f.den)
    return RationalExpr(chart, dn * f.den - f.num * dd, f.den * f.den)


# -- evaluation --------------------------------------------------------------

def eval_expr(f, point):
    """Exact evaluation at a rational point assigning every chart variable.

    Atoms cannot be evaluated exactly; expressions using an atom are rejected.
    """
    chart = f.chart
    values = []
    for v in chart.variables:
        if v not in point:
            raise InputError(f"point does not assign variable {v!r}")
        values.append(Fraction(point[v]))
    for a in chart.atoms:
        idx = chart.index(a.name)
        if f.num.uses(idx) or f.den.uses(idx):
            raise InputError(
                f"exact evaluation with atom {a.name!r}: use eval_float")
        values.append(_ZERO)
    den = f.den.eval_frac(values)
    if den == 0:
        raise PoleError(f"pole at point {dict(point)!r}", where=dict(point))
    return f.num.eval_frac(values) / den


def eval_float(f, point):
    """Floating-point evaluation; atoms evaluate as exp(scale*base)."""
    chart = f.chart
    values = [float(point[v]) for v in chart.variables]
    for a in chart.atoms:
        values.append(math.exp(float(a.scale) * float(point[a.base])))
    den = f.den.eval_float(values)
    if den == 0.0:
        raise PoleError(f"pole at point {dict(point)!r}", where=dict(point))
    return f.num.eval_float(values) / den


def substitute(f, images):
    """Compose f with variable -> RationalExpr images (all on one chart).

    Every chart variable of f must be given an image; atoms of f's chart
    must be given explicit images too if f uses them.
    """
    chart = f.chart
    values = []
    target = None
    for v in chart.symbols:
        g = images.get(v)
        if g is not None:
            target = g.chart
    if target is None:
        raise InputError("substitution needs at least one image")
    one = RationalExpr.const(target, 1)
    for i, v in enumerate(chart.symbols):
        g = images.get(v)
        if g is None:
            if f.num.uses(i) or f.den.uses(i):
                raise InputError(f"no image supplied for symbol {v!r}")
            g = one
        elif g.chart != target:
            raise InputError("substitution images live on different charts")
        values.append(g)

    def eval_poly(p):
        total = RationalExpr.const(target, 0)
        for e, c in p.terms.items():
            term = RationalExpr.const(target, c)
            for g, k in zip(values, e):
                if k:
                    term = term * g ** k
            total = total + term
        return total

    den = eval_poly(f.den)
    if den.is_zero():
        raise ZeroDenominatorError("substitution makes the denominator vanish")
    return eval_poly(f.num) / den


# -- parser ------------------------------------------------------------------

_OPS = set("+-*/^()")


def _tokenize(text):
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in _OPS:
            tokens.append((ch, i))
            i += 1
        elif ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(("uint", i, int(text[i:j])))
            i = j
        elif ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("ident", i, text[i:j]))
            i = j
        else:
            raise ExprSyntaxError(f"unexpected character {ch!r}", i)
    tokens.append(("end", n))
    return tokens


class _Parser:
    def __init__(self, text, chart):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.chart = chart

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind):
        tok = self.advance()
        if tok[0] != kind:
            raise ExprSyntaxError(f"expected {kind!r}, found {tok[0]!r}", tok[1])
        return tok

    def parse(self):
        value = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ExprSyntaxError(f"trailing input {tok[0]!r}", tok[1])
        return value

    def expr(self):
        value = self.term()
        while self.peek()[0] in "+-":
            op = self.advance()[0]
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self):
        value = self.factor()
        while self.peek()[0] in "*/":
            op, where = self.advance()[:2]
            rhs = self.factor()
            if op == "*":
                value = value * rhs
            else:
                if rhs.is_zero():
                    raise ZeroDenominatorError(
                        f"division by zero at offset {where}")
                value = value / rhs
        return value

    def factor(self):
        if self.peek()[0] == "-":
            self.advance()
            return -self.factor()
        value = self.base()
        if self.peek()[0] == "^":
            self.advance()
            tok = self.peek()
            if tok[0] != "uint":
                raise ExprSyntaxError(
                    "exponent must be a nonnegative integer literal", tok[1])
            self.advance()
            value = value ** tok[2]
        return value

    def base(self):
        tok = self.advance()
        if tok[0] == "uint":
            return RationalExpr.const(self.chart, tok[2])
        if tok[0] == "ident":
            if tok[2] not in self.chart.symbols:
                raise UnknownIdentifierError(
                    f"{tok[2]!r} is not a symbol of chart {self.chart.id!r} "
                    f"(offset {tok[1]})")
            return RationalExpr.symbol(self.chart, tok[2])
        if tok[0] == "(":
            value = self.expr()
            self.expect(")")
            return value
        raise ExprSyntaxError(f"unexpected token {tok[0]!r}", tok[1])


def parse_expr(text, chart):
    return _Parser(text, chart).parse()


# -- printer -----------------------------------------------------------------

def _frac_str(c):
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _monomial_str(vars, e, c):
    parts = []
    for name, k in zip(vars, e):
        if k == 1:
            parts.append(name)
        elif k > 1:
            parts.append(f"{name}^{k}")
    if not parts:
        return _frac_str(c)
    body = "*".join(parts)
    if c == 1:
        return body
    if c == -1:
        return f"-{body}"
    return f"{_frac_str(c)}*{body}"


def poly_to_string(p):
    if p.is_zero():
        return "0"
    items = sorted(p.terms.items(), key=lambda it: _grlex_key(it[0]),
                   reverse=True)
    out = _monomial_str(p.vars, *items[0])
    for e, c in items[1:]:
        if c > 0:
            out += f" + {_monomial_str(p.vars, e, c)}"
        else:
            out += f" - {_monomial_str(p.vars, e, -c)}"
    return out


def to_string(f):
    num = poly_to_string(f.num)
    if f.den.is_constant() and f.den.constant_value() == 1:
        return num
    den = poly_to_string(f.den)
    if len(f.num.terms) > 1:
        num = f"({num})"
    if len(f.den.terms) > 1 or not f.den.is_monomial() or "*" in den or "/" in den:
        den = f"({den})"
    return f"{num}/{den}"
