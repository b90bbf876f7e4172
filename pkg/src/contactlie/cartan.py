"""Exterior calculus over a chart.

Vector fields and k-forms carry RationalExpr coefficients.  Forms store only
strictly increasing index tuples; wedge products reorder with the usual sign
bookkeeping, so equal forms are structurally equal.
"""

from __future__ import annotations

from .charts import Chart
from .errors import InputError
from .exprcore import RationalExpr, parse_expr, partial, substitute, to_string


def _merge_indices(a, b):
    """Concatenate two strictly increasing tuples; (sign, merged) or None."""
    if any(i in b for i in a):
        return None
    merged = list(a)
    sign = 1
    for i in b:
        pos = 0
        while pos < len(merged) and merged[pos] < i:
            pos += 1
        sign *= (-1) ** (len(merged) - pos)
        merged.insert(pos, i)
    return sign, tuple(merged)


class VectorField:
    """Derivation on a chart: one RationalExpr component per variable."""

    __slots__ = ("chart", "components")

    def __init__(self, chart, components):
        components = tuple(components)
        if len(components) != chart.dimension:
            raise InputError("component count does not match chart dimension")
        self.chart = chart
        self.components = components

    @classmethod
    def zero(cls, chart):
        zero = RationalExpr.const(chart, 0)
        return cls(chart, (zero,) * chart.dimension)

    @classmethod
    def from_strings(cls, chart, components):
        return cls(chart, [parse_expr(c, chart) for c in components])

    def is_zero(self):
        return all(c.is_zero() for c in self.components)

    def __eq__(self, other):
        return (isinstance(other, VectorField) and self.chart == other.chart
                and self.components == other.components)

    def __add__(self, other):
        return VectorField(self.chart, [a + b for a, b in
                                        zip(self.components, other.components)])

    def __sub__(self, other):
        return VectorField(self.chart, [a - b for a, b in
                                        zip(self.components, other.components)])

    def __neg__(self):
        return VectorField(self.chart, [-a for a in self.components])

    def __mul__(self, scalar):
        return VectorField(self.chart, [c * scalar for c in self.components])

    __rmul__ = __mul__

    def apply(self, f):
        """Directional derivative X(f)."""
        result = RationalExpr.const(self.chart, 0)
        for comp, v in zip(self.components, self.chart.variables):
            if comp:
                result = result + comp * partial(f, v)
        return result

    def __repr__(self):
        parts = [f"({to_string(c)})d/d{v}"
                 for c, v in zip(self.components, self.chart.variables) if c]
        return " + ".join(parts) if parts else "0"


class KForm:
    """Differential form of fixed degree with canonical increasing indices."""

    __slots__ = ("chart", "degree", "coeffs")

    def __init__(self, chart, degree, coeffs):
        # degree > dimension is allowed and necessarily zero (wedge overflow)
        if degree < 0:
            raise InputError("negative form degree")
        clean = {}
        for idx, c in coeffs.items():
            idx = tuple(idx)
            if len(idx) != degree or list(idx) != sorted(set(idx)):
                raise InputError(f"index tuple {idx} is not strictly increasing "
                                 f"of length {degree}")
            if any(i < 0 or i >= chart.dimension for i in idx):
                raise InputError(f"index {idx} out of range")
            if c:
                clean[idx] = c
        self.chart = chart
        self.degree = degree
        self.coeffs = clean

    @classmethod
    def zero(cls, chart, degree):
        return cls(chart, degree, {})

    @classmethod
    def function(cls, chart, f):
        return cls(chart, 0, {(): f})

    @classmethod
    def one_form(cls, chart, coefficients):
        """From a list of RationalExpr, one per variable."""
        return cls(chart, 1, {(i,): c for i, c in enumerate(coefficients)})

    @classmethod
    def from_strings(cls, chart, degree, coeffs):
        """Keys are strings like "dq^dp" naming wedge factors in chart order."""
        parsed = {}
        for key, text in coeffs.items():
            names = [part[1:] if part.startswith("d") else part
                     for part in key.split("^")]
            idx = tuple(chart.var_index(n) for n in names)
            if list(idx) != sorted(set(idx)):
                raise InputError(f"form key {key!r} is not strictly increasing")
            parsed[idx] = parse_expr(text, chart)
        return cls(chart, degree, parsed)

    def key_string(self, idx):
        return "^".join("d" + self.chart.variables[i] for i in idx)

    def is_zero(self):
        return not self.coeffs

    def __eq__(self, other):
        return (isinstance(other, KForm) and self.chart == other.chart
                and self.degree == other.degree and self.coeffs == other.coeffs)

    def __add__(self, other):
        if self.degree != other.degree:
            raise InputError("cannot add forms of different degree")
        coeffs = dict(self.coeffs)
        for idx, c in other.coeffs.items():
            s = coeffs.get(idx)
            coeffs[idx] = c if s is None else s + c
        return KForm(self.chart, self.degree, coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return KForm(self.chart, self.degree,
                     {i: -c for i, c in self.coeffs.items()})

    def __mul__(self, scalar):
        return KForm(self.chart, self.degree,
                     {i: c * scalar for i, c in self.coeffs.items()})

    __rmul__ = __mul__

    def __repr__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for idx in sorted(self.coeffs):
            c = self.coeffs[idx]
            if self.degree == 0:
                parts.append(to_string(c))
            else:
                parts.append(f"({to_string(c)}) {self.key_string(idx)}")
        return " + ".join(parts)


def wedge(a, b):
    if a.chart != b.chart:
        raise InputError("wedge of forms on different charts")
    degree = a.degree + b.degree
    coeffs = {}
    for ia, ca in a.coeffs.items():
        for ib, cb in b.coeffs.items():
            merged = _merge_indices(ia, ib)
            if merged is None:
                continue
            sign, idx = merged
            term = ca * cb
            if sign < 0:
                term = -term
            s = coeffs.get(idx)
            coeffs[idx] = term if s is None else s + term
    return KForm(a.chart, degree, coeffs)


def wedge_power(a, n):
    if n == 0:
        return KForm.function(a.chart, RationalExpr.const(a.chart, 1))
    result = a
    for _ in range(n - 1):
        result = wedge(result, a)
    return result


def ext_d(a):
    chart = a.chart
    coeffs = {}
    for idx, c in a.coeffs.items():
        for j, v in enumerate(chart.variables):
            dc = partial(c, v)
            if dc.is_zero():
                continue
            merged = _merge_indices((j,), idx)
            if merged is None:
                continue
            sign, nidx = merged
            term = dc if sign > 0 else -dc
            s = coeffs.get(nidx)
            coeffs[nidx] = term if s is None else s + term
    return KForm(chart, a.degree + 1, coeffs)


def interior(X, a):
    if X.chart != a.chart:
        raise InputError("interior product on different charts")
    if a.degree == 0:
        raise InputError("interior product of a 0-form is undefined")
    coeffs = {}
    for idx, c in a.coeffs.items():
        for pos, i in enumerate(idx):
            comp = X.components[i]
            if not comp:
                continue
            term = comp * c
            if pos % 2:
                term = -term
            nidx = idx[:pos] + idx[pos + 1:]
            s = coeffs.get(nidx)
            coeffs[nidx] = term if s is None else s + term
    return KForm(a.chart, a.degree - 1, coeffs)


def lie_bracket(X, Y):
    if X.chart != Y.chart:
        raise InputError("bracket of fields on different charts")
    comps = []
    for i in range(X.chart.dimension):
        comps.append(X.apply(Y.components[i]) - Y.apply(X.components[i]))
    return VectorField(X.chart, comps)


def lie_derivative(X, a):
    """Cartan formula for forms of degree >= 1; X(f) for functions."""
    if a.degree == 0:
        f = a.coeffs.get((), RationalExpr.const(a.chart, 0))
        return KForm.function(a.chart, X.apply(f))
    return interior(X, ext_d(a)) + ext_d(interior(X, a))


class CoordinateMap:
    """Rational map between charts, one component per target variable.

    A component may be ("log", g): the target variable is then a formal
    primitive whose pulled-back differential is dg/g; it cannot appear in
    the coefficients of forms being pulled back.
    """

    __slots__ = ("source", "target", "components")

    def __init__(self, source, target, components):
        if len(components) != target.dimension:
            raise InputError("component count does not match target dimension")
        self.source = source
        self.target = target
        self.components = tuple(components)

    def component(self, i):
        return self.components[i]

    def is_log(self, i):
        return isinstance(self.components[i], tuple)

    def substitution(self):
        images = {}
        for name, comp in zip(self.target.variables, self.components):
            if not isinstance(comp, tuple):
                images[name] = comp
        return images


def _pullback_scalar(m, f):
    images = m.substitution()
    for i, name in enumerate(m.target.variables):
        if m.is_log(i) and (f.num.uses(f.chart.index(name))
                            or f.den.uses(f.chart.index(name))):
            raise InputError(
                f"coefficient depends on log-type target variable {name!r}")
    return substitute(f, images)


def _pullback_differential(m, i):
    """Pullback of d(target variable i) as a one-form on the source chart."""
    comp = m.components[i]
    if isinstance(comp, tuple):
        tag, g = comp
        if tag != "log":
            raise InputError(f"unknown component tag {tag!r}")
        dg = [partial(g, v) / g for v in m.source.variables]
        return KForm.one_form(m.source, dg)
    dg = [partial(comp, v) for v in m.source.variables]
    return KForm.one_form(m.source, dg)


def pullback(m, a):
    """Pullback of a form on the target chart along m.

    Poles of map components are not detected symbolically: rational
    composition is total on the complement of the denominators' zero sets.
    """
    if a.chart != m.target:
        raise InputError("form does not live on the map's target chart")
    if a.degree == 0:
        f = a.coeffs.get((), RationalExpr.const(a.chart, 0))
        return KForm.function(m.source, _pullback_scalar(m, f))
    differentials = {}
    result = KForm.zero(m.source, a.degree)
    for idx, c in a.coeffs.items():
        term = KForm.function(m.source, _pullback_scalar(m, c))
        for i in idx:
            if i not in differentials:
                differentials[i] = _pullback_differential(m, i)
            term = wedge(term, differentials[i])
        result = result + term
    return result


def divergence(X, vol):
    """The unique scalar with L_X vol = (div) vol."""
    if vol.degree != X.chart.dimension:
        raise InputError("volume form must have top degree")
    if vol.is_zero():
        raise InputError("volume form is zero")
    top = tuple(range(X.chart.dimension))
    lie = lie_derivative(X, vol)
    return lie.coeffs.get(top, RationalExpr.const(X.chart, 0)) / vol.coeffs[top]


def restrict_expr(f, new_chart):
    """Move an expression to a chart with fewer symbols; the dropped symbols
    must not occur in it."""
    from .exprcore import Poly

    old = f.chart
    positions = []
    for i, s in enumerate(old.symbols):
        if s in new_chart.symbols:
            positions.append(new_chart.index(s))
        else:
            if f.num.uses(i) or f.den.uses(i):
                raise InputError(f"expression depends on dropped symbol {s!r}")
            positions.append(None)

    def conv(p):
        terms = {}
        for e, c in p.terms.items():
            ne = [0] * len(new_chart.symbols)
            for pos, k in zip(positions, e):
                if k:
                    ne[pos] = k
            terms[tuple(ne)] = c
        return Poly(new_chart.symbols, terms)

    return RationalExpr(new_chart, conv(f.num), conv(f.den), _normalized=True)


def remap(obj, new_chart):
    """Transport an expression, field or form to a chart whose symbols include
    (in the same relative order) all symbols of the current chart."""
    if isinstance(obj, RationalExpr):
        old = obj.chart
        positions = [new_chart.index(s) for s in old.symbols]

        def conv(p):
            from .exprcore import Poly
            terms = {}
            for e, c in p.terms.items():
                ne = [0] * len(new_chart.symbols)
                for pos, k in zip(positions, e):
                    ne[pos] = k
                terms[tuple(ne)] = c
            return Poly(new_chart.symbols, terms)

        return RationalExpr(new_chart, conv(obj.num), conv(obj.den),
                            _normalized=True)
    if isinstance(obj, VectorField):
        zero = RationalExpr.const(new_chart, 0)
        comps = [zero] * new_chart.dimension
        for c, v in zip(obj.components, obj.chart.variables):
            comps[new_chart.var_index(v)] = remap(c, new_chart)
        return VectorField(new_chart, comps)
    if isinstance(obj, KForm):
        positions = [new_chart.var_index(v) for v in obj.chart.variables]
        coeffs = {}
        for idx, c in obj.coeffs.items():
            nidx = tuple(positions[i] for i in idx)
            if list(nidx) != sorted(nidx):
                raise InputError("chart extension must preserve variable order")
            coeffs[nidx] = remap(c, new_chart)
        return KForm(new_chart, obj.degree, coeffs)
    raise InputError(f"cannot remap object of type {type(obj).__name__}")
