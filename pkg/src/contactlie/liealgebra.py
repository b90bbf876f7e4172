"""Finite-dimensional Lie algebras by structure constants.

Includes the Chevalley-Eilenberg differential on the dual (with the one-half
pairing normalization pinned by the three-dimensional worked classification),
the left-invariant contact-form condition on 3D algebras, dual coframes of
vector-field frames, and frame-vs-constants verification.  Parametric
families carry the parameter as an extra polynomial symbol; open-interval
constraints on it are metadata, not algebra.
"""

from __future__ import annotations

from fractions import Fraction

from .cartan import _merge_indices
from .errors import InputError, SingularFrameError
from .exprcore import Poly, RationalExpr
from .linalg import determinant, invert, rank

_HALF = Fraction(1, 2)


class StructureConstants:
    """Brackets [e_i, e_j] = sum_k c_{ijk} e_k with exact coefficients.

    Entries are polynomials in the declared parameters (usually constants).
    Antisymmetry and the Jacobi identity are validated at construction.
    """

    __slots__ = ("dim", "basis_names", "params", "c", "meta")

    def __init__(self, dim, table, basis_names=None, params=(), meta=None,
                 check=True):
        """table: dict (i, j) -> coefficient vector of length dim, 0-based;
        missing pairs (and the diagonal) default to zero.  Coefficient
        entries may be ints, Fractions, or Polys over `params`."""
        self.dim = dim
        self.basis_names = tuple(basis_names or (f"e{i+1}" for i in range(dim)))
        self.params = tuple(params)
        self.meta = dict(meta or {})
        zero = Poly.zero(self.params)
        c = {}
        for (i, j), vec in table.items():
            if len(vec) != dim:
                raise InputError(f"bracket [{i},{j}]: expected {dim} entries")
            for k, entry in enumerate(vec):
                if not isinstance(entry, Poly):
                    entry = Poly.const(self.params, entry)
                if entry:
                    c[(i, j, k)] = entry
        full = {}
        for (i, j, k), entry in c.items():
            full[(i, j, k)] = entry
            mirror = c.get((j, i, k))
            if mirror is None:
                full[(j, i, k)] = -entry
            elif mirror != -entry:
                raise InputError(f"antisymmetry fails at [{i},{j}] -> e{k+1}")
        self.c = full
        if check:
            bad = self.jacobi_defect()
            if bad is not None:
                i, j, k, l, value = bad
                raise InputError(
                    f"Jacobi identity fails at ({i},{j},{k}) along e{l+1}: "
                    f"defect {value.terms}")

    def entry(self, i, j, k):
        return self.c.get((i, j, k), Poly.zero(self.params))

    def bracket_vector(self, i, j):
        return [self.entry(i, j, k) for k in range(self.dim)]

    def jacobi_defect(self):
        """None if Jacobi holds; else the first violated (i,j,k,l, defect)."""
        zero = Poly.zero(self.params)
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                for k in range(j + 1, self.dim):
                    for l in range(self.dim):
                        total = zero
                        for m in range(self.dim):
                            total = (total
                                     + self.entry(j, k, m) * self.entry(i, m, l)
                                     + self.entry(k, i, m) * self.entry(j, m, l)
                                     + self.entry(i, j, m) * self.entry(k, m, l))
                        if total:
                            return (i, j, k, l, total)
        return None

    def is_constant(self):
        return not self.params

    def fraction_entry(self, i, j, k):
        entry = self.entry(i, j, k)
        if not entry.is_constant():
            raise InputError("structure constants are parametric")
        return entry.constant_value()

    def opposite(self):
        """Same basis with all brackets negated (still a Lie algebra)."""
        table = {}
        for (i, j, k), entry in self.c.items():
            table.setdefault((i, j), [Poly.zero(self.params)] * self.dim)
            table[(i, j)][k] = -entry
        return StructureConstants(self.dim, table, self.basis_names,
                                  self.params, self.meta, check=False)

    def __repr__(self):
        return f"<StructureConstants dim={self.dim} {self.meta.get('name', '')}>"


class DualElement:
    """Element of the algebra dual: coefficients along the dual basis e^k.

    Coefficients are polynomials in the classification symbols l1..lr plus
    the algebra's parameters, so a single element can stand for a generic
    one-chain.
    """

    __slots__ = ("algebra", "ring", "coefficients")

    def __init__(self, algebra, coefficients, ring=None):
        if len(coefficients) != algebra.dim:
            raise InputError("dual element needs one coefficient per basis")
        self.algebra = algebra
        self.ring = ring if ring is not None else _dual_ring(algebra)
        coeffs = []
        for entry in coefficients:
            if not isinstance(entry, Poly):
                entry = Poly.const(self.ring, entry)
            coeffs.append(entry)
        self.coefficients = tuple(coeffs)

    @classmethod
    def generic(cls, algebra):
        ring = _dual_ring(algebra)
        return cls(algebra, [Poly.symbol(ring, i) for i in range(algebra.dim)],
                   ring)


def _dual_ring(algebra):
    return tuple(f"l{i+1}" for i in range(algebra.dim)) + algebra.params


def _lift(algebra, ring, entry):
    """Structure-constant Poly (over params) into the dual ring."""
    offset = algebra.dim
    terms = {}
    for e, coeff in entry.terms.items():
        terms[(0,) * offset + e] = coeff
    return Poly(ring, terms)


def ce_delta(mu):
    """Chevalley-Eilenberg differential of a one-chain.

    Returns {(i, j): Poly} with i < j, the coefficients along e^i ^ e^j.
    Normalization: delta(e^k) = -(1/2) sum_{i<j} c_{ijk} e^i ^ e^j, the
    pairing that reproduces the worked three-dimensional classifications.
    """
    algebra = mu.algebra
    ring = mu.ring
    out = {}
    for k, mk in enumerate(mu.coefficients):
        if mk.is_zero():
            continue
        for i in range(algebra.dim):
            for j in range(i + 1, algebra.dim):
                entry = algebra.entry(i, j, k)
                if entry.is_zero():
                    continue
                term = mk * _lift(algebra, ring, entry) * (-_HALF)
                prev = out.get((i, j))
                total = term if prev is None else prev + term
                if total:
                    out[(i, j)] = total
                elif (i, j) in out:
                    del out[(i, j)]
    return out


def covector_wedge(a, b):
    """Wedge of exterior covectors given as {increasing index tuple: Poly}."""
    out = {}
    for ia, ca in a.items():
        for ib, cb in b.items():
            merged = _merge_indices(tuple(ia), tuple(ib))
            if merged is None:
                continue
            sign, idx = merged
            term = ca * cb
            if sign < 0:
                term = -term
            prev = out.get(idx)
            total = term if prev is None else prev + term
            if total:
                out[idx] = total
            elif idx in out:
                del out[idx]
    return out


def ce_delta_covector(algebra, ring, covector):
    """Extend delta to exterior covectors by the graded Leibniz rule."""
    out = {}
    for idx, coeff in covector.items():
        for pos, k in enumerate(idx):
            basis = DualElement(algebra, [
                Poly.const(ring, 1 if m == k else 0)
                for m in range(algebra.dim)], ring)
            dk = ce_delta(basis)
            rest = idx[:pos] + idx[pos + 1:]
            for didx, dcoeff in dk.items():
                merged = _merge_indices(didx, rest)
                if merged is None:
                    continue
                sign, nidx = merged
                if pos % 2:
                    sign = -sign
                term = coeff * dcoeff
                if sign < 0:
                    term = -term
                prev = out.get(nidx)
                total = term if prev is None else prev + term
                if total:
                    out[nidx] = total
                elif nidx in out:
                    del out[nidx]
    return out


def contact_condition_3d(algebra):
    """Coefficient polynomial P(l1, l2, l3) of delta(theta) ^ theta.

    theta is the generic one-chain l1 e^1 + l2 e^2 + l3 e^3; the algebra
    admits a left-invariant contact form exactly where P != 0.  P identically
    zero means no left-invariant contact form exists.
    """
    if algebra.dim != 3:
        raise InputError("classification is specific to dimension 3")
    theta = DualElement.generic(algebra)
    d_theta = ce_delta(theta)
    theta_cov = {(k,): ck for k, ck in enumerate(theta.coefficients) if ck}
    product = covector_wedge(d_theta, theta_cov)
    return product.get((0, 1, 2), Poly.zero(theta.ring))


class Frame:
    """A list of vector fields of full generic rank on a chart."""

    __slots__ = ("chart", "fields")

    def __init__(self, chart, fields):
        fields = tuple(fields)
        for f in fields:
            if f.chart != chart:
                raise InputError("frame fields live on different charts")
        matrix = [list(f.components) for f in fields]
        if matrix and rank(matrix) < len(fields):
            raise SingularFrameError(
                "frame fields are dependent over the function field")
        self.chart = chart
        self.fields = fields

    def matrix(self):
        return [list(f.components) for f in self.fields]


def dual_coframe(frame):
    """One-forms with eta_i(Y_j) = delta_ij, by exact matrix inversion."""
    from .cartan import KForm

    chart = frame.chart
    r = len(frame.fields)
    if r != chart.dimension:
        raise InputError("coframe needs as many fields as chart dimensions")
    M = frame.matrix()
    one = RationalExpr.const(chart, 1)
    inv = invert(M, one)
    if inv is None:
        det = determinant(M, one)
        raise SingularFrameError(
            "frame matrix is singular over the function field",
            degeneracy=det.num)
    forms = []
    for i in range(r):
        forms.append(KForm.one_form(chart, [inv[j][i] for j in range(r)]))
    return forms


def verify_structure(frame, algebra):
    """Check [Y_i, Y_j] = sum_k c_{ijk} Y_k for all pairs.

    Returns (ok, residuals) where residuals maps (i, j) to the nonzero
    residual field of each failing pair.
    """
    from .cartan import VectorField, lie_bracket

    if len(frame.fields) != algebra.dim:
        raise InputError("frame size does not match algebra dimension")
    chart = frame.chart
    residuals = {}
    for i in range(algebra.dim):
        for j in range(i + 1, algebra.dim):
            expected = VectorField.zero(chart)
            for k in range(algebra.dim):
                coeff = algebra.fraction_entry(i, j, k)
                if coeff:
                    expected = expected + frame.fields[k] * RationalExpr.const(
                        chart, coeff)
            residual = lie_bracket(frame.fields[i], frame.fields[j]) - expected
            if not residual.is_zero():
                residuals[(i, j)] = residual
    return not residuals, residuals


# -- the nine three-dimensional non-abelian algebras -------------------------

def _row(name, e12, e13, e32, condition, params=(), notes=()):
    table = {(0, 1): e12, (0, 2): e13, (2, 1): e32}
    meta = {"name": name, "table_condition": condition, "notes": tuple(notes)}
    return StructureConstants(3, table, params=params, meta=meta)


def _p(params, text_terms):
    return Poly(tuple(params), text_terms)


STRICT_NOTE = ("table states a strict '>' where the derivation needs '!= 0'; "
               "the polynomial's zero set is the authoritative condition")
PARAM_NOTE = "parameter lam ranges over the open interval (-1, 1)"
PARAM_NZ_NOTE = "parameter lam is nonzero"


def builtin_algebras():
    lam = ("lam",)
    one = {(0,): Fraction(1)}
    neg = {(0,): Fraction(-1)}
    lam_p = {(1,): Fraction(1)}
    neg_lam_p = {(1,): Fraction(-1)}
    return {
        "sl2": _row("sl2", [0, 1, 0], [0, 0, -1], [-1, 0, 0],
                    "l1^2 + 2*l2*l3 > 0", notes=(STRICT_NOTE,)),
        "su2": _row("su2", [0, 0, 1], [0, -1, 0], [-1, 0, 0],
                    "l1^2 + l2^2 + l3^2 > 0",
                    notes=("sum of squares: '>' and '!= 0' agree",)),
        "h3": _row("h3", [0, 0, 1], [0, 0, 0], [0, 0, 0], "l3 != 0"),
        "r3_0p": _row("r3_0p", [0, 0, -1], [0, 1, 0], [0, 0, 0],
                      "l2^2 + l3^2 > 0",
                      notes=("sum of squares: '>' and '!= 0' agree",)),
        "r3_m1": _row("r3_m1", [0, 1, 0], [0, 0, -1], [0, 0, 0],
                      "l2*l3 != 0"),
        "r3_p1": _row("r3_p1", [0, 1, 0], [0, 0, 1], [0, 0, 0],
                      "no left-invariant contact form"),
        "r3": _row("r3", [0, 0, 0], [-1, 0, 0], [1, 1, 0], "l1 != 0"),
        "r3_lambda": _row(
            "r3_lambda",
            [Poly.zero(lam)] * 3,
            [_p(lam, neg), Poly.zero(lam), Poly.zero(lam)],
            [Poly.zero(lam), _p(lam, lam_p), Poly.zero(lam)],
            "l1*l2 != 0", params=lam, notes=(PARAM_NOTE,)),
        "r3p_lambda": _row(
            "r3p_lambda",
            [Poly.zero(lam)] * 3,
            [_p(lam, neg_lam_p), _p(lam, one), Poly.zero(lam)],
            [_p(lam, one), _p(lam, lam_p), Poly.zero(lam)],
            "l1^2 + l2^2 > 0", params=lam,
            notes=(PARAM_NZ_NOTE, "sum of squares: '>' and '!= 0' agree")),
    }


def classify_algebra(name_or_algebra):
    """Contact condition report for a named builtin or a 3D algebra."""
    from .exprcore import poly_to_string

    if isinstance(name_or_algebra, str):
        algebras = builtin_algebras()
        if name_or_algebra not in algebras:
            raise InputError(f"unknown algebra {name_or_algebra!r}; "
                             f"choices: {sorted(algebras)}")
        algebra = algebras[name_or_algebra]
    else:
        algebra = name_or_algebra
    poly = contact_condition_3d(algebra)
    report = {
        "algebra": algebra.meta.get("name", "custom"),
        "polynomial": poly_to_string(poly),
        "condition": ("no left-invariant contact form" if poly.is_zero()
                      else f"{poly_to_string(poly)} != 0"),
        "table_condition": algebra.meta.get("table_condition"),
        "notes": list(algebra.meta.get("notes", ())),
    }
    return poly, report
