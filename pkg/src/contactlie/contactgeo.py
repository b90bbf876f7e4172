"""Contact structures and their canonical machinery.

A validated contact structure caches its Reeb field, volume form and the
inverse of the flat isomorphism b(v) = i(v)d(eta) + (i(v)eta) eta, so that
Hamiltonian vector fields are matrix-vector products over the rational
function field.  All operations are understood on the complement of the
structure's degeneracy locus.
"""

from __future__ import annotations

from .cartan import (KForm, VectorField, ext_d, interior, lie_derivative,
                     remap, wedge, wedge_power)
from .charts import Chart, ExpAtom
from .errors import (InputError, InternalIdentityError, NotContactError,
                     NotHamiltonianError)
from .exprcore import RationalExpr, partial
from .linalg import invert


class ContactStructure:
    """A chart with a validated contact one-form; immutable after init."""

    __slots__ = ("chart", "eta", "n", "d_eta", "volume", "vanishing_locus",
                 "reeb", "_flat_inverse", "_darboux")

    def __init__(self, chart, eta, *, _checked=False):
        if not _checked:
            built = check_contact(chart, eta)
            for slot in self.__slots__:
                object.__setattr__(self, slot, getattr(built, slot))

    def __setattr__(self, name, value):
        raise AttributeError("ContactStructure is immutable")

    # -- scalar/form helpers -------------------------------------------------

    def zero(self):
        return RationalExpr.const(self.chart, 0)

    def eta_coefficients(self):
        zero = self.zero()
        return [self.eta.coeffs.get((i,), zero)
                for i in range(self.chart.dimension)]

    def sharp(self, covector):
        """Inverse of the flat isomorphism applied to a coefficient list."""
        dim = self.chart.dimension
        inv = self._flat_inverse
        comps = []
        for i in range(dim):
            total = self.zero()
            for j in range(dim):
                if covector[j]:
                    total = total + covector[j] * inv[j][i]
            comps.append(total)
        return VectorField(self.chart, comps)

    def reeb_derivative(self, f):
        return self.reeb.apply(f)

    def darboux_layout(self):
        """(q indices, p indices, s index) if eta = ds - sum p_i dq^i, else None."""
        return self._darboux


def _detect_darboux(chart, eta):
    dim = chart.dimension
    zero = RationalExpr.const(chart, 0)
    coeffs = [eta.coeffs.get((i,), zero) for i in range(dim)]
    one = RationalExpr.const(chart, 1)
    s_candidates = [i for i, c in enumerate(coeffs) if c == one]
    if len(s_candidates) != 1:
        return None
    s = s_candidates[0]
    qs, ps = [], []
    for i, c in enumerate(coeffs):
        if i == s or c.is_zero():
            continue
        neg = -c
        # must be exactly one chart variable
        if not neg.is_polynomial() or not neg.num.is_monomial():
            return None
        e, coeff = neg.num.leading()
        if coeff != 1 or sum(e) != 1:
            return None
        j = e.index(1)
        if j >= dim or j == s or not coeffs[j].is_zero():
            return None
        qs.append(i)
        ps.append(j)
    if len(set(ps)) != len(ps) or set(qs) & set(ps):
        return None
    if 1 + 2 * len(qs) != dim:
        return None
    return tuple(qs), tuple(ps), s


def check_contact(chart, eta):
    """Validate eta as a contact form; returns the cached structure.

    Raises NotContactError when the chart dimension is even, the degree is
    not one, or eta ^ (d eta)^n is identically zero.
    """
    if chart.dimension % 2 == 0:
        raise NotContactError(
            f"chart {chart.id!r} has even dimension {chart.dimension}")
    if eta.degree != 1:
        raise NotContactError(f"expected a one-form, got degree {eta.degree}")
    n = (chart.dimension - 1) // 2
    d_eta = ext_d(eta)
    volume = wedge(eta, wedge_power(d_eta, n)) if n else eta
    top = tuple(range(chart.dimension))
    top_coeff = volume.coeffs.get(top)
    if top_coeff is None:
        raise NotContactError(
            "eta ^ (d eta)^n is identically zero: not a contact form")
    locus = top_coeff.num * top_coeff.den

    structure = object.__new__(ContactStructure)
    obj_set = object.__setattr__
    obj_set(structure, "chart", chart)
    obj_set(structure, "eta", eta)
    obj_set(structure, "n", n)
    obj_set(structure, "d_eta", d_eta)
    obj_set(structure, "volume", volume)
    obj_set(structure, "vanishing_locus", locus)

    # flat matrix: B[i][j] = d_eta(d_i, d_j) + eta_i eta_j
    dim = chart.dimension
    zero = RationalExpr.const(chart, 0)
    eta_c = [eta.coeffs.get((i,), zero) for i in range(dim)]
    B = [[zero] * dim for _ in range(dim)]
    for (i, j), c in d_eta.coeffs.items():
        B[i][j] = B[i][j] + c
        B[j][i] = B[j][i] - c
    for i in range(dim):
        if not eta_c[i]:
            continue
        for j in range(dim):
            if eta_c[j]:
                B[i][j] = B[i][j] + eta_c[i] * eta_c[j]
    inv = invert(B, RationalExpr.const(chart, 1))
    if inv is None:
        raise NotContactError(
            "flat isomorphism is singular over the function field; "
            f"degeneracy locus: {locus}")
    obj_set(structure, "_flat_inverse", inv)

    reeb = structure.sharp(eta_c)
    if interior(reeb, d_eta).coeffs or not _is_one(interior(reeb, eta)):
        raise InternalIdentityError("Reeb field failed its defining equations")
    obj_set(structure, "reeb", reeb)
    obj_set(structure, "_darboux", _detect_darboux(chart, eta))
    return structure


def _is_one(form0):
    c = form0.coeffs.get(())
    return c is not None and c.is_constant() and c.constant_value() == 1


def reeb(structure):
    return structure.reeb


class HamiltonianPair:
    """A Hamiltonian function with its contact Hamiltonian vector field."""

    __slots__ = ("structure", "h", "field", "reeb_derivative")

    def __init__(self, structure, h, field, reeb_derivative):
        self.structure = structure
        self.h = h
        self.field = field
        self.reeb_derivative = reeb_derivative


def hamiltonian_field(structure, h, verify=True):
    """Field X with b(X) = dh - (Rh + h) eta; verified against the other two
    defining conditions and, on Darboux charts, the coordinate formula.

    verify=False skips the (redundant) identity checks: the flat solve alone
    determines X.  Bulk consumers use it; the identities are property-tested
    elsewhere."""
    chart = structure.chart
    if h.chart != chart:
        raise InputError("Hamiltonian lives on a different chart")
    rh = structure.reeb_derivative(h)
    dh = [partial(h, v) for v in chart.variables]
    factor = rh + h
    eta_c = structure.eta_coefficients()
    covector = [dh[i] - factor * eta_c[i] for i in range(chart.dimension)]
    X = structure.sharp(covector)

    if verify:
        # condition (1): i(X) d eta = dh - (Rh) eta  and  i(X) eta = -h
        lhs = interior(X, structure.d_eta)
        rhs = KForm.one_form(chart, [dh[i] - rh * eta_c[i]
                                     for i in range(chart.dimension)])
        if lhs != rhs:
            raise InternalIdentityError("i(X_h) d eta != dh - (Rh) eta")
        ix_eta = interior(X, structure.eta).coeffs.get((), structure.zero())
        if ix_eta != -h:
            raise InternalIdentityError("i(X_h) eta != -h")
        # condition (2): L_X eta = -(Rh) eta
        lie = lie_derivative(X, structure.eta)
        expected = structure.eta * (-rh)
        if lie != expected:
            raise InternalIdentityError("L_{X_h} eta != -(Rh) eta")
        if structure.darboux_layout() is not None:
            if X != darboux_hamiltonian_field(structure, h):
                raise InternalIdentityError(
                    "flat-solve field disagrees with the Darboux formula")
    return HamiltonianPair(structure, h, X, rh)


def darboux_hamiltonian_field(structure, h):
    """Coordinate formula on a chart where eta = ds - sum p_i dq^i."""
    layout = structure.darboux_layout()
    if layout is None:
        raise InputError("chart is not in Darboux layout")
    qs, ps, s = layout
    chart = structure.chart
    zero = RationalExpr.const(chart, 0)
    comps = [zero] * chart.dimension
    h_s = partial(h, chart.variables[s])
    s_comp = -h
    for qi, pi in zip(qs, ps):
        p_var = RationalExpr.symbol(chart, chart.variables[pi])
        h_p = partial(h, chart.variables[pi])
        h_q = partial(h, chart.variables[qi])
        comps[qi] = h_p
        comps[pi] = -(h_q + p_var * h_s)
        s_comp = s_comp + p_var * h_p
    comps[s] = s_comp
    return VectorField(chart, comps)


def hamiltonian_of(structure, X):
    """Hamiltonian h with X = X_h, or NotHamiltonianError with the residual."""
    if X.chart != structure.chart:
        raise InputError("field lives on a different chart")
    h = -interior(X, structure.eta).coeffs.get((), structure.zero())
    candidate = hamiltonian_field(structure, h).field
    residual = X - candidate
    if not residual.is_zero():
        raise NotHamiltonianError(
            "field is not contact Hamiltonian: reconstruction from "
            "h = -i(X) eta leaves a nonzero residual", residual=residual)
    return h


def contact_bracket(structure, f, g):
    """{f, g} = X_f g + g (R f)."""
    pair = hamiltonian_field(structure, f, verify=False)
    return pair.field.apply(g) + g * pair.reeb_derivative


def energy_evolution(pair):
    """X_h h, asserted equal to -(Rh) h."""
    value = pair.field.apply(pair.h)
    if value != -(pair.reeb_derivative * pair.h):
        raise InternalIdentityError("energy evolution law failed")
    return value


def is_good(structure, f):
    """True iff R f = 0: f is preserved by the Reeb flow."""
    return structure.reeb_derivative(f).is_zero()


def symplectify(structure, new_var="s_ext"):
    """Exact symplectic form e^{-s}(d eta + eta ^ ds) on chart x R.

    Returns (extended chart, two-form).  The new variable name must be fresh.
    """
    chart = structure.chart
    if new_var in chart.symbols:
        raise InputError(f"variable name {new_var!r} collides with the chart")
    atom_name = "exp_m" + new_var
    if atom_name in chart.symbols:
        raise InputError(f"atom name {atom_name!r} collides with the chart")
    ext = chart.extended(chart.id + "_symp", (new_var,),
                         (ExpAtom(atom_name, new_var, -1),))
    eta = remap(structure.eta, ext)
    d_eta = remap(structure.d_eta, ext)
    s_index = ext.var_index(new_var)
    ds = KForm(ext, 1, {(s_index,): RationalExpr.const(ext, 1)})
    u = RationalExpr.symbol(ext, atom_name)
    omega = (d_eta + wedge(eta, ds)) * u
    if ext_d(omega).coeffs:
        raise InternalIdentityError("symplectification is not closed")
    if not wedge_power(omega, structure.n + 1).coeffs:
        raise InternalIdentityError("symplectification is degenerate")
    return ext, omega
