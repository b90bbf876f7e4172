"""Vessiot-Guldberg systems: t-dependent vector fields valued in a
finite-dimensional Lie algebra of vector fields.

Closure and span decisions use constant (rational) coefficients only: a
bracket equal to f(x) X with nonconstant f counts as a new direction.
Quotients and level-set reductions operate in adapted charts where the
projection is "drop these coordinates" and the level set is a coordinate
slice; nothing more general is attempted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .cartan import (CoordinateMap, KForm, VectorField, divergence, ext_d,
                     interior, lie_bracket, lie_derivative, pullback, remap,
                     restrict_expr)
from .charts import Chart
from .contactgeo import (ContactStructure, check_contact, contact_bracket,
                         hamiltonian_field, hamiltonian_of, is_good)
from .errors import (ClosureBoundExceeded, InputError, InternalIdentityError,
                     MathRejection, NotHamiltonianError, NotProjectableError,
                     ReductionPatternError)
from .exprcore import Poly, RationalExpr, partial
from .liealgebra import StructureConstants
from .linalg import rank, solve

TIME_CHART = Chart("time", ("t",))


def _common_denominator(exprs):
    from .exprcore import poly_divexact, poly_gcd

    den = None
    for f in exprs:
        if den is None:
            den = f.den
        else:
            g = poly_gcd(den, f.den)
            den = poly_divexact(den * f.den, g)
    return den


def span_solve(fields, candidate):
    """Constant coefficients c with candidate = sum c_a fields[a], or None.

    Works componentwise: clears denominators, then matches monomial
    coefficients, giving an exact linear system over Q.
    """
    from .exprcore import poly_divexact

    if not fields:
        return [] if candidate.is_zero() else None
    rows, rhs = [], []
    r = len(fields)
    for i in range(candidate.chart.dimension):
        col_exprs = [f.components[i] for f in fields]
        den = _common_denominator(col_exprs + [candidate.components[i]])
        polys = [f.num * poly_divexact(den, f.den) for f in col_exprs]
        target = candidate.components[i]
        target_poly = target.num * poly_divexact(den, target.den)
        monomials = set(target_poly.terms)
        for p in polys:
            monomials.update(p.terms)
        zero = Fraction(0)
        for e in monomials:
            rows.append([p.terms.get(e, zero) for p in polys])
            rhs.append(target_poly.terms.get(e, zero))
    return solve(rows, rhs)


def smallest_lie_algebra(chart, seeds, max_dim=10, names=None):
    """Close a family of vector fields under the Lie bracket.

    Returns a VGSystem holding the closed basis and its structure constants;
    raises ClosureBoundExceeded past max_dim.
    """
    basis = []
    for X in seeds:
        if X.is_zero():
            continue
        if not basis or span_solve(basis, X) is None:
            basis.append(X)
    if not basis:
        raise InputError("all seed fields are zero")
    if len(basis) > max_dim:
        raise ClosureBoundExceeded(
            f"not (detected as) a Lie system within dimension {max_dim}")
    pending = [(i, j) for i in range(len(basis)) for j in range(i)]
    while pending:
        i, j = pending.pop()
        candidate = lie_bracket(basis[j], basis[i])
        if candidate.is_zero() or span_solve(basis, candidate) is not None:
            continue
        basis.append(candidate)
        if len(basis) > max_dim:
            raise ClosureBoundExceeded(
                f"not (detected as) a Lie system within dimension {max_dim}")
        k = len(basis) - 1
        pending.extend((k, m) for m in range(k))
    if names is None:
        names = tuple(f"X{i+1}" for i in range(len(basis)))
    return VGSystem(chart, names, basis)


def _structure_from_basis(basis, basis_names):
    table = {}
    r = len(basis)
    for i in range(r):
        for j in range(i + 1, r):
            coeffs = span_solve(basis, lie_bracket(basis[i], basis[j]))
            if coeffs is None:
                raise InputError(
                    f"fields {basis_names[i]}, {basis_names[j]}: bracket "
                    "leaves the rational span — not closed")
            table[(i, j)] = coeffs
    return StructureConstants(r, table, basis_names)


class VGSystem:
    """A named family of vector fields with time coefficients b_a(t).

    Generators must close under the bracket with the stored constants; when
    Hamiltonians are attached, each must reconstruct its generator exactly.
    """

    __slots__ = ("chart", "names", "generators", "coefficients", "structure",
                 "hamiltonians", "contact")

    def __init__(self, chart, names, generators, coefficients=None,
                 structure=None, hamiltonians=None, contact=None):
        generators = tuple(generators)
        names = tuple(names)
        if len(names) != len(generators):
            raise InputError("one name per generator required")
        for g in generators:
            if g.chart != chart:
                raise InputError(f"generator chart mismatch on {chart.id!r}")
        if coefficients is not None:
            coefficients = tuple(coefficients)
            if len(coefficients) != len(generators):
                raise InputError("one time coefficient per generator required")
            for b in coefficients:
                if b.chart != TIME_CHART:
                    raise InputError("coefficients must live on the time chart")
        if structure is None:
            structure = _structure_from_basis(generators, names)
        else:
            _verify_constants(generators, names, structure)
        self.chart = chart
        self.names = names
        self.generators = generators
        self.coefficients = coefficients
        self.structure = structure
        self.contact = contact
        if hamiltonians is not None:
            hamiltonians = tuple(hamiltonians)
            if contact is None:
                raise InputError("Hamiltonians need an attached contact form")
            if len(hamiltonians) != len(generators):
                raise InputError("one Hamiltonian per generator required")
            for name, h, X in zip(names, hamiltonians, generators):
                recon = hamiltonian_field(contact, h).field
                residual = X - recon
                if not residual.is_zero():
                    raise NotHamiltonianError(
                        f"declared Hamiltonian of {name} does not reproduce "
                        f"the field; residual {residual!r}",
                        residual=residual)
        self.hamiltonians = hamiltonians

    @property
    def dim(self):
        return len(self.generators)

    def field_by_name(self, name):
        return self.generators[self.names.index(name)]

    def with_contact(self, contact, hamiltonians=None):
        return VGSystem(self.chart, self.names, self.generators,
                        self.coefficients, self.structure, hamiltonians,
                        contact)


def _verify_constants(generators, names, structure):
    if structure.dim != len(generators):
        raise InputError("structure constant dimension mismatch")
    chart = generators[0].chart
    for i in range(len(generators)):
        for j in range(i + 1, len(generators)):
            expected = VectorField.zero(chart)
            for k in range(len(generators)):
                coeff = structure.fraction_entry(i, j, k)
                if coeff:
                    expected = expected + generators[k] * RationalExpr.const(
                        chart, coeff)
            residual = lie_bracket(generators[i], generators[j]) - expected
            if not residual.is_zero():
                raise InputError(
                    f"[{names[i]},{names[j]}] disagrees with the declared "
                    f"structure constants; residual {residual!r}")


@dataclass
class Classification:
    kind: str                      # not_hamiltonian | contact | conservative_contact
    hamiltonians: tuple = ()
    offender: str = None
    residual: object = None
    good_flags: tuple = ()


def classify_contact_system(sys):
    """Hamiltonian-ness and conservativity of every generator."""
    if sys.contact is None:
        raise InputError("system has no attached contact structure")
    hams = []
    if sys.hamiltonians is not None:
        hams = list(sys.hamiltonians)
    else:
        for name, X in zip(sys.names, sys.generators):
            try:
                hams.append(hamiltonian_of(sys.contact, X))
            except NotHamiltonianError as err:
                return Classification("not_hamiltonian", offender=name,
                                      residual=err.residual)
    flags = tuple(is_good(sys.contact, h) for h in hams)
    kind = "conservative_contact" if all(flags) else "contact"
    return Classification(kind, tuple(hams), good_flags=flags)


def lie_hamiltonian(sys, hamiltonians=None):
    """The t-dependent Hamiltonian sum b_a(t) h_a on the chart (t, x)."""
    hams = hamiltonians if hamiltonians is not None else sys.hamiltonians
    if hams is None:
        raise InputError("system has no Hamiltonians")
    if sys.coefficients is None:
        raise InputError("system has no time coefficients")
    combined = Chart(sys.chart.id + "_t", ("t",) + sys.chart.variables,
                     sys.chart.atoms)
    total = RationalExpr.const(combined, 0)
    for b, h in zip(sys.coefficients, hams):
        total = total + remap(b, combined) * remap(h, combined)
    return combined, total


def no_go_check(sys):
    """Generic rank of the generator distribution and the odd-dimensional
    no-Poisson verdict when it fills the tangent space."""
    matrix = [list(g.components) for g in sys.generators]
    r = rank(matrix)
    dim = sys.chart.dimension
    applies = (r == dim and dim % 2 == 1)
    return {
        "distribution_rank": r,
        "dimension": dim,
        "odd_dimensional": dim % 2 == 1,
        "no_poisson_realization": applies,
        "message": (
            f"distribution rank = {r}, odd dimension => no Poisson structure "
            "can make every generator Hamiltonian" if applies else
            "no verdict: the no-go hypothesis (full odd-dimensional rank) "
            "does not hold"),
    }


def liouville_report(sys):
    """Exact divergence of each generator w.r.t. the contact volume form,
    with the factor compared against -(n+1) (R h_a)."""
    if sys.contact is None:
        raise InputError("system has no attached contact structure")
    classification = classify_contact_system(sys)
    if classification.kind == "not_hamiltonian":
        raise InputError("system is not Hamiltonian; no Liouville statement")
    S = sys.contact
    rows = []
    for name, X, h in zip(sys.names, sys.generators,
                          classification.hamiltonians):
        div = divergence(X, S.volume)
        rh = S.reeb_derivative(h)
        expected = RationalExpr.const(S.chart, -(S.n + 1)) * rh
        if div != expected:
            raise InternalIdentityError(
                f"divergence of {name} is not -(n+1)(Rh)")
        rows.append({"generator": name, "divergence": div,
                     "reeb_derivative": rh})
    return {
        "kind": classification.kind,
        "rows": rows,
        "note": ("with the volume eta ^ (d eta)^n the factor is "
                 "-(n+1)(Rh); the opposite orientation flips its sign; "
                 "in dimension 3 the two orderings of eta and d eta give "
                 "the same volume form"),
    }


@dataclass
class ProjectedSystem:
    chart: Chart
    names: tuple
    generators: tuple
    hamiltonians: tuple
    coefficients: tuple
    omega: KForm                   # symplectic form with pullback = d eta


def project_conservative(sys, invariant_vars):
    """Quotient by the Reeb flow in an adapted chart.

    invariant_vars are the coordinates of the quotient; everything dropped
    must be transverse: generators, d eta and Hamiltonians may not depend on
    dropped variables, the Reeb field may not move the kept ones.
    """
    if sys.contact is None:
        raise InputError("system has no attached contact structure")
    classification = classify_contact_system(sys)
    if classification.kind != "conservative_contact":
        raise NotProjectableError(
            f"system is {classification.kind}; only conservative systems "
            "project to the Reeb quotient")
    S = sys.contact
    chart = sys.chart
    kept = [v for v in chart.variables if v in invariant_vars]
    if set(invariant_vars) - set(chart.variables):
        raise InputError("invariant_vars contains unknown variables")
    dropped = [v for v in chart.variables if v not in kept]
    if not dropped:
        raise InputError("nothing to project: all variables kept")
    kept_idx = [chart.var_index(v) for v in kept]
    reduced = Chart(
        chart.id + "_red", tuple(kept),
        tuple(a for a in chart.atoms if a.base in kept))

    for i, v in enumerate(chart.variables):
        if v in kept and S.reeb.components[i]:
            raise NotProjectableError(
                f"Reeb field moves invariant variable {v!r}")

    def restrict_or_fail(fexpr, what):
        try:
            return restrict_expr(fexpr, reduced)
        except InputError as err:
            raise NotProjectableError(
                f"{what} is not projectable in this chart: {err}") from None

    # d eta must already be a form in the kept variables only
    omega_coeffs = {}
    for idx, c in S.d_eta.coeffs.items():
        if any(i not in kept_idx for i in idx):
            raise NotProjectableError(
                "d eta has components along dropped variables")
        nidx = tuple(kept_idx.index(i) for i in idx)
        omega_coeffs[nidx] = restrict_or_fail(c, "d eta")
    omega = KForm(reduced, 2, omega_coeffs)

    generators = []
    for name, X in zip(sys.names, sys.generators):
        comps = [restrict_or_fail(X.components[i], f"generator {name}")
                 for i in kept_idx]
        generators.append(VectorField(reduced, comps))
    hamiltonians = tuple(
        restrict_or_fail(h, "Hamiltonian")
        for h in classification.hamiltonians)

    # pi* omega = d eta, with pi the coordinate projection
    proj = CoordinateMap(chart, reduced,
                         [RationalExpr.symbol(chart, v) for v in kept])
    if pullback(proj, omega) != S.d_eta:
        raise InternalIdentityError("projected form fails pi* omega = d eta")
    # each projected generator is symplectically Hamiltonian for its h
    for name, X, h in zip(sys.names, generators, hamiltonians):
        dh = KForm.one_form(reduced, [partial(h, v) for v in reduced.variables])
        if interior(X, omega) != dh:
            raise InternalIdentityError(
                f"projected generator {name} is not the symplectic "
                "Hamiltonian field of its projected Hamiltonian")
    return ProjectedSystem(reduced, sys.names, tuple(generators),
                           hamiltonians, sys.coefficients, omega)


class MomentumMap:
    """Components J^i = i(xi_i) eta of an eta-preserving symmetry frame.

    The abstract symmetry algebra is the opposite of the frame's closure
    (fundamental fields of a left action brace anti-morphically); with that
    convention xi -> J_xi is verified to be a Lie algebra morphism into the
    good functions.
    """

    __slots__ = ("contact", "frame_names", "frame", "components", "algebra")

    def __init__(self, contact, frame_names, frame, components, algebra):
        self.contact = contact
        self.frame_names = frame_names
        self.frame = frame
        self.components = components
        self.algebra = algebra


def momentum_map(contact, frame, names=None, algebra=None):
    """Build and verify the momentum map of an eta-preserving frame.

    frame: list of VectorFields; algebra: abstract StructureConstants of the
    symmetry algebra (optional; computed as the opposite of the frame's
    closure when omitted).
    """
    S = contact
    names = tuple(names or (f"xi{i+1}" for i in range(len(frame))))
    for name, xi in zip(names, frame):
        res = lie_derivative(xi, S.eta)
        if res.coeffs:
            raise MathRejection(
                f"frame field {name} does not preserve eta; residual {res!r}")
    zero = S.zero()
    components = [interior(xi, S.eta).coeffs.get((), zero) for xi in frame]

    frame_constants = _structure_from_basis(list(frame), names)
    if algebra is None:
        algebra = frame_constants.opposite()
    else:
        for (i, j, k), entry in algebra.c.items():
            if frame_constants.entry(i, j, k) != -entry:
                raise InputError(
                    "declared symmetry algebra is not the opposite of the "
                    f"frame's closure at [{names[i]},{names[j]}]")
        for (i, j, k), entry in frame_constants.c.items():
            if algebra.entry(i, j, k) != -entry:
                raise InputError(
                    "declared symmetry algebra misses a bracket of the "
                    f"frame at [{names[i]},{names[j]}]")

    # level sets are Reeb-invariant; dJ = -i(xi) d eta
    for name, xi, J in zip(names, frame, components):
        if not S.reeb_derivative(J).is_zero():
            raise InternalIdentityError(f"R J_{name} != 0")
        dJ = KForm.one_form(S.chart, [partial(J, v)
                                      for v in S.chart.variables])
        if dJ != -interior(xi, S.d_eta):
            raise InternalIdentityError(f"dJ_{name} != -i(xi) d eta")
    # morphism into the good functions
    for i in range(len(frame)):
        for j in range(i + 1, len(frame)):
            bracket = contact_bracket(S, components[i], components[j])
            expected = zero
            for k in range(len(frame)):
                coeff = algebra.fraction_entry(i, j, k)
                if coeff:
                    expected = expected + components[k] * RationalExpr.const(
                        S.chart, coeff)
            if bracket != expected:
                raise InternalIdentityError(
                    f"momentum morphism fails on ({names[i]}, {names[j]})")
    return MomentumMap(S, names, tuple(frame), tuple(components), algebra)


@dataclass
class ReducedSystem:
    structure: ContactStructure
    system: VGSystem
    fixed_values: dict
    dropped_generators: tuple


def reduce_level_set(mm, mu, fixed_vars, sys=None):
    """Restrict to the coordinate slice J = mu and drop the fixed variables.

    Each momentum component must be affine with constant coefficients in the
    fixed variables; the slice must determine them uniquely.  The contact
    form, generators and Hamiltonians of `sys` (default: none) are restricted
    by substitution.
    """
    S = mm.contact
    chart = S.chart
    mu = [Fraction(m) for m in mu]
    if len(mu) != len(mm.components):
        raise InputError("one level value per momentum component required")
    fixed = list(fixed_vars)
    for v in fixed:
        chart.var_index(v)
    fixed_idx = [chart.index(v) for v in fixed]
    rows, rhs = [], []
    for J, m in zip(mm.components, mu):
        if not J.is_polynomial():
            raise ReductionPatternError(
                "momentum component is not polynomial in this chart")
        p = J.num * (1 / J.den.constant_value())
        row = [Fraction(0)] * len(fixed)
        const = Fraction(0)
        for e, c in p.terms.items():
            degree = sum(e)
            if degree == 0:
                const = c
            elif degree == 1 and any(e[i] for i in fixed_idx):
                col = fixed_idx.index(next(i for i in fixed_idx if e[i]))
                row[col] = c
            else:
                raise ReductionPatternError(
                    "level set is not a coordinate slice in the fixed "
                    "variables; general reduction is out of scope")
        rows.append(row)
        rhs.append(m - const)
    if not any(any(row) for row in rows):
        if fixed:
            raise ReductionPatternError(
                "momentum components do not involve the fixed variables")
        values = []
    else:
        values = solve(rows, rhs)
        if values is None:
            raise ReductionPatternError(
                "the requested level is empty: constant components disagree")
    for row, b in zip(rows, rhs):
        if not any(row) and b != 0:
            raise ReductionPatternError(
                "the requested level is empty: constant components disagree")
    fixed_values = dict(zip(fixed, values))

    kept = [v for v in chart.variables if v not in fixed]
    if fixed:
        reduced = Chart(chart.id + "_lvl", tuple(kept),
                        tuple(a for a in chart.atoms if a.base in kept))
    else:
        reduced = chart

    def substitute_down(f):
        from .exprcore import substitute
        images = {v: RationalExpr.symbol(reduced, v) for v in kept}
        images.update({v: RationalExpr.const(reduced, fixed_values[v])
                       for v in fixed})
        return substitute(f, images)

    kept_idx = [chart.var_index(v) for v in kept]
    eta_coeffs = {}
    for (i,), c in S.eta.coeffs.items():
        if i in kept_idx:
            eta_coeffs[(kept_idx.index(i),)] = substitute_down(c)
    eta_red = KForm(reduced, 1, eta_coeffs)
    structure_red = check_contact(reduced, eta_red)

    system_red = None
    dropped = ()
    if sys is not None:
        names, gens, hams, coeffs = [], [], [], []
        classification = classify_contact_system(sys) \
            if sys.hamiltonians is None else None
        source_hams = (sys.hamiltonians if sys.hamiltonians is not None
                       else classification.hamiltonians)
        dropped_list = []
        for pos, (name, X) in enumerate(zip(sys.names, sys.generators)):
            comps = [substitute_down(X.components[i]) for i in kept_idx]
            Xr = VectorField(reduced, comps)
            if Xr.is_zero():
                dropped_list.append(name)
                continue
            names.append(name)
            gens.append(Xr)
            hams.append(substitute_down(source_hams[pos]))
            if sys.coefficients is not None:
                coeffs.append(sys.coefficients[pos])
        system_red = VGSystem(
            reduced, names, gens,
            tuple(coeffs) if sys.coefficients is not None else None,
            hamiltonians=tuple(hams), contact=structure_red)
        dropped = tuple(dropped_list)
    return ReducedSystem(structure_red, system_red, fixed_values, dropped)
