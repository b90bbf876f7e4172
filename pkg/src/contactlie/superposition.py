"""Coalgebra-style superposition machinery.

Diagonal prolongations copy a system to a product chart (one variable block
per copy); Casimir polynomials of the Hamiltonian algebra, evaluated on
block-summed Hamiltonians, give common first integrals of the prolonged
generators.  Applying prolonged symmetry fields produces further integrals
until the implicit superposition system has full rank; the algebraic solve
for an explicit map is out of scope and the system is emitted implicitly.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .cartan import VectorField
from .charts import Chart, ExpAtom
from .errors import InputError, MathRejection, PoleError
from .exprcore import (Poly, RationalExpr, eval_expr, partial, substitute,
                       to_string)
from .linalg import generic_rank
from .linalg import rank as matrix_rank


class Prolongation:
    """Product chart with block-copied lifts of fields and functions."""

    __slots__ = ("base_chart", "copies", "chart")

    def __init__(self, base_chart, copies):
        if copies < 1:
            raise InputError("prolongation needs at least one copy")
        variables = []
        atoms = []
        for j in range(1, copies + 1):
            variables.extend(f"{v}_{j}" for v in base_chart.variables)
            atoms.extend(ExpAtom(f"{a.name}_{j}", f"{a.base}_{j}", a.scale)
                         for a in base_chart.atoms)
        self.base_chart = base_chart
        self.copies = copies
        self.chart = Chart(f"{base_chart.id}_x{copies}", tuple(variables),
                           tuple(atoms))

    def copy_symbol(self, name, j):
        return f"{name}_{j}"

    def copy_images(self, j):
        """Substitution images sending base symbols into copy j."""
        return {s: RationalExpr.symbol(self.chart, self.copy_symbol(s, j))
                for s in self.base_chart.symbols}

    def copy_variables(self, j):
        return [self.copy_symbol(v, j) for v in self.base_chart.variables]

    def function(self, f, j=None):
        """Diagonal prolongation (block sum) or the single copy-j lift."""
        if j is not None:
            return substitute(f, self.copy_images(j))
        total = RationalExpr.const(self.chart, 0)
        for j in range(1, self.copies + 1):
            total = total + substitute(f, self.copy_images(j))
        return total

    def field(self, X, j=None):
        """Diagonal prolongation (block copies) or the single copy-j lift."""
        zero = RationalExpr.const(self.chart, 0)
        comps = [zero] * self.chart.dimension
        copies = range(1, self.copies + 1) if j is None else (j,)
        for jj in copies:
            images = self.copy_images(jj)
            for v, comp in zip(self.base_chart.variables, X.components):
                if comp:
                    idx = self.chart.var_index(self.copy_symbol(v, jj))
                    comps[idx] = substitute(comp, images)
        return VectorField(self.chart, comps)


def product_bracket(prol, contact, F, G):
    """Jacobi bracket on the product chart: blockwise bivector plus the
    block-summed Reeb term.

    contact is the base structure; its sharp isomorphism and Reeb field are
    substituted into each block.  No contact form on the product is assumed
    (in general none exists)."""
    chart = prol.chart
    if F.chart != chart or G.chart != chart:
        raise InputError("arguments must live on the product chart")
    base = contact
    dim = base.chart.dimension
    total = RationalExpr.const(chart, 0)
    reeb_F = RationalExpr.const(chart, 0)
    reeb_G = RationalExpr.const(chart, 0)
    for j in range(1, prol.copies + 1):
        images = prol.copy_images(j)
        vars_j = prol.copy_variables(j)
        inv_j = [[substitute(e, images) for e in row]
                 for row in base._flat_inverse]
        reeb_j = [substitute(c, images) for c in base.reeb.components]
        eta_j = [substitute(c, images) for c in base.eta_coefficients()]
        dF = [partial(F, v) for v in vars_j]
        dG = [partial(G, v) for v in vars_j]
        rjF = sum((reeb_j[i] * dF[i] for i in range(dim)),
                  RationalExpr.const(chart, 0))
        rjG = sum((reeb_j[i] * dG[i] for i in range(dim)),
                  RationalExpr.const(chart, 0))
        # Lambda_j(dF, dG) = (sharp_j(dF) - (R_j F) R_j) . dG
        for i in range(dim):
            comp = sum((dF[m] * inv_j[m][i] for m in range(dim)),
                       RationalExpr.const(chart, 0)) - rjF * reeb_j[i]
            if comp and dG[i]:
                total = total + comp * dG[i]
        reeb_F = reeb_F + rjF
        reeb_G = reeb_G + rjG
    return total - F * reeb_G + G * reeb_F


def sl2_casimir():
    """Quadratic Casimir 4 v2 v3 + v1^2 for brackets {v1,v2} = -2 v2,
    {v1,v3} = 2 v3, {v2,v3} = -v1."""
    ring = ("v1", "v2", "v3")
    return Poly(ring, {(2, 0, 0): Fraction(1), (0, 1, 1): Fraction(4)})


def poly_compose(poly, args, chart):
    """Evaluate a slot polynomial on RationalExpr arguments."""
    if len(args) != len(poly.vars):
        raise InputError(
            f"Casimir has {len(poly.vars)} slots, got {len(args)} arguments")
    total = RationalExpr.const(chart, 0)
    for e, c in poly.terms.items():
        term = RationalExpr.const(chart, c)
        for g, k in zip(args, e):
            if k:
                term = term * g ** k
        total = total + term
    return total


def casimir_integral(prolonged_hams, casimir, chart=None):
    """Substitute block-summed Hamiltonians into a Casimir polynomial."""
    if not prolonged_hams:
        raise InputError("need at least one Hamiltonian")
    chart = chart or prolonged_hams[0].chart
    return poly_compose(casimir, list(prolonged_hams), chart)


def casimir_sign_report(candidates, annihilators):
    """Which candidate functions are annihilated by every annihilator field.

    candidates: {label: RationalExpr}; annihilators: list of VectorFields.
    Returns {label: {"annihilated": bool, "constant": bool}}."""
    report = {}
    for label, f in candidates.items():
        ok = all(X.apply(f).is_zero() for X in annihilators)
        report[label] = {"annihilated": ok, "constant": f.is_constant()}
    return report


@dataclass
class FirstIntegralSet:
    chart: Chart
    names: tuple
    integrals: tuple
    annihilators: tuple
    complete: bool = True
    diagnostic: str = ""

    def jacobian(self, wrt_vars):
        return [[partial(I, v) for v in wrt_vars] for I in self.integrals]


def _functional_rank(integrals, variables):
    matrix = [[partial(I, v) for v in variables] for I in integrals]
    return generic_rank(matrix)


def generate_integrals(seed, symmetry_fields, annihilators, target,
                       names=None):
    """Grow a set of common first integrals by applying symmetry fields.

    seed must be annihilated by every annihilator (verified).  Candidates
    are kept when they are nonzero, annihilated by all annihilators, and
    raise the generic Jacobian rank.  Stops at `target` integrals; if the
    symmetries are exhausted first, the partial set is returned with a
    diagnostic.
    """
    chart = seed.chart
    for X in annihilators:
        if not X.apply(seed).is_zero():
            raise InputError("seed is not annihilated by the annihilators")
    integrals = [seed]
    current_rank = _functional_rank(integrals, chart.variables)
    frontier = [seed]
    while len(integrals) < target and frontier:
        new_frontier = []
        for base in frontier:
            for Y in symmetry_fields:
                candidate = Y.apply(base)
                if candidate.is_zero() or candidate.is_constant():
                    continue
                if not all(X.apply(candidate).is_zero()
                           for X in annihilators):
                    continue
                trial_rank = _functional_rank(integrals + [candidate],
                                              chart.variables)
                if trial_rank <= current_rank:
                    continue
                integrals.append(candidate)
                current_rank = trial_rank
                new_frontier.append(candidate)
                if len(integrals) >= target:
                    break
            if len(integrals) >= target:
                break
        frontier = new_frontier
    complete = len(integrals) >= target
    diagnostic = "" if complete else (
        f"symmetries exhausted at {len(integrals)} of {target} integrals")
    if names is None:
        names = tuple(f"I{i+1}" for i in range(len(integrals)))
    return FirstIntegralSet(chart, names, tuple(integrals),
                            tuple(annihilators), complete, diagnostic)


def rank_check(integral_set, wrt_vars, seed=0, attempts=200):
    """Generic Jacobian rank plus a rational sample-point certificate.

    The certificate point is found by seeded search over small rationals,
    skipping poles; it is a point where the evaluated Jacobian has the
    generic rank.
    """
    chart = integral_set.chart
    jac = integral_set.jacobian(wrt_vars)
    generic = generic_rank(jac)
    rng = random.Random(seed)
    certificate = None
    tried = 0
    while tried < attempts and certificate is None:
        tried += 1
        point = {v: Fraction(rng.randint(-9, 9), rng.randint(1, 3))
                 for v in chart.variables}
        try:
            values = [[eval_expr(entry, point) for entry in row]
                      for row in jac]
        except PoleError:
            continue
        if matrix_rank(values) == generic:
            certificate = point
    return {
        "generic_rank": generic,
        "full": generic == min(len(integral_set.integrals), len(wrt_vars)),
        "certificate_point": certificate,
        "attempts": tried,
        "deficient_everywhere": generic < min(len(integral_set.integrals),
                                              len(wrt_vars)),
    }


def emit_superposition_system(integral_set, dependent_vars,
                              constant_prefix="lam"):
    """Serialize the implicit system I_i(x, x_(2), ...) = lam_i.

    dependent_vars: the variables (normally the first copy) the rule is
    solved for; the remaining product variables are the particular
    solutions.  No closed-form solve is attempted.
    """
    chart = integral_set.chart
    for v in dependent_vars:
        chart.var_index(v)
    result = rank_check(integral_set, dependent_vars)
    if result["generic_rank"] < len(integral_set.integrals):
        raise MathRejection(
            "integral set is rank-deficient in the dependent variables; "
            "no superposition rule can be emitted")
    constants = [f"{constant_prefix}{i+1}"
                 for i in range(len(integral_set.integrals))]
    return {
        "equations": [
            {"name": name, "expression": to_string(I), "constant": lam}
            for name, I, lam in zip(integral_set.names,
                                    integral_set.integrals, constants)
        ],
        "dependent_variables": list(dependent_vars),
        "particular_solution_variables": [
            v for v in chart.variables if v not in dependent_vars],
        "constants": constants,
        "rank": result["generic_rank"],
        "certificate_point": (
            {k: str(v) for k, v in result["certificate_point"].items()}
            if result["certificate_point"] else None),
        "note": ("implicit system; solving for the dependent variables "
                 "is left to a computer-algebra elimination step"),
    }
