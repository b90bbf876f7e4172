"""End-to-end verification of the toolkit against its reference results.

Each check returns a CheckResult; `run_all` drives the full battery.  The
same functions back the CLI's `verify-paper` subcommand and the acceptance
test suite, so there is exactly one statement of every tolerance.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .cartan import KForm, VectorField, ext_d, lie_bracket, wedge
from .charts import Chart
from .contactgeo import (check_contact, contact_bracket,
                         darboux_hamiltonian_field, hamiltonian_field)
from .definitions import load_bundled
from .dynamics import (ball_boundary, combined_field, compile_scalar,
                       drift_order, integrate, monitor_first_integrals,
                       monitor_polygon_area, phase_portrait,
                       planar_equilibrium_report)
from .exprcore import Poly, RationalExpr, parse_expr, poly_to_string
from .liealgebra import classify_algebra
from .liesystems import (classify_contact_system, liouville_report,
                         no_go_check, project_conservative, reduce_level_set)
from .superposition import (Prolongation, casimir_integral, generate_integrals,
                            rank_check, sl2_casimir)

CONSERVATIVE_BUNDLED = ("simple-control", "brockett", "schwarz",
                        "schwarz-darboux", "quantum5d")


@dataclass
class CheckResult:
    ident: str
    description: str
    passed: bool
    elapsed: float
    budget: float
    detail: str = ""

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] {self.ident}: {self.description} "
                f"({self.elapsed:.2f}s / budget {self.budget:.0f}s)"
                + (f" -- {self.detail}" if self.detail else ""))


def _result(ident, description, budget, started, ok, detail=""):
    elapsed = time.time() - started
    return CheckResult(ident, description, ok and elapsed < budget,
                       elapsed, budget, detail)


# -- random expression helpers (seeded, used by checks and tests) ------------

def random_poly(chart, rng, degree=3, terms=4, variables=None):
    symbols = variables if variables is not None else chart.variables
    vars = chart.symbols
    poly = Poly.zero(vars)
    for _ in range(terms):
        exps = [0] * len(vars)
        total = rng.randint(0, degree)
        for _ in range(total):
            v = rng.choice(symbols)
            exps[chart.index(v)] += 1
        coeff = Fraction(rng.randint(-5, 5), rng.randint(1, 3))
        poly = poly + Poly(vars, {tuple(exps): coeff})
    return RationalExpr.from_poly(chart, poly)


def random_rational(chart, rng, degree=2, terms=3):
    num = random_poly(chart, rng, degree, terms)
    den = random_poly(chart, rng, degree, terms)
    while den.is_zero():
        den = random_poly(chart, rng, degree, terms)
    return num / den


def darboux_chart(n, prefix=""):
    qs = tuple(f"{prefix}q{i+1}" for i in range(n))
    ps = tuple(f"{prefix}p{i+1}" for i in range(n))
    chart = Chart(f"darboux{2*n+1}", qs + ps + (f"{prefix}s",))
    coeffs = {}
    for i, q in enumerate(qs):
        coeffs[(chart.var_index(q),)] = -RationalExpr.symbol(chart, ps[i])
    coeffs[(chart.var_index(f"{prefix}s"),)] = RationalExpr.const(chart, 1)
    eta = KForm(chart, 1, coeffs)
    return check_contact(chart, eta)


# -- criterion 1: flat-solve equals the Darboux coordinate formula -----------

def check_darboux_equivalence(count=200, seed=11):
    started = time.time()
    rng = random.Random(seed)
    failures = 0
    for n in (1, 2):
        structure = darboux_chart(n)
        for _ in range(count // 2):
            h = random_poly(structure.chart, rng, degree=3, terms=5)
            pair = hamiltonian_field(structure, h)
            explicit = darboux_hamiltonian_field(structure, h)
            if pair.field != explicit:
                failures += 1
    return _result(
        "C1", "flat-solve Hamiltonian fields equal the Darboux formula "
        f"on {count} random cubics (dim 3 and 5)", 30.0, started,
        failures == 0, f"{failures} mismatches")


# -- criterion 2: the 3D left-invariant classification table -----------------

_EXPECTED_CONDITION = {
    "sl2": {(2, 0, 0): Fraction(-1, 2), (0, 1, 1): Fraction(-1)},
    "su2": {(2, 0, 0): Fraction(-1, 2), (0, 2, 0): Fraction(-1, 2),
            (0, 0, 2): Fraction(-1, 2)},
    "h3": {(0, 0, 2): Fraction(-1, 2)},
    "r3_0p": {(0, 2, 0): Fraction(1, 2), (0, 0, 2): Fraction(1, 2)},
    "r3_m1": {(0, 1, 1): Fraction(-1)},
    "r3_p1": {},
    "r3": {(2, 0, 0): Fraction(1, 2)},
    # extra slot is the parameter lam; zero set {l1 l2 = 0} since lam != 1
    "r3_lambda": {(1, 1, 0, 1): Fraction(1, 2), (1, 1, 0, 0): Fraction(-1, 2)},
    "r3p_lambda": {(2, 0, 0, 0): Fraction(1, 2), (0, 2, 0, 0): Fraction(1, 2)},
}


def _proportional(poly, expected_terms):
    if not expected_terms:
        return poly.is_zero()
    if poly.is_zero() or set(poly.terms) != set(expected_terms):
        return False
    ratio = None
    for e, c in poly.terms.items():
        r = c / expected_terms[e]
        if ratio is None:
            ratio = r
        elif r != ratio:
            return False
    return ratio != 0


def check_classification_table(seed=None):
    started = time.time()
    problems = []
    flagged = False
    for name, expected in _EXPECTED_CONDITION.items():
        poly, report = classify_algebra(name)
        if not _proportional(poly, expected):
            problems.append(f"{name}: got {poly_to_string(poly)}")
        if name == "r3_p1" and not poly.is_zero():
            problems.append("r3_p1 should admit no contact form")
        if any("'>'" in note or "' >'" in note or ">" in note
               for note in report["notes"]):
            flagged = True
    return _result(
        "C2", "left-invariant contact conditions match the classification "
        "table on all nine algebras", 5.0, started,
        not problems and flagged,
        "; ".join(problems) if problems else
        "strict-inequality rows flagged; r3_p1 has no contact form")


# -- criterion 3: worked-example identities ----------------------------------

def check_worked_examples():
    started = time.time()
    problems = []

    br = load_bundled("brockett")
    vol = br.contact.volume
    expected = KForm.from_strings(br.chart, 3, {"dx^dy^dz": "1/2"})
    if vol != expected:
        problems.append("brockett volume")
    if [str(h) for h in br.system.hamiltonians] != ["y", "-x", "-1"]:
        problems.append("brockett hamiltonians")

    sw = load_bundled("schwarz")
    expected = KForm.from_strings(sw.chart, 3, {"dx^dv^da": "1/v^3"})
    if sw.contact.volume != expected:
        problems.append("schwarz volume")
    sd = load_bundled("schwarz-darboux")
    expected_hams = [parse_expr(t, sd.chart)
                     for t in ("2*p", "p*q - 1", "q^2*p/2 - q")]
    if list(sd.system.hamiltonians) != expected_hams:
        problems.append("schwarz darboux hamiltonians")

    qd = load_bundled("quantum5d")
    expected = KForm.from_strings(
        qd.chart, 5, {"dx1^dx2^dx3^dx4^dx5": "2"})
    if qd.contact.volume != expected:
        problems.append("quantum volume")
    mm = qd.build_momentum_map()
    J = [str(c) for c in mm.components]
    if J != ["x2", "-x1", "-1"]:
        problems.append(f"quantum momentum components {J}")
    red = reduce_level_set(mm, [Fraction(1), Fraction(1), Fraction(-1)],
                           qd.momentum_spec["fixed_vars"], sys=qd.system)
    expected_red = KForm.from_strings(red.structure.chart, 1,
                                      {"dx3": "x4", "dx5": "1"})
    if red.structure.eta != expected_red:
        problems.append("quantum reduced contact form")

    sl = load_bundled("sl2-automorphic")
    eta2, eta3 = sl.forms["etaL2"], sl.forms["etaL3"]
    # the Maurer-Cartan sign: d eta1 = -eta2 ^ eta3 for these brackets
    # (the reference line carries the opposite sign; see the sign note)
    d_eta1 = ext_d(sl.forms["etaL1"])
    if d_eta1 != -wedge(eta2, eta3) or d_eta1 == wedge(eta2, eta3):
        problems.append("sl2 d(etaL1) is not -etaL2 ^ etaL3")
    if not wedge(d_eta1, sl.forms["etaL1"]).coeffs:
        problems.append("sl2 d(etaL1) ^ etaL1 vanishes")
    h1, h2, h3 = sl.system.hamiltonians
    S = sl.contact
    if contact_bracket(S, h1, h2) != -2 * h2:
        problems.append("sl2 {h1,h2}")
    if contact_bracket(S, h1, h3) != 2 * h3:
        problems.append("sl2 {h1,h3}")
    if contact_bracket(S, h2, h3) != -h1:
        problems.append("sl2 {h2,h3}")

    return _result(
        "C3", "worked-example identities (brockett, schwarz, quantum, sl2)",
        10.0, started, not problems,
        "; ".join(problems) if problems else
        "sl2 coframe satisfies d(etaL1) = -etaL2 ^ etaL3 (sign flipped "
        "against the reference line, as the brackets force)")


# -- criterion 4: Liouville and the non-conservative volume factor -----------

def check_liouville():
    started = time.time()
    problems = []
    for name in CONSERVATIVE_BUNDLED:
        d = load_bundled(name)
        report = liouville_report(d.system)
        if report["kind"] != "conservative_contact":
            problems.append(f"{name} not conservative")
        for row in report["rows"]:
            if not row["divergence"].is_zero():
                problems.append(f"{name}/{row['generator']} divergence != 0")
    nc = load_bundled("nonconservative")
    report = liouville_report(nc.system)
    factors = {row["generator"]: row for row in report["rows"]}
    x3 = factors["X3"]
    chart = nc.chart
    if x3["divergence"] != parse_expr("-2*p", chart):
        problems.append("nonconservative divergence of X3")
    if x3["divergence"] != -2 * x3["reeb_derivative"]:
        problems.append("volume factor is not -2 (Rh)")
    return _result(
        "C4", "Liouville: conservative generators are divergence-free; the "
        "non-conservative factor is -2(Rh) with the orientation note",
        5.0, started, not problems, "; ".join(problems) or report["note"][:60])


# -- criterion 5: bracket/field morphism and good-function Jacobi ------------

def check_bracket_morphism(pairs=100, triples=100, seed=23):
    started = time.time()
    rng = random.Random(seed)
    problems = 0
    for n in (1, 2):
        structure = darboux_chart(n)
        for _ in range(pairs):
            f = random_poly(structure.chart, rng, degree=2, terms=3)
            g = random_poly(structure.chart, rng, degree=2, terms=3)
            Xf = hamiltonian_field(structure, f, verify=False).field
            Xg = hamiltonian_field(structure, g, verify=False).field
            fg = contact_bracket(structure, f, g)
            Xfg = hamiltonian_field(structure, fg, verify=False).field
            if lie_bracket(Xf, Xg) != Xfg:
                problems += 1
    structure = darboux_chart(1)
    good_vars = structure.chart.variables[:-1]
    for _ in range(triples):
        f, g, h = (random_poly(structure.chart, rng, degree=2, terms=3,
                               variables=good_vars) for _ in range(3))
        total = contact_bracket(structure, f, contact_bracket(structure, g, h))
        total = total + contact_bracket(
            structure, g, contact_bracket(structure, h, f))
        total = total + contact_bracket(
            structure, h, contact_bracket(structure, f, g))
        if not total.is_zero():
            problems += 1
    return _result(
        "C5", f"[X_f,X_g] = X_(f,g) on {pairs} pairs per chart; Jacobi on "
        f"{triples} good triples", 60.0, started, problems == 0,
        f"{problems} failures")


# -- criterion 6: the superposition pipeline ---------------------------------

def sl2_superposition(copies=2, seed=7):
    d = load_bundled("sl2-automorphic")
    prol = Prolongation(d.chart, copies)
    hams = [prol.function(h) for h in d.system.hamiltonians]
    slots = Chart("slots", ("v1", "v2", "v3"))
    casimir = parse_expr(d.superposition_spec["casimir"], slots).num
    seed_integral = casimir_integral(hams, casimir)
    annihilators = [prol.field(X) for X in d.generator_fields()]
    symmetries = [prol.field(d.fields[n])
                  for n in d.superposition_spec["symmetries"]]
    integral_set = generate_integrals(seed_integral, symmetries, annihilators,
                                      d.chart.dimension)
    return d, prol, integral_set


_SL2_I1_DISPLAY = ("-4*(beta_1*gamma_1*alpha_2 + alpha_2 "
                   "- alpha_1*beta_1*gamma_2)*(gamma_1*alpha_2*beta_2 "
                   "- alpha_1*(beta_2*gamma_2+1))/(alpha_1*alpha_2)")


def check_superposition(seed=7):
    started = time.time()
    problems = []
    d, prol, integral_set = sl2_superposition(seed=seed)
    I1 = integral_set.integrals[0]
    display = parse_expr(_SL2_I1_DISPLAY, prol.chart)
    ratio_ok = False
    if I1 == display:
        ratio_ok = True
    elif not display.is_zero():
        q = I1 / display
        ratio_ok = q.is_constant() and q.constant_value() != 0
    if not ratio_ok:
        problems.append("I1 does not match the reference rational function")
    annihilators = integral_set.annihilators
    for name, I in zip(integral_set.names, integral_set.integrals):
        if not all(X.apply(I).is_zero() for X in annihilators):
            problems.append(f"{name} not annihilated")
    first_copy = prol.copy_variables(1)
    result = rank_check(integral_set, first_copy, seed=seed)
    if result["generic_rank"] != 3:
        problems.append(f"rank {result['generic_rank']} != 3")
    if result["certificate_point"] is None:
        problems.append("no rational certificate point found")
    return _result(
        "C6", "sl2 Casimir integral matches the reference; prolonged "
        "annihilation exact; Jacobian rank 3 certified", 60.0, started,
        not problems, "; ".join(problems) or
        f"certificate {result['certificate_point']}")


# -- criterion 7: numerical invariants ----------------------------------------

def check_numerics():
    started = time.time()
    problems = []

    sd = load_bundled("schwarz-darboux")
    proj = project_conservative(sd.system, sd.projection_spec["invariant_vars"])
    from .liesystems import VGSystem
    red = VGSystem(proj.chart, proj.names, proj.generators,
                   proj.coefficients)

    # (a) equilibria stay fixed
    for point in ((1.0, 1.0), (-1.0, -1.0)):
        traj = integrate(red, point, 0.0, 1.0, 1e-3)
        err = float(np.max(np.abs(traj.final() - np.array(point))))
        if err >= 1e-12:
            problems.append(f"equilibrium {point} drifts {err:.2e}")

    # (b) conserved-energy drift and observed order
    energy = parse_expr("q^2*p/2 - q - p/2", sd.chart)
    traj = integrate(sd.system, (0.0, 0.5, 0.0), 0.0, 5.0, 1e-3)
    rep = monitor_first_integrals(traj, [energy], ["energy"])[0]
    if rep.max_rel_drift >= 1e-8:
        problems.append(f"energy drift {rep.max_rel_drift:.2e}")
    order, _ = drift_order(sd.system, (0.0, 0.5, 0.0), 0.0, 5.0, 1e-2, energy)
    if not (3.7 <= order <= 4.3):
        problems.append(f"drift order {order:.2f} outside 4 +- 0.3")
    for name, expr, x0 in (
            ("brockett", "y - x", (0.2, -0.3, 0.1)),
            ("simple-control", "y - x", (0.2, -0.3, 0.1)),
            ("quantum5d", "x1 - x2 + x3 - x4 - 1",
             (0.2, -0.3, 0.1, 0.4, 0.0))):
        d = load_bundled(name)
        conserved = parse_expr(expr, d.chart)
        traj = integrate(d.system, x0, 0.0, 5.0, 1e-3)
        r = monitor_first_integrals(traj, [conserved])[0]
        if r.max_rel_drift >= 1e-8:
            problems.append(f"{name} drift {r.max_rel_drift:.2e}")

    # (c) transported polygon area
    area = monitor_polygon_area(red, ball_boundary((0.0, 0.0), 1.0, 10000),
                                0.0, 2.0, 1e-3)
    if area.max_rel_drift >= 1e-3:
        problems.append(f"area drift {area.max_rel_drift:.2e}")

    # (d) superposition integrals along an independently integrated pair
    d, prol, integral_set = sl2_superposition()
    sl = d.system
    trajA = integrate(sl, (1.0, 0.0, 0.0), 0.0, 1.0, 1e-3)
    trajB = integrate(sl, (2.0, 1.0 / 3.0, -0.5), 0.0, 1.0, 1e-3)
    cols = ([trajA.states[:, i] for i in range(3)]
            + [trajB.states[:, i] for i in range(3)])
    for name, I in zip(integral_set.names, integral_set.integrals):
        fn = compile_scalar(I)
        values = fn(*cols)
        drift = float(np.max(np.abs(values - values[0])))
        rel = drift / max(1.0, abs(float(values[0])))
        if rel >= 1e-6:
            problems.append(f"{name} drifts {rel:.2e} along the pair")

    return _result(
        "C7", "numerical invariants: equilibria, drift + order, polygon "
        "area, pairwise integral constancy", 120.0, started,
        not problems, "; ".join(problems))


# -- criterion 8: no-go verdicts and the non-conservative classification ------

def check_verdicts():
    started = time.time()
    problems = []
    for name in ("brockett", "simple-control", "schwarz"):
        d = load_bundled(name)
        report = no_go_check(d.system)
        if not report["no_poisson_realization"] or \
                report["distribution_rank"] != 3:
            problems.append(f"{name}: {report['message']}")
    nc = load_bundled("nonconservative")
    cl = classify_contact_system(nc.system)
    if cl.kind != "contact" or cl.good_flags != (True, True, False):
        problems.append(f"nonconservative classified {cl.kind}")
    return _result(
        "C8", "no-go verdicts (rank 3, odd dimension) and the contact-but-"
        "not-conservative classification", 5.0, started, not problems,
        "; ".join(problems))


# -- criterion 9: saddle structure of the reduced field ----------------------

def check_saddles():
    started = time.time()
    problems = []
    sd = load_bundled("schwarz-darboux")
    proj = project_conservative(sd.system, sd.projection_spec["invariant_vars"])
    from .liesystems import VGSystem
    red = VGSystem(proj.chart, proj.names, proj.generators,
                   proj.coefficients)
    rows = phase_portrait(red, {"q": (-3, 3, 25), "p": (-3, 3, 25)})
    zeros = [(r["q"], r["p"]) for r in rows
             if not r["pole"] and r["dq"] == 0.0 and r["dp"] == 0.0]
    if sorted(zeros) != [(-1.0, -1.0), (1.0, 1.0)]:
        problems.append(f"grid zeros {zeros}")
    field = combined_field(red, 0)
    for point in ({"q": 1, "p": 1}, {"q": -1, "p": -1}):
        report = planar_equilibrium_report(field, point)
        if not (report["is_equilibrium"] and report["saddle"]
                and report["eigenvalues_real"]):
            problems.append(f"{point} is not a saddle")
    return _result(
        "C9", "reduced field vanishes exactly at (1,1) and (-1,-1) on the "
        "sample grid; exact linearization is a saddle at both", 10.0,
        started, not problems, "; ".join(problems))


ALL_CHECKS = (
    check_darboux_equivalence,
    check_classification_table,
    check_worked_examples,
    check_liouville,
    check_bracket_morphism,
    check_superposition,
    check_numerics,
    check_verdicts,
    check_saddles,
)


def run_all():
    return [fn() for fn in ALL_CHECKS]
