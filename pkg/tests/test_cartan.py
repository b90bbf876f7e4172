import random
from fractions import Fraction

import pytest

from contactlie.cartan import (CoordinateMap, KForm, VectorField, divergence,
                               ext_d, interior, lie_bracket, lie_derivative,
                               pullback, remap, restrict_expr, wedge,
                               wedge_power)
from contactlie.charts import Chart, ExpAtom
from contactlie.errors import InputError
from contactlie.exprcore import RationalExpr, parse_expr

C3 = Chart("c3", ("q", "p", "z"))
SCHWARZ = Chart("schwarz", ("x", "v", "a"))


def expr(text, chart=C3):
    return parse_expr(text, chart)


def one_form(chart, **coeffs):
    return KForm.from_strings(chart, 1, {f"d{k}": v for k, v in coeffs.items()})


ETA = one_form(C3, q="-p", z="1")          # dz - p dq


class TestWedge:
    def test_contact_volume(self):
        d_eta = ext_d(ETA)
        assert d_eta == KForm.from_strings(C3, 2, {"dq^dp": "1"})
        vol = wedge(ETA, d_eta)
        assert vol == KForm.from_strings(C3, 3, {"dq^dp^dz": "1"})

    def test_one_form_squares_to_zero(self):
        rng = random.Random(2)
        for _ in range(10):
            alpha = _random_one_form(C3, rng)
            assert wedge(alpha, alpha).is_zero()

    def test_schwarz_volume(self):
        eta2 = one_form(SCHWARZ, v="(a*x+v^2)/v^3", a="-x/v^2")
        vol = wedge(eta2, ext_d(eta2))
        assert vol == KForm.from_strings(SCHWARZ, 3, {"dx^dv^da": "1/v^3"})

    def test_graded_anticommutativity(self):
        rng = random.Random(3)
        for _ in range(10):
            a = _random_one_form(C3, rng)
            b = _random_one_form(C3, rng)
            assert wedge(a, b) == -wedge(b, a)

    def test_overflow_is_zero(self):
        vol = KForm.from_strings(C3, 3, {"dq^dp^dz": "1"})
        assert wedge(vol, ETA).is_zero()


class TestExteriorDerivative:
    def test_dd_zero(self):
        rng = random.Random(4)
        for degree in (0, 1, 2):
            for _ in range(8):
                a = _random_form(C3, degree, rng)
                assert ext_d(ext_d(a)).is_zero()

    def test_graded_leibniz(self):
        rng = random.Random(5)
        for da, db in ((0, 1), (1, 1), (1, 2)):
            for _ in range(6):
                a = _random_form(C3, da, rng)
                b = _random_form(C3, db, rng)
                lhs = ext_d(wedge(a, b))
                rhs = wedge(ext_d(a), b)
                sign_term = wedge(a, ext_d(b))
                if da % 2:
                    sign_term = -sign_term
                assert lhs == rhs + sign_term


class TestInterior:
    def test_reeb_pairing(self):
        R = VectorField.from_strings(C3, ["0", "0", "1"])
        assert interior(R, ETA) == KForm.function(C3, expr("1"))

    def test_scaled_reeb_normalization(self):
        B = Chart("brockett", ("x", "y", "z"))
        eta3 = one_form(B, x="-y/2", y="x/2", z="1/2")
        R = VectorField.from_strings(B, ["0", "0", "2"])
        assert interior(R, eta3) == KForm.function(B, parse_expr("1", B))

    def test_degree_zero_rejected(self):
        X = VectorField.from_strings(C3, ["1", "0", "0"])
        with pytest.raises(InputError):
            interior(X, KForm.function(C3, expr("q")))

    def test_antiderivation(self):
        rng = random.Random(6)
        X = _random_field(C3, rng)
        a = _random_one_form(C3, rng)
        b = _random_one_form(C3, rng)
        lhs = interior(X, wedge(a, b))
        rhs = wedge(interior(X, a), b) - wedge(a, interior(X, b))
        assert lhs == rhs


class TestLieBracket:
    def test_projective_generators(self):
        line = Chart("line", ("x",))
        X2 = VectorField.from_strings(line, ["x"])
        X3 = VectorField.from_strings(line, ["x^2"])
        assert lie_bracket(X2, X3) == X3

    def test_self_bracket_zero(self):
        rng = random.Random(7)
        X = _random_field(C3, rng)
        assert lie_bracket(X, X).is_zero()

    def test_brockett_center(self):
        B = Chart("brockett", ("x", "y", "z"))
        X1 = VectorField.from_strings(B, ["1", "0", "-y"])
        X2 = VectorField.from_strings(B, ["0", "1", "x"])
        assert lie_bracket(X1, X2) == VectorField.from_strings(B, ["0", "0", "2"])

    def test_jacobi_identity(self):
        rng = random.Random(8)
        for _ in range(6):
            X, Y, Z = (_random_field(C3, rng) for _ in range(3))
            total = (lie_bracket(X, lie_bracket(Y, Z))
                     + lie_bracket(Y, lie_bracket(Z, X))
                     + lie_bracket(Z, lie_bracket(X, Y)))
            assert total.is_zero()


class TestLieDerivative:
    def test_reeb_preserves_eta(self):
        R = VectorField.from_strings(C3, ["0", "0", "1"])
        assert lie_derivative(R, ETA).is_zero()

    def test_good_hamiltonian_preserves_eta(self):
        X = VectorField.from_strings(C3, ["q", "-p", "1"])   # field of pq - 1
        assert lie_derivative(X, ETA).is_zero()

    def test_function_derivative(self):
        X = VectorField.from_strings(C3, ["1", "0", "0"])
        out = lie_derivative(X, KForm.function(C3, expr("q^2")))
        assert out == KForm.function(C3, expr("2*q"))

    def test_cartan_formula(self):
        rng = random.Random(9)
        for degree in (1, 2):
            for _ in range(6):
                X = _random_field(C3, rng)
                a = _random_form(C3, degree, rng)
                direct = lie_derivative(X, a)
                assert direct == interior(X, ext_d(a)) + ext_d(interior(X, a))

    def test_commutator_with_interior(self):
        rng = random.Random(10)
        for _ in range(6):
            X = _random_field(C3, rng)
            Y = _random_field(C3, rng)
            a = _random_form(C3, 2, rng)
            lhs = (lie_derivative(X, interior(Y, a))
                   - interior(Y, lie_derivative(X, a)))
            assert lhs == interior(lie_bracket(X, Y), a)


class TestPullback:
    def test_projection(self):
        plane = Chart("plane", ("q", "p"))
        proj = CoordinateMap(C3, plane, [expr("q"), expr("p")])
        omega = KForm.from_strings(plane, 2, {"dq^dp": "1"})
        assert pullback(proj, omega) == KForm.from_strings(C3, 2, {"dq^dp": "1"})

    def test_log_component_gives_schwarz_form(self):
        darboux = Chart("darboux", ("q", "p", "z"))
        cmap = CoordinateMap(SCHWARZ, darboux, [
            parse_expr("a/v", SCHWARZ),
            parse_expr("x/v", SCHWARZ),
            ("log", parse_expr("v", SCHWARZ)),
        ])
        eta_d = one_form(darboux, q="-p", z="1")
        pulled = pullback(cmap, eta_d)
        assert pulled == one_form(SCHWARZ, v="(a*x+v^2)/v^3", a="-x/v^2")

    def test_atom_inverse_map(self):
        darboux = Chart("darboux", ("q", "p", "z"),
                        (ExpAtom("u", "z", Fraction(1)),))
        cmap = CoordinateMap(darboux, SCHWARZ, [
            parse_expr("p*u", darboux),
            parse_expr("u", darboux),
            parse_expr("q*u", darboux),
        ])
        eta2 = one_form(SCHWARZ, v="(a*x+v^2)/v^3", a="-x/v^2")
        pulled = pullback(cmap, eta2)
        assert pulled == one_form(darboux, q="-p", z="1")

    def test_constants_pull_back_unchanged(self):
        plane = Chart("plane", ("q", "p"))
        proj = CoordinateMap(C3, plane, [expr("q"), expr("p")])
        c = KForm.function(plane, parse_expr("5/3", plane))
        assert pullback(proj, c) == KForm.function(C3, expr("5/3"))

    def test_functorial_wedge_and_d(self):
        rng = random.Random(11)
        plane = Chart("plane", ("s", "w"))
        cmap = CoordinateMap(C3, plane,
                             [expr("q^2 - p"), expr("z + q*p")])
        for _ in range(6):
            a = _random_one_form(plane, rng)
            b = _random_one_form(plane, rng)
            assert pullback(cmap, wedge(a, b)) == wedge(pullback(cmap, a),
                                                        pullback(cmap, b))
            assert pullback(cmap, ext_d(a)) == ext_d(pullback(cmap, a))

    def test_log_variable_in_coefficient_rejected(self):
        darboux = Chart("darboux", ("q", "p", "z"))
        cmap = CoordinateMap(SCHWARZ, darboux, [
            parse_expr("a/v", SCHWARZ),
            parse_expr("x/v", SCHWARZ),
            ("log", parse_expr("v", SCHWARZ)),
        ])
        bad = one_form(darboux, q="z")
        with pytest.raises(InputError):
            pullback(cmap, bad)


class TestDivergence:
    def test_conservative_field_divergence_free(self):
        vol = wedge(ETA, ext_d(ETA))
        X = VectorField.from_strings(C3, ["2", "0", "0"])   # field of 2p
        assert divergence(X, vol).is_zero()

    def test_translation_flat_volume(self):
        flat = KForm.from_strings(C3, 3, {"dq^dp^dz": "1"})
        X = VectorField.from_strings(C3, ["1", "0", "0"])
        assert divergence(X, flat).is_zero()

    def test_nonconservative_factor(self):
        flat = KForm.from_strings(C3, 3, {"dq^dp^dz": "1"})
        X = VectorField.from_strings(C3, ["z", "-p^2", "0"])
        assert divergence(X, flat) == expr("-2*p")
        # oracle: the raw Lie derivative carries the same factor
        lie = lie_derivative(X, flat)
        assert lie == flat * expr("-2*p")

    def test_rejects_non_volume(self):
        with pytest.raises(InputError):
            divergence(VectorField.from_strings(C3, ["1", "0", "0"]), ETA)


class TestRemap:
    def test_extension_and_restriction(self):
        big = Chart("big", ("t", "q", "p", "z"))
        f = expr("q*p - z")
        lifted = remap(f, big)
        assert lifted == parse_expr("q*p - z", big)
        assert restrict_expr(lifted, C3) == f

    def test_restriction_rejects_used_symbols(self):
        big = Chart("big", ("t", "q", "p", "z"))
        with pytest.raises(InputError):
            restrict_expr(parse_expr("t*q", big), C3)


def _random_poly_expr(chart, rng):
    text_terms = []
    for _ in range(rng.randint(1, 3)):
        var = rng.choice(chart.variables)
        text_terms.append(f"{rng.randint(-3, 3)}*{var}^{rng.randint(0, 2)}")
    return parse_expr("+".join(text_terms) or "0", chart)


def _random_field(chart, rng):
    return VectorField(chart, [_random_poly_expr(chart, rng)
                               for _ in range(chart.dimension)])


def _random_one_form(chart, rng):
    return KForm.one_form(chart, [_random_poly_expr(chart, rng)
                                  for _ in range(chart.dimension)])


def _random_form(chart, degree, rng):
    if degree == 0:
        return KForm.function(chart, _random_poly_expr(chart, rng))
    import itertools
    coeffs = {}
    for idx in itertools.combinations(range(chart.dimension), degree):
        coeffs[idx] = _random_poly_expr(chart, rng)
    return KForm(chart, degree, coeffs)
