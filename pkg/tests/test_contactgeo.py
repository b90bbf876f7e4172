import random
from fractions import Fraction

import pytest

from contactlie.cartan import (KForm, VectorField, ext_d, lie_derivative,
                               wedge, wedge_power)
from contactlie.charts import Chart
from contactlie.contactgeo import (check_contact, contact_bracket,
                                   darboux_hamiltonian_field,
                                   energy_evolution, hamiltonian_field,
                                   hamiltonian_of, is_good, symplectify)
from contactlie.errors import (InputError, NotContactError,
                               NotHamiltonianError)
from contactlie.exprcore import RationalExpr, parse_expr

C3 = Chart("c3", ("q", "p", "z"))


def expr(text, chart=C3):
    return parse_expr(text, chart)


def one_form(chart, **coeffs):
    return KForm.from_strings(chart, 1, {f"d{k}": v for k, v in coeffs.items()})


@pytest.fixture(scope="module")
def darboux3():
    return check_contact(C3, one_form(C3, q="-p", z="1"))


@pytest.fixture(scope="module")
def brockett():
    B = Chart("brockett", ("x", "y", "z"))
    return check_contact(B, one_form(B, x="-y/2", y="x/2", z="1/2"))


@pytest.fixture(scope="module")
def quantum():
    Q = Chart("q5", ("x1", "x2", "x3", "x4", "x5"))
    return check_contact(Q, one_form(Q, x1="x2", x3="x4", x5="1"))


class TestCheckContact:
    def test_standard_form(self, darboux3):
        assert darboux3.n == 1
        assert darboux3.reeb == VectorField.from_strings(C3, ["0", "0", "1"])
        assert darboux3.vanishing_locus.is_constant()
        assert darboux3.darboux_layout() == ((0,), (1,), 2)

    def test_schwarz_locus(self):
        O = Chart("schwarz", ("x", "v", "a"))
        eta2 = one_form(O, v="(a*x+v^2)/v^3", a="-x/v^2")
        S = check_contact(O, eta2)
        locus = RationalExpr.from_poly(O, S.vanishing_locus)
        assert locus == parse_expr("v^3", O)
        assert S.reeb == VectorField.from_strings(O, ["x", "v", "a"])

    def test_degenerate_form_rejected(self):
        with pytest.raises(NotContactError):
            check_contact(C3, one_form(C3, z="1"))

    def test_even_dimension_rejected(self):
        plane = Chart("plane", ("q", "p"))
        with pytest.raises(NotContactError):
            check_contact(plane, one_form(plane, q="-p"))

    def test_reeb_normalization(self, brockett):
        assert brockett.reeb == VectorField.from_strings(
            brockett.chart, ["0", "0", "2"])

    def test_quantum_reeb(self, quantum):
        assert quantum.reeb == VectorField.from_strings(
            quantum.chart, ["0", "0", "0", "0", "1"])
        top = "dx1^dx2^dx3^dx4^dx5"
        assert quantum.volume == KForm.from_strings(
            quantum.chart, 5, {top: "2"})


class TestHamiltonianField:
    @pytest.mark.parametrize("h_text,components", [
        ("-1", ["0", "0", "1"]),
        ("2*p", ["2", "0", "0"]),
        ("p*q - 1", ["q", "-p", "1"]),
        ("q^2*p/2 - q", ["q^2/2", "1 - p*q", "q"]),
    ])
    def test_reference_fields(self, darboux3, h_text, components):
        pair = hamiltonian_field(darboux3, expr(h_text))
        assert pair.field == VectorField.from_strings(C3, components)

    def test_brockett_recovery(self, brockett):
        B = brockett.chart
        X1 = VectorField.from_strings(B, ["1", "0", "-y"])
        assert hamiltonian_of(brockett, X1) == parse_expr("y", B)

    def test_reeb_hamiltonian_is_minus_one(self, darboux3):
        assert hamiltonian_of(darboux3, darboux3.reeb) == expr("-1")

    def test_rejection_with_residual(self, darboux3):
        bad = VectorField.from_strings(C3, ["0", "1", "0"])
        with pytest.raises(NotHamiltonianError) as err:
            hamiltonian_of(darboux3, bad)
        assert err.value.residual is not None
        assert not err.value.residual.is_zero()

    def test_darboux_formula_matches_solve(self, darboux3):
        rng = random.Random(14)
        for _ in range(20):
            h = _random_poly_expr(C3, rng)
            pair = hamiltonian_field(darboux3, h)
            assert pair.field == darboux_hamiltonian_field(darboux3, h)

    def test_non_darboux_chart_also_works(self):
        O = Chart("schwarz", ("x", "v", "a"))
        eta2 = one_form(O, v="(a*x+v^2)/v^3", a="-x/v^2")
        S = check_contact(O, eta2)
        assert S.darboux_layout() is None
        X1 = VectorField.from_strings(O, ["0", "0", "2*v"])
        assert hamiltonian_of(S, X1) == parse_expr("2*x/v", O)


class TestBracket:
    def test_bracket_with_one_gives_reeb_derivative(self, darboux3):
        f = expr("p*z")
        one = RationalExpr.const(C3, 1)
        assert contact_bracket(darboux3, f, one) == expr("p")
        good = expr("p*q")
        assert contact_bracket(darboux3, good, one).is_zero()

    def test_quantum_canonical_pair(self, quantum):
        Q = quantum.chart
        out = contact_bracket(quantum, parse_expr("x2", Q),
                              parse_expr("-x1", Q))
        assert out == parse_expr("1", Q)

    def test_field_morphism_on_random_pairs(self, darboux3):
        from contactlie.cartan import lie_bracket
        rng = random.Random(15)
        for _ in range(25):
            f = _random_poly_expr(C3, rng)
            g = _random_poly_expr(C3, rng)
            Xf = hamiltonian_field(darboux3, f, verify=False).field
            Xg = hamiltonian_field(darboux3, g, verify=False).field
            Xfg = hamiltonian_field(darboux3,
                                    contact_bracket(darboux3, f, g),
                                    verify=False).field
            assert lie_bracket(Xf, Xg) == Xfg

    def test_leibniz_defect(self, darboux3):
        # the defect term rides the slot the Reeb derivative acts on:
        # {gh, f} = h{g,f} + g{h,f} + gh Rf, and with the arguments in the
        # other order the defect enters with a minus sign
        rng = random.Random(16)
        for _ in range(15):
            f, g, h = (_random_poly_expr(C3, rng) for _ in range(3))
            rf = darboux3.reeb_derivative(f)
            lhs = contact_bracket(darboux3, g * h, f)
            rhs = (h * contact_bracket(darboux3, g, f)
                   + g * contact_bracket(darboux3, h, f) + g * h * rf)
            assert lhs == rhs
            lhs2 = contact_bracket(darboux3, f, g * h)
            rhs2 = (h * contact_bracket(darboux3, f, g)
                    + g * contact_bracket(darboux3, f, h) - g * h * rf)
            assert lhs2 == rhs2

    def test_antisymmetry(self, darboux3):
        rng = random.Random(21)
        for _ in range(10):
            f = _random_poly_expr(C3, rng)
            g = _random_poly_expr(C3, rng)
            assert contact_bracket(darboux3, f, g) == \
                -contact_bracket(darboux3, g, f)

    def test_jacobi_on_good_functions(self, darboux3):
        rng = random.Random(17)
        for _ in range(15):
            f, g, h = (_random_poly_expr(C3, rng, variables=("q", "p"))
                       for _ in range(3))
            total = contact_bracket(darboux3, f,
                                    contact_bracket(darboux3, g, h))
            total = total + contact_bracket(
                darboux3, g, contact_bracket(darboux3, h, f))
            total = total + contact_bracket(
                darboux3, h, contact_bracket(darboux3, f, g))
            assert total.is_zero()


class TestEnergyEvolution:
    def test_conservative(self, darboux3):
        pair = hamiltonian_field(darboux3, expr("2*p"))
        assert energy_evolution(pair).is_zero()

    def test_dissipative(self, darboux3):
        pair = hamiltonian_field(darboux3, expr("p*z"))
        assert energy_evolution(pair) == expr("-p^2*z")

    def test_constant(self, darboux3):
        pair = hamiltonian_field(darboux3, expr("7"))
        assert energy_evolution(pair).is_zero()


class TestEtaInvariance:
    def test_field_scales_eta_by_reeb_derivative(self, darboux3):
        rng = random.Random(18)
        for _ in range(12):
            h = _random_poly_expr(C3, rng)
            pair = hamiltonian_field(darboux3, h)
            lie = lie_derivative(pair.field, darboux3.eta)
            assert lie == darboux3.eta * (-pair.reeb_derivative)

    def test_volume_scaling_law(self, darboux3):
        rng = random.Random(19)
        for _ in range(12):
            h = _random_poly_expr(C3, rng)
            pair = hamiltonian_field(darboux3, h)
            lie = lie_derivative(pair.field, darboux3.volume)
            factor = RationalExpr.const(C3, -(darboux3.n + 1))
            assert lie == darboux3.volume * (factor * pair.reeb_derivative)


class TestGoodFunctions:
    def test_examples(self, darboux3, brockett):
        assert is_good(brockett, parse_expr("y", brockett.chart))
        assert not is_good(darboux3, expr("p*z"))
        assert is_good(darboux3, expr("9/7"))


class TestSymplectify:
    def test_closed_and_nondegenerate(self, darboux3):
        ext, omega = symplectify(darboux3)
        assert ext.dimension == 4
        assert ext_d(omega).is_zero()
        square = wedge_power(omega, 2)
        # expansion oracle: omega^2 = 2 u^2 dq^dp^dz^ds with u = e^{-s}
        assert square.coeffs == {
            (0, 1, 2, 3): parse_expr("2*exp_ms_ext^2", ext)}

    def test_name_collision(self, darboux3):
        with pytest.raises(InputError):
            symplectify(darboux3, new_var="q")


def _random_poly_expr(chart, rng, variables=None, degree=3):
    from contactlie.exprcore import Poly
    symbols = variables if variables is not None else chart.variables
    vars = chart.symbols
    poly = Poly.zero(vars)
    for _ in range(rng.randint(1, 4)):
        exps = [0] * len(vars)
        for _ in range(rng.randint(0, degree)):
            exps[chart.index(rng.choice(symbols))] += 1
        poly = poly + Poly(vars, {tuple(exps):
                                  Fraction(rng.randint(-4, 4), rng.randint(1, 3))})
    return RationalExpr.from_poly(chart, poly)
