from fractions import Fraction

import pytest

from contactlie.cartan import KForm, VectorField
from contactlie.charts import Chart
from contactlie.errors import InputError, SingularFrameError
from contactlie.exprcore import Poly, parse_expr
from contactlie.liealgebra import (DualElement, Frame, StructureConstants,
                                   builtin_algebras, ce_delta,
                                   ce_delta_covector, classify_algebra,
                                   contact_condition_3d, covector_wedge,
                                   dual_coframe, verify_structure)

ALGEBRAS = builtin_algebras()


class TestStructureConstants:
    def test_all_builtins_satisfy_jacobi(self):
        for name, algebra in ALGEBRAS.items():
            assert algebra.jacobi_defect() is None, name

    def test_non_jacobi_rejected(self):
        # [e1,e2] = e3, [e1,e3] = e1, [e2,e3] = e2 violates Jacobi
        with pytest.raises(InputError):
            StructureConstants(3, {(0, 1): [0, 0, 1],
                                   (0, 2): [1, 0, 0],
                                   (1, 2): [0, 1, 0]})

    def test_antisymmetry_enforced(self):
        with pytest.raises(InputError):
            StructureConstants(2, {(0, 1): [0, 1], (1, 0): [0, 1]})

    def test_opposite_is_still_a_lie_algebra(self):
        opp = ALGEBRAS["sl2"].opposite()
        assert opp.jacobi_defect() is None
        assert opp.entry(0, 1, 1) == -ALGEBRAS["sl2"].entry(0, 1, 1)


class TestCeDelta:
    def test_sl2_generic_element(self):
        theta = DualElement.generic(ALGEBRAS["sl2"])
        delta = ce_delta(theta)
        ring = theta.ring
        half = Fraction(1, 2)
        # delta(theta) = -(l2/2) e1^e2 + (l3/2) e1^e3 - (l1/2) e2^e3
        assert delta[(0, 1)] == Poly(ring, {(0, 1, 0): -half})
        assert delta[(0, 2)] == Poly(ring, {(0, 0, 1): half})
        assert delta[(1, 2)] == Poly(ring, {(1, 0, 0): -half})

    def test_abelian_vanishes(self):
        abelian = StructureConstants(3, {})
        theta = DualElement.generic(abelian)
        assert ce_delta(theta) == {}

    def test_delta_squared_zero_iff_jacobi(self):
        for name in ("sl2", "h3", "r3"):
            algebra = ALGEBRAS[name]
            theta = DualElement.generic(algebra)
            two = ce_delta(theta)
            assert ce_delta_covector(algebra, theta.ring, two) == {}
        broken = StructureConstants(
            3, {(0, 1): [0, 0, 1], (0, 2): [1, 0, 0], (1, 2): [0, 1, 0]},
            check=False)
        theta = DualElement.generic(broken)
        assert ce_delta_covector(broken, theta.ring, ce_delta(theta)) != {}


class TestContactCondition:
    def test_heisenberg(self):
        poly = contact_condition_3d(ALGEBRAS["h3"])
        ring = poly.vars
        assert poly == Poly(ring, {(0, 0, 2): Fraction(-1, 2)})

    def test_no_contact_form_case(self):
        poly, report = classify_algebra("r3_p1")
        assert poly.is_zero()
        assert report["condition"] == "no left-invariant contact form"

    def test_parametric_family(self):
        poly = contact_condition_3d(ALGEBRAS["r3_lambda"])
        ring = poly.vars
        expected = Poly(ring, {(1, 1, 0, 1): Fraction(1, 2),
                               (1, 1, 0, 0): Fraction(-1, 2)})
        assert poly == expected

    def test_sum_of_squares_families(self):
        poly = contact_condition_3d(ALGEBRAS["r3p_lambda"])
        ring = poly.vars
        assert poly == Poly(ring, {(2, 0, 0, 0): Fraction(1, 2),
                                   (0, 2, 0, 0): Fraction(1, 2)})

    def test_strict_inequality_rows_flagged(self):
        _, report = classify_algebra("sl2")
        assert any(">" in note for note in report["notes"])

    def test_wrong_dimension_rejected(self):
        with pytest.raises(InputError):
            contact_condition_3d(StructureConstants(2, {}))


class TestDualCoframe:
    def test_coordinate_frame(self):
        chart = Chart("c3", ("q", "p", "z"))
        frame = Frame(chart, [
            VectorField.from_strings(chart, c)
            for c in (["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"])])
        forms = dual_coframe(frame)
        for i, form in enumerate(forms):
            expected = {(i,): parse_expr("1", chart)}
            assert form.coeffs == expected

    def test_heisenberg_symmetry_frame(self):
        chart = Chart("brockett", ("x", "y", "z"))
        frame = Frame(chart, [
            VectorField.from_strings(chart, c)
            for c in (["1", "0", "y"], ["0", "1", "-x"], ["0", "0", "2"])])
        forms = dual_coframe(frame)
        assert forms[2] == KForm.from_strings(
            chart, 1, {"dx": "-y/2", "dy": "x/2", "dz": "1/2"})

    def test_scaling_symmetry_frame(self):
        chart = Chart("schwarz", ("x", "v", "a"))
        frame = Frame(chart, [
            VectorField.from_strings(chart, c)
            for c in (["1", "0", "0"], ["x", "v", "a"],
                      ["x^2", "2*v*x", "2*(a*x+v^2)"])])
        forms = dual_coframe(frame)
        assert forms[1] == KForm.from_strings(
            chart, 1, {"dv": "(a*x+v^2)/v^3", "da": "-x/v^2"})

    def test_duality_is_exact(self):
        chart = Chart("sl2grp", ("alpha", "beta", "gamma"))
        frame = Frame(chart, [
            VectorField.from_strings(chart, c)
            for c in (["alpha", "-beta", "gamma"], ["0", "alpha", "0"],
                      ["beta", "0", "(1+beta*gamma)/alpha"])])
        forms = dual_coframe(frame)
        one = parse_expr("1", chart)
        for i, form in enumerate(forms):
            for j, field in enumerate(frame.fields):
                pairing = sum(
                    (form.coeffs.get((k,), parse_expr("0", chart))
                     * field.components[k] for k in range(3)),
                    parse_expr("0", chart))
                assert pairing == (one if i == j else parse_expr("0", chart))

    def test_singular_frame_reports_degeneracy(self):
        chart = Chart("c2", ("x", "y"))
        with pytest.raises(SingularFrameError):
            Frame(chart, [VectorField.from_strings(chart, ["x", "y"]),
                          VectorField.from_strings(chart, ["2*x", "2*y"])])


class TestVerifyStructure:
    def test_sl2_right_invariant_frame(self):
        chart = Chart("sl2grp", ("alpha", "beta", "gamma"))
        frame = Frame(chart, [
            VectorField.from_strings(chart, c)
            for c in (["alpha", "beta", "-gamma"],
                      ["gamma", "(1+beta*gamma)/alpha", "0"],
                      ["0", "0", "alpha"])])
        algebra = StructureConstants(3, {(0, 1): [0, -2, 0],
                                         (1, 2): [-1, 0, 0],
                                         (0, 2): [0, 0, 2]})
        ok, residuals = verify_structure(frame, algebra)
        assert ok and not residuals

    def test_heisenberg_realization(self):
        chart = Chart("control3", ("x", "y", "z"))
        frame = Frame(chart, [
            VectorField.from_strings(chart, c)
            for c in (["1", "0", "0"], ["0", "1", "x"], ["0", "0", "1"])])
        algebra = StructureConstants(3, {(0, 1): [0, 0, 1]})
        ok, _ = verify_structure(frame, algebra)
        assert ok

    def test_perturbed_constant_detected(self):
        chart = Chart("control3", ("x", "y", "z"))
        frame = Frame(chart, [
            VectorField.from_strings(chart, c)
            for c in (["1", "0", "0"], ["0", "1", "x"], ["0", "0", "1"])])
        algebra = StructureConstants(3, {(0, 1): [0, 0, -1]})
        ok, residuals = verify_structure(frame, algebra)
        assert not ok
        assert (0, 1) in residuals
        assert not residuals[(0, 1)].is_zero()


class TestCovectorAlgebra:
    def test_wedge_antisymmetry(self):
        ring = ("l1",)
        one = Poly.const(ring, 1)
        a = {(0,): one}
        b = {(1,): one}
        assert covector_wedge(a, b) == {(0, 1): one}
        assert covector_wedge(b, a) == {(0, 1): -one}
