import copy
import json

import pytest

from contactlie.cli import main
from contactlie.definitions import (bundled_names, load_bundled,
                                    load_definition, serialize_definition)
from contactlie.errors import (NotHamiltonianError, SchemaError)

EXPECTED_SYSTEMS = {"brockett", "nonconservative", "quantum5d", "riccati",
                    "schwarz", "schwarz-darboux", "simple-control",
                    "sl2-automorphic"}


class TestBundled:
    def test_catalog(self):
        assert set(bundled_names()) == EXPECTED_SYSTEMS

    @pytest.mark.parametrize("name", sorted(EXPECTED_SYSTEMS))
    def test_loads_and_roundtrips(self, name):
        d = load_bundled(name)
        again = load_definition(serialize_definition(d))
        assert again.chart == d.chart
        assert set(again.fields) == set(d.fields)
        for fname in d.fields:
            assert again.fields[fname] == d.fields[fname]
        for oname in d.forms:
            assert again.forms[oname] == d.forms[oname]
        if d.system is not None:
            assert again.system.hamiltonians == d.system.hamiltonians
            assert again.system.coefficients == d.system.coefficients
            assert again.generator_names == d.generator_names


class TestValidation:
    def test_corrupted_hamiltonian_names_residual(self):
        data = copy.deepcopy(load_bundled("brockett").raw)
        data["hamiltonians"][1] = "x"
        with pytest.raises((NotHamiltonianError, SchemaError)) as err:
            load_definition(data)
        assert "residual" in str(err.value) or "X2" in str(err.value)

    def test_wrong_component_count(self):
        data = copy.deepcopy(load_bundled("brockett").raw)
        data["vector_fields"]["X1"] = ["1", "0"]
        with pytest.raises(SchemaError) as err:
            load_definition(data)
        assert err.value.path == "/vector_fields/X1"

    def test_unknown_identifier_with_path(self):
        data = copy.deepcopy(load_bundled("brockett").raw)
        data["vector_fields"]["X1"] = ["1", "0", "w"]
        with pytest.raises(SchemaError) as err:
            load_definition(data)
        assert err.value.path.startswith("/vector_fields/X1")

    def test_missing_chart(self):
        with pytest.raises(SchemaError) as err:
            load_definition({"name": "broken"})
        assert "chart" in str(err.value)

    def test_undeclared_contact_form(self):
        data = copy.deepcopy(load_bundled("brockett").raw)
        data["contact_form"] = "nope"
        with pytest.raises(SchemaError):
            load_definition(data)

    def test_bad_structure_constant(self):
        data = copy.deepcopy(load_bundled("brockett").raw)
        data["structure_constants"] = [["X1", "X2", {"X3": "2"}]]
        with pytest.raises(SchemaError):
            load_definition(data)

    def test_failing_pullback_check(self):
        data = copy.deepcopy(load_bundled("schwarz").raw)
        checks = data["coordinate_maps"]["to_darboux"]["pullback_checks"]
        checks[0]["target_form"]["dq"] = "-2*p"
        with pytest.raises(SchemaError) as err:
            load_definition(data)
        assert "pullback" in str(err.value)

    def test_degenerate_contact_form_rejected(self):
        data = copy.deepcopy(load_bundled("nonconservative").raw)
        data["one_forms"]["eta"] = {"dz": "1", "dq": "0"}
        with pytest.raises(SchemaError) as err:
            load_definition(data)
        assert "contact" in str(err.value)


class TestCli:
    def test_systems_listing(self, capsys):
        assert main(["systems"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert set(out) == EXPECTED_SYSTEMS

    def test_check_contact_report(self, capsys):
        assert main(["check-contact", "--system", "brockett"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["contact"] is True
        assert out["reeb"] == {"z": "2"}
        assert out["volume"] == {"dx^dy^dz": "1/2"}

    def test_reeb(self, capsys):
        assert main(["reeb", "--system", "quantum5d"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["reeb"] == {"x5": "1"}

    def test_ham_vf_both_directions(self, capsys):
        assert main(["ham-vf", "--system", "schwarz-darboux",
                     "--hamiltonian", "p*q-1"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["field"] == {"q": "q", "p": "-p", "z": "1"}
        assert out["good"] is True
        assert main(["ham-vf", "--system", "schwarz-darboux",
                     "--field", "X1"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["hamiltonian"] == "2*p"

    def test_bracket(self, capsys):
        assert main(["bracket", "--system", "sl2-automorphic",
                     "--f=alpha*beta", "--g=-1-2*beta*gamma"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["bracket"] == "-2*alpha*beta"

    def test_classify3d(self, capsys):
        assert main(["classify3d", "--algebra", "r3_p1"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["condition"] == "no left-invariant contact form"

    def test_closure(self, capsys):
        assert main(["closure", "--system", "riccati"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["dimension"] == 3

    def test_classify_system(self, capsys):
        assert main(["classify-system", "--system", "schwarz"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["kind"] == "conservative_contact"
        assert main(["classify-system", "--system", "nonconservative"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["kind"] == "contact"
        assert out["reeb_invariant"] == [True, True, False]

    def test_project(self, capsys):
        assert main(["project", "--system", "brockett"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["omega"] == {"dx^dy": "1"}

    def test_momentum_and_reduce(self, capsys):
        assert main(["momentum", "--system", "quantum5d"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["components"] == ["x2", "-x1", "-1"]
        assert main(["reduce", "--system", "quantum5d"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["eta"] == {"dx3": "x4", "dx5": "1"}
        assert out["classification"] == "conservative_contact"

    def test_prolong(self, capsys):
        assert main(["prolong", "--system", "riccati", "--copies", "3"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["chart"] == ["x_1", "x_2", "x_3"]
        assert out["generators"]["X1"] == {"x_1": "1", "x_2": "1", "x_3": "1"}

    def test_superposition(self, capsys):
        assert main(["superposition", "--system", "sl2-automorphic"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["rank"] == 3
        assert out["complete"] is True
        assert len(out["equations"]) == 3

    def test_integrate_csv(self, capsys):
        assert main(["integrate", "--system", "brockett", "--x0", "0,0,0",
                     "--t1", "1", "--step", "0.5", "--format", "csv",
                     "--monitor", "y-x"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "t,x,y,z,y-x"
        assert len(lines) == 4

    def test_portrait_json(self, capsys):
        assert main(["portrait", "--system", "schwarz-darboux",
                     "--range", "q=-1:1:3", "--range", "p=0:0:1",
                     "--range", "z=0:0:1"]) == 0
        rows = json.loads(capsys.readouterr().out)
        assert len(rows) == 3

    def test_exit_code_input_error(self, capsys):
        assert main(["check-contact", "--system", "missing-system"]) == 1
        assert main(["bogus-subcommand"]) == 1

    def test_exit_code_math_rejection(self, tmp_path, capsys):
        data = copy.deepcopy(load_bundled("riccati").raw)
        path = tmp_path / "line.json"
        path.write_text(json.dumps(data))
        # closure bound of 2 cannot hold the projective algebra
        assert main(["closure", "--system", str(path), "--max-dim", "2"]) == 2

    def test_definition_from_path(self, tmp_path, capsys):
        data = copy.deepcopy(load_bundled("brockett").raw)
        path = tmp_path / "custom.json"
        path.write_text(json.dumps(data))
        assert main(["reeb", "--system", str(path)]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["reeb"] == {"z": "2"}

    def test_exit_code_internal_violation(self, monkeypatch, capsys):
        from contactlie import cli
        from contactlie.errors import InternalIdentityError

        def boom(args):
            raise InternalIdentityError("wired for the test")

        monkeypatch.setattr(cli, "cmd_reeb", boom)
        parser = cli.build_parser()
        args = parser.parse_args(["reeb", "--system", "brockett"])
        monkeypatch.setattr(args, "func", boom)
        monkeypatch.setattr(cli, "build_parser",
                            lambda: _FixedParser(args))
        assert cli.main(["reeb", "--system", "brockett"]) == 3
        out = json.loads(capsys.readouterr().out)
        assert out["error"] == "internal identity violation"

    def test_verify_paper_wiring(self, monkeypatch, capsys):
        from contactlie import cli, verification

        good = verification.CheckResult("CX", "stub", True, 0.0, 1.0)
        bad = verification.CheckResult("CY", "stub", False, 0.0, 1.0)
        monkeypatch.setattr(cli, "run_all", lambda: [good])
        assert main(["verify-paper"]) == 0
        capsys.readouterr()
        monkeypatch.setattr(cli, "run_all", lambda: [good, bad])
        assert main(["verify-paper"]) == 3


class _FixedParser:
    def __init__(self, args):
        self._args = args

    def parse_args(self, argv=None):
        return self._args
