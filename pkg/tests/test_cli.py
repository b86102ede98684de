"""Tests for the command-line front end."""

import json
import subprocess
import sys

import pytest

from secular.cli import run
from secular.matrixcore import SquareMatrix
from secular.ratpoly import RationalPolynomial

WORKED = ('{"n":3,"flavor":"exact","rows":'
          '[["1","-1","0"],["-1","2","1"],["0","1","1"]]}')


@pytest.fixture
def worked_matrix(tmp_path):
    path = tmp_path / "worked.json"
    path.write_text(WORKED)
    return str(path)


def invoke(capsys, argv):
    code = run(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestExitCodes:
    def test_sturm_count_worked_example(self, capsys):
        code, out, _ = invoke(capsys, [
            "sturm", "count",
            "--poly", '{"coeffs":["-6","11","-6","1"]}',
            "--lo", "0", "--hi", "5/2",
        ])
        assert code == 0
        assert out == "2\n"

    def test_malformed_matrix_is_input_error(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{nope")
        code, out, err = invoke(capsys, ["jordan", "--matrix", str(bad)])
        assert code == 1
        assert err.startswith("error: input:")

    def test_missing_file_is_input_error(self, capsys):
        code, _, err = invoke(capsys, ["charpoly", "--matrix", "/nope.json"])
        assert code == 1
        assert err.startswith("error:")

    def test_unknown_subcommand(self, capsys):
        code, _, err = invoke(capsys, ["frobnicate"])
        assert code == 1
        assert "invalid choice" in err

    def test_collision_is_non_convergence(self, capsys):
        code, _, err = invoke(capsys, [
            "pcr3bp", "propagate", "--mu", "0.012150585",
            "--state", "0.02,0.0,0.0,0.0", "--t", "3.0",
        ])
        assert code == 2
        assert err.startswith("error: non-convergence:")

    def test_version(self):
        out = subprocess.run(
            [sys.executable, "-m", "secular.cli", "--version"],
            capture_output=True, text=True,
        )
        assert out.returncode == 0
        assert out.stdout.strip().count(".") == 2


class TestJsonOutputs:
    def test_charpoly_round_trip(self, capsys, worked_matrix):
        code, out, _ = invoke(capsys, ["charpoly", "--matrix", worked_matrix])
        assert code == 0
        payload = json.loads(out)
        p = RationalPolynomial.from_json(json.dumps(payload["char_poly"]))
        # S(S-1)(S-3) = -0 + 3S - 4S^2 + S^3
        assert [str(c) for c in p.coeffs] == ["0", "3", "-4", "1"]
        assert "config" in payload

    def test_inertia_worked_example(self, capsys, worked_matrix):
        code, out, _ = invoke(capsys, ["inertia", "--matrix", worked_matrix])
        assert code == 0
        payload = json.loads(out)
        assert payload["inertia"] == {"pos": 2, "neg": 0, "zero": 1}

    def test_jordan_round_trip(self, capsys, worked_matrix):
        code, out, _ = invoke(capsys, ["jordan", "--matrix", worked_matrix,
                                       "--classify3"])
        assert code == 0
        payload = json.loads(out)
        J = SquareMatrix.from_json(json.dumps(payload["J"]))
        assert sorted(str(J[i, i]) for i in range(3)) == ["0", "1", "3"]
        assert all(b["sizes"] == [1] for b in payload["blocks"])
        assert "type3" in payload

    def test_hermite_count(self, capsys, worked_matrix):
        code, out, _ = invoke(capsys,
                              ["hermite-count", "--matrix", worked_matrix])
        assert code == 0
        payload = json.loads(out)
        assert payload == {**payload, "distinct": 3, "distinct_real": 3}

    def test_interlace(self, capsys, worked_matrix):
        code, out, _ = invoke(capsys, ["interlace", "--matrix", worked_matrix])
        assert code == 0
        assert json.loads(out)["passed"] is True

    def test_linsolve_both_methods_agree(self, capsys, worked_matrix):
        outs = []
        for method in ("jordan", "residue"):
            code, out, _ = invoke(capsys, [
                "linsolve", "--matrix", worked_matrix,
                "--x0", "1,0,0", "--method", method,
            ])
            assert code == 0
            outs.append(json.loads(out)["terms"])
        for ta, tb in zip(outs[0], outs[1]):
            assert ta["lambda"] == pytest.approx(tb["lambda"], abs=1e-12)

    def test_pcr3bp_stability_verdict(self, capsys):
        code, out, _ = invoke(capsys, [
            "pcr3bp", "stability", "--mu", "0.01", "--point", "L4",
        ])
        assert code == 0
        assert json.loads(out)["verdict"] == "stable"

    def test_floquet_hill_point(self, capsys):
        code, out, _ = invoke(capsys, ["floquet", "--a", "1.0", "--q", "0.2"])
        assert code == 0
        payload = json.loads(out)
        assert payload["verdict"] == "unstable_exponential"


class TestDeterminism:
    def test_identical_bytes(self, capsys, worked_matrix):
        runs = []
        for _ in range(2):
            code, out, _ = invoke(capsys, ["jordan", "--matrix", worked_matrix])
            assert code == 0
            runs.append(out)
        assert runs[0] == runs[1]

    def test_csv_config_echo(self, capsys):
        code, out, _ = invoke(capsys, [
            "pcr3bp", "propagate", "--mu", "0.01",
            "--state", "0.5,0.3,0.2,-0.1", "--t", "1.0", "--samples", "3",
        ])
        assert code == 0
        lines = out.splitlines()
        assert lines[0].startswith("# ")
        assert "integrator_tol=1e-10" in lines[0]
        assert lines[1] == "t,x,y,vx,vy,C"
        assert len(lines) == 5


class TestSection:
    def test_crossings_csv(self, capsys):
        code, out, _ = invoke(capsys, [
            "section", "--mu", "0.012150585", "--C", "3.1882812173139823",
            "--start", "0.22,0.0", "--n", "2",
        ])
        assert code == 0
        lines = out.splitlines()
        assert lines[1] == "i,x,vx"
        assert len(lines) == 4

    def test_output_file(self, capsys, tmp_path, worked_matrix):
        dest = tmp_path / "out.json"
        code, out, _ = invoke(capsys, [
            "--output", str(dest), "inertia", "--matrix", worked_matrix,
        ])
        assert code == 0
        assert out == ""
        assert json.loads(dest.read_text())["inertia"]["pos"] == 2
