"""CLI behaviour: subcommands, exit codes, JSON schema and determinism."""

import json

from jetlin.cli import run
from jetlin.expr import Verdict, is_zero, normalize
from jetlin.parse import parse_expression
from conftest import EXAMPLE_1, EXAMPLE_3, EXAMPLE_4


def run_json(capsys, *argv):
    code = run(list(argv) + ["--json"])
    payload = json.loads(capsys.readouterr().out)
    return code, payload


class TestClassifyCommand:
    def test_example_1_full_report(self, capsys):
        code, payload = run_json(capsys, "classify", EXAMPLE_1)
        assert code == 0
        assert payload["schema"] == 1
        cls = payload["classification"]
        assert cls["outcome"] == "five_point_linearizable"
        assert cls["s"] == "0"
        assert abs(cls["s_numeric"]) < 1e-10
        t = payload["transformation"]
        assert t["phi"] == "-u" and t["psi"] == "x"
        assert t["residual_zero"] is True
        assert payload["numeric_check"]["within_tol"] is True

    def test_example_4_contact_flag(self, capsys):
        code, payload = run_json(capsys, "classify", EXAMPLE_4, "--no-numeric")
        assert code == 0
        cls = payload["classification"]
        assert cls["outcome"] == "outside_classified_branches"
        assert cls["contact_linearizable"] is True
        i3_row = next(r for r in payload["invariants"] if r["name"] == "I3")
        assert i3_row["verdict"] == "zero"

    def test_text_mode_runs(self, capsys):
        assert run(["classify", "0", "--no-numeric"]) == 0
        out = capsys.readouterr().out
        assert "seven_point_linearizable" in out

    def test_exit_code_parse_error(self, capsys):
        assert run(["classify", "u'''"]) == 2
        assert "unsupported identifier" in capsys.readouterr().err

    def test_exit_code_non_rational(self, capsys):
        assert run(["classify", "cbrt(u)"]) == 3
        assert "unsupported input" in capsys.readouterr().err

    def test_irrational_s_reported_exactly(self, capsys):
        code, payload = run_json(capsys, "classify", "2*u' + 5*u", "--no-numeric")
        assert code == 0
        cls = payload["classification"]
        assert cls["outcome"] == "five_point_linearizable"
        assert cls["s"] == "cbrt(8/25)"
        assert abs(cls["s_value"] - (2 / 5 ** (2 / 3))) < 1e-12

    def test_unrecoverable_gauge_is_warning_not_failure(self, capsys):
        # u''' = -3u'' - u' + 2u is five-point but its gauge factor is e^x,
        # outside the expression grammar: classification stands, the
        # transformation is absent with a warning, and the exit stays 0
        code, payload = run_json(capsys, "classify", "-3*u'' - u' + 2*u", "--no-numeric")
        assert code == 0
        assert payload["classification"]["outcome"] == "five_point_linearizable"
        assert payload["classification"]["s"] == "2"
        assert payload["transformation"] is None
        assert any("unsupported" in w for w in payload["warnings"])

    def test_mixed_phi_reports_the_pde(self, capsys):
        # five-point ODE whose map has phi = x + u: the report carries the
        # first-order PDE for psi instead of a transformation
        f = (
            "(p^5*u - p^5*x + p^5 + 5*p^4*u - 5*p^4*x + 3*p^4 + 10*p^3*u"
            " - 10*p^3*x + 2*p^3 + 10*p^2*u - 10*p^2*x - 2*p^2 + 5*p*u"
            " - 5*p*x + 6*q^2 - 3*p + u - x - 1)/(2*p + 2)"
        )
        code, payload = run_json(capsys, "classify", f, "--no-numeric")
        assert code == 0
        assert payload["classification"]["outcome"] == "five_point_linearizable"
        assert payload["classification"]["s"] == "1"
        assert payload["transformation"] is None
        assert "psi_u" in payload["manual_pde"]

    def test_json_determinism_excluding_timing(self, capsys):
        argv = ["classify", EXAMPLE_3, "--json", "--sample-seed", "5"]
        assert run(list(argv)) == 0
        a = json.loads(capsys.readouterr().out)
        assert run(list(argv)) == 0
        b = json.loads(capsys.readouterr().out)
        a.pop("timing"), b.pop("timing")
        assert json.dumps(a) == json.dumps(b)

    def test_report_expressions_reparse(self, capsys):
        # every serialized expression re-parses to the value the engine holds
        from jetlin.invariants import compute_invariants
        from jetlin.jets import JetContext
        from jetlin.parse import parse_ode

        code, payload = run_json(capsys, "classify", EXAMPLE_1, "--no-numeric")
        assert code == 0
        rep = compute_invariants(JetContext(parse_ode(EXAMPLE_1).f))
        internal = {name: e for name, e, _ in rep.rows()}
        for row in payload["invariants"]:
            reparsed = parse_expression(row["value"])
            gap = reparsed - internal[row["name"]]
            assert is_zero(gap) in (Verdict.ZERO, Verdict.UNKNOWN), row
        t = payload["transformation"]
        assert normalize(parse_expression(t["phi"])) == normalize(parse_expression("-u"))
        assert normalize(parse_expression(t["psi"])) == normalize(parse_expression("x"))


class TestInvariantsCommand:
    def test_table_only(self, capsys):
        code, payload = run_json(capsys, "invariants", "2*u' + u")
        assert code == 0
        assert payload["command"] == "invariants"
        assert payload["k_constant"] == "2"
        assert "transformation" not in payload

    def test_ten_branch_invariants_present(self, capsys):
        _, payload = run_json(capsys, "invariants", EXAMPLE_1)
        names = {r["name"] for r in payload["invariants"]}
        for needed in ("I1", "I2", "I4", "I5", "I6", "I7", "K_q", "K_p", "K_u", "K_x"):
            assert needed in names


class TestVerifyCommand:
    def test_example_3_user_supplied_map(self, capsys):
        code, payload = run_json(
            capsys, "verify", "u/x^6", "--phi", "-1/x", "--psi", "u/x^2",
            "--s", "0", "--no-numeric",
        )
        assert code == 0
        assert payload["transformation"]["residual"] == "0"
        assert payload["transformation"]["residual_zero"] is True

    def test_wrong_transformation_reports_nonzero(self, capsys):
        code, payload = run_json(
            capsys, "verify", "u/x^6", "--phi", "x", "--psi", "u",
            "--s", "0", "--no-numeric",
        )
        assert code == 0
        assert payload["transformation"]["residual_zero"] is False

    def test_undecidable_residual_exits_5(self, capsys):
        # ln(-1 - x^2) is real nowhere, so the sampler cannot reach a verdict
        code, payload = run_json(
            capsys, "verify", "0", "--phi", "x", "--psi", "ln(-1 - x^2)",
            "--s", "0", "--no-numeric",
        )
        assert code == 5
        assert payload["transformation"]["residual_verdict"] == "unknown"

    def test_plot_written(self, capsys, tmp_path):
        target = tmp_path / "check.png"
        code, payload = run_json(
            capsys, "verify", EXAMPLE_3, "--phi", "-1/x", "--psi", "u/x^2",
            "--s", "0", "--plot", str(target),
        )
        assert code == 0
        assert payload["numeric_check"]["plot"] == str(target)
        assert target.exists() and target.stat().st_size > 1000

    def test_classify_plot_written(self, capsys, tmp_path):
        target = tmp_path / "classify.png"
        code, payload = run_json(capsys, "classify", EXAMPLE_1, "--plot", str(target))
        assert code == 0
        assert payload["numeric_check"]["within_tol"] is True
        assert target.exists() and target.stat().st_size > 1000


class TestSolveNumCommand:
    def test_csv_to_stdout(self, capsys):
        code = run(["solve-num", "u", "--ic", "0,1,1,1", "--span", "0,0.01",
                    "--step", "0.002"])
        assert code == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "x,u,u',u''"
        assert len(lines) == 7
        assert all(len(line.split(",")) == 4 for line in lines[1:])

    def test_csv_and_plot_files(self, capsys, tmp_path):
        csv_path = tmp_path / "traj.csv"
        png_path = tmp_path / "traj.png"
        code = run(["solve-num", "u", "--ic", "0,1,1,1", "--span", "0,0.5",
                    "--step", "0.01", "--out", str(csv_path),
                    "--plot", str(png_path)])
        assert code == 0
        assert csv_path.read_text().startswith("x,u,u',u''")
        assert png_path.exists() and png_path.stat().st_size > 1000

    def test_json_samples(self, capsys):
        code, payload = run_json(capsys, "solve-num", "0", "--ic", "0,1,1,0",
                                 "--span", "0,0.1", "--step", "0.05")
        assert code == 0
        assert payload["trajectory"]["rows"] == 3
        assert len(payload["trajectory"]["samples"]) == 3

    def test_blow_up_exit(self, capsys):
        code = run(["solve-num", "u^3", "--ic", "0,3,9,27", "--span", "0,5",
                    "--step", "0.01"])
        assert code == 1
        assert "error" in capsys.readouterr().err
