"""Command-line interface: subcommand behavior, exit codes, and round trips."""

from __future__ import annotations

import subprocess
import sys

import pytest

from mandelperc.cli import main

GASKET_TOML = (
    'name = "gasket"\n'
    "dimension = 1\n"
    "base = 2\n"
    "translations = [0, 1, 2]\n"
    "p = 0.7\n"
    "\n"
    "[budgets]\n"
    "bracket_length = 14\n"
    "mc_steps = 20000\n"
)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestSystemSelection:
    def test_example_required(self, capsys):
        code, _, err = run(capsys, "lsr")
        assert code == 2
        assert "--example" in err

    def test_unknown_example(self, capsys):
        code, _, err = run(capsys, "lsr", "--example", "nope")
        assert code == 2
        assert "doubling" in err

    def test_config_file(self, capsys, tmp_path):
        path = tmp_path / "run.toml"
        path.write_text(GASKET_TOML)
        code, out, _ = run(capsys, "matrices", "--config", str(path))
        assert code == 0
        assert "base 2, maps 3" in out

    def test_missing_config_file(self, capsys, tmp_path):
        code, _, err = run(capsys, "lsr", "--config", str(tmp_path / "x.toml"))
        assert code == 2
        assert "not found" in err


class TestSubcommands:
    def test_matrices_carpet(self, capsys):
        code, out, _ = run(capsys, "matrices", "--example", "carpet")
        assert code == 0
        assert "types 2, digits 3" in out
        assert out.count("digit ") == 3
        assert "digit 1:\n  2 1\n  1 2" in out

    def test_goodness(self, capsys):
        code, out, _ = run(capsys, "goodness", "--example", "gasket")
        assert code == 0
        assert "good: True" in out

    def test_lsr_gasket_exact_one(self, capsys):
        code, out, _ = run(capsys, "lsr", "--example", "gasket")
        assert code == 0
        assert "rho-check = 1 (exact)" in out

    def test_lsr_doubling_exact_two(self, capsys):
        code, out, _ = run(capsys, "lsr", "--example", "doubling")
        assert code == 0
        assert "rho-check = 2 (exact)" in out

    def test_lyapunov_with_mc(self, capsys):
        code, out, _ = run(
            capsys,
            "lyapunov",
            "--example",
            "gasket",
            "--bracket-length",
            "10",
            "--mc-steps",
            "20000",
            "--mc",
        )
        assert code == 0
        assert "lambda in [" in out
        assert "inside bracket: True" in out

    def test_pressure_includes_zero(self, capsys):
        code, out, _ = run(
            capsys, "pressure", "--example", "gasket", "--pressure-length", "6"
        )
        assert code == 0
        line = next(l for l in out.splitlines() if l.startswith("0 "))
        assert float(line.split()[1]) == pytest.approx(0.6931471805599453)

    def test_typicality_carpet(self, capsys):
        code, out, _ = run(capsys, "typicality", "--example", "carpet")
        assert code == 0
        assert "verdict: certified" in out

    def test_extinction_doubling_near_one(self, capsys):
        code, out, _ = run(
            capsys,
            "extinction",
            "--example",
            "doubling",
            "--p",
            "0.5",
            "--depth",
            "40",
        )
        assert code == 0
        value = float(
            next(l for l in out.splitlines() if l.startswith("type 0")).split()[-1]
        )
        assert 0.9 <= value < 1.0

    def test_extinction_env_forms(self, capsys):
        for env in ("fixed:0101", "periodic:01", "periodic:0,1", "sampled"):
            code, out, _ = run(
                capsys,
                "extinction",
                "--example",
                "gasket",
                "--p",
                "0.9",
                "--depth",
                "4",
                "--env",
                env,
            )
            assert code == 0, env
            assert "depth 4" in out

    def test_extinction_bad_env(self, capsys):
        code, _, err = run(
            capsys, "extinction", "--example", "gasket", "--p", "0.9", "--env", "x:1"
        )
        assert code == 2
        assert "unknown environment" in err

    def test_simulate_deterministic(self, capsys):
        args = (
            "simulate", "--example", "gasket", "--p", "0.8",
            "--depth", "9", "--seed", "42", "--dimension",
        )
        code, first, _ = run(capsys, *args)
        assert code == 0
        code, second, _ = run(capsys, *args)
        assert first == second
        assert "survived:" in first
        assert first.count("level ") == 10

    def test_simulate_needs_p(self, capsys):
        code, _, err = run(capsys, "simulate", "--example", "gasket")
        assert code == 2
        assert "--p" in err

    def test_interior_line4(self, capsys):
        code, out, _ = run(
            capsys,
            "interior",
            "--example",
            "line4",
            "--uset",
            "1,0,1,0;0,1,0,1",
            "--interior-length",
            "5",
        )
        assert code == 0
        assert "c(5) = 8 > 1" in out
        assert "p-hat = 0.659753955386" in out

    def test_interior_uset_required_message(self, capsys):
        code, out, _ = run(capsys, "interior", "--example", "gasket")
        assert code == 0
        assert "no test vectors given" in out

    def test_interior_bad_uset(self, capsys):
        code, _, err = run(
            capsys, "interior", "--example", "line4", "--uset", "1,x"
        )
        assert code == 2
        assert "test vectors" in err


class TestReportAndCertificates:
    def test_report_reproducible_bytes(self, capsys, tmp_path):
        path = tmp_path / "run.toml"
        path.write_text(GASKET_TOML)
        out_a = tmp_path / "a.txt"
        out_b = tmp_path / "b.txt"
        assert run(capsys, "report", "--config", str(path), "--out", str(out_a))[0] == 0
        assert (
            run(
                capsys, "report", "--config", str(path), "--threads", "3",
                "--out", str(out_b),
            )[0]
            == 0
        )
        assert out_a.read_bytes() == out_b.read_bytes()
        assert b"positive-measure empty-interior (certified)" in out_a.read_bytes()

    def test_report_stdout_matches_file(self, capsys, tmp_path):
        path = tmp_path / "run.toml"
        path.write_text(GASKET_TOML)
        out_file = tmp_path / "report.txt"
        code, out, _ = run(capsys, "report", "--config", str(path), "--out", str(out_file))
        assert code == 0
        assert out == out_file.read_text()

    @pytest.mark.parametrize(
        "argv,kind",
        [
            (("lyapunov", "--example", "gasket", "--bracket-length", "8"), "lyapunov"),
            (("lsr", "--example", "gasket"), "lsr"),
            (("typicality", "--example", "carpet"), "typicality"),
            (
                (
                    "interior", "--example", "line4",
                    "--uset", "1,0,1,0;0,1,0,1", "--interior-length", "5",
                ),
                "interior",
            ),
        ],
    )
    def test_certificate_round_trip(self, capsys, tmp_path, argv, kind):
        cert = tmp_path / f"{kind}.cert"
        code, _, _ = run(capsys, *argv, "--certificate", str(cert))
        assert code == 0
        code, out, _ = run(capsys, "verify-certificate", str(cert))
        assert code == 0
        assert f"ok: {kind} certificate verified" in out

    def test_tampered_certificate_exits_4(self, capsys, tmp_path):
        cert = tmp_path / "lsr.cert"
        run(capsys, "lsr", "--example", "gasket", "--certificate", str(cert))
        text = cert.read_text().replace("lo = 1.0", "lo = 0.5")
        cert.write_text(text)
        code, _, err = run(capsys, "verify-certificate", str(cert))
        assert code == 4
        assert "certificate failure" in err

    def test_unparseable_certificate_exits_2(self, capsys, tmp_path):
        cert = tmp_path / "junk.cert"
        cert.write_text("not a document\n")
        code, _, _ = run(capsys, "verify-certificate", str(cert))
        assert code == 2

    def test_missing_certificate_exits_2(self, capsys, tmp_path):
        code, _, _ = run(capsys, "verify-certificate", str(tmp_path / "none.cert"))
        assert code == 2


class TestRender:
    def test_multiplicity_header(self, capsys, tmp_path):
        out = tmp_path / "carpet.pgm"
        code, text, _ = run(
            capsys,
            "render", "--example", "carpet", "--multiplicity",
            "--level", "3", "--out", str(out),
        )
        assert code == 0
        assert "53x32 pgm" in text
        assert out.read_bytes().startswith(b"P5\n53 32\n255\n")

    def test_coverage_deterministic(self, capsys, tmp_path):
        a, b = tmp_path / "a.pgm", tmp_path / "b.pgm"
        for path in (a, b):
            code, _, _ = run(
                capsys,
                "render", "--example", "gasket", "--p", "0.7",
                "--level", "6", "--seed", "5", "--out", str(path),
            )
            assert code == 0
        assert a.read_bytes() == b.read_bytes()

    def test_ppm_format(self, capsys, tmp_path):
        out = tmp_path / "g.ppm"
        code, _, _ = run(
            capsys,
            "render", "--example", "interval2", "--multiplicity",
            "--level", "3", "--format", "ppm", "--out", str(out),
        )
        assert code == 0
        assert out.read_bytes().startswith(b"P6\n8 32\n255\n")

    def test_budget_refusal_exits_3(self, capsys, tmp_path):
        code, _, err = run(
            capsys,
            "render", "--example", "interval2", "--multiplicity",
            "--level", "25", "--out", str(tmp_path / "x.pgm"),
        )
        assert code == 3
        assert "budget refused" in err


class TestExitCodes:
    def test_word_enumeration_guard(self, capsys):
        code, _, err = run(capsys, "lsr", "--example", "gasket", "--lsr-length", "99")
        assert code == 3
        assert "2**99" in err

    def test_bad_p_flag(self, capsys):
        code, _, _ = run(capsys, "simulate", "--example", "gasket", "--p", "1.5")
        assert code == 2

    def test_bad_threads(self, capsys):
        code, _, _ = run(capsys, "lsr", "--example", "gasket", "--threads", "0")
        assert code == 2

    def test_synthetic_family_cannot_simulate(self, capsys):
        code, _, err = run(capsys, "simulate", "--example", "doubling", "--p", "0.5")
        assert code == 2
        assert "geometric system" in err

    def test_unknown_subcommand_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2

    def test_module_entry_point(self):
        result = subprocess.run(
            [sys.executable, "-m", "mandelperc.cli", "--version"],
            capture_output=True,
            text=True,
        )
        assert result.returncode == 0
        assert result.stdout.strip() == "0.1.0"

    def test_console_script_help(self):
        result = subprocess.run(
            [sys.executable, "-m", "mandelperc.cli", "--help"],
            capture_output=True,
            text=True,
        )
        assert result.returncode == 0
        for name in (
            "matrices", "goodness", "lyapunov", "lsr", "pressure", "typicality",
            "simulate", "extinction", "interior", "report", "verify-certificate",
            "render",
        ):
            assert name in result.stdout
