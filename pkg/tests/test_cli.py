"""Command line contract: exit codes, JSON shape, determinism, report files."""

import json
import subprocess
import sys

import pytest

from primpair.cli import RunConfig, main

GOLDEN_FACTOR = (
    '{"command":"factor","config":{"enum_bound":10000000,'
    '"factor_budget":100000000,"output":"json","seed":0,"subset_bits":20,'
    '"threads":null,"witness_budget":1000000},"result":{"factors":'
    '[[2,1],[11,1],[292561,1]],"value":"6436342"}}\n'
)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def result_of(out):
    return json.loads(out)["result"]


class TestFactorCommand:
    def test_golden_bytes(self, capsys):
        code, out, _ = run_cli(capsys, "factor", "6436342")
        assert code == 0
        assert out == GOLDEN_FACTOR

    def test_unit_has_empty_factor_list(self, capsys):
        code, out, _ = run_cli(capsys, "factor", "1")
        assert code == 0
        assert result_of(out) == {"value": "1", "factors": []}

    def test_nonpositive_input_is_usage_error(self, capsys):
        code, out, err = run_cli(capsys, "factor", "0")
        assert code == 2
        assert out == ""
        assert err.startswith("error:")

    def test_text_output(self, capsys):
        code, out, _ = run_cli(capsys, "factor", "72", "--output", "text")
        assert code == 0
        assert out == "72 = 2^3 * 3^2\n"

    def test_csv_output_rejected(self, capsys):
        code, _, err = run_cli(capsys, "factor", "72", "--output", "csv")
        assert code == 2
        assert "csv output" in err


class TestSieveCommand:
    def test_prefix_search_default(self, capsys):
        code, out, _ = run_cli(capsys, "sieve", "2", "28")
        assert code == 0
        result = result_of(out)
        assert result["l_primes"] == [3, 5, 29, 43, 113]
        assert result["delta_decimal"] == "0.984252"
        assert result["pass"] is True

    def test_explicit_split(self, capsys):
        code, out, _ = run_cli(capsys, "sieve", "2", "28", "--l", "3,5")
        assert code == 0
        result = result_of(out)
        assert result["l_primes"] == [3, 5]
        assert result["sieve_primes"] == [29, 43, 113, 127]
        assert result["r"] == 4
        assert result["delta_decimal"] == "0.851076"
        assert result["threshold"] == "1.561158"
        assert result["pass"] is True

    def test_exhaustive_strategy(self, capsys):
        code, out, _ = run_cli(
            capsys, "sieve", "2", "28", "--strategy", "exhaustive"
        )
        assert code == 0
        result = result_of(out)
        assert result["l_primes"] == [3]
        assert result["delta_decimal"] == "0.451076"

    def test_no_witness(self, capsys):
        code, out, _ = run_cli(capsys, "sieve", "3", "6")
        assert code == 1
        assert result_of(out) == "no witness"

    def test_failing_split_reports_nulls(self, capsys):
        code, out, _ = run_cli(capsys, "sieve", "2", "28", "--l", "127")
        assert code == 1
        result = result_of(out)
        assert result["pass"] is False
        assert result["Delta"] is None
        assert result["threshold"] is None

    def test_split_prime_must_divide(self, capsys):
        code, _, err = run_cli(capsys, "sieve", "2", "28", "--l", "7")
        assert code == 2
        assert "do not divide" in err

    def test_non_prime_power_rejected(self, capsys):
        code, _, err = run_cli(capsys, "sieve", "6", "3")
        assert code == 2
        assert "prime power" in err


class TestDecideCommand:
    def test_mersenne_shortcut(self, capsys):
        code, out, _ = run_cli(capsys, "decide", "2", "13")
        assert code == 0
        result = result_of(out)
        assert result["status"] == "PROVED_MERSENNE"
        assert result["proved"] is True
        assert "8191" in result["evidence"]

    def test_sieve_proof_embeds_report(self, capsys):
        code, out, _ = run_cli(capsys, "decide", "2", "28")
        assert code == 0
        result = result_of(out)
        assert result["status"] == "PROVED_SIEVE"
        assert result["evidence"]["delta"] == {"num": "125", "den": "127"}

    def test_low_degree_not_applicable(self, capsys):
        code, out, _ = run_cli(capsys, "decide", "2", "2")
        assert code == 1
        assert result_of(out)["status"] == "NOT_APPLICABLE"


class TestVerifyCommand:
    def test_member_counts(self, capsys):
        code, out, _ = run_cli(capsys, "verify", "2", "3")
        assert code == 0
        result = result_of(out)
        assert result["verdict"] == "IN_P"
        assert result["per_trace"]["0"]["count"] == 3
        assert result["per_trace"]["1"]["count"] == 3

    def test_exception_mode_non_member(self, capsys):
        code, out, _ = run_cli(capsys, "verify", "4", "3", "--mode", "exception")
        assert code == 1
        result = result_of(out)
        assert result["verdict"] == "NOT_IN_P"
        assert result["per_trace"]["0"]["count"] == 0

    def test_witness_mode_reports_witnesses(self, capsys):
        code, out, _ = run_cli(capsys, "verify", "2", "5", "--mode", "witness")
        assert code == 0
        result = result_of(out)
        assert result["verdict"] == "IN_P"
        witness = result["per_trace"]["1"]["witness"]
        assert witness["exponent"] == 18
        assert witness["element"] == [1, 1, 0, 0, 1]

    def test_invalid_field_is_usage_error(self, capsys):
        code, _, err = run_cli(capsys, "verify", "6", "3")
        assert code == 2
        assert "prime power" in err


class TestCharsumCommand:
    def test_small_field_all_checks_pass(self, capsys):
        code, out, _ = run_cli(capsys, "charsum", "3", "2")
        assert code == 0
        result = result_of(out)
        flags = [v for k, v in result.items() if k.endswith("_ok")]
        assert all(flags)

    def test_oversized_field_rejected(self, capsys):
        code, _, err = run_cli(capsys, "charsum", "2", "13")
        assert code == 2
        assert "exceeds cap" in err


class TestTableCommand:
    def test_csv_default_all_rows_pass(self, capsys):
        code, out, _ = run_cli(capsys, "table1")
        assert code == 0
        lines = out.splitlines()
        assert len(lines) == 51
        assert lines[0] == (
            "q,n,primes,omega_l,delta,Delta,threshold,reference_delta,"
            "reference_threshold,deviation,pass"
        )
        first = lines[1].split(",")
        assert first[:4] == ["2", "28", "3;5;29;43;113;127", "2"]
        assert first[4] == "0.851076"
        assert first[6] == "1.561158"
        assert first[8] == "1.5353"
        assert first[10] == "true"
        assert all(line.endswith(",true") for line in lines[1:])

    def test_json_output(self, capsys):
        code, out, _ = run_cli(capsys, "table1", "--output", "json")
        assert code == 0
        result = result_of(out)
        assert result["all_pass"] is True
        assert len(result["rows"]) == 50
        anchor = result["rows"][0]
        assert anchor["deviation"] == "0.025858"
        assert anchor["primes_match"] is True

    def test_csv_file_and_figure(self, capsys, tmp_path):
        target = tmp_path / "survey.csv"
        code, out, _ = run_cli(capsys, "table1", "--csv", str(target))
        assert code == 0
        assert target.read_text() == out
        figure = tmp_path / "survey.png"
        assert figure.exists()
        assert figure.stat().st_size > 0


class TestConfirmCommand:
    def test_all_pairs_confirmed_with_figure(self, capsys, tmp_path):
        target = tmp_path / "exceptions.csv"
        code, out, _ = run_cli(
            capsys,
            "confirm-exceptions",
            "--enum-bound", "300",
            "--csv", str(target),
        )
        assert code == 0
        result = result_of(out)
        assert result["all_confirmed"] is True
        assert len(result["pairs"]) == 47
        by_pair = {(row["q"], row["n"]): row for row in result["pairs"]}
        assert by_pair[(3, 5)]["mode"] == "count"
        assert by_pair[(61, 6)]["mode"] == "witness"
        assert all(row["verdict"] == "IN_P" for row in result["pairs"])
        lines = target.read_text().splitlines()
        assert lines[0] == "q,n,mode,verdict,min_count,max_attempts"
        assert len(lines) == 48
        assert (tmp_path / "exceptions.png").exists()


class TestOutputContract:
    def test_stdout_is_deterministic(self, capsys):
        code1, out1, err1 = run_cli(capsys, "sieve", "2", "28")
        code2, out2, err2 = run_cli(capsys, "sieve", "2", "28")
        assert (code1, out1) == (code2, out2)
        assert "elapsed_ms=" in err1 and "elapsed_ms=" in err2

    def test_timing_never_reaches_stdout(self, capsys):
        _, out, err = run_cli(capsys, "decide", "3", "7")
        assert "elapsed" not in out
        assert err.startswith("elapsed_ms=")
        json.loads(out)

    def test_unknown_command_exits_2(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["frobnicate"])
        assert excinfo.value.code == 2

    def test_module_entry_point(self):
        proc = subprocess.run(
            [sys.executable, "-m", "primpair.cli", "factor", "21"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["result"]["factors"] == [[3, 1], [7, 1]]


class TestRunConfig:
    def test_defaults(self):
        cfg = RunConfig()
        assert cfg.seed == 0
        assert cfg.threads is None
        assert cfg.output == "json"

    def test_rejects_bad_output(self):
        with pytest.raises(ValueError):
            RunConfig(output="xml")

    def test_rejects_nonpositive_knobs(self):
        with pytest.raises(ValueError):
            RunConfig(threads=0)
        with pytest.raises(ValueError):
            RunConfig(witness_budget=0)
