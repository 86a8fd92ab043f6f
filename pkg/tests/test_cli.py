import csv
import io
import json
import subprocess
import sys

import pytest

from qaup.cli import main, rows_to_csv


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestVerify:
    def test_up1_json(self, capsys):
        code, out, _ = run(capsys, "verify", "--mode", "up1", "--q", "4", "6")
        report = json.loads(out)
        assert code == 0
        assert report["all_hold"] and report["n_failures"] == 0
        assert report["n_cases"] == len(report["cases"]) > 0
        assert all(c["holds"] for c in report["cases"])

    def test_up2_csv(self, capsys):
        code, out, _ = run(capsys, "verify", "--mode", "up2", "--q", "4", "--format", "csv")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert len(rows) == 15 * 15
        assert "\r\n" in out
        assert {r["holds"] for r in rows} == {"True"}

    def test_qaup1_and_dlog_modes(self, capsys):
        assert run(capsys, "verify", "--mode", "qaup1", "--r", "3")[0] == 0
        assert run(capsys, "verify", "--mode", "dlog", "--p", "11")[0] == 0
        assert run(capsys, "verify", "--mode", "qaup2", "--p", "11")[0] == 0

    def test_out_file(self, capsys, tmp_path):
        target = tmp_path / "report.json"
        assert run(capsys, "verify", "--mode", "factor", "--r", "3", "--out", str(target))[0] == 0
        assert json.loads(target.read_text())["all_hold"]

    def test_deterministic_report(self, capsys):
        first = run(capsys, "verify", "--mode", "up3", "--q", "16", "--trials", "20", "--seed", "4")[1]
        second = run(capsys, "verify", "--mode", "up3", "--q", "16", "--trials", "20", "--seed", "4")[1]
        assert first == second

    def test_q_over_limit(self, capsys):
        assert run(capsys, "verify", "--mode", "up2", "--q", "2048")[0] == 2

    def test_bad_mode(self, capsys):
        assert run(capsys, "verify", "--mode", "nope")[0] == 2


class TestPipelines:
    def test_factor(self, capsys):
        code, out, err = run(capsys, "factor", "15", "--seed", "1")
        tr = json.loads(out)
        assert code == 0 and tr["success"] and tr["factor"] in (3, 5)
        assert "factor" in err

    def test_factor_deterministic(self, capsys):
        first = run(capsys, "factor", "35", "--no-gcd-shortcut")[1]
        assert run(capsys, "factor", "35", "--no-gcd-shortcut")[1] == first

    @pytest.mark.parametrize("n", ["16", "13", "1"])
    def test_factor_rejects(self, capsys, n):
        assert run(capsys, "factor", n)[0] == 2

    def test_dlog(self, capsys):
        code, out, _ = run(capsys, "dlog", "11", "2", "8", "--seed", "1")
        tr = json.loads(out)
        assert code == 0 and tr["r"] == 3 and tr["q"] == 128

    def test_dlog_non_generator(self, capsys):
        code, _, err = run(capsys, "dlog", "11", "3", "8")
        assert code == 2 and "generate" in err

    def test_dlog_exhausted(self, capsys):
        code, out, _ = run(capsys, "dlog", "11", "2", "8", "--seed", "1", "--max-repetitions", "2")
        assert code == 1 and not json.loads(out)["success"]


class TestBound:
    def test_factor_table(self, capsys):
        code, out, _ = run(capsys, "bound", "factor", "--r", "4", "--t", "32", "--s", "8")
        rows = json.loads(out)["cases"]
        assert code == 0 and len(rows) == 2
        assert rows[0]["lower_bound"] == pytest.approx(0.0115255, rel=1e-5)

    def test_small_s(self, capsys):
        assert run(capsys, "bound", "factor", "--r", "4", "--t", "32", "--s", "3")[0] == 2

    def test_missing_args(self, capsys):
        assert run(capsys, "bound", "factor", "--r", "4")[0] == 2

    def test_dlog_table(self, capsys):
        code, out, _ = run(capsys, "bound", "dlog", "--p", "11", "--format", "csv")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert len(rows) == 5

    def test_dlog_table_too_large(self, capsys):
        assert run(capsys, "bound", "dlog", "--p", "11", "--q", "8192")[0] == 2


class TestSweep:
    def test_factor_sweep(self, capsys):
        code, out, _ = run(capsys, "sweep", "--mode", "factor", "--n", "15", "21", "--seeds", "1", "2")
        report = json.loads(out)
        assert code == 0 and report["n_cases"] == 4
        assert [c["key"] for c in report["cases"]] == [[15, 1], [15, 2], [21, 1], [21, 2]]

    def test_threads_do_not_change_output(self, capsys, monkeypatch):
        args = ("sweep", "--mode", "dlog", "--p", "11", "--r", "3", "--seeds", "1", "2")
        serial = run(capsys, *args)[1]
        monkeypatch.setenv("THREADS", "4")
        assert run(capsys, *args)[1] == serial

    def test_suite_sweep(self, capsys):
        code, out, _ = run(capsys, "sweep", "--mode", "up1", "--q", "5", "--format", "csv")
        assert code == 0 and out.startswith("key,")


def test_csv_nested_values():
    text = rows_to_csv([{"key": [1, 2], "a": None}, {"key": [3], "b": 1.5}])
    rows = list(csv.DictReader(io.StringIO(text)))
    assert rows[0] == {"key": "[1, 2]", "a": "", "b": ""}
    assert rows[1]["b"] == "1.5"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qaup.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "verify" in proc.stdout
