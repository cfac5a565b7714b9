"""Suite parsing, execution, emission, and the command-line surface."""

import json
import math
import os

import pytest

from gmtlab.cli import main
from gmtlab.errors import SpecError
from gmtlab.suite import (
    emit,
    hash_file,
    parse_suite,
    parse_suite_dict,
    run_suite,
    suite_to_dict,
)

SMOKE = {
    "name": "smoke",
    "entries": [
        {
            "domain": {"kind": "ball", "params": {"r": 1}, "h": 0.01},
            "function": "indicator",
            "checks": ["isoperimetric"],
        }
    ],
}


def write_json(path, data):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh)
    return str(path)


class TestParseSuite:
    def test_minimal_suite(self, tmp_path):
        spec = parse_suite(write_json(tmp_path / "s.json", SMOKE))
        assert spec.name == "smoke"
        assert len(spec.entries) == 1
        assert spec.entries[0].checks == ["isoperimetric"]

    def test_unknown_check_rejected_by_name(self, tmp_path):
        bad = json.loads(json.dumps(SMOKE))
        bad["entries"][0]["checks"] = ["bogus"]
        with pytest.raises(SpecError, match="bogus"):
            parse_suite(write_json(tmp_path / "s.json", bad))

    def test_missing_file(self, tmp_path):
        with pytest.raises(SpecError, match="not found"):
            parse_suite(tmp_path / "absent.json")

    def test_malformed_json_reports_position(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"name": "x", entries: []}')
        with pytest.raises(SpecError, match="line 1"):
            parse_suite(path)

    def test_unknown_entry_key_rejected(self, tmp_path):
        bad = json.loads(json.dumps(SMOKE))
        bad["entries"][0]["tollerance"] = 0.1
        with pytest.raises(SpecError, match="tollerance"):
            parse_suite(write_json(tmp_path / "s.json", bad))

    def test_unknown_parameter_rejected(self, tmp_path):
        bad = json.loads(json.dumps(SMOKE))
        bad["entries"][0]["parameters"] = {"epsilon": 0.1}
        with pytest.raises(SpecError, match="epsilon"):
            parse_suite(write_json(tmp_path / "s.json", bad))

    def test_round_trip(self, tmp_path):
        spec = parse_suite(write_json(tmp_path / "s.json", SMOKE))
        redumped = suite_to_dict(spec)
        again = parse_suite_dict(json.loads(json.dumps(redumped)))
        assert suite_to_dict(again) == redumped


class TestRunSuite:
    def test_smoke_passes(self):
        manifest = run_suite(parse_suite_dict(SMOKE))
        assert manifest.passed
        assert len(manifest.entries) == 1
        assert len(manifest.entries[0]["reports"]) == 1
        assert manifest.entries[0]["reports"][0]["holds"] is True

    def test_swap_test_fails(self):
        suite = {
            "name": "negative",
            "entries": [
                {
                    "domain": {"kind": "box", "params": {"sides": [1, 1]}, "h": 0.01},
                    "function": "indicator",
                    "checks": ["swap_test"],
                }
            ],
        }
        manifest = run_suite(parse_suite_dict(suite))
        assert not manifest.passed
        assert manifest.entries[0]["reports"][0]["holds"] is False

    def test_empty_suite_passes_vacuously(self):
        manifest = run_suite(parse_suite_dict({"name": "empty", "entries": []}))
        assert manifest.passed
        assert manifest.entries == []

    def test_entry_error_recorded_without_abort(self):
        suite = {
            "name": "erroring",
            "entries": [
                {
                    "domain": {"kind": "ball", "params": {"r": 0.005}, "h": 0.01},
                    "function": "indicator",
                    "checks": ["isoperimetric"],
                },
                {
                    "domain": {"kind": "ball", "params": {"r": 1}, "h": 0.01},
                    "function": "indicator",
                    "checks": ["isoperimetric"],
                },
            ],
        }
        manifest = run_suite(parse_suite_dict(suite))
        assert not manifest.passed
        assert manifest.entries[0]["error"] is not None
        assert manifest.entries[1]["reports"][0]["holds"] is True

    def test_mazya_modes_produce_two_reports(self):
        suite = {
            "name": "modes",
            "entries": [
                {
                    "domain": {"kind": "ball", "params": {"r": 1}, "h": 0.02},
                    "function": "indicator",
                    "checks": ["mazya"],
                    "modes": ["optimal", "paper_factor"],
                }
            ],
        }
        manifest = run_suite(parse_suite_dict(suite))
        reports = manifest.entries[0]["reports"]
        assert [r["constant_mode"] for r in reports] == ["optimal", "paper_factor"]


class TestEmission:
    def _manifest(self):
        return run_suite(parse_suite_dict(SMOKE), input_hash="deadbeef")

    def test_json_contains_verdict(self, tmp_path):
        manifest = self._manifest()
        out = tmp_path / "report.json"
        emit(manifest, "json", out)
        text = out.read_text()
        assert '"holds": true' in text
        assert json.loads(text)["pass"] is True

    def test_csv_schema(self, tmp_path):
        manifest = self._manifest()
        out = tmp_path / "report.csv"
        emit(manifest, "csv", out)
        lines = out.read_text().splitlines()
        assert lines[1] == "inequality_id,domain,function,h,lhs,rhs,ratio,holds"
        assert lines[2].startswith("isoperimetric,")

    def test_csv_bodies_deterministic(self, tmp_path):
        m1 = self._manifest()
        m2 = self._manifest()
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        emit(m1, "csv", a)
        emit(m2, "csv", b)
        assert a.read_text().splitlines()[1:] == b.read_text().splitlines()[1:]

    def test_unknown_format_rejected(self, tmp_path):
        with pytest.raises(SpecError):
            emit(self._manifest(), "xml", tmp_path / "x")


class TestCli:
    def _domain_file(self, tmp_path, h=0.01):
        return write_json(
            tmp_path / "disk.json", {"kind": "ball", "params": {"r": 1}, "h": h}
        )

    def _function_file(self, tmp_path):
        return write_json(tmp_path / "one.json", {"expr": "1 + x - x", "lipschitz": 0.0})

    def test_verify_exit_zero_and_output(self, tmp_path, capsys):
        suite = write_json(tmp_path / "s.json", SMOKE)
        out = tmp_path / "rep.csv"
        code = main(["verify", suite, "--out", str(out)])
        assert code == 0
        assert "PASS" in capsys.readouterr().out
        assert out.exists()

    def test_verify_exit_nonzero_on_violation(self, tmp_path, capsys):
        bad = {
            "name": "neg",
            "entries": [
                {
                    "domain": {"kind": "box", "params": {"sides": [1, 1]}, "h": 0.01},
                    "function": "indicator",
                    "checks": ["swap_test"],
                }
            ],
        }
        code = main(["verify", write_json(tmp_path / "s.json", bad)])
        assert code == 1
        assert "FAIL" in capsys.readouterr().out

    def test_verify_exit_two_on_bad_spec(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("{nope}")
        code = main(["verify", str(path)])
        assert code == 2

    def test_verify_determinism_across_runs(self, tmp_path):
        suite = write_json(tmp_path / "s.json", SMOKE)
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["verify", suite, "--out", str(out1)]) == 0
        assert main(["verify", suite, "--out", str(out2)]) == 0
        assert out1.read_text().splitlines()[1:] == out2.read_text().splitlines()[1:]

    def test_verify_h_override(self, tmp_path):
        suite = write_json(tmp_path / "s.json", SMOKE)
        out = tmp_path / "r.json"
        assert main(["verify", suite, "--h", "0.02", "--out", str(out)]) == 0
        data = json.loads(out.read_text())
        h = data["entries"][0]["reports"][0]["metadata"]["h"]
        assert h == pytest.approx(0.02)

    def test_verify_tol_override(self, tmp_path):
        suite = write_json(tmp_path / "s.json", SMOKE)
        out = tmp_path / "r.json"
        assert main(["verify", suite, "--tol", "0.5", "--out", str(out)]) == 0
        data = json.loads(out.read_text())
        assert data["entries"][0]["reports"][0]["tol"] == 0.5

    def test_estimate_hm_command(self, tmp_path, capsys):
        code = main(["estimate-hm", self._domain_file(tmp_path), "--d", "1", "--delta", "0.08"])
        assert code == 0
        out = capsys.readouterr().out
        assert "upper bound" in out

    def test_partition_command_with_sweep(self, tmp_path, capsys):
        cells = tmp_path / "cells.json"
        plot = tmp_path / "plot.tsv"
        code = main([
            "partition", self._domain_file(tmp_path),
            "--delta", "0.2,0.1", "--out", str(cells), "--plot", str(plot),
        ])
        assert code == 0
        data = json.loads(cells.read_text())
        assert data["n_cells"] > 1
        series = (tmp_path / "plot_defect.tsv").read_text().splitlines()
        assert series[1] == "delta\tdefect"
        assert len(series) == 4

    def test_trace_command(self, tmp_path, capsys):
        out = tmp_path / "trace.json"
        plot = tmp_path / "steps.tsv"
        code = main([
            "trace", self._domain_file(tmp_path, h=1 / 256), self._function_file(tmp_path),
            "--eps", "0.15", "--out", str(out), "--plot", str(plot),
        ])
        assert code == 0
        data = json.loads(out.read_text())
        assert data["all_hold"] is True
        assert [s["label"] for s in data["steps"]] == [
            "main4", "main5", "main6", "prelim_est", "hm_sum_estimate", "main3",
        ]
        # one series file per labeled step
        for label in ("main4", "main5", "main6", "prelim_est", "hm_sum_estimate", "main3"):
            assert (tmp_path / f"steps_{label}.tsv").exists()

    def test_search_command(self, tmp_path, capsys):
        plot = tmp_path / "q.tsv"
        code = main([
            "search", self._domain_file(tmp_path, h=0.05), self._function_file(tmp_path),
            "--iters", "3", "--step", "0.1", "--plot", str(plot),
        ])
        assert code == 0
        series = (tmp_path / "q_quotient.tsv").read_text().splitlines()
        assert series[1] == "sweep\tQ"
        assert len(series) == 2 + 4  # header lines plus initial state plus 3 sweeps

    def test_search_respects_gmt_seed(self, tmp_path, capsys, monkeypatch):
        args = [
            "search", self._domain_file(tmp_path, h=0.05), self._function_file(tmp_path),
            "--iters", "2", "--step", "0.1",
        ]
        monkeypatch.setenv("GMT_SEED", "7")
        main(args)
        out1 = capsys.readouterr().out
        main(args)
        out2 = capsys.readouterr().out
        assert out1 == out2

    def test_steiner_command(self, tmp_path, capsys):
        code = main([
            "steiner", self._domain_file(tmp_path, h=1 / 256),
            "--eps", f"{52/256},{26/256},{13/256}",
        ])
        assert code == 0
        out = capsys.readouterr().out
        assert "extrapolated perimeter" in out
        value = float(out.strip().splitlines()[-1].split()[-1])
        assert value == pytest.approx(2 * math.pi, rel=0.02)

    def test_bundled_smoke_suite(self, capsys):
        here = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
        suite = os.path.join(here, "suites", "smoke.json")
        assert main(["verify", suite]) == 0


class TestHashFile:
    def test_stable(self, tmp_path):
        p = write_json(tmp_path / "s.json", SMOKE)
        assert hash_file(p) == hash_file(p)
        assert len(hash_file(p)) == 64
