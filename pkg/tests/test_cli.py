import json
from pathlib import Path

import pytest

from npcselect.cli import EXIT_INPUT, EXIT_NUMERIC, EXIT_OK, SEED_ENV, main

FIXTURES = Path(__file__).parent / "fixtures"


def fixture(name):
    return str(FIXTURES / name)


def run(capsys, *argv):
    status = main(list(argv))
    out, err = capsys.readouterr()
    return status, out, err


class TestBarycenter:
    def test_triangle(self, capsys):
        status, out, _ = run(capsys, "barycenter", "--space", "euclidean", "--dim", "2",
                             "--input", fixture("tri.json"), "--tol", "1e-8")
        assert status == EXIT_OK
        doc = json.loads(out)
        assert doc["center"]["coords"] == pytest.approx([1 / 3, 1 / 3], abs=1e-12)
        assert doc["converged"] is True
        assert doc["iterations"] == len(doc["diameter_trace"]) - 1

    def test_singleton_csv(self, capsys):
        status, out, _ = run(capsys, "barycenter", "--space", "euclidean", "--input", fixture("single.json"),
                             "--format", "csv")
        assert status == EXIT_OK
        assert out == "iter,diameter\n0,0\n"

    def test_wrong_dimension(self, capsys):
        status, _, err = run(capsys, "barycenter", "--space", "euclidean", "--dim", "3",
                             "--input", fixture("tri.json"))
        assert status == EXIT_INPUT
        assert "error:" in err

    def test_malformed_json(self, capsys):
        status, out, err = run(capsys, "barycenter", "--space", "euclidean", "--input", fixture("malformed.json"))
        assert status == EXIT_INPUT
        assert out == ""
        assert "malformed JSON" in err

    def test_missing_file(self, capsys, tmp_path):
        status, _, err = run(capsys, "barycenter", "--space", "euclidean", "--input", str(tmp_path / "nope.json"))
        assert status == EXIT_INPUT
        assert "cannot read" in err

    def test_not_converged_emits_partial_trace(self, capsys):
        status, out, err = run(capsys, "barycenter", "--space", "hyperbolic", "--dim", "2",
                               "--input", fixture("hyperbolic_tri.json"), "--tol", "1e-12", "--max-iters", "1")
        assert status == EXIT_NUMERIC
        doc = json.loads(out)
        assert doc["converged"] is False
        assert len(doc["diameter_trace"]) == 2
        assert "error:" in err

    def test_output_file(self, capsys, tmp_path):
        target = tmp_path / "center.json"
        status, out, _ = run(capsys, "barycenter", "--space", "euclidean", "--input", fixture("tri.json"),
                             "--output", str(target))
        assert status == EXIT_OK
        assert out.startswith("center ")
        assert json.loads(target.read_text())["converged"] is True


class TestSelectAndClassify:
    def test_singleton_is_echoed(self, capsys):
        status, out, _ = run(capsys, "select", "--space", "euclidean", "--input", fixture("singleton_body.json"))
        assert status == EXIT_OK
        assert json.loads(out) == {"selected": {"coords": [0.25, -1.5]}}

    def test_tree_selection(self, capsys):
        status, out, _ = run(capsys, "select", "--space-file", fixture("star.json"),
                             "--input", fixture("star_body.json"))
        assert status == EXIT_OK
        assert json.loads(out) == {"selected": {"edge": "A-B", "offset": 0.5}}

    def test_tree_classification(self, capsys):
        status, out, _ = run(capsys, "classify", "--space-file", fixture("star.json"),
                             "--input", fixture("star_body.json"))
        assert status == EXIT_OK
        doc = json.loads(out)
        assert doc["verdict"] == "Shrinking"
        assert doc["max_limit_separation"] == 0.0
        assert doc["level"] == -0.5
        assert doc["contact"] == [{"edge": "A-B", "offset": 0.5}]

    def test_euclidean_classification(self, capsys, tmp_path):
        body = tmp_path / "body.json"
        body.write_text(json.dumps({"generators": [{"coords": [0, 0]}, {"coords": [0, 1]}]}))
        status, out, _ = run(capsys, "classify", "--space", "euclidean", "--input", str(body))
        assert status == EXIT_OK
        assert json.loads(out)["verdict"] == "NonShrinking"

    def test_ideal_file(self, capsys, tmp_path):
        ideal = tmp_path / "ideal.json"
        ideal.write_text(json.dumps({"direction": [0.0, 1.0]}))
        body = tmp_path / "body.json"
        body.write_text(json.dumps({"generators": [{"coords": [0, 0]}, {"coords": [0, 2]}]}))
        status, out, _ = run(capsys, "select", "--space", "euclidean", "--input", str(body),
                             "--ideal-file", str(ideal))
        assert status == EXIT_OK
        assert json.loads(out) == {"selected": {"coords": [0.0, 2.0]}}

    def test_unresolved_classification(self, capsys, tmp_path):
        body = tmp_path / "body.json"
        body.write_text(json.dumps({"generators": [{"edge": "A-B", "offset": 0.0}, {"edge": "B-C", "offset": 2.0}]}))
        status, _, err = run(capsys, "classify", "--space-file", fixture("star.json"), "--input", str(body),
                             "--horizon", "0.5")
        assert status == EXIT_NUMERIC
        assert "unresolved" in err

    def test_csv_not_offered(self, capsys):
        status, _, _ = run(capsys, "select", "--space", "euclidean", "--input", fixture("singleton_body.json"),
                           "--format", "csv")
        assert status == EXIT_INPUT


class TestScans:
    SHIFT = ("scan-shift", "--space", "hyperbolic", "--dim", "2", "--samples", "6")

    def test_reproducible(self, capsys):
        first = run(capsys, *self.SHIFT, "--seed", "7")
        second = run(capsys, *self.SHIFT, "--seed", "7")
        assert first[0] == EXIT_OK
        assert first[1] == second[1]

    def test_seed_from_environment(self, capsys, monkeypatch):
        _, flagged, _ = run(capsys, *self.SHIFT, "--seed", "7")
        monkeypatch.setenv(SEED_ENV, "7")
        _, env, _ = run(capsys, *self.SHIFT)
        assert env == flagged

    def test_bad_seed_environment(self, capsys, monkeypatch):
        monkeypatch.setenv(SEED_ENV, "seven")
        status, _, err = run(capsys, *self.SHIFT)
        assert status == EXIT_INPUT
        assert SEED_ENV in err

    def test_csv_cardinality(self, capsys):
        status, out, _ = run(capsys, *self.SHIFT, "--format", "csv")
        assert status == EXIT_OK
        lines = out.splitlines()
        assert lines[0] == "sample,in_disp,out_disp,ratio"
        assert len(lines) == 7

    def test_summary_matches_records(self, capsys):
        status, out, _ = run(capsys, "scan-mass", "--space", "euclidean", "--samples", "8", "--n-points", "4")
        assert status == EXIT_OK
        doc = json.loads(out)
        assert len(doc["records"]) + doc["skipped"] == 8
        assert doc["summary"]["max_ratio"] == max(r["ratio"] for r in doc["records"])
        assert doc["summary"]["failures"] == 0

    def test_tree_selector_scan(self, capsys):
        status, out, _ = run(capsys, "scan-selector", "--space-file", fixture("star.json"), "--samples", "4",
                             "--no-smoothing")
        assert status == EXIT_OK
        straddle = json.loads(out)["straddle"]
        assert straddle["smoothing"] is False
        assert straddle["diverging"] is True

    def test_summary_line_with_output(self, capsys, tmp_path):
        target = tmp_path / "shift.csv"
        status, out, _ = run(capsys, *self.SHIFT, "--format", "csv", "--output", str(target))
        assert status == EXIT_OK
        assert out.startswith("samples=")
        assert target.read_text().startswith("sample,")

    def test_bad_samples(self, capsys):
        status, _, _ = run(capsys, *self.SHIFT[:-1], "0")
        assert status == EXIT_INPUT


class TestArguments:
    def test_unknown_command(self, capsys):
        status, _, _ = run(capsys, "paint", "--space", "euclidean")
        assert status == EXIT_INPUT

    def test_space_required(self, capsys):
        status, _, err = run(capsys, "scan-shift")
        assert status == EXIT_INPUT
        assert "--space" in err

    def test_input_required(self, capsys):
        status, _, err = run(capsys, "barycenter", "--space", "euclidean")
        assert status == EXIT_INPUT
        assert "--input" in err
