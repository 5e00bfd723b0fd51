import json
import math
import subprocess
import sys

import pytest

from sparsespec import cli
from sparsespec.potential import Bump, SparsePotential


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def potential_file(tmp_path, centres, half_width=0.5, height=1.0, name="file.json"):
    p = SparsePotential(tuple(Bump(c, half_width, height) for c in centres), "file")
    return write(tmp_path, name, p.to_json())


def test_validate_example(capsys):
    assert cli.main(["validate", "--potential", "example", "--n", "8"]) == 0
    out = capsys.readouterr().out
    assert "PASS separation" in out


def test_validate_overlap(tmp_path, capsys):
    path = potential_file(tmp_path, [5.0, 5.6])
    assert cli.main(["validate", "--potential", path]) == 2
    assert "overlap at index 1" in capsys.readouterr().out


def test_validate_truncated_json(tmp_path, capsys):
    path = write(tmp_path, "cut.json", '{\n  "bumps": [\n    {"log_center": 1.0,\n')
    assert cli.main(["validate", "--potential", path]) == 3
    err = capsys.readouterr().err
    assert "line 4" in err


def test_validate_missing_field(tmp_path, capsys):
    path = write(tmp_path, "m.json", json.dumps({"bumps": [{"log_center": 1.0}]}))
    assert cli.main(["validate", "--potential", path]) == 3


def test_validate_bad_value_is_precondition(tmp_path):
    doc = {"bumps": [{"log_center": 1.0, "half_width": -0.5, "height": 1.0}]}
    path = write(tmp_path, "neg.json", json.dumps(doc))
    assert cli.main(["validate", "--potential", path]) == 2


def test_validate_single_bump_and_missing_file(tmp_path):
    assert cli.main(["validate", "--potential", "single-bump"]) == 2
    assert cli.main(["validate", "--potential", str(tmp_path / "nope.json")]) == 2


def test_validate_report_file(tmp_path):
    out = tmp_path / "v.json"
    assert cli.main(["validate", "--n", "4", "--out", str(out), "--format", "json"]) == 0
    doc = json.loads(out.read_text())
    assert doc["passed"] is True
    assert [r["condition"] for r in doc["rows"]][:2] == ["ordering", "disjoint"]


def test_certify_example(tmp_path):
    out = tmp_path / "c.json"
    assert cli.main(["certify", "--n", "10", "--format", "json", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["verdict"] == "diverging-prefix"
    assert len(doc["records"]) == 10


def test_certify_dense_potential_inconclusive(tmp_path):
    path = potential_file(tmp_path, [2.0 * k for k in range(1, 12)])
    assert cli.main(["certify", "--potential", path, "--n", "10"]) == 1


def test_certify_preconditions(tmp_path):
    assert cli.main(["certify", "--n", "3"]) == 2
    path = potential_file(tmp_path, [2.0 * k for k in range(1, 5)])
    assert cli.main(["certify", "--potential", path, "--n", "6"]) == 2


def test_scan_sign_change(tmp_path):
    out = tmp_path / "s.csv"
    args = ["scan", "--lambda-min", "1.360", "--lambda-max", "1.370", "--lambda-step", "0.002",
            "--out", str(out)]
    assert cli.main(args) == 0
    text = out.read_text()
    assert "# seed=42" in text
    line = [l for l in text.splitlines() if l.startswith("# sign_changes=")][0]
    (lo, hi), = json.loads(line.split("=", 1)[1])
    assert 1.365 < lo < hi < 1.367 + 2e-3
    assert lo < (1 + math.sqrt(3)) / 2 < hi


def test_scan_theta_default_grid(tmp_path):
    out = tmp_path / "t.json"
    assert cli.main(["scan", "--random", "20", "--format", "json", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert [r["kind"] for r in doc["rows"]] == ["theta"] * 3
    assert min(r["form_value"] for r in doc["rows"]) >= -1e-9


def test_scan_empty_grid():
    assert cli.main(["scan", "--theta-min", "1", "--theta-max", "0", "--theta-step", "0.1"]) == 2
    assert cli.main(["scan", "--lambda-min", "1", "--lambda-max", "2", "--lambda-step", "0"]) == 2


def test_scan_is_byte_identical(tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"r{k}.csv"
        cli.main(["scan", "--random", "10", "--seed", "5", "--theta-min", "0", "--theta-max", "1",
                  "--theta-step", "0.5", "--out", str(out)])
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    assert b"# seed=5" in outs[0]


def test_shoot_free(capsys):
    assert cli.main(["shoot", "--potential", "free", "--energy-min", "-1", "--energy-max", "-1"]) == 0
    rows = [l for l in capsys.readouterr().out.splitlines() if not l.startswith("#")]
    energy, theta, _ = rows[1].split(",")
    assert float(theta) == pytest.approx(-math.pi / 4, abs=1e-15)


def test_shoot_oracle_column(capsys):
    args = ["shoot", "--potential", "single-bump", "--energy-min", "-0.25", "--energy-max", "-0.25",
            "--compare-oracle"]
    assert cli.main(args) == 0
    rows = [l for l in capsys.readouterr().out.splitlines() if not l.startswith("#")]
    head, row = rows[0].split(","), rows[1].split(",")
    rec = dict(zip(head, row))
    assert float(rec["oracle_delta"]) <= 1e-3
    assert rec["oracle_negative_count"] == "1"


def test_shoot_nonnegative_energy():
    args = ["shoot", "--potential", "free", "--energy-min", "-1", "--energy-max", "0.5",
            "--energy-step", "0.5"]
    assert cli.main(args) == 2


def test_oracle(tmp_path):
    out = tmp_path / "o.csv"
    assert cli.main(["oracle", "--out", str(out)]) == 0
    meta = dict(l[2:].split("=", 1) for l in out.read_text().splitlines() if l.startswith("# "))
    assert float(meta["max_deviation"]) <= 1e-10
    assert 3.7 <= float(meta["richardson_order"]) <= 4.3
    assert "-100.0" in out.read_text()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "sparsespec", "certify", "--n", "5"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "verdict=diverging-prefix" in proc.stdout
