import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest

from probduck.cli import main

DATA = Path(__file__).resolve().parents[1] / "data"
FAST = ["--periods", "12", "--bins", "150"]


def _run(tmp_path, *args):
    return main([*args, *FAST, "--out", str(tmp_path)])


def _fan(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# step_mw=")
    return list(csv.DictReader(lines[1:]))


def test_pdc_outputs(tmp_path):
    assert _run(tmp_path, "pdc", "--alpha", "90") == 0
    doc = json.loads((tmp_path / "pdc.json").read_text())
    assert doc["kind"] == "PDC" and len(doc["periods"]) == 12
    assert doc["meta"]["bins"] == 150
    rows = _fan(tmp_path / "pdc_fan.csv")
    assert list(rows[0]) == ["period", "q0.05", "q0.5", "q0.95"]
    assert all(float(r["q0.05"]) <= float(r["q0.5"]) <= float(r["q0.95"]) for r in rows)


def test_prc_custom_quantiles(tmp_path):
    assert _run(tmp_path, "prc", "--quantiles", "0.1", "0.9") == 0
    assert len(_fan(tmp_path / "prc_fan.csv")) == 11
    assert json.loads((tmp_path / "prc.json").read_text())["kind"] == "PRC"


def test_indices(tmp_path):
    assert _run(tmp_path, "indices", "--mou-min", "300", "--mou-max", "600",
                "--mou-step", "50") == 0
    doc = json.loads((tmp_path / "indices.json").read_text())
    assert set(doc["cl_netload_mw"]) == {"50", "90", "99"}
    sweep = _fan(tmp_path / "area_sweep.csv")
    assert [float(r["mou_mw"]) for r in sweep] == [300, 350, 400, 450, 500, 550, 600]


@pytest.mark.filterwarnings("ignore::probduck.errors.PlanningWarning")
def test_plan(tmp_path):
    assert _run(tmp_path, "plan", "--resources", str(DATA / "table1_resources.yaml"),
                "--grid-step", "10") == 0
    doc = json.loads((tmp_path / "plan.json").read_text())
    names = [r["name"] for r in doc["resources"]]
    assert names == ["coal_retrofit", "storage_5h"]
    assert doc["resources"][0]["daily_cost"] == pytest.approx(13.15, abs=0.01)
    assert len(_fan(tmp_path / "plan.csv")) == 2
    # relief above 6.2 MWh/MW favors storage per MW; the plan records that caveat
    assert any("earns more per MW" in w for w in doc["warnings"])


def test_synth_then_read_back(tmp_path):
    assert main(["synth", "--periods", "12", "--out", str(tmp_path / "d")]) == 0
    assert _run(tmp_path, "pdc", "--input-pv", str(tmp_path / "d" / "pv.csv"),
                "--input-load", str(tmp_path / "d" / "load.csv")) == 0
    from_files = json.loads((tmp_path / "pdc.json").read_text())
    assert _run(tmp_path / "s", "pdc") == 0
    built = json.loads((tmp_path / "s" / "pdc.json").read_text())
    assert from_files["periods"] == built["periods"]


def test_validate(tmp_path):
    code = _run(tmp_path, "validate", "--samples", "20000", "--seed", "1")
    report = json.loads((tmp_path / "validate_report.json").read_text())
    assert code == (0 if report["passed"] else 1)
    assert report["seed"] == 1 and len(report["area"]) == 5


def test_errors_exit_2(tmp_path, capsys):
    assert _run(tmp_path, "plan") == 2
    assert _run(tmp_path, "pdc", "--input-pv", "x.csv") == 2
    assert _run(tmp_path, "pdc", "--alpha", "120") == 2
    assert _run(tmp_path, "pdc", "--input-pv", str(tmp_path / "no.csv"),
                "--input-load", str(tmp_path / "no.csv")) == 2
    assert "error" in capsys.readouterr().err
    assert not (tmp_path / "pdc.json").exists()


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "probduck", "--version"], capture_output=True,
                         text=True, check=True)
    assert out.stdout.strip() == "0.1.0"
