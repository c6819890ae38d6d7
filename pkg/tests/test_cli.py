import json
import subprocess
import sys

from hopfbrick.cli import main


def run_cli(args):
    return main(args)


def test_verify_zoo_models(capsys):
    assert run_cli(["verify", "zoo:fibonacci"]) == 0
    out = capsys.readouterr().out
    assert "cstar-weak-hopf" in out
    assert "dual-unitary: False" in out
    assert "rank: 5" in out
    assert run_cli(["verify", "zoo:dihedral-3"]) == 0
    out = capsys.readouterr().out
    assert "dual-unitary: True" in out


def test_verify_corrupted_spec(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert run_cli(["verify", str(path)]) == 2
    # well-formed but axiom-breaking
    assert run_cli(["export-spec", "zoo:z2-regular", "--out", str(tmp_path / "z2.json")]) == 0
    capsys.readouterr()
    doc = json.loads((tmp_path / "z2.json").read_text())
    doc["mult"][0][3] = "5.0"
    bad2 = tmp_path / "bad2.json"
    bad2.write_text(json.dumps(doc))
    assert run_cli(["verify", str(bad2)]) == 1


def test_export_spec_roundtrip_verifies(tmp_path, capsys):
    out = tmp_path / "fib.json"
    assert run_cli(["export-spec", "zoo:fibonacci", "--out", str(out)]) == 0
    capsys.readouterr()
    assert run_cli(["verify", str(out)]) == 0


def test_run_config_and_determinism(tmp_path, capsys):
    config = {
        "model": "zoo:fibonacci",
        "initial_state": "3",
        "seed": 11,
        "quantities": [
            {"name": "expectation", "O": "e3", "label": "q",
             "t": {"start": 0, "stop": 1.5, "step": 0.5}},
            {"name": "renyi", "alpha": [2], "l": [1], "t": [1], "label": "r"},
            {"name": "otoc", "x": [0], "t": [0.5], "label": "f"},
        ],
    }
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(config))
    out1 = tmp_path / "out1"
    out2 = tmp_path / "out2"
    assert run_cli(["run", str(cfg), "--out", str(out1)]) == 0
    assert run_cli(["--jobs", "3", "run", str(cfg), "--out", str(out2)]) == 0
    capsys.readouterr()
    for name in ("q.csv", "r.csv", "f.csv"):
        assert (out1 / name).read_text() == (out2 / name).read_text()
    manifest = json.loads((out1 / "manifest.json").read_text())
    assert manifest["config"] == config
    assert len(manifest["config_sha256"]) == 64
    assert set(manifest["files"]) == {"q.csv", "r.csv", "f.csv"}
    rows = (out1 / "q.csv").read_text().strip().splitlines()
    assert rows[0] == "model,quantity,x,t,alpha,l,re,im"
    assert len(rows) == 5
    # 17-significant-digit values parse back exactly
    val = rows[2].split(",")[6]
    assert abs(float(val) - 0.3819660112501051) < 1e-16


def test_run_rejects_state_outside_subspace(tmp_path, capsys):
    config = {
        "model": "zoo:fibonacci",
        "initial_state": "1",          # |11...> violates the constraint
        "quantities": [{"name": "expectation", "O": "e1", "t": [1]}],
    }
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(config))
    assert run_cli(["run", str(cfg), "--out", str(tmp_path / "o")]) == 1


def test_run_oracle_check_columns(tmp_path, capsys):
    config = {
        "model": "zoo:fibonacci",
        "initial_state": "3",
        "quantities": [
            {"name": "expectation", "O": "e1", "label": "q", "t": [0.5, 1.0]},
        ],
    }
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(config))
    assert run_cli(["run", str(cfg), "--out", str(tmp_path / "o"),
                    "--oracle-check", "3"]) == 0
    capsys.readouterr()
    rows = (tmp_path / "o" / "q.csv").read_text().strip().splitlines()
    assert rows[0].endswith("oracle_dev")
    devs = [float(r.split(",")[-1]) for r in rows[1:]]
    assert max(devs) < 1e-10


def test_revival_command(capsys):
    assert run_cli(["revival", "zoo:fibonacci", "--L", "2", "--dense"]) == 0
    out = capsys.readouterr().out
    assert "eta = 5, nu = 2" in out
    assert "eta * L = 10" in out
    assert "minimal period on the solvable subspace: 10" in out


def test_oracle_command(capsys):
    assert run_cli(["oracle", "zoo:fibonacci", "--L", "2", "--state", "3",
                    "--O", "e3", "--t", "1"]) == 0
    out = capsys.readouterr().out
    assert "solvable subspace dim 7" in out


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hopfbrick.cli", "verify",
                           "zoo:z2-regular"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "PASS" in proc.stdout
