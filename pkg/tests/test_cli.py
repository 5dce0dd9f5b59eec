import json
import shutil
import subprocess

import pytest

from rotorflow import build_forcing, make_grid, solve_linear
from rotorflow.cli import main, norms_document
from rotorflow.config import RunConfig, load_config, parse_config
from rotorflow.errors import ConfigError

SMALL_GRID = {"M": 1024}


def write(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return str(p)


def run(tmp_path, command, doc, *extra):
    out = tmp_path / "out"
    code = main([command, write(tmp_path, doc), "--out", str(out), *extra])
    return code, out


def test_zero_force(tmp_path):
    code, out = run(tmp_path, "solve-linear", {"forcing": {"family": "zero"}, "solver": {"N": 1}})
    assert code == 0
    doc = json.loads((out / "norms.json").read_text())
    assert doc["total"]["x0_norm"] == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["complete"] and manifest["exit_status"] == 0
    assert manifest["config"]["forcing"] == {"family": "zero"}
    assert "modes/mode_+1.csv" in manifest["artifacts"]


def test_malformed_json(tmp_path, capsys):
    code, _ = run(tmp_path, "solve-linear", '{"solver": {"alpha": 10,}}')
    assert code == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ConfigError" and "line 1" in err["message"]


@pytest.mark.parametrize("doc", [
    {"solver": {"alpah": 10}},
    {"extra": {}},
    {"grid": {"M": "big"}},
    {"solver": {"alpha": 0}},
    {"forcing": {"family": "gaussian_ring", "radius": 2}},
    {"forcing": {"family": "square"}},
    {"sweep": {"ns": [0]}},
])
def test_rejected_configs(tmp_path, doc):
    code, _ = run(tmp_path, "solve-linear", doc)
    assert code == 2


def test_missing_file(tmp_path):
    assert main(["solve-linear", str(tmp_path / "nope.json")]) == 2


def test_bad_thread_env(tmp_path, monkeypatch):
    monkeypatch.setenv("ROTORFLOW_THREADS", "many")
    code, _ = run(tmp_path, "solve-linear", {"forcing": {"family": "zero"}})
    assert code == 2


def test_matches_library(tmp_path):
    doc = {"grid": SMALL_GRID, "solver": {"alpha": 1000.0}, "forcing": {"family": "gaussian_ring", "modes": [1]}}
    code, out = run(tmp_path, "solve-linear", doc)
    assert code == 0
    cfg = parse_config(doc)
    grid = make_grid(M=1024)
    lib = norms_document(solve_linear(1000.0, build_forcing(cfg.forcing, grid)))
    cli = json.loads((out / "norms.json").read_text())
    assert cli["total"] == lib["total"] and cli["modes"] == lib["modes"]


def test_bytes_reproducible(tmp_path):
    doc = {"grid": SMALL_GRID, "solver": {"alpha": 100.0}, "forcing": {"modes": [0, 2]}}
    _, out = run(tmp_path, "solve-linear", doc)
    first = {p.name: p.read_bytes() for p in (out / "modes").iterdir()}
    shutil.rmtree(out)
    _, out = run(tmp_path, "solve-linear", doc)
    assert {p.name: p.read_bytes() for p in (out / "modes").iterdir()} == first


def test_nonlinear_zero_force(tmp_path):
    code, out = run(tmp_path, "solve-nonlinear", {"grid": SMALL_GRID, "forcing": {"family": "zero"}, "solver": {"N": 2}})
    assert code == 0
    lines = (out / "trace.csv").read_text().splitlines()
    assert lines[0] == "iter,update_norm,ratio,residual" and len(lines) == 2


def test_nonlinear_small_force(tmp_path):
    # default grid: at M=1024 the residual floor (~1.2e-7) sits above tol_res
    doc = {"solver": {"alpha": 1000.0, "N": 8},
           "forcing": {"family": "gaussian_ring", "modes": [0, 1], "amplitude": 0.5}}
    code, out = run(tmp_path, "solve-nonlinear", doc)
    assert code == 0
    summary = json.loads((out / "picard.json").read_text())["summary"]
    assert summary["converged"] and summary["final_residual"] < 1e-7


def test_nonlinear_residual_floor(tmp_path, capsys):
    doc = {"grid": SMALL_GRID, "solver": {"alpha": 1000.0, "N": 8},
           "forcing": {"family": "gaussian_ring", "modes": [0, 1], "amplitude": 0.5}}
    code, out = run(tmp_path, "solve-nonlinear", doc)
    assert code == 3
    assert "refine the grid" in json.loads(capsys.readouterr().err)["message"]
    assert len((out / "trace.csv").read_text().splitlines()) < 10


def test_nonlinear_oversized_force(tmp_path, capsys):
    doc = {"grid": SMALL_GRID, "solver": {"alpha": 1000.0, "N": 8, "max_iter": 10},
           "forcing": {"family": "gaussian_ring", "modes": [0, 1], "amplitude": 2000.0}}
    code, out = run(tmp_path, "solve-nonlinear", doc)
    assert code == 3
    assert (out / "trace.csv").exists()
    assert json.loads(capsys.readouterr().err)["exit_code"] == 3


def test_single_cell_sweep(tmp_path):
    doc = {"grid": SMALL_GRID, "sweep": {"alphas": [1000.0], "ns": [1]}}
    code, out = run(tmp_path, "sweep", doc)
    assert code == 0
    assert len((out / "sweep.csv").read_text().strip().splitlines()) == 2


def test_sweep_resume(tmp_path):
    doc = {"grid": SMALL_GRID, "sweep": {"alphas": [100.0, 1000.0, 10000.0], "ns": [1], "acceptance": False}}
    code, out = run(tmp_path, "sweep", doc)
    assert code == 0
    csv = (out / "sweep.csv").read_bytes()
    # simulate an interrupted run: one cell lost, manifest incomplete
    cells = (out / "cells.jsonl").read_text().splitlines()
    (out / "cells.jsonl").write_text("\n".join(cells[:2]) + "\n")
    (out / "sweep.csv").unlink()
    code, out = run(tmp_path, "sweep", doc, "--resume")
    assert code == 0
    assert (out / "sweep.csv").read_bytes() == csv
    assert json.loads((out / "manifest.json").read_text())["resumed_cells"] == 2
    assert len((out / "cells.jsonl").read_text().splitlines()) == 3


def test_sweep_acceptance_failure(tmp_path):
    doc = {"grid": SMALL_GRID, "sweep": {"alphas": [100.0, 1000.0, 10000.0], "ns": [1], "quantities": ["l2"],
                                         "expect": {"l2": [5.0, 0.01]}}}
    code, _ = run(tmp_path, "sweep", doc)
    assert code == 4


def test_decompose(tmp_path):
    doc = {"grid": SMALL_GRID, "sweep": {"alphas": [1000.0, 10000.0, 100000.0], "ns": [1], "acceptance": False}}
    code, out = run(tmp_path, "decompose", doc)
    assert code == 0
    summary = json.loads((out / "decomposition.json").read_text())
    assert "thickness" in summary["fits"]
    assert (out / "parts" / "alpha_1000_n_+1_bl.csv").exists()


def test_verify_prints_lines(tmp_path, capsys):
    code, out = run(tmp_path, "verify", {"sweep": {"checks": ["interpolation"]}})
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines and all(ln.startswith("PASS") for ln in lines)
    assert (out / "verify.csv").exists()


def test_verify_unknown_check(tmp_path):
    code, _ = run(tmp_path, "verify", {"sweep": {"checks": ["everything"]}})
    assert code == 2


def test_config_defaults_round_trip(tmp_path):
    cfg = load_config(write(tmp_path, {}))
    assert cfg == RunConfig(forcing=cfg.forcing)
    assert parse_config(json.loads(cfg.to_json())).to_dict() == cfg.to_dict()
    with pytest.raises(ConfigError):
        parse_config([])


def test_entry_point():
    exe = shutil.which("rotorflow")
    assert exe is not None
    res = subprocess.run([exe, "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "rotorflow" in res.stdout
