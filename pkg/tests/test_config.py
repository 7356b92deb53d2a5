import json
from pathlib import Path

import pytest
from pydantic import ValidationError

from plcurv.config import RunConfig
from plcurv.solver import Gauge


@pytest.fixture(autouse=True)
def clean_env(monkeypatch, tmp_path):
    for name in RunConfig.model_fields:
        monkeypatch.delenv("PLCURV_" + name.upper(), raising=False)
    monkeypatch.chdir(tmp_path)


def test_defaults():
    cfg = RunConfig()
    assert cfg.tol == 1.0e-10
    assert cfg.max_iter == 200
    assert cfg.gauge is Gauge.SUM_ZERO
    assert cfg.samples == 401
    assert cfg.root_tol == 1.0e-12
    assert cfg.workers == 1
    assert cfg.init is None and cfg.out_prefix is None


def test_from_file(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"tol": 1.0e-8, "gauge": "pin", "b0": 2.2, "c0": 2.35}))
    cfg = RunConfig.from_file(path)
    assert cfg.tol == 1.0e-8
    assert cfg.gauge is Gauge.PIN
    assert (cfg.b0, cfg.c0) == (2.2, 2.35)


def test_from_file_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        RunConfig.from_file(tmp_path / "missing.json")
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"samples": 1}))
    with pytest.raises(ValidationError):
        RunConfig.from_file(path)


def test_from_env(monkeypatch):
    monkeypatch.setenv("PLCURV_TOL", "1e-9")
    monkeypatch.setenv("PLCURV_GAUGE", "pin")
    monkeypatch.setenv("PLCURV_WORKERS", "4")
    monkeypatch.setenv("PLCURV_STRUCTURED_LOGS", "true")
    monkeypatch.setenv("PLCURV_INIT", "")
    cfg = RunConfig.from_env()
    assert cfg.tol == 1.0e-9
    assert cfg.gauge is Gauge.PIN
    assert cfg.workers == 4
    assert cfg.structured_logs is True
    assert cfg.init is None


def test_load_precedence(monkeypatch, tmp_path):
    monkeypatch.setenv("PLCURV_SAMPLES", "11")
    assert RunConfig.load().samples == 11

    (tmp_path / "plcurv.json").write_text(json.dumps({"samples": 21}))
    assert RunConfig.load().samples == 21

    explicit = tmp_path / "other.json"
    explicit.write_text(json.dumps({"samples": 31}))
    assert RunConfig.load(explicit).samples == 31


def test_merged():
    cfg = RunConfig(samples=11)
    merged = cfg.merged(samples=None, tol=1.0e-6, init=Path("u.txt"))
    assert merged.samples == 11
    assert merged.tol == 1.0e-6
    assert merged.init == Path("u.txt")
    assert cfg.tol == 1.0e-10
    with pytest.raises(ValidationError):
        cfg.merged(max_iter=0)


def test_solver_options():
    cfg = RunConfig(tol=1.0e-7, max_iter=5, gauge="pin", divergence_bound=10.0, trust_damping=0.5)
    opts = cfg.solver_options([0.0, 1.0])
    assert opts.grad_tol == 1.0e-7
    assert opts.max_iter == 5
    assert opts.gauge is Gauge.PIN
    assert opts.init == [0.0, 1.0]
    assert opts.divergence_bound == 10.0
    assert opts.trust_damping == 0.5
    assert cfg.solver_options().init is None


def test_log_level_is_checked():
    assert RunConfig(log_level='debug').log_level == 'debug'
    with pytest.raises(ValidationError):
        RunConfig(log_level='LOUD')
