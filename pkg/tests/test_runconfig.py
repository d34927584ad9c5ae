import json

import pytest

from config import DEFAULT_SEED
from core.errors import ConfigError
from core.runconfig import RunConfig, apply_overrides, load_run_config, resolve_seed


def test_defaults():
    cfg = RunConfig()
    assert cfg.potential.kind == "double_well"
    assert cfg.grid.n_qubits == 7
    assert cfg.vqe.exact is True


def test_nested_sections_parse():
    cfg = RunConfig.from_dict({"potential": {"kind": "harmonic", "k": 2}, "qpe": {"neps_sweep": [2, 4]}, "seed": 5})
    assert cfg.potential.k == 2.0 and isinstance(cfg.potential.k, float)
    assert cfg.qpe.neps_sweep == [2, 4]
    assert cfg.seed == 5


@pytest.mark.parametrize(
    "data",
    [
        {"bogus": 1},
        {"grid": {"n_qubits": 5, "spacing": 0.1}},
        {"grid": {"n_qubits": "7"}},
        {"grid": {"n_qubits": True}},
        {"vqe": {"exact": 1}},
        {"temperature": {"sweep": 0.2}},
        {"potential": []},
    ],
)
def test_schema_violations(data):
    with pytest.raises(ConfigError):
        RunConfig.from_dict(data)


def test_load_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_run_config(bad)
    with pytest.raises(ConfigError):
        load_run_config(tmp_path / "missing.json")
    good = tmp_path / "good.json"
    good.write_text(json.dumps({"temperature": {"T": 0.3}}))
    assert load_run_config(good).temperature.T == 0.3


def test_overrides_are_type_checked():
    cfg = apply_overrides(RunConfig(), {"vqe.depth": 3, "temperature.T": 1})
    assert cfg.vqe.depth == 3
    assert cfg.temperature.T == 1.0
    with pytest.raises(ConfigError):
        apply_overrides(RunConfig(), {"vqe.width": 3})
    with pytest.raises(ConfigError):
        apply_overrides(RunConfig(), {"vqe.depth": "deep"})


def test_seed_precedence():
    cfg = RunConfig(seed=5)
    assert resolve_seed(cfg, {}) == 5
    assert resolve_seed(cfg, {"RSQ_SEED": "99"}) == 99
    assert resolve_seed(RunConfig(), {}) == DEFAULT_SEED
    with pytest.raises(ConfigError):
        resolve_seed(RunConfig(), {"RSQ_SEED": "abc"})


@pytest.mark.parametrize(
    "command,data",
    [
        ("rate", {"potential": {"kind": "polynomial", "coeffs": []}}),
        ("spectrum", {"grid": {"n_qubits": 20}}),
        ("spectrum", {"temperature": {"T": -1}}),
        ("qpe-hop", {"qpe": {"model": "heisenberg"}}),
        ("qpe-hop", {"qpe": {"model": "realspace4", "backend": "trotter"}}),
        ("qpe-hop", {"qpe": {"model": "ising", "ns": 3, "initial": "01"}}),
        ("qpe-hop", {"qpe": {"model": "ising", "ns": 2, "ns_sweep": [2, 3], "initial": "01"}}),
        ("qpe-hop", {"qpe": {"model": "realspace4", "initial": "000"}}),
        ("qpe-hop", {"qpe": {"model": "ising", "initial": ""}}),
        ("sample", {"sampler": {"mode": "gibbs"}}),
        ("vqe", {"vqe": {"target": "other"}}),
        ("vqe", {"vqe": {"exact": False}}),
    ],
)
def test_validation_by_command(command, data):
    with pytest.raises(ConfigError):
        RunConfig.from_dict(data).validate(command)


def test_valid_configs_pass():
    RunConfig().validate("spectrum")
    RunConfig.from_dict({"qpe": {"model": "ising", "ns": 3}}).validate("qpe-hop")
    RunConfig.from_dict({"qpe": {"model": "ising", "ns": 3, "initial": "010"}}).validate("qpe-hop")
    RunConfig.from_dict({"qpe": {"model": "realspace4", "initial": "10"}}).validate("qpe-hop")
