import json
import math
from pathlib import Path

import numpy as np
import pytest

from thermomap.cli import (ConfigError, compile_expression, load_config, main,
                           run)

REPO_ROOT = Path(__file__).resolve().parent.parent

BASE_CONFIG = """
map = {{family = "mp", s = 0.5}}
omega = {{family = "ab", alpha = 0.75, beta = 0.0}}
Omega = {{family = "legendre"}}
potential = "0.2 * cos(2*pi*x)"
grid = 1024
seed = 7
out = "{out}"

[compat]
c_values = [0.1]

[legendre]
grid_size = 2000

[gibbs]
r = 0.05
centers = 8
n_max = 4

[thermo]
cover_n_max = 8
"""


def write_config(tmp_path: Path, body: str, name: str = "run.toml") -> Path:
    path = tmp_path / name
    path.write_text(body)
    return path


def test_expression_grammar_accepts_documented_forms():
    fn = compile_expression("0.2 * cos(2*pi*x) + 0.1 - sin(4*pi*x)/3")
    x = np.linspace(0, 1, 11)
    expect = 0.2 * np.cos(2 * np.pi * x) + 0.1 - np.sin(4 * np.pi * x) / 3
    assert np.allclose(fn(x), expect)
    assert compile_expression("exp(-x)")(0.0) == 1.0


@pytest.mark.parametrize("src", [
    "__import__('os')",
    "x + y",
    "cos(x, 2)",
    "open('f')",
    "x.real",
    "lambda t: t",
])
def test_expression_grammar_rejects_everything_else(src):
    with pytest.raises(ConfigError):
        compile_expression(src)


def test_config_missing_field_names_the_key(tmp_path):
    path = write_config(tmp_path, 'map = {family = "mp", s = 0.5}\n')
    with pytest.raises(ConfigError, match="potential"):
        load_config(path)


def test_config_bad_family(tmp_path):
    path = write_config(tmp_path, BASE_CONFIG.format(out=tmp_path / "o")
                        .replace('"mp"', '"tent"'))
    cfg = load_config(path)
    with pytest.raises(ConfigError, match="map.family"):
        cfg.build_map()


def test_config_bad_grid(tmp_path):
    body = BASE_CONFIG.format(out=tmp_path / "o").replace("grid = 1024",
                                                          "grid = 1000")
    with pytest.raises(ConfigError, match="grid"):
        load_config(write_config(tmp_path, body))


def test_config_toml_error_carries_location(tmp_path):
    path = write_config(tmp_path, "map = {family = \n")
    with pytest.raises(ConfigError, match="line"):
        load_config(path)


def test_full_pipeline_small_run(tmp_path):
    out = tmp_path / "run"
    path = write_config(tmp_path, BASE_CONFIG.format(out=out))
    code = main(["all", "--config", str(path), "--plot-data"])
    assert code == 0
    for name in ("compat.json", "omega.csv", "h.csv", "f_tilde.csv", "nu.csv",
                 "mu.csv", "diagnostics.json", "thermo.json", "gibbs.csv",
                 "summary.json", "summary.txt", "convergence.csv",
                 "gibbs_spread.csv"):
        assert (out / name).exists(), name
    summary = json.loads((out / "summary.json").read_text())
    assert all(summary["checks"].values())
    assert all(info["status"] == "ok" for info in summary["stages"].values())
    diag = json.loads((out / "diagnostics.json").read_text())
    assert diag["converged"]
    assert 0.0 < diag["spectral_gap_est"] < 1.0
    thermo = json.loads((out / "thermo.json").read_text())
    assert thermo["identity_gap"] <= 5e-2
    assert thermo["dirac_margin"] > 0.0
    assert thermo["cover_pressure_lower"] >= thermo["pressure"] - 0.05


def test_artifacts_are_deterministic(tmp_path):
    outs = []
    for tag in ("a", "b"):
        out = tmp_path / tag
        path = write_config(tmp_path, BASE_CONFIG.format(out=out),
                            name=f"{tag}.toml")
        assert main(["all", "--config", str(path)]) == 0
        outs.append(out)
    for name in ("compat.json", "omega.csv", "h.csv", "f_tilde.csv", "nu.csv",
                 "mu.csv", "gibbs.csv", "thermo.json", "diagnostics.json"):
        a = (outs[0] / name).read_bytes()
        b = (outs[1] / name).read_bytes()
        assert a == b, f"{name} differs between identical runs"


def test_stagewise_run_from_artifacts(tmp_path):
    out = tmp_path / "stages"
    path = write_config(tmp_path, BASE_CONFIG.format(out=out))
    for stage in ("compat", "omega", "rpf", "thermo", "gibbs"):
        assert main([stage, "--config", str(path)]) == 0, stage
    assert (out / "gibbs.csv").exists()
    header = (out / "gibbs.csv").read_text().splitlines()[0]
    assert header == "x,n,r,ball_left,ball_right,ball_mass,birkhoff,ratio,resolved"


def test_gibbs_without_rpf_is_dependency_error(tmp_path):
    out = tmp_path / "empty"
    path = write_config(tmp_path, BASE_CONFIG.format(out=out))
    assert main(["gibbs", "--config", str(path)]) == 1
    summary = json.loads((out / "summary.json").read_text())
    info = summary["stages"]["gibbs"]
    assert info["status"] == "dependency-error"
    assert "compat.json" in info["error"] or "diagnostics.json" in info["error"]


def test_boundary_alpha_equals_s_skips_rpf(tmp_path):
    out = tmp_path / "boundary"
    body = BASE_CONFIG.format(out=out).replace(
        'Omega = {family = "legendre"}',
        'Omega = {family = "ab", alpha = 0.75, beta = 0.0}').replace(
        'omega = {family = "ab", alpha = 0.75, beta = 0.0}',
        'omega = {family = "ab", alpha = 0.50, beta = 0.0}').replace(
        'Omega = {family = "ab", alpha = 0.75, beta = 0.0}',
        'Omega = {family = "ab", alpha = 0.50, beta = 0.0}')
    path = write_config(tmp_path, body)
    code = main(["all", "--config", str(path)])
    assert code == 2
    summary = json.loads((out / "summary.json").read_text())
    compat = json.loads((out / "compat.json").read_text())
    assert compat["reports"][0]["verdict"] == "vanishing"
    assert summary["stages"]["compat"]["status"] == "ok"
    assert summary["stages"]["rpf"]["status"] == "skipped"
    assert "reason" in summary["stages"]["rpf"]
    assert summary["checks"]["compat_positive"] is False


def test_corollary_b_compat_stage(tmp_path):
    out = tmp_path / "corb"
    cfg = load_config(REPO_ROOT / "configs/corollary_b.toml",
                      overrides={"out": out, "grid": 1024})
    summary = run(cfg, stages=("compat",))
    assert summary.stages["compat"]["status"] == "ok"
    compat = json.loads((out / "compat.json").read_text())
    top = compat["reports"][0]
    assert top["verdict"] == "positive-evidence"
    assert abs(top["liminf_estimate"] - math.log(1.1)) <= 0.05 * math.log(1.1)


def test_shipped_configs_are_valid():
    for name in ("configs/corollary_a.toml", "configs/corollary_b.toml"):
        cfg = load_config(REPO_ROOT / name)
        cfg.build_map()
        cfg.build_modulus(cfg.omega_spec, "omega")
        cfg.build_potential_fn()


def test_cli_overrides_take_effect(tmp_path):
    out = tmp_path / "override"
    path = write_config(tmp_path, BASE_CONFIG.format(out=tmp_path / "ignored"))
    assert main(["compat", "--config", str(path), "--out", str(out),
                 "--seed", "11"]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["headline"]["seed"] == 11
