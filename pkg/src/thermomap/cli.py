"""Batch front-end: config-driven pipelines with CSV/JSON artifacts.

A run configuration is a TOML file with one nesting level::

    map = {family = "mp", s = 0.5}            # or {family = "ilog", k = 1, A = 1.0}
    omega = {family = "ab", alpha = 0.75, beta = 0.0}
    Omega = {family = "legendre"}             # or an explicit ab/ilog spec
    potential = "0.2 * cos(2*pi*x)"
    grid = 8192
    seed = 42
    out = "runs/example"

    [compat]
    c_values = [0.1, 0.05]                    # default: a small sweep below 2^-(sigma+2)
    x_min = 1e-12

    [tolerances]
    power_tol = 1e-10

    [gibbs]
    r = 0.05
    centers = 100
    n_max = 12

The potential grammar accepts numbers, ``x``, ``pi``, ``+ - * /``, ``**``,
parentheses, and calls to ``sin``, ``cos``, ``exp``.

Stages run in dependency order: compat -> omega -> rpf -> thermo -> gibbs.
Each stage writes its artifacts into the output directory and can also be
run on its own from a prior run's artifacts.  Exit codes: 0 all asserted
properties passed, 2 computation finished but a property check failed,
1 error.
"""

from __future__ import annotations

import argparse
import ast
import csv
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .circle import DiscreteMeasure, GridFunction, grid_nodes
from .maps import CircleMap, estimate_expansion, ilog_map, manneville_pomeau
from .moduli import (CompatibilityReport, Modulus, build_omega_legendre,
                     check_compatibility, default_c, ilog_modulus, omega_ab)
from .spectral import (Potential, SpectralData, iterate_convergence,
                       second_eigenvalue_estimate, solve_eigendata)
from .thermo import gibbs_report, gibbs_report_csv_rows, thermo_report

STAGES = ("compat", "omega", "rpf", "thermo", "gibbs")


class ConfigError(ValueError):
    """Invalid run configuration; the message names the field."""


class DependencyError(RuntimeError):
    """A stage was asked to run without its prerequisite artifacts."""


class StageSkip(RuntimeError):
    """A stage declined to run for a legitimate, reported reason."""


# -- potential expression grammar -------------------------------------------

_ALLOWED_CALLS = {"sin": np.sin, "cos": np.cos, "exp": np.exp}
_ALLOWED_NAMES = {"pi": math.pi}
_BINOPS = {ast.Add: np.add, ast.Sub: np.subtract, ast.Mult: np.multiply,
           ast.Div: np.divide, ast.Pow: np.power}


def compile_expression(src: str) -> Callable:
    """Compile the documented closed-form grammar into a vectorized callable."""
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"potential: cannot parse {src!r}: {exc.msg}") from exc

    def ev(node, x):
        if isinstance(node, ast.Expression):
            return ev(node.body, x)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name):
            if node.id == "x":
                return x
            if node.id in _ALLOWED_NAMES:
                return _ALLOWED_NAMES[node.id]
            raise ConfigError(f"potential: unknown name {node.id!r}")
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left, x), ev(node.right, x))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            val = ev(node.operand, x)
            return -val if isinstance(node.op, ast.USub) else val
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name):
            if node.func.id not in _ALLOWED_CALLS:
                raise ConfigError(f"potential: unknown function {node.func.id!r}")
            if len(node.args) != 1 or node.keywords:
                raise ConfigError(f"potential: {node.func.id} takes one argument")
            return _ALLOWED_CALLS[node.func.id](ev(node.args[0], x))
        raise ConfigError(f"potential: unsupported syntax near {ast.dump(node)[:40]}")

    ev(tree, 0.0)  # validate eagerly so config errors surface before any run
    return lambda x: ev(tree, np.asarray(x, dtype=float))


# -- configuration ------------------------------------------------------------


@dataclass
class RunConfig:
    map_spec: dict
    omega_spec: dict
    Omega_spec: dict
    potential_src: str
    grid: int
    seed: int
    out: Path
    c_values: list[float] | None
    compat_x_min: float
    compat_x_max: float
    legendre_tau: float | None
    legendre_grid_size: int
    legendre_x_floor: float
    power_tol: float
    power_max_iter: int
    ulam_tol: float
    ulam_max_iter: int
    gibbs_r: float
    gibbs_centers: int
    gibbs_n_max: int
    cover_n_max: int
    identity_tol: float
    plot_data: bool = False

    def build_map(self) -> CircleMap:
        fam = self.map_spec.get("family")
        if fam == "mp":
            return manneville_pomeau(float(self.map_spec["s"]))
        if fam == "ilog":
            return ilog_map(int(self.map_spec["k"]),
                            float(self.map_spec.get("A", 1.0)))
        raise ConfigError(f"map.family: unknown family {fam!r}")

    def build_modulus(self, spec: dict, label: str) -> Modulus:
        fam = spec.get("family")
        if fam == "ab":
            return omega_ab(float(spec["alpha"]), float(spec.get("beta", 0.0)))
        if fam == "ilog":
            terms = [(int(k), float(b)) for k, b in spec["terms"]]
            return ilog_modulus(terms)
        raise ConfigError(f"{label}.family: unknown family {fam!r}")

    def build_potential_fn(self) -> Callable:
        return compile_expression(self.potential_src)


def _require(table: dict, key: str, kind, section: str):
    if key not in table:
        raise ConfigError(f"{section}.{key}: missing required key")
    try:
        return kind(table[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{section}.{key}: {exc}") from exc


def load_config(path: Path, overrides: dict | None = None) -> RunConfig:
    try:
        with open(path, "rb") as handle:
            raw = tomllib.load(handle)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}")
    overrides = overrides or {}

    def section(name):
        value = raw.get(name, {})
        if not isinstance(value, dict):
            raise ConfigError(f"{name}: expected a table")
        return value

    map_spec = section("map")
    if "family" not in map_spec:
        raise ConfigError("map.family: missing required key")
    if map_spec["family"] == "mp":
        s = _require(map_spec, "s", float, "map")
        if not (0.0 < s):
            raise ConfigError(f"map.s: must be positive, got {s!r}")
    elif map_spec["family"] == "ilog":
        k = _require(map_spec, "k", int, "map")
        if k < 1:
            raise ConfigError(f"map.k: must be a positive integer, got {k!r}")

    omega_spec = section("omega")
    big_spec = section("Omega")
    if "potential" not in raw:
        raise ConfigError("potential: missing required key")
    potential_src = str(raw["potential"])
    compile_expression(potential_src)

    grid = int(overrides.get("grid") or raw.get("grid", 8192))
    if grid < 256 or grid & (grid - 1):
        raise ConfigError(f"grid: must be a power of two >= 256, got {grid}")
    seed = int(overrides.get("seed") if overrides.get("seed") is not None
               else raw.get("seed", 42))
    out = Path(overrides.get("out") or raw.get("out", "thermomap-run"))

    compat = section("compat")
    tol = section("tolerances")
    leg = section("legendre")
    gibbs = section("gibbs")
    thermo = section("thermo")

    cfg = RunConfig(
        map_spec=map_spec, omega_spec=omega_spec, Omega_spec=big_spec,
        potential_src=potential_src, grid=grid, seed=seed, out=out,
        c_values=[float(c) for c in compat["c_values"]] if "c_values" in compat else None,
        compat_x_min=float(compat.get("x_min", 1e-12)),
        compat_x_max=float(compat.get("x_max", 0.1)),
        legendre_tau=float(leg["tau"]) if "tau" in leg else None,
        legendre_grid_size=int(leg.get("grid_size", 10_000)),
        legendre_x_floor=float(leg.get("x_floor", 1e-12)),
        power_tol=float(tol.get("power_tol", 1e-10)),
        power_max_iter=int(tol.get("power_max_iter", 5000)),
        ulam_tol=float(tol.get("ulam_tol", 1e-12)),
        ulam_max_iter=int(tol.get("ulam_max_iter", 100_000)),
        gibbs_r=float(gibbs.get("r", 0.05)),
        gibbs_centers=int(gibbs.get("centers", 100)),
        gibbs_n_max=int(gibbs.get("n_max", 12)),
        cover_n_max=int(thermo.get("cover_n_max", 12)),
        identity_tol=float(thermo.get("identity_tol", 5e-2)),
        plot_data=bool(overrides.get("plot_data", False)),
    )
    for name, value in (("compat.x_min", cfg.compat_x_min),
                        ("gibbs.r", cfg.gibbs_r),
                        ("tolerances.power_tol", cfg.power_tol)):
        if value <= 0:
            raise ConfigError(f"{name}: must be positive, got {value!r}")
    if cfg.c_values is not None and any(c <= 0 for c in cfg.c_values):
        raise ConfigError("compat.c_values: entries must be positive")
    return cfg


# -- artifact helpers ---------------------------------------------------------


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def _json_default(value):
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True,
                  default=_json_default)
        handle.write("\n")


def _read_two_column_csv(path: Path) -> np.ndarray:
    if not path.exists():
        raise DependencyError(f"missing artifact {path}; run the earlier stage first")
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        next(reader)
        return np.array([float(row[1]) for row in reader])


# -- pipeline state and stages -------------------------------------------------


@dataclass
class RunState:
    """Lazily built shared objects plus per-stage outcomes."""

    cfg: RunConfig
    cmap: CircleMap = None
    omega: Modulus = None
    Omega: Modulus = None
    potential: Potential = None
    compat_reports: list[CompatibilityReport] = None
    C1: float | None = None
    rho1: float | None = None
    ball_radius_cap: float | None = None
    data: SpectralData = None
    checks: dict = field(default_factory=dict)
    stage_info: dict = field(default_factory=dict)

    def ensure_base(self):
        if self.cmap is None:
            self.cmap = self.cfg.build_map()
            self.omega = self.cfg.build_modulus(self.cfg.omega_spec, "omega")

    def ensure_Omega(self):
        self.ensure_base()
        if self.Omega is None:
            if self.cfg.Omega_spec.get("family") == "legendre":
                tau = self.cfg.legendre_tau or self.omega.concavity_window
                self.Omega = build_omega_legendre(
                    self.cmap, self.omega, tau,
                    grid_size=self.cfg.legendre_grid_size,
                    x_floor=self.cfg.legendre_x_floor)
            else:
                self.Omega = self.cfg.build_modulus(self.cfg.Omega_spec, "Omega")

    def ensure_potential(self):
        self.ensure_base()
        if self.potential is None:
            rng = np.random.default_rng(np.random.SeedSequence([self.cfg.seed, 1]))
            self.potential = Potential.from_function(
                self.cfg.build_potential_fn(), self.omega, self.cfg.grid, rng=rng)


def stage_compat(state: RunState, out: Path) -> list[Path]:
    cfg = state.cfg
    state.ensure_Omega()
    cs = cfg.c_values or [default_c(state.cmap) / 2 ** j for j in range(3)]
    x_max = min(cfg.compat_x_max,
                0.999 * state.Omega.concavity_window / (1.0 + max(cs)))
    reports = [check_compatibility(state.cmap, state.omega, state.Omega, c=c,
                                   x_min=cfg.compat_x_min, x_max=x_max)
               for c in cs]
    state.compat_reports = reports
    positive = [rep for rep in reports if rep.verdict == "positive-evidence"]
    if positive:
        state.C1 = positive[0].C1
    expansion = estimate_expansion(
        state.cmap, rng=np.random.default_rng(np.random.SeedSequence([cfg.seed, 2])))
    state.rho1 = expansion.rho1
    state.ball_radius_cap = expansion.ball_radius_cap
    payload = {
        "reports": [{"c": rep.c, "verdict": rep.verdict,
                     "liminf_estimate": rep.liminf_estimate, "C1": rep.C1,
                     "decade_mins": rep.decade_mins.tolist(),
                     "x_max": float(rep.grid[0]), "x_min": float(rep.grid[-1])}
                    for rep in reports],
        "chosen_C1": state.C1,
        "rho0_hat": expansion.rho0_hat,
        "rho_V_hat": expansion.rho_V_hat,
        "branch_separation_hat": expansion.branch_separation_hat,
        "rho1": state.rho1,
        "ball_radius_cap": state.ball_radius_cap,
    }
    path = out / "compat.json"
    _write_json(path, payload)
    state.checks["compat_positive"] = bool(positive)
    return [path]


def stage_omega(state: RunState, out: Path) -> list[Path]:
    state.ensure_Omega()
    xs = np.concatenate(([0.0], np.logspace(-12, math.log10(
        state.Omega.concavity_window), 2000)))
    path = out / "omega.csv"
    _write_csv(path, ["x", "Omega"], zip(xs.tolist(), state.Omega(xs).tolist()))
    return [path]


def stage_rpf(state: RunState, out: Path) -> list[Path]:
    cfg = state.cfg
    state.ensure_potential()
    if state.compat_reports is not None and not state.checks.get("compat_positive"):
        raise StageSkip(
            "compat stage found no positive-evidence verdict; rpf skipped")
    state.data = solve_eigendata(
        state.cmap, state.potential, cfg.grid, power_tol=cfg.power_tol,
        power_max_iter=cfg.power_max_iter, ulam_tol=cfg.ulam_tol,
        ulam_max_iter=cfg.ulam_max_iter)
    data = state.data
    gap2 = second_eigenvalue_estimate(
        data.transition, data.mu.weights,
        rng=np.random.default_rng(np.random.SeedSequence([cfg.seed, 3])))
    nodes = grid_nodes(cfg.grid)
    paths = []
    for name, cols, rows in (
            ("h.csv", ["x", "value"], zip(nodes.tolist(), data.h.values.tolist())),
            ("f_tilde.csv", ["x", "value"],
             zip(nodes.tolist(), data.f_tilde.values.tolist())),
            ("nu.csv", ["cell_left", "weight"],
             zip(nodes.tolist(), data.nu.weights.tolist())),
            ("mu.csv", ["cell_left", "weight"],
             zip(nodes.tolist(), data.mu.weights.tolist()))):
        path = out / name
        _write_csv(path, cols, rows)
        paths.append(path)
    diag = {"chi": data.chi, "eigen_residual": data.eigen_residual,
            "invariance_residual": data.invariance_residual,
            "iterations": data.iterations,
            "ulam_iterations": data.ulam_iterations,
            "converged": data.converged,
            "spectral_gap_est": 1.0 - gap2,
            "second_eigenvalue_est": gap2}
    path = out / "diagnostics.json"
    _write_json(path, diag)
    paths.append(path)
    state.checks["rpf_converged"] = data.converged
    state.checks["rpf_spectral_gap"] = gap2 < 1.0
    if cfg.plot_data:
        seq = iterate_convergence(
            state.cmap, state.potential,
            GridFunction.from_function(lambda x: np.cos(2 * np.pi * x), cfg.grid),
            data, n_list=list(range(25, 201, 25)))
        path = out / "convergence.csv"
        _write_csv(path, ["n", "sup_distance"], seq)
        paths.append(path)
    return paths


def _load_eigendata(state: RunState, out: Path) -> SpectralData:
    if state.data is not None:
        return state.data
    diag_path = out / "diagnostics.json"
    if not diag_path.exists():
        raise DependencyError(f"missing artifact {diag_path}; run rpf first")
    with open(diag_path) as handle:
        diag = json.load(handle)
    h = GridFunction(_read_two_column_csv(out / "h.csv"))
    nu = DiscreteMeasure(_read_two_column_csv(out / "nu.csv"))
    mu = DiscreteMeasure(_read_two_column_csv(out / "mu.csv"))
    f_tilde = GridFunction(_read_two_column_csv(out / "f_tilde.csv"))
    state.data = SpectralData(
        chi=diag["chi"], h=h, nu=nu, mu=mu, f_tilde=f_tilde,
        eigen_residual=diag["eigen_residual"],
        invariance_residual=diag["invariance_residual"],
        iterations=diag["iterations"], ulam_iterations=diag["ulam_iterations"],
        converged=diag["converged"])
    return state.data


def stage_thermo(state: RunState, out: Path) -> list[Path]:
    cfg = state.cfg
    state.ensure_potential()
    data = _load_eigendata(state, out)
    report = thermo_report(state.cmap, state.potential, data,
                           cover_n_max=cfg.cover_n_max)
    payload = {"pressure": report.pressure, "entropy": report.entropy,
               "f_integral": report.f_integral,
               "identity_gap": report.identity_gap,
               "dirac_margin": report.dirac_margin,
               "cover_pressure_lower": report.cover_pressure_lower}
    path = out / "thermo.json"
    _write_json(path, payload)
    state.checks["thermo_dirac"] = report.valid
    state.checks["thermo_identity"] = report.identity_gap <= cfg.identity_tol
    if report.cover_pressure_lower is not None:
        state.checks["thermo_cover"] = (
            report.cover_pressure_lower >= report.pressure - 0.05)
    state.stage_info["thermo"] = payload
    return [path]


def stage_gibbs(state: RunState, out: Path) -> list[Path]:
    cfg = state.cfg
    state.ensure_potential()
    data = _load_eigendata(state, out)
    if state.ball_radius_cap is None:
        compat_path = out / "compat.json"
        if not compat_path.exists():
            raise DependencyError(f"missing artifact {compat_path}; run compat first")
        with open(compat_path) as handle:
            compat = json.load(handle)
        state.rho1 = compat["rho1"]
        state.C1 = compat["chosen_C1"]
        state.ball_radius_cap = compat["ball_radius_cap"]
    state.ensure_Omega()
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 4]))
    # ball geometry tolerates the empirical cap; the conservative rho1 is
    # often far below useful radii for maps with few branches
    working = max(state.rho1, state.ball_radius_cap)
    r = min(cfg.gibbs_r, 0.9 * working)
    report = gibbs_report(state.cmap, state.potential, data, r,
                          cfg.gibbs_centers, cfg.gibbs_n_max, rho1=working,
                          Omega=state.Omega, C1=state.C1, rng=rng)
    path = out / "gibbs.csv"
    _write_csv(path, ["x", "n", "r", "ball_left", "ball_right", "ball_mass",
                      "birkhoff", "ratio", "resolved"],
               gibbs_report_csv_rows(report))
    paths = [path]
    spread = report.spread_by_depth()
    state.checks["gibbs_positive"] = bool(report.K_low > 0.0
                                          and math.isfinite(report.K_high))
    anchor = max(1, cfg.gibbs_n_max // 3)
    if anchor in spread and cfg.gibbs_n_max in spread:
        lo_a, hi_a = spread[anchor]
        lo_b, hi_b = spread[cfg.gibbs_n_max]
        state.checks["gibbs_spread"] = bool(hi_b / lo_b <= 3.0 * hi_a / lo_a)
    state.stage_info["gibbs"] = {"K_low": report.K_low, "K_high": report.K_high,
                                 "r": r, "log_k_ceiling": report.log_k_ceiling}
    if cfg.plot_data:
        path = out / "gibbs_spread.csv"
        _write_csv(path, ["n", "K_low", "K_high", "spread"],
                   [(n, lo, hi, hi / lo) for n, (lo, hi) in sorted(spread.items())])
        paths.append(path)
    return paths


_STAGE_FNS = {"compat": stage_compat, "omega": stage_omega, "rpf": stage_rpf,
              "thermo": stage_thermo, "gibbs": stage_gibbs}


@dataclass
class RunSummary:
    stages: dict
    checks: dict
    headline: dict

    @property
    def all_passed(self) -> bool:
        return all(self.checks.values()) and all(
            info["status"] in ("ok", "skipped") for info in self.stages.values())

    @property
    def had_error(self) -> bool:
        return any(info["status"] in ("error", "dependency-error")
                   for info in self.stages.values())


def run(cfg: RunConfig, stages: tuple[str, ...] = STAGES) -> RunSummary:
    """Execute the requested stages in dependency order."""
    out = cfg.out
    out.mkdir(parents=True, exist_ok=True)
    state = RunState(cfg=cfg)
    stage_results: dict = {}
    halted = None
    for name in STAGES:
        if name not in stages:
            continue
        if halted:
            stage_results[name] = {"status": "skipped",
                                   "reason": f"stage {halted} did not complete"}
            continue
        started = time.perf_counter()
        try:
            artifacts = _STAGE_FNS[name](state, out)
            stage_results[name] = {
                "status": "ok",
                "seconds": round(time.perf_counter() - started, 3),
                "artifacts": [str(p) for p in artifacts]}
        except StageSkip as exc:
            stage_results[name] = {"status": "skipped", "reason": str(exc)}
            halted = name
        except DependencyError as exc:
            stage_results[name] = {"status": "dependency-error", "error": str(exc)}
            halted = name
        except Exception as exc:  # noqa: BLE001 - stage errors become artifacts
            stage_results[name] = {"status": "error",
                                   "error": f"{type(exc).__name__}: {exc}"}
            halted = name

    headline = {"seed": cfg.seed, "grid": cfg.grid,
                "potential": cfg.potential_src}
    if state.compat_reports:
        headline["compat_verdicts"] = {repr(rep.c): rep.verdict
                                       for rep in state.compat_reports}
        headline["C1"] = state.C1
    if state.data is not None:
        headline["chi"] = state.data.chi
        headline["pressure"] = state.data.pressure
    headline.update(state.stage_info.get("thermo", {}))
    if "gibbs" in state.stage_info:
        headline["gibbs_spread"] = state.stage_info["gibbs"]

    summary = RunSummary(stages=stage_results, checks=state.checks,
                         headline=headline)
    _write_json(out / "summary.json", {"stages": summary.stages,
                                       "checks": summary.checks,
                                       "headline": summary.headline})
    with open(out / "summary.txt", "w") as handle:
        handle.write(format_summary(summary))
    return summary


def format_summary(summary: RunSummary) -> str:
    lines = ["stage      status   detail"]
    for name, info in summary.stages.items():
        detail = info.get("reason") or info.get("error") or \
            f"{info.get('seconds', '')}s {len(info.get('artifacts', []))} artifacts"
        lines.append(f"{name:<10} {info['status']:<8} {detail}")
    lines.append("")
    for key, value in summary.headline.items():
        lines.append(f"{key} = {value}")
    lines.append("")
    for key, value in summary.checks.items():
        lines.append(f"check {key}: {'pass' if value else 'FAIL'}")
    lines.append("")
    return "\n".join(lines)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="thermomap",
        description="Transfer-operator pipelines for intermittent circle maps")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in STAGES + ("all",):
        p = sub.add_parser(name, help=f"run the {name} stage"
                           if name != "all" else "run every stage")
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--out", type=Path, default=None)
        p.add_argument("--grid", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--plot-data", action="store_true")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config, overrides={
            "out": args.out, "grid": args.grid, "seed": args.seed,
            "plot_data": args.plot_data})
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    wanted = STAGES if args.command == "all" else (args.command,)
    try:
        summary = run(cfg, stages=wanted)
    except Exception as exc:  # noqa: BLE001
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(format_summary(summary), end="")
    if summary.had_error:
        return 1
    return 0 if summary.all_passed else 2


if __name__ == "__main__":
    sys.exit(main())
