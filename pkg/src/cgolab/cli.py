"""Command line front end: seeded scenario runs and decay-law fitting.

``lab run config.json [--out DIR] [--seed N] [--jobs K]`` executes one
scenario and writes a JSON report plus CSV tables; ``lab fit table.csv
--x col --y col`` fits a log-log power law to a table column pair.
Reruns with the same config and seed are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from .errors import ConfigError, LabError
from .grid import Grid2D, remark_partition
from .synthetic import random_coefficient_specs, random_trig_spec
from .weights import (weight_catalog, find_critical_points, oscillatory_integral,
                      stationary_phase_leading, CarlemanConvexWeight)
from .transforms import TransformPlan, dzbar_inv
from .calculus import dzbar_array
from .forward import CoefficientTriple
from .harness import (remark_gauge, gauge_transform, check_relations,
                      gauge_equivalence_experiment, carleman_probe,
                      random_h01_spec, full_operator_setup)
from .cgo import build_amplitude, build_cgo_solution, cgo_residual

SCENARIOS = ("transforms", "cgo", "gauge", "carleman", "stationary-phase",
             "relations")


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    seed: int = 0
    n_sys: int = 1
    nx_ladder: tuple = (65, 129)
    tau_ladder: tuple = (4.0, 8.0, 16.0)
    basis_size: int = 4
    basis: str = "fourier"
    amplitude: float = 0.3
    gauge_strength: float = 0.7

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; "
                              f"choose one of {', '.join(SCENARIOS)}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        if self.n_sys < 1 or self.n_sys > 3:
            raise ConfigError("n_sys must be 1, 2, or 3")
        for name, ladder in (("nx_ladder", self.nx_ladder),
                             ("tau_ladder", self.tau_ladder)):
            if len(ladder) == 0:
                raise ConfigError(f"{name} must be nonempty")
            if any(b <= a for a, b in zip(ladder[:-1], ladder[1:])):
                raise ConfigError(f"{name} must be strictly increasing")
        if any(int(nx) < 9 for nx in self.nx_ladder):
            raise ConfigError("nx_ladder entries must be >= 9")
        if self.basis not in ("hat", "fourier"):
            raise ConfigError("basis must be 'hat' or 'fourier'")
        if self.basis_size < 1:
            raise ConfigError("basis_size must be positive")


def load_config(path: str | Path) -> ScenarioConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    known = ScenarioConfig.__dataclass_fields__
    extra = set(raw) - set(known)
    if extra:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(extra))}")
    if "scenario" not in raw:
        raise ConfigError("config is missing the 'scenario' key")
    for key in ("nx_ladder", "tau_ladder"):
        if key in raw:
            raw[key] = tuple(raw[key])
    try:
        return ScenarioConfig(**raw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


@dataclass(frozen=True)
class DecayFit:
    """Least-squares power law y = exp(intercept) * x**slope in log-log."""

    slope: float
    intercept: float
    r_squared: float


def fit_decay(samples) -> DecayFit:
    """Fit a power law to (x, y) samples; needs >= 3 strictly positive pairs."""
    pts = [(float(x), float(y)) for x, y in samples]
    if len(pts) < 3:
        raise LabError("power-law fit needs at least 3 samples")
    if any(x <= 0 or y <= 0 for x, y in pts):
        raise LabError("power-law fit needs strictly positive samples")
    lx = np.log([x for x, _ in pts])
    ly = np.log([y for _, y in pts])
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, _, _, _ = np.linalg.lstsq(A, ly, rcond=None)
    pred = A @ coef
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return DecayFit(slope=float(coef[0]), intercept=float(coef[1]), r_squared=r2)


def _triple(cfg: ScenarioConfig, grid: Grid2D) -> CoefficientTriple:
    sa, sb, sq = random_coefficient_specs(cfg.seed, cfg.n_sys, cfg.amplitude)
    return CoefficientTriple(sa.matrix_field(grid), sb.matrix_field(grid),
                             sq.matrix_field(grid))


def _orders(errs):
    return [float(np.log2(a / b)) if (a > 0 and b > 0) else float("inf")
            for a, b in zip(errs[:-1], errs[1:])]


def _run_transforms(cfg: ScenarioConfig) -> tuple[dict, dict, list]:
    rng = np.random.default_rng(cfg.seed)
    spec = random_trig_spec(rng, (), amplitude=1.0)
    errs, rows = [], []
    for nx in cfg.nx_ladder:
        grid = Grid2D(nx=int(nx), ny=int(nx))
        plan = TransformPlan(grid)
        g = spec.sample(grid)[:, :, None]
        back = dzbar_array(dzbar_inv(g, plan), grid)
        m = max(3, int(np.ceil(0.05 * (nx - 1))))
        err = float(np.max(np.abs((back - g)[m:-m, m:-m])))
        errs.append(err)
        rows.append({"nx": int(nx), "roundtrip_error": err})
    orders = _orders(errs)
    metrics = {"errors": errs, "orders": orders}
    criteria = {"roundtrip_order_ge_1.8": bool(orders and min(orders) >= 1.8)}
    return metrics, criteria, rows


def _run_cgo(cfg: ScenarioConfig) -> tuple[dict, dict, list]:
    w = weight_catalog("quadratic", {"c": 0.5 + 0.5j})
    rows = []
    for nx in cfg.nx_ladder:
        grid = Grid2D(nx=int(nx), ny=int(nx))
        plan = TransformPlan(grid)
        coefs = _triple(cfg, grid)
        amp = build_amplitude(coefs, plan)
        for tau in cfg.tau_ladder:
            sol = build_cgo_solution(amp, w, float(tau))
            rec = cgo_residual(sol, coefs)
            rec.pop("piece")
            rows.append(rec)
    fit_h = fit_decay([(1.0 / (r["nx"] - 1), r["residual_weighted"])
                       for r in rows])
    metrics = {"records": rows, "h_slope": fit_h.slope,
               "r_squared": fit_h.r_squared}
    criteria = {"power_law_r2_ge_0.95": bool(fit_h.r_squared >= 0.95)}
    return metrics, criteria, rows


def _run_gauge(cfg: ScenarioConfig) -> tuple[dict, dict, list]:
    gauge = remark_gauge(cfg.gauge_strength)
    sa, sb, sq = random_coefficient_specs(cfg.seed, cfg.n_sys, cfg.amplitude)

    def make_triple(grid):
        return CoefficientTriple(sa.matrix_field(grid), sb.matrix_field(grid),
                                 sq.matrix_field(grid))

    rep = gauge_equivalence_experiment(make_triple, gauge, cfg.nx_ladder,
                                       m=cfg.basis_size, basis=cfg.basis)
    rows = [{"nx": nx, "cauchy_distance": d}
            for nx, d in zip(rep["nx_ladder"], rep["distances"])]
    criteria = {"distance_order_ge_1.5": bool(rep["orders"]
                                              and min(rep["orders"]) >= 1.5),
                "coefficient_gap_ge_0.5": bool(rep["coefficient_gap"] >= 0.5)}
    return rep, criteria, rows


def _run_carleman(cfg: ScenarioConfig) -> tuple[dict, dict, list]:
    nx = int(cfg.nx_ladder[-1])
    grid = Grid2D(nx=nx, ny=nx)
    rng = np.random.default_rng(cfg.seed)
    taus = [float(t) for t in cfg.tau_ladder]
    cw = CarlemanConvexWeight(gx=1.0, gy=0.1, lam=2.0)
    part, hw = full_operator_setup(grid)
    coefs = _triple(cfg, grid)
    n = cfg.n_sys
    vec_family = [random_h01_spec(rng, (n,), 1.0) for _ in range(3)]
    mat_family = [random_h01_spec(rng, (n, n), 1.0) for _ in range(3)]
    reports = [
        carleman_probe("first_order_dz", cw, taus, vec_family, grid),
        carleman_probe("first_order_dzbar", cw, taus, vec_family, grid),
        carleman_probe("system_zero_order", cw, taus, mat_family, grid,
                       b_pair=(coefs.b_coef, coefs.a_coef)),
        carleman_probe("full_operator", hw, taus, vec_family, grid,
                       partition=part, coefs=coefs),
    ]
    rows = [{"kind": r["kind"], "tau": t, "ratio": ratio}
            for r in reports for t, ratio in zip(r["taus"], r["ratios"])]
    metrics = {"probes": reports}
    criteria = {f"{r['kind']}_nonincreasing_sup": bool(r["passed"])
                for r in reports}
    return metrics, criteria, rows


def _run_stationary_phase(cfg: ScenarioConfig) -> tuple[dict, dict, list]:
    nx = int(cfg.nx_ladder[-1])
    grid = Grid2D(nx=nx, ny=nx)
    w = weight_catalog("quadratic", {"c": 0.5 + 0.5j})
    point = find_critical_points(w, grid)[0]
    rng = np.random.default_rng(cfg.seed)
    spec = random_trig_spec(rng, (), amplitude=1.0)

    def g(z):
        zz = np.asarray(z)
        X = np.asarray(zz.real, dtype=float).reshape(1, 1)
        Y = np.asarray(zz.imag, dtype=float).reshape(1, 1)
        return complex(spec.eval(X, Y)[0, 0])

    rows = []
    for tau in cfg.tau_ladder:
        full = oscillatory_integral(spec.sample(grid), w, float(tau), grid)
        lead = stationary_phase_leading(g, w, point, float(tau))
        rel = abs(full - lead) / max(abs(full), 1e-300)
        rows.append({"tau": float(tau), "relative_error": float(rel)})
    fit = fit_decay([(r["tau"], r["relative_error"]) for r in rows])
    metrics = {"records": rows, "slope": fit.slope, "r_squared": fit.r_squared}
    criteria = {"error_slope_le_-0.8": bool(fit.slope <= -0.8)}
    return metrics, criteria, rows


def _run_relations(cfg: ScenarioConfig) -> tuple[dict, dict, list]:
    gauge = remark_gauge(cfg.gauge_strength)
    rows, l2s, gaps = [], [], []
    for nx in cfg.nx_ladder:
        grid = Grid2D(nx=int(nx), ny=int(nx))
        part = remark_partition(grid)
        t1 = _triple(cfg, grid)
        res = check_relations(t1, gauge_transform(t1, gauge), part)
        l2s.append(max(res.norms["r_a1_l2"], res.norms["r_a2_l2"]))
        gaps.append(res.boundary_gap)
        rows.append({"nx": int(nx), "residual_l2": l2s[-1],
                     "boundary_gap": gaps[-1]})
    orders = _orders(l2s)
    metrics = {"residuals": l2s, "orders": orders, "boundary_gaps": gaps}
    criteria = {"residual_order_ge_1.8": bool(orders and min(orders) >= 1.8),
                "boundary_gap_zero": bool(max(gaps) == 0.0)}
    return metrics, criteria, rows


_RUNNERS = {"transforms": _run_transforms, "cgo": _run_cgo,
            "gauge": _run_gauge, "carleman": _run_carleman,
            "stationary-phase": _run_stationary_phase,
            "relations": _run_relations}


def write_table(path: Path, rows: list) -> None:
    if not rows:
        return
    cols = list(rows[0].keys())
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=cols)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: repr(v) if isinstance(v, float) else v
                             for k, v in row.items()})


def run(cfg: ScenarioConfig, out_dir: str | Path) -> dict:
    metrics, criteria, rows = _RUNNERS[cfg.scenario](cfg)
    report = {"schema": 1, "scenario": cfg.scenario, "inputs": asdict(cfg),
              "metrics": metrics, "criteria": criteria,
              "passed": bool(all(criteria.values()))}
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(
        json.dumps(report, indent=2, sort_keys=True, default=_json_default) + "\n")
    write_table(out / "table.csv", rows)
    return report


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"not JSON serializable: {type(obj)!r}")


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = ScenarioConfig(**{**asdict(cfg), "seed": args.seed})
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    report = run(cfg, args.out)
    for name, ok in sorted(report["criteria"].items()):
        print(f"{name}: {'PASS' if ok else 'FAIL'}")
    return 0 if report["passed"] else 1


def _cmd_fit(args: argparse.Namespace) -> int:
    with open(args.table, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or args.x not in reader.fieldnames \
                or args.y not in reader.fieldnames:
            print(f"columns {args.x!r}/{args.y!r} not found", file=sys.stderr)
            return 2
        samples = [(float(row[args.x]), float(row[args.y])) for row in reader]
    try:
        fit = fit_decay(samples)
    except LabError as exc:
        print(f"fit error: {exc}", file=sys.stderr)
        return 2
    print(f"slope {fit.slope:.6f}  intercept {fit.intercept:.6f}  "
          f"r_squared {fit.r_squared:.6f}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="lab",
                                     description="scenario runner and decay fitter")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run a scenario from a JSON config")
    p_run.add_argument("config")
    p_run.add_argument("--out", default="out")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--jobs", type=int, default=1,
                       help="reserved; scenarios run single-process")
    p_run.set_defaults(fn=_cmd_run)
    p_fit = sub.add_parser("fit", help="fit a power law to a CSV column pair")
    p_fit.add_argument("table")
    p_fit.add_argument("--x", required=True)
    p_fit.add_argument("--y", required=True)
    p_fit.set_defaults(fn=_cmd_fit)
    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
