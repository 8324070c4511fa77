"""Command-line entry point."""

from __future__ import annotations

import argparse
import json
import os
import platform
import sys
import tempfile
import time
from dataclasses import asdict

import numpy as np

from . import __version__
from .continuum import lagrangian_at
from .grid import write_columns
from .harness import (
    ConfigError,
    RunConfig,
    compare_engines,
    convergence_study,
    eps_sweep,
    simulate,
    solve,
)
from .particles import SimulationError, density_profile, velocity_profile
from .continuum import default_x_grid

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _write_json(path: str, obj) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    with os.fdopen(fd, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def _write_text(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stickyhull", description="Sticky finite-size particle dynamics.")
    p.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    p.add_argument("--mode")
    p.add_argument("--initial", help="preset name or CSV file with columns x,rho,u")
    p.add_argument("--N", type=int)
    p.add_argument("--eps", type=float)
    p.add_argument("--t", dest="t_final", type=float)
    p.add_argument("--times", type=lambda s: [float(v) for v in s.split(",")], help="comma-separated")
    p.add_argument("--grid-n", dest="grid_n", type=int)
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--seed", type=int)
    p.add_argument("--n-values", dest="n_values", type=lambda s: [int(v) for v in s.split(",")])
    p.add_argument("--eps-values", dest="eps_values", type=lambda s: [float(v) for v in s.split(",")])
    return p


def parse_config(argv) -> RunConfig:
    args = build_parser().parse_args(argv)
    d = {}
    if args.config:
        try:
            with open(args.config) as fh:
                d = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("config", str(exc)) from exc
        if not isinstance(d, dict):
            raise ConfigError("config", "expected a JSON object")
    for k, v in vars(args).items():
        if k != "config" and v is not None:
            d[k] = v
    try:
        return RunConfig.from_dict(d).resolved()
    except TypeError as exc:
        raise ConfigError("config", str(exc)) from exc


def _dispatch(cfg: RunConfig) -> tuple[dict, dict]:
    out = cfg.out_dir
    metrics: dict = {}
    timings: dict = {}
    t0 = time.perf_counter()
    if cfg.mode == "simulate":
        sim, data = simulate(cfg)
        lo, hi, n = default_x_grid(data, cfg.t_final)
        rho = density_profile(sim, lo, hi, n)
        u = velocity_profile(sim, lo, hi, n)
        write_columns(os.path.join(out, "profile.csv"), ["x", "rho", "u"], [rho.nodes, rho.values, u.values])
        _write_text(os.path.join(out, "collisions.jsonl"), sim.to_jsonl())
        metrics.update(
            n_collisions=len(sim.collision_log),
            n_clusters=sim.n_clusters,
            momentum=float(sim.momentum()),
        )
    elif cfg.mode in ("solve", "solve-zp"):
        sol, data = solve(cfg, zero_pressure=cfg.mode == "solve-zp")
        sol.to_csv(os.path.join(out, "solution.csv"))
        if cfg.mode == "solve":
            lagrangian_at(data, cfg.t_final, cfg.grid_n).to_csv(os.path.join(out, "lagrangian.csv"))
        metrics.update(
            total_mass=float(sol.mass.values[-1]),
            max_density=float(sol.density.values.max()),
            momentum=float(sol.momentum()),
        )
    elif cfg.mode == "compare":
        reports = compare_engines(cfg)
        write_columns(
            os.path.join(out, "compare.csv"),
            ["time", "sup_psi", "w1", "sup_cumulative"],
            [np.array([getattr(r, k) for r in reports]) for k in ("time", "sup_psi", "w1", "sup_cumulative")],
        )
        metrics["reports"] = [
            {k: v for k, v in asdict(r).items() if k != "runtime_ms"} for r in reports
        ]
        timings["per_time_ms"] = [r.runtime_ms for r in reports]
    elif cfg.mode == "converge":
        rows, slope = convergence_study(cfg)
        write_columns(
            os.path.join(out, "convergence.csv"),
            ["N", "error"],
            [np.array([r[0] for r in rows]), np.array([r[1] for r in rows])],
        )
        metrics.update(slope=slope, errors={str(n): e for n, e in rows})
    elif cfg.mode == "eps-sweep":
        rows = eps_sweep(cfg)
        cols = np.array(rows).T
        write_columns(os.path.join(out, "eps_sweep.csv"), ["eps", "l1", "bound"], list(cols))
        metrics["rows"] = [dict(eps=e, l1=d, bound=b) for e, d, b in rows]
    timings["wall_ms"] = 1e3 * (time.perf_counter() - t0)
    return metrics, timings


def run_cli(argv=None) -> int:
    try:
        cfg = parse_config(argv)
        os.makedirs(cfg.out_dir, exist_ok=True)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: out_dir: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        with np.errstate(divide="raise", invalid="raise", over="raise"):
            metrics, timings = _dispatch(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SimulationError, FloatingPointError, ValueError, ArithmeticError) as exc:
        print(f"numerical error in {cfg.mode}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    manifest = {
        "config": asdict(cfg),
        "metrics": metrics,
        "versions": {
            "stickyhull": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
    }
    _write_json(os.path.join(cfg.out_dir, "manifest.json"), manifest)
    _write_json(os.path.join(cfg.out_dir, "timings.json"), timings)
    return EXIT_OK


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
