"""Command-line front end: parse a JSON run configuration, dispatch one
experiment, and write machine-readable artifacts plus a manifest.

Unknown configuration keys are rejected outright: a silent typo in an
epsilon schedule would invalidate an experiment, so strictness wins over
convenience.  CSV cells use shortest round-trip float formatting, making
repeated runs of the same configuration byte-identical.
"""

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io_utils
from .bernstein_kernels import BernsteinSymbol, build_kernel_table
from .eigensolver import SolverConfig, dirichlet_ground_state, ground_state
from .experiments import (anharmonic_to_dirichlet, antisymmetric_minimum_check,
                          embedding_tail_check, kernel_lower_constant,
                          monotonicity_check, random_band_limited,
                          stability_sweep, symmetry_check)
from .potentials import WellSpec, anharmonic, mollified_well, sharp_well
from .spectral_core import Grid

COMMANDS = ("kernel-table", "ground-state", "dirichlet-eig", "stability-sweep",
            "anharmonic-limit", "monotonicity", "antisym-check",
            "embedding-check")


class ConfigError(ValueError):
    pass


def _require_keys(section, data, allowed, required=()):
    unknown = set(data) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {section}: {sorted(unknown)}")
    missing = set(required) - set(data)
    if missing:
        raise ConfigError(f"missing key(s) in {section}: {sorted(missing)}")


@dataclass
class RunConfig:
    command: str
    symbol: BernsteinSymbol
    grid: Grid
    solver: SolverConfig
    potential_spec: dict
    extras: dict
    output_dir: str
    raw: dict


_SOLVER_KEYS = ("tau", "tol", "max_iters", "splitting", "seed", "projection",
                "min_iters")
_EXTRA_KEYS = ("kernel", "eps_schedule", "k_list", "ball_radius", "mu",
               "rotations", "num_fields", "kmax_frac", "s", "alpha_antisym",
               "m_antisym")


def parse_config(path):
    """Load, validate and resolve a run configuration file."""
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config parse error at line {exc.lineno}: "
                          f"{exc.msg}") from None

    _require_keys("top level", raw,
                  ("command", "symbol", "grid", "potential", "solver",
                   "output_dir") + _EXTRA_KEYS,
                  required=("command", "grid"))
    command = raw["command"]
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}; expected one of "
                          f"{COMMANDS}")

    sym_raw = dict(raw.get("symbol", {}))
    _require_keys("symbol", sym_raw, ("m", "alpha"))
    m = float(sym_raw.get("m", 0.0))
    alpha = float(sym_raw.get("alpha", 1.0))
    if not 0.0 < alpha < 2.0:
        raise ConfigError(f"symbol invariant violated: alpha in (0,2), "
                          f"got {alpha}")
    if m < 0.0:
        raise ConfigError(f"symbol invariant violated: m >= 0, got {m}")
    symbol = BernsteinSymbol.relativistic(m, alpha)

    grid_raw = dict(raw["grid"])
    _require_keys("grid", grid_raw, ("d", "n", "L"), required=("d", "n", "L"))
    try:
        grid = Grid(d=int(grid_raw["d"]), n=int(grid_raw["n"]),
                    L=float(grid_raw["L"]))
    except ValueError as exc:
        raise ConfigError(f"grid invariant violated: {exc}") from None

    sol_raw = dict(raw.get("solver", {}))
    _require_keys("solver", sol_raw, _SOLVER_KEYS)
    try:
        solver = SolverConfig(
            tau=float(sol_raw.get("tau", 0.01)),
            tol=float(sol_raw.get("tol", 1e-11)),
            max_iters=int(sol_raw.get("max_iters", 20000)),
            splitting=sol_raw.get("splitting", "strang"),
            seed=int(sol_raw.get("seed", 12345)),
            projection_radius=sol_raw.get("projection"),
            min_iters=int(sol_raw.get("min_iters", 0)))
    except ValueError as exc:
        raise ConfigError(f"solver invariant violated: {exc}") from None

    pot_raw = dict(raw.get("potential", {}))
    if pot_raw:
        _require_keys("potential", pot_raw, ("kind", "a", "v", "eps", "k"),
                      required=("kind",))
        kind = pot_raw["kind"]
        if kind == "well":
            a = float(pot_raw.get("a", 1.0))
            v = float(pot_raw.get("v", 4.0))
            eps = float(pot_raw.get("eps", 0.0))
            if not (a > 0 and v > 0 and eps >= 0):
                raise ConfigError("well invariant violated: a > 0, v > 0, "
                                  "eps >= 0")
            if not a + eps < grid.L / 2.0:
                raise ConfigError(f"box too small: a + eps = {a + eps} must "
                                  f"be < L/2 = {grid.L / 2.0}")
        elif kind == "anharmonic":
            if int(pot_raw.get("k", 1)) < 1:
                raise ConfigError("anharmonic invariant violated: k >= 1")
        else:
            raise ConfigError(f"unknown potential kind {kind!r}")

    extras = {k: raw[k] for k in _EXTRA_KEYS if k in raw}
    eps_schedule = extras.get("eps_schedule")
    if eps_schedule is not None:
        if any(b >= a for a, b in zip(eps_schedule, eps_schedule[1:])):
            raise ConfigError("eps_schedule must be strictly decreasing")
        if eps_schedule and eps_schedule[-1] < 2.0 * grid.h:
            raise ConfigError(f"eps_schedule floor {eps_schedule[-1]} below "
                              f"resolvable mollification 2h = {2.0 * grid.h}")

    return RunConfig(command=command, symbol=symbol, grid=grid, solver=solver,
                     potential_spec=pot_raw, extras=extras,
                     output_dir=raw.get("output_dir", "out"), raw=raw)


def _build_potential(cfg):
    pot = cfg.potential_spec
    if not pot:
        raise ConfigError(f"command {cfg.command!r} requires a potential")
    if pot["kind"] == "well":
        spec = WellSpec(a=float(pot.get("a", 1.0)), v=float(pot.get("v", 4.0)),
                        eps=float(pot.get("eps", 0.0)))
        if spec.eps == 0.0:
            return sharp_well(spec, cfg.grid)
        return mollified_well(spec, cfg.grid)
    return anharmonic(int(pot.get("k", 1)), cfg.grid)


def _write_eigenresult(out, result, stem="result"):
    payload = {"lambda": result.lam, "residual": result.residual,
               "iters": result.iters, "converged": result.converged,
               "config": {"tau": result.config.tau, "tol": result.config.tol,
                          "max_iters": result.config.max_iters,
                          "splitting": result.config.splitting,
                          "seed": result.config.seed,
                          "projection": result.config.projection_radius},
               "history_tail": result.history[-10:]}
    io_utils.write_json(out / f"{stem}.json", payload)
    io_utils.write_field(out / "phi", result.phi)
    io_utils.write_radial_profile(result.phi, out / "profile.csv")


def dispatch(cfg):
    """Run one configured command; returns the process exit status."""
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    status = 0

    if cfg.command == "kernel-table":
        kernel_raw = dict(cfg.extras.get("kernel", {}))
        _require_keys("kernel", kernel_raw, ("id", "radii", "t"),
                      required=("id",))
        radii = kernel_raw.get("radii", {"start": 0.1, "stop": 10.0, "num": 50})
        if isinstance(radii, dict):
            radii = np.geomspace(radii["start"], radii["stop"], radii["num"])
        table = build_kernel_table(cfg.symbol, kernel_raw["id"], cfg.grid.d,
                                   np.asarray(radii, dtype=float),
                                   t=kernel_raw.get("t"))
        io_utils.write_kernel_table(table, out / "table")

    elif cfg.command in ("ground-state", "monotonicity"):
        result = ground_state(cfg.symbol, _build_potential(cfg), cfg.solver)
        _write_eigenresult(out, result)
        if cfg.command == "monotonicity":
            report = monotonicity_check(result)
            sym = symmetry_check(result, rotations=int(
                cfg.extras.get("rotations", 0)))
            payload = report.to_json_dict()
            payload["symmetry"] = sym
            io_utils.write_json(out / "report.json", payload)
            io_utils.write_csv(out / "report.csv", ["r", "chi(r)"],
                               report.csv_rows())
        if not result.converged:
            status = 2

    elif cfg.command == "dirichlet-eig":
        radius = float(cfg.extras.get("ball_radius", 1.0))
        result = dirichlet_ground_state(cfg.symbol, radius, cfg.grid,
                                        cfg.solver)
        _write_eigenresult(out, result)
        if not result.converged:
            status = 2

    elif cfg.command == "stability-sweep":
        pot = cfg.potential_spec
        if pot.get("kind") != "well":
            raise ConfigError("stability-sweep requires a well potential")
        well = WellSpec(a=float(pot.get("a", 1.0)), v=float(pot.get("v", 4.0)))
        schedule = cfg.extras.get("eps_schedule", [0.4, 0.2, 0.1, 0.05])
        report = stability_sweep(cfg.symbol, well, schedule, cfg.grid,
                                 cfg.solver, threads=cfg.extras.get(
                                     "_threads", 1))
        io_utils.write_json(out / "report.json", report.to_json_dict())
        io_utils.write_csv(out / "report.csv",
                           ["eps", "lambda", "gap", "gap_l2"],
                           report.csv_rows())
        if not report.converged:
            status = 2

    elif cfg.command == "anharmonic-limit":
        k_list = [int(k) for k in cfg.extras.get("k_list", [1, 2, 4, 8, 16])]
        report = anharmonic_to_dirichlet(cfg.symbol, k_list, cfg.grid,
                                         cfg.solver)
        io_utils.write_json(out / "report.json", report.to_json_dict())
        io_utils.write_csv(out / "report.csv",
                           ["k", "lambda", "gap", "gap_l2"],
                           report.csv_rows())
        if not report.converged:
            status = 2

    elif cfg.command == "antisym-check":
        m = float(cfg.extras.get("m_antisym", cfg.symbol.m))
        alpha = float(cfg.extras.get("alpha_antisym", cfg.symbol.alpha))
        mu = float(cfg.extras.get("mu", 0.0))
        check = antisymmetric_minimum_check(
            m, alpha, 1, lambda y: y * np.exp(-y * y), mu)
        io_utils.write_json(out / "report.json", check.to_json_dict())
        if not (check.sign_ok and check.bounds_ok):
            status = 2

    elif cfg.command == "embedding-check":
        num = int(cfg.extras.get("num_fields", 20))
        kmax = float(cfg.extras.get("kmax_frac", 0.25))
        s = cfg.extras.get("s")
        fields = [random_band_limited(cfg.grid, cfg.solver.seed + i, kmax)
                  for i in range(num)]
        flags = embedding_tail_check(cfg.symbol, fields, s=s)
        payload = {"passes": flags, "all_pass": all(flags),
                   "c_low": kernel_lower_constant(
                       cfg.symbol, cfg.grid.d,
                       s if s is not None else cfg.symbol.alpha / 2.0)}
        io_utils.write_json(out / "report.json", payload)
        if not all(flags):
            status = 2

    artifacts = sorted(f.name for f in out.iterdir()
                       if f.is_file() and f.name != "manifest.json")
    io_utils.write_manifest(out / "manifest.json", cfg.raw, cfg.solver.seed,
                            extra={"command": cfg.command,
                                   "exit_status": status,
                                   "artifacts": artifacts})
    return status


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="nonlocal-spectra",
        description="Ground states and kernel identities of non-local "
                    "Schrodinger operators on a periodic grid.")
    parser.add_argument("--config", required=True, help="JSON run config")
    parser.add_argument("--output", default=None, help="output directory "
                        "(overrides config output_dir)")
    parser.add_argument("--seed", type=int, default=None,
                        help="override solver seed")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads (or env NONLOCAL_SPECTRA_THREADS)")
    parser.add_argument("--verbose", action="store_true")
    args = parser.parse_args(argv)

    threads = args.threads
    if threads is None:
        threads = int(os.environ.get("NONLOCAL_SPECTRA_THREADS", "1"))
    if threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return 1

    try:
        cfg = parse_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    cfg.extras["_threads"] = threads

    if args.output is not None:
        cfg.output_dir = args.output
    if args.seed is not None:
        cfg.solver = SolverConfig(
            tau=cfg.solver.tau, tol=cfg.solver.tol,
            max_iters=cfg.solver.max_iters, splitting=cfg.solver.splitting,
            seed=args.seed, projection_radius=cfg.solver.projection_radius,
            min_iters=cfg.solver.min_iters)
        cfg.raw.setdefault("solver", {})["seed"] = args.seed

    if args.verbose:
        echo = dict(cfg.raw)
        echo["resolved"] = {"command": cfg.command,
                            "symbol": cfg.symbol.label,
                            "grid": {"d": cfg.grid.d, "n": cfg.grid.n,
                                     "L": cfg.grid.L},
                            "threads": threads}
        print(json.dumps(echo, indent=2, sort_keys=True))

    try:
        return dispatch(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # dispatch failures map to exit 1 with context
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
