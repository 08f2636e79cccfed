"""Command line runner.

    doublewell --config run.cfg [--mode M] [--out DIR] [--seed N] [--format csv|json]
    doublewell --preset fig1 [--out DIR] [--threads K]

Exactly one of --config / --preset selects what to run.  Exit codes:
0 success, 2 configuration error, 3 numerical blowup, 4 violated physical
invariant.

Output files (per run): a histogram file (``# key = value`` header echoing
every resolved parameter, then ``x,density`` rows), an observables table
for ensemble runs, a beta report for nems_map, and ``run_manifest.json``
recording versions, seeds, defaulted keys, timings and invariant checks.
All floats are written with repr, so identical runs produce byte-identical
data files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import replace

import numpy as np

from . import __version__
from .classical import ClassicalEnsembleResult, CloudSpec, classical_histogram
from .config import PRESETS, SimConfig, config_items, parse_config_file
from .ensemble import Histogram, run_ensemble
from .errors import ConfigError, DoubleWellError, IntegratorBlowupError, InvariantViolationError
from .nems import (
    beta_from_beam,
    beta_prefactor,
    buckling_ratio,
    critical_tension,
    potential_coefficients,
    quality_factor_to_gamma,
)
from .observables import position_density_from_rho
from .operators import build_operator_set
from .oracle import ORACLE_DIM_CAP, evolve_master, trace_distance
from .qsd import default_initial_state, sample_step_indices
from .ensemble import density_matrix_from_states

THREADS_ENV = "DOUBLEWELL_THREADS"


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_histogram(path, cfg: SimConfig, hist_x, hist_density, extra_header=()):
    if cfg.output_format == "json":
        payload = {
            "config": {k: v for k, v in config_items(cfg)},
            "x": list(map(float, hist_x)),
            "density": list(map(float, hist_density)),
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        return
    lines = [f"# {k} = {_fmt(v)}" for k, v in config_items(cfg)]
    lines += [f"# {line}" for line in extra_header]
    lines.append("x,density")
    for x, d in zip(hist_x, hist_density):
        lines.append(f"{_fmt(float(x))},{_fmt(float(d))}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_observables(path, table: dict):
    cols = list(table)
    rows = len(table[cols[0]])
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(cols) + "\n")
        for i in range(rows):
            fh.write(
                ",".join(
                    str(int(table[c][i]))
                    if table[c].dtype.kind in "iu"
                    else _fmt(float(table[c][i]))
                    for c in cols
                )
                + "\n"
            )


def _histogram_suffix(cfg: SimConfig) -> str:
    return "json" if cfg.output_format == "json" else "csv"


def _run_qsd(cfg: SimConfig, out_dir: str, stem: str, threads: int) -> dict:
    ops = build_operator_set(cfg.params, cfg.dim)
    result = run_ensemble(ops, cfg.integrator, cfg.ensemble_config(), n_jobs=threads)
    hist_file = os.path.join(out_dir, f"{stem}.{_histogram_suffix(cfg)}")
    _write_histogram(hist_file, cfg, result.histogram.grid.centers, result.histogram.density())
    obs_file = os.path.join(out_dir, f"{stem}_observables.csv")
    _write_observables(obs_file, result.table)
    rho_checks = result.density_matrix.validate()
    return {
        "files": [os.path.basename(hist_file), os.path.basename(obs_file)],
        "max_leakage": result.max_leakage,
        "max_norm_drift": result.max_norm_drift,
        "histogram_mass": result.histogram_mass,
        "density_matrix": rho_checks,
    }


def _run_classical(cfg: SimConfig, out_dir: str, stem: str) -> dict:
    cloud = CloudSpec.matching_quantum(cfg.params, cfg.trajectories, cfg.master_seed)
    result: ClassicalEnsembleResult = classical_histogram(
        cfg.params, cfg.integrator, cloud, cfg.grid, n_samples=cfg.samples
    )
    hist_file = os.path.join(out_dir, f"{stem}.{_histogram_suffix(cfg)}")
    _write_histogram(hist_file, cfg, result.histogram.grid.centers, result.histogram.density())
    return {
        "files": [os.path.basename(hist_file)],
        "histogram_mass": result.histogram.mass(),
    }


def _averaged_master_rho(cfg: SimConfig, ops):
    """Window-averaged master-equation state on the shared sample grid."""
    rho0 = np.outer(
        default_initial_state(cfg.params, cfg.dim).amplitudes,
        default_initial_state(cfg.params, cfg.dim).amplitudes.conj(),
    )
    samples = []
    idx = sample_step_indices(cfg.integrator, cfg.samples)
    evolve_master(
        rho0,
        ops,
        cfg.integrator.dt,
        cfg.integrator.total_time,
        observer=lambda t, rho: samples.append(rho),
        observe_at=idx,
    )
    rho_bar = sum(samples) / len(samples)
    return rho_bar


def _run_oracle(cfg: SimConfig, out_dir: str, stem: str) -> dict:
    ops = build_operator_set(cfg.params, cfg.dim)
    rho_bar = _averaged_master_rho(cfg, ops)
    dens = position_density_from_rho(rho_bar, cfg.grid)
    hist_file = os.path.join(out_dir, f"{stem}.{_histogram_suffix(cfg)}")
    _write_histogram(hist_file, cfg, cfg.grid.centers, dens)
    tr = float(np.trace(rho_bar).real)
    return {
        "files": [os.path.basename(hist_file)],
        "histogram_mass": float(np.sum(dens)) * cfg.grid.width,
        "averaged_trace": tr,
    }


def _run_compare(cfg: SimConfig, out_dir: str, stem: str, threads: int) -> dict:
    ops = build_operator_set(cfg.params, cfg.dim)
    qsd = run_ensemble(ops, cfg.integrator, cfg.ensemble_config(), n_jobs=threads)
    cloud = CloudSpec.matching_quantum(cfg.params, cfg.trajectories, cfg.master_seed)
    cls = classical_histogram(cfg.params, cfg.integrator, cloud, cfg.grid, n_samples=cfg.samples)
    rho_bar = _averaged_master_rho(cfg, ops)
    dens_oracle = position_density_from_rho(rho_bar, cfg.grid)
    td = trace_distance(qsd.density_matrix.rho, rho_bar)

    path = os.path.join(out_dir, f"{stem}.csv")
    lines = [f"# {k} = {_fmt(v)}" for k, v in config_items(cfg)]
    lines.append(f"# trace_distance_qsd_oracle = {_fmt(td)}")
    lines.append("x,density_qsd,density_classical,density_oracle")
    for x, dq, dc, do in zip(
        cfg.grid.centers, qsd.histogram.density(), cls.histogram.density(), dens_oracle
    ):
        lines.append(f"{_fmt(float(x))},{_fmt(float(dq))},{_fmt(float(dc))},{_fmt(float(do))}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    return {
        "files": [os.path.basename(path)],
        "trace_distance_qsd_oracle": td,
        "max_leakage": qsd.max_leakage,
        "histogram_mass_qsd": qsd.histogram_mass,
        "histogram_mass_classical": cls.histogram.mass(),
    }


def _run_nems(cfg: SimConfig, out_dir: str, stem: str) -> dict:
    beam = cfg.beam
    coeffs = potential_coefficients(beam)
    report = {
        "c2": coeffs.c2,
        "c4": coeffs.c4,
        "is_double_well": coeffs.is_double_well,
        "critical_tension": critical_tension(beam),
        "buckling_ratio": buckling_ratio(beam),
        "beta_prefactor": beta_prefactor(beam),
    }
    try:
        beta = beta_from_beam(beam)
        report["beta"] = beta
        report["beta_squared"] = beta**2
    except ConfigError as err:
        report["beta"] = None
        report["beta_note"] = str(err)
    if cfg.quality_factor is not None:
        report["gamma"] = quality_factor_to_gamma(cfg.quality_factor)

    if cfg.output_format == "json":
        path = os.path.join(out_dir, f"{stem}.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump({"config": dict(config_items(cfg)), "report": report}, fh, indent=2)
            fh.write("\n")
    else:
        path = os.path.join(out_dir, f"{stem}.csv")
        lines = [f"# {k} = {_fmt(v)}" for k, v in config_items(cfg)]
        lines.append("quantity,value")
        for k, v in report.items():
            lines.append(f"{k},{_fmt(v) if v is not None else ''}")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
    return {"files": [os.path.basename(path)], "report": report}


def _check_mode_fit(cfg: SimConfig) -> None:
    """A --mode override may only retarget within the config's parameter family."""
    if cfg.mode == "nems_map":
        if cfg.beam is None:
            raise ConfigError("mode nems_map needs beam parameters", key="mode")
    elif cfg.params is None:
        raise ConfigError(f"mode {cfg.mode} requires beta and gamma", key="mode")
    elif cfg.mode in ("master_oracle", "compare") and cfg.dim > ORACLE_DIM_CAP:
        raise ConfigError(
            f"mode {cfg.mode} solves the dense master equation and is capped at "
            f"dim <= {ORACLE_DIM_CAP}, got {cfg.dim}",
            key="dim",
        )


def run_config(cfg: SimConfig, out_dir: str, stem: str, threads: int = 1) -> dict:
    """Execute one resolved configuration; returns its manifest block."""
    os.makedirs(out_dir, exist_ok=True)
    start = time.perf_counter()
    if cfg.mode == "qsd_ensemble":
        block = _run_qsd(cfg, out_dir, stem, threads)
    elif cfg.mode == "classical":
        block = _run_classical(cfg, out_dir, stem)
    elif cfg.mode == "master_oracle":
        block = _run_oracle(cfg, out_dir, stem)
    elif cfg.mode == "compare":
        block = _run_compare(cfg, out_dir, stem, threads)
    elif cfg.mode == "nems_map":
        block = _run_nems(cfg, out_dir, stem)
    else:  # pragma: no cover - parse_config rejects unknown modes
        raise ConfigError(f"unknown mode {cfg.mode!r}", key="mode")
    block["mode"] = cfg.mode
    block["config"] = {k: v for k, v in config_items(cfg)}
    block["defaulted_keys"] = list(cfg.defaulted)
    block["wall_time_s"] = round(time.perf_counter() - start, 3)
    return block


def _write_manifest(out_dir: str, runs: dict) -> str:
    import numba
    import scipy

    manifest = {
        "package": "doublewell",
        "version": __version__,
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "numba": numba.__version__,
        "runs": runs,
    }
    path = os.path.join(out_dir, "run_manifest.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, default=float)
        fh.write("\n")
    return path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="doublewell",
        description="Quantum state diffusion simulations of the driven double-well oscillator.",
    )
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--config", help="path to a key = value configuration file")
    source.add_argument("--preset", choices=sorted(PRESETS), help="run a built-in panel sweep")
    parser.add_argument("--out", default=".", help="output directory (default: current)")
    parser.add_argument("--seed", type=int, default=None, help="override master_seed")
    parser.add_argument("--format", choices=("csv", "json"), default=None, help="override output_format")
    parser.add_argument(
        "--mode",
        choices=("qsd_ensemble", "classical", "master_oracle", "compare", "nems_map"),
        default=None,
        help="override the mode of a --config run (not valid with --preset)",
    )
    parser.add_argument(
        "--threads",
        type=int,
        default=None,
        help=f"worker processes for ensembles (default: ${THREADS_ENV} or 1)",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    threads = args.threads
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV, "1"))
    if threads < 1:
        print(f"doublewell: --threads must be positive, got {threads}", file=sys.stderr)
        return 2
    if args.mode is not None and args.preset is not None:
        print("doublewell: --mode cannot be combined with --preset", file=sys.stderr)
        return 2

    try:
        if args.preset is not None:
            panels = PRESETS[args.preset]()
            configs = [(f"{args.preset}_{label}", cfg) for label, cfg in panels]
        else:
            configs = [("run", parse_config_file(args.config))]

        runs = {}
        for stem, cfg in configs:
            if args.mode is not None:
                cfg = replace(cfg, mode=args.mode)
                _check_mode_fit(cfg)
            if args.seed is not None:
                cfg = replace(cfg, master_seed=args.seed)
            if args.format is not None:
                cfg = replace(cfg, output_format=args.format)
            runs[stem] = run_config(cfg, args.out, stem, threads=threads)
        manifest_path = _write_manifest(args.out, runs)
        written = [f for block in runs.values() for f in block["files"]]
        print(f"wrote {', '.join(written)} and {os.path.basename(manifest_path)} in {args.out}")
        return 0
    except ConfigError as err:
        print(f"doublewell: configuration error: {err}", file=sys.stderr)
        return 2
    except IntegratorBlowupError as err:
        print(f"doublewell: integration blew up: {err}", file=sys.stderr)
        return 3
    except InvariantViolationError as err:
        print(f"doublewell: invariant violated: {err}", file=sys.stderr)
        return 4
    except DoubleWellError as err:  # pragma: no cover - safety net
        print(f"doublewell: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
