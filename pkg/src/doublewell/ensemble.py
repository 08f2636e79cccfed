"""Trajectory ensembles and their averaged outputs.

The ensemble average of QSD trajectories reconstructs the master-equation
state: density matrices are averaged over trajectories (and, for windowed
observables, over sample times), and the averaged position distribution

    P_avg(x) = (1/(M N)) sum_{traj, sample} |psi(x)|^2

is accumulated on a fixed grid.  Accumulation is exactly reproducible:
trajectory i always uses the seed derived from (master_seed, i), every
trajectory runs through the same single-trajectory integrator, and
partial sums are reduced in a fixed blocked order that does not depend on
how many workers are used.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import GridCoverageWarning, InvariantViolationError
from .observables import GridSpec, hermite_functions
from .qsd import (
    IntegratorConfig,
    StateVector,
    TrajectoryResult,
    default_initial_state,
    run_trajectory,
    trajectory_seed,
)

# Trajectories per reduction block.  Fixed (never derived from the worker
# count) so that sums are reassociated identically no matter how the work
# is scheduled.
TRAJ_BLOCK = 16


@dataclass
class Histogram:
    """Accumulating position histogram on a fixed grid.

    `weights` holds the *sum* of per-sample densities (per unit length);
    `samples` counts how many samples went in.  The normalized estimate
    is density() = weights / samples; no rescaling beyond that division is
    ever applied, so a normalization failure stays visible.
    """

    grid: GridSpec
    weights: np.ndarray
    samples: int = 0

    @classmethod
    def empty(cls, grid: GridSpec) -> "Histogram":
        return cls(grid=grid, weights=np.zeros(grid.bins), samples=0)

    def add_density(self, density_sum: np.ndarray, n_samples: int) -> None:
        """Add a pre-summed block of per-sample densities at the bin centers."""
        self.weights = self.weights + density_sum
        self.samples += n_samples

    def add_positions(self, xs: np.ndarray) -> None:
        """Add point samples; each contributes 1/width to its bin."""
        counts, _ = np.histogram(xs, bins=self.grid.edges)
        self.weights = self.weights + counts / self.grid.width
        self.samples += len(xs)

    def density(self) -> np.ndarray:
        if self.samples == 0:
            raise ValueError("histogram holds no samples")
        return self.weights / self.samples

    def mass(self) -> float:
        """Total probability on the grid; 1 up to clipping and quadrature error."""
        return float(np.sum(self.density())) * self.grid.width


def merge_histograms(parts) -> Histogram:
    """Merge histograms accumulated on the identical grid.

    Weights and sample counts add; the grids must match exactly.  Merging
    in trajectory order reproduces a single accumulating run bit for bit;
    any other order agrees to within float reassociation error.
    """
    parts = list(parts)
    if not parts:
        raise ValueError("nothing to merge")
    grid = parts[0].grid
    for h in parts[1:]:
        if h.grid != grid:
            raise ValueError(f"grid mismatch: {h.grid} != {grid}")
    out = Histogram.empty(grid)
    for h in parts:
        out.add_density(h.weights, h.samples)
    return out


@dataclass
class DensityMatrix:
    """Mean of `sample_count` pure-state projectors."""

    rho: np.ndarray
    sample_count: int

    def validate(self) -> dict:
        """Measure the defining invariants; see require_valid()."""
        m = self.rho
        herm = float(np.linalg.norm(m - m.conj().T) / max(np.linalg.norm(m), 1e-300))
        trace_err = float(abs(np.trace(m).real - 1.0) + abs(np.trace(m).imag))
        min_eig = float(np.linalg.eigvalsh(m).min())
        return {
            "hermiticity_residual": herm,
            "trace_error": trace_err,
            "min_eigenvalue": min_eig,
        }

    def require_valid(self, herm_tol=1e-10, trace_tol=1e-10, eig_tol=1e-8) -> dict:
        checks = self.validate()
        if checks["hermiticity_residual"] > herm_tol:
            raise InvariantViolationError(
                f"density matrix not Hermitian: residual {checks['hermiticity_residual']:.2e}"
            )
        if checks["trace_error"] > trace_tol:
            raise InvariantViolationError(
                f"density matrix trace off by {checks['trace_error']:.2e}"
            )
        if checks["min_eigenvalue"] < -eig_tol:
            raise InvariantViolationError(
                f"density matrix has eigenvalue {checks['min_eigenvalue']:.2e}"
            )
        return checks


def density_matrix_from_states(states: np.ndarray) -> DensityMatrix:
    """Average projector of a batch of normalized state vectors (rows)."""
    states = np.atleast_2d(states)
    rho = (states.T @ states.conj()) / states.shape[0]
    return DensityMatrix(rho=rho, sample_count=states.shape[0])


@dataclass(frozen=True)
class EnsembleConfig:
    """Size, seeding and output grid of one ensemble run."""

    trajectories: int
    grid: GridSpec
    samples: int = 64
    master_seed: int = 12345

    def __post_init__(self):
        if self.trajectories < 1:
            raise ValueError("need at least one trajectory")
        if self.samples < 1:
            raise ValueError("need at least one sample per trajectory")
        if self.grid.bins < 8:
            raise ValueError("histogram grid needs at least 8 bins")


@dataclass
class EnsembleResult:
    """Averaged outputs of run_ensemble."""

    density_matrix: DensityMatrix  # averaged over trajectories and window samples
    histogram: Histogram           # P_avg(x) accumulator
    table: dict                    # column name -> (M*N,) array of raw observables
    seeds: np.ndarray
    max_leakage: float
    max_norm_drift: float

    @property
    def histogram_mass(self) -> float:
        return self.histogram.mass()


TABLE_COLUMNS = ("trajectory", "seed", "sample", "time", "q", "p", "energy", "n")


def _trajectory_partials(ops, result: TrajectoryResult, phi, h_static):
    """Histogram weights, projector sum and observable columns of one trajectory."""
    snaps = result.states
    psi_x = snaps @ phi                        # (N, bins)
    dens_sum = np.sum(psi_x.real**2 + psi_x.imag**2, axis=0)
    rho_sum = snaps.T @ snaps.conj()

    e_q = np.einsum("ki,ki->k", snaps.conj(), snaps @ ops.q.T).real
    e_p = np.einsum("ki,ki->k", snaps.conj(), snaps @ ops.p.T).real
    e_h0 = np.einsum("ki,ki->k", snaps.conj(), snaps @ h_static.T).real
    drive = ops.drive_amplitude * np.cos(ops.drive_frequency * result.times)
    e_h = e_h0 - drive * e_q
    e_n = (np.abs(snaps) ** 2) @ np.arange(ops.dim)
    return dens_sum, rho_sum, (result.times, e_q, e_p, e_h, e_n)


def _run_block(ops, cfg, init, seeds, indices, n_samples, grid):
    """Integrate one block of trajectories and reduce it in index order."""
    phi = hermite_functions(grid.centers, ops.dim)
    h_static = ops.h_sys + ops.h_damp
    weights = np.zeros(grid.bins)
    rho = np.zeros((ops.dim, ops.dim), dtype=np.complex128)
    cols = {name: [] for name in TABLE_COLUMNS}
    max_leak = 0.0
    max_drift = 0.0
    for idx, seed in zip(indices, seeds):
        res = run_trajectory(ops, cfg, init, seed, n_samples=n_samples)
        dens_sum, rho_sum, (times, e_q, e_p, e_h, e_n) = _trajectory_partials(
            ops, res, phi, h_static
        )
        weights += dens_sum
        rho += rho_sum
        cols["trajectory"].append(np.full(n_samples, idx, dtype=np.int64))
        cols["seed"].append(np.full(n_samples, seed, dtype=np.uint64))
        cols["sample"].append(np.arange(n_samples, dtype=np.int64))
        cols["time"].append(times)
        cols["q"].append(e_q)
        cols["p"].append(e_p)
        cols["energy"].append(e_h)
        cols["n"].append(e_n)
        max_leak = max(max_leak, res.max_leakage)
        max_drift = max(max_drift, res.max_norm_drift)
    cols = {k: np.concatenate(v) for k, v in cols.items()}
    return weights, rho, cols, max_leak, max_drift


def run_ensemble(
    ops,
    icfg: IntegratorConfig,
    ecfg: EnsembleConfig,
    init: StateVector | None = None,
    n_jobs: int = 1,
) -> EnsembleResult:
    """Run an ensemble and average it into (rho, P_avg, observable table).

    Trajectory i uses trajectory_seed(master_seed, i); results are
    identical for any n_jobs.  The density matrix averages the states at
    all window sample times of all trajectories.  The averaged histogram
    mass should be 1; a deficit beyond 1e-6 (grid clipping or basis
    truncation) triggers a GridCoverageWarning but is never rescaled away.
    """
    if init is None:
        if ops.params is None:
            raise ValueError("operator set carries no params; pass an initial state")
        init = default_initial_state(ops.params, ops.dim)

    m = ecfg.trajectories
    seeds = np.array([trajectory_seed(ecfg.master_seed, i) for i in range(m)], dtype=np.uint64)
    blocks = [
        (np.arange(lo, min(lo + TRAJ_BLOCK, m)), seeds[lo : lo + TRAJ_BLOCK])
        for lo in range(0, m, TRAJ_BLOCK)
    ]

    def job(block):
        indices, block_seeds = block
        return _run_block(ops, icfg, init, block_seeds, indices, ecfg.samples, ecfg.grid)

    if n_jobs == 1:
        partials = (job(b) for b in blocks)
    else:
        from joblib import Parallel, delayed

        partials = Parallel(n_jobs=n_jobs, return_as="generator")(
            delayed(job)(b) for b in blocks
        )

    hist = Histogram.empty(ecfg.grid)
    rho = np.zeros((ops.dim, ops.dim), dtype=np.complex128)
    col_parts = {name: [] for name in TABLE_COLUMNS}
    max_leak = 0.0
    max_drift = 0.0
    for weights, rho_block, cols, leak, drift in partials:
        hist.add_density(weights, len(cols["time"]))
        rho += rho_block
        for name in TABLE_COLUMNS:
            col_parts[name].append(cols[name])
        max_leak = max(max_leak, leak)
        max_drift = max(max_drift, drift)

    table = {name: np.concatenate(parts) for name, parts in col_parts.items()}
    n_states = m * ecfg.samples
    density_matrix = DensityMatrix(rho=rho / n_states, sample_count=n_states)

    mass = hist.mass()
    if abs(mass - 1.0) > 1e-6:
        warnings.warn(
            f"averaged histogram holds mass {mass:.8f}; the grid clips the "
            "state or the basis is truncated too hard",
            GridCoverageWarning,
            stacklevel=2,
        )

    return EnsembleResult(
        density_matrix=density_matrix,
        histogram=hist,
        table=table,
        seeds=seeds,
        max_leakage=max_leak,
        max_norm_drift=max_drift,
    )


def final_states(
    ops,
    icfg: IntegratorConfig,
    trajectories: int,
    master_seed: int,
    init: StateVector | None = None,
    n_jobs: int = 1,
) -> np.ndarray:
    """Final-time amplitudes of an ensemble, one row per trajectory.

    Useful for comparing the trajectory mean against a master-equation
    state at a single time: build prefixes of the rows to study how the
    agreement improves with ensemble size.
    """
    if init is None:
        if ops.params is None:
            raise ValueError("operator set carries no params; pass an initial state")
        init = default_initial_state(ops.params, ops.dim)
    seeds = [trajectory_seed(master_seed, i) for i in range(trajectories)]

    def job(seed):
        return run_trajectory(ops, icfg, init, seed, n_samples=0).final.amplitudes

    if n_jobs == 1:
        rows = [job(s) for s in seeds]
    else:
        from joblib import Parallel, delayed

        rows = Parallel(n_jobs=n_jobs)(delayed(job)(s) for s in seeds)
    return np.array(rows)


def final_density_matrix(
    ops,
    icfg: IntegratorConfig,
    trajectories: int,
    master_seed: int,
    init: StateVector | None = None,
    n_jobs: int = 1,
) -> DensityMatrix:
    """Ensemble-mean projector at the final integration time."""
    return density_matrix_from_states(
        final_states(ops, icfg, trajectories, master_seed, init=init, n_jobs=n_jobs)
    )
