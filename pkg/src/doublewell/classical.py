"""Classical limit: the driven damped Duffing oscillator.

The scaled equation of motion matching the quantum model is

    x'' + 2 Gamma x' + beta^2 x^3 -/+ x = (g/beta) cos(Omega t)

(- x for the double well).  Rescaling x -> x/c maps solutions between
beta values, so the dynamics depend on beta only through the overall
length scale; the force routine is exactly scale-covariant.

Averaged position distributions are built from a cloud of initial
conditions matched to the quantum wavepacket (same center, same spread)
and sampled on the same window grid as the quantum runs.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .ensemble import Histogram
from .errors import GridCoverageWarning, IntegratorBlowupError
from .observables import GridSpec
from .operators import PhysicsParams
from .qsd import IntegratorConfig, sample_step_indices


@dataclass
class ClassicalState:
    x: float
    v: float
    t: float = 0.0


def _acceleration(x, v, t, params: PhysicsParams):
    quad_sign = -1.0 if params.well_sign == "double_well" else 1.0
    return (
        -2.0 * params.gamma * v
        - params.beta**2 * x**3
        - quad_sign * x
        + (params.g / params.beta) * np.cos(params.omega * t)
    )


def _rk4(x, v, t, dt, params: PhysicsParams):
    """One classical RK4 step; works elementwise on arrays."""
    a1 = _acceleration(x, v, t, params)
    k1x, k1v = v, a1
    a2 = _acceleration(x + 0.5 * dt * k1x, v + 0.5 * dt * k1v, t + 0.5 * dt, params)
    k2x, k2v = v + 0.5 * dt * k1v, a2
    a3 = _acceleration(x + 0.5 * dt * k2x, v + 0.5 * dt * k2v, t + 0.5 * dt, params)
    k3x, k3v = v + 0.5 * dt * k2v, a3
    a4 = _acceleration(x + dt * k3x, v + dt * k3v, t + dt, params)
    k4x, k4v = v + dt * k3v, a4
    x_new = x + (dt / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
    v_new = v + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    return x_new, v_new


def classical_step(state: ClassicalState, params: PhysicsParams, dt: float) -> ClassicalState:
    """Advance one state by one RK4 step."""
    x, v = _rk4(state.x, state.v, state.t, dt, params)
    return ClassicalState(float(x), float(v), state.t + dt)


def classical_energy(x, v, params: PhysicsParams):
    """E = v^2/2 + V(x); strictly non-increasing without the drive."""
    from .operators import classical_potential

    return 0.5 * np.asarray(v) ** 2 + classical_potential(x, params)


@dataclass(frozen=True)
class CloudSpec:
    """Gaussian cloud of initial conditions.

    Defaults mirror the quantum initial wavepacket: centred on the right
    well minimum with position and velocity spreads 1/sqrt(2).  Draw order
    is fixed (all positions, then all velocities) for a given seed.
    """

    size: int
    x0: float
    v0: float = 0.0
    x_std: float = 1.0 / np.sqrt(2.0)
    v_std: float = 1.0 / np.sqrt(2.0)
    master_seed: int = 12345

    @classmethod
    def matching_quantum(cls, params: PhysicsParams, size: int, master_seed: int = 12345):
        return cls(size=size, x0=params.well_minimum, master_seed=master_seed)

    def draw(self) -> tuple[np.ndarray, np.ndarray]:
        rng = np.random.default_rng(self.master_seed)
        x = self.x0 + self.x_std * rng.standard_normal(self.size)
        v = self.v0 + self.v_std * rng.standard_normal(self.size)
        return x, v


@dataclass
class ClassicalEnsembleResult:
    histogram: Histogram
    final_x: np.ndarray
    final_v: np.ndarray
    sample_positions: np.ndarray  # (n_samples, cloud_size)


def classical_histogram(
    params: PhysicsParams,
    icfg: IntegratorConfig,
    cloud: CloudSpec,
    grid: GridSpec,
    n_samples: int = 64,
) -> ClassicalEnsembleResult:
    """Averaged position distribution of a classical cloud.

    Integrates the whole cloud with the same step and the same transient /
    sampling-window layout as the quantum runs and bins the positions at
    each sample time.  Mass falling outside the grid is reported through a
    GridCoverageWarning, never rescaled away.
    """
    x, v = cloud.draw()
    n_steps = icfg.n_steps
    sample_idx = sample_step_indices(icfg, n_samples)
    hist = Histogram.empty(grid)
    positions = np.empty((n_samples, cloud.size))

    ptr = 0
    while ptr < len(sample_idx) and sample_idx[ptr] == 0:
        positions[ptr] = x
        hist.add_positions(x)
        ptr += 1
    for k in range(n_steps):
        t = k * icfg.dt
        x, v = _rk4(x, v, t, icfg.dt, params)
        while ptr < len(sample_idx) and sample_idx[ptr] == k + 1:
            positions[ptr] = x
            hist.add_positions(x)
            ptr += 1
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
        raise IntegratorBlowupError(
            "classical cloud became non-finite", time=n_steps * icfg.dt
        )

    mass = hist.mass()
    if abs(mass - 1.0) > 1e-6:
        warnings.warn(
            f"classical histogram holds mass {mass:.8f}; grid clips the cloud",
            GridCoverageWarning,
            stacklevel=2,
        )
    return ClassicalEnsembleResult(
        histogram=hist, final_x=x, final_v=v, sample_positions=positions
    )
