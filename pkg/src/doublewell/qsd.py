"""Quantum state diffusion unravelling of the damped, driven oscillator.

A single trajectory follows the Ito stochastic Schroedinger equation

    |dpsi> = -i H |psi> dt
             + sum_j ( <L_j^dag> L_j - L_j^dag L_j / 2 - <L_j^dag><L_j> / 2 ) |psi> dt
             + sum_j ( L_j - <L_j> ) |psi> dxi_j

with independent complex Wiener increments satisfying

    E[dxi_j] = 0,   E[dxi_i dxi_j] = 0,   E[dxi_i conj(dxi_j)] = delta_ij dt.

The ensemble mean of |psi><psi| then solves the Lindblad master equation
for the same H and L_j.

Time stepping uses the Euler-Maruyama rule in integrating-factor form: the
constant linear part A = -i(H_sys + H_damp) - sum_j L_j^dag L_j / 2 is
applied exactly through its matrix exponential exp(A dt), computed once
per run, while the drive and the expectation-dependent drift and noise
terms enter explicitly.  A plain explicit step is useless here: the
truncated quartic ladder gives A eigenvalues of size ~ beta^2 dim^2, and
any amplitude at the top of the ladder -- roundoff included -- would be
amplified by |1 - i E dt| > 1 every step until it dominated the state.
The exponential map has |exp((-iE - kappa) dt)| <= 1 instead, so the
truncation boundary stays quiet at any dt.

Expectation values entering a step are always taken in the pre-step state
and the drive is evaluated at the pre-step time.  The drift preserves the
norm exactly in the continuous limit; the discrete step drifts at O(dt^2)
per step and is renormalized after every step by default.
"""

from __future__ import annotations

import warnings
import weakref
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from . import _kernel
from .errors import IntegratorBlowupError, LeakageWarning
from .observables import truncation_leakage
from .operators import OperatorSet, PhysicsParams

# Occupation of the top tenth of the Fock ladder above which a trajectory
# is flagged as touching the truncation boundary.
LEAKAGE_TOL = 1e-6


@dataclass
class StateVector:
    """Fock amplitudes plus the simulation time they refer to."""

    amplitudes: np.ndarray
    time: float = 0.0

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy(), self.time)


@dataclass(frozen=True)
class IntegratorConfig:
    """Time stepping and sampling-window layout.

    The observation window of length `t_sample_window` starts after the
    initial transient has been discarded; averaged distributions are built
    from states sampled inside that window only.
    """

    dt: float = 1e-3
    t_transient: float = 40.0 * np.pi
    t_sample_window: float = 4.0 * np.pi
    renormalize_every_step: bool = True

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.t_transient < 0 or self.t_sample_window < 0:
            raise ValueError("window times must be non-negative")

    @classmethod
    def for_drive(
        cls,
        omega: float,
        dt: float = 1e-3,
        transient_periods: float = 20.0,
        window_periods: float = 2.0,
        renormalize_every_step: bool = True,
    ) -> "IntegratorConfig":
        """Windows expressed in driving periods (defaults: 20 discarded, 2 sampled)."""
        period = 2.0 * np.pi / omega
        return cls(
            dt=dt,
            t_transient=transient_periods * period,
            t_sample_window=window_periods * period,
            renormalize_every_step=renormalize_every_step,
        )

    @property
    def total_time(self) -> float:
        return self.t_transient + self.t_sample_window

    @property
    def n_steps(self) -> int:
        return int(round(self.total_time / self.dt))


def sample_step_indices(cfg: IntegratorConfig, n_samples: int) -> np.ndarray:
    """Step counts of the n_samples midpoint sample times inside the window.

    Sample k targets t = t_transient + (k + 1/2) * window / n, snapped to
    the nearest integer step.  Both the quantum and the classical
    integrators use this same layout, so their averaged distributions are
    built from identical time grids.
    """
    if n_samples == 0:
        return np.zeros(0, dtype=np.int64)
    delta = cfg.t_sample_window / n_samples
    t_k = cfg.t_transient + (np.arange(n_samples) + 0.5) * delta
    idx = np.rint(t_k / cfg.dt).astype(np.int64)
    return np.clip(idx, 0, cfg.n_steps)


class NoiseStream:
    """Reproducible complex Wiener increments for one trajectory.

    Draw order is fixed: each step consumes four standard normals
    (Re dxi_1, Im dxi_1, Re dxi_2, Im dxi_2), scaled by sqrt(dt/2) so that
    E[|dxi_j|^2] = dt.  Both channels are always drawn, whether or not the
    second collapse operator is active, so a given seed always yields the
    same increment table.
    """

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._rng = np.random.default_rng(self.seed)

    def increments(self, n_steps: int, dt: float) -> np.ndarray:
        z = self._rng.standard_normal((n_steps, 4))
        s = np.sqrt(dt / 2.0)
        out = np.empty((n_steps, 2), dtype=np.complex128)
        out[:, 0] = s * (z[:, 0] + 1j * z[:, 1])
        out[:, 1] = s * (z[:, 2] + 1j * z[:, 3])
        return out


def trajectory_seed(master_seed: int, index: int) -> int:
    """Independent, reproducible child seed for trajectory `index`.

    Children are derived through SeedSequence spawn keys, so any subset of
    trajectories can be regenerated without drawing the others.
    """
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(index),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def coherent_state(dim: int, q0: float, p0: float = 0.0) -> np.ndarray:
    """Coherent state centred at (q0, p0): displaced ground state, minimal wavepacket."""
    alpha = (q0 + 1j * p0) / np.sqrt(2.0)
    n = np.arange(dim)
    log_fact = np.cumsum(np.concatenate(([0.0], np.log(np.arange(1, dim)))))
    if alpha == 0:
        amps = np.zeros(dim, dtype=np.complex128)
        amps[0] = 1.0
        return amps
    log_mag = -0.5 * np.abs(alpha) ** 2 + n * np.log(np.abs(alpha)) - 0.5 * log_fact
    amps = np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))
    # renormalize: the truncated tail plus log-domain roundoff
    return amps / np.linalg.norm(amps)


def default_initial_state(params: PhysicsParams, dim: int) -> StateVector:
    """Minimal wavepacket resting at the (right) potential minimum."""
    return StateVector(coherent_state(dim, params.well_minimum), 0.0)


_KERNEL_CACHE: "weakref.WeakKeyDictionary[OperatorSet, dict]" = weakref.WeakKeyDictionary()

_EMPTY_BANDS = np.zeros((0, 0), dtype=np.complex128)


def step_generator(ops: OperatorSet) -> np.ndarray:
    """A = -i (H_sys + H_damp) - sum_j L_j^dag L_j / 2, the constant linear part."""
    k = 0.5 * (
        ops.l_relax.conj().T @ ops.l_relax + ops.l_pump.conj().T @ ops.l_pump
    )
    return -1j * (ops.h_sys + ops.h_damp) - k


def _kernel_arrays(ops: OperatorSet, dt: float) -> tuple:
    """exp(A dt) plus banded operators for the stepper, cached per (ops, dt)."""
    per_ops = _KERNEL_CACHE.get(ops)
    if per_ops is None:
        per_ops = {}
        _KERNEL_CACHE[ops] = per_ops
    cached = per_ops.get(dt)
    if cached is not None:
        return cached
    ea = np.ascontiguousarray(expm(step_generator(ops) * dt))
    q_bands, q_bw = _kernel.bands_from_dense(ops.q)
    l1_bands, l1_bw = _kernel.bands_from_dense(ops.l_relax)
    if np.any(ops.l_pump):
        l2_bands, l2_bw = _kernel.bands_from_dense(ops.l_pump)
    else:
        l2_bands, l2_bw = _EMPTY_BANDS, 0
    arrays = (ea, q_bands, q_bw, l1_bands, l1_bw, l2_bands, l2_bw)
    per_ops[dt] = arrays
    return arrays


def qsd_step(
    state: StateVector,
    ops: OperatorSet,
    dt: float,
    noise,
    renormalize: bool = True,
) -> StateVector:
    """One Euler-Maruyama step of the diffusion equation, integrating-factor form.

    `noise` is the pair (dxi_1, dxi_2) of complex increments for this step.
    The constant linear part of the generator is applied exactly through
    exp(A dt); drive, expectation drift and noise terms use the pre-step
    state and time.  The returned state is renormalized unless
    `renormalize` is false (pass false to inspect the raw norm drift of
    the discrete update).

    This is the plain-numpy reference implementation of the step; the
    trajectory runner executes exactly the same update rule in a compiled
    loop, and the two agree to roundoff.
    """
    psi = state.amplitudes
    dxi1, dxi2 = complex(noise[0]), complex(noise[1])
    ea = _kernel_arrays(ops, float(dt))[0]
    out = psi.astype(np.complex128, copy=True)
    if ops.drive_amplitude != 0.0:
        dc = ops.drive_amplitude * np.cos(ops.drive_frequency * state.time)
        out += 1j * dc * dt * (ops.q @ psi)
    for l_op, dxi in ((ops.l_relax, dxi1), (ops.l_pump, dxi2)):
        if not np.any(l_op):
            continue
        l_psi = l_op @ psi
        l_exp = complex(np.vdot(psi, l_psi))
        out += dt * (np.conj(l_exp) * l_psi - 0.5 * abs(l_exp) ** 2 * psi)
        out += (l_psi - l_exp * psi) * dxi
    out = ea @ out
    nrm = np.linalg.norm(out)
    if not np.isfinite(nrm) or nrm == 0.0:
        raise IntegratorBlowupError(
            f"state became non-finite at t = {state.time + dt:.6f}",
            time=state.time + dt,
            seed=None,
        )
    if renormalize:
        out = out / nrm
    return StateVector(out, state.time + dt)


@dataclass
class TrajectoryResult:
    """Sampled states and diagnostics of one trajectory."""

    seed: int
    times: np.ndarray          # (n_samples,) sample times
    states: np.ndarray         # (n_samples, dim) normalized amplitudes
    final: StateVector
    max_leakage: float         # worst top-of-ladder occupation seen at samples/final
    max_norm_drift: float      # worst | ||psi||^2 - 1 | before renormalization
    payloads: tuple = field(default_factory=tuple)  # one list per sampler


def run_trajectory(
    ops: OperatorSet,
    cfg: IntegratorConfig,
    init: StateVector,
    seed: int,
    n_samples: int = 64,
    samplers: tuple = (),
) -> TrajectoryResult:
    """Integrate one trajectory and sample it on the window grid.

    The full time span t_transient + t_sample_window is integrated with
    fixed step dt; the state is recorded at the n_samples midpoint times of
    the window (see sample_step_indices).  Each entry of `samplers` is a
    callable f(t, amplitudes) invoked in time order on the sampled states;
    its return values are collected in the result's payloads.

    Identical (ops, cfg, init, seed) inputs reproduce bit-identical
    amplitudes.  Raises IntegratorBlowupError if the state becomes
    non-finite.
    """
    if isinstance(init, StateVector):
        psi0, t0 = init.amplitudes, init.time
    else:
        psi0, t0 = np.asarray(init), 0.0
    psi = np.array(psi0, dtype=np.complex128, copy=True)
    if psi.shape != (ops.dim,):
        raise ValueError(f"state has shape {psi.shape}, operators have dim {ops.dim}")

    n_steps = cfg.n_steps
    sample_idx = sample_step_indices(cfg, n_samples)
    noise = NoiseStream(seed).increments(n_steps, cfg.dt)
    snapshots = np.empty((n_samples, ops.dim), dtype=np.complex128)

    arrays = _kernel_arrays(ops, float(cfg.dt))
    status, stop_step, max_drift = _kernel.run_kernel(
        psi,
        float(t0),
        float(cfg.dt),
        n_steps,
        *arrays,
        float(ops.drive_amplitude),
        float(ops.drive_frequency),
        noise,
        cfg.renormalize_every_step,
        sample_idx,
        snapshots,
    )
    if status != 0:
        raise IntegratorBlowupError(
            f"state became non-finite at step {stop_step} "
            f"(t = {t0 + stop_step * cfg.dt:.4f}, seed = {seed})",
            time=t0 + stop_step * cfg.dt,
            seed=seed,
        )

    times = t0 + sample_idx * cfg.dt
    leak = truncation_leakage(psi)
    for s in snapshots:
        leak = max(leak, truncation_leakage(s))
    if leak > LEAKAGE_TOL:
        warnings.warn(
            f"trajectory (seed={seed}) reached occupation {leak:.2e} in the top "
            f"Fock levels; results may be truncation-limited, raise dim",
            LeakageWarning,
            stacklevel=2,
        )

    payloads = tuple([] for _ in samplers)
    for t, snap in zip(times, snapshots):
        for j, f in enumerate(samplers):
            payloads[j].append(f(t, snap))

    final = StateVector(psi, t0 + n_steps * cfg.dt)
    return TrajectoryResult(
        seed=int(seed),
        times=times,
        states=snapshots,
        final=final,
        max_leakage=float(leak),
        max_norm_drift=float(max_drift),
        payloads=payloads,
    )
