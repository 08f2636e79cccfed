"""Stochastic integrator: noise statistics, convergence, determinism."""

import warnings

import numpy as np
import pytest

from doublewell.errors import IntegratorBlowupError, LeakageWarning
from doublewell.observables import expectations
from doublewell.operators import PhysicsParams, build_operator_set, harmonic_operator_set
from doublewell.qsd import (
    IntegratorConfig,
    NoiseStream,
    StateVector,
    coherent_state,
    default_initial_state,
    qsd_step,
    run_trajectory,
    sample_step_indices,
    trajectory_seed,
)


def short_config(t_end, dt=1e-3):
    """Integrate [0, t_end] with no sampling window."""
    return IntegratorConfig(dt=dt, t_transient=t_end, t_sample_window=0.0)


# ----------------------------------------------------------------- noise


def test_noise_moments():
    """E[dxi] = 0, E[dxi^2] = 0, E[|dxi|^2] = dt, channels independent."""
    n, dt = 100_000, 1e-3
    xi = NoiseStream(2024).increments(n, dt)
    assert xi.shape == (n, 2)

    se_component = np.sqrt(dt / 2.0 / n)  # std of the mean of one component
    for j in range(2):
        mean = xi[:, j].mean()
        assert abs(mean.real) < 5 * se_component
        assert abs(mean.imag) < 5 * se_component
        # E[dxi^2] = 0 separates complex from real Wiener noise
        sq = (xi[:, j] ** 2).mean()
        assert abs(sq) < 5 * dt / np.sqrt(n)
        ratio = (np.abs(xi[:, j]) ** 2).mean() / dt
        assert abs(ratio - 1.0) < 0.02
    cross = np.mean(xi[:, 0] * xi[:, 1].conj())
    assert abs(cross) < 5 * dt / np.sqrt(n)


def test_noise_stream_reproducible():
    a = NoiseStream(7).increments(100, 1e-3)
    b = NoiseStream(7).increments(100, 1e-3)
    c = NoiseStream(8).increments(100, 1e-3)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_trajectory_seeds_distinct_and_stable():
    seeds = [trajectory_seed(12345, i) for i in range(200)]
    assert len(set(seeds)) == 200
    assert seeds[:3] == [trajectory_seed(12345, i) for i in range(3)]
    assert all(0 <= s < 2**64 for s in seeds)
    assert trajectory_seed(12346, 0) != seeds[0]


# ----------------------------------------------------------- window layout


def test_sample_step_indices_midpoints():
    cfg = IntegratorConfig(dt=1e-3, t_transient=40 * np.pi, t_sample_window=4 * np.pi)
    idx = sample_step_indices(cfg, 64)
    assert idx.shape == (64,)
    assert np.all(np.diff(idx) > 0)
    delta = cfg.t_sample_window / 64
    targets = cfg.t_transient + (np.arange(64) + 0.5) * delta
    assert np.max(np.abs(idx * cfg.dt - targets)) <= 0.5 * cfg.dt
    assert idx[0] * cfg.dt > cfg.t_transient
    assert idx[-1] <= cfg.n_steps
    assert sample_step_indices(cfg, 0).size == 0


def test_integrator_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(dt=0.0)
    with pytest.raises(ValueError):
        IntegratorConfig(dt=1e-3, t_transient=-1.0)
    cfg = IntegratorConfig.for_drive(2.0, transient_periods=10, window_periods=2)
    assert cfg.t_transient == pytest.approx(10 * np.pi)
    assert cfg.t_sample_window == pytest.approx(2 * np.pi)
    assert cfg.n_steps == round(cfg.total_time / cfg.dt)


# ----------------------------------------------------------- single steps


def test_coherent_state_properties():
    amps = coherent_state(64, 1.5)
    assert np.linalg.norm(amps) == pytest.approx(1.0, abs=1e-12)
    ops = harmonic_operator_set(64, gamma=0.0)
    ex = expectations(amps, ops)
    assert ex["q"] == pytest.approx(1.5, abs=1e-10)
    assert ex["p"] == pytest.approx(0.0, abs=1e-10)
    assert ex["n"] == pytest.approx(1.5**2 / 2.0, abs=1e-9)
    vac = coherent_state(8, 0.0)
    assert vac[0] == 1.0 and not np.any(vac[1:])


def test_unitary_limit_norm_error():
    """gamma = 0: the exact propagator is unitary; only the Euler drive
    term moves the norm, at second order in dt."""
    p = PhysicsParams(beta=1.0, gamma=0.0, g=0.0)
    ops = build_operator_set(p, 24)
    state = default_initial_state(p, 24)
    out = qsd_step(state, ops, 1e-3, (0.0, 0.0), renormalize=False)
    assert abs(out.norm() - 1.0) < 1e-12

    driven = build_operator_set(PhysicsParams(beta=1.0, gamma=0.0, g=0.3), 24)
    errs = []
    for dt in (1e-3, 5e-4):
        out = qsd_step(state, driven, dt, (0.0, 0.0), renormalize=False)
        errs.append(abs(out.norm() - 1.0))
    assert errs[0] < 1e-5
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.3)


def test_ground_state_is_stationary():
    """|0> is a fixed point of the damped harmonic oscillator: L|0> = 0
    kills drift and noise, H only rotates the phase."""
    ops = harmonic_operator_set(16, gamma=0.3)
    amps = np.zeros(16, dtype=complex)
    amps[0] = 1.0
    state = StateVector(amps, 0.0)
    noise = NoiseStream(5).increments(100, 1e-3)
    for k in range(100):
        state = qsd_step(state, ops, 1e-3, noise[k])
    assert abs(abs(state.amplitudes[0]) - 1.0) < 1e-12
    assert np.max(np.abs(state.amplitudes[1:])) < 1e-12


def test_blowup_raises():
    ops = harmonic_operator_set(8, gamma=0.1)
    bad = StateVector(np.full(8, np.nan, dtype=complex), 0.0)
    with pytest.raises(IntegratorBlowupError):
        qsd_step(bad, ops, 1e-3, (0.0, 0.0))
    with pytest.raises(IntegratorBlowupError) as err:
        run_trajectory(ops, short_config(0.1), bad, seed=3, n_samples=0)
    assert err.value.seed == 3
    assert err.value.time is not None


# ----------------------------------------------------- trajectory runner


@pytest.mark.filterwarnings("ignore::doublewell.errors.LeakageWarning")
def test_kernel_matches_reference_step():
    """The compiled loop and the plain-numpy step agree to roundoff."""
    p = PhysicsParams(beta=1.0, gamma=0.3, nbar=0.7)
    ops = build_operator_set(p, 24)
    cfg = short_config(0.2)
    n_steps = cfg.n_steps
    seed = 99

    res = run_trajectory(ops, cfg, default_initial_state(p, 24), seed, n_samples=0)

    noise = NoiseStream(seed).increments(n_steps, cfg.dt)
    state = default_initial_state(p, 24)
    for k in range(n_steps):
        state = qsd_step(state, ops, cfg.dt, noise[k])
    assert res.final.time == pytest.approx(state.time)
    assert np.max(np.abs(res.final.amplitudes - state.amplitudes)) < 1e-13


def test_trajectory_bit_identical_rerun():
    p = PhysicsParams(beta=1.0, gamma=0.3)
    ops = build_operator_set(p, 48)
    cfg = IntegratorConfig(dt=1e-3, t_transient=0.5, t_sample_window=0.5)
    a = run_trajectory(ops, cfg, default_initial_state(p, 48), seed=42, n_samples=8)
    b = run_trajectory(ops, cfg, default_initial_state(p, 48), seed=42, n_samples=8)
    assert np.array_equal(a.states, b.states)
    assert np.array_equal(a.final.amplitudes, b.final.amplitudes)
    assert a.max_norm_drift == b.max_norm_drift
    c = run_trajectory(ops, cfg, default_initial_state(p, 48), seed=43, n_samples=8)
    assert not np.array_equal(a.final.amplitudes, c.final.amplitudes)


def test_sampled_states_are_normalized():
    p = PhysicsParams(beta=1.0, gamma=0.3)
    ops = build_operator_set(p, 64)
    cfg = IntegratorConfig(dt=1e-3, t_transient=0.5, t_sample_window=0.5)
    res = run_trajectory(ops, cfg, default_initial_state(p, 64), seed=1, n_samples=8)
    norms = np.linalg.norm(res.states, axis=1)
    assert np.max(np.abs(norms - 1.0)) < 1e-9
    assert res.final.norm() == pytest.approx(1.0, abs=1e-9)
    assert res.times.shape == (8,)
    assert np.all(res.times > cfg.t_transient)
    assert res.max_leakage < 1e-6
    assert res.max_norm_drift < 1e-2


def test_norm_drift_visible_without_renormalization():
    p = PhysicsParams(beta=1.0, gamma=0.3)
    ops = build_operator_set(p, 48)
    cfg = IntegratorConfig(
        dt=1e-3, t_transient=0.5, t_sample_window=0.0, renormalize_every_step=False
    )
    res = run_trajectory(ops, cfg, default_initial_state(p, 48), seed=4, n_samples=0)
    # the raw discrete update wanders off the unit sphere measurably
    assert res.max_norm_drift > 1e-4
    assert abs(res.final.norm() - 1.0) == pytest.approx(res.max_norm_drift, rel=10)


@pytest.mark.filterwarnings("ignore::doublewell.errors.LeakageWarning")
def test_deterministic_limit_first_order_in_dt():
    """gamma = 0 removes all noise; the drive's Euler term makes the scheme
    first order, halving dt must halve the error."""
    p = PhysicsParams(beta=1.0, gamma=0.0, g=0.3)
    ops = build_operator_set(p, 64)
    t_end = 2.0

    def schroedinger_rk4(dt):
        from doublewell.operators import hamiltonian_at

        psi = default_initial_state(p, 64).amplitudes.copy()
        n = int(round(t_end / dt))

        def rhs(psi, t):
            return -1j * (hamiltonian_at(ops, t) @ psi)

        for k in range(n):
            t = k * dt
            k1 = rhs(psi, t)
            k2 = rhs(psi + 0.5 * dt * k1, t + 0.5 * dt)
            k3 = rhs(psi + 0.5 * dt * k2, t + 0.5 * dt)
            k4 = rhs(psi + dt * k3, t + dt)
            psi = psi + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        return psi

    ref = schroedinger_rk4(2e-4)
    errs = []
    for dt in (1e-3, 5e-4):
        res = run_trajectory(
            ops, short_config(t_end, dt=dt), default_initial_state(p, 64), seed=0, n_samples=0
        )
        out = res.final.amplitudes
        # global phase is irrelevant
        phase = np.vdot(ref, out)
        phase /= abs(phase)
        errs.append(np.linalg.norm(out - phase * ref))
    assert errs[0] < 5e-3
    assert errs[0] / errs[1] == pytest.approx(2.0, rel=0.5)


def test_harmonic_relaxation_short():
    """<n>(t) of the damped oscillator relaxes as exp(-2 gamma t)."""
    gamma, t_end, m = 0.1, 1.0, 400
    ops = harmonic_operator_set(12, gamma=gamma)
    amps = np.zeros(12, dtype=complex)
    amps[1] = 1.0  # |1>: n(0) = 1
    cfg = short_config(t_end)
    ns = np.empty(m)
    for i in range(m):
        res = run_trajectory(ops, cfg, StateVector(amps, 0.0), trajectory_seed(31, i), n_samples=0)
        ns[i] = expectations(res.final.amplitudes, ops)["n"]
    expected = np.exp(-2.0 * gamma * t_end)
    se = ns.std(ddof=1) / np.sqrt(m)
    assert abs(ns.mean() - expected) < 4 * se


def test_leakage_warning_on_tiny_basis():
    p = PhysicsParams(beta=1.0, gamma=0.3, g=0.3)
    ops = build_operator_set(p, 8)
    with pytest.warns(LeakageWarning):
        run_trajectory(ops, short_config(2.0), default_initial_state(p, 8), seed=2, n_samples=0)


def test_dimension_mismatch_rejected():
    ops = harmonic_operator_set(8, gamma=0.1)
    with pytest.raises(ValueError):
        run_trajectory(ops, short_config(0.01), StateVector(np.ones(4, dtype=complex)), seed=0)


def test_samplers_collect_payloads():
    p = PhysicsParams(beta=1.0, gamma=0.3)
    ops = build_operator_set(p, 48)
    cfg = IntegratorConfig(dt=1e-3, t_transient=0.2, t_sample_window=0.2)
    seen = []
    res = run_trajectory(
        ops,
        cfg,
        default_initial_state(p, 48),
        seed=6,
        n_samples=4,
        samplers=(lambda t, amps: seen.append(t) or float(np.abs(amps[0])),),
    )
    assert len(res.payloads) == 1
    assert len(res.payloads[0]) == 4
    assert seen == sorted(seen)
    assert np.allclose(seen, res.times)
