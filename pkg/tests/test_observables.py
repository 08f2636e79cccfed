"""Tests for position-space observables, expectations and the Wigner transform."""

from dataclasses import replace

import numpy as np
import pytest
from scipy.linalg import expm

from doublewell.errors import GridCoverageWarning, InvariantViolationError
from doublewell.observables import (
    GridSpec,
    default_grid,
    expectations,
    hermite_functions,
    position_density,
    position_density_from_rho,
    truncation_leakage,
    wavefunction,
    wigner,
)
from doublewell.operators import build_ladder, harmonic_operator_set
from doublewell.qsd import coherent_state


def fock(dim, n):
    psi = np.zeros(dim, dtype=np.complex128)
    psi[n] = 1.0
    return psi


# ---------------------------------------------------------------------------
# Hermite functions


def test_hermite_functions_match_closed_forms():
    x = np.linspace(-4.0, 4.0, 201)
    phi = hermite_functions(x, 3)
    gauss = np.pi ** (-0.25) * np.exp(-0.5 * x**2)
    assert np.allclose(phi[0], gauss, atol=1e-14)
    assert np.allclose(phi[1], np.sqrt(2.0) * x * gauss, atol=1e-14)
    assert np.allclose(phi[2], (2.0 * x**2 - 1.0) / np.sqrt(2.0) * gauss, atol=1e-13)


def test_hermite_functions_are_normalized():
    x = np.linspace(-25.0, 25.0, 5001)
    w = x[1] - x[0]
    phi = hermite_functions(x, 101)
    for n in (0, 1, 5, 32, 100):
        assert np.sum(phi[n] ** 2) * w == pytest.approx(1.0, abs=1e-8)


def test_hermite_recurrence_is_stable_to_n_512():
    # classical turning point of n=511 is sqrt(2*511+1) ~ 32; the grid must
    # reach past it for the Gram matrix to come out orthonormal
    x = np.linspace(-40.0, 40.0, 8001)
    w = x[1] - x[0]
    phi = hermite_functions(x, 512)
    assert np.all(np.isfinite(phi))
    gram = phi @ phi.T * w
    assert np.max(np.abs(gram - np.eye(512))) < 1e-6


# ---------------------------------------------------------------------------
# Wavefunctions and position densities


def test_coherent_state_wavefunction_is_displaced_gaussian():
    q0, p0 = 1.2, 0.7
    x = np.linspace(-5.0, 6.0, 301)
    dens = np.abs(wavefunction(coherent_state(64, q0, p0), x)) ** 2
    exact = np.pi ** (-0.5) * np.exp(-((x - q0) ** 2))
    assert np.allclose(dens, exact, atol=1e-6)


def test_position_density_gridspec_matches_raw_points():
    psi = coherent_state(32, 0.8)
    grid = GridSpec(-5.0, 5.0, 64)
    assert np.array_equal(position_density(psi, grid), position_density(psi, grid.centers))


def test_position_density_warns_when_grid_misses_mass():
    psi = coherent_state(32, 3.0)
    with pytest.warns(GridCoverageWarning, match="misses"):
        position_density(psi, GridSpec(-1.0, 1.0, 32))


def test_position_density_from_rho_pure_and_mixed():
    grid = GridSpec(-5.0, 5.0, 128)
    psi_a = coherent_state(32, 1.0)
    psi_b = coherent_state(32, -1.0, 0.5)
    dens_a = position_density(psi_a, grid)
    dens_b = position_density(psi_b, grid)

    pure = position_density_from_rho(np.outer(psi_a, psi_a.conj()), grid)
    assert np.allclose(pure, dens_a, atol=1e-13)

    rho_mix = 0.5 * np.outer(psi_a, psi_a.conj()) + 0.5 * np.outer(psi_b, psi_b.conj())
    mixed = position_density_from_rho(rho_mix, grid)
    assert np.allclose(mixed, 0.5 * dens_a + 0.5 * dens_b, atol=1e-13)


def test_default_grid_spans_both_wells():
    grid = default_grid(0.3)
    assert grid.x_min == pytest.approx(-2.5 / 0.3)
    assert grid.x_max == pytest.approx(2.5 / 0.3)
    assert grid.bins == 256
    # well minima at +-1/beta lie well inside
    assert grid.x_min < -1 / 0.3 < 1 / 0.3 < grid.x_max


# ---------------------------------------------------------------------------
# Expectation values


def test_expectations_match_displacement_operator_oracle():
    dim = 48
    q0, p0 = 1.1, -0.6
    alpha = (q0 + 1j * p0) / np.sqrt(2.0)
    a, adag = build_ladder(dim)
    displaced = expm(alpha * adag - np.conj(alpha) * a) @ fock(dim, 0)

    assert np.allclose(coherent_state(dim, q0, p0), displaced, atol=1e-12)

    ops = harmonic_operator_set(dim, gamma=0.0)
    ex = expectations(displaced, ops)
    assert ex["q"] == pytest.approx(q0, abs=1e-10)
    assert ex["p"] == pytest.approx(p0, abs=1e-10)
    assert ex["n"] == pytest.approx(abs(alpha) ** 2, abs=1e-10)
    # harmonic energy of a coherent state: |alpha|^2 + 1/2
    assert ex["energy"] == pytest.approx(abs(alpha) ** 2 + 0.5, abs=1e-10)


def test_expectations_reject_non_hermitian_operator():
    dim = 16
    ops = harmonic_operator_set(dim, gamma=0.0)
    a, _ = build_ladder(dim)
    broken = replace(ops, q=a)  # <a> is complex for a displaced state
    with pytest.raises(InvariantViolationError, match="imaginary"):
        expectations(coherent_state(dim, 1.0, 1.0), broken)


def test_truncation_leakage_counts_top_levels():
    psi = fock(10, 9)
    assert truncation_leakage(psi) == pytest.approx(1.0)
    assert truncation_leakage(fock(10, 0)) == 0.0
    # fraction 0.2 of 10 levels -> top two
    mixed = np.zeros(10, dtype=np.complex128)
    mixed[7] = np.sqrt(0.5)
    mixed[8] = np.sqrt(0.3)
    mixed[9] = np.sqrt(0.2)
    assert truncation_leakage(mixed, fraction=0.2) == pytest.approx(0.5)


# ---------------------------------------------------------------------------
# Wigner transform


def axes(half=4.0, n=81):
    return np.linspace(-half, half, n)


def test_wigner_vacuum_is_positive_gaussian():
    w = wigner(fock(16, 0), axes(), axes())
    i0 = len(w.q_axis) // 2
    assert w.q_axis[i0] == 0.0
    assert w.values[i0, i0] == pytest.approx(1.0 / np.pi, abs=1e-9)
    assert w.minimum() > -1e-9


def test_wigner_fock1_negative_at_origin():
    w = wigner(fock(16, 1), axes(), axes())
    i0 = len(w.q_axis) // 2
    assert w.values[i0, i0] == pytest.approx(-1.0 / np.pi, abs=1e-6)


def test_wigner_normalization_and_position_marginal():
    psi = coherent_state(32, 1.3, 0.4)
    q = axes(6.0, 121)
    p = axes(6.0, 121)
    w = wigner(psi, q, p)
    total = np.trapezoid(np.trapezoid(w.values, p, axis=1), q)
    assert total == pytest.approx(1.0, abs=1e-3)
    marg = w.position_marginal()
    exact = np.abs(wavefunction(psi, q)) ** 2
    l1 = np.trapezoid(np.abs(marg - exact), q)
    assert l1 < 1e-3


def test_wigner_peak_sits_at_phase_space_displacement():
    q0, p0 = 1.5, -1.0
    w = wigner(coherent_state(48, q0, p0), axes(4.0, 81), axes(4.0, 81))
    i, j = np.unravel_index(np.argmax(w.values), w.values.shape)
    assert w.q_axis[i] == pytest.approx(q0, abs=0.1)
    assert w.p_axis[j] == pytest.approx(p0, abs=0.1)


def test_wigner_is_linear_in_the_density_matrix():
    q = axes(4.0, 41)
    p = axes(4.0, 41)
    psi0, psi1 = fock(12, 0), fock(12, 1)
    rho = 0.5 * np.outer(psi0, psi0.conj()) + 0.5 * np.outer(psi1, psi1.conj())
    w_mix = wigner(rho, q, p)
    w_sum = 0.5 * wigner(psi0, q, p).values + 0.5 * wigner(psi1, q, p).values
    assert np.allclose(w_mix.values, w_sum, atol=1e-12)


def test_wigner_rejects_nonuniform_q():
    q = np.array([0.0, 0.1, 0.3])
    with pytest.raises(ValueError, match="uniformly spaced"):
        wigner(fock(8, 0), q, axes(2.0, 11))


def test_wigner_warns_on_coarse_grid():
    with pytest.warns(GridCoverageWarning, match="coarse"):
        wigner(fock(8, 0), np.linspace(-4, 4, 9), np.linspace(-4, 4, 9))
