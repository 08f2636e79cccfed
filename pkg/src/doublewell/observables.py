"""State functionals: position densities, expectation values, Wigner functions.

Position-space quantities come from the Hermite-function expansion of the
Fock amplitudes,

    psi(x) = sum_n c_n phi_n(x),
    phi_0(x) = pi^(-1/4) exp(-x^2/2),
    phi_{n+1}(x) = sqrt(2/(n+1)) x phi_n(x) - sqrt(n/(n+1)) phi_{n-1}(x),

the eigenfunctions of the unit-frequency oscillator used as the basis
everywhere in this package.  The recurrence on the *normalized* functions
is numerically stable for the few hundred levels used here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridCoverageWarning, InvariantViolationError
from .operators import OperatorSet, hamiltonian_at

import warnings

# Relative imaginary residue above which an "expectation value" of a
# Hermitian operator is reported as an error instead of silently truncated.
IMAG_TOL = 1e-8


@dataclass(frozen=True)
class GridSpec:
    """Uniform position grid given by [x_min, x_max] split into `bins` cells."""

    x_min: float
    x_max: float
    bins: int

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise ValueError(f"empty grid: [{self.x_min}, {self.x_max}]")
        if self.bins < 1:
            raise ValueError(f"bins must be positive, got {self.bins}")

    @property
    def width(self) -> float:
        return (self.x_max - self.x_min) / self.bins

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.bins + 1)

    @property
    def centers(self) -> np.ndarray:
        return self.x_min + (np.arange(self.bins) + 0.5) * self.width


def default_grid(beta: float, bins: int = 256) -> GridSpec:
    """Grid covering both wells with room for the driven excursions."""
    half = 2.5 / beta
    return GridSpec(-half, half, bins)


def hermite_functions(x: np.ndarray, nmax: int) -> np.ndarray:
    """Normalized Hermite functions phi_0 .. phi_{nmax-1} evaluated at x.

    Returns an (nmax, len(x)) array; row n is phi_n.
    """
    x = np.asarray(x, dtype=float)
    phi = np.zeros((nmax, x.size))
    phi[0] = np.pi ** (-0.25) * np.exp(-0.5 * x**2)
    if nmax > 1:
        phi[1] = np.sqrt(2.0) * x * phi[0]
    for n in range(1, nmax - 1):
        phi[n + 1] = np.sqrt(2.0 / (n + 1)) * x * phi[n] - np.sqrt(
            n / (n + 1.0)
        ) * phi[n - 1]
    return phi


def wavefunction(amplitudes: np.ndarray, x: np.ndarray) -> np.ndarray:
    """psi(x) for a Fock-amplitude vector."""
    return hermite_functions(x, len(amplitudes)).T @ amplitudes


def position_density(amplitudes: np.ndarray, grid) -> np.ndarray:
    """|psi(x)|^2 at the grid's bin centers (or at raw points).

    When `grid` is a GridSpec the covered probability mass is estimated by
    the midpoint rule and a GridCoverageWarning is emitted if more than
    1e-6 of the state lies outside the grid.
    """
    if isinstance(grid, GridSpec):
        dens = np.abs(wavefunction(amplitudes, grid.centers)) ** 2
        norm = float(np.vdot(amplitudes, amplitudes).real)
        covered = float(np.sum(dens)) * grid.width
        missing = norm - covered
        if missing > 1e-6:
            warnings.warn(
                f"grid [{grid.x_min}, {grid.x_max}] misses ~{missing:.2e} of the "
                "state's probability mass; widen the grid or raise dim",
                GridCoverageWarning,
                stacklevel=2,
            )
        return dens
    return np.abs(wavefunction(amplitudes, np.asarray(grid, dtype=float))) ** 2


def position_density_from_rho(rho: np.ndarray, grid) -> np.ndarray:
    """Diagonal of a density matrix in position space, P(x) = <x|rho|x>."""
    x = grid.centers if isinstance(grid, GridSpec) else np.asarray(grid, dtype=float)
    phi = hermite_functions(x, rho.shape[0])
    # P(x) = sum_{mn} phi_m(x) rho_{mn} phi_n(x)
    return np.einsum("mx,mn,nx->x", phi, rho, phi).real


def _expect(amplitudes: np.ndarray, op: np.ndarray, name: str) -> float:
    num = complex(np.vdot(amplitudes, op @ amplitudes))
    scale = max(abs(num), 1.0)
    if abs(num.imag) > IMAG_TOL * scale:
        raise InvariantViolationError(
            f"<{name}> has imaginary residue {num.imag:.3e} (value {num:.6e})"
        )
    return num.real


def expectations(amplitudes: np.ndarray, ops: OperatorSet, t: float = 0.0) -> dict:
    """<Q>, <P>, <H(t)> and <n> for a normalized state vector.

    Each operator is Hermitian, so any imaginary part beyond roundoff
    (relative IMAG_TOL) raises InvariantViolationError rather than being
    dropped silently.
    """
    q = _expect(amplitudes, ops.q, "Q")
    p = _expect(amplitudes, ops.p, "P")
    energy = _expect(amplitudes, hamiltonian_at(ops, t), "H")
    # a^dag a = (Q^2 + P^2 - 1)/2, evaluated directly from the quadratures
    q2 = _expect(amplitudes, ops.q @ ops.q, "Q^2")
    p2 = _expect(amplitudes, ops.p @ ops.p, "P^2")
    norm2 = float(np.vdot(amplitudes, amplitudes).real)
    n = 0.5 * (q2 + p2 - norm2)
    return {"q": q, "p": p, "energy": energy, "n": n}


def truncation_leakage(amplitudes: np.ndarray, fraction: float = 0.1) -> float:
    """Probability mass in the top `fraction` of the Fock levels."""
    dim = len(amplitudes)
    cut = dim - max(1, int(np.ceil(fraction * dim)))
    return float(np.sum(np.abs(amplitudes[cut:]) ** 2))


@dataclass(frozen=True)
class WignerGrid:
    """Wigner function W(q, p) sampled on a rectangular grid.

    values[i, j] = W(q_axis[i], p_axis[j]).  With [Q, P] = i the
    normalization is integral W dq dp = 1 and the position marginal
    integral W dp recovers <q|rho|q>.
    """

    q_axis: np.ndarray
    p_axis: np.ndarray
    values: np.ndarray

    def minimum(self) -> float:
        return float(self.values.min())

    def position_marginal(self) -> np.ndarray:
        return np.trapezoid(self.values, self.p_axis, axis=1)

    def momentum_marginal(self) -> np.ndarray:
        return np.trapezoid(self.values, self.q_axis, axis=0)


def wigner(state: np.ndarray, q: np.ndarray, p: np.ndarray) -> WignerGrid:
    """Wigner function of a state vector or density matrix.

    Computed as the Fourier transform of the position-space coherence
    along anti-diagonals,

        W(q, p) = (1/pi) integral rho(q + y, q - y) exp(-2 i p y) dy,

    with rho(x, x') built from the Hermite-function expansion and the
    y-integral done by the trapezoid rule on a fine uniform grid.  For the
    smooth, rapidly decaying coherences of truncated Fock states this
    quadrature converges superalgebraically; the step is chosen well below
    the Nyquist limit of the largest requested |p|.

    q must be uniformly spaced.  Returns a WignerGrid with
    values[i, j] = W(q[i], p[j]).
    """
    state = np.asarray(state)
    if state.ndim == 1:
        rho = np.outer(state, state.conj())
    else:
        rho = state
    dim = rho.shape[0]

    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    if len(q) > 1:
        dq = np.diff(q)
        if not np.allclose(dq, dq[0], rtol=1e-12, atol=1e-12):
            raise ValueError("wigner requires a uniformly spaced q grid")
    coarsest = max(
        float(q[1] - q[0]) if len(q) > 1 else 0.0,
        float(np.max(np.diff(p))) if len(p) > 1 else 0.0,
    )
    if coarsest > 0.5:
        warnings.warn(
            f"Wigner grid spacing {coarsest:.3f} is too coarse to resolve "
            "oscillations at this scale; refine below 0.5",
            GridCoverageWarning,
            stacklevel=2,
        )

    # Support of the state: classical turning point of the highest occupied
    # level, padded; the coherence rho(q+y, q-y) vanishes once either
    # argument leaves the support.
    occ = np.abs(np.diag(rho))
    occ_sum = np.cumsum(occ[::-1])[::-1]
    n_hi = int(np.nonzero(occ_sum > 1e-12)[0].max()) if occ_sum[0] > 0 else 0
    x_max = np.sqrt(2.0 * n_hi + 1.0) + 5.0

    # Fine master grid: q points must lie on it exactly, so the step is an
    # integer refinement of the q spacing, capped by the Nyquist criterion.
    p_max = max(1.0, float(np.max(np.abs(p))))
    h_target = min(0.25 * np.pi / (2.0 * p_max), 0.05)
    if len(q) > 1:
        base = float(q[1] - q[0])
        refine = max(1, int(np.ceil(base / h_target)))
        h = base / refine
    else:
        h = h_target
    n_y = int(np.ceil(x_max / h))
    y = np.arange(-n_y, n_y + 1) * h

    # x values needed: q_i +/- y_k; build one master axis covering them all.
    x_lo = q.min() - n_y * h
    n_x = int(round((q.max() - q.min()) / h)) + 2 * n_y + 1
    x_axis = x_lo + np.arange(n_x) * h
    phi = hermite_functions(x_axis, dim)

    # Coherence on anti-diagonals: A[i, k] = rho(q_i + y_k, q_i - y_k)
    q_idx = np.round((q - x_lo) / h).astype(int)
    k_idx = np.arange(-n_y, n_y + 1)
    ip = q_idx[:, None] + k_idx[None, :]
    im = q_idx[:, None] - k_idx[None, :]
    if state.ndim == 1:
        psi_x = phi.T @ state
        a = psi_x[ip] * psi_x[im].conj()
    else:
        plus = phi[:, ip]                            # (dim, nq, ny)
        minus = phi[:, im]
        a = np.einsum("mik,mn,nik->ik", plus, rho, minus, optimize=True)

    kernel = np.exp(-2j * np.outer(p, y))            # (np, ny)
    values = (h / np.pi) * (a @ kernel.T).real
    return WignerGrid(q_axis=q, p_axis=p, values=values)
