"""Fock-space operators for the driven, damped double-well Duffing oscillator.

Everything is built in the number basis of a unit-frequency harmonic
oscillator, truncated at ``dim`` levels.  With ``a``/``a^dag`` the ladder
operators, the quadratures are

    Q = (a + a^dag) / sqrt(2),      P = -i (a - a^dag) / sqrt(2),

and the dimensionless model is

    H_sys   = P^2/2 + (beta^2/4) Q^4 -/+ Q^2/2       (- for the double well)
    H_damp  = (Gamma/2) (QP + PQ)
    H_drive = -(g/beta) Q cos(Omega t)
    L_relax = sqrt(Gamma (1 + nbar)) (Q + iP)
    L_pump  = sqrt(Gamma nbar) (Q - iP)

``beta`` is the quantumness parameter: the well minima sit at +-1/beta, so
small beta pushes the wells far apart (nearly classical) while beta ~ 1
keeps the whole double well within a few quanta.

``H_damp`` is the symmetrized position-momentum cross term that appears
when the damped oscillator is quantized; it is kept separate from
``H_sys`` so tests can switch it off.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

WELL_SIGNS = ("double_well", "single_well")


@dataclass(frozen=True)
class PhysicsParams:
    """Dimensionless physical parameters of the oscillator.

    beta      quantumness / well-separation parameter (> 0)
    gamma     damping rate (>= 0)
    g         driving strength; the drive enters as -(g/beta) Q cos(Omega t)
    omega     driving frequency
    nbar      mean thermal occupation of the bath (>= 0)
    well_sign 'double_well' (-Q^2/2) or 'single_well' (+Q^2/2)
    """

    beta: float
    gamma: float
    g: float = 0.3
    omega: float = 1.0
    nbar: float = 0.0
    well_sign: str = "double_well"

    def __post_init__(self):
        if not self.beta > 0:
            raise ConfigError(f"beta must be positive, got {self.beta}", key="beta")
        if self.gamma < 0:
            raise ConfigError(f"gamma must be non-negative, got {self.gamma}", key="gamma")
        if self.nbar < 0:
            raise ConfigError(f"nbar must be non-negative, got {self.nbar}", key="nbar")
        if not self.omega > 0:
            raise ConfigError(f"omega must be positive, got {self.omega}", key="omega")
        if self.well_sign not in WELL_SIGNS:
            raise ConfigError(
                f"well_sign must be one of {WELL_SIGNS}, got {self.well_sign!r}",
                key="well_sign",
            )

    @property
    def drive_period(self) -> float:
        return 2.0 * np.pi / self.omega

    @property
    def well_minimum(self) -> float:
        """Position of the right-hand well minimum (0 for a single well)."""
        return 1.0 / self.beta if self.well_sign == "double_well" else 0.0


def build_ladder(dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Return (a, a^dag) as dense complex matrices on a dim-level Fock space."""
    if dim < 2:
        raise ConfigError(f"dim must be at least 2, got {dim}", key="dim")
    a = np.diag(np.sqrt(np.arange(1, dim)), k=1).astype(np.complex128)
    return a, a.conj().T


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class OperatorSet:
    """Immutable bundle of the matrices one simulation needs.

    All arrays are read-only, so a single OperatorSet can be shared by any
    number of concurrently running trajectories.  ``h_sys`` and ``h_damp``
    are the static Hamiltonian pieces; the time dependence lives entirely
    in the drive, handled by :func:`hamiltonian_at`.
    """

    dim: int
    q: np.ndarray
    p: np.ndarray
    h_sys: np.ndarray
    h_damp: np.ndarray
    l_relax: np.ndarray
    l_pump: np.ndarray
    drive_amplitude: float  # coefficient of -Q cos(Omega t) in the Hamiltonian
    drive_frequency: float
    params: PhysicsParams | None = field(default=None)

    @property
    def h_static(self) -> np.ndarray:
        return self.h_sys + self.h_damp

    @property
    def lindblad_ops(self) -> tuple[np.ndarray, ...]:
        """The collapse operators that are not identically zero."""
        ops = [self.l_relax]
        if np.any(self.l_pump):
            ops.append(self.l_pump)
        return tuple(ops)


def build_operator_set(params: PhysicsParams, dim: int) -> OperatorSet:
    """Construct all operators for the given parameters on a dim-level space."""
    a, adag = build_ladder(dim)
    q = (a + adag) / np.sqrt(2.0)
    p = -1j * (a - adag) / np.sqrt(2.0)

    q2 = q @ q
    quad_sign = -1.0 if params.well_sign == "double_well" else 1.0
    h_sys = p @ p / 2.0 + (params.beta**2 / 4.0) * (q2 @ q2) + quad_sign * q2 / 2.0
    h_damp = (params.gamma / 2.0) * (q @ p + p @ q)

    l_relax = np.sqrt(params.gamma * (1.0 + params.nbar)) * (q + 1j * p)
    if params.nbar > 0:
        l_pump = np.sqrt(params.gamma * params.nbar) * (q - 1j * p)
    else:
        l_pump = np.zeros_like(q)

    return OperatorSet(
        dim=dim,
        q=_freeze(q),
        p=_freeze(p),
        h_sys=_freeze(h_sys),
        h_damp=_freeze(h_damp),
        l_relax=_freeze(l_relax),
        l_pump=_freeze(l_pump),
        drive_amplitude=params.g / params.beta,
        drive_frequency=params.omega,
        params=params,
    )


def harmonic_operator_set(dim: int, gamma: float, nbar: float = 0.0) -> OperatorSet:
    """Operator set for a plain damped harmonic oscillator, H = (P^2 + Q^2)/2.

    Test hook: with H_damp and the drive absent, the ensemble mean
    occupation obeys the closed-form relaxation law

        <n>(t) = n(0) exp(-2 Gamma t) + nbar (1 - exp(-2 Gamma t)),

    which pins down the rate and noise conventions exactly.
    """
    a, adag = build_ladder(dim)
    q = (a + adag) / np.sqrt(2.0)
    p = -1j * (a - adag) / np.sqrt(2.0)
    h_sys = (p @ p + q @ q) / 2.0
    l_relax = np.sqrt(gamma * (1.0 + nbar)) * (q + 1j * p)
    l_pump = np.sqrt(gamma * nbar) * (q - 1j * p) if nbar > 0 else np.zeros_like(q)
    return OperatorSet(
        dim=dim,
        q=_freeze(q),
        p=_freeze(p),
        h_sys=_freeze(h_sys),
        h_damp=_freeze(np.zeros_like(q)),
        l_relax=_freeze(l_relax),
        l_pump=_freeze(l_pump),
        drive_amplitude=0.0,
        drive_frequency=1.0,
        params=None,
    )


def hamiltonian_at(ops: OperatorSet, t: float) -> np.ndarray:
    """Full Hamiltonian H_sys + H_damp - A cos(Omega t) Q at time t."""
    h = ops.h_sys + ops.h_damp
    if ops.drive_amplitude != 0.0:
        h = h - (ops.drive_amplitude * np.cos(ops.drive_frequency * t)) * ops.q
    return h


def classical_potential(x, params: PhysicsParams):
    """Potential V(x) = (beta^2/4) x^4 -/+ x^2/2 of the classical limit."""
    x = np.asarray(x, dtype=float)
    quad_sign = -1.0 if params.well_sign == "double_well" else 1.0
    return (params.beta**2 / 4.0) * x**4 + quad_sign * x**2 / 2.0
