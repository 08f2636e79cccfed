"""Deterministic master-equation oracle.

Evolves the density matrix under the Lindblad equation

    drho/dt = -i [H(t), rho] + sum_j ( L_j rho L_j^dag - {L_j^dag L_j, rho} / 2 )

with a dense fixed-step RK4 integrator.  This is the reference the
stochastic unravelling must average to: trajectory ensembles are compared
against it in trace distance.  Dense evolution scales as dim^3 per step,
so it is capped at modest dimensions and meant for validation, not
production sweeps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import OracleFailureError
from .operators import OperatorSet

# Dense RK4 on dim^2 matrix entries gets slow and memory-heavy fast;
# validation runs stay at or below this size.
ORACLE_DIM_CAP = 64


@dataclass
class MasterState:
    rho: np.ndarray
    t: float = 0.0


def lindblad_rhs(rho: np.ndarray, ops: OperatorSet, t: float) -> np.ndarray:
    """Right-hand side of the master equation at time t."""
    h = ops.h_sys + ops.h_damp
    if ops.drive_amplitude != 0.0:
        h = h - (ops.drive_amplitude * np.cos(ops.drive_frequency * t)) * ops.q
    out = -1j * (h @ rho - rho @ h)
    for l_op in (ops.l_relax, ops.l_pump):
        if not np.any(l_op):
            continue
        l_rho = l_op @ rho
        ldag_l = l_op.conj().T @ l_op
        out += l_rho @ l_op.conj().T - 0.5 * (ldag_l @ rho + rho @ ldag_l)
    return out


def _check_rho(rho: np.ndarray, t: float, trace_tol: float, eig_tol: float) -> dict:
    if not np.isfinite(rho).all():
        raise OracleFailureError(f"master state became non-finite at t = {t:.4f}")
    tr = complex(np.trace(rho))
    trace_err = abs(tr.real - 1.0) + abs(tr.imag)
    herm = float(np.linalg.norm(rho - rho.conj().T))
    min_eig = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min())
    if trace_err > trace_tol:
        raise OracleFailureError(f"master trace off by {trace_err:.2e} at t = {t:.4f}")
    if herm > 1e-10 * max(float(np.linalg.norm(rho)), 1e-300):
        raise OracleFailureError(f"master state lost Hermiticity at t = {t:.4f}")
    if min_eig < -eig_tol:
        raise OracleFailureError(
            f"master state has eigenvalue {min_eig:.2e} at t = {t:.4f}"
        )
    return {"trace_error": trace_err, "hermiticity": herm, "min_eigenvalue": min_eig}


def evolve_master(
    rho0,
    ops: OperatorSet,
    dt: float,
    t_end: float,
    observer=None,
    observe_at=(),
    check_every: int = 500,
    trace_tol: float = 1e-8,
    eig_tol: float = 1e-6,
    dim_cap: int = ORACLE_DIM_CAP,
) -> MasterState:
    """Integrate the master equation from rho0 (a MasterState or matrix).

    `observe_at` lists step counts at which observer(t, rho.copy()) is
    invoked, e.g. to average rho over a sampling window.  Trace,
    Hermiticity and positivity are checked every check_every steps and at
    the end; violations raise OracleFailureError since the oracle has no
    business drifting off the physical manifold.
    """
    if isinstance(rho0, MasterState):
        rho, t0 = rho0.rho, rho0.t
    else:
        rho, t0 = rho0, 0.0
    rho = np.array(rho, dtype=np.complex128, copy=True)
    if rho.shape[0] > dim_cap:
        raise ValueError(
            f"oracle is limited to dim <= {dim_cap}, got {rho.shape[0]}; "
            "use trajectory ensembles for larger spaces"
        )
    n_steps = int(round((t_end - t0) / dt))
    observe_at = np.asarray(sorted(observe_at), dtype=np.int64)
    ptr = 0
    while ptr < len(observe_at) and observe_at[ptr] == 0:
        if observer is not None:
            observer(t0, rho.copy())
        ptr += 1

    for k in range(n_steps):
        t = t0 + k * dt
        k1 = lindblad_rhs(rho, ops, t)
        k2 = lindblad_rhs(rho + 0.5 * dt * k1, ops, t + 0.5 * dt)
        k3 = lindblad_rhs(rho + 0.5 * dt * k2, ops, t + 0.5 * dt)
        k4 = lindblad_rhs(rho + dt * k3, ops, t + dt)
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if (k + 1) % check_every == 0:
            _check_rho(rho, t + dt, trace_tol, eig_tol)
        while ptr < len(observe_at) and observe_at[ptr] == k + 1:
            if observer is not None:
                observer(t0 + (k + 1) * dt, rho.copy())
            ptr += 1

    _check_rho(rho, t0 + n_steps * dt, trace_tol, eig_tol)
    return MasterState(rho=rho, t=t0 + n_steps * dt)


def trace_distance(rho_a: np.ndarray, rho_b: np.ndarray) -> float:
    """T(a, b) = ||a - b||_1 / 2, via the eigenvalues of the Hermitian difference."""
    diff = rho_a - rho_b
    diff = 0.5 * (diff + diff.conj().T)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(diff))))
