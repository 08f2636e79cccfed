"""Compiled inner loop of the stochastic integrator.

One step applies the exact flow of the stiff constant linear part through
a precomputed matrix exponential (a dense matrix-vector product), and the
remaining non-stiff pieces -- drive, expectation-dependent drift, noise --
explicitly.  The collapse and drive operators are banded in the Fock
basis, so those products cost O(dim).

The whole trajectory loop runs inside one contiguous numba call; fastmath
stays off so floating-point evaluation order is fixed and repeated runs
with the same seed are bit-identical.
"""

from __future__ import annotations

import numpy as np
from numba import njit


def bands_from_dense(m: np.ndarray) -> tuple[np.ndarray, int]:
    """Banded storage of a dense matrix: bands[o + bw, i] = m[i, i + o].

    The bandwidth is detected from the exact nonzero pattern; entries that
    would fall outside the matrix stay zero.
    """
    m = np.ascontiguousarray(m, dtype=np.complex128)
    dim = m.shape[0]
    rows, cols = np.nonzero(m)
    bw = int(np.max(np.abs(rows - cols))) if rows.size else 0
    bands = np.zeros((2 * bw + 1, dim), dtype=np.complex128)
    for o in range(-bw, bw + 1):
        d = np.diagonal(m, offset=o)
        if o >= 0:
            bands[o + bw, : dim - o] = d
        else:
            bands[o + bw, -o:] = d
    return bands, bw


@njit(cache=True)
def _band_mv(bands, bw, psi, out):
    dim = psi.shape[0]
    for i in range(dim):
        acc = 0.0 + 0.0j
        lo = -bw if i >= bw else -i
        hi = bw if i + bw < dim else dim - 1 - i
        for o in range(lo, hi + 1):
            acc += bands[o + bw, i] * psi[i + o]
        out[i] = acc


@njit(cache=True)
def _dense_mv(m, psi, out):
    # Four independent accumulators per row: keeps IEEE evaluation order
    # fixed while letting the FMA units pipeline.
    dim = psi.shape[0]
    for i in range(dim):
        a0 = 0.0 + 0.0j
        a1 = 0.0 + 0.0j
        a2 = 0.0 + 0.0j
        a3 = 0.0 + 0.0j
        j = 0
        while j + 4 <= dim:
            a0 += m[i, j] * psi[j]
            a1 += m[i, j + 1] * psi[j + 1]
            a2 += m[i, j + 2] * psi[j + 2]
            a3 += m[i, j + 3] * psi[j + 3]
            j += 4
        acc = (a0 + a1) + (a2 + a3)
        while j < dim:
            acc += m[i, j] * psi[j]
            j += 1
        out[i] = acc


@njit(cache=True)
def run_kernel(
    psi,
    t0,
    dt,
    n_steps,
    ea,
    q_bands,
    q_bw,
    l1_bands,
    l1_bw,
    l2_bands,
    l2_bw,
    drive_amp,
    omega,
    noise,
    renorm,
    sample_idx,
    snapshots,
):
    """Integrate one quantum state diffusion trajectory in place.

    psi         state amplitudes, overwritten with the final state
    ea          exp(A dt) with A = -i(H_sys + H_damp) - (L1'L1 + L2'L2)/2
    q_bands     banded Q (drive coupling)
    l1/l2_bands banded collapse operators; pass shape (0, 0) to disable L2
    noise       (n_steps, 2) complex Wiener increments
    sample_idx  sorted step counts at which to copy psi into snapshots

    One step: psi <- exp(A dt) [ psi + dt (drive + expectation drift) psi
    + noise terms ], with all expectation values and the drive phase taken
    in the pre-step state/time, then renormalization.

    Returns (status, step, max_norm_drift): status 0 on success, 1 when the
    norm became non-finite or zero at `step`; max_norm_drift is the largest
    | ||psi||^2 - 1 | seen before renormalization.
    """
    dim = psi.shape[0]
    qpsi = np.empty(dim, np.complex128)
    l1psi = np.empty(dim, np.complex128)
    l2psi = np.empty(dim, np.complex128)
    work = np.empty(dim, np.complex128)
    new = np.empty(dim, np.complex128)
    use_drive = drive_amp != 0.0
    use_l2 = l2_bands.shape[0] > 0

    n_samp = sample_idx.shape[0]
    ptr = 0
    while ptr < n_samp and sample_idx[ptr] == 0:
        for i in range(dim):
            snapshots[ptr, i] = psi[i]
        ptr += 1

    max_drift = 0.0
    for k in range(n_steps):
        t = t0 + k * dt

        _band_mv(l1_bands, l1_bw, psi, l1psi)
        l1 = 0.0 + 0.0j
        for i in range(dim):
            l1 += np.conj(psi[i]) * l1psi[i]
        l2 = 0.0 + 0.0j
        if use_l2:
            _band_mv(l2_bands, l2_bw, psi, l2psi)
            for i in range(dim):
                l2 += np.conj(psi[i]) * l2psi[i]
        dc = 0.0
        if use_drive:
            _band_mv(q_bands, q_bw, psi, qpsi)
            dc = drive_amp * np.cos(omega * t)

        dxi1 = noise[k, 0]
        dxi2 = noise[k, 1]
        l1c = np.conj(l1)
        l2c = np.conj(l2)
        ex = -0.5 * (
            l1.real * l1.real + l1.imag * l1.imag + l2.real * l2.real + l2.imag * l2.imag
        )

        for i in range(dim):
            d = (l1c * l1psi[i] + ex * psi[i]) * dt + (l1psi[i] - l1 * psi[i]) * dxi1
            if use_l2:
                d += (l2c * l2psi[i]) * dt + (l2psi[i] - l2 * psi[i]) * dxi2
            if use_drive:
                d += (1j * (dc * dt)) * qpsi[i]
            work[i] = psi[i] + d

        _dense_mv(ea, work, new)

        nrm = 0.0
        for i in range(dim):
            nrm += new[i].real * new[i].real + new[i].imag * new[i].imag
        if not np.isfinite(nrm) or nrm == 0.0:
            return 1, k, max_drift
        drift = abs(nrm - 1.0)
        if drift > max_drift:
            max_drift = drift
        if renorm:
            inv = 1.0 / np.sqrt(nrm)
            for i in range(dim):
                psi[i] = new[i] * inv
        else:
            for i in range(dim):
                psi[i] = new[i]

        while ptr < n_samp and sample_idx[ptr] == k + 1:
            for i in range(dim):
                snapshots[ptr, i] = psi[i]
            ptr += 1

    return 0, n_steps, max_drift
