"""From a compressed nanobeam to the dimensionless double well.

A doubly clamped beam under enough compression buckles: the quadratic
coefficient of its fundamental-mode potential changes sign at the Euler
tension -4 pi^2 E I / l0^2 and the mode sees a double well.  The
quantumness parameter beta of the corresponding dimensionless model then
depends only on the compression ratio lam = |T0| l0^2 / (E I) and a
material/geometry prefactor -- so beam engineering translates directly
into a position on the quantum-to-classical transition.

Writes beam_mapping.png and prints the mapping for two concrete beams.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from doublewell.nems import (
    BeamSpec,
    CircularSection,
    MATERIALS,
    RectangularSection,
    beta_from_beam,
    beta_prefactor,
    critical_tension,
    potential_coefficients,
    tension_from_buckling_ratio,
)

beams = {
    "silicon beam (5 x 10 nm, 1 um)": BeamSpec(
        length=1e-6,
        section=RectangularSection(thickness=5e-9, width=10e-9),
        modulus=MATERIALS["silicon"].modulus,
        density=MATERIALS["silicon"].density,
        tension=-1e-9,  # placeholder; swept below
    ),
    "nanotube (r = 1.6 nm, 1.15 um)": BeamSpec(
        length=1.15e-6,
        section=CircularSection(radius=1.6e-9),
        modulus=MATERIALS["swnt"].modulus,
        density=MATERIALS["swnt"].density,
        tension=-1e-9,
    ),
}

lam = np.linspace(4 * np.pi**2 * 1.02, 120.0, 300)
fig, ax = plt.subplots(figsize=(6.4, 4.4))

for name, beam in beams.items():
    t_crit = critical_tension(beam)
    pref = beta_prefactor(beam)
    betas = []
    for l in lam:
        tension = tension_from_buckling_ratio(beam.section, length=beam.length,
                                              lam=float(l), modulus=beam.modulus)
        betas.append(beta_from_beam(
            BeamSpec(beam.length, beam.section, beam.modulus, beam.density, tension)
        ))
    ax.semilogy(lam, betas, lw=1.4, label=name)

    # report one concrete working point at twice the critical compression
    at2 = BeamSpec(beam.length, beam.section, beam.modulus, beam.density, 2 * t_crit)
    coeffs = potential_coefficients(at2)
    print(name)
    print(f"  critical (Euler) tension: {t_crit:.3e} N")
    print(f"  beta^2 prefactor: {pref:.3e}")
    print(f"  at twice critical compression (lam = {8 * np.pi**2:.1f}): "
          f"c2 = {coeffs.c2:.3e}, c4 = {coeffs.c4:.3e}, beta = {beta_from_beam(at2):.4f}")

ax.axvline(4 * np.pi**2, color="gray", ls=":", lw=0.8)
ax.text(4 * np.pi**2 + 1, ax.get_ylim()[0] * 1.5, "buckling threshold", fontsize=8)
ax.set_xlabel("compression ratio lam")
ax.set_ylabel("beta")
ax.set_title("quantumness of the buckled fundamental mode")
ax.legend()
fig.tight_layout()
fig.savefig("beam_mapping.png", dpi=150)
print("wrote beam_mapping.png")
