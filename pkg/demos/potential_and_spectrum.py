"""Double-well potential and its low-lying quantum spectrum.

The dimensionless model puts the wells at Q = +-1/beta with a barrier of
height 1/(4 beta^2) between them, so beta controls how quantum the system
is: at beta = 1 only a handful of states fit under the barrier, while at
beta = 0.3 the wells are deep and far apart and the spectrum below the
barrier comes in near-degenerate tunneling doublets.

Writes potential_and_spectrum.png and prints the lowest eigenvalues.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from doublewell.operators import PhysicsParams, build_operator_set, classical_potential

fig, axes = plt.subplots(1, 2, figsize=(9, 4), sharey=False)

for ax, beta in zip(axes, (0.3, 1.0)):
    params = PhysicsParams(beta=beta, gamma=0.0)
    dim = 140 if beta == 0.3 else 64
    ops = build_operator_set(params, dim)
    levels = np.linalg.eigvalsh(ops.h_sys)

    x = np.linspace(-2.2 / beta, 2.2 / beta, 400)
    v = classical_potential(x, params)
    barrier = classical_potential(0.0, params) - classical_potential(1.0 / beta, params)

    ax.plot(x, v, "k-", lw=1.5)
    below = levels[levels < classical_potential(0.0, params) + 2.0]
    for e in below[:10]:
        ax.axhline(e, color="tab:blue", lw=0.8, alpha=0.7)
    ax.set_title(f"beta = {beta}  (barrier = {barrier:.2f})")
    ax.set_xlabel("Q")
    ax.set_ylabel("energy")
    ax.set_ylim(v.min() - 0.1 * barrier, classical_potential(0.0, params) + 2.0)

    print(f"beta = {beta}: wells at +-{1/beta:.2f}, barrier height {barrier:.3f}")
    print("  lowest levels:", "  ".join(f"{e:.4f}" for e in levels[:6]))
    doublet = levels[1] - levels[0]
    print(f"  ground tunneling splitting E1 - E0 = {doublet:.3e}")

fig.tight_layout()
fig.savefig("potential_and_spectrum.png", dpi=150)
print("wrote potential_and_spectrum.png")
