"""The quantum-to-classical transition of the averaged position density.

The driven damped double well is compared across beta in scaled units
y = beta Q, where the wells sit at y = +-1 for every beta.  Deep in the
quantum regime (beta = 0.3) the trajectory-averaged density P_avg is a
symmetric two-peak structure: individual trajectories localize in one
well, noise-induced hopping equalizes the two sides, and tunneling keeps
each wavepacket broad.  At beta = 1.0 the ensemble instead piles up on
the single period-one attractor near the barrier top, which is where the
classical cloud (the beta -> 0 limit of the rescaled dynamics) ends up
too.

Takes a few minutes.  Writes transition_sweep.png and prints the shape
statistics of each curve.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from doublewell.classical import CloudSpec, classical_histogram
from doublewell.ensemble import EnsembleConfig, run_ensemble
from doublewell.observables import GridSpec, default_grid
from doublewell.operators import PhysicsParams, build_operator_set
from doublewell.qsd import IntegratorConfig

M = 64
SEED = 42
cfg = IntegratorConfig.for_drive(omega=1.0)
# the beta = 1.0 state is broad relative to its wells, so it gets a wider
# grid than default_grid would hand out
runs = [
    ("beta = 0.3", 0.3, 80, default_grid(0.3)),
    ("beta = 1.0", 1.0, 64, GridSpec(-4.0, 4.0, 256)),
]

fig, ax = plt.subplots(figsize=(7, 4.5))

for label, beta, dim, grid in runs:
    params = PhysicsParams(beta=beta, gamma=0.3)
    ops = build_operator_set(params, dim)
    res = run_ensemble(ops, cfg, EnsembleConfig(M, grid, 64, SEED))
    dens = res.histogram.density()
    x = grid.centers
    ax.plot(beta * x, dens / beta, lw=1.4, label=label)

    mass = res.histogram.mass()
    right = dens[x > 0].sum() * grid.width / mass
    mode = beta * x[np.argmax(dens)]
    print(f"{label}: right-side mass {100 * right:.0f}%, highest peak at y = {mode:+.2f}, "
          f"leakage {res.max_leakage:.1e}")

# classical limit: the same dynamics with the quantum noise scaled away
p_cls = PhysicsParams(beta=0.01, gamma=0.3)
grid_cls = default_grid(p_cls.beta)
cloud = CloudSpec.matching_quantum(p_cls, size=4096, master_seed=SEED)
res_cls = classical_histogram(p_cls, cfg, cloud, grid_cls, n_samples=64)
dens_cls = res_cls.histogram.density()
x_cls = grid_cls.centers
ax.plot(p_cls.beta * x_cls, dens_cls / p_cls.beta, "k--", lw=1.2, label="classical cloud")
right = dens_cls[x_cls > 0].sum() * grid_cls.width / res_cls.histogram.mass()
print(f"classical: right-side mass {100 * right:.0f}% "
      f"(one-sided -- the attractor keeps the cloud in one well)")

ax.axvline(-1, color="gray", ls=":", lw=0.8)
ax.axvline(1, color="gray", ls=":", lw=0.8)
ax.set_xlim(-2.2, 2.2)
ax.set_xlabel("beta Q (wells at +-1)")
ax.set_ylabel("P_avg")
ax.set_title("averaged position density across the transition")
ax.legend()
fig.tight_layout()
fig.savefig("transition_sweep.png", dpi=150)
print("wrote transition_sweep.png")
