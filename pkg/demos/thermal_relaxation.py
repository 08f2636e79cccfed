"""Trajectory-averaged thermal relaxation against the analytic curve.

For the damped harmonic oscillator the mean occupation obeys

    <n>(t) = n0 exp(-2 gamma t) + nbar (1 - exp(-2 gamma t)),

which makes it a sharp calibration target for the stochastic integrator:
every approximation error would show up as a bias of the trajectory
average away from this curve.

Writes thermal_relaxation.png and prints the worst deviation in units of
the Monte Carlo standard error.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from doublewell.operators import harmonic_operator_set
from doublewell.qsd import IntegratorConfig, StateVector, run_trajectory, trajectory_seed

dim, gamma, nbar = 40, 0.1, 1.0
m_traj, n_checks = 200, 24
cfg = IntegratorConfig(dt=1e-3, t_transient=0.0, t_sample_window=12.0)

ops = harmonic_operator_set(dim, gamma, nbar)
init = np.zeros(dim, dtype=np.complex128)
init[4] = 1.0
n_op = np.arange(dim)

per_traj = np.empty((m_traj, n_checks))
for i in range(m_traj):
    r = run_trajectory(
        ops, cfg, StateVector(init.copy()), trajectory_seed(42, i), n_samples=n_checks
    )
    per_traj[i] = (np.abs(r.states) ** 2) @ n_op

times = r.times
mean = per_traj.mean(axis=0)
se = per_traj.std(axis=0, ddof=1) / np.sqrt(m_traj)
analytic = 4.0 * np.exp(-2 * gamma * times) + nbar * (1 - np.exp(-2 * gamma * times))

fig, ax = plt.subplots(figsize=(6, 4))
t_fine = np.linspace(0, times[-1], 300)
ax.plot(t_fine, 4.0 * np.exp(-2 * gamma * t_fine) + nbar * (1 - np.exp(-2 * gamma * t_fine)),
        "k-", lw=1, label="analytic")
ax.errorbar(times, mean, yerr=se, fmt="o", ms=3, capsize=2,
            label=f"{m_traj} trajectories")
ax.set_xlabel("t")
ax.set_ylabel("<n>")
ax.set_title(f"Fock |4> relaxing to nbar = {nbar}, gamma = {gamma}")
ax.legend()
fig.tight_layout()
fig.savefig("thermal_relaxation.png", dpi=150)

dev = np.abs(mean - analytic) / se
print(f"worst checkpoint deviation: {dev.max():.2f} standard errors")
print("wrote thermal_relaxation.png")
