"""
Amplification in a star register
================================

A target qubit coupled to N-1 ancillas is prepared in antiphase order:
the target polarization is stored in correlations with the ancillas.
Rotating the target then changes a state whose purity is set by the
ancillas, so the information grows with the number of ancillas.
"""

# %%
import numpy as np

from starqfi.sweeps import r_factor_map, scaling_in_eps, scaling_in_n, uncorrelated_comparison
from starqfi.states import StrConfig

rep = scaling_in_n(eps_a1=1e-3, n_range=range(2, 9), samples=10)
for p in rep.points:
    print(f"N={p['n_qubits']}  F_theta/eps_a1^2 = {p['qfi_over_eps2']:.6f}")
print("linear fit:", rep.fit)

# %%
# The information is quadratic in the ancilla purity.
print(scaling_in_eps(4).checks["doubling_ratios"])

# %%
# The azimuthal information carries a factor r that depends on the target
# direction. Over a grid it tracks sin^2(theta0).
grid = r_factor_map(4, theta_grid=np.linspace(0, np.pi, 7), phi_grid=[0.0, 1.0])
for p in grid.points[::2]:
    print(f"theta0={p['theta0']:.3f}  r={p['r']:.6f}  sin^2={p['sin2_theta0']:.6f}")

# %%
# Without the correlations the ancillas do not help: the register behaves
# like the lone target qubit.
unc = uncorrelated_comparison(StrConfig.from_gamma_ratio(4, 1e-3), samples=5)
for p in unc.points:
    print(f"F_theta/eps_t^2 = {p['theta_over_eps_t2']:.8f}   F_phi/eps_t^2 = {p['phi_over_eps_t2']:.6f}")
