"""
Fisher information of a single qubit
====================================

A near-mixed qubit points along a Bloch direction (theta0, phi0) with
purity eps. The symmetric logarithmic derivative gives the best possible
read-out for either angle. Any tilted observable does worse, and this
script shows by how much.
"""

# %%
# The optimal information is eps^2 for the polar angle and
# eps^2 sin^2(theta0) for the azimuth.
import numpy as np

from starqfi import StateFamily, qfi_max
from starqfi.fisher import biased_qfi_theta, cramer_rao_bound, dual_qfi

eps = 1e-3 / (6.93 / np.sqrt(3))
for theta0 in (np.pi / 2, np.pi / 4, 0.0):
    fam = StateFamily.single(theta0, 0.0, eps)
    f_t = qfi_max(fam, "theta").value
    f_p = qfi_max(fam, "phi").value
    print(f"theta0={theta0:.3f}  F_theta/eps^2={f_t / eps**2:.3f}  F_phi/eps^2={f_p / eps**2:.3f}  dual={dual_qfi(f_t, f_p) / eps**2:.3f}")

# %%
# With k = 1e15 molecules, the polar angle can be pinned down to
# a standard deviation of sqrt(1 / (k F)).
f = qfi_max(StateFamily.single(np.pi / 2, 0.0, eps), "theta").value
print(f"polar-angle std dev with 1e15 copies: {np.sqrt(cramer_rao_bound(f, 1e15)):.2e} rad")

# %%
# Tilting the observable by dtheta0 costs information. At full purity
# the loss only shows up right at dtheta0 = pi/2; at low purity it
# follows cos^2(dtheta0).
for e in (0.1, 0.9, 0.999):
    row = [biased_qfi_theta(np.pi / 4, 0.0, d, 0.0, e) / e**2 for d in np.linspace(0, np.pi / 2, 5)]
    print(f"eps={e:<6}", "  ".join(f"{x:.3f}" for x in row))
