"""
Adding a dephasing measurement to the x-field reservoir
=======================================================

Composing the x-field propagator with a dephasing step of strength ``g``
moves the fixed point toward the z axis. The closed-form fixed point is
checked against the affine solve ``(I - p)^{-1} q`` for several ``g``.
"""

import numpy as np

from qrc_sas import lindblad as lb
from qrc_sas.basis import bloch_to_density, gellmann_basis, pauli_expectations
from qrc_sas.sas import sas_decompose

gamma, h, dt = 1.0, 1.0, 1.0
B = gellmann_basis(2)

for g in (0.0, 0.5, 1.0, 2.0, 5.0):
    p, q = sas_decompose(lb.measurement_composed(gamma, h, dt, g).matrix)
    rho = bloch_to_density(np.linalg.solve(np.eye(3) - p, q), B)
    gap = np.max(np.abs(rho - lb.measurement_fixed_point(gamma, h, dt, g)))
    print(f"g = {g:3.1f}  <X,Y,Z> = {np.round(pauli_expectations(rho), 5)}  |closed form - solve| = {gap:.1e}")

# %%
# Without measurement the fixed point is the x-field one.
print(lb.good_xfield_fixed_point(gamma, h))
