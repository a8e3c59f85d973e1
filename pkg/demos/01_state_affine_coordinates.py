"""
Channels as affine maps on the Bloch ball
=========================================

Any trace-preserving map acts on Gell-Mann coordinates as
``x -> p x + q``. This walk-through builds a few qubit channels,
reads off their ``(p, q)`` blocks and checks the affine action against
the Kraus action.
"""

import numpy as np

from qrc_sas.basis import bloch_to_density, density_to_bloch, gellmann_basis, pauli_expectations
from qrc_sas.channels import apply, compose, dephasing, depolarizing, is_cptp, rotation, unitary_channel
from qrc_sas.sas import sas_decompose, superop_matrix

np.set_printoptions(precision=4, suppress=True)
B = gellmann_basis(2)

# %%
# The first basis element is I/sqrt(2); the rest are the Pauli matrices
# over sqrt(2). The Gram matrix is the identity.
G = np.einsum("aij,bij->ab", B.elements.conj(), B.elements)
print("Gram matrix deviation:", np.max(np.abs(G - np.eye(4))))

# %%
# A depolarizing channel shrinks the ball uniformly and leaves q at zero.
p, q = sas_decompose(superop_matrix(depolarizing(0.25)))
print("depolarizing p =\n", p, "\nq =", q)

# %%
# Composing a rotation with dephasing keeps q = 0 (the composite is
# unital) but p is no longer symmetric.
ch = compose(dephasing(1.0), unitary_channel(rotation((1, 0, 0), 0.8)))
p, q = sas_decompose(superop_matrix(ch))
print("rotation then dephasing p =\n", p)
print("CPTP report:", is_cptp(ch))

# %%
# The affine action and the Kraus action agree on any state.
rho = np.array([[0.7, 0.2 - 0.1j], [0.2 + 0.1j, 0.3]])
x = density_to_bloch(rho, B)
via_blocks = bloch_to_density(p @ x + q, B)
via_kraus = apply(ch, rho)
print("affine vs Kraus:", np.max(np.abs(via_blocks - via_kraus)))
print("<X>, <Y>, <Z> after the channel:", pauli_expectations(via_kraus))
