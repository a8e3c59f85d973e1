"""
Three driven Lindblad families
==============================

Each family is a qubit with decay or dephasing plus a field proportional
to the input. Closed-form propagators are compared with ``scipy``'s
matrix exponential of the Liouvillian, then their contraction spectra are
tabulated against the field strength.
"""

import numpy as np

from qrc_sas import lindblad as lb

np.set_printoptions(precision=5, suppress=True)
gamma, dt = 1.0, 1.0

# %%
# Closed form against the numerical exponential at a few fields.
for family in lb.FAMILIES:
    worst = 0.0
    for h in (0.3, 0.7, 1.9):
        exact = lb.propagator(lb.qubit_model(family, gamma, dt, h), np.array([1.0])).matrix
        closed = lb.ANALYTIC[family](gamma, h, dt).matrix
        worst = max(worst, np.max(np.abs(exact - closed)))
    print(f"{family:18s} max |closed - expm| = {worst:.1e}")

# %%
# At gamma = 4 h the x-field family passes through a removable singularity
# of its closed form. The series guard keeps it finite and accurate.
at = lb.example_good_xfield(4.0, 1.0).matrix
near = lb.example_good_xfield(4.0 + 1e-9, 1.0).matrix
print("continuity across the singular point:", np.max(np.abs(at - near)))

# %%
# Singular values of the traceless block as the field grows. The
# dephasing family keeps one direction at 1 when h = 0; the x-field
# family stays strictly inside the unit ball.
print("  h    dephasing sigma      x-field sigma")
for h in np.linspace(0.0, 2.0, 5):
    s_ing = lb.unital_dephasing_singular_values(gamma, h, dt)
    s_good = lb.good_xfield_singular_values(gamma, h, dt)
    print(f"{h:4.1f}  {s_ing}  {s_good}")

# %%
# The z-field family decouples: its largest singular value is
# exp(-gamma dt / 2) for every field.
print("z-field sigma:", lb.bad_zfield_singular_values(gamma, 1.3, dt), "vs", np.exp(-gamma * dt / 2))
