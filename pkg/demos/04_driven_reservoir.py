"""
A reservoir that remembers versus one that does not
===================================================

Both channels below are certified contractive. The z-field one has the
same fixed point for every input, so its filter is constant and the
reservoir output carries nothing about the drive. The x-field one keeps
input-dependent fluctuations in ``<Y>`` and ``<Z>``.
"""

import numpy as np

from qrc_sas import lindblad as lb
from qrc_sas.checks import drive_expectations
from qrc_sas.sas import SASModel, fixed_point_report, fmp_probe, input_lattice

lattice = input_lattice(0.0, 1.0, per_axis=21, n_random=50)

for family in ("bad_zfield", "good_xfield"):
    ch = lb.analytic_channel(family, 1.0, 1.0, 1.0)
    fps = fixed_point_report(SASModel.from_channel(ch), lattice)
    _, e = drive_expectations(ch, 400, seed=3)
    tail = e[100:]
    print(f"\n{family}")
    print("  input-independent fixed point:", fps.input_independent, f"(spread {fps.spread:.2e})")
    print("  std of <X>, <Y>, <Z> after t = 100:", np.round(tail.std(axis=0), 5))

    # How quickly does the output forget inputs from k steps back?
    probe = fmp_probe(ch, np.random.default_rng(0).uniform(size=60), ks=range(0, 31, 10))
    print("  deviation when inputs older than k are redrawn:", [f"{d:.1e}" for d in probe.deviations])
