"""
System reliability of a 21-bar truss
====================================

The reconstructed truss has lognormal member areas. It fails when either the
mid-span deflection or the largest member stress exceeds its allowable value
(a series system). A bivariate PDD of both performance functions costs 3445
truss solves. PDD-MCS then samples the surrogate, and score functions give the
sensitivities with respect to all 21 mean areas from the same samples.
"""

import numpy as np

from pdduq.distributions import DesignBinding, Lognormal, Role
from pdduq.models import TRUSS21_MEAN_AREAS, truss21, truss_solve, default_truss21
from pdduq.pdd import compute_coefficients
from pdduq.reliability import EventSpec, crude_mcs_sf, mcs_failure_probability

v, s, y1, y2 = truss_solve(default_truss21(), TRUSS21_MEAN_AREAS)
print(f"mean design: deflection {v:.4f} in, max stress {s:.0f} psi, y1 = {y1:.3f}, y2 = {y2:.3f}")

model = truss21()
inputs = [Lognormal(a, 0.1 * a) for a in TRUSS21_MEAN_AREAS]
binds = [DesignBinding(((i, Role.MEAN),), f"mu{i}") for i in range(21)]
sur = compute_coefficients(model, inputs, S=2, m=3)
print("truss solves for the surrogate:", model.evaluations)

event = EventSpec("series")
pdd = mcs_failure_probability(event, sur, 10**5, 2012, binds)
ref = crude_mcs_sf(truss21(), inputs, event, 10**5, 2012, binds)
se = ref.diagnostics["sensitivity_std_error"]
print(f"P_F: PDD-MCS {pdd.p_f:.5f}, crude MCS/SF {ref.p_f:.5f} +- {ref.diagnostics['std_error']:.5f}")
z = (np.asarray(pdd.sensitivities) - ref.sensitivities) / np.asarray(se)
print("largest |z| over 21 sensitivities:", np.abs(z).max().round(2))
for i in np.argsort(np.abs(ref.sensitivities))[::-1][:5]:
    print(f"  dP_F/dmu{i:<2} PDD-MCS {pdd.sensitivities[i]:+.4e}  crude {ref.sensitivities[i]:+.4e}")
