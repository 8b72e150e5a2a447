"""
Exact reproduction of a cubic model
===================================

A trivariate Laguerre PDD of a cubic in four exponential inputs is exact. So
PDD-MCS and crude MCS on the original function draw the same samples and give
the same CDF and score-function sensitivities.
"""

import numpy as np

from pdduq.distributions import DesignBinding, Exponential, Role
from pdduq.models import cubic4
from pdduq.pdd import compute_coefficients
from pdduq.reliability import crude_mcs_sf_cdf, mcs_cdf

inputs = [Exponential(1.0)] * 4
model = cubic4()
sur = compute_coefficients(model, inputs, S=3, m=3)

rng = np.random.default_rng(0)
X = np.column_stack([m.sample(rng, 10_000) for m in inputs])
print("max |surrogate - model| at 1e4 points:", np.abs(sur.evaluate(X) - model.func(X)).max())

binds = [DesignBinding.shared(Role.RATE, range(4), "lambda")]
xi = np.linspace(300.0, 510.0, 8)
a = mcs_cdf(sur, xi, binds, L=100_000, seed=2012)
b = crude_mcs_sf_cdf(model, inputs, xi, L=100_000, seed=2012, bindings=binds)
print(f"{'xi':>6} {'F (PDD-MCS)':>12} {'F (crude)':>12} {'dF/dlambda':>12}")
for k, x in enumerate(xi):
    print(f"{x:>6.0f} {a.cdf[k]:>12.6f} {b.cdf[k]:>12.6f} {a.sensitivities[k, 0]:>12.4e}")
print("max |difference|:", max(np.abs(a.cdf - b.cdf).max(), np.abs(a.sensitivities - b.sensitivities).max()))
