"""
Does linear gain lower the limit?
=================================

Adding gain g narrows the resonance and raises the response, but it also
injects noise. Below threshold the limit stays above
sqrt(kappa_0 + g) / (2 sqrt(n tau)), which is never better than the passive floor.
"""

import math

import numpy as np

from linsense import analytic as an
from linsense.scenarios import preset, sweep

tau = 1e4
kappa = 2.0
p = preset("single_active", g=0.5)
pair = an.output_noise_pair(p.network, 0, p.drive.w_in)
print(f"g=0.5: s_plus={pair.s_plus:.4f} s_minus={pair.s_minus:.4f} difference={pair.s_plus - pair.s_minus:.12f}")

print("\n   g     limit        gain floor    passive floor")
for row in sweep("single_active", "g", np.linspace(0, 0.9 * kappa, 7), tau):
    gain_floor = math.sqrt(1.0 + row.value) / (2 * math.sqrt(row.n_photons * tau))
    print(f"{row.value:5.2f}  {row.limit:.4e}   {gain_floor:.4e}    {row.bound:.4e}")

# %%
# A network that crosses threshold has no steady state and is reported as skipped.
for row in sweep("single_active", "g", [1.9, 2.0, 2.5], tau):
    print(f"g={row.value}: skipped={row.skipped} {row.reason}")
