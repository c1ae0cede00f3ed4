"""
Frequency estimation above threshold
====================================

Above threshold a mode oscillates on its own and its phase performs a
random walk with diffusion constant dw = kappa / (2 n). Reading the
frequency from the total phase accumulated over tau gives an error
sqrt(dw / tau). That is sqrt(2) larger than the linear-sensor floor.
"""

import math

from linsense import analytic as an
from linsense import stochastic as sto

kappa, n, tau = 1.0, 100.0, 200.0
res = sto.phase_diffusion(kappa, kappa_ex=kappa, n=n, tau=tau, trials=10_000, seed=0)
print(f"dw = {res.delta_w}")
print(f"phase variance {res.var_phase:.4f}  (theory {res.delta_w * tau:.4f})")
print(f"frequency error {res.freq_std:.4e}  (theory {sto.above_threshold_frequency_error(kappa, n, tau):.4e})")

linear = an.fundamental_bound(kappa, n, tau)
print(f"ratio to the linear floor: {res.freq_std / linear:.4f}  (sqrt 2 = {math.sqrt(2):.4f})")
