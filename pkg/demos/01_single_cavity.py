"""
Sensing limit of a single lossy cavity
======================================

A cavity with intrinsic loss kappa_0 is read out through a port with
coupling loss kappa_ex. We hold the intracavity photon number fixed and
ask which kappa_ex gives the smallest resolvable frequency shift.
"""

import numpy as np

from linsense import DriveSpec, ModeParams, build_network
from linsense import analytic as an

tau = 1e4
n = 100.0
net = build_network([ModeParams(w0=0.0, kappa_ex=1.0, kappa_0=1.0)])
drive = an.normalize_drive(net, DriveSpec(0.0, [1.0]), mode=0, n_target=n)

# The output noise of a passive cavity is pure vacuum at every frequency.
for w in (-3.0, 0.0, 0.5):
    pair = an.output_noise_pair(net, 0, w)
    print(f"w={w:+.1f}  s_plus={pair.s_plus:.15f}  s_minus={pair.s_minus:.1f}")

rep = an.sensing_limit(net, drive, port=0, target=0, tau=tau)
print(f"\nlimit {rep.limit:.6g}   bound {rep.bound:.6g}   margin {rep.margin:.2g}")

# %%
# Sweep the coupling loss. The limit is (kappa_ex + kappa_0) / (4 sqrt(kappa_ex n tau)),
# which touches the bound only at kappa_ex = kappa_0.
from linsense.scenarios import sweep

grid = np.geomspace(0.1, 10, 9)
for row in sweep("single_passive", "kappa_ex", grid, tau, n_target=n):
    print(f"kappa_ex={row.value:7.3f}  limit={row.limit:.4e}  limit/bound={row.limit / row.bound:.4f}")

best, lim = an.optimize_coupling(net, drive, tau, np.geomspace(0.1, 10, 201), n_target=n)
print(f"\ngrid optimum kappa_ex={best:.4f}, limit {lim:.6e}")
