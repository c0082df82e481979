"""
A weighted shift
================

B_1 e_m = e_{m+1} / (m + 1) and B_r = B_1^r.  The shift is not normal, so
its kernel is genuinely non-symmetric; we look at K(s, t) against K(t, s)
and at scalar recovery B_r = r S_r on the kernel level.
"""
import numpy as np

from carleman.config import RunConfig
from carleman.pipeline import construct
from carleman.verification import scalar_recovery_check

cfg = RunConfig(preset="weighted-shift", N=48, R=2, extent=8.0, step=0.05)
con = construct(cfg)

for r, K in enumerate(con.kernels, 1):
    V = K.values
    asym = np.abs(V - V.T.conj()).max() / np.abs(V).max()
    print(f"r={r}: max |K| = {np.abs(V).max():.4f}, relative non-self-adjointness {asym:.3f}")
    P, F = K.parts["P"], K.parts["F"]
    print(f"      |P| = {np.abs(P.fields[(0, 0)]).max():.2e}, |F| = "
          f"{np.abs(F.fields[(0, 0)]).max():.2e}")

print(scalar_recovery_check(con.kernels, con.b_kernels).message)

# where does the kernel live?  row and column of the largest entry
i, j = np.unravel_index(np.argmax(np.abs(con.kernels[0].values)), con.kernels[0].values.shape)
pts = con.grid.points
print(f"peak at (s, t) = ({pts[i]:.2f}, {pts[j]:.2f})")
