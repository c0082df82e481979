"""
The mother wavelet and its children
===================================

A short walk through the Lemarie-Meyer wavelet used as the basis of L2(R).
"""
import numpy as np

from carleman.scheduler import Enumeration
from carleman.wavelet import (BellFunction, MotherWavelet, bell_eval, bounds_DA, child_eval,
                              gram_matrix)

# The bell lives on [2pi/3, 8pi/3].  Its squares at xi and 2 xi add up to one,
# which is what makes the dyadic children orthonormal.
xi = np.linspace(2 * np.pi / 3, 4 * np.pi / 3, 7)
print("b(xi)^2 + b(2 xi)^2:", np.round(bell_eval(xi) ** 2 + bell_eval(2 * xi) ** 2, 15))

# u is evaluated from its frequency-side integral by Gauss-Legendre
# quadrature.  It is purely imaginary and |u| is symmetric about s = -1/2.
u = MotherWavelet(quadrature_nodes=256, i_max=2)
s = np.linspace(-4, 3, 8)
print("Im u(s):", np.round(u.eval(s).imag, 6))
print("sup-norms of u, u', u'':", [round(u.sup_norm(i), 6) for i in range(3)])

# Children u_jk(s) = 2^{j/2} u(2^j s - k) and the bound |u_jk^(i)| <= D_j A_i.
for idx in [(0, 0), (2, 1), (-3, 0)]:
    D, A = bounds_DA(u, idx, 1)
    grid = (np.linspace(-20, 20, 4001) + idx[1]) / 2.0 ** idx[0]
    peak = np.abs(child_eval(u, idx, grid, 1)).max()
    print(f"child {idx}: sampled |u'_jk| = {peak:.4g}, bound D*A = {D * A:.4g}")

# The first children of the square-shell enumeration are orthonormal.
enum = Enumeration()
pairs = [enum.pair(n) for n in range(1, 10)]
print("first children:", [tuple(p) for p in pairs])
G = gram_matrix(u, pairs)
print("Gram deviation from identity:", f"{np.abs(G - np.eye(len(pairs))).max():.2e}")

# A sharper bell transition changes the wavelet but not the orthonormality.
sharp = MotherWavelet(bell=BellFunction(transition_sharpness=0.3), i_max=0)
G = gram_matrix(sharp, pairs[:4])
print("sharper bell, Gram deviation:", f"{np.abs(G - np.eye(4)).max():.2e}")
