"""Scalar kernels: total variation, Laplace transform and realizations.

For finite-dimensional input and output the L^inf and L^1 gains are the
row and column sums of entrywise total variations, so BIBO and LILO
stability coincide, and transposing the kernel swaps them. The transfer
function of the shift-register realization reproduces the Laplace
transform of the kernel.
"""

import math

import numpy as np

from bibolilo.kernel import delta, exponential, induced_gain, laplace, transpose
from bibolilo.stability import kernel_gain
from bibolilo.sysnode import dual, from_kernel, transfer

dt = 1e-2
h = exponential([1.0, 3.0], [2.0, -1.0], dt=dt, horizon=12.0) + delta(0.5, [[0.0, 1.0], [0.0, 0.0]])
print("kernel: diag(2 e^-t, -e^-3t) + delay 0.5 in entry (0, 1)")
print(f"  Linf gain {induced_gain(h, math.inf).value:.6f}   L1 gain {induced_gain(h, 1).value:.6f}")
ht = transpose(h)
print(f"  transposed: Linf {induced_gain(ht, math.inf).value:.6f}   L1 {induced_gain(ht, 1).value:.6f}")

S = from_kernel(h)
print(f"realization with {S.state_space.dim} states")
print(f"  Linf gain of the dual realization: {kernel_gain(dual(S), math.inf).upper_bound:.6f}")
for s in (0.0, 1.0 + 2.0j, 4.0 - 1.0j):
    L, T = laplace(h, s), transfer(S, s)
    print(f"  s={s!s:>8}: |L(h)(s) - transfer(s)| = {np.abs(L - T).max():.2e}")
