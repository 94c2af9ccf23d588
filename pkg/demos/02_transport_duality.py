"""Transport with boundary control and its dual.

Transport is BIBO stable (the state norm never exceeds the input bound)
but its L^1 gain is sqrt(M) on an M-cell grid. The dual node is the left
shift of the first demo up to a state rescaling, so the roles swap: the
dual is LILO stable with the primal BIBO constant, and the adjoint
pairing identity holds to rounding error.
"""

import math

import numpy as np

from bibolilo.duality import bibo_to_lilo_check, lilo_to_bibo_check, pairing_identity_check
from bibolilo.stability import gain_bracket
from bibolilo.sysnode import dual, left_shift_distributed_input, rescale_state, transport_boundary_control

M = 32
t = transport_boundary_control(M)
d = dual(t)

ls = rescale_state(left_shift_distributed_input(M), 1 / M)
same = all(np.array_equal(a, b) for a, b in zip((d.F, d.G, d.H, d.J), (ls.F, ls.G, ls.H, ls.J)))
print(f"dual(transport) equals the rescaled left shift: {same}")

for name, s in (("transport", t), ("dual", d)):
    inf, one = gain_bracket(s, math.inf), gain_bracket(s, 1)
    print(f"{name:>10}: Linf gain in [{inf.lower_bound:.6f}, {inf.upper_bound:.6f}],"
          f" L1 gain in [{one.lower_bound:.6f}, {one.upper_bound:.6f}]")

print(f"pairing identity residual: {pairing_identity_check(t, trials=100):.2e}")
for check in (bibo_to_lilo_check, lilo_to_bibo_check):
    v = check(t)
    print(f"{v.name}: {v.lhs:.6f} <= {v.rhs:.6f} -> {'ok' if v.passed else 'VIOLATED'}")
