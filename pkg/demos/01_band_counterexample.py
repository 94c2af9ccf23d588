"""A system that is LILO stable but not BIBO stable.

The left shift on [0, 1] with distributed input and observation at the
left boundary integrates the input along characteristics. Band inputs of
width eps have L^inf norm sqrt(eps) yet drive the output to 1, so the
L^inf gain grows like 1/sqrt(eps) and no finite BIBO constant exists in
the limit. Its L^1 gain stays at 1 on every grid.
"""

import math
import sys

from bibolilo.stability import counterexample_sweep, gain_bracket, sweep_to_csv
from bibolilo.sysnode import left_shift_distributed_input

M = 1024
eps_list = [2.0 ** -k for k in range(0, 11, 2)]

print(f"band sweep on a grid of M = {M} cells")
rows = counterexample_sweep(M, eps_list)
print(f"{'eps':>12} {'||u||':>10} {'||y||':>8} {'ratio':>8} {'1/sqrt(eps)':>12}")
for r in rows:
    print(f"{r.eps:12.6g} {r.input_norm:10.6f} {r.output_norm:8.4f} {r.ratio:8.3f} {r.predicted:12.3f}")

print("\nL^1 gain stays bounded while the L^inf gain grows like sqrt(M):")
for m in (8, 32, 128):
    ls = left_shift_distributed_input(m)
    one, inf = gain_bracket(ls, 1), gain_bracket(ls, math.inf)
    print(f"  M={m:4d}  L1 in [{one.lower_bound:.4f}, {one.upper_bound:.4f}]"
          f"  Linf in [{inf.lower_bound:.4f}, {inf.upper_bound:.4f}]  sqrt(M)={math.sqrt(m):.4f}")

if len(sys.argv) > 1:
    with open(sys.argv[1], 'w') as fh:
        fh.write(sweep_to_csv(rows))
    print(f"\nwrote {sys.argv[1]}")
