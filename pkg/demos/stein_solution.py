"""Solve the Stein equation for a tanh ramp under a gamma target and a stable
target, and print f_h, its derivatives and the residual at a few points.

    python3 demos/stein_solution.py
"""
import numpy as np

from sdstein.catalog import standard_catalog
from sdstein.semigroup import solve_stein, stein_residual
from sdstein.testfunctions import TanhRamp

cat = standard_catalog()
x = np.array([[-1.0], [0.0], [1.0], [2.0], [3.0]])
h = TanhRamp([1.0], 0.5, 1.0, 0.0)

for name in ("gamma1d", "rot_inv_stable1"):
    law = cat[name]
    sol = solve_stein(law, h, x, n_mc=2000, seed=0)
    res = stein_residual(law, sol, x)
    print(f"{name}: T_max = {sol.T_max:.1f}, {len(sol.times)} time nodes")
    print("     x      f_h     f_h'    f_h''   residual (se)")
    for i in range(len(x)):
        print(f"{x[i, 0]:6.1f} {sol.f.value[i]:8.4f} {sol.grad.value[i, 0]:8.4f} "
              f"{sol.hess.value[i, 0, 0]:8.4f}  {res.value[i]:+.4f} ({res.se[i]:.4f})")
