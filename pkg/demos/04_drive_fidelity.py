"""Drive a finite chain with the Hermitian generator and watch it follow the loop.

The chain starts in the MPS at t = 0 and evolves under sum_i shift(h_r(t), i).
Fidelity with the instantaneous MPS is tracked over one period; the
intensive infidelity f = -ln F / N drops quickly with r.
"""

from __future__ import annotations

import numpy as np

from mpsdrive.floquet import DriveOptions, fidelity_trace
from mpsdrive.trajectory import RotationLoop, builtin_loop

rot = fidelity_trace(RotationLoop(), 1, 8, [0.25, 0.5, 1.0])
print("single-spin rotation loop, r=1:", ["%.1e" % (1 - p.F) for p in rot], "(1 - F)")

loop = builtin_loop()
grid = np.linspace(0, loop.period, 5)
for r in (2, 3, 4):
    pts = fidelity_trace(loop, r, 8, grid, DriveOptions(alpha="optimal"))
    print(f"r={r}: f(t) =", " ".join(f"{p.f:.2e}" for p in pts))
