"""Level statistics depend on whether the loop has a hidden time reversal.

For the built-in loop there is no antiunitary symmetry and the quasi-energy
spacing ratio lands near the unitary-ensemble value 0.603. Making a and c
odd and b and d even in t gives psi(-t) = psi(t)^*, hence H(-t) = H(t)^*,
and the ratio moves to the orthogonal value 0.536.
"""

from __future__ import annotations

import numpy as np

from mpsdrive.floquet import DriveOptions, floquet_spectrum, propagate
from mpsdrive.spectrum import GOE_RATIO, GUE_RATIO, spectral_ratios
from mpsdrive.trajectory import LOOP_PERIOD, FourierTrajectory, Mode, builtin_loop

symmetric = FourierTrajectory(
    LOOP_PERIOD,
    [
        Mode(0, np.array([0.0, 0.9, 0.0, 0.4308]), np.zeros(4)),
        Mode(1, np.array([0.0, 0.3, 0.0, 0.15]), np.array([0.5, 0.0, 0.4, 0.0])),
    ],
    source="symmetric",
)
symmetric.certify()

N, r = 10, 4
for name, loop in (("built-in", builtin_loop()), ("time-reversal symmetric", symmetric)):
    U = propagate(loop, r, N, loop.period, DriveOptions(alpha="optimal"))
    ratio = spectral_ratios(floquet_spectrum(U).quasi_energies).mean
    print(f"{name:24s} mean ratio {ratio:.3f}")
print(f"references: orthogonal {GOE_RATIO:.3f}, unitary {GUE_RATIO:.3f}")
