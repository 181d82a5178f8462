"""One period of the drive as a Floquet unitary, and the eigenstate the MPS selects.

On the zero-momentum sector of N = 10 spins the eigenphases look thermal:
flat density of states and no level clustering. The initial MPS, however,
sits mostly on one eigenstate whose half-chain entropy is far below the
sector average.
"""

from __future__ import annotations

import numpy as np

from mpsdrive.chain import mps_state_vector
from mpsdrive.floquet import DriveOptions, floquet_spectrum, propagate, zero_momentum_sector
from mpsdrive.spectrum import (
    eigenstate_diagnostics,
    flag_special_states,
    relative_spread,
    sdos,
    spectral_ratios,
    special_state,
)
from mpsdrive.trajectory import builtin_loop

N, r = 10, 4
loop = builtin_loop()
sector = zero_momentum_sector(N)
U = propagate(loop, r, N, loop.period, DriveOptions(alpha="optimal"), sector=sector)
spec = floquet_spectrum(U)
rows = eigenstate_diagnostics(spec, sector, mps_state_vector(loop.state(0.0)[0], N)[0])

top = special_state(rows)
mean_s = np.mean([row.entropy for row in rows])
print(f"sector dimension {sector.dim}")
print(f"largest overlap {top.overlap:.3f} at e = {top.quasi_energy:+.3f}, entropy {top.entropy:.3f} (mean {mean_s:.3f})")
print(f"states with overlap >= 10x median: {len(flag_special_states(rows))}")
print("five largest overlaps:", np.round(sorted(row.overlap for row in rows)[-5:], 4))
print(f"mean spacing ratio {spectral_ratios(spec.quasi_energies).mean:.3f}")
print(f"sDOS relative spread {relative_spread(sdos(spec.quasi_energies)[1]):.3f}")
