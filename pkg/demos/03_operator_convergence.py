"""Do the Hermitian densities converge as the range grows?

The non-Hermitian operator is only fixed on the span of the MPS block; on
the orthogonal complement any term can be added. Choosing that term by least
squares so h_r stays close to h_(r-1) makes the sequence settle down, and the
weight of long Pauli strings falls off with their support.
"""

from __future__ import annotations

from mpsdrive.experiments import operator_series
from mpsdrive.trajectory import builtin_loop

loop = builtin_loop()
psi, dA = loop.state(0.0)
series = operator_series(psi, dA, [2, 3, 4, 5])
print(" r   ||h_r - h_(r-1)|| before   after fit")
for row in series.rows:
    print(f"{row.r:2d}   {row.distance_before:.4f}                  {row.distance_after:.4f}")

print("\nPauli weight by support length at r = 5:")
for k, w in sorted(series.final.support_weights().items()):
    print(f"  support {k}: {w:.3e}")

print("\nlargest Pauli strings:")
top = sorted(series.final.coeffs.items(), key=lambda kv: -abs(kv[1]))[:8]
for key, c in top:
    print(f"  {key:6s} {c:+.4f}")
