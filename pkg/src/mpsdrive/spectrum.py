"""Statistics of Floquet quasi-energies and diagnostics of Floquet eigenstates."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSpacing
from .floquet import FloquetSpectrum, MomentumSector

POISSON_RATIO = 2 * np.log(2) - 1  # mean of min(s_n, s_n+1)/max(...) for Poisson levels
GOE_RATIO = 4 - 2 * np.sqrt(3)  # Wigner-like surmise; 0.5359
GUE_RATIO = 2 * np.sqrt(3) / np.pi - 0.5  # 0.6027, also the circular unitary value
SPECIAL_FACTOR = 10.0
SPACING_FLOOR = 1e-12
DEGENERACY_TOL = 1e-8


def wrap_phase(x):
    """Map angles to ``(-pi, pi]``."""
    y = np.mod(np.asarray(x, dtype=float) + np.pi, 2 * np.pi) - np.pi
    return np.where(y <= -np.pi, y + np.pi * 2, y)


def quasi_energy_grid(n: int = 512) -> np.ndarray:
    """``n`` uniformly spaced points on ``(-pi, pi]``."""
    return -np.pi + 2 * np.pi * np.arange(1, n + 1) / n


def sdos(
    energies, sigma2: float = 0.05, grid=None, periodic: bool = True
) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian-smoothed density of quasi-energies, normalized to unit area.

    Quasi-energies live on a circle, so by default the distance ``eps - e_n``
    is taken modulo ``2 pi``; ``periodic=False`` uses the plain difference.

    Returns:
        ``(grid, rho)``.
    """
    e = np.asarray(energies, dtype=float)
    grid = quasi_energy_grid() if grid is None else np.asarray(grid, dtype=float)
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    diff = grid[:, None] - e[None, :]
    if periodic:
        diff = wrap_phase(diff)
    g = np.exp(-(diff**2) / (2 * sigma2)) / np.sqrt(2 * np.pi * sigma2)
    return grid, g.sum(axis=1) / max(e.size, 1)


def relative_spread(rho: np.ndarray) -> float:
    """Standard deviation over mean."""
    return float(np.std(rho) / np.mean(rho))


@dataclass
class RatioStats:
    ratios: np.ndarray
    mean: float
    excluded: int


def spectral_ratios(energies, floor: float = SPACING_FLOOR) -> RatioStats:
    """Consecutive-spacing ratios ``min(s_n, s_n+1) / max(s_n, s_n+1)``.

    Spacings below ``floor`` make their ratios undefined; those ratios are
    dropped and a :class:`DegenerateSpacing` warning is issued.
    """
    e = np.sort(np.asarray(energies, dtype=float))
    s = np.diff(e)
    if s.size < 2:
        return RatioStats(np.zeros(0), float("nan"), 0)
    a, b = s[:-1], s[1:]
    bad = (a < floor) | (b < floor)
    if bad.any():
        warnings.warn(
            f"{int(bad.sum())} ratios involve spacings below {floor:g}; excluded",
            DegenerateSpacing,
            stacklevel=2,
        )
    a, b = a[~bad], b[~bad]
    r = np.minimum(a, b) / np.maximum(a, b)
    return RatioStats(r, float(r.mean()) if r.size else float("nan"), int(bad.sum()))


def half_chain_entropy(vec: np.ndarray, N: int, d: int = 2, cut: int | None = None) -> float:
    """Von Neumann entropy of the first ``cut`` sites (default ``N // 2``)."""
    cut = N // 2 if cut is None else cut
    s = np.linalg.svd(np.asarray(vec).reshape(d**cut, -1), compute_uv=False)
    p = s**2
    p = p[p > 1e-300]
    p = p / p.sum()
    return float(-(p * np.log(p)).sum())


def site_magnetization(vec: np.ndarray, N: int) -> np.ndarray:
    """``<sigma^x>, <sigma^y>, <sigma^z>`` averaged over sites of a spin-1/2 state."""
    t = np.asarray(vec).reshape((2,) * N)
    out = np.zeros(3)
    for k in range(N):
        m = np.moveaxis(t, k, 0).reshape(2, -1)
        rho = m @ m.conj().T
        out += [2 * rho[0, 1].real, -2 * rho[0, 1].imag, (rho[0, 0] - rho[1, 1]).real]
    return out / N


@dataclass
class EigenstateRow:
    index: int
    quasi_energy: float
    overlap: float
    entropy: float
    mx: float
    my: float
    mz: float


def degenerate_clusters(energies, tol: float = DEGENERACY_TOL) -> list[np.ndarray]:
    """Index groups of sorted quasi-energies closer than ``tol`` (circular distance)."""
    e = np.asarray(energies, dtype=float)
    if e.size == 0:
        return []
    groups = [[0]]
    for n in range(1, e.size):
        if e[n] - e[n - 1] < tol:
            groups[-1].append(n)
        else:
            groups.append([n])
    if len(groups) > 1 and e[0] + 2 * np.pi - e[-1] < tol:
        groups[0] = groups.pop() + groups[0]
    return [np.array(g) for g in groups]


def align_degenerate(vectors: np.ndarray, energies, coeff: np.ndarray, tol: float = DEGENERACY_TOL) -> np.ndarray:
    """Rotate each degenerate eigenspace so ``coeff`` overlaps a single basis vector.

    Inside a degenerate eigenspace the eigenbasis is arbitrary; choosing the
    projection of ``coeff`` as its first element makes overlaps well defined.
    """
    V = np.array(vectors, dtype=complex)
    for idx in degenerate_clusters(energies, tol):
        if idx.size < 2:
            continue
        c = V[:, idx].conj().T @ coeff
        if np.linalg.norm(c) == 0:
            continue
        Q, _ = np.linalg.qr(np.column_stack([c, np.eye(idx.size)]))
        V[:, idx] = V[:, idx] @ Q[:, : idx.size]
    return V


def eigenstate_diagnostics(
    spec: FloquetSpectrum, sector: MomentumSector, psi0: np.ndarray
) -> list[EigenstateRow]:
    """Overlap with ``psi0`` (full-space vector), half-chain entropy and magnetizations.

    Degenerate eigenspaces are first aligned with ``psi0``
    (see :func:`align_degenerate`).
    """
    N = sector.N
    coeff = sector.project(np.asarray(psi0))
    vectors = align_degenerate(spec.vectors, spec.quasi_energies, coeff)
    spec = FloquetSpectrum(spec.phases, spec.quasi_energies, vectors)
    ov = np.abs(spec.vectors.conj().T @ coeff) ** 2
    rows = []
    for n in range(len(spec)):
        v = sector.lift(spec.vectors[:, n])
        mx, my, mz = site_magnetization(v, N)
        rows.append(
            EigenstateRow(
                n, float(spec.quasi_energies[n]), float(ov[n]), half_chain_entropy(v, N), mx, my, mz
            )
        )
    return rows


def special_state(rows: list[EigenstateRow]) -> EigenstateRow:
    """Eigenstate with the largest overlap."""
    return max(rows, key=lambda row: row.overlap)


def flag_special_states(rows: list[EigenstateRow], factor: float = SPECIAL_FACTOR) -> list[EigenstateRow]:
    """Eigenstates whose overlap is at least ``factor`` times the median overlap.

    The median is floored at ``1e-14`` so roundoff-level overlaps are never flagged.
    """
    med = max(float(np.median([row.overlap for row in rows])), 1e-14)
    return [row for row in rows if row.overlap >= factor * med]


def entropy_outlier_gap(rows: list[EigenstateRow], special: EigenstateRow, window: float = 0.5) -> float:
    """Median entropy of states within ``window`` in quasi-energy minus the special one's."""
    near = [
        row.entropy
        for row in rows
        if row.index != special.index
        and abs(wrap_phase(row.quasi_energy - special.quasi_energy)) <= window
    ]
    if not near:
        return float("nan")
    return float(np.median(near) - special.entropy)
