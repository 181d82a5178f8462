"""Finite-chain driving along an MPS loop and the resulting Floquet unitary.

Everything runs on a periodic chain of ``N`` spins. Because the driving
Hamiltonian is a translation-invariant sum, the propagator is block diagonal
in momentum, and the zero-momentum block (which contains the MPS) is
propagated on its own with ``H_0 = N * P^T (h (x) 1) P``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from .chain import MAX_DENSE_SITES, embed_operator, mps_state_vector
from .errors import NotUnitary, ResourceLimit, ToleranceNotMet
from .generator import (
    combine_weights,
    complement_basis,
    generator_parts,
    gram_matrix,
    hermitize,
    middle_site,
    minimize_on_simplex_plane,
    one_hot,
)
from .pauli import optimize_complement, pauli_expand_canonical

MAX_PROPAGATION_SITES = 12


@dataclass(frozen=True)
class MomentumSector:
    """Zero-momentum subspace spanned by normalized necklace states."""

    N: int
    basis: sp.csr_matrix  # 2**N x dim, real, orthonormal columns
    representatives: np.ndarray

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def lift(self, v: np.ndarray) -> np.ndarray:
        return self.basis @ v

    def project(self, v: np.ndarray) -> np.ndarray:
        return self.basis.T @ v


def zero_momentum_sector(N: int, max_sites: int = MAX_DENSE_SITES) -> MomentumSector:
    if N > max_sites:
        raise ResourceLimit(f"N={N} exceeds cap {max_sites}")
    states = np.arange(2**N)
    mask = 2**N - 1
    rots = np.empty((N, states.size), dtype=np.int64)
    cur = states.copy()
    for k in range(N):
        rots[k] = cur
        cur = ((cur << 1) | (cur >> (N - 1))) & mask
    rep = rots.min(axis=0)
    reps, col = np.unique(rep, return_inverse=True)
    counts = np.bincount(col)
    data = 1.0 / np.sqrt(counts[col])
    P = sp.csr_matrix((data, (states, col)), shape=(2**N, reps.size))
    return MomentumSector(N=N, basis=P, representatives=reps)


def restrict(U: np.ndarray, sector: MomentumSector) -> np.ndarray:
    P = sector.basis
    return np.asarray(P.T @ (U @ P))


def sector_hamiltonian(h: np.ndarray, sector: MomentumSector) -> np.ndarray:
    """``P^T (sum_i shift(h, i)) P`` computed as ``N P^T (h (x) 1) P``."""
    N = sector.N
    r = int(round(math.log2(h.shape[0])))
    H0 = sp.kron(sp.csr_matrix(h), sp.identity(2 ** (N - r), format="csr"), format="csr")
    P = sector.basis
    H = (P.T @ (H0 @ P)).toarray() * N
    return 0.5 * (H + H.conj().T)


@dataclass
class DriveOptions:
    """How the Hermitian density is built at each time.

    ``alpha``: ``"middle"`` (default) or ``"optimal"`` derivative weights.
    ``complement``: also optimize the complement freedom against the
    range ``r - 1`` solution (off by default).
    """

    alpha: str = "middle"
    complement: bool = False
    atol: float = 1e-9
    max_steps: int = 100_000
    min_step: float = 1e-12


class GeneratorPath:
    """Hermitian generator density ``h_r(t)`` along a loop, memoized per time."""

    def __init__(self, path, r: int, options: DriveOptions | None = None):
        self.path = path
        self.r = r
        self.options = options or DriveOptions()
        self._cache: dict[float, np.ndarray] = {}

    @property
    def period(self) -> float:
        return self.path.period

    def _density_for_range(self, psi, dA, r):
        parts = generator_parts(psi, dA, r)
        if self.options.alpha == "optimal":
            alpha = minimize_on_simplex_plane(gram_matrix(parts, psi))
        elif self.options.alpha == "middle":
            alpha = one_hot(r, middle_site(r))
        else:
            raise ValueError(f"unknown alpha mode {self.options.alpha!r}")
        return combine_weights(parts, alpha)

    def density(self, t: float) -> np.ndarray:
        key = float(t)
        if key in self._cache:
            return self._cache[key]
        psi, dA = self.path.state(t)
        if not self.options.complement or psi.d != 2:
            h = hermitize(self._density_for_range(psi, dA, self.r))
        else:
            r0 = psi.injective_range or 1
            h_prev = None
            for r in range(r0, self.r + 1):
                o = self._density_for_range(psi, dA, r)
                if h_prev is None:
                    h = hermitize(o)
                else:
                    _, _, h = optimize_complement(h_prev, o, complement_basis(psi, r))
                h_prev = pauli_expand_canonical(h)
        if len(self._cache) > 4096:
            self._cache.clear()
        self._cache[key] = h
        return h

    def hamiltonian(self, t: float, N: int, sector: MomentumSector | None = None) -> np.ndarray:
        h = self.density(t)
        if sector is not None:
            return sector_hamiltonian(h, sector)
        return embed_operator(h, N)


_GAUSS = (0.5 - math.sqrt(3) / 6, 0.5 + math.sqrt(3) / 6)


def _magnus4(Hfun, t: float, dt: float) -> np.ndarray:
    """Fourth-order Magnus step ``exp(-i K)`` on two Gauss points."""
    H1 = Hfun(t + _GAUSS[0] * dt)
    H2 = Hfun(t + _GAUSS[1] * dt)
    comm = H2 @ H1 - H1 @ H2
    K = 0.5 * dt * (H1 + H2) - 1j * (math.sqrt(3) / 12) * dt * dt * comm
    K = 0.5 * (K + K.conj().T)
    w, V = la.eigh(K)
    return (V * np.exp(-1j * w)) @ V.conj().T


def time_ordered_exponential(
    Hfun,
    t0: float,
    t1: float,
    Y0: np.ndarray,
    atol: float = 1e-9,
    dt0: float | None = None,
    max_steps: int = 100_000,
    min_step: float = 1e-12,
) -> tuple[np.ndarray, dict]:
    """Solve ``dY/dt = -i H(t) Y`` from ``t0`` to ``t1`` with adaptive Magnus steps.

    The local error of each step is estimated by step doubling and kept below
    ``atol`` in spectral norm; the two-half-step result is the one kept.
    """
    Y = np.array(Y0, dtype=complex)
    t = t0
    span = t1 - t0
    if span <= 0:
        return Y, {"steps": 0, "rejected": 0}
    dt = dt0 if dt0 is not None else span / 16
    steps = rejected = 0
    while t < t1 - 1e-14 * max(1.0, abs(t1)):
        dt = min(dt, t1 - t)
        full = _magnus4(Hfun, t, dt)
        half = _magnus4(Hfun, t + 0.5 * dt, 0.5 * dt) @ _magnus4(Hfun, t, 0.5 * dt)
        err = la.norm(full - half, 2)
        if err <= atol or dt <= min_step * max(1.0, abs(span)):
            if err > atol:
                raise ToleranceNotMet(f"step floor reached at t={t:.6f} with error {err:.2e}")
            Y = half @ Y
            t += dt
            steps += 1
            if steps > max_steps:
                raise ToleranceNotMet(f"step cap {max_steps} reached at t={t:.6f}")
        else:
            rejected += 1
        fac = 0.9 * (atol / err) ** 0.2 if err > 0 else 2.0
        dt = dt * min(2.0, max(0.2, fac))
    return Y, {"steps": steps, "rejected": rejected, "last_dt": dt}


def propagate(
    path,
    r: int,
    N: int,
    t_final: float,
    options: DriveOptions | None = None,
    sector: MomentumSector | bool | None = True,
    Y0: np.ndarray | None = None,
) -> np.ndarray:
    """Propagator ``U_r(t_final)`` on the zero-momentum sector or the full space.

    ``sector=True`` builds the zero-momentum sector, ``False``/``None`` uses the
    full ``2**N`` space (dense, small ``N`` only). ``Y0`` defaults to the
    identity; pass a state (or columns) to propagate only those.
    """
    options = options or DriveOptions()
    if N > MAX_PROPAGATION_SITES:
        raise ResourceLimit(f"N={N} exceeds propagation cap {MAX_PROPAGATION_SITES}")
    if N < r:
        raise ValueError(f"N={N} must be at least r={r}")
    gp = path if isinstance(path, GeneratorPath) else GeneratorPath(path, r, options)
    sec = zero_momentum_sector(N) if sector is True else (sector or None)
    dim = sec.dim if sec is not None else 2**N
    Y0 = np.eye(dim, dtype=complex) if Y0 is None else Y0

    def Hfun(t):
        return gp.hamiltonian(t, N, sec)

    U, _ = time_ordered_exponential(
        Hfun, 0.0, t_final, Y0, options.atol, max_steps=options.max_steps, min_step=options.min_step
    )
    return U


@dataclass
class FidelityPoint:
    t: float
    F: float
    f: float


def fidelity_trace(
    path, r: int, N: int, grid, options: DriveOptions | None = None
) -> list[FidelityPoint]:
    """``F(t) = |<psi(t)|U_r(t)|psi(0)>|^2`` and ``f = -ln F / N`` on a time grid."""
    options = options or DriveOptions()
    gp = GeneratorPath(path, r, options)
    sec = zero_momentum_sector(N)
    grid = np.asarray(grid, dtype=float)

    def Hfun(t):
        return gp.hamiltonian(t, N, sec)

    def sector_state(t):
        psi, _ = path.state(t)
        return sec.project(mps_state_vector(psi, N)[0])

    v = sector_state(0.0)
    t_prev = 0.0
    out = []
    for t in grid:
        if t > t_prev:
            v, _ = time_ordered_exponential(
                Hfun, t_prev, t, v, options.atol, max_steps=options.max_steps,
                min_step=options.min_step,
            )
            t_prev = t
        F = float(abs(np.vdot(sector_state(t), v)) ** 2)
        out.append(FidelityPoint(float(t), F, float(-np.log(F) / N) if F > 0 else math.inf))
    return out


@dataclass
class FloquetSpectrum:
    phases: np.ndarray  # unit-modulus eigenvalues
    quasi_energies: np.ndarray  # e = i ln(phase), on (-pi, pi], ascending
    vectors: np.ndarray  # orthonormal columns

    def __len__(self) -> int:
        return self.phases.size


def unitarity_defect(U: np.ndarray) -> float:
    return float(la.norm(U.conj().T @ U - np.eye(U.shape[0]), "fro"))


def quasi_energy(phases: np.ndarray) -> np.ndarray:
    """``i ln(phase)`` on the principal branch, mapped to ``(-pi, pi]``."""
    e = -np.angle(phases)
    return np.where(e <= -np.pi, e + 2 * np.pi, e)


def floquet_spectrum(U: np.ndarray, tol: float = 1e-6) -> FloquetSpectrum:
    """Eigen-decomposition of a unitary via its complex Schur form."""
    U = np.asarray(U, dtype=complex)
    defect = unitarity_defect(U)
    if defect > tol:
        raise NotUnitary(f"unitarity defect {defect:.2e} exceeds {tol:.0e}")
    T, Z = la.schur(U, output="complex")
    phases = np.diag(T).copy()
    e = quasi_energy(phases)
    order = np.argsort(e, kind="stable")
    return FloquetSpectrum(phases=phases[order], quasi_energies=e[order], vectors=Z[:, order])


__all__ = [
    "DriveOptions",
    "FidelityPoint",
    "FloquetSpectrum",
    "GeneratorPath",
    "MomentumSector",
    "fidelity_trace",
    "floquet_spectrum",
    "propagate",
    "quasi_energy",
    "restrict",
    "sector_hamiltonian",
    "time_ordered_exponential",
    "unitarity_defect",
    "zero_momentum_sector",
]
