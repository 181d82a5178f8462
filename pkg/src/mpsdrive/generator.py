"""Local generators of motion along a tangent direction of a uniform MPS.

All densities are ``d**r x d**r`` matrices acting on ``r`` contiguous sites.
The non-Hermitian density carries the factor ``i``:

    o_j = i * M_r^(dA at j) @ I_r,        -i sum_k shift(o_j, k) |psi> = d/dt |psi>,

where ``M_r`` is the block map and ``I_r`` its left inverse.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from .chain import apply_translation_sum, mps_state_vector, tangent_state_vector
from .errors import BasisMismatch, NotInjective, WeightSumViolation
from .mps import (
    DEFAULT_CAP,
    RANK_RTOL,
    UniformMPS,
    block_map,
    derivative_block_map,
    left_inverse,
)


def middle_site(r: int) -> int:
    """Default derivative position, 1-based; left of center for even ``r``."""
    return (r + 1) // 2


def local_generator(
    psi: UniformMPS, dA: np.ndarray, r: int, j: int, inverse: np.ndarray | None = None
) -> np.ndarray:
    if inverse is None:
        inverse = left_inverse(psi, r)
    return 1j * derivative_block_map(psi, dA, r, j) @ inverse


def generator_parts(psi: UniformMPS, dA: np.ndarray, r: int) -> list[np.ndarray]:
    """``o_j`` for every derivative position ``j = 1..r``."""
    inv = left_inverse(psi, r)
    return [local_generator(psi, dA, r, j, inv) for j in range(1, r + 1)]


def one_hot(r: int, j: int) -> np.ndarray:
    alpha = np.zeros(r)
    alpha[j - 1] = 1.0
    return alpha


def combine_weights(parts: list[np.ndarray], alpha) -> np.ndarray:
    """``sum_j alpha_j o_j``; weights must sum to one (negative entries allowed)."""
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (len(parts),):
        raise ValueError(f"need {len(parts)} weights, got shape {alpha.shape}")
    if abs(alpha.sum() - 1.0) > 1e-12 * max(1.0, np.abs(alpha).sum()):
        raise WeightSumViolation(f"weights sum to {alpha.sum()!r}")
    return sum(a * o for a, o in zip(alpha, parts))


def hermitize(o: np.ndarray) -> np.ndarray:
    return o + o.conj().T


def reduced_density(psi: UniformMPS, r: int) -> np.ndarray:
    """r-site reduced density matrix of the infinite chain."""
    M = block_map(psi, r)
    chi = psi.chi
    Lrow = psi.l_matrix.conj()
    W = np.einsum("ac,bd->abcd", Lrow, psi.r_matrix).reshape(chi * chi, chi * chi)
    return M @ W @ M.conj().T


def dagger_residual_norm(o: np.ndarray, psi: UniformMPS, rho: np.ndarray | None = None) -> float:
    """``<psi| o o^dagger |psi>`` for one density term on the infinite chain."""
    if rho is None:
        r = int(round(np.log(o.shape[0]) / np.log(psi.d)))
        rho = reduced_density(psi, r)
    return float(np.real(np.trace(o @ o.conj().T @ rho)))


def gram_matrix(parts: list[np.ndarray], psi: UniformMPS) -> np.ndarray:
    """``G_jk = Re <psi| o_j o_k^dagger |psi>``."""
    r = len(parts)
    rho = reduced_density(psi, r)
    X = np.array([o.conj().T @ rho for o in parts])  # o_k^dagger rho
    G = np.einsum("jab,kba->jk", np.array(parts), X)
    G = np.real(G)
    return 0.5 * (G + G.T)


def minimize_on_simplex_plane(G: np.ndarray) -> np.ndarray:
    """Minimize ``a^T G a`` subject to ``sum(a) = 1`` (minimum-norm tie break).

    Writes ``a = 1/r + N z`` with ``N`` an orthonormal basis of the plane
    ``sum(z) = 0`` and solves the reduced system with a pseudo-inverse.
    """
    r = G.shape[0]
    a0 = np.full(r, 1.0 / r)
    if r == 1:
        return a0
    Nb = la.null_space(np.ones((1, r)))
    K = Nb.T @ G @ Nb
    z = -la.pinv(K, rtol=1e-12) @ (Nb.T @ G @ a0)
    return a0 + Nb @ z


def optimize_alpha(psi: UniformMPS, dA: np.ndarray, r: int) -> tuple[np.ndarray, float]:
    """Derivative weights minimizing the per-site ``<psi|o o^dagger|psi>``."""
    parts = generator_parts(psi, dA, r)
    G = gram_matrix(parts, psi)
    alpha = minimize_on_simplex_plane(G)
    value = float(alpha @ G @ alpha)
    mid = one_hot(r, middle_site(r))
    # guard against roundoff pushing the optimum above the default placement
    if value > mid @ G @ mid:
        alpha, value = mid, float(mid @ G @ mid)
    return alpha, value


def complement_basis(psi: UniformMPS, r: int) -> np.ndarray:
    """Orthonormal columns spanning the orthogonal complement of the block image."""
    M = block_map(psi, r)
    U, s, _ = la.svd(M, full_matrices=True)
    rank = int(np.sum(s > RANK_RTOL * s[0]))
    if rank < M.shape[1]:
        raise NotInjective(f"block map rank {rank} < chi**2 = {M.shape[1]} at r={r}")
    return U[:, rank:]


def add_complement_term(o: np.ndarray, B: np.ndarray, C: np.ndarray) -> np.ndarray:
    """``o + sum_xy C_xy |x><y|`` with ``x, y`` running over the complement basis."""
    C = np.asarray(C)
    m = B.shape[1]
    if C.shape != (m, m) or B.shape[0] != o.shape[0]:
        raise BasisMismatch(f"C has shape {C.shape}, complement basis has {m} vectors")
    if m == 0:
        return o.copy()
    return o + B @ C @ B.conj().T


def driving_residual(o: np.ndarray, psi: UniformMPS, dA: np.ndarray, N: int) -> float:
    """``|| -i sum_i shift(o, i)|psi_N> - d/dt|psi_N> ||`` on a periodic chain."""
    vec, nrm = mps_state_vector(psi, N)
    target = tangent_state_vector(psi, dA, N, nrm)
    return float(np.linalg.norm(-1j * apply_translation_sum(o, vec, N, psi.d) - target))


def leakage_residual(
    h: np.ndarray, psi: UniformMPS, dA: np.ndarray, N: int, o: np.ndarray | None = None
) -> tuple[float, float]:
    """Leakage ``|gamma> = -i H |psi_N> - d/dt |psi_N>`` on a periodic chain.

    Returns ``||gamma||`` and, when the non-Hermitian density ``o`` is given,
    ``|| gamma + i sum_i shift(o^dagger, i)|psi_N> ||`` (``nan`` otherwise).
    """
    vec, nrm = mps_state_vector(psi, N)
    target = tangent_state_vector(psi, dA, N, nrm)
    gamma = -1j * apply_translation_sum(h, vec, N, psi.d) - target
    ident = float("nan")
    if o is not None:
        ident = float(
            np.linalg.norm(gamma + 1j * apply_translation_sum(o.conj().T, vec, N, psi.d))
        )
    return float(np.linalg.norm(gamma)), ident


@dataclass
class GeneratorBundle:
    o: np.ndarray
    h: np.ndarray
    alpha: np.ndarray
    leakage_per_site: float
    r: int
    t: float | None = None
    meta: dict = field(default_factory=dict)

    def to_json(self) -> str:
        from .pauli import pauli_expand_canonical

        pauli = {}
        if self.o.shape[0] == 2**self.r:
            exp = pauli_expand_canonical(self.h)
            pauli = {k: float(v) for k, v in exp.coeffs.items()}
            pauli["identity"] = float(exp.scalar)
        return json.dumps(
            {
                "r": self.r,
                "t": self.t,
                "alpha": self.alpha.tolist(),
                "leakage_per_site": self.leakage_per_site,
                "pauli": pauli,
            }
        )


def build_generator(
    psi: UniformMPS,
    dA: np.ndarray,
    r: int,
    alpha=None,
    optimize: bool = False,
    t: float | None = None,
) -> GeneratorBundle:
    """Non-Hermitian density, its Hermitian part and per-site leakage.

    ``alpha`` defaults to the middle-site placement; ``optimize=True`` uses
    :func:`optimize_alpha` instead.
    """
    parts = generator_parts(psi, dA, r)
    if optimize:
        alpha = minimize_on_simplex_plane(gram_matrix(parts, psi))
    elif alpha is None:
        alpha = one_hot(r, middle_site(r))
    alpha = np.asarray(alpha, dtype=float)
    o = combine_weights(parts, alpha)
    return GeneratorBundle(
        o=o,
        h=hermitize(o),
        alpha=alpha,
        leakage_per_site=dagger_residual_norm(o, psi),
        r=r,
        t=t,
    )


__all__ = [
    "DEFAULT_CAP",
    "GeneratorBundle",
    "add_complement_term",
    "build_generator",
    "combine_weights",
    "complement_basis",
    "dagger_residual_norm",
    "driving_residual",
    "generator_parts",
    "gram_matrix",
    "hermitize",
    "leakage_residual",
    "local_generator",
    "middle_site",
    "minimize_on_simplex_plane",
    "one_hot",
    "optimize_alpha",
    "reduced_density",
]
