"""Uniform matrix product states and their transfer-matrix data.

Site tensors are stored as complex arrays of shape ``(d, chi, chi)`` with
``A[s, a, b]`` the physical index ``s`` and left/right bond indices ``a, b``.
Vectors in the doubled bond space use the row-major flattening ``(a, a')``
of ``chi x chi`` matrices, so that

    T[(a, a'), (b, b')] = sum_s A[s, a, b] * conj(A[s, a', b']).

With this convention the right fixed point reshaped to a matrix ``Rm``
satisfies ``sum_s A^s Rm A^s^dagger = Rm`` and the left fixed point ``Lm``
satisfies ``sum_s A^s^dagger Lm A^s = Lm``; the pairing is
``(L|R) = vdot(L, R) = tr(Lm^dagger Rm)``.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from .errors import (
    DegenerateDominantEigenvalue,
    IllConditioned,
    NonImaginaryOverlap,
    NotInjective,
    ResourceLimit,
)

RANK_RTOL = 1e-10
PINV_RTOL = 1e-12
UNIQUENESS_RTOL = 1e-10
DEFAULT_CAP = 4096
DEFAULT_R_MAX = 8


@dataclass(frozen=True, eq=False)
class TransferOperator:
    matrix: np.ndarray
    eigenvalues: np.ndarray  # sorted by descending modulus


@dataclass(frozen=True, eq=False)
class UniformMPS:
    """Normalized translation-invariant MPS with cached fixed-point data.

    ``injective_range`` is the smallest block length with a full-rank block
    map, or ``None`` if none was found up to the search limit.
    """

    tensor: np.ndarray
    lambda1: float
    L: np.ndarray
    R: np.ndarray
    lambda2_abs: float
    injective_range: int | None = field(default=None)

    @property
    def d(self) -> int:
        return self.tensor.shape[0]

    @property
    def chi(self) -> int:
        return self.tensor.shape[1]

    @property
    def l_matrix(self) -> np.ndarray:
        return self.L.reshape(self.chi, self.chi)

    @property
    def r_matrix(self) -> np.ndarray:
        return self.R.reshape(self.chi, self.chi)

    def transfer(self) -> TransferOperator:
        return transfer_matrix(self.tensor)


def _as_tensor(x) -> np.ndarray:
    A = x.tensor if isinstance(x, UniformMPS) else np.asarray(x)
    A = np.asarray(A, dtype=complex)
    if A.ndim != 3 or A.shape[1] != A.shape[2]:
        raise ValueError(f"site tensor must have shape (d, chi, chi), got {A.shape}")
    if A.shape[0] < 2:
        raise ValueError("physical dimension d must be >= 2")
    if not np.all(np.isfinite(A)):
        raise ValueError("site tensor has non-finite entries")
    return A


def mixed_transfer(B: np.ndarray, A: np.ndarray) -> np.ndarray:
    """Return ``sum_s B^s (x) conj(A^s)`` as a ``chi**2 x chi**2`` matrix."""
    d, chi, _ = A.shape
    T = np.einsum("sab,scd->acbd", B, A.conj())
    return T.reshape(chi * chi, chi * chi)


def transfer_matrix(A) -> TransferOperator:
    A = _as_tensor(A)
    T = mixed_transfer(A, A)
    ev = la.eigvals(T)
    ev = ev[np.argsort(-np.abs(ev), kind="stable")]
    return TransferOperator(matrix=T, eigenvalues=ev)


def _fix_phase(R: np.ndarray, chi: int) -> np.ndarray:
    tr = np.trace(R.reshape(chi, chi))
    if abs(tr) > 0:
        R = R * (abs(tr) / tr)
    return R / np.linalg.norm(R)


def fixed_points(T: TransferOperator) -> tuple[float, np.ndarray, np.ndarray]:
    """Dominant eigenvalue and the left/right eigenvectors with ``(L|R) = 1``.

    ``R`` is phased so that its matrix form has positive trace and scaled to
    unit 2-norm.

    Raises:
        DegenerateDominantEigenvalue: if the two leading moduli coincide.
    """
    M = np.asarray(T.matrix if isinstance(T, TransferOperator) else T, dtype=complex)
    n = M.shape[0]
    chi = int(round(np.sqrt(n)))
    w, vl, vr = la.eig(M, left=True, right=True)
    order = np.argsort(-np.abs(w), kind="stable")
    w, vl, vr = w[order], vl[:, order], vr[:, order]
    if n > 1 and abs(w[0]) - abs(w[1]) <= UNIQUENESS_RTOL * abs(w[0]):
        raise DegenerateDominantEigenvalue(
            f"|lambda1| = {abs(w[0]):.3e}, |lambda2| = {abs(w[1]):.3e}"
        )
    lam = w[0]
    R = _fix_phase(vr[:, 0], chi)
    L = vl[:, 0]
    L = L / np.conj(np.vdot(L, R))
    lam1 = float(lam.real) if abs(lam.imag) <= 1e-12 * abs(lam) else lam
    return lam1, L, R


def normalize(A, r_max: int = DEFAULT_R_MAX, cap: int = DEFAULT_CAP) -> UniformMPS:
    """Rescale ``A`` so that the dominant transfer eigenvalue is one."""
    A = _as_tensor(A)
    lam1, _, _ = fixed_points(transfer_matrix(A))
    A = A / np.sqrt(lam1)
    T = transfer_matrix(A)
    lam1, L, R = fixed_points(T)
    lam2 = float(abs(T.eigenvalues[1])) if len(T.eigenvalues) > 1 else 0.0
    psi = UniformMPS(tensor=A, lambda1=float(np.real(lam1)), L=L, R=R, lambda2_abs=lam2)
    r_inj = None
    d, chi = A.shape[0], A.shape[1]
    for r in range(1, r_max + 1):
        if d**r > cap:
            break
        if d**r >= chi * chi and injectivity_rank(psi, r) == chi * chi:
            r_inj = r
            break
    return UniformMPS(
        tensor=A, lambda1=psi.lambda1, L=L, R=R, lambda2_abs=lam2, injective_range=r_inj
    )


def block_tensor(tensors: list[np.ndarray]) -> np.ndarray:
    """Contract a list of site tensors to shape ``(d**r, chi, chi)``."""
    P = tensors[0]
    for B in tensors[1:]:
        P = np.einsum("sab,tbc->stac", P, B).reshape(-1, P.shape[1], B.shape[2])
    return P


def _check_cap(d: int, r: int, cap: int) -> None:
    if r < 1:
        raise ValueError("range r must be >= 1")
    if d**r > cap:
        raise ResourceLimit(f"d**r = {d**r} exceeds cap {cap}")


def block_map(psi, r: int, cap: int = DEFAULT_CAP) -> np.ndarray:
    """The ``d**r x chi**2`` map from open bond pairs ``(a, b)`` to r-site states."""
    A = _as_tensor(psi)
    _check_cap(A.shape[0], r, cap)
    P = block_tensor([A] * r)
    return P.reshape(P.shape[0], -1)


def derivative_block_map(psi, dA: np.ndarray, r: int, j: int, cap: int = DEFAULT_CAP) -> np.ndarray:
    """Block map with the ``j``-th tensor (1-based) replaced by ``dA``."""
    A = _as_tensor(psi)
    _check_cap(A.shape[0], r, cap)
    if not 1 <= j <= r:
        raise ValueError(f"derivative position j={j} outside 1..{r}")
    tensors = [A] * r
    tensors[j - 1] = np.asarray(dA, dtype=complex)
    P = block_tensor(tensors)
    return P.reshape(P.shape[0], -1)


def vertical_transfer(T_power: np.ndarray, chi: int) -> np.ndarray:
    """Reorder a (power of the) transfer matrix into the vertical orientation.

    The result equals ``M_r^dagger M_r`` when ``T_power = T**r``.
    """
    T4 = np.asarray(T_power).reshape(chi, chi, chi, chi)
    return np.conj(T4.transpose(0, 2, 1, 3)).reshape(chi * chi, chi * chi)


def injectivity_rank(psi, r: int, cap: int = DEFAULT_CAP) -> int:
    M = block_map(psi, r, cap)
    s = la.svdvals(M)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > RANK_RTOL * s[0]))


def left_inverse(psi, r: int, cap: int = DEFAULT_CAP) -> np.ndarray:
    """Moore-Penrose left inverse ``(M^dagger M)^-1 M^dagger`` of the block map.

    Raises:
        NotInjective: rank of the block map is below ``chi**2``.
        IllConditioned: smallest singular value below ``1e-12`` of the largest.
    """
    M = block_map(psi, r, cap)
    n = M.shape[1]
    U, s, Vh = la.svd(M, full_matrices=False)
    rank = int(np.sum(s > RANK_RTOL * s[0])) if s.size else 0
    if rank < n:
        raise NotInjective(f"block map rank {rank} < chi**2 = {n} at r={r}")
    if s[-1] < PINV_RTOL * s[0]:
        raise IllConditioned(f"block map condition number {s[0] / s[-1]:.3e}")
    return (Vh.conj().T / s) @ U.conj().T


def gauge_overlap(dA: np.ndarray, psi: UniformMPS) -> complex:
    """``(L| sum_s dA^s (x) conj(A^s) |R)``."""
    return complex(np.vdot(psi.L, mixed_transfer(np.asarray(dA, complex), psi.tensor) @ psi.R))


def project_gauge(dA_raw: np.ndarray, psi: UniformMPS) -> tuple[np.ndarray, complex]:
    """Remove the component of a tangent tensor along ``A`` itself.

    Returns the projected tensor and the removed overlap ``c``. A real part of
    ``c`` above ``1e-8`` means the raw direction changes the norm and triggers
    a :class:`NonImaginaryOverlap` warning.
    """
    dA_raw = np.asarray(dA_raw, dtype=complex)
    c = gauge_overlap(dA_raw, psi)
    if abs(c.real) > 1e-8:
        warnings.warn(f"gauge overlap has real part {c.real:.3e}", NonImaginaryOverlap, stacklevel=2)
    return dA_raw - c * psi.tensor, c


def canonicalize_right(psi: UniformMPS) -> tuple[UniformMPS, np.ndarray]:
    """Gauge transform to ``R = identity`` and ``L >= 0`` with ``tr L = 1``.

    Returns the transformed state and ``Y`` with ``A' = Y A Y^-1``; tangent
    tensors transform as ``Y dA Y^-1``.
    """
    chi = psi.chi
    Rm = psi.r_matrix
    Rm = 0.5 * (Rm + Rm.conj().T)
    w, V = la.eigh(Rm)
    if w[0] <= PINV_RTOL * w[-1]:
        raise IllConditioned(f"right fixed point is singular: eigenvalues {w}")
    Y = (V / np.sqrt(w)) @ V.conj().T
    Yinv = (V * np.sqrt(w)) @ V.conj().T
    A2 = np.einsum("ab,sbc,cd->sad", Y, psi.tensor, Yinv)
    # L' = Y^-dagger Lm Y^-1, trace one since tr(Lm Rm) = 1
    Lm = Yinv.conj().T @ psi.l_matrix @ Yinv
    Lm = 0.5 * (Lm + Lm.conj().T)
    Lm = Lm / np.trace(Lm).real
    out = UniformMPS(
        tensor=A2,
        lambda1=psi.lambda1,
        L=Lm.reshape(-1),
        R=np.eye(chi, dtype=complex).reshape(-1),
        lambda2_abs=psi.lambda2_abs,
        injective_range=psi.injective_range,
    )
    return out, Y


def tensor_to_json(A: np.ndarray) -> str:
    A = np.asarray(A, dtype=complex)
    return json.dumps(
        {"d": A.shape[0], "chi": A.shape[1], "re": A.real.tolist(), "im": A.imag.tolist()}
    )


def tensor_from_json(text: str) -> np.ndarray:
    obj = json.loads(text)
    A = np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)
    if A.shape != (obj["d"], obj["chi"], obj["chi"]):
        raise ValueError(f"shape {A.shape} does not match d={obj['d']}, chi={obj['chi']}")
    return A
