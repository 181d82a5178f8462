"""Dense state vectors and translation-invariant sums on a periodic chain.

Basis states are ordered with site 0 as the most significant tensor factor,
matching ``np.kron`` ordering. ``shift(o, i)`` acts on sites ``i, ..., i+r-1``
(mod N) with the operator's first factor on site ``i``.
"""

from __future__ import annotations

import numpy as np

from .errors import ResourceLimit
from .mps import UniformMPS

MAX_DENSE_SITES = 14


def _check_sites(N: int, d: int = 2, max_sites: int = MAX_DENSE_SITES) -> None:
    if N > max_sites:
        raise ResourceLimit(
            f"N={N} exceeds dense cap {max_sites} "
            f"(a dense {d}**N x {d}**N complex matrix needs {16 * d ** (2 * N) / 2**30:.1f} GiB)"
        )


def _op_range(op: np.ndarray, d: int) -> int:
    r = int(round(np.log(op.shape[0]) / np.log(d)))
    if d**r != op.shape[0] or op.shape[0] != op.shape[1]:
        raise ValueError(f"operator of shape {op.shape} is not a d**r x d**r matrix for d={d}")
    return r


def mps_state_vector(psi, N: int, max_sites: int = MAX_DENSE_SITES) -> tuple[np.ndarray, float]:
    """Periodic N-site MPS amplitudes ``tr(A^s1 ... A^sN)``, normalized.

    Returns the unit vector and the norm it was divided by.
    """
    A = psi.tensor if isinstance(psi, UniformMPS) else np.asarray(psi, complex)
    d = A.shape[0]
    _check_sites(N, d, max_sites)
    P = A
    for _ in range(N - 1):
        P = np.einsum("sab,tbc->stac", P, A).reshape(-1, A.shape[1], A.shape[2])
    vec = np.einsum("saa->s", P)
    nrm = float(np.linalg.norm(vec))
    return vec / nrm, nrm


def tangent_state_vector(
    psi, dA: np.ndarray, N: int, norm: float | None = None, max_sites: int = MAX_DENSE_SITES
) -> np.ndarray:
    """Sum over sites of the MPS with ``dA`` inserted once, ``sum_j tr(A..dA_j..A)``.

    Divided by ``norm`` (default: the norm of the N-site MPS) so it is the
    derivative of the vector returned by :func:`mps_state_vector` up to
    the change of that norm.
    """
    A = psi.tensor if isinstance(psi, UniformMPS) else np.asarray(psi, complex)
    dA = np.asarray(dA, complex)
    d = A.shape[0]
    _check_sites(N, d, max_sites)
    if norm is None:
        norm = mps_state_vector(A, N, max_sites)[1]
    P, Q = A, dA
    for _ in range(N - 1):
        Q = (np.einsum("sab,tbc->stac", Q, A) + np.einsum("sab,tbc->stac", P, dA)).reshape(
            -1, A.shape[1], A.shape[2]
        )
        P = np.einsum("sab,tbc->stac", P, A).reshape(-1, A.shape[1], A.shape[2])
    return np.einsum("saa->s", Q) / norm


def apply_shift(op: np.ndarray, vec: np.ndarray, N: int, i: int, d: int = 2) -> np.ndarray:
    """Apply ``shift(op, i)`` to a state vector or a stack of column vectors."""
    r = _op_range(op, d)
    if r > N:
        raise ValueError(f"operator range {r} exceeds chain length {N}")
    extra = vec.shape[1:]
    t = vec.reshape((d,) * N + extra)
    perm = [(i + k) % N for k in range(N)]
    tail = list(range(N, N + len(extra)))
    t = t.transpose(perm + tail).reshape((d**r, -1))
    t = (op @ t).reshape((d,) * N + extra)
    inv = np.argsort(perm).tolist()
    return t.transpose(inv + tail).reshape(vec.shape)


def apply_translation_sum(op: np.ndarray, vec: np.ndarray, N: int, d: int = 2) -> np.ndarray:
    """``sum_i shift(op, i) vec`` on a periodic chain of ``N`` sites."""
    out = np.zeros(vec.shape, dtype=complex)
    for i in range(N):
        out += apply_shift(op, vec, N, i, d)
    return out


def embed_operator(
    h: np.ndarray, N: int, d: int = 2, max_sites: int = MAX_DENSE_SITES
) -> np.ndarray:
    """Dense ``sum_i shift(h, i)`` with periodic wrap-around."""
    r = _op_range(h, d)
    if N < r:
        raise ValueError(f"N={N} is smaller than the operator range r={r}")
    _check_sites(N, d, max_sites)
    H0 = np.kron(h, np.eye(d ** (N - r))).reshape((d,) * (2 * N))
    H = np.zeros((d**N, d**N), dtype=complex)
    for i in range(N):
        # site i of the shifted term is axis 0 of the unshifted one
        perm = [(k - i) % N for k in range(N)]
        H += H0.transpose(perm + [N + p for p in perm]).reshape(d**N, d**N)
    return H


def translation_operator(N: int, d: int = 2) -> np.ndarray:
    """Permutation matrix moving the content of site k to site k+1."""
    idx = np.arange(d**N).reshape((d,) * N)
    perm = [(k - 1) % N for k in range(N)]
    src = idx.transpose(perm).reshape(-1)
    T = np.zeros((d**N, d**N))
    T[np.arange(d**N), src] = 1.0
    return T
