"""Pauli-string expansion of spin-1/2 densities, with translation bookkeeping.

Coefficients use ``c_s = 2**-r tr(sigma_s^dagger h)``. A density ``h`` on ``r``
sites and its translates sum to the same chain operator as long as every
string is re-anchored at its first non-identity factor, so the canonical key
of a string is the string with leading and trailing identities stripped
(``"0z0" -> "z"``). The all-identity part is kept as a separate scalar.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import BasisMismatch, Unsupported

SYMBOLS = "0xyz"
PAULI = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)
# _TO_PAULI[s, (a, b)] = conj(sigma_s[a, b]) / 2 = sigma_s[b, a] / 2
_TO_PAULI = PAULI.conj().reshape(4, 4) / 2
# _FROM_PAULI[(a, b), s] = sigma_s[a, b]
_FROM_PAULI = PAULI.reshape(4, 4).T


def _range_of(h: np.ndarray) -> int:
    n = h.shape[-1]
    r = n.bit_length() - 1
    if 2**r != n or h.shape[-2] != n:
        raise Unsupported(f"Pauli expansion needs a 2**r x 2**r matrix (d = 2), got {h.shape}")
    return r


def _pair_axes(h: np.ndarray, r: int) -> np.ndarray:
    """``(..., 2**r, 2**r) -> (..., 4, ..., 4)`` with site-k pair ``(a_k, b_k)``."""
    lead = h.shape[:-2]
    t = h.reshape(lead + (2,) * (2 * r))
    nl = len(lead)
    order = list(range(nl)) + [nl + x for k in range(r) for x in (k, r + k)]
    return t.transpose(order).reshape(lead + (4,) * r)


def _unpair_axes(t: np.ndarray, r: int) -> np.ndarray:
    lead = t.shape[:-r] if r else t.shape
    nl = len(lead)
    t = t.reshape(lead + (2,) * (2 * r))
    order = list(range(nl)) + [nl + 2 * k for k in range(r)] + [nl + 2 * k + 1 for k in range(r)]
    return t.transpose(order).reshape(lead + (2**r, 2**r))


def _apply_each_site(t: np.ndarray, mat: np.ndarray, r: int) -> np.ndarray:
    nl = t.ndim - r
    for k in range(r):
        t = np.moveaxis(np.tensordot(mat, t, axes=([1], [nl + k])), 0, nl + k)
    return t


def pauli_coefficients(h: np.ndarray) -> np.ndarray:
    """Raw coefficients as an array of shape ``(4,)*r`` (symbol order ``0xyz``).

    Leading batch dimensions are allowed.
    """
    h = np.asarray(h, dtype=complex)
    r = _range_of(h)
    return _apply_each_site(_pair_axes(h, r), _TO_PAULI, r)


def pauli_matrix(coeffs: np.ndarray) -> np.ndarray:
    """Inverse of :func:`pauli_coefficients`."""
    coeffs = np.asarray(coeffs, dtype=complex)
    r = coeffs.ndim
    return _unpair_axes(_apply_each_site(coeffs, _FROM_PAULI, r), r)


def canonical_key(string: str) -> str:
    return string.strip("0")


@lru_cache(maxsize=None)
def canonical_keys(r: int) -> tuple[str, ...]:
    """Every canonical key reachable at range ``r``; ``""`` is the identity."""
    keys = [""]
    for n in range(1, r + 1):
        for mid in itertools.product(SYMBOLS, repeat=max(n - 2, 0)):
            for a in "xyz":
                if n == 1:
                    keys.append(a)
                    continue
                for b in "xyz":
                    keys.append(a + "".join(mid) + b)
    return tuple(keys)


@lru_cache(maxsize=None)
def _aggregation(r: int, r_target: int) -> np.ndarray:
    """0/1 matrix summing raw strings of range ``r`` into keys of ``r_target``."""
    keys = canonical_keys(r_target)
    pos = {k: i for i, k in enumerate(keys)}
    S = np.zeros((len(keys), 4**r))
    for n, s in enumerate(itertools.product(SYMBOLS, repeat=r)):
        S[pos[canonical_key("".join(s))], n] = 1.0
    return S


def canonical_vector(h: np.ndarray, r_target: int | None = None) -> np.ndarray:
    """Canonical coefficients of ``h`` indexed by ``canonical_keys(r_target)``.

    Batch dimensions are allowed. ``r_target`` defaults to the range of ``h``
    and must not be smaller.
    """
    h = np.asarray(h, dtype=complex)
    r = _range_of(h)
    r_target = r if r_target is None else r_target
    if r_target < r:
        raise ValueError(f"target range {r_target} is smaller than operator range {r}")
    raw = pauli_coefficients(h).reshape(h.shape[:-2] + (4**r,))
    return raw @ _aggregation(r, r_target).T


@dataclass
class PauliExpansion:
    """Canonical Pauli coefficients of a density of range ``r``."""

    r: int
    coeffs: dict[str, float] = field(default_factory=dict)
    scalar: float = 0.0

    def vector(self, r_target: int) -> np.ndarray:
        """Coefficients on ``canonical_keys(r_target)``, zero padded."""
        keys = canonical_keys(r_target)
        v = np.zeros(len(keys), dtype=np.result_type(self.scalar, *self.coeffs.values(), float))
        v[0] = self.scalar
        pos = {k: i for i, k in enumerate(keys)}
        for k, c in self.coeffs.items():
            if k not in pos:
                raise BasisMismatch(f"string {k!r} does not fit in range {r_target}")
            v[pos[k]] = c
        return v

    def density(self) -> np.ndarray:
        """Left-anchored density reproducing the same translation-invariant sum."""
        out = self.scalar * np.eye(2**self.r, dtype=complex)
        for k, c in self.coeffs.items():
            op = np.array([[1.0]], dtype=complex)
            for ch in k:
                op = np.kron(op, PAULI[SYMBOLS.index(ch)])
            out += c * np.kron(op, np.eye(2 ** (self.r - len(k))))
        return out

    def support_weights(self) -> dict[int, float]:
        """Sum of squared coefficients grouped by support length."""
        w: dict[int, float] = {}
        for k, c in self.coeffs.items():
            w[len(k)] = w.get(len(k), 0.0) + float(abs(c) ** 2)
        return dict(sorted(w.items()))


def _from_vector(v: np.ndarray, r: int, tol: float = 0.0) -> PauliExpansion:
    if np.max(np.abs(np.imag(v)), initial=0.0) < 1e-12:
        v = np.real(v)
    keys = canonical_keys(r)
    coeffs = {k: v[i] for i, k in enumerate(keys) if i and abs(v[i]) > tol}
    return PauliExpansion(r=r, coeffs=coeffs, scalar=v[0])


def pauli_expand_canonical(h: np.ndarray, tol: float = 1e-14) -> PauliExpansion:
    """Canonical expansion; coefficients below ``tol`` in modulus are dropped."""
    h = np.asarray(h, dtype=complex)
    r = _range_of(h)
    return _from_vector(canonical_vector(h), r, tol)


def operator_distance(a: PauliExpansion, b: PauliExpansion) -> float:
    """Euclidean distance of canonical coefficient vectors, identity included."""
    r = max(a.r, b.r)
    return float(np.linalg.norm(a.vector(r) - b.vector(r)))


def _hermitian_basis(m: int) -> np.ndarray:
    """Real-orthogonal basis of ``m x m`` Hermitian matrices, shape ``(m*m, m, m)``."""
    out = []
    for i in range(m):
        E = np.zeros((m, m), complex)
        E[i, i] = 1.0
        out.append(E)
    for i in range(m):
        for j in range(i + 1, m):
            E = np.zeros((m, m), complex)
            E[i, j] = E[j, i] = 1.0
            out.append(E)
            E = np.zeros((m, m), complex)
            E[i, j], E[j, i] = -1j, 1j
            out.append(E)
    return np.array(out).reshape(m * m, m, m) if m else np.zeros((0, 0, 0), complex)


def optimize_complement(
    h_prev: PauliExpansion, o: np.ndarray, B: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Least-squares choice of the complement-space term closest to ``h_prev``.

    Minimizes ``|| canon(h_prev) - canon(hermitize(o + B C B^dagger)) ||`` over
    complex ``C``. Only the Hermitian part of ``C`` enters the Hermitian
    density, so ``C`` is returned Hermitian.

    Returns ``(C, o_new, h_new)``.
    """
    r = _range_of(o)
    m = B.shape[1]
    if B.shape[0] != o.shape[0]:
        raise BasisMismatch(f"basis rows {B.shape[0]} do not match operator size {o.shape[0]}")
    h0 = o + o.conj().T
    if m == 0:
        return np.zeros((0, 0), complex), o.copy(), h0
    E = _hermitian_basis(m)
    cols = canonical_vector(B @ E @ B.conj().T, r)
    target = h_prev.vector(r) - canonical_vector(h0)
    A = np.real(cols).T
    theta, *_ = np.linalg.lstsq(A, np.real(target), rcond=None)
    K = np.tensordot(theta, E, axes=1)
    C = 0.5 * K
    o_new = o + B @ C @ B.conj().T
    return C, o_new, o_new + o_new.conj().T
