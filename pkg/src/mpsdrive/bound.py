"""Ingredients of the exponential leakage bound and its audit against measured norms.

For odd ``r = 2 l + 1`` and the derivative in the middle of the block, the
per-density leakage obeys

    || o^dagger |psi> ||  <=  sqrt(8 beta^2 chi^5 C / (kappa |lam2|)) |lam2|^(r/2) l^((chi^2-1)/2)

provided ``eps(r) <= kappa / 2``. All quantities refer to the right-canonical
gauge (``R = 1``, ``tr L = 1``); ``kappa`` is the smallest eigenvalue of ``L``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np
import scipy.linalg as la

from .errors import DomainError
from .generator import dagger_residual_norm, local_generator, middle_site
from .mps import (
    DEFAULT_CAP,
    UniformMPS,
    canonicalize_right,
    mixed_transfer,
    vertical_transfer,
)


def bound_constant(chi: int, lambda2_abs: float) -> float:
    """Prefactor ``C(chi, |lam2|)`` of the transfer-matrix convergence estimate."""
    lam = float(lambda2_abs)
    if not 0.0 < lam < 1.0:
        raise DomainError(f"|lambda_2| = {lam} must lie in (0, 1)")
    return (
        4
        * math.e**2
        * chi
        * (chi**2 + 1)
        * (2 / (1 - lam)) ** 1.5
        * max(1.0, (1 - lam**2) / lam) ** (chi**2 - 1)
    )


def epsilon(chi: int, lambda2_abs: float, l: float) -> float:
    """``eps(l) = chi C |lam2|^l l^(chi^2 - 1)``, the trace-norm distance of ``l`` vertical transfers from their limit."""
    if l < 1:
        raise DomainError(f"l = {l} must be at least 1")
    C = bound_constant(chi, lambda2_abs)
    return chi * C * lambda2_abs**l * l ** (chi**2 - 1)


def beta(psi_canonical: UniformMPS, DtA: np.ndarray) -> float:
    """Spectral norm of ``sum_s vec(A^s) vec(D_t A^s)^dagger``."""
    A = psi_canonical.tensor
    d = A.shape[0]
    X = A.reshape(d, -1).T @ np.asarray(DtA).reshape(d, -1).conj()
    return float(la.norm(X, 2))


def canonical_inputs(psi: UniformMPS, dA: np.ndarray) -> tuple[UniformMPS, np.ndarray, float]:
    """Right-canonical state, gauge-transformed tangent and ``kappa = lambda_min(L)``."""
    psi_c, Y = canonicalize_right(psi)
    DtA = np.einsum("ab,sbc,cd->sad", Y, dA, la.inv(Y))
    kappa = float(la.eigvalsh(psi_c.l_matrix)[0])
    return psi_c, DtA, kappa


def vertical_convergence_gap(psi_canonical: UniformMPS, l: int) -> float:
    """``|| T_v^l - L (x) R ||_1`` in the vertical orientation."""
    chi = psi_canonical.chi
    T = psi_canonical.transfer().matrix
    Tl = np.linalg.matrix_power(T, l)
    limit = np.outer(psi_canonical.R, psi_canonical.L.conj())
    diff = vertical_transfer(Tl - limit, chi)
    return float(la.svdvals(diff).sum())


def bond_space_leakage(psi: UniformMPS, dA: np.ndarray, r: int, j: int | None = None) -> float:
    """``<psi| o o^dagger |psi>`` for ``o = o_j`` evaluated with ``chi^2 x chi^2`` matrices.

    Uses ``o o^dagger = M^d sigma^-1 M^d^dagger`` with ``sigma = M^dagger M``, so
    only vertical transfer products appear and ``r`` is not limited by ``d**r``.
    """
    j = middle_site(r) if j is None else j
    if not 1 <= j <= r:
        raise ValueError(f"derivative position {j} outside 1..{r}")
    chi = psi.chi
    A = psi.tensor
    T = mixed_transfer(A, A)
    X = mixed_transfer(np.asarray(dA, dtype=complex), A)
    mp = np.linalg.matrix_power
    sigma = vertical_transfer(mp(T, r), chi)
    K = vertical_transfer(mp(T, j - 1) @ X @ mp(T, r - j), chi)  # M^d^dagger M
    W = np.einsum("ac,bd->abcd", psi.l_matrix.conj(), psi.r_matrix).reshape(chi * chi, chi * chi)
    val = np.trace(la.solve(sigma, K @ W @ K.conj().T, assume_a="her"))
    return float(np.real(val))


def rhs_per_term(beta_: float, chi: int, C: float, kappa: float, lambda2_abs: float, r: int) -> float:
    pref = math.sqrt(8 * beta_**2 * chi**5 * C / (kappa * lambda2_abs))
    return pref * lambda2_abs ** (r / 2) * ((r - 1) / 2) ** ((chi**2 - 1) / 2)


@dataclass
class BoundReport:
    r: int
    l: float
    chi: int
    lambda2_abs: float
    C_const: float
    kappa: float
    beta: float
    epsilon_l: float
    epsilon_r: float
    rhs_per_term: float
    lhs_per_term: float
    precondition_ok: bool
    holds: bool
    audited: bool
    reason: str = ""
    lhs_method: str = "dense"
    t: float | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self))

    def csv_row(self) -> tuple:
        return (self.t, self.r, self.lhs_per_term, self.rhs_per_term, self.epsilon_r, self.kappa, self.beta, self.holds)


BOUND_CSV_HEADER = ("t", "r", "lhs", "rhs", "epsilon", "kappa", "beta", "holds")


def verify_bound(
    psi: UniformMPS, dA: np.ndarray, r: int, t: float | None = None, cap: int = DEFAULT_CAP
) -> BoundReport:
    """Assemble every bound ingredient at one loop point and compare with the measured norm.

    ``lhs`` is ``sqrt(<psi|o o^dagger|psi>)`` for the middle placement, from the
    dense reduced density when ``d**r <= cap`` and in bond space otherwise.
    ``audited`` is true only for odd ``r`` with ``eps(r) <= kappa / 2``;
    ``holds`` is ``lhs <= rhs`` regardless, so callers can inspect both.
    """
    if r < 3:
        raise DomainError(f"r = {r} must be at least 3")
    psi_c, DtA, kappa = canonical_inputs(psi, dA)
    chi, lam = psi.chi, psi.lambda2_abs
    C = bound_constant(chi, lam)
    l = (r - 1) / 2
    b = beta(psi_c, DtA)
    eps_r = epsilon(chi, lam, r)
    rhs = rhs_per_term(b, chi, C, kappa, lam, r)
    if psi.d**r <= cap:
        o = local_generator(psi, dA, r, middle_site(r))
        lhs2, method = dagger_residual_norm(o, psi), "dense"
    else:
        lhs2, method = bond_space_leakage(psi, dA, r), "bond"
    lhs = math.sqrt(max(lhs2, 0.0))
    pre = eps_r <= kappa / 2
    reasons = []
    if r % 2 == 0:
        reasons.append("even r has no closed-form constant")
    if not pre:
        reasons.append(f"eps(r)={eps_r:.3g} > kappa/2={kappa / 2:.3g}")
    return BoundReport(
        r=r,
        l=l,
        chi=chi,
        lambda2_abs=lam,
        C_const=C,
        kappa=kappa,
        beta=b,
        epsilon_l=epsilon(chi, lam, l),
        epsilon_r=eps_r,
        rhs_per_term=rhs,
        lhs_per_term=lhs,
        precondition_ok=pre,
        holds=lhs <= rhs,
        audited=pre and r % 2 == 1,
        reason="; ".join(reasons),
        lhs_method=method,
        t=t,
    )


def first_valid_range(psi: UniformMPS, dA: np.ndarray, r_max: int = 101) -> int | None:
    """Smallest odd ``r >= 3`` meeting ``eps(r) <= kappa / 2``, or ``None``."""
    _, _, kappa = canonical_inputs(psi, dA)
    for r in range(3, r_max + 1, 2):
        if epsilon(psi.chi, psi.lambda2_abs, r) <= kappa / 2:
            return r
    return None
