"""Multi-step pipelines built on the core modules, shared by the CLI and demos."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .generator import (
    combine_weights,
    complement_basis,
    dagger_residual_norm,
    generator_parts,
    gram_matrix,
    hermitize,
    middle_site,
    minimize_on_simplex_plane,
    one_hot,
    reduced_density,
)
from .mps import UniformMPS
from .pauli import PauliExpansion, operator_distance, optimize_complement, pauli_expand_canonical
from .trajectory import ParamPoint, state_at

DECAY_POINT = ParamPoint(
    values=np.array([1.05, -0.48, 0.39, 1.2]), rates=np.array([-3.81, 1.29, 2.1, -0.49])
)


@dataclass
class DecayRow:
    r: int
    placement: int
    norm2: float
    optimized_norm2: float
    alpha: np.ndarray


@dataclass
class DecayScan:
    rows: list[DecayRow]
    slope: float
    optimized_slope: float
    log_lambda2: float

    @property
    def reference_slopes(self) -> dict[str, float]:
        return {"ln|lam2|": self.log_lambda2, "2 ln|lam2|": 2 * self.log_lambda2}


def fit_slope(r_values, values) -> float:
    """Least-squares slope of ``ln(values)`` against ``r``; ``nan`` for fewer than two points."""
    r = np.asarray(r_values, dtype=float)
    if r.size < 2:
        return float("nan")
    return float(np.polyfit(r, np.log(np.asarray(values, dtype=float)), 1)[0])


def decay_scan(psi: UniformMPS, dA: np.ndarray, r_values) -> DecayScan:
    """Per-site ``<psi|o o^dagger|psi>`` for middle and optimized placements."""
    rows = []
    for r in r_values:
        parts = generator_parts(psi, dA, r)
        G = gram_matrix(parts, psi)
        j = middle_site(r)
        alpha = minimize_on_simplex_plane(G)
        opt = float(alpha @ G @ alpha)
        mid = float(G[j - 1, j - 1])
        if opt > mid:
            alpha, opt = one_hot(r, j), mid
        rows.append(DecayRow(r, j, mid, opt, alpha))
    rs = [row.r for row in rows]
    return DecayScan(
        rows=rows,
        slope=fit_slope(rs, [row.norm2 for row in rows]),
        optimized_slope=fit_slope(rs, [row.optimized_norm2 for row in rows]),
        log_lambda2=float(np.log(psi.lambda2_abs)) if psi.lambda2_abs > 0 else float("-inf"),
    )


def placement_sweep(psi: UniformMPS, dA: np.ndarray, r: int) -> np.ndarray:
    """``<psi|o_j o_j^dagger|psi>`` for every single-site placement ``j = 1..r``."""
    parts = generator_parts(psi, dA, r)
    rho = reduced_density(psi, r)
    return np.array([dagger_residual_norm(o, psi, rho) for o in parts])


@dataclass
class SeriesRow:
    r: int
    distance_before: float
    distance_after: float


@dataclass
class OperatorSeries:
    rows: list[SeriesRow]
    expansions: dict[int, PauliExpansion] = field(default_factory=dict)
    densities: dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def final(self) -> PauliExpansion:
        return self.expansions[max(self.expansions)]


def operator_series(
    psi: UniformMPS,
    dA: np.ndarray,
    r_values,
    optimize_alpha: bool = True,
    optimize_c: bool = True,
) -> OperatorSeries:
    """Hermitian densities ``h_r`` for consecutive ``r``, each fitted to its predecessor.

    The derivative weights are fixed first (optimized or middle site); then the
    complement-space term is chosen by least squares so that the canonical
    Pauli vector of ``h_r`` is as close as possible to that of ``h_{r-1}``.
    Distances are reported before and after that second step.
    """
    r_values = sorted(r_values)
    rows, exps, dens = [], {}, {}
    prev: PauliExpansion | None = None
    for r in r_values:
        parts = generator_parts(psi, dA, r)
        if optimize_alpha:
            alpha = minimize_on_simplex_plane(gram_matrix(parts, psi))
        else:
            alpha = one_hot(r, middle_site(r))
        o = combine_weights(parts, alpha)
        h = hermitize(o)
        raw = pauli_expand_canonical(h)
        if prev is not None:
            before = operator_distance(raw, prev)
            if optimize_c:
                _, _, h = optimize_complement(prev, o, complement_basis(psi, r))
            exp = pauli_expand_canonical(h)
            rows.append(SeriesRow(r, before, operator_distance(exp, prev)))
        else:
            exp = raw
        exps[r], dens[r], prev = exp, h, exp
    return OperatorSeries(rows, exps, dens)


def default_decay_state() -> tuple[UniformMPS, np.ndarray]:
    return state_at(DECAY_POINT)
