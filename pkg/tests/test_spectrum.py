from __future__ import annotations

import warnings

import numpy as np
import pytest
from scipy.stats import unitary_group

from mpsdrive.errors import DegenerateSpacing
from mpsdrive.floquet import FloquetSpectrum, floquet_spectrum, zero_momentum_sector
from mpsdrive.spectrum import (
    GOE_RATIO,
    GUE_RATIO,
    POISSON_RATIO,
    align_degenerate,
    eigenstate_diagnostics,
    flag_special_states,
    half_chain_entropy,
    quasi_energy_grid,
    relative_spread,
    sdos,
    site_magnetization,
    spectral_ratios,
    wrap_phase,
    EigenstateRow,
)


def test_reference_ratios():
    assert POISSON_RATIO == pytest.approx(0.38629, abs=1e-5)
    assert GOE_RATIO == pytest.approx(0.53590, abs=1e-5)
    assert GUE_RATIO == pytest.approx(0.60266, abs=1e-5)


def test_grid_and_wrap():
    g = quasi_energy_grid(8)
    assert g[-1] == pytest.approx(np.pi) and g[0] > -np.pi
    assert wrap_phase(np.pi) == pytest.approx(np.pi)
    assert wrap_phase(-np.pi) == pytest.approx(np.pi)
    assert wrap_phase(3 * np.pi / 2) == pytest.approx(-np.pi / 2)


def test_sdos_single_level():
    grid, rho = sdos([0.0], 0.05)
    k = np.argmax(rho)
    assert abs(grid[k]) < 2 * np.pi / 512 + 1e-12
    assert rho[k] == pytest.approx(1 / np.sqrt(2 * np.pi * 0.05), rel=1e-3)
    assert rho.sum() * 2 * np.pi / grid.size == pytest.approx(1.0, rel=0.01)
    near_edge = sdos([np.pi - 0.01], 0.05)[1]
    assert near_edge.sum() * 2 * np.pi / grid.size == pytest.approx(1.0, rel=0.01)
    with pytest.raises(ValueError):
        sdos([0.0], 0.0)


def test_sdos_flat_for_uniform_levels():
    e = -np.pi + 2 * np.pi * (np.arange(200) + 0.5) / 200
    _, rho = sdos(e, 0.05)
    assert relative_spread(rho) < 1e-6


def test_equal_spacing_ratio_one():
    stats = spectral_ratios(np.arange(20) * 0.1)
    assert stats.mean == pytest.approx(1.0)
    assert stats.excluded == 0


def test_poisson_ratio():
    rng = np.random.default_rng(11)
    stats = spectral_ratios(np.sort(rng.uniform(0, 1, 100_000)))
    assert stats.mean == pytest.approx(POISSON_RATIO, abs=0.005)


def test_circular_orthogonal_ratio():
    rng = np.random.default_rng(5)
    means = []
    for _ in range(50):
        W = unitary_group.rvs(400, random_state=rng)
        e = np.angle(np.linalg.eigvals(W.T @ W))
        means.append(spectral_ratios(e).mean)
    assert np.mean(means) == pytest.approx(GOE_RATIO, abs=0.01)


def test_circular_unitary_ratio():
    rng = np.random.default_rng(6)
    means = [spectral_ratios(np.angle(np.linalg.eigvals(unitary_group.rvs(400, random_state=rng)))).mean
             for _ in range(20)]
    assert np.mean(means) == pytest.approx(GUE_RATIO, abs=0.01)


def test_degenerate_spacing_warns():
    with pytest.warns(DegenerateSpacing):
        stats = spectral_ratios([0.0, 0.0, 0.3, 0.7, 1.2])
    assert stats.excluded == 1
    assert stats.ratios.size == 2


def test_entropy_examples():
    prod = np.zeros(16)
    prod[0] = 1
    assert half_chain_entropy(prod, 4) == pytest.approx(0.0, abs=1e-14)
    bell = np.zeros(4)
    bell[[0, 3]] = 1 / np.sqrt(2)
    assert half_chain_entropy(bell, 2) == pytest.approx(np.log(2))
    rng = np.random.default_rng(0)
    v = rng.normal(size=2**8) + 1j * rng.normal(size=2**8)
    v /= np.linalg.norm(v)
    assert 0 < half_chain_entropy(v, 8) <= 4 * np.log(2)


def test_magnetization_examples():
    up = np.zeros(8)
    up[0] = 1
    assert np.allclose(site_magnetization(up, 3), [0, 0, 1])
    plus = np.ones(8) / np.sqrt(8)
    assert np.allclose(site_magnetization(plus, 3), [1, 0, 0])
    y = np.kron(np.kron([1, 1j], [1, 1j]), [1, 1j]) / np.sqrt(8)
    assert np.allclose(site_magnetization(y, 3), [0, 1, 0])


def test_overlaps_sum_to_one(decay_state):
    from mpsdrive.chain import embed_operator, mps_state_vector
    from mpsdrive.floquet import restrict
    from mpsdrive.generator import build_generator
    import scipy.linalg as la

    psi, dA = decay_state
    N = 6
    sec = zero_momentum_sector(N)
    U = restrict(la.expm(-1j * embed_operator(build_generator(psi, dA, 3).h, N)), sec)
    v, _ = mps_state_vector(psi, N)
    rows = eigenstate_diagnostics(floquet_spectrum(U), sec, v)
    assert sum(row.overlap for row in rows) == pytest.approx(1.0, abs=1e-10)
    assert all(abs(row.mx) <= 1 + 1e-12 for row in rows)


def test_alignment_concentrates_overlap():
    rng = np.random.default_rng(2)
    Q = unitary_group.rvs(4, random_state=rng)
    e = np.array([0.0, 0.0, 0.0, 1.0])
    c = rng.normal(size=4) + 0j
    c[3] = 0
    c /= np.linalg.norm(c)
    coeff = Q @ c
    V = align_degenerate(Q, e, coeff)
    ov = np.abs(V.conj().T @ coeff) ** 2
    assert ov[0] == pytest.approx(1.0)
    assert np.allclose(V.conj().T @ V, np.eye(4))


def test_flag_rule():
    def rows(ovs):
        return [EigenstateRow(i, 0.0, o, 0.0, 0, 0, 0) for i, o in enumerate(ovs)]

    assert [r.index for r in flag_special_states(rows([0.9, 0.01, 0.01, 0.01, 0.02]))] == [0]
    assert [r.index for r in flag_special_states(rows([0.0, 1.0, 0.0, 0.0]))] == [1]
    assert len(flag_special_states(rows([0.25] * 4))) == 0
