from __future__ import annotations

import numpy as np
import pytest
import scipy.linalg as la

from mpsdrive.chain import embed_operator, mps_state_vector, translation_operator
from mpsdrive.errors import NotUnitary, ResourceLimit, ToleranceNotMet
from mpsdrive.floquet import (
    DriveOptions,
    GeneratorPath,
    fidelity_trace,
    floquet_spectrum,
    propagate,
    quasi_energy,
    restrict,
    sector_hamiltonian,
    time_ordered_exponential,
    unitarity_defect,
    zero_momentum_sector,
)
from mpsdrive.generator import build_generator
from mpsdrive.trajectory import RotationLoop


class FrozenPoint:
    """A loop that never moves: the generator is constant in time."""

    period = 1.0

    def __init__(self, psi, dA):
        self.psi, self.dA = psi, dA

    def state(self, t):
        return self.psi, self.dA


def test_sector_dimensions():
    assert zero_momentum_sector(2).dim == 3
    assert zero_momentum_sector(8).dim == 36
    assert zero_momentum_sector(12).dim == 352


def test_sector_projector(decay_state):
    sec = zero_momentum_sector(8)
    P = sec.basis.toarray()
    assert np.allclose(P.conj().T @ P, np.eye(sec.dim))
    proj = P @ P.conj().T
    assert np.allclose(proj @ proj, proj)
    T = translation_operator(8)
    assert np.allclose(T @ P, P)
    psi, _ = decay_state
    v, _ = mps_state_vector(psi, 8)
    assert np.linalg.norm(sec.lift(sec.project(v)) - v) < 1e-12


def test_sector_hamiltonian_matches_restriction(decay_state):
    psi, dA = decay_state
    h = build_generator(psi, dA, 3).h
    sec = zero_momentum_sector(8)
    assert np.abs(sector_hamiltonian(h, sec) - restrict(embed_operator(h, 8), sec)).max() < 1e-12


def test_frozen_generator_matches_expm(decay_state):
    psi, dA = decay_state
    N, r = 6, 3
    h = build_generator(psi, dA, r).h
    H = embed_operator(h, N)
    sec = zero_momentum_sector(N)
    opts = DriveOptions(atol=1e-11)
    U = propagate(FrozenPoint(psi, dA), r, N, 0.7, opts, sector=False)
    assert np.abs(U - la.expm(-1j * 0.7 * H)).max() < 1e-8
    Us = propagate(FrozenPoint(psi, dA), r, N, 0.7, opts, sector=sec)
    assert np.abs(Us - restrict(la.expm(-1j * 0.7 * H), sec)).max() < 1e-8


def test_magnus_order_four():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    b = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    A, B = a + a.conj().T, b + b.conj().T

    def H(t):
        return A + np.sin(3 * t) * B

    ref, _ = time_ordered_exponential(H, 0, 1, np.eye(4), atol=1e-13)
    U, info = time_ordered_exponential(H, 0, 1, np.eye(4), atol=1e-7)
    assert np.abs(U - ref).max() < 1e-5
    assert info["steps"] > 1
    assert unitarity_defect(U) < 1e-12


def test_rotation_loop_is_driven_exactly():
    for r in (1, 2, 3):
        pts = fidelity_trace(RotationLoop(), r, 6, np.linspace(0, 1, 5))
        assert max(1 - p.F for p in pts) < 1e-8


def test_builtin_floquet_unitary(loop):
    U = propagate(loop, 3, 8, loop.period, DriveOptions(alpha="optimal"))
    assert U.shape == (36, 36)
    assert unitarity_defect(U) < 1e-7
    spec = floquet_spectrum(U)
    assert np.all(np.diff(spec.quasi_energies) >= 0)
    assert np.allclose(spec.vectors.conj().T @ spec.vectors, np.eye(36), atol=1e-10)


def test_quasi_energy_examples():
    assert np.allclose(floquet_spectrum(np.eye(3)).quasi_energies, 0)
    e = floquet_spectrum(np.diag([1, 1j])).quasi_energies
    assert np.allclose(e, [-np.pi / 2, 0])
    assert quasi_energy(np.array([-1.0 + 0j]))[0] == pytest.approx(np.pi)
    with pytest.raises(NotUnitary):
        floquet_spectrum(np.array([[1.0, 0.5], [0.0, 1.0]]))


def test_sector_spectrum_subset(decay_state):
    psi, dA = decay_state
    N = 6
    H = embed_operator(build_generator(psi, dA, 3).h, N)
    U = la.expm(-1j * 0.9 * H)
    full = floquet_spectrum(U).phases
    part = floquet_spectrum(restrict(U, zero_momentum_sector(N))).phases
    for z in part:
        assert np.min(np.abs(full - z)) < 1e-10


def test_resource_and_tolerance_errors(loop):
    with pytest.raises(ResourceLimit):
        propagate(loop, 3, 13, 1.0)
    with pytest.raises(ValueError):
        propagate(loop, 4, 3, 1.0)
    with pytest.raises(ToleranceNotMet):
        propagate(loop, 3, 6, loop.period, DriveOptions(atol=1e-12, max_steps=3))


def test_generator_path_cached(loop):
    gp = GeneratorPath(loop, 3, DriveOptions(alpha="optimal", complement=True))
    h = gp.density(0.3)
    assert gp.density(0.3) is h
    assert np.allclose(h, h.conj().T)
    with pytest.raises(ValueError):
        GeneratorPath(loop, 3, DriveOptions(alpha="bogus")).density(0.0)
