from __future__ import annotations

import numpy as np
import pytest
import scipy.linalg as la

from conftest import GHZ
from mpsdrive.chain import (
    apply_translation_sum,
    embed_operator,
    mps_state_vector,
    tangent_state_vector,
    translation_operator,
)
from mpsdrive.errors import ResourceLimit
from mpsdrive.generator import build_generator
from mpsdrive.mps import normalize

SY = np.array([[0, -1j], [1j, 0]])


def test_product_and_ghz_vectors():
    up = normalize(np.array([1.0, 0.0]).reshape(2, 1, 1))
    v, _ = mps_state_vector(up, 3)
    assert np.allclose(v, np.eye(8)[0])
    v, nrm = mps_state_vector(GHZ, 4)
    expected = np.zeros(16)
    expected[[0, 15]] = 1 / np.sqrt(2)
    assert np.abs(v - expected).max() < 1e-15
    assert nrm == pytest.approx(np.sqrt(2))


def test_tangent_vector_examples(decay_state):
    up = normalize(np.array([1.0, 0.0]).reshape(2, 1, 1))
    assert np.allclose(tangent_state_vector(up, np.zeros((2, 1, 1)), 3), 0)
    dv = tangent_state_vector(up, np.array([0.0, 1.0]).reshape(2, 1, 1), 2)
    assert np.allclose(dv, [0, 1, 1, 0])
    psi, dA = decay_state
    v, nrm = mps_state_vector(psi, 10)
    dv = tangent_state_vector(psi, dA, 10, nrm)
    # the tangent gauge holds on the infinite chain; finite N leaves |lam2|^N corrections
    assert abs(np.vdot(v, dv)) < 1e-6 * np.linalg.norm(dv)


def test_tangent_vector_is_derivative(loop):
    h = 1e-6
    N = 6
    t = 0.4

    def amplitudes(tt):
        psi, _ = loop.state(tt)
        A = psi.tensor
        v, nrm = mps_state_vector(psi, N)
        return v * nrm

    fd = (amplitudes(t + h) - amplitudes(t - h)) / (2 * h)
    psi, dA = loop.state(t)
    v, nrm = mps_state_vector(psi, N)
    dv = tangent_state_vector(psi, dA, N, 1.0)
    # projected tangent differs from the raw derivative only along the state itself
    resid = fd - dv
    resid -= np.vdot(v, resid) * v
    assert np.linalg.norm(resid) < 1e-6 * np.linalg.norm(fd)


def test_embed_examples():
    assert np.allclose(embed_operator(SY, 2), np.kron(SY, np.eye(2)) + np.kron(np.eye(2), SY))
    rng = np.random.default_rng(3)
    h = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    H = embed_operator(h, 8)
    T = translation_operator(8)
    assert np.linalg.norm(H @ T - T @ H) < 1e-10
    with pytest.raises(ValueError):
        embed_operator(h, 2)
    with pytest.raises(ResourceLimit):
        embed_operator(SY, 15)


def test_embedded_generator_hermitian(decay_state):
    psi, dA = decay_state
    H = embed_operator(build_generator(psi, dA, 4).h, 10)
    assert np.linalg.norm(H - H.conj().T) < 1e-10


def test_matrix_free_sum_matches_dense(rng):
    h = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    v = rng.normal(size=(2**7, 3)) + 0j
    assert np.abs(apply_translation_sum(h, v, 7) - embed_operator(h, 7) @ v).max() < 1e-12


def test_state_in_translation_sector(decay_state):
    psi, _ = decay_state
    v, _ = mps_state_vector(psi, 8)
    assert np.linalg.norm(translation_operator(8) @ v - v) < 1e-10
    assert la.norm(v) == pytest.approx(1.0, abs=1e-12)
