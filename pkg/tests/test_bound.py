from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mpsdrive.bound import (
    beta,
    bond_space_leakage,
    bound_constant,
    canonical_inputs,
    epsilon,
    first_valid_range,
    rhs_per_term,
    vertical_convergence_gap,
    verify_bound,
)
from mpsdrive.errors import DomainError
from mpsdrive.generator import dagger_residual_norm, local_generator
from mpsdrive.mps import normalize


def test_constant_examples():
    assert bound_constant(2, 0.5) == pytest.approx(4 * math.e**2 * 10 * 8 * 3.375, rel=1e-12)
    assert bound_constant(2, 0.5) == pytest.approx(7.98e3, rel=1e-3)
    assert bound_constant(2, 0.9) > bound_constant(2, 0.5)
    assert bound_constant(1, 0.3) == pytest.approx(4 * math.e**2 * 2 * (2 / 0.7) ** 1.5)
    for bad in (0.0, 1.0, -0.2, 1.5):
        with pytest.raises(DomainError):
            bound_constant(2, bad)


def test_epsilon_examples():
    assert epsilon(2, 0.5, 40) < epsilon(2, 0.5, 20)
    assert epsilon(2, 0.5, 1) == pytest.approx(2 * bound_constant(2, 0.5) * 0.5)
    with pytest.raises(DomainError):
        epsilon(2, 0.5, 0.5)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 3), st.floats(0.01, 0.99))
def test_constant_positive_and_increasing(chi, lam):
    C = bound_constant(chi, lam)
    assert C > 0
    # once (1 - lam^2)/lam <= 1 only the increasing (2/(1-lam))^1.5 factor depends on lam
    if lam >= 0.62:
        assert bound_constant(chi, min(0.999, lam + 0.005)) > C


def test_beta_examples(decay_state):
    psi, dA = decay_state
    pc, DtA, _ = canonical_inputs(psi, dA)
    assert beta(pc, np.zeros_like(DtA)) == 0.0
    rot = normalize(np.array([1.0, 0.0]).reshape(2, 1, 1))
    # a tangent orthogonal to every A^s gives zero; a parallel one gives its scale
    assert beta(rot, np.array([0.0, 1.0]).reshape(2, 1, 1)) == pytest.approx(0.0)
    assert beta(rot, np.array([2.0, 0.0]).reshape(2, 1, 1)) == pytest.approx(2.0)


def test_beta_bounded_along_loop(loop):
    vals = []
    for t in np.linspace(0, loop.period, 33):
        pc, DtA, _ = canonical_inputs(*loop.state(t))
        vals.append(beta(pc, DtA))
    vals = np.array(vals)
    assert np.all(np.isfinite(vals)) and vals.max() < 10
    assert np.abs(np.diff(vals)).max() < 1.0
    assert vals[0] == pytest.approx(vals[-1], rel=1e-10)


def test_bond_space_matches_dense(decay_state):
    psi, dA = decay_state
    for r in (3, 4, 6, 9):
        for j in (1, (r + 1) // 2, r):
            dense = dagger_residual_norm(local_generator(psi, dA, r, j), psi)
            assert bond_space_leakage(psi, dA, r, j) == pytest.approx(dense, rel=1e-8, abs=1e-15)


def test_vertical_gap_below_epsilon(decay_state):
    psi, dA = decay_state
    pc, _, _ = canonical_inputs(psi, dA)
    for l in range(4, 9):
        assert vertical_convergence_gap(pc, l) <= epsilon(psi.chi, psi.lambda2_abs, l)


def test_canonical_inputs(decay_state):
    psi, dA = decay_state
    pc, DtA, kappa = canonical_inputs(psi, dA)
    assert kappa > 0
    # the generator does not depend on the gauge
    o1 = local_generator(psi, dA, 3, 2)
    o2 = local_generator(pc, DtA, 3, 2)
    assert np.abs(o1 - o2).max() < 1e-10


def test_rotation_lhs_vanishes():
    t = 0.2
    A = np.array([np.cos(t), np.sin(t)]).reshape(2, 1, 1)
    dA = np.array([-np.sin(t), np.cos(t)], dtype=complex).reshape(2, 1, 1)
    psi = normalize(A)
    # chi = 1 has no subleading eigenvalue, so only the measured side is meaningful
    assert bond_space_leakage(psi, dA, 3) == pytest.approx(0.0, abs=1e-15)
    assert dagger_residual_norm(local_generator(psi, dA, 3, 2), psi) == pytest.approx(0.0, abs=1e-15)


def test_decay_point_reports(decay_state):
    psi, dA = decay_state
    for r in (3, 5, 7, 9):
        rep = verify_bound(psi, dA, r)
        assert rep.holds
        assert rep.l == (r - 1) / 2
        assert rep.lhs_method == "dense"
        assert rep.audited == rep.precondition_ok
        if not rep.precondition_ok:
            assert "eps(r)" in rep.reason
        assert json.loads(rep.to_json())["r"] == r
    assert first_valid_range(psi, dA) == 15
    for r in (15, 17, 21):
        rep = verify_bound(psi, dA, r)
        assert rep.audited and rep.holds and rep.lhs_method == "bond"
    rep = verify_bound(psi, dA, 4)
    assert not rep.audited and "even" in rep.reason
    with pytest.raises(DomainError):
        verify_bound(psi, dA, 1)


def test_rhs_decreases_past_crossover(decay_state):
    psi, dA = decay_state
    rep = verify_bound(psi, dA, 3)
    lam = psi.lambda2_abs
    vals = [rhs_per_term(rep.beta, 2, rep.C_const, rep.kappa, lam, r) for r in range(3, 26, 2)]
    for r, a, b in zip(range(3, 26, 2), vals, vals[1:]):
        if math.sqrt(lam) * ((r + 1) / (r - 1)) ** 1.5 < 1:
            assert b < a


def test_loop_audit_holds(loop):
    for t in np.linspace(0, loop.period, 5, endpoint=False):
        psi, dA = loop.state(t)
        for r in (3, 5):
            rep = verify_bound(psi, dA, r, t=t)
            if rep.precondition_ok:
                assert rep.holds
