import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from framelab import duality, frames
from framelab.duality import DualVerdict
from framelab.errors import ConditionOperatorSingular, NormConditionViolated, PreconditionError
from framelab.frames import FrameSystem
from framelab.gallery import random_approx_dual_pair, random_p_asf
from framelab.operator_algebra import Verdict
from framelab.sequence_core import ModelSpace, Vec, vector_p_norm


def _pair(analysis_g, synthesis_g, p=2.0, d=2):
    sp = ModelSpace.finite(d, p)
    F = FrameSystem.from_matrices(sp, np.eye(d), np.eye(d))
    return F, FrameSystem.from_matrices(sp, analysis_g, synthesis_g)


def test_exact_dual_detected():
    sp = ModelSpace.finite(2, 1.0)
    F = FrameSystem.from_matrices(sp, np.diag([1.0, 2.0]), np.eye(2))
    G = FrameSystem.from_matrices(sp, np.eye(2), np.diag([1.0, 0.5]))
    rep = duality.is_exact_dual(F, G)
    assert rep.verdict is DualVerdict.EXACT and rep.exact_residual <= 1e-12


def test_scaled_vectors_certificate():
    # g = zeta, omega = 0.9 e: one defect is 0.1, the other vanishes
    F, G = _pair(np.eye(2), 0.9 * np.eye(2))
    rep = duality.certify_approx_dual(F, G)
    assert rep.cert_fg.upper == pytest.approx(0.1) and rep.cert_gf.upper == pytest.approx(0.0)
    assert rep.verdict is DualVerdict.APPROX
    x = Vec(F.space, {1: 1.0})
    ef, eg = duality.reconstruction_error(F, G, x)
    assert ef == pytest.approx(0.1) and eg == pytest.approx(0.0)
    with pytest.raises(ValueError):
        duality.reconstruction_error(F, G, Vec(F.space, {}))


def test_not_approx_dual():
    F, G = _pair(np.eye(2), 3.0 * np.eye(2))
    rep = duality.certify_approx_dual(F, G)
    assert rep.cert_fg.verdict_lt_one is Verdict.NO and rep.verdict is DualVerdict.NOT_APPROX


def test_canonical_systems():
    F = random_p_asf(3, 6, 3.0, 0.3, 11)
    G = duality.canonical_dual(F)
    assert duality.is_exact_dual(F, G).verdict is DualVerdict.EXACT
    left, right = duality.canonical_duals(F)
    assert duality.is_exact_dual(F, left).residual_g_tau <= 1e-9
    assert duality.is_exact_dual(F, right).residual_f_omega <= 1e-9


def test_parametrize_dual_scalar():
    sp = ModelSpace.finite(1, 2.0)
    F = FrameSystem.from_matrices(sp, np.array([[1.0], [1.0]]), np.array([[0.5, 0.5]]))
    G = duality.parametrize_dual(F, np.array([[1.0], [-1.0]]), None)
    assert np.allclose(G.analysis_matrix(), [[2.0], [0.0]])
    assert duality.is_exact_dual(F, G).verdict is DualVerdict.EXACT


def test_parametrize_dual_singular_condition():
    sp = ModelSpace.finite(1, 2.0)
    F = FrameSystem.from_matrices(sp, np.array([[1.0], [0.0]]), np.array([[1.0, 0.0]]))
    # C = 1 + VU - V Tf Tt U with U = (0, 1)^T, V = (0, -1) gives 1 - 1 = 0
    with pytest.raises(ConditionOperatorSingular):
        duality.parametrize_dual(F, np.array([[0.0], [1.0]]), np.array([[0.0, -1.0]]))


def test_dual_from_approx_and_factorization():
    F, G = random_approx_dual_pair(3, 5, 2.0, 0.3, 2)
    for_f, for_g = duality.dual_from_approx(F, G)
    assert duality.is_exact_dual(F, for_f).verdict is DualVerdict.EXACT
    assert duality.is_exact_dual(G, for_g).verdict is DualVerdict.EXACT
    U, V, H = duality.factorize_approx_dual(F, G)
    assert duality.is_exact_dual(F, H).verdict is DualVerdict.EXACT


def test_approx_requirement_enforced():
    F, G = _pair(np.eye(2), 3.0 * np.eye(2))
    with pytest.raises(PreconditionError):
        duality.neumann_iterate(F, G, 2)
    with pytest.raises(PreconditionError):
        duality.dual_from_approx(F, G)


def test_parametrize_approx_dual_asf():
    F = random_p_asf(2, 4, 2.0, 0.2, 5)
    G, rep = duality.parametrize_approx_dual_asf(F, 0.95 * np.eye(2), 0.95 * np.eye(2))
    assert rep.verdict is DualVerdict.APPROX
    assert rep.cert_fg.upper == pytest.approx(0.05) and rep.cert_gf.upper == pytest.approx(0.05)
    with pytest.raises(NormConditionViolated):
        duality.parametrize_approx_dual_asf(F, 3 * np.eye(2), np.eye(2))


def test_neumann_diag_half():
    F, G = _pair(np.eye(2), 0.5 * np.eye(2))
    it = duality.neumann_iterate(F, G, 3)
    assert it.cert_fg.upper == pytest.approx(0.0625, abs=1e-12)
    assert it.bounds_hold
    with pytest.raises(ValueError):
        duality.neumann_iterate(F, G, -1)


def test_perturbation_requires_exact_dual():
    F, G = _pair(np.eye(2), 0.5 * np.eye(2))
    with pytest.raises(PreconditionError):
        duality.perturbation_approx_dual(F, G, F)


def test_perturbation_inconclusive_when_hypotheses_fail():
    sp = ModelSpace.finite(2, 2.0)
    H = FrameSystem.from_matrices(sp, np.eye(2), np.eye(2))
    F = FrameSystem.from_matrices(sp, 3 * np.eye(2), np.eye(2))
    bounds, rep = duality.perturbation_approx_dual(H, H, F)
    assert bounds.d * bounds.R >= 1 and rep.verdict is DualVerdict.INCONCLUSIVE


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.integers(0, 3), st.sampled_from([1.0, 1.5, 2.0, 3.0]),
       st.floats(0.0, 0.6), st.integers(0, 2**31))
def test_approx_pairs_contract(d, extra, p, defect, seed):
    F, G = random_approx_dual_pair(d, d + extra, p, defect, seed)
    rep = duality.certify_approx_dual(F, G)
    assert rep.verdict in (DualVerdict.APPROX,)
    x = Vec.from_dense(F.space, np.random.default_rng(seed).uniform(-1, 1, d))
    if x.entries:
        ef, eg = duality.reconstruction_error(F, G, x)
        nx = vector_p_norm(x)
        assert ef <= rep.cert_fg.upper * nx + 1e-9
        assert eg <= rep.cert_gf.upper * nx + 1e-9


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 4), st.integers(0, 3), st.integers(0, 6), st.integers(0, 2**31))
def test_neumann_bounds_property(d, extra, N, seed):
    F, G = random_approx_dual_pair(d, d + extra, 2.0, 0.5, seed)
    it = duality.neumann_iterate(F, G, N)
    assert it.identity_residual <= 1e-10 and it.bounds_hold
