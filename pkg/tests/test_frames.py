import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from framelab import frames
from framelab.errors import NotInvertible, SpaceMismatch, UndecidedInvertibility
from framelab.frames import FrameSystem
from framelab.gallery import example_second, random_p_asf
from framelab.operator_algebra import KernelVec, identity, materialize, to_matrix
from framelab.sequence_core import Functional, ModelSpace, Vec


def _diag_system(p=1.0):
    sp = ModelSpace.finite(2, p)
    return FrameSystem.from_matrices(sp, np.diag([1.0, 2.0]), np.eye(2))


def test_operators_of_explicit_system():
    F = _diag_system()
    assert np.array_equal(F.analysis_matrix(), np.diag([1.0, 2.0]))
    assert np.array_equal(to_matrix(frames.frame_operator(F)), np.diag([1.0, 2.0]))
    assert F.count == 2 and F.coefficient_space == ModelSpace.finite(2, 1.0)


def test_validate_p_asf_bounds():
    fb = frames.validate_p_asf(_diag_system(1.0))
    assert fb.a == pytest.approx(1.0) and fb.b == pytest.approx(2.0)
    bb = frames.validate_p_abs(_diag_system(1.0))
    assert bb.c == 2.0 and bb.d == 1.0


def test_singular_frame_operator_has_witness():
    sp = ModelSpace.finite(2, 2)
    F = FrameSystem.from_matrices(sp, np.array([[1.0, 0.0]]), np.array([[1.0], [0.0]]))
    with pytest.raises(NotInvertible) as err:
        frames.validate_p_asf(F)
    assert isinstance(err.value.witness, KernelVec)


def test_sequence_space_validation():
    e = example_second(2.0)
    with pytest.raises(NotInvertible):
        frames.validate_p_asf(e.F)
    sp = ModelSpace.sequence(2.0)
    I = identity(sp)
    with pytest.raises(UndecidedInvertibility):
        frames.validate_p_asf(FrameSystem.generated(sp, I, I))


def test_generated_members_are_lazy_rows_and_columns():
    e = example_second(2.0)   # f_n = zeta_n, tau_n = L e_n
    sp = e.F.space
    assert e.F.functional(3) == Functional(sp, {3: 1.0})
    assert e.F.vector(1) == Vec(sp, {})
    assert e.F.vector(4) == Vec(sp, {3: 1.0})
    assert e.G.functional(2) == Functional(sp, {1: 1.0})   # zeta_2 R = zeta_1


def test_mismatched_families_rejected():
    sp = ModelSpace.finite(2)
    with pytest.raises(SpaceMismatch):
        FrameSystem.from_families(sp, [Functional(sp, {1: 1.0})], [])
    with pytest.raises(SpaceMismatch):
        FrameSystem.from_matrices(sp, np.ones((3, 2)), np.ones((3, 2)))
    with pytest.raises(ValueError):
        FrameSystem.from_families(sp, [], [])


def test_json_round_trip_finite_and_generated():
    F = random_p_asf(3, 5, 1.5, 0.3, 0)
    F2 = FrameSystem.from_json(F.to_json())
    assert np.array_equal(F.analysis_matrix(), F2.analysis_matrix())
    assert np.array_equal(F.synthesis_matrix(), F2.synthesis_matrix())
    e = example_second(3.0)
    G = FrameSystem.from_json(e.G.to_json())
    assert np.array_equal(materialize(frames.frame_operator(G), 10),
                          materialize(frames.frame_operator(e.G), 10))
    assert FrameSystem.from_json(e.G.to_json(), p=1.5).p == 1.5


def test_mixed_system_members():
    F = _diag_system(2.0)
    G = FrameSystem.from_matrices(F.space, np.eye(2), 3 * np.eye(2))
    M = frames.mixed_system(F, G)
    assert np.array_equal(M.analysis_matrix(), F.analysis_matrix())
    assert np.array_equal(M.synthesis_matrix(), G.synthesis_matrix())


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5), st.integers(0, 4), st.sampled_from([1.0, 1.5, 2.0, 3.0]),
       st.integers(0, 2**31))
def test_random_p_asf_bounds(d, extra, p, seed):
    F = random_p_asf(d, d + extra, p, 0.3, seed)
    fb = frames.validate_p_asf(F)
    assert 0 < fb.a <= fb.b
    x = np.random.default_rng(seed).standard_normal(d)
    S = to_matrix(frames.frame_operator(F))
    from framelab.sequence_core import p_norm
    r = p_norm(S @ x, p) / p_norm(x, p)
    assert fb.a * (1 - 1e-9) <= r <= fb.b * (1 + 1e-9)
    assert fb.a >= 1 - 0.3 - 1e-9


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(1, 6), st.integers(0, 2**31))
def test_factorization_round_trip_property(d, m, seed):
    rng = np.random.default_rng(seed)
    sp = ModelSpace.finite(d, 2.0)
    F = FrameSystem.from_matrices(sp, rng.standard_normal((m, d)), rng.standard_normal((d, m)))
    U, V = frames.factorize_abs(F)
    F2 = frames.build_from_factorization(sp, 2.0, U, V)
    assert all(F2.functional(n) == F.functional(n) for n in range(1, m + 1))
    assert all(F2.vector(n) == F.vector(n) for n in range(1, m + 1))
