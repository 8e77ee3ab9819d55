import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from framelab import excess
from framelab.errors import NotFinite, PreconditionError, TooLarge
from framelab.excess import ExperimentConfig, p_excess, p_excess_exhaustive, removal_is_valid
from framelab.frames import FrameSystem
from framelab.gallery import example_second, random_p_asf
from framelab.sequence_core import ModelSpace


def _system(analysis, synthesis, p=2.0):
    A = np.asarray(analysis, float)
    return FrameSystem.from_matrices(ModelSpace.finite(A.shape[1], p), A, synthesis)


def test_basis_has_no_excess():
    F = _system(np.eye(3), np.eye(3))
    assert p_excess(F).value == 0 and p_excess(F).witness == ()


def test_repeated_basis():
    A = np.vstack([np.eye(2), np.eye(2)])
    F = _system(A, A.T)
    res = p_excess(F)
    assert res.value == 2 and removal_is_valid(F, res.witness)
    assert p_excess_exhaustive(F) == 2


def test_families_must_span_simultaneously():
    # removing index 3 keeps {f} spanning but not {tau}
    A = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    T = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    F = _system(A, T)
    assert p_excess(F).value == 1 and p_excess(F).witness == (2,)


def test_greedy_is_a_lower_bound():
    F = random_p_asf(3, 7, 2.0, 0.3, 1)
    g = p_excess(F, "Greedy")
    assert g.is_lower_bound and g.value <= p_excess(F).value
    assert removal_is_valid(F, g.witness)


def test_guards():
    with pytest.raises(NotFinite):
        p_excess(example_second().F)
    with pytest.raises(PreconditionError):
        p_excess(_system([[1.0, 0.0]], [[1.0], [0.0]]))
    big = random_p_asf(1, 21, 2.0, 0.0, 0)
    with pytest.raises(TooLarge):
        p_excess(big)
    with pytest.raises(ValueError):
        p_excess(_system(np.eye(2), np.eye(2)), "Magic")
    with pytest.raises(ValueError):
        ExperimentConfig(max_dim=5)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(0, 4), st.integers(0, 2**31), st.booleans())
def test_brute_force_matches_exhaustive(d, extra, seed, sparse):
    rng = np.random.default_rng(seed)
    m = d + extra
    A = rng.integers(-1, 2, size=(m, d)).astype(float) if sparse else rng.standard_normal((m, d))
    T = rng.integers(-1, 2, size=(d, m)).astype(float) if sparse else rng.standard_normal((d, m))
    A[:d] += np.eye(d) * 3
    T[:, :d] += np.eye(d) * 3
    F = _system(A, T)
    res = p_excess(F)
    assert res.value == p_excess_exhaustive(F)
    assert removal_is_valid(F, res.witness)


def test_trial_seeds_independent_of_workers():
    conf = ExperimentConfig()
    a = excess.excess_invariance_trial(conf, trials=6, seed=3, workers=1)
    b = excess.excess_invariance_trial(conf, trials=6, seed=3, workers=2)
    assert a.rows == b.rows
    assert a.all_validated and 0.0 <= a.equality_rate <= 1.0
    assert len(a.csv_rows()) == 6 and a.to_dict()["config"]["seed"] == 3


def test_custom_generator():
    def gen(seed):
        A = np.vstack([np.eye(2), np.eye(2)])
        F = _system(A, A.T / 2)
        return F, F
    rep = excess.excess_invariance_trial(trials=2, generator=gen)
    assert all(r.excess_F == r.excess_G == 2 for r in rep.rows)
