import numpy as np
import pytest

from framelab import duality, frames
from framelab.duality import DualVerdict
from framelab.errors import GeneratorExhausted
from framelab.gallery import ENTRIES, random_approx_dual_pair, random_p_asf


@pytest.mark.parametrize("name", sorted(ENTRIES))
@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0])
def test_entries_match_expectations(name, p):
    e = ENTRIES[name](p)
    rep = duality.certify_approx_dual(e.F, e.G)
    assert rep.verdict is e.expected["verdict"]
    assert rep.cert_fg.upper == e.expected["defect_fg"]
    assert rep.cert_gf.upper == e.expected["defect_gf"]


def test_generators_are_deterministic():
    a, b = random_p_asf(3, 5, 2.0, 0.3, 9), random_p_asf(3, 5, 2.0, 0.3, 9)
    assert np.array_equal(a.analysis_matrix(), b.analysis_matrix())
    F1, G1 = random_approx_dual_pair(2, 4, 1.5, 0.3, 4)
    F2, G2 = random_approx_dual_pair(2, 4, 1.5, 0.3, 4)
    assert np.array_equal(G1.synthesis_matrix(), G2.synthesis_matrix())


def test_seven_seed_frame_bounds():
    F = random_p_asf(4, 7, 3.0, 0.3, 7)
    fb = frames.validate_p_asf(F)
    assert fb.a >= 0.7 - 1e-9 and fb.b <= 1.3 + 1e-9


def test_generator_argument_checks():
    with pytest.raises(ValueError):
        random_p_asf(3, 2)
    with pytest.raises(ValueError):
        random_p_asf(2, 3, spread=1.0)
    with pytest.raises(ValueError):
        random_approx_dual_pair(2, 3, defect=1.0)


def test_zero_defect_returns_canonical_dual():
    F, G = random_approx_dual_pair(2, 3, 2.0, 0.0, 1)
    assert duality.is_exact_dual(F, G).verdict is DualVerdict.EXACT
