"""Worked shift-operator examples and seeded random instance generators."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .duality import DualVerdict, canonical_dual, certify_approx_dual
from .errors import GeneratorExhausted
from .frames import FrameSystem
from .operator_algebra import (
    Verdict,
    identity,
    left_shift,
    right_shift,
)
from .sequence_core import ModelSpace, check_exponent

REJECTION_BUDGET = 100


@dataclass(frozen=True)
class GalleryEntry:
    name: str
    F: FrameSystem
    G: FrameSystem
    expected: dict = field(default_factory=dict)


def example_independent(p: float = 2.0) -> GalleryEntry:
    """f_n = zeta_n, tau_n = R e_n, g_n = zeta_n L, omega_n = e_n on l^p(N).

    The first defect ``I - theta_omega theta_f`` vanishes while the second
    is ``I - RL``, of norm exactly one: the two approximate-duality
    conditions are independent.
    """
    sp = ModelSpace.sequence(check_exponent(p))
    I, R, L = identity(sp), right_shift(sp.p), left_shift(sp.p)
    F = FrameSystem.generated(sp, I, R)
    G = FrameSystem.generated(sp, L, I)
    expected = {
        "defect_fg": 0.0, "defect_gf": 1.0,
        "cert_fg": Verdict.YES, "cert_gf": Verdict.NO,
        "verdict": DualVerdict.NOT_APPROX,
    }
    return GalleryEntry("example24", F, G, expected)


def example_second(p: float = 2.0) -> GalleryEntry:
    """f_n = zeta_n, tau_n = L e_n, g_n = zeta_n R, omega_n = e_n on l^p(N).

    Approximately dual (both defects vanish) although neither frame operator
    (``L`` and ``R``) is invertible.
    """
    sp = ModelSpace.sequence(check_exponent(p))
    I, R, L = identity(sp), right_shift(sp.p), left_shift(sp.p)
    F = FrameSystem.generated(sp, I, L)
    G = FrameSystem.generated(sp, R, I)
    expected = {
        "defect_fg": 0.0, "defect_gf": 0.0,
        "cert_fg": Verdict.YES, "cert_gf": Verdict.YES,
        "verdict": DualVerdict.APPROX,
        "witness_S_f_tau": ("kernel_vec", 1),
        "witness_S_g_omega": ("range_gap", 1, 1.0),
    }
    return GalleryEntry("example25", F, G, expected)


def _scaled_perturbation(rng, d: int, size: float) -> np.ndarray:
    """Random d x d matrix whose column and row abs-sums are all <= size."""
    E = rng.uniform(-1.0, 1.0, size=(d, d))
    A = np.abs(E)
    top = max(A.sum(axis=0).max(), A.sum(axis=1).max())
    return E * (size / top) if top > 0 else E


def random_p_asf(dim: int, m: int, p: float = 2.0, spread: float = 0.3,
                 seed: int = 0) -> FrameSystem:
    """Random p-ASF whose frame operator is ``I + E`` with ``||E||_1, ||E||_inf <= spread``.

    Built from a perturbed partition of identity: analysis rows
    ``Pi [I; W]`` with a random row permutation ``Pi``, and synthesis
    ``(I + E) [I - ZW, Z] Pi^T``.
    """
    if m < dim:
        raise ValueError("need m >= dim")
    if not 0.0 <= spread < 1.0:
        raise ValueError("spread must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    k = m - dim
    W = rng.uniform(-1.0, 1.0, size=(k, dim))
    Z = rng.uniform(-1.0, 1.0, size=(dim, k)) / max(k, 1)
    perm = rng.permutation(m)
    P = np.eye(m)[perm]
    analysis = P @ np.vstack([np.eye(dim), W])
    synthesis0 = np.hstack([np.eye(dim) - Z @ W, Z]) @ P.T
    E = _scaled_perturbation(rng, dim, spread * rng.uniform()) if spread > 0 else 0.0
    synthesis = (np.eye(dim) + E) @ synthesis0
    return FrameSystem.from_matrices(ModelSpace.finite(dim, p), analysis, synthesis)


def random_approx_dual_pair(dim: int, m: int, p: float = 2.0, defect: float = 0.2,
                            seed: int = 0, spread: float = 0.3):
    """``(F, G)`` with ``G`` a multiplicative perturbation of F's canonical dual.

    ``G = ({g_n U}, {V omega_n})`` with ``U = I + E1``, ``V = I + E2`` and
    column/row abs-sums of ``E1``, ``E2`` at most ``defect``, so both defect
    norms are certified ``<= defect``.
    """
    if not 0.0 <= defect < 1.0:
        raise ValueError("defect must lie in [0, 1)")
    base = np.random.SeedSequence(seed)
    for child in base.spawn(REJECTION_BUDGET):
        rng = np.random.default_rng(child)
        F = random_p_asf(dim, m, p, spread, int(rng.integers(2**31)))
        G0 = canonical_dual(F)
        if defect == 0.0:
            return F, G0
        E1 = _scaled_perturbation(rng, dim, defect * rng.uniform())
        E2 = _scaled_perturbation(rng, dim, defect * rng.uniform())
        eye = np.eye(dim)
        G = FrameSystem.from_matrices(
            F.space, G0.analysis_matrix() @ (eye + E1), (eye + E2) @ G0.synthesis_matrix())
        if certify_approx_dual(F, G).verdict is DualVerdict.APPROX:
            return F, G
    raise GeneratorExhausted(f"no certified pair after {REJECTION_BUDGET} draws")


ENTRIES = {"example24": example_independent, "example25": example_second}
