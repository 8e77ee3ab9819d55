"""p-excess of finite frame systems and the excess-invariance experiment."""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .duality import DualVerdict, certify_approx_dual, parametrize_approx_dual_asf
from .errors import (
    FrameLabError,
    GeneratorExhausted,
    NotFinite,
    PreconditionError,
    TooLarge,
)
from .frames import FrameSystem, validate_p_asf
from .gallery import _scaled_perturbation, random_p_asf

RANK_RTOL = 1e-9
BRUTE_FORCE_CAP = 20
RETRIES_PER_TRIAL = 100

BRUTE = "BruteForce"
GREEDY = "Greedy"


@dataclass(frozen=True)
class ExcessResult:
    value: int
    witness: tuple
    method: str

    @property
    def is_lower_bound(self) -> bool:
        return self.method == GREEDY


def _rank(M: np.ndarray) -> int:
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > RANK_RTOL * s[0])) if s[0] > 0 else 0


def _families(F: FrameSystem):
    if not F.space.is_finite or F.is_generated:
        raise NotFinite("p-excess needs a finite family on a finite space")
    return F.analysis_matrix(), F.synthesis_matrix()


def _keeps_span(Tf, Tt, keep, d) -> bool:
    keep = list(keep)
    return _rank(Tf[keep]) == d and _rank(Tt[:, keep]) == d


def removal_is_valid(F: FrameSystem, witness: Sequence[int]) -> bool:
    """Do both families still span after deleting the (1-based) indices?"""
    Tf, Tt = _families(F)
    m, d = Tf.shape
    drop = {i - 1 for i in witness}
    return _keeps_span(Tf, Tt, [i for i in range(m) if i not in drop], d)


def p_excess(F: FrameSystem, method: str = BRUTE) -> ExcessResult:
    """Largest set of indices whose removal leaves both families spanning.

    ``BruteForce`` enumerates subsets by decreasing size and stops at the
    first valid one (exact; m <= 20). ``Greedy`` drops one redundant index at
    a time and returns a lower bound.
    """
    Tf, Tt = _families(F)
    m, d = Tf.shape
    if not _keeps_span(Tf, Tt, range(m), d):
        raise PreconditionError("the full family does not span")
    if method == GREEDY:
        removed: list = []
        for i in range(m):
            keep = [j for j in range(m) if j != i and j not in removed]
            if _keeps_span(Tf, Tt, keep, d):
                removed.append(i)
        return ExcessResult(len(removed), tuple(i + 1 for i in removed), GREEDY)
    if method != BRUTE:
        raise ValueError(f"unknown method {method!r}")
    if m > BRUTE_FORCE_CAP:
        raise TooLarge(f"brute force is capped at m = {BRUTE_FORCE_CAP}, got {m}")
    for size in range(m - d, 0, -1):
        for drop in itertools.combinations(range(m), size):
            dropped = set(drop)
            if _keeps_span(Tf, Tt, [j for j in range(m) if j not in dropped], d):
                return ExcessResult(size, tuple(i + 1 for i in drop), BRUTE)
    return ExcessResult(0, (), BRUTE)


def p_excess_exhaustive(F: FrameSystem) -> int:
    """Reference value: scan all 2^m subsets with ``numpy.linalg.matrix_rank``."""
    Tf, Tt = _families(F)
    m, d = Tf.shape

    def full(M):
        if M.size == 0:
            return False
        top = np.linalg.norm(M, 2)
        return top > 0 and np.linalg.matrix_rank(M, tol=RANK_RTOL * top) == d

    best = -1
    for mask in range(1 << m):
        keep = [j for j in range(m) if not mask >> j & 1]
        size = m - len(keep)
        if size > best and full(Tf[keep]) and full(Tt[:, keep]):
            best = size
    if best < 0:
        raise PreconditionError("the full family does not span")
    return best


# ----------------------------------------------------------- experiment


@dataclass(frozen=True)
class ExperimentConfig:
    max_dim: int = 3
    max_m: int = 6
    p_choices: tuple = (1.0, 1.5, 2.0, 3.0)
    spread: float = 0.3
    defect: float = 0.5
    structured: float = 0.5   # probability of a degenerate edit, see _structure

    def __post_init__(self):
        if not (1 <= self.max_dim <= 4 and self.max_dim <= self.max_m <= 8):
            raise ValueError("the experiment is limited to dim <= 4, m <= 8")


@dataclass(frozen=True)
class TrialRow:
    trial: int
    seed: int
    dim: int
    m: int
    p: float
    excess_F: int
    excess_G: int
    equal: bool
    validated: bool
    witness_F: str
    witness_G: str
    attempts: int


@dataclass(frozen=True)
class InvarianceTrialReport:
    trials: int
    rows: tuple
    config: dict = field(default_factory=dict)

    @property
    def equality_rate(self) -> float:
        return sum(r.equal for r in self.rows) / len(self.rows) if self.rows else 0.0

    @property
    def all_validated(self) -> bool:
        return all(r.validated for r in self.rows)

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "equality_rate": self.equality_rate,
            "equal_count": sum(r.equal for r in self.rows),
            "all_validated": self.all_validated,
            "config": self.config,
            "rows": [asdict(r) for r in self.rows],
        }

    def csv_rows(self) -> list[dict]:
        return [asdict(r) for r in self.rows]


def trial_seed(seed: int, trial: int) -> int:
    """Per-trial seed depending only on ``(seed, trial)``."""
    return int(np.random.SeedSequence([seed, trial]).generate_state(1)[0])


def _structure(F: FrameSystem, rng) -> FrameSystem:
    """Repeat a member, zero one out, or sparsify both families.

    These edits give degenerate rank patterns for the subset search. They do
    not change the value: an invertible ``S = Tt Tf`` has a nonzero
    Cauchy-Binet term ``det Tt[:, K] det Tf[K]``, so every finite p-ASF has
    excess exactly m - dim.
    """
    Tf, Tt = F.analysis_matrix().copy(), F.synthesis_matrix().copy()
    m = Tf.shape[0]
    i, j = rng.choice(m, size=2, replace=False) if m > 1 else (0, 0)
    mode = rng.integers(3)
    if mode == 0:
        Tf[j], Tt[:, j] = Tf[i], Tt[:, i]
    elif mode == 1:
        Tf[j], Tt[:, j] = 0.0, 0.0
    else:
        Tf[rng.uniform(size=Tf.shape) < 0.5] = 0.0
        Tt[rng.uniform(size=Tt.shape) < 0.5] = 0.0
    return FrameSystem.from_matrices(F.space, Tf, Tt)


def random_invariance_pair(config: ExperimentConfig, seed: int):
    """Draw ``(F, G)``: a p-ASF and a certified approximately dual p-ASF.

    ``G`` comes from the approximate-dual parametrization with random
    ``U, V`` near the identity and random ``A, B``.
    """
    rng = np.random.default_rng(seed)
    dim = int(rng.integers(1, config.max_dim + 1))
    m = int(rng.integers(dim, config.max_m + 1))
    p = float(rng.choice(config.p_choices))
    F = random_p_asf(dim, m, p, config.spread, int(rng.integers(2**31)))
    if rng.uniform() < config.structured:
        F = _structure(F, rng)
    validate_p_asf(F)
    eye = np.eye(dim)
    U = eye + _scaled_perturbation(rng, dim, config.defect * rng.uniform())
    V = eye + _scaled_perturbation(rng, dim, config.defect * rng.uniform())
    scale = rng.choice([0.0, 0.1, 1.0])
    A = scale * rng.uniform(-1, 1, size=(m, dim))
    B = scale * rng.uniform(-1, 1, size=(dim, m))
    G, report = parametrize_approx_dual_asf(F, U, V, A, B)
    if report.verdict is not DualVerdict.APPROX:
        raise PreconditionError("pair not certified")
    validate_p_asf(G)
    return F, G


def _run_trial(args):
    trial, seed, config, generator = args
    s = trial_seed(seed, trial)
    gen = generator or (lambda k: random_invariance_pair(config, k))
    for attempt in range(RETRIES_PER_TRIAL):
        try:
            F, G = gen(trial_seed(s, attempt))
        except FrameLabError:
            continue
        if certify_approx_dual(F, G).verdict is not DualVerdict.APPROX:
            continue
        ef, eg = p_excess(F), p_excess(G)
        validated = (ef.value == p_excess_exhaustive(F) and eg.value == p_excess_exhaustive(G)
                     and removal_is_valid(F, ef.witness) and removal_is_valid(G, eg.witness))
        Tf = F.analysis_matrix()
        return TrialRow(
            trial, s, Tf.shape[1], Tf.shape[0], F.p, ef.value, eg.value,
            ef.value == eg.value, validated,
            " ".join(map(str, ef.witness)), " ".join(map(str, eg.witness)), attempt + 1)
    raise GeneratorExhausted(f"trial {trial}: no certified pair in {RETRIES_PER_TRIAL} draws")


def excess_invariance_trial(config: Optional[ExperimentConfig] = None, trials: int = 200,
                            seed: int = 0, workers: int = 1,
                            generator: Optional[Callable] = None) -> InvarianceTrialReport:
    """Compare p-Exc(F) and p-Exc(G) over random approximately dual pairs.

    ``generator(seed) -> (F, G)`` overrides the default pair sampler. Rows are
    ordered by trial index whatever ``workers`` is.
    """
    config = config or ExperimentConfig()
    jobs = [(t, seed, config, generator) for t in range(trials)]
    if workers > 1 and generator is None:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_trial, jobs))
    else:
        rows = [_run_trial(j) for j in jobs]
    return InvarianceTrialReport(trials, tuple(rows), {**asdict(config), "seed": seed})
