"""Frame systems ({f_n}, {tau_n}) and their analysis/synthesis/frame operators.

A system is either an explicit finite family or generated from a pair of
operators ``U: X -> l^p`` and ``V: l^p -> X`` via ``f_n = zeta_n U`` and
``tau_n = V e_n``. Generated families are evaluated lazily.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import (
    NotInvertible,
    SingularOperator,
    SpaceMismatch,
    UnboundedCertificate,
    UndecidedInvertibility,
)
from .operator_algebra import (
    Dense,
    FiniteRank,
    NormOptions,
    Operator,
    compose,
    find_noninvertibility_witness,
    invert_finite,
    materialize,
    op_from_json,
    op_to_json,
    operator_pnorm,
    to_matrix,
    NoneFound,
)
from .sequence_core import Functional, ModelSpace, Vec, standard_basis


@dataclass(frozen=True, eq=False)
class FrameSystem:
    space: ModelSpace
    functionals: Optional[tuple] = None
    vectors: Optional[tuple] = None
    U: Optional[Operator] = None
    V: Optional[Operator] = None

    def __post_init__(self):
        if self.is_generated:
            if self.U.domain != self.space or self.V.codomain != self.space:
                raise SpaceMismatch("U must start at and V must end in the frame space")
            if self.U.codomain != self.V.domain:
                raise SpaceMismatch("U and V must share the coefficient space")
            return
        fs, vs = tuple(self.functionals or ()), tuple(self.vectors or ())
        if len(fs) != len(vs):
            raise SpaceMismatch(f"{len(fs)} functionals vs {len(vs)} vectors")
        if not fs:
            raise ValueError("empty frame system")
        for f, v in zip(fs, vs):
            if f.space != self.space or v.space != self.space:
                raise SpaceMismatch("family member outside the frame space")
        object.__setattr__(self, "functionals", fs)
        object.__setattr__(self, "vectors", vs)

    # -- constructors

    @classmethod
    def from_families(cls, space, functionals, vectors) -> "FrameSystem":
        return cls(space, tuple(functionals), tuple(vectors))

    @classmethod
    def generated(cls, space, U: Operator, V: Operator) -> "FrameSystem":
        return cls(space, U=U, V=V)

    @classmethod
    def from_matrices(cls, space: ModelSpace, analysis, synthesis) -> "FrameSystem":
        """Rows of ``analysis`` are the f_n, columns of ``synthesis`` the tau_n."""
        A = np.atleast_2d(np.asarray(analysis, dtype=float))
        B = np.atleast_2d(np.asarray(synthesis, dtype=float))
        if A.shape[::-1] != B.shape or A.shape[1] != space.dim:
            raise SpaceMismatch(f"analysis {A.shape} vs synthesis {B.shape} on {space}")
        fs = [Functional.from_dense(space, row) for row in A]
        vs = [Vec.from_dense(space, col) for col in B.T]
        return cls(space, tuple(fs), tuple(vs))

    # -- structure

    @property
    def p(self) -> float:
        return self.space.p

    @property
    def is_generated(self) -> bool:
        return self.U is not None

    @property
    def count(self) -> Optional[int]:
        if self.is_generated:
            return self.coefficient_space.dim
        return len(self.functionals)

    @property
    def coefficient_space(self) -> ModelSpace:
        if self.is_generated:
            return self.U.codomain
        return ModelSpace.finite(len(self.functionals), self.p)

    def functional(self, n: int) -> Functional:
        """``f_n`` (1-based)."""
        if not self.is_generated:
            return self.functionals[n - 1]
        if self.U.domain.is_finite:
            M = materialize(self.U, self.U.domain.dim)
            return Functional.from_dense(self.space, M[n - 1]) if n <= M.shape[0] \
                else Functional(self.space, {})
        # row n of U lives in columns <= max(block cols, n + left band)
        coeffs, _, s = self.U._form()
        width = max(s, n + max([0] + [-k for k in coeffs])) + 1
        M = materialize(self.U, width)
        row = M[n - 1] if n <= M.shape[0] else np.zeros(width)
        return Functional(self.space, {i + 1: v for i, v in enumerate(row) if v != 0.0})

    def vector(self, n: int) -> Vec:
        """``tau_n`` (1-based)."""
        if not self.is_generated:
            return self.vectors[n - 1]
        e_n, _ = standard_basis(self.coefficient_space, n)
        return self.V(e_n)

    def analysis_matrix(self) -> np.ndarray:
        return to_matrix(analysis_operator(self))

    def synthesis_matrix(self) -> np.ndarray:
        return to_matrix(synthesis_operator(self))

    # -- JSON

    def to_json(self) -> dict:
        out = {"p": self.p, "space": self.space.to_json()}
        if self.is_generated:
            out["generated"] = {"U": op_to_json(self.U), "V": op_to_json(self.V)}
        else:
            out["functionals"] = [f.to_json() for f in self.functionals]
            out["vectors"] = [v.to_json() for v in self.vectors]
        return out

    @classmethod
    def from_json(cls, obj: Mapping, p: Optional[float] = None) -> "FrameSystem":
        p = float(obj["p"]) if p is None else float(p)
        space = ModelSpace.from_json(obj["space"], p)
        if "generated" in obj:
            gen = obj["generated"]
            U = op_from_json(gen["U"], space)
            V = op_from_json(gen["V"], U.codomain, space)
            return cls.generated(space, U, V)
        fs = [Functional.from_json(space, f) for f in obj["functionals"]]
        vs = [Vec.from_json(space, v) for v in obj["vectors"]]
        return cls.from_families(space, fs, vs)


@dataclass(frozen=True)
class BesselBounds:
    c: float
    d: float


@dataclass(frozen=True)
class FrameBounds:
    a: float
    b: float


def analysis_operator(F: FrameSystem) -> Operator:
    """``theta_f: x -> {f_n(x)}_n``."""
    if F.is_generated:
        return F.U
    cs = F.coefficient_space
    if F.space.is_finite:
        return Dense(F.space, cs, np.array([f.dense() for f in F.functionals]))
    pairs = [(standard_basis(cs, n)[0], f) for n, f in enumerate(F.functionals, 1)]
    return FiniteRank(F.space, cs, tuple(pairs))


def synthesis_operator(F: FrameSystem) -> Operator:
    """``theta_tau: {a_n} -> sum_n a_n tau_n``."""
    if F.is_generated:
        return F.V
    cs = F.coefficient_space
    if F.space.is_finite:
        return Dense(cs, F.space, np.array([v.dense() for v in F.vectors]).T)
    pairs = [(v, standard_basis(cs, n)[1]) for n, v in enumerate(F.vectors, 1)]
    return FiniteRank(cs, F.space, tuple(pairs))


def frame_operator(F: FrameSystem) -> Operator:
    """``S_{f,tau} = theta_tau theta_f``."""
    return compose(synthesis_operator(F), analysis_operator(F))


def validate_p_abs(F: FrameSystem, opts: Optional[NormOptions] = None) -> BesselBounds:
    """Analysis and synthesis bounds from certified upper norm bounds."""
    c = operator_pnorm(analysis_operator(F), F.p, opts).upper
    d = operator_pnorm(synthesis_operator(F), F.p, opts).upper
    if not (np.isfinite(c) and np.isfinite(d)):
        raise UnboundedCertificate(f"cannot bound the operators (c={c}, d={d})")
    return BesselBounds(c, d)


def validate_p_asf(F: FrameSystem, opts: Optional[NormOptions] = None,
                   horizon: int = 16) -> FrameBounds:
    """Check the p-ASF property and return certified frame bounds.

    ``b`` is an upper bound of ``||S||`` and ``a = 1 / upper(||S^-1||)``, so
    ``a ||x|| <= ||Sx|| <= b ||x||`` holds for every x. On sequence spaces
    invertibility is never certified: a witness raises ``NotInvertible``,
    otherwise ``UndecidedInvertibility``.
    """
    validate_p_abs(F, opts)
    S = frame_operator(F)
    if not F.space.is_finite:
        w = find_noninvertibility_witness(S, horizon)
        if isinstance(w, NoneFound):
            raise UndecidedInvertibility("invertibility on l^p(N) is not certified")
        raise NotInvertible("frame operator is not invertible", w)
    try:
        S_inv = invert_finite(S)
    except SingularOperator as exc:
        raise NotInvertible(str(exc), find_noninvertibility_witness(S, horizon)) from exc
    b = operator_pnorm(S, F.p, opts).upper
    inv_upper = operator_pnorm(S_inv, F.p, opts).upper
    # 1/upper can round one ulp past b when ||S|| ||S^-1|| = 1
    return FrameBounds(min(1.0 / inv_upper, b), b)


def factorize_abs(F: FrameSystem) -> tuple[Operator, Operator]:
    """``(U, V) = (theta_f, theta_tau)`` so that ``f_n = zeta_n U``, ``tau_n = V e_n``."""
    return analysis_operator(F), synthesis_operator(F)


def build_from_factorization(space: ModelSpace, p: Optional[float],
                             U: Operator, V: Operator) -> FrameSystem:
    """System with ``f_n = zeta_n U`` and ``tau_n = V e_n``."""
    if p is not None and float(p) != space.p:
        raise SpaceMismatch(f"exponent {p} differs from the space's {space.p}")
    if U.domain != space or V.codomain != space or U.codomain != V.domain:
        raise SpaceMismatch("U: X -> l^p and V: l^p -> X do not fit together")
    if space.is_finite and U.codomain.is_finite:
        return FrameSystem.from_matrices(space, to_matrix(U), to_matrix(V))
    return FrameSystem.generated(space, U, V)


def mixed_system(F: FrameSystem, G: FrameSystem) -> FrameSystem:
    """``({f_n}, {omega_n})`` built from F's functionals and G's vectors."""
    return build_from_factorization(F.space, None, analysis_operator(F), synthesis_operator(G))
