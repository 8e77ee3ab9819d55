"""Exact and approximate duals of frame systems.

Notation: ``F = ({f_n}, {tau_n})`` and ``G = ({g_n}, {omega_n})``. With
analysis matrix ``Tf`` (rows f_n) and synthesis matrix ``Tt`` (columns
tau_n), ``F`` and ``G`` are dual when ``Tt Tg = I`` and ``Tw Tf = I``, and
approximately dual when both defects ``I - Tw Tf`` and ``I - Tt Tg`` have
induced p-norm below one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union

import numpy as np

from .errors import (
    ConditionOperatorSingular,
    NormConditionViolated,
    NotFinite,
    NotInvertible,
    PreconditionError,
    SingularOperator,
    SpaceMismatch,
)
from .frames import (
    BesselBounds,
    FrameSystem,
    analysis_operator,
    frame_operator,
    synthesis_operator,
    validate_p_abs,
)
from .operator_algebra import (
    Dense,
    NormCertificate,
    NormOptions,
    Operator,
    Verdict,
    apply,
    compose,
    dense,
    find_noninvertibility_witness,
    identity,
    invert_finite,
    materialize,
    operator_pnorm,
    to_matrix,
)
from .sequence_core import ModelSpace, Vec, p_norm, vector_p_norm

EXACT_TOL = 1e-9
IDENTITY_TOL = 1e-10
PROBE_HORIZON = 16


class DualVerdict(str, Enum):
    EXACT = "ExactDual"
    APPROX = "ApproxDual"
    NOT_APPROX = "NotApproxDual"
    UNDECIDED = "Undecided"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class DualityReport:
    exact_residual: float
    residual_g_tau: float     # max ||x - sum g_n(x) tau_n|| / ||x||
    residual_f_omega: float   # max ||x - sum f_n(x) omega_n|| / ||x||
    matrix_residual: Optional[float]
    cert_fg: NormCertificate  # ||I - theta_omega theta_f||
    cert_gf: NormCertificate  # ||I - theta_tau theta_g||
    verdict: DualVerdict
    trace: str = ""

    def to_dict(self) -> dict:
        return {
            "exact_residual": self.exact_residual,
            "residual_g_tau": self.residual_g_tau,
            "residual_f_omega": self.residual_f_omega,
            "matrix_residual": self.matrix_residual,
            "cert_fg": self.cert_fg.to_dict(),
            "cert_gf": self.cert_gf.to_dict(),
            "verdict": self.verdict.value,
            "trace": self.trace,
        }


@dataclass(frozen=True)
class NeumannIterate:
    N: int
    system: FrameSystem        # ({h_n^(N)}, {rho_n^(N)})
    bound_fg: float            # upper(||I - S_{f,omega}||)^(N+1)
    bound_gf: float            # upper(||I - S_{g,tau}||)^(N+1)
    cert_fg: NormCertificate   # ||I - theta_rho theta_f||
    cert_gf: NormCertificate   # ||I - theta_tau theta_h||
    identity_residual: float

    @property
    def bounds_hold(self) -> bool:
        return (self.cert_fg.upper <= self.bound_fg + EXACT_TOL
                and self.cert_gf.upper <= self.bound_gf + EXACT_TOL)

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "bound_fg": self.bound_fg,
            "bound_gf": self.bound_gf,
            "cert_fg": self.cert_fg.to_dict(),
            "cert_gf": self.cert_gf.to_dict(),
            "identity_residual": self.identity_residual,
            "bounds_hold": self.bounds_hold,
            "system": self.system.to_json(),
        }


@dataclass(frozen=True)
class PerturbationBounds:
    R: float
    Q: float
    c: float
    d: float

    def to_dict(self) -> dict:
        return {"R": self.R, "Q": self.Q, "c": self.c, "d": self.d,
                "dR": self.d * self.R, "cQ": self.c * self.Q}


# ---------------------------------------------------------------- helpers


def _check_pair(F: FrameSystem, G: FrameSystem) -> None:
    if F.space != G.space:
        raise SpaceMismatch(f"systems live in {F.space} and {G.space}")


def _require_finite(F: FrameSystem) -> None:
    if not F.space.is_finite:
        raise NotFinite("this construction needs a finite-dimensional space")


def cross_operators(F: FrameSystem, G: FrameSystem) -> tuple[Operator, Operator]:
    """``(S_{f,omega}, S_{g,tau}) = (theta_omega theta_f, theta_tau theta_g)``."""
    _check_pair(F, G)
    return (compose(synthesis_operator(G), analysis_operator(F)),
            compose(synthesis_operator(F), analysis_operator(G)))


def defect_operators(F: FrameSystem, G: FrameSystem) -> tuple[Operator, Operator]:
    """``(I - theta_omega theta_f, I - theta_tau theta_g)``."""
    S_fw, S_gt = cross_operators(F, G)
    eye = identity(F.space)
    return eye - S_fw, eye - S_gt


def probe_vectors(space: ModelSpace, probes: int, seed: int = 0,
                  horizon: int = PROBE_HORIZON) -> np.ndarray:
    """Basis vectors plus ``probes`` random unit vectors, as columns.

    Random probes are uniform on [-1, 1] componentwise, then p-normalized.
    Sequence-space probes are supported on indices ``<= horizon``.
    """
    n = space.dim if space.is_finite else horizon
    rng = np.random.default_rng(seed)
    R = rng.uniform(-1.0, 1.0, size=(n, probes))
    norms = np.array([p_norm(c, space.p) for c in R.T])
    R = R / np.where(norms > 0, norms, 1.0)
    return np.hstack([np.eye(n), R])


def _max_relative(D: Operator, X: np.ndarray, p: float) -> float:
    Y = materialize(D, X.shape[0]) @ X
    return max(p_norm(y, p) / p_norm(x, p) for y, x in zip(Y.T, X.T))


def _combine(cert_fg: NormCertificate, cert_gf: NormCertificate) -> DualVerdict:
    verdicts = (cert_fg.verdict_lt_one, cert_gf.verdict_lt_one)
    if all(v is Verdict.YES for v in verdicts):
        return DualVerdict.APPROX
    if any(v is Verdict.NO for v in verdicts):
        return DualVerdict.NOT_APPROX
    return DualVerdict.UNDECIDED


def _report(F, G, probes, seed, opts, exact_check: bool, trace="") -> DualityReport:
    D_fw, D_gt = defect_operators(F, G)
    X = probe_vectors(F.space, probes, seed)
    r_gt = _max_relative(D_gt, X, F.p)
    r_fw = _max_relative(D_fw, X, F.p)
    mat = None
    if F.space.is_finite:
        mat = float(max(np.abs(to_matrix(D_gt)).max(), np.abs(to_matrix(D_fw)).max()))
    cert_fg = operator_pnorm(D_fw, F.p, opts)
    cert_gf = operator_pnorm(D_gt, F.p, opts)
    residual = max(r_gt, r_fw)
    verdict = _combine(cert_fg, cert_gf)
    if exact_check and residual <= EXACT_TOL and (mat is None or mat <= EXACT_TOL):
        verdict = DualVerdict.EXACT
    return DualityReport(residual, r_gt, r_fw, mat, cert_fg, cert_gf, verdict, trace)


def _as_matrix(op: Union[Operator, np.ndarray, None], shape) -> np.ndarray:
    if op is None:
        return np.zeros(shape)
    M = to_matrix(op) if isinstance(op, Operator) else np.atleast_2d(np.asarray(op, float))
    if M.shape != shape:
        raise SpaceMismatch(f"operator has shape {M.shape}, expected {shape}")
    return M


def _inverse(M: np.ndarray, p: float, what: str) -> np.ndarray:
    try:
        return to_matrix(invert_finite(dense(M, p)))
    except SingularOperator as exc:
        w = find_noninvertibility_witness(dense(M, p), M.shape[0])
        raise NotInvertible(f"{what} is not invertible: {exc}", w) from exc


def _frame_matrices(F: FrameSystem):
    _require_finite(F)
    Tf, Tt = F.analysis_matrix(), F.synthesis_matrix()
    S_inv = _inverse(Tt @ Tf, F.p, "frame operator")
    return Tf, Tt, S_inv


# ------------------------------------------------------------- operations


def is_exact_dual(F: FrameSystem, G: FrameSystem, probes: int = 32, seed: int = 0,
                  opts: Optional[NormOptions] = None) -> DualityReport:
    """Check ``x = sum g_n(x) tau_n = sum f_n(x) omega_n``.

    Residuals are measured on all basis vectors and ``probes`` random unit
    vectors; on finite spaces both cross operators are also compared with
    the identity entrywise. ``ExactDual`` needs every residual <= 1e-9.
    """
    _check_pair(F, G)
    return _report(F, G, probes, seed, opts, exact_check=True)


def certify_approx_dual(F: FrameSystem, G: FrameSystem,
                        opts: Optional[NormOptions] = None,
                        probes: int = 16, seed: int = 0) -> DualityReport:
    """Certify ``||I - theta_omega theta_f|| < 1`` and ``||I - theta_tau theta_g|| < 1``."""
    _check_pair(F, G)
    return _report(F, G, probes, seed, opts, exact_check=False)


def reconstruction_error(F: FrameSystem, G: FrameSystem, x: Vec) -> tuple[float, float]:
    """``(||x - sum f_n(x) omega_n||, ||x - sum g_n(x) tau_n||)``."""
    _check_pair(F, G)
    if not x.entries:
        raise ValueError("reconstruction error needs a nonzero vector")
    S_fw, S_gt = cross_operators(F, G)
    return (vector_p_norm(x - apply(S_fw, x)), vector_p_norm(x - apply(S_gt, x)))


def canonical_dual(F: FrameSystem) -> FrameSystem:
    """``({f_n S^-1}, {S^-1 tau_n})``, the dual obtained with U = V = 0."""
    Tf, Tt, S_inv = _frame_matrices(F)
    return FrameSystem.from_matrices(F.space, Tf @ S_inv, S_inv @ Tt)


def canonical_duals(F: FrameSystem) -> tuple[FrameSystem, FrameSystem]:
    """The two reconstruction systems ``({f_n S^-1}, {tau_n})`` and ``({f_n}, {S^-1 tau_n})``.

    The first reconstructs through ``x = sum (f_n S^-1)(x) tau_n`` and the
    second through ``x = sum f_n(x) S^-1 tau_n``; see ``canonical_dual`` for
    the system that satisfies both identities at once.
    """
    Tf, Tt, S_inv = _frame_matrices(F)
    left = FrameSystem.from_matrices(F.space, Tf @ S_inv, Tt)
    right = FrameSystem.from_matrices(F.space, Tf, S_inv @ Tt)
    return left, right


def parametrize_dual(F: FrameSystem, U=None, V=None) -> FrameSystem:
    """Dual of ``F`` parametrized by ``U: X -> l^p`` and ``V: l^p -> X``.

    ``g_n = f_n S^-1 + zeta_n U - f_n S^-1 theta_tau U`` and
    ``omega_n = S^-1 tau_n + V e_n - V theta_f S^-1 tau_n``. The result is
    rejected unless ``S^-1 + VU - V theta_f S^-1 theta_tau U`` is invertible.
    """
    Tf, Tt, S_inv = _frame_matrices(F)
    m, d = Tf.shape
    Um, Vm = _as_matrix(U, (m, d)), _as_matrix(V, (d, m))
    Tg = Tf @ S_inv + Um - Tf @ S_inv @ Tt @ Um
    Tw = S_inv @ Tt + Vm - Vm @ Tf @ S_inv @ Tt
    C = S_inv + Vm @ Um - Vm @ Tf @ S_inv @ Tt @ Um
    try:
        invert_finite(dense(C, F.p))
    except SingularOperator as exc:
        w = find_noninvertibility_witness(dense(C, F.p), d)
        raise ConditionOperatorSingular(f"condition operator: {exc}", w) from exc
    return FrameSystem.from_matrices(F.space, Tg, Tw)


def dual_from_approx(F: FrameSystem, G: FrameSystem,
                     opts: Optional[NormOptions] = None) -> tuple[FrameSystem, FrameSystem]:
    """Exact duals generated by an approximately dual pair.

    Returns ``({g_n S_gt^-1}, {S_fw^-1 omega_n})`` (dual for F) and
    ``({f_n S_fw^-1}, {S_gt^-1 tau_n})`` (dual for G).
    """
    _require_approx(F, G, opts)
    Tf, Tt = F.analysis_matrix(), F.synthesis_matrix()
    Tg, Tw = G.analysis_matrix(), G.synthesis_matrix()
    S_gt_inv = _inverse(Tt @ Tg, F.p, "S_{g,tau}")
    S_fw_inv = _inverse(Tw @ Tf, F.p, "S_{f,omega}")
    for_f = FrameSystem.from_matrices(F.space, Tg @ S_gt_inv, S_fw_inv @ Tw)
    for_g = FrameSystem.from_matrices(F.space, Tf @ S_fw_inv, S_gt_inv @ Tt)
    return for_f, for_g


def factorize_approx_dual(F: FrameSystem, G: FrameSystem,
                          opts: Optional[NormOptions] = None):
    """``(U, V, H)`` with ``U = theta_tau theta_g``, ``V = theta_omega theta_f``.

    ``H = ({g_n U^-1}, {V^-1 omega_n})`` is an exact dual of ``F``.
    """
    _require_approx(F, G, opts)
    Tf, Tt = F.analysis_matrix(), F.synthesis_matrix()
    Tg, Tw = G.analysis_matrix(), G.synthesis_matrix()
    Um, Vm = Tt @ Tg, Tw @ Tf
    U_inv, V_inv = _inverse(Um, F.p, "U"), _inverse(Vm, F.p, "V")
    H = FrameSystem.from_matrices(F.space, Tg @ U_inv, V_inv @ Tw)
    sp = F.space
    return Dense(sp, sp, Um), Dense(sp, sp, Vm), H


def parametrize_approx_dual_asf(F: FrameSystem, U, V, A=None, B=None,
                                opts: Optional[NormOptions] = None):
    """Approximate dual of ``F`` from ``U, V: X -> X`` and ``A: X -> l^p``, ``B: l^p -> X``.

    ``g_n = f_n S^-1 U + zeta_n A U - f_n S^-1 theta_tau A U`` and
    ``omega_n = V S^-1 tau_n + V B e_n - V B theta_f S^-1 tau_n``; needs
    ``||I - U||, ||I - V|| < 1`` (certified) and an invertible
    ``S^-1 + BA - B theta_f S^-1 theta_tau A``. Returns ``(G, report)``.
    """
    Tf, Tt, S_inv = _frame_matrices(F)
    m, d = Tf.shape
    Um, Vm = _as_matrix(U, (d, d)), _as_matrix(V, (d, d))
    Am, Bm = _as_matrix(A, (m, d)), _as_matrix(B, (d, m))
    eye = np.eye(d)
    for name, M in (("U", Um), ("V", Vm)):
        cert = operator_pnorm(dense(eye - M, F.p), F.p, opts)
        if cert.verdict_lt_one is not Verdict.YES:
            raise NormConditionViolated(
                f"||I - {name}|| not certified < 1 (upper {cert.upper:.6g})")
    C = S_inv + Bm @ Am - Bm @ Tf @ S_inv @ Tt @ Am
    try:
        invert_finite(dense(C, F.p))
    except SingularOperator as exc:
        w = find_noninvertibility_witness(dense(C, F.p), d)
        raise ConditionOperatorSingular(f"condition operator: {exc}", w) from exc
    Tg = (Tf @ S_inv + Am - Tf @ S_inv @ Tt @ Am) @ Um
    Tw = Vm @ (S_inv @ Tt + Bm - Bm @ Tf @ S_inv @ Tt)
    G = FrameSystem.from_matrices(F.space, Tg, Tw)
    trace = ("condition operator S^-1 + BA - B theta_f S^-1 theta_tau A invertible; "
             "variant with V in place of B is not type-correct and was not evaluated")
    report = certify_approx_dual(F, G, opts)
    return G, DualityReport(**{**report.__dict__, "trace": trace})


def neumann_iterate(F: FrameSystem, G: FrameSystem, N: int,
                    opts: Optional[NormOptions] = None) -> NeumannIterate:
    """Depth-N Neumann refinement of an approximate dual.

    ``h_n = g_n sum_{m<=N} (I - S_gt)^m`` and
    ``rho_n = sum_{m<=N} (I - S_fw)^m omega_n``. The identities
    ``theta_rho theta_f = I - (I - S_fw)^(N+1)`` and
    ``theta_tau theta_h = I - (I - S_gt)^(N+1)`` are checked to 1e-10.
    """
    if N < 0:
        raise ValueError("depth must be >= 0")
    report = _require_approx(F, G, opts)
    Tf, Tt = F.analysis_matrix(), F.synthesis_matrix()
    Tg, Tw = G.analysis_matrix(), G.synthesis_matrix()
    d = Tf.shape[1]
    eye = np.eye(d)
    D_f, D_g = eye - Tw @ Tf, eye - Tt @ Tg
    P_f, P_g = eye.copy(), eye.copy()
    pow_f, pow_g = eye.copy(), eye.copy()
    for _ in range(N):
        pow_f, pow_g = pow_f @ D_f, pow_g @ D_g
        P_f, P_g = P_f + pow_f, P_g + pow_g
    pow_f, pow_g = pow_f @ D_f, pow_g @ D_g
    Th, Trho = Tg @ P_g, P_f @ Tw
    resid = float(max(np.abs(Trho @ Tf - (eye - pow_f)).max(),
                      np.abs(Tt @ Th - (eye - pow_g)).max()))
    if resid > IDENTITY_TOL:
        raise ArithmeticError(f"Neumann identity residual {resid:.3g} exceeds {IDENTITY_TOL:g}")
    system = FrameSystem.from_matrices(F.space, Th, Trho)
    new = certify_approx_dual(F, system, opts)
    return NeumannIterate(
        N, system,
        report.cert_fg.upper ** (N + 1), report.cert_gf.upper ** (N + 1),
        new.cert_fg, new.cert_gf, resid)


def perturbation_approx_dual(H: FrameSystem, G: FrameSystem, F: FrameSystem,
                             opts: Optional[NormOptions] = None):
    """Approximate duality of ``G`` for a perturbation ``F`` of ``H``.

    ``G`` must be an exact dual of ``H``. With ``R >= ||theta_f - theta_h||``,
    ``Q >= ||theta_tau - theta_rho||`` and Bessel bounds ``(c, d)`` of ``G``,
    ``d R < 1`` and ``c Q < 1`` imply ``||I - theta_omega theta_f|| <= d R``
    and ``||I - theta_tau theta_g|| <= c Q``. When a hypothesis is not
    certified the verdict is ``Inconclusive``.
    """
    _check_pair(H, G)
    _check_pair(H, F)
    base = is_exact_dual(H, G, opts=opts)
    if base.verdict is not DualVerdict.EXACT:
        raise PreconditionError(f"G is not an exact dual of H (residual {base.exact_residual:.3g})")
    eps = (opts or NormOptions()).eps_cert
    R = operator_pnorm(analysis_operator(F) - analysis_operator(H), F.p, opts).upper
    Q = operator_pnorm(synthesis_operator(F) - synthesis_operator(H), F.p, opts).upper
    bb = validate_p_abs(G, opts)
    bounds = PerturbationBounds(R, Q, bb.c, bb.d)
    report = certify_approx_dual(F, G, opts)
    dR, cQ = bb.d * R, bb.c * Q
    if not (dR < 1.0 - eps and cQ < 1.0 - eps):
        trace = f"hypotheses not certified: dR={dR:.6g}, cQ={cQ:.6g}"
        return bounds, DualityReport(**{**report.__dict__, "verdict": DualVerdict.INCONCLUSIVE,
                                        "trace": trace})
    ok = (report.verdict is DualVerdict.APPROX
          and report.cert_fg.upper <= dR + EXACT_TOL
          and report.cert_gf.upper <= cQ + EXACT_TOL)
    trace = f"dR={dR:.6g}, cQ={cQ:.6g}"
    if not ok:
        trace += "; certificate disagrees with the perturbation bounds"
        return bounds, DualityReport(**{**report.__dict__, "verdict": DualVerdict.UNDECIDED,
                                        "trace": trace})
    return bounds, DualityReport(**{**report.__dict__, "trace": trace})


def _require_approx(F, G, opts) -> DualityReport:
    _require_finite(F)
    report = certify_approx_dual(F, G, opts)
    if report.verdict is not DualVerdict.APPROX:
        raise PreconditionError(f"pair is not certified approximately dual ({report.verdict.value})")
    return report
