"""Operator descriptors on model spaces and certified induced p-norm bounds.

Every descriptor is column-finite: it maps finitely supported vectors to
finitely supported vectors. On sequence spaces each descriptor also has a
banded normal form ``T + F`` where ``T = sum_k c_k S^k`` is a finite
combination of shift powers and ``F`` is supported in a finite block. The
normal form is what lets us compute exact column and row sups (and so
certified upper bounds) for operators on l^p(N).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional, Sequence

import numpy as np
import scipy.linalg

from .errors import NotFinite, SingularOperator, SpaceMismatch
from .sequence_core import (
    SEQUENCE,
    Functional,
    ModelSpace,
    Vec,
    check_exponent,
    p_norm,
)

EPS_CERT = 1e-8
EPS_MACHINE = 64 * np.finfo(float).eps
DEFAULT_HORIZONS = (4, 8, 16, 32, 64)
COND_LIMIT = 1e12
INVERSE_RESIDUAL = 1e-10
KERNEL_TOL = 1e-10
# normal-form materialization beyond this many columns is not attempted
MAX_SYMBOLIC_COLUMNS = 20000


# ---------------------------------------------------------------- descriptors


@dataclass(frozen=True, eq=False)
class Operator:
    """Base class. Subclasses fill in the coordinatewise and block actions."""

    domain: ModelSpace
    codomain: ModelSpace

    # coordinatewise action on {index: value}
    def _apply_entries(self, x: Mapping[int, float]) -> dict:
        raise NotImplementedError

    # action on the columns of X; rows of X index the domain (1..X.shape[0])
    def _apply_block(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    # (toeplitz coefficients, block rows, block cols)
    def _form(self):
        raise NotImplementedError

    def __matmul__(self, other: "Operator") -> "Operator":
        return compose(self, other)

    def __add__(self, other: "Operator") -> "Operator":
        return add(self, other)

    def __sub__(self, other: "Operator") -> "Operator":
        return add(self, scaled(-1.0, other))

    def __rmul__(self, c: float) -> "Operator":
        return scaled(c, self)

    def __neg__(self):
        return scaled(-1.0, self)

    def __call__(self, x: Vec) -> Vec:
        return apply(self, x)


@dataclass(frozen=True, eq=False)
class Dense(Operator):
    matrix: np.ndarray = field(default=None)

    def __post_init__(self):
        if not (self.domain.is_finite and self.codomain.is_finite):
            raise SpaceMismatch("dense operators need finite domain and codomain")
        M = np.array(self.matrix, dtype=float, ndmin=2)
        if M.shape != (self.codomain.dim, self.domain.dim):
            raise SpaceMismatch(
                f"matrix shape {M.shape} does not match "
                f"{self.codomain.dim}x{self.domain.dim}")
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    def _apply_entries(self, x):
        xv = np.zeros(self.domain.dim)
        for k, v in x.items():
            xv[k - 1] = v
        y = self.matrix @ xv
        return {i + 1: float(v) for i, v in enumerate(y) if v != 0.0}

    def _apply_block(self, X):
        return self.matrix @ X

    def _form(self):
        return {}, self.codomain.dim, self.domain.dim


@dataclass(frozen=True, eq=False)
class Shift(Operator):
    """``S^k``: right shift ``R^k`` for k > 0, left shift ``L^-k`` for k < 0."""

    power: int = 1

    def __post_init__(self):
        if self.domain.is_finite or self.codomain.is_finite:
            raise SpaceMismatch("shifts act on sequence spaces only")
        if self.power == 0:
            raise ValueError("shift power must be nonzero")

    def _apply_entries(self, x):
        k = self.power
        return {i + k: v for i, v in x.items() if i + k >= 1}

    def _apply_block(self, X):
        k = self.power
        if k > 0:
            return np.vstack([np.zeros((k, X.shape[1])), X])
        return X[-k:]

    def _form(self):
        return {self.power: 1.0}, 0, 0


@dataclass(frozen=True, eq=False)
class Identity(Operator):
    def __post_init__(self):
        if self.domain != self.codomain:
            raise SpaceMismatch("identity needs domain == codomain")

    def _apply_entries(self, x):
        return dict(x)

    def _apply_block(self, X):
        return X

    def _form(self):
        if self.domain.is_finite:
            return {}, self.domain.dim, self.domain.dim
        return {0: 1.0}, 0, 0


@dataclass(frozen=True, eq=False)
class FiniteRank(Operator):
    """``x -> sum_k f_k(x) v_k`` for (vector, functional) pairs."""

    pairs: tuple = ()

    def __post_init__(self):
        pairs = tuple((v, f) for v, f in self.pairs)
        for v, f in pairs:
            if v.space != self.codomain or f.space != self.domain:
                raise SpaceMismatch("finite-rank pair lives in the wrong space")
        object.__setattr__(self, "pairs", pairs)

    def _apply_entries(self, x):
        out: dict = {}
        for v, f in self.pairs:
            a = sum(c * x.get(k, 0.0) for k, c in f.entries.items())
            if a != 0.0:
                for k, c in v.entries.items():
                    out[k] = out.get(k, 0.0) + a * c
        return {k: c for k, c in out.items() if c != 0.0}

    def _apply_block(self, X):
        rows = self._form()[1]
        Y = np.zeros((rows, X.shape[1]))
        n = X.shape[0]
        for v, f in self.pairs:
            coef = np.zeros(n)
            for k, c in f.entries.items():
                if k <= n:
                    coef[k - 1] = c
            Y += np.outer(v.dense(rows), coef @ X)
        return Y

    def _form(self):
        r = self.codomain.dim if self.codomain.is_finite else max(
            (v.support_max for v, _ in self.pairs), default=0)
        s = self.domain.dim if self.domain.is_finite else max(
            (f.support_max for _, f in self.pairs), default=0)
        return {}, r, s


@dataclass(frozen=True, eq=False)
class Scaled(Operator):
    c: float = 1.0
    inner: Operator = None

    def _apply_entries(self, x):
        if self.c == 0.0:
            return {}
        return {k: self.c * v for k, v in self.inner._apply_entries(x).items()}

    def _apply_block(self, X):
        return self.c * self.inner._apply_block(X)

    def _form(self):
        coeffs, r, s = self.inner._form()
        return {k: self.c * v for k, v in coeffs.items()}, r, s


@dataclass(frozen=True, eq=False)
class Sum(Operator):
    terms: tuple = ()

    def _apply_entries(self, x):
        out: dict = {}
        for t in self.terms:
            for k, v in t._apply_entries(x).items():
                out[k] = out.get(k, 0.0) + v
        return {k: v for k, v in out.items() if v != 0.0}

    def _apply_block(self, X):
        parts = [t._apply_block(X) for t in self.terms]
        return _pad_sum(parts, X.shape[1], self.codomain)

    def _form(self):
        coeffs: dict = {}
        r = s = 0
        for t in self.terms:
            c, tr, ts = t._form()
            for k, v in c.items():
                coeffs[k] = coeffs.get(k, 0.0) + v
            r, s = max(r, tr), max(s, ts)
        return coeffs, r, s


@dataclass(frozen=True, eq=False)
class Compose(Operator):
    """``terms[0] o terms[1] o ... o terms[-1]`` (rightmost acts first)."""

    terms: tuple = ()

    def _apply_entries(self, x):
        for t in reversed(self.terms):
            x = t._apply_entries(x)
        return x

    def _apply_block(self, X):
        for t in reversed(self.terms):
            X = t._apply_block(X)
        return X

    def _form(self):
        coeffs, r, s = self.terms[-1]._form()
        for t in reversed(self.terms[:-1]):
            coeffs, r, s = _compose_forms(t._form(), (coeffs, r, s))
        return coeffs, r, s


def _pad_sum(parts, k, codomain):
    rows = max((P.shape[0] for P in parts), default=0)
    if codomain.is_finite:
        rows = codomain.dim
    out = np.zeros((rows, k))
    for P in parts:
        out[: P.shape[0]] += P
    return out


def _compose_forms(outer, inner):
    (ca, ra, sa), (cb, rb, sb) = outer, inner
    coeffs: dict = {}
    for a, x in ca.items():
        for b, y in cb.items():
            coeffs[a + b] = coeffs.get(a + b, 0.0) + x * y
    kplus = max([0] + [k for k in ca])
    kminus = max([0] + [-k for k in cb])
    # R^a L^b leaves a correction in rows <= a, cols <= b
    r = max(ra, rb + kplus, kplus)
    s = max(sb, sa + kminus, kminus)
    return coeffs, r, s


# --------------------------------------------------------------- constructors


def dense(matrix, p: float = 2.0, domain=None, codomain=None) -> Dense:
    M = np.array(matrix, dtype=float, ndmin=2)
    domain = domain or ModelSpace.finite(M.shape[1], p)
    codomain = codomain or ModelSpace.finite(M.shape[0], domain.p)
    return Dense(domain, codomain, M)


def shift(power: int, p: float = 2.0) -> Shift:
    sp = ModelSpace.sequence(p)
    return Shift(sp, sp, int(power))


def right_shift(p: float = 2.0) -> Shift:
    return shift(1, p)


def left_shift(p: float = 2.0) -> Shift:
    return shift(-1, p)


def identity(space: ModelSpace) -> Identity:
    return Identity(space, space)


def zero(domain: ModelSpace, codomain: ModelSpace) -> FiniteRank:
    return FiniteRank(domain, codomain, ())


def finite_rank(pairs, domain=None, codomain=None) -> FiniteRank:
    pairs = tuple(pairs)
    if domain is None or codomain is None:
        if not pairs:
            raise ValueError("empty finite-rank operator needs explicit spaces")
        codomain = codomain or pairs[0][0].space
        domain = domain or pairs[0][1].space
    return FiniteRank(domain, codomain, pairs)


def scaled(c: float, A: Operator) -> Scaled:
    return Scaled(A.domain, A.codomain, float(c), A)


def add(*terms: Operator) -> Sum:
    if not terms:
        raise ValueError("sum needs at least one term")
    for t in terms[1:]:
        if t.domain != terms[0].domain or t.codomain != terms[0].codomain:
            raise SpaceMismatch("sum terms must share domain and codomain")
    return Sum(terms[0].domain, terms[0].codomain, tuple(terms))


def compose(A: Operator, B: Operator) -> Compose:
    """Descriptor for ``A o B``."""
    if B.codomain != A.domain:
        raise SpaceMismatch(f"cannot compose: {B.codomain} -> {A.domain}")
    terms = (A.terms if isinstance(A, Compose) else (A,)) + (
        B.terms if isinstance(B, Compose) else (B,))
    return Compose(B.domain, A.codomain, terms)


def compose_all(*ops: Operator) -> Operator:
    out = ops[-1]
    for op in reversed(ops[:-1]):
        out = compose(op, out)
    return out


# ------------------------------------------------------------------ actions


def apply(A: Operator, x: Vec) -> Vec:
    """Exact image of a finitely supported vector."""
    if x.space != A.domain:
        raise SpaceMismatch(f"vector in {x.space}, operator domain {A.domain}")
    return Vec(A.codomain, A._apply_entries(dict(x.entries)))


def materialize(A: Operator, n: int) -> np.ndarray:
    """Matrix of ``A`` restricted to inputs supported on indices ``<= n``.

    On a finite domain ``n`` is capped at its dimension. Finite codomains give
    ``dim`` rows; sequence codomains give ``max(n, last reachable index)``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if A.domain.is_finite:
        n = min(n, A.domain.dim)
    Y = A._apply_block(np.eye(n))
    if A.codomain.is_finite:
        return Y
    nz = np.flatnonzero(np.any(Y != 0.0, axis=1))
    rows = max(n, nz[-1] + 1 if nz.size else 0)
    out = np.zeros((rows, n))
    m = min(rows, Y.shape[0])
    out[:m] = Y[:m]
    return out


def to_matrix(A: Operator) -> np.ndarray:
    """Full matrix of an operator with finite domain."""
    if not A.domain.is_finite:
        raise NotFinite("operator domain is a sequence space")
    return materialize(A, A.domain.dim)


def invert_finite(A: Operator) -> Dense:
    """Inverse of a square operator between finite spaces.

    Uses an LU factorization with partial pivoting and refuses matrices whose
    2-norm condition number exceeds 1e12.
    """
    if not (A.domain.is_finite and A.codomain.is_finite):
        raise NotFinite("inversion needs finite domain and codomain")
    if A.domain.dim != A.codomain.dim:
        raise SpaceMismatch("inversion needs a square operator")
    M = to_matrix(A)
    with np.errstate(all="ignore"):
        cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularOperator(f"condition number {cond:.3g} exceeds {COND_LIMIT:g}")
    lu, piv = scipy.linalg.lu_factor(M)
    inv = scipy.linalg.lu_solve((lu, piv), np.eye(M.shape[0]))
    eye = np.eye(M.shape[0])
    resid = max(np.abs(M @ inv - eye).max(), np.abs(inv @ M - eye).max())
    if resid > INVERSE_RESIDUAL:
        raise SingularOperator(f"inverse residual {resid:.3g} too large")
    return Dense(A.codomain, A.domain, inv)


# -------------------------------------------------------------- matrix norms


def _col_pnorms(X: np.ndarray, p: float) -> np.ndarray:
    A = np.abs(X)
    if p == 1.0:
        return A.sum(axis=0)
    if p == 2.0:
        return np.sqrt((A * A).sum(axis=0))
    top = A.max(axis=0)
    safe = np.where(top > 0, top, 1.0)
    return top * ((A / safe) ** p).sum(axis=0) ** (1.0 / p)


def _dual_direction(Y: np.ndarray, p: float) -> np.ndarray:
    """Columns ``sign(y)|y|^(p-1)``, each rescaled to unit dual norm."""
    A = np.abs(Y)
    top = A.max(axis=0)
    safe = np.where(top > 0, top, 1.0)
    D = np.sign(Y) * (A / safe) ** (p - 1.0)
    q = p / (p - 1.0)
    nrm = _col_pnorms(D, q)
    return D / np.where(nrm > 0, nrm, 1.0)


def pnorm_exact(M, p: float) -> Optional[float]:
    """Induced p-norm for p in {1, 2}; ``None`` for any other exponent."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    p = check_exponent(p)
    if M.size == 0:
        return 0.0 if p in (1.0, 2.0) else None
    if p == 1.0:
        return float(np.abs(M).sum(axis=0).max())
    if p == 2.0:
        return float(np.linalg.norm(M, 2))
    return None


def _interpolation_bound(col: float, row: float, p: float) -> float:
    # Riesz-Thorin between the 1-norm (col) and the inf-norm (row)
    if col == 0.0 or row == 0.0:
        return 0.0
    if math.isinf(col) or math.isinf(row):
        return math.inf
    return col ** (1.0 / p) * row ** (1.0 - 1.0 / p)


def pnorm_upper(M, p: float) -> float:
    """Upper bound ``min(exact, ||M||_1^(1/p) ||M||_inf^(1-1/p))``."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    p = check_exponent(p)
    if M.size == 0:
        return 0.0
    A = np.abs(M)
    bound = _interpolation_bound(float(A.sum(axis=0).max()), float(A.sum(axis=1).max()), p)
    exact = pnorm_exact(M, p)
    return bound if exact is None else min(exact, bound)


def pnorm_lower(M, p: float, restarts: int = 8, tol: float = 1e-12,
                seed: int = 0, maxiter: int = 200) -> float:
    """Lower bound on the induced p-norm by multi-start power iteration.

    Each start is iterated with the alternating dual-norm update
    ``x <- dual_q(M^T dual_p(M x))``. Starts are all basis vectors, the top
    right singular vector, the all-ones vector and ``restarts`` Gaussian
    vectors drawn from ``seed``. The returned value is ``||Mx||_p / ||x||_p``
    at the best iterate seen, so it never exceeds the true norm.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    p = check_exponent(p)
    if restarts < 1 or tol <= 0:
        raise ValueError("need restarts >= 1 and tol > 0")
    if M.size == 0 or not np.any(M):
        return 0.0
    n = M.shape[1]
    best = float(_col_pnorms(M, p).max())
    if p == 1.0:
        # the 1-norm is attained at a basis vector
        return best

    rng = np.random.default_rng(seed)
    starts = [np.eye(n), np.ones((n, 1)), rng.standard_normal((n, restarts))]
    _, _, vt = np.linalg.svd(M, full_matrices=False)
    starts.append(vt[:1].T)
    X = np.hstack(starts)
    X = X / _col_pnorms(X, p)

    q = p / (p - 1.0)
    prev = -np.inf
    for it in range(maxiter):
        Y = M @ X
        vals = _col_pnorms(Y, p) / _col_pnorms(X, p)
        cur = float(vals.max())
        best = max(best, cur)
        if cur - prev <= tol * max(cur, 1.0) and it > 2:
            break
        prev = cur
        Z = M.T @ _dual_direction(Y, p)
        Xn = _dual_direction(Z, q)
        dead = ~np.any(Xn != 0.0, axis=0)
        Xn[:, dead] = X[:, dead]
        X = Xn / _col_pnorms(Xn, p)
    return best


# --------------------------------------------------------- certified norms


class Verdict(str, Enum):
    YES = "CertifiedYes"
    NO = "CertifiedNo"
    UNDECIDED = "Undecided"


@dataclass(frozen=True)
class NormCertificate:
    lower: float
    upper: float
    verdict_lt_one: Verdict
    method_trace: str = ""

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": None if math.isinf(self.upper) else self.upper,
            "verdict": self.verdict_lt_one.value,
            "trace": self.method_trace,
        }

    def human(self) -> str:
        return (f"‖·‖ ∈ [{self.lower:.12g}, {self.upper:.12g}] — "
                f"{self.verdict_lt_one.value}")


@dataclass(frozen=True)
class NormOptions:
    horizons: Sequence[int] = DEFAULT_HORIZONS
    restarts: int = 8
    tol: float = 1e-12
    seed: int = 0
    eps_cert: float = EPS_CERT


def classify(lower: float, upper: float, eps_cert: float = EPS_CERT) -> Verdict:
    if upper < 1.0 - eps_cert:
        return Verdict.YES
    if lower >= 1.0 - EPS_MACHINE:
        return Verdict.NO
    return Verdict.UNDECIDED


def abs_sums(A: Operator) -> tuple[float, float]:
    """Exact ``(sup column abs-sum, sup row abs-sum)`` of a descriptor.

    These are the induced 1- and inf-norms. Returns ``(inf, inf)`` when the
    normal form is too large to evaluate.
    """
    if A.domain.is_finite:
        M = materialize(A, A.domain.dim)
        Ab = np.abs(M)
        return float(Ab.sum(axis=0).max(initial=0.0)), float(Ab.sum(axis=1).max(initial=0.0))
    coeffs, r, s = A._form()
    kplus = max([0] + [k for k in coeffs])
    kminus = max([0] + [-k for k in coeffs])
    band = max(kplus, kminus)
    tail = float(sum(abs(c) for c in coeffs.values()))
    n = max(s, r, band) + 2 * band + 2
    if n > MAX_SYMBOLIC_COLUMNS:
        return math.inf, math.inf
    Ab = np.abs(materialize(A, n))
    col = max(float(Ab.sum(axis=0).max()), tail)
    # rows up to max(r, band)+1 are complete within the first n columns
    nrows = min(Ab.shape[0], max(r, band) + 1)
    row = max(float(Ab[:nrows].sum(axis=1).max(initial=0.0)), tail)
    if A.codomain.is_finite:
        row = float(Ab.sum(axis=1).max(initial=0.0))
    return col, row


def operator_pnorm(A: Operator, p: Optional[float] = None,
                   opts: Optional[NormOptions] = None) -> NormCertificate:
    """Certified bracket ``[lower, upper]`` on ``||A||_p`` with a ``< 1`` verdict."""
    p = A.domain.p if p is None else check_exponent(p)
    opts = opts or NormOptions()
    trace = []
    if A.domain.is_finite:
        M = to_matrix(A)
        lower = pnorm_lower(M, p, opts.restarts, opts.tol, opts.seed)
        upper = pnorm_upper(M, p)
        trace.append(f"finite {M.shape[0]}x{M.shape[1]}")
    else:
        lower = 0.0
        for n in sorted(opts.horizons):
            M = materialize(A, n)
            lower = max(lower, pnorm_lower(M, p, opts.restarts, opts.tol, opts.seed))
        col, row = abs_sums(A)
        upper = _interpolation_bound(col, row, p)
        trace.append(f"horizons {tuple(sorted(opts.horizons))}; col={col:.6g} row={row:.6g}")
    if lower > upper:
        trace.append(f"lower clamped from {lower:.17g}")
        lower = upper
    verdict = classify(lower, upper, opts.eps_cert)
    return NormCertificate(lower, upper, verdict, "; ".join(trace))


# ------------------------------------------------------ noninvertibility


@dataclass(frozen=True)
class KernelVec:
    vec: Vec


@dataclass(frozen=True)
class RangeGap:
    vec: Vec
    residual: float


@dataclass(frozen=True)
class NoneFound:
    pass


def witness_to_dict(w) -> dict:
    if isinstance(w, KernelVec):
        return {"kind": "kernel_vec", "vec": w.vec.to_json()}
    if isinstance(w, RangeGap):
        return {"kind": "range_gap", "vec": w.vec.to_json(), "residual": w.residual}
    return {"kind": "none_found"}


def _clean(v: np.ndarray, tol: float = 1e-13) -> np.ndarray:
    v = v.copy()
    v[np.abs(v) < tol * max(np.abs(v).max(initial=0.0), 1.0)] = 0.0
    return v


def _range_gap(M: np.ndarray, y: np.ndarray, p: float) -> float:
    """Lower bound on ``min_x ||Mx - y||_p`` from a left null vector of ``M``.

    For ``phi`` with ``phi^T M = 0``: ``|phi.y| <= ||phi||_q ||Mx - y||_p``.
    """
    u, sv, _ = np.linalg.svd(M, full_matrices=True)
    tol = max(M.shape) * np.finfo(float).eps * (sv[0] if sv.size else 0.0)
    rank = int(np.sum(sv > tol))
    null = u[:, rank:]
    if null.shape[1] == 0:
        return 0.0
    phi = _clean(null @ (null.T @ y))
    if not np.any(phi):
        return 0.0
    q = math.inf if p == 1.0 else p / (p - 1.0)
    qn = float(np.abs(phi).max()) if math.isinf(q) else p_norm(phi, q)
    return abs(float(phi @ y)) / qn


def find_noninvertibility_witness(A: Operator, horizon: int = 16,
                                  p: Optional[float] = None):
    """Search for a kernel vector or a range gap of a square operator.

    Returns ``KernelVec``, ``RangeGap`` or ``NoneFound``. A range gap for
    ``y`` must exceed 0.5 at every tested compression horizon.
    """
    if A.domain != A.codomain:
        raise SpaceMismatch("witness search needs domain == codomain")
    p = A.domain.p if p is None else check_exponent(p)
    n = min(horizon, A.domain.dim) if A.domain.is_finite else horizon
    M = materialize(A, n)

    colnorms = _col_pnorms(M, p)
    for k in range(n):
        if colnorms[k] <= KERNEL_TOL:
            return KernelVec(Vec(A.domain, {k + 1: 1.0}))
    _, _, vt = np.linalg.svd(M, full_matrices=True)
    v = _clean(vt[-1])
    if np.any(v) and p_norm(M @ v, p) <= KERNEL_TOL * p_norm(v, p):
        return KernelVec(Vec.from_dense(A.domain, v) if A.domain.is_finite
                         else Vec(A.domain, {i + 1: c for i, c in enumerate(v)}))

    if A.domain.is_finite:
        horizons = [n]
    else:
        horizons = sorted({h for h in DEFAULT_HORIZONS if h <= horizon} | {horizon})
    mats = [materialize(A, h) for h in horizons]
    kmax = min([n, 8] + [Mh.shape[0] for Mh in mats])
    for k in range(1, kmax + 1):
        gaps = []
        for Mh in mats:
            y = np.zeros(Mh.shape[0])
            y[k - 1] = 1.0
            gaps.append(_range_gap(Mh, y, p))
        gap = min(gaps)
        if gap > 0.5:
            return RangeGap(Vec(A.domain, {k: 1.0}), gap)
    return NoneFound()


# ---------------------------------------------------------------- JSON


def op_to_json(A: Operator) -> dict:
    base = {"domain": A.domain.to_json(), "codomain": A.codomain.to_json()}
    if isinstance(A, Dense):
        base.update(kind="dense", matrix=A.matrix.tolist())
    elif isinstance(A, Shift):
        base.update(kind="shift", power=A.power)
    elif isinstance(A, Identity):
        base.update(kind="identity")
    elif isinstance(A, FiniteRank):
        base.update(kind="finite_rank", pairs=[
            {"vec": v.to_json(), "functional": f.to_json()} for v, f in A.pairs])
    elif isinstance(A, Scaled):
        base.update(kind="scaled", c=A.c, inner=op_to_json(A.inner))
    elif isinstance(A, Sum):
        base.update(kind="sum", terms=[op_to_json(t) for t in A.terms])
    elif isinstance(A, Compose):
        base.update(kind="compose", terms=[op_to_json(t) for t in A.terms])
    else:
        raise TypeError(f"unknown operator {type(A).__name__}")
    return base


def _space_from(obj, key, p, fallback):
    if key in obj:
        return ModelSpace.from_json(obj[key], p)
    return fallback


def op_from_json(obj: Mapping, domain: ModelSpace,
                 codomain: Optional[ModelSpace] = None) -> Operator:
    """Parse an operator descriptor acting on ``domain``.

    ``codomain`` may be omitted when it can be inferred from the body
    (dense shape, shift/identity, vector format of finite-rank pairs).
    """
    p = domain.p
    domain = _space_from(obj, "domain", p, domain)
    codomain = _space_from(obj, "codomain", p, codomain)
    kind = obj["kind"]
    if kind == "dense":
        M = np.array(obj["matrix"], dtype=float, ndmin=2)
        codomain = codomain or ModelSpace.finite(M.shape[0], p)
        return Dense(domain, codomain, M)
    if kind == "shift":
        return Shift(domain, codomain or domain, int(obj["power"]))
    if kind == "identity":
        return Identity(domain, codomain or domain)
    if kind == "finite_rank":
        pairs = obj["pairs"]
        if codomain is None:
            if not pairs:
                raise ValueError("finite_rank without pairs needs a codomain")
            first = pairs[0]["vec"]
            codomain = (ModelSpace.sequence(p) if isinstance(first, Mapping)
                        else ModelSpace.finite(len(first), p))
        return FiniteRank(domain, codomain, tuple(
            (Vec.from_json(codomain, q["vec"]), Functional.from_json(domain, q["functional"]))
            for q in pairs))
    if kind == "scaled":
        inner = op_from_json(obj["inner"], domain, codomain)
        return scaled(float(obj["c"]), inner)
    if kind == "sum":
        terms = [op_from_json(t, domain, codomain) for t in obj["terms"]]
        return add(*terms)
    if kind == "compose":
        terms = []
        cur = domain
        raw = list(obj["terms"])
        for i, t in enumerate(reversed(raw)):
            last = i == len(raw) - 1
            op = op_from_json(t, cur, codomain if last else None)
            terms.append(op)
            cur = op.codomain
        return compose_all(*reversed(terms))
    raise ValueError(f"unknown operator kind {kind!r}")
