"""Concrete l^p model spaces: vectors, functionals and p-norms.

Two kinds of space are supported:

* ``ModelSpace.finite(d, p)`` -- l^p_d, vectors of length ``d``;
* ``ModelSpace.sequence(p)`` -- l^p(N) restricted to finitely supported
  sequences.

Indices are 1-based throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Optional

import numpy as np

from .errors import IndexOutOfRange, SpaceMismatch

FINITE = "finite"
SEQUENCE = "sequence"


def check_exponent(p) -> float:
    """Return ``p`` as a float after checking ``1 <= p < inf``."""
    p = float(p)
    if not math.isfinite(p) or p < 1.0:
        raise ValueError(f"exponent must satisfy 1 <= p < inf, got {p}")
    return p


@dataclass(frozen=True)
class ModelSpace:
    kind: str
    p: float
    dim: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "p", check_exponent(self.p))
        if self.kind == FINITE:
            if self.dim is None or int(self.dim) < 1:
                raise ValueError("finite space needs dim >= 1")
            object.__setattr__(self, "dim", int(self.dim))
        elif self.kind == SEQUENCE:
            if self.dim is not None:
                raise ValueError("sequence space has no dim")
        else:
            raise ValueError(f"unknown space kind {self.kind!r}")

    @classmethod
    def finite(cls, dim: int, p: float = 2.0) -> "ModelSpace":
        return cls(FINITE, p, dim)

    @classmethod
    def sequence(cls, p: float = 2.0) -> "ModelSpace":
        return cls(SEQUENCE, p)

    @property
    def is_finite(self) -> bool:
        return self.kind == FINITE

    def with_p(self, p: float) -> "ModelSpace":
        return ModelSpace(self.kind, p, self.dim)

    def check_index(self, n: int) -> None:
        if n < 1 or (self.is_finite and n > self.dim):
            raise IndexOutOfRange(f"index {n} out of range for {self}")

    def to_json(self) -> dict:
        if self.is_finite:
            return {"kind": FINITE, "dim": self.dim}
        return {"kind": SEQUENCE}

    @classmethod
    def from_json(cls, obj: Mapping, p: float) -> "ModelSpace":
        kind = obj["kind"]
        if kind == FINITE:
            return cls.finite(int(obj["dim"]), p)
        return cls(kind, p)

    def __str__(self):
        if self.is_finite:
            return f"l^{self.p:g}_{self.dim}"
        return f"l^{self.p:g}(N)"


def _clean_entries(space: ModelSpace, entries: Mapping[int, float]):
    out = {}
    for k, v in entries.items():
        k = int(k)
        space.check_index(k)
        v = float(v)
        if v != 0.0:
            out[k] = v
    return MappingProxyType(dict(sorted(out.items())))


class _Sparse:
    """Shared storage for finitely supported coefficient maps."""

    space: ModelSpace
    entries: Mapping[int, float]

    def __post_init__(self):
        object.__setattr__(self, "entries", _clean_entries(self.space, self.entries))

    def __getitem__(self, n: int) -> float:
        return self.entries.get(n, 0.0)

    @property
    def support_max(self) -> int:
        """Largest index carrying a nonzero entry (0 for the zero element)."""
        return max(self.entries, default=0)

    def dense(self, n: Optional[int] = None) -> np.ndarray:
        """Entries 1..n as an array; ``n`` defaults to dim or the support."""
        if n is None:
            n = self.space.dim if self.space.is_finite else self.support_max
        out = np.zeros(n)
        for k, v in self.entries.items():
            if k > n:
                raise IndexOutOfRange(f"entry {k} does not fit in length {n}")
            out[k - 1] = v
        return out

    @classmethod
    def from_dense(cls, space: ModelSpace, values):
        values = np.asarray(values, dtype=float).ravel()
        if space.is_finite and len(values) != space.dim:
            raise SpaceMismatch(f"expected {space.dim} entries, got {len(values)}")
        return cls(space, {i + 1: v for i, v in enumerate(values) if v != 0.0})

    def to_json(self):
        if self.space.is_finite:
            return self.dense().tolist()
        return {str(k): v for k, v in self.entries.items()}

    @classmethod
    def from_json(cls, space: ModelSpace, obj):
        if isinstance(obj, Mapping):
            return cls(space, {int(k): float(v) for k, v in obj.items()})
        if not space.is_finite:
            # dense list on a sequence space: read as the leading entries
            return cls(space, {i + 1: float(v) for i, v in enumerate(obj)})
        return cls.from_dense(space, obj)


@dataclass(frozen=True, eq=False)
class Vec(_Sparse):
    """A finitely supported vector of a model space."""

    space: ModelSpace
    entries: Mapping[int, float] = field(default_factory=dict)

    def __eq__(self, other):
        return (isinstance(other, Vec) and self.space == other.space
                and dict(self.entries) == dict(other.entries))

    def __hash__(self):
        return hash((self.space, tuple(self.entries.items())))

    def __add__(self, other: "Vec") -> "Vec":
        _same_space(self.space, other.space)
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out.get(k, 0.0) + v
        return Vec(self.space, out)

    def __sub__(self, other: "Vec") -> "Vec":
        return self + (-1.0) * other

    def __rmul__(self, c: float) -> "Vec":
        return Vec(self.space, {k: c * v for k, v in self.entries.items()})

    def __neg__(self):
        return (-1.0) * self


@dataclass(frozen=True, eq=False)
class Functional(_Sparse):
    """A finitely supported functional ``x -> sum_n c_n x_n``."""

    space: ModelSpace
    entries: Mapping[int, float] = field(default_factory=dict)

    def __eq__(self, other):
        return (isinstance(other, Functional) and self.space == other.space
                and dict(self.entries) == dict(other.entries))

    def __hash__(self):
        return hash((self.space, tuple(self.entries.items())))

    @property
    def coefficients(self) -> Mapping[int, float]:
        return self.entries

    def __call__(self, x: Vec) -> float:
        return apply_functional(self, x)

    def __rmul__(self, c: float) -> "Functional":
        return Functional(self.space, {k: c * v for k, v in self.entries.items()})

    def __add__(self, other: "Functional") -> "Functional":
        _same_space(self.space, other.space)
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out.get(k, 0.0) + v
        return Functional(self.space, out)


def _same_space(a: ModelSpace, b: ModelSpace) -> None:
    if a != b:
        raise SpaceMismatch(f"{a} vs {b}")


def vector_p_norm(v: Vec, p: Optional[float] = None) -> float:
    """(sum |v_n|^p)^(1/p); ``p`` defaults to the exponent of ``v.space``."""
    p = v.space.p if p is None else check_exponent(p)
    return p_norm(np.fromiter(v.entries.values(), float, len(v.entries)), p)


def p_norm(values, p: float) -> float:
    """p-norm of a dense array, scaled to avoid overflow for large p."""
    a = np.abs(np.asarray(values, dtype=float)).ravel()
    if a.size == 0:
        return 0.0
    if p == 1.0:
        return float(a.sum())
    top = a.max()
    if top == 0.0:
        return 0.0
    return float(top * np.sum((a / top) ** p) ** (1.0 / p))


def apply_functional(f: Functional, x: Vec) -> float:
    _same_space(f.space, x.space)
    if len(f.entries) > len(x.entries):
        f, x = x, f
    return float(sum(v * x.entries.get(k, 0.0) for k, v in f.entries.items()))


def standard_basis(space: ModelSpace, n: int) -> tuple[Vec, Functional]:
    """Return ``(e_n, zeta_n)``."""
    space.check_index(n)
    return Vec(space, {n: 1.0}), Functional(space, {n: 1.0})


def zero_vec(space: ModelSpace) -> Vec:
    return Vec(space, {})
