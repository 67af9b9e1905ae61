"""Finite real *-algebras represented on C^n.

An algebra is a direct sum of summands of kind R, C, H or M_k(C).  Each
summand has a fixed real basis of "intrinsic" matrices; the representation
sends every intrinsic basis element to an n x n complex matrix, and the
element coefficients of :class:`AlgebraElement` refer to this combined basis.

Quaternions are embedded in M_2(C) through the basis {1, i s1, i s2, i s3}
with the Pauli matrices s_k.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .opcore import (
    DEFAULT_TOL,
    RealSubspace,
    Tolerance,
    comm,
    flatten,
    orthonormalize,
    real_nullspace,
    unflatten,
)

__all__ = [
    "Summand",
    "FiniteAlgebra",
    "AlgebraElement",
    "Signature",
    "QUAT_BASIS",
    "quaternion",
    "embed",
    "is_subalgebra",
    "structure_signature",
    "central_projections",
    "random_unitary",
]

_S1 = np.array([[0, 1], [1, 0]], dtype=complex)
_S2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
_S3 = np.array([[1, 0], [0, -1]], dtype=complex)
QUAT_BASIS = (np.eye(2, dtype=complex), 1j * _S1, 1j * _S2, 1j * _S3)


def quaternion(a: float, b: float, c: float, d: float) -> np.ndarray:
    """``a + b i s1 + c i s2 + d i s3`` as a 2x2 complex matrix."""
    return a * QUAT_BASIS[0] + b * QUAT_BASIS[1] + c * QUAT_BASIS[2] + d * QUAT_BASIS[3]


_KINDS = ("R", "C", "H", "M")


@dataclass(frozen=True)
class Summand:
    label: str
    kind: str
    size: int = 1

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown summand kind {self.kind!r}")
        if self.kind != "M" and self.size != 1:
            raise ValueError(f"summand kind {self.kind} has size 1")
        if self.size < 1:
            raise ValueError("summand size must be positive")

    @property
    def real_dim(self) -> int:
        return {"R": 1, "C": 2, "H": 4}.get(self.kind, 2 * self.size**2)

    @property
    def block_shape(self) -> tuple[int, int]:
        k = 2 if self.kind == "H" else self.size
        return (k, k)

    def intrinsic_basis(self) -> list[np.ndarray]:
        if self.kind == "R":
            return [np.ones((1, 1), dtype=complex)]
        if self.kind == "C":
            return [np.ones((1, 1), dtype=complex), 1j * np.ones((1, 1))]
        if self.kind == "H":
            return [q.copy() for q in QUAT_BASIS]
        k = self.size
        out = []
        for i in range(k):
            for j in range(k):
                e = np.zeros((k, k), dtype=complex)
                e[i, j] = 1.0
                out.append(e)
                out.append(1j * e)
        return out

    def coords(self, value) -> np.ndarray:
        """Intrinsic coordinates of a block value (scalar or matrix)."""
        v = np.asarray(value, dtype=complex)
        if self.kind == "R":
            if abs(v.imag).max(initial=0.0) > 0:
                raise ValueError("real summand takes real values")
            return np.array([float(v.real.reshape(-1)[0])])
        if self.kind == "C":
            z = complex(v.reshape(-1)[0])
            return np.array([z.real, z.imag])
        if self.kind == "H":
            v = v.reshape(2, 2)
            # q = a + b i s1 + c i s2 + d i s3 ; tr(q^dagger q_k) = 2 coefficient
            c = np.array([np.trace(qb.conj().T @ v).real / 2 for qb in QUAT_BASIS])
            if np.linalg.norm(quaternion(*c) - v) > 1e-12 * (1 + np.linalg.norm(v)):
                raise ValueError("matrix is not a quaternion")
            return c
        v = v.reshape(self.size, self.size)
        return np.ascontiguousarray(v).view(np.float64).reshape(-1).copy()

    def value(self, coeffs) -> np.ndarray:
        coeffs = np.asarray(coeffs, dtype=np.float64)
        return sum(c * b for c, b in zip(coeffs, self.intrinsic_basis()))


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.float64).reshape(-1)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        return AlgebraElement(self.coeffs + other.coeffs)

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        return AlgebraElement(self.coeffs - other.coeffs)

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement(-self.coeffs)

    def scale(self, t: float) -> "AlgebraElement":
        return AlgebraElement(float(t) * self.coeffs)

    def __len__(self) -> int:
        return self.coeffs.size


@dataclass(frozen=True, eq=False)
class FiniteAlgebra:
    """Real *-algebra as the real span of ``rep_basis`` (shape ``(d, n, n)``)."""

    summands: tuple[Summand, ...]
    rep_basis: np.ndarray
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        rb = np.array(self.rep_basis, dtype=complex)
        if rb.ndim != 3 or rb.shape[1] != rb.shape[2]:
            raise ValueError("rep_basis must have shape (d, n, n)")
        if not np.all(np.isfinite(rb)):
            raise ValueError("rep_basis has non-finite entries")
        rb.setflags(write=False)
        object.__setattr__(self, "rep_basis", rb)
        object.__setattr__(self, "summands", tuple(self.summands))
        if self.summands and sum(s.real_dim for s in self.summands) != rb.shape[0]:
            raise ValueError("summand dimensions do not add up to the basis size")
        if self.check:
            self._validate()

    def _validate(self, tol: Tolerance = DEFAULT_TOL):
        g = self._gram
        s = np.linalg.svd(g, compute_uv=False)
        if s.size and s[-1] <= max(g.shape) * s[0] * 1e-12:
            raise ValueError("rep_basis is not real-linearly independent")
        if not np.allclose(self.embed(self.unit()), np.eye(self.n), atol=1e-9):
            raise ValueError("the identity matrix is not in the span")
        if not is_subalgebra(self, self.span(), tol):
            raise ValueError("rep_basis does not span a *-subalgebra")

    @classmethod
    def from_representation(
        cls,
        summands: Sequence[Summand],
        rep: Callable[..., np.ndarray],
        check: bool = True,
    ) -> "FiniteAlgebra":
        """Build from a real-linear map taking one block value per summand to an n x n matrix."""
        summands = tuple(summands)
        zeros = [np.zeros(s.block_shape, dtype=complex) for s in summands]
        basis = []
        for i, s in enumerate(summands):
            for b in s.intrinsic_basis():
                vals = list(zeros)
                vals[i] = b
                basis.append(np.asarray(rep(*vals), dtype=complex))
        return cls(summands, np.stack(basis), check=check)

    @property
    def dim(self) -> int:
        return self.rep_basis.shape[0]

    @property
    def n(self) -> int:
        return self.rep_basis.shape[1]

    @cached_property
    def _gram(self) -> np.ndarray:
        # columns are the flattened basis matrices
        return np.stack([flatten(b) for b in self.rep_basis], axis=1)

    @cached_property
    def _pinv(self) -> np.ndarray:
        return np.linalg.pinv(self._gram)

    def embed(self, el) -> np.ndarray:
        c = el.coeffs if isinstance(el, AlgebraElement) else np.asarray(el, dtype=np.float64)
        if c.shape != (self.dim,):
            raise ValueError(f"element has {c.size} coefficients, algebra has dimension {self.dim}")
        return np.tensordot(c, self.rep_basis, axes=1)

    def coords(self, mat) -> AlgebraElement:
        """Least-squares coefficients of a matrix (exact when it lies in the span)."""
        return AlgebraElement(self._pinv @ flatten(mat))

    def contains(self, mat, tol: Tolerance = DEFAULT_TOL) -> bool:
        v = flatten(mat)
        r = v - self._gram @ (self._pinv @ v)
        return bool(np.linalg.norm(r) <= tol.atol + tol.rtol * np.linalg.norm(v))

    def element(self, *blocks) -> AlgebraElement:
        """Element from one value per summand (scalar, quaternion or matrix)."""
        if len(blocks) != len(self.summands):
            raise ValueError(f"expected {len(self.summands)} block values")
        return AlgebraElement(np.concatenate([s.coords(v) for s, v in zip(self.summands, blocks)]))

    def basis_element(self, i: int) -> AlgebraElement:
        c = np.zeros(self.dim)
        c[i] = 1.0
        return AlgebraElement(c)

    def unit(self) -> AlgebraElement:
        return self.coords(np.eye(self.n))

    def zero(self) -> AlgebraElement:
        return AlgebraElement(np.zeros(self.dim))

    def mul(self, a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
        return self.coords(self.embed(a) @ self.embed(b))

    def star(self, a: AlgebraElement) -> AlgebraElement:
        return self.coords(self.embed(a).conj().T)

    def span(self) -> RealSubspace:
        return RealSubspace(2 * self.n * self.n, orthonormalize(list(self._gram.T), 2 * self.n * self.n))

    def random_element(self, rng: np.random.Generator) -> AlgebraElement:
        return AlgebraElement(rng.standard_normal(self.dim))

    def summand_slices(self) -> list[slice]:
        out, start = [], 0
        for s in self.summands:
            out.append(slice(start, start + s.real_dim))
            start += s.real_dim
        return out


def embed(alg: FiniteAlgebra, el: AlgebraElement) -> np.ndarray:
    return alg.embed(el)


def _span_of(x) -> RealSubspace:
    if isinstance(x, FiniteAlgebra):
        return x.span()
    return x


def is_subalgebra(alg: FiniteAlgebra | None, span: RealSubspace, tol: Tolerance = DEFAULT_TOL) -> bool:
    """True iff ``span`` is closed under products and conjugate transposes."""
    if alg is not None and span.ambient_dim != 2 * alg.n * alg.n:
        raise ValueError("ambient dimensions differ")
    mats = span.matrices()
    for x in mats:
        if not span.contains(flatten(x.conj().T), tol):
            return False
    for x in mats:
        for y in mats:
            if not span.contains(flatten(x @ y), tol):
                return False
    return True


@dataclass(frozen=True)
class Signature:
    blocks: tuple[int, ...]
    kinds: tuple[str, ...]
    commutative: bool
    real_dim: int
    center_dim: int

    def as_dict(self) -> dict:
        return {
            "blocks": list(self.blocks),
            "kinds": list(self.kinds),
            "commutative": self.commutative,
            "real_dim": self.real_dim,
            "center_dim": self.center_dim,
        }


def _center(mats: list[np.ndarray]) -> np.ndarray:
    """Coefficient vectors (rows) of central elements of span(mats)."""
    d = len(mats)
    blocks = []
    for y in mats:
        cols = [flatten(comm(x, y)) for x in mats]
        blocks.append(np.stack(cols, axis=1))
    scale = max([1.0] + [float(np.linalg.norm(m)) for m in mats]) ** 2
    return real_nullspace(blocks, d, 1e-11 * scale).basis


def _distinct(vals: np.ndarray, rel: float = 1e-8) -> int:
    vals = np.sort(vals)
    scale = max(1.0, float(np.abs(vals).max(initial=0.0)))
    return 1 + int(np.sum(np.diff(vals) > rel * scale))


_KIND_BY_RATIO = {1: "R", 2: "C", 4: "H"}


def _central_projections(span: RealSubspace, mats, zc, rng, max_retries: int) -> list[np.ndarray]:
    n = span.n
    center = [np.tensordot(c, mats, axes=1) for c in zc]
    herm_center = RealSubspace.span_matrices([(z + z.conj().T) / 2 for z in center] or [np.zeros((n, n))], n)
    n_blocks = herm_center.dim
    for _ in range(max_retries + 1):
        h = np.tensordot(rng.standard_normal(herm_center.dim), herm_center.matrices(), axes=1)
        h = (h + h.conj().T) / 2
        w, v = np.linalg.eigh(h)
        scale = max(1.0, np.abs(w).max())
        groups, start = [], 0
        for i in range(1, n + 1):
            if i == n or w[i] - w[i - 1] > 1e-7 * scale:
                groups.append(v[:, start:i])
                start = i
        projs = [g @ g.conj().T for g in groups]
        projs = [p for p in projs if span.contains(flatten(p), Tolerance(1e-9, 1e-7))]
        if len(projs) == n_blocks:
            return projs
    raise RuntimeError("could not separate the central idempotents")


def central_projections(span, seed: int = 0, max_retries: int = 5) -> list[np.ndarray]:
    """Minimal central projections of a represented *-subalgebra (one per simple summand)."""
    span = _span_of(span)
    mats = span.matrices()
    if not mats:
        return []
    return _central_projections(span, mats, _center(mats), np.random.default_rng(seed), max_retries)


def structure_signature(span, seed: int = 0, tol: Tolerance = DEFAULT_TOL, max_retries: int = 5) -> Signature:
    """Wedderburn-style block data of a represented *-subalgebra.

    Block sizes are the matrix orders ``k`` of the simple summands, sorted
    ascending; kinds are ``R``, ``C`` or ``H`` for ``M_k`` over that field.
    """
    span = _span_of(span)
    if not is_subalgebra(None, span, tol):
        raise ValueError("input span is not a *-subalgebra")
    mats = span.matrices()
    n = span.n
    d = len(mats)
    if d == 0:
        return Signature((), (), True, 0, 0)
    zc = _center(mats)
    rng = np.random.default_rng(seed)
    projs = _central_projections(span, mats, zc, rng, max_retries)
    found = []
    for p in projs:
        comp = [p @ x @ p for x in mats]
        sub = RealSubspace.span_matrices(comp, n)
        d_i = sub.dim
        c_i = len(_center(sub.matrices()))
        g = np.tensordot(rng.standard_normal(d_i), sub.matrices(), axes=1)
        g = (g + g.conj().T) / 2
        pw, pv = np.linalg.eigh(p)
        q = pv[:, pw > 0.5]
        ev = np.linalg.eigvalsh(q.conj().T @ g @ q)
        k = _distinct(ev)
        ratio = d_i / (k * k)
        kind = _KIND_BY_RATIO.get(int(round(ratio)), "?")
        if kind == "?" or abs(ratio - round(ratio)) > 1e-9:
            raise RuntimeError(f"block of real dimension {d_i} has no matching simple type")
        if kind == "C" and c_i != 2 or kind != "C" and c_i != 1:
            raise RuntimeError("block center does not match its simple type")
        found.append((k, kind))
    found.sort(key=lambda t: t[0])
    return Signature(
        blocks=tuple(k for k, _ in found),
        kinds=tuple(kind for _, kind in found),
        commutative=len(zc) == d,
        real_dim=d,
        center_dim=len(zc),
    )


def random_unitary(alg: FiniteAlgebra, seed: int, scale: float = 1.0) -> AlgebraElement:
    """``exp`` of a seeded random skew-adjoint element; ``scale=0`` gives the unit."""
    rng = np.random.default_rng(seed)
    x = alg.embed(rng.standard_normal(alg.dim))
    skew = scale * (x - x.conj().T) / 2
    u = scipy.linalg.expm(skew)
    return alg.coords(u)
