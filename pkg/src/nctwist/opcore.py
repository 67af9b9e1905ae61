"""Dense complex operators, antilinear arithmetic and real-linear subspace solvers.

Every constraint appearing in a twisted real structure involves complex
conjugation somewhere, so the solvers here work over the reals: an ``n x n``
complex matrix is flattened row-major into ``R^(2 n^2)`` with the real and
imaginary part of each entry interleaved (exactly numpy's ``complex128 ->
float64`` view).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "Parity",
    "Op",
    "Tolerance",
    "DEFAULT_TOL",
    "RealSubspace",
    "apply",
    "compose",
    "adjoint",
    "inverse",
    "conjugate_by",
    "twisted_commutator",
    "comm",
    "flatten",
    "unflatten",
    "realify",
    "real_nullspace",
    "commutant",
    "orthonormalize",
    "intersect",
    "defect",
    "is_close",
]


class Parity(enum.Enum):
    LINEAR = "linear"
    ANTILINEAR = "antilinear"

    def __xor__(self, other: "Parity") -> "Parity":
        if self is other:
            return Parity.LINEAR
        return Parity.ANTILINEAR


def _as_matrix(mat) -> np.ndarray:
    m = np.array(mat, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"operator matrix must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("operator matrix has non-finite entries")
    m.setflags(write=False)
    return m


@dataclass(frozen=True, eq=False)
class Op:
    """A linear (``v -> M v``) or antilinear (``v -> M conj(v)``) operator on C^n."""

    mat: np.ndarray
    parity: Parity = Parity.LINEAR

    def __post_init__(self):
        object.__setattr__(self, "mat", _as_matrix(self.mat))

    @classmethod
    def linear(cls, mat) -> "Op":
        return cls(mat, Parity.LINEAR)

    @classmethod
    def antilinear(cls, mat) -> "Op":
        return cls(mat, Parity.ANTILINEAR)

    @classmethod
    def identity(cls, n: int) -> "Op":
        return cls(np.eye(n), Parity.LINEAR)

    @property
    def n(self) -> int:
        return self.mat.shape[0]

    @property
    def is_linear(self) -> bool:
        return self.parity is Parity.LINEAR

    def __matmul__(self, other):
        if isinstance(other, Op):
            return compose(self, other)
        return apply(self, other)

    def __repr__(self) -> str:
        return f"Op({self.parity.value}, n={self.n})"


def apply(op: Op, v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if v.shape[0] != op.n:
        raise ValueError(f"dimension mismatch: operator is {op.n}, vector is {v.shape[0]}")
    if op.is_linear:
        return op.mat @ v
    return op.mat @ np.conj(v)


def compose(a: Op, b: Op) -> Op:
    """``a o b``; the right factor gets conjugated when ``a`` is antilinear."""
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: {a.n} vs {b.n}")
    right = b.mat if a.is_linear else np.conj(b.mat)
    return Op(a.mat @ right, a.parity ^ b.parity)


def adjoint(op: Op) -> Op:
    """Hilbert-space adjoint.

    For an antilinear ``T`` the adjoint is fixed by ``<T psi, phi> = <T* phi, psi>``
    with the inner product conjugate-linear in its first slot, which makes it the
    antilinear operator with the plain transpose as matrix.
    """
    if op.is_linear:
        return Op(op.mat.conj().T, Parity.LINEAR)
    return Op(op.mat.T, Parity.ANTILINEAR)


def inverse(op: Op) -> Op:
    inv = np.linalg.inv(op.mat)
    if op.is_linear:
        return Op(inv, Parity.LINEAR)
    # (M o cc)^-1 = conj(M)^-1 o cc
    return Op(np.conj(inv), Parity.ANTILINEAR)


def conjugate_by(op: Op, x) -> np.ndarray:
    """Matrix of the linear operator ``op X op^-1``."""
    x = x.mat if isinstance(x, Op) else np.asarray(x, dtype=complex)
    if op.is_linear:
        return op.mat @ x @ np.linalg.inv(op.mat)
    return op.mat @ np.conj(x) @ np.linalg.inv(op.mat)


def twisted_commutator(t, x, y) -> np.ndarray:
    """``T X - Y T`` for square matrices of one size."""
    if isinstance(t, Op):
        if not t.is_linear:
            raise ValueError("twisted commutator needs a linear operator")
        t = t.mat
    t = np.asarray(t, dtype=complex)
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    if not (t.shape == x.shape == y.shape) or t.ndim != 2:
        raise ValueError(f"dimension mismatch: {t.shape}, {x.shape}, {y.shape}")
    return t @ x - y @ t


def comm(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return x @ y - y @ x


# -- tolerances ---------------------------------------------------------------


@dataclass(frozen=True)
class Tolerance:
    """``|X - Y|_F <= atol + rtol * max(|X|_F, |Y|_F)``."""

    atol: float = 1e-12
    rtol: float = 1e-9

    def __post_init__(self):
        if self.atol <= 0 or self.rtol <= 0:
            raise ValueError("tolerances must be positive")

    @property
    def floor(self) -> float:
        return self.atol / self.rtol


DEFAULT_TOL = Tolerance()


def defect(x, y=None, tol: Tolerance = DEFAULT_TOL) -> float:
    """Scaled distance between ``x`` and ``y`` (``y = 0`` when omitted).

    Normalised so that ``defect <= tol.rtol`` is exactly the mixed
    absolute/relative closeness rule of :class:`Tolerance`.
    """
    x = np.asarray(x, dtype=complex)
    if y is None:
        y = np.zeros_like(x)
    y = np.asarray(y, dtype=complex)
    scale = max(np.linalg.norm(x), np.linalg.norm(y))
    return float(np.linalg.norm(x - y) / (tol.floor + scale))


def is_close(x, y=None, tol: Tolerance = DEFAULT_TOL) -> bool:
    return defect(x, y, tol) <= tol.rtol


# -- real flattening ----------------------------------------------------------


def flatten(x) -> np.ndarray:
    """Complex matrix -> real vector, row-major with interleaved (re, im)."""
    x = np.ascontiguousarray(x, dtype=complex)
    return x.view(np.float64).reshape(-1).copy()


def unflatten(v, n: int) -> np.ndarray:
    v = np.ascontiguousarray(v, dtype=np.float64)
    if v.size != 2 * n * n:
        raise ValueError(f"vector of length {v.size} does not hold a {n}x{n} complex matrix")
    return v.view(complex).reshape(n, n).copy()


def realify(fn: Callable[[np.ndarray], np.ndarray], n: int) -> np.ndarray:
    """Real matrix of a real-linear map on ``M_n(C)``, probed on the 2n^2 real directions."""
    cols = []
    for k in range(2 * n * n):
        e = np.zeros(2 * n * n)
        e[k] = 1.0
        cols.append(flatten(fn(unflatten(e, n))))
    return np.stack(cols, axis=1)


@dataclass(frozen=True, eq=False)
class RealSubspace:
    """Orthonormal basis (rows of ``basis``) of a subspace of ``R^ambient_dim``."""

    ambient_dim: int
    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=np.float64).reshape(-1, self.ambient_dim)
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def n(self) -> int:
        """Matrix size when the ambient space is a flattened ``M_n(C)``."""
        n = int(round(np.sqrt(self.ambient_dim / 2)))
        if 2 * n * n != self.ambient_dim:
            raise ValueError("ambient space is not a flattened square complex matrix space")
        return n

    def matrices(self) -> list[np.ndarray]:
        n = self.n
        return [unflatten(v, n) for v in self.basis]

    def project(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        return self.basis.T @ (self.basis @ v)

    def contains(self, v, tol: Tolerance = DEFAULT_TOL) -> bool:
        v = np.asarray(v, dtype=np.float64)
        return bool(np.linalg.norm(v - self.project(v)) <= tol.atol + tol.rtol * np.linalg.norm(v))

    def is_complex(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        """True when the subspace is closed under multiplication by ``i``."""
        n = self.n
        return all(self.contains(flatten(1j * unflatten(v, n)), tol) for v in self.basis)

    @classmethod
    def full(cls, dim: int) -> "RealSubspace":
        return cls(dim, np.eye(dim))

    @classmethod
    def zero(cls, dim: int) -> "RealSubspace":
        return cls(dim, np.zeros((0, dim)))

    @classmethod
    def span(cls, vectors: Iterable, ambient_dim: int | None = None) -> "RealSubspace":
        vecs = [np.asarray(v, dtype=np.float64).reshape(-1) for v in vectors]
        if ambient_dim is None:
            if not vecs:
                raise ValueError("ambient_dim needed for an empty span")
            ambient_dim = vecs[0].size
        return cls(ambient_dim, orthonormalize(vecs, ambient_dim))

    @classmethod
    def span_matrices(cls, mats: Iterable, n: int | None = None) -> "RealSubspace":
        mats = [np.asarray(m, dtype=complex) for m in mats]
        if n is None:
            n = mats[0].shape[0]
        return cls.span([flatten(m) for m in mats], 2 * n * n)


def orthonormalize(vectors: Sequence, ambient_dim: int, rel_cut: float = 1e-10) -> np.ndarray:
    if len(vectors) == 0:
        return np.zeros((0, ambient_dim))
    a = np.stack([np.asarray(v, dtype=np.float64) for v in vectors], axis=1)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros((0, ambient_dim))
    rank = int(np.sum(s > rel_cut * s[0]))
    return u[:, :rank].T.copy()


def _rank_cutoff(shape: tuple[int, int], smax: float) -> float:
    return max(shape) * smax * 1e-12


def real_nullspace(
    constraints: Sequence[np.ndarray] | np.ndarray,
    ambient_dim: int | None = None,
    abs_floor: float = 0.0,
) -> RealSubspace:
    """Kernel of a stack of real constraint matrices acting on ``R^ambient_dim``.

    Singular values at or below ``max(m, n) * sigma_max * 1e-12`` count as zero,
    as do those at or below ``abs_floor`` (for constraints known to be scaled
    against some reference magnitude). An empty constraint set gives the full space.
    """
    if isinstance(constraints, np.ndarray) and constraints.ndim == 2:
        constraints = [constraints]
    mats = [np.asarray(c, dtype=np.float64) for c in constraints if np.asarray(c).size]
    if ambient_dim is None:
        if not mats:
            raise ValueError("ambient_dim needed for an empty constraint set")
        ambient_dim = mats[0].shape[1]
    if any(m.shape[1] != ambient_dim for m in mats):
        raise ValueError("constraint matrices disagree on the ambient dimension")
    if not mats:
        return RealSubspace.full(ambient_dim)
    a = np.vstack(mats)
    if a.shape[0] > 2 * ambient_dim:
        # same singular values, much smaller SVD
        a = np.linalg.qr(a, mode="r")
    _, s, vt = np.linalg.svd(a, full_matrices=True)
    smax = s[0] if s.size else 0.0
    if smax <= abs_floor:
        return RealSubspace.full(ambient_dim)
    cut = max(_rank_cutoff(a.shape, smax), abs_floor)
    rank = int(np.sum(s > cut))
    return RealSubspace(ambient_dim, vt[rank:].copy())


def commutant(gens: Sequence[np.ndarray], n: int | None = None) -> RealSubspace:
    """All ``X`` with ``X g = g X`` for every generator ``g``."""
    gens = [np.asarray(g, dtype=complex) for g in gens]
    if n is None:
        if not gens:
            raise ValueError("matrix size needed when no generators are given")
        n = gens[0].shape[0]
    eye = np.eye(n)
    blocks = []
    for g in gens:
        if g.shape != (n, n):
            raise ValueError("generators must be square and of equal size")
        # row-major vec: vec(X g) = (1 (x) g^T) vec X ; vec(g X) = (g (x) 1) vec X
        lin = np.kron(eye, g.T) - np.kron(g, eye)
        blocks.append(_complex_to_real(lin))
    scale = max([1.0] + [float(np.linalg.norm(g)) for g in gens])
    return real_nullspace(blocks, 2 * n * n, 1e-11 * scale)


def _complex_to_real(lin: np.ndarray) -> np.ndarray:
    """Real form of a complex-linear map under the interleaved (re, im) convention."""
    m, k = lin.shape
    out = np.empty((2 * m, 2 * k))
    out[0::2, 0::2] = lin.real
    out[0::2, 1::2] = -lin.imag
    out[1::2, 0::2] = lin.imag
    out[1::2, 1::2] = lin.real
    return out


def intersect(a: RealSubspace, b: RealSubspace) -> RealSubspace:
    if a.ambient_dim != b.ambient_dim:
        raise ValueError("ambient dimensions differ")
    if a.dim == 0 or b.dim == 0:
        return RealSubspace.zero(a.ambient_dim)
    # x in both  <=>  x = A^T p = B^T q
    m = np.hstack([a.basis.T, -b.basis.T])
    ker = real_nullspace(m, a.dim + b.dim)
    vecs = [a.basis.T @ k[: a.dim] for k in ker.basis]
    return RealSubspace.span(vecs, a.ambient_dim) if vecs else RealSubspace.zero(a.ambient_dim)
