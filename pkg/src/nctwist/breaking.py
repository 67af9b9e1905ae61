"""Twist search and first-order subalgebra breaking."""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .algebra import (
    AlgebraElement,
    FiniteAlgebra,
    Signature,
    central_projections,
    is_subalgebra,
    structure_signature,
)
from .opcore import (
    Op,
    RealSubspace,
    Tolerance,
    commutant,
    defect,
    flatten,
    orthonormalize,
    real_nullspace,
)
from .triple import (
    ConditionReport,
    ConditionResult,
    Twist,
    TwistedTriple,
    fit_sign,
    jconj,
    verify_axioms,
)

__all__ = [
    "TwistAnsatz",
    "BreakReport",
    "SearchResult",
    "first_order_residual",
    "residual_tensor",
    "compatible_subspace",
    "breaking_fixed_point",
    "decompose_dd16",
    "enumerate_candidates",
    "admissible_candidates",
    "search_twists",
    "reduction_checks",
    "thread_count",
]

FAMILIES = ("identity", "signed-diagonal", "signed-block-permutation", "user")


def thread_count() -> int:
    raw = os.environ.get("NCTWIST_THREADS", "")
    try:
        cap = int(raw)
    except ValueError:
        cap = 0
    default = min(8, os.cpu_count() or 1)
    return max(1, min(cap, default) if cap > 0 else default)


# -- residuals --------------------------------------------------------------------


def _right_actions(t: TwistedTriple, ell: int, mats: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Stacks of ``B+ = J nu b nu^-1 J^-1`` and ``B- = J nu^-1 b nu J^-1``."""
    tw = t.twists[ell]
    nu, nui = tw.nu.mat, tw.nu_inv
    F = t.J.mat
    Fi = np.linalg.inv(F)
    plus = F @ np.conj(nu @ mats @ nui) @ Fi
    minus = F @ np.conj(nui @ mats @ nu) @ Fi
    return plus, minus


def first_order_residual(t: TwistedTriple, a, b, ell: int = 0) -> float:
    """Frobenius norm of ``[D_l, a] B+(b) - B-(b) [D_l, a]``."""
    pa = t.pi(a if isinstance(a, AlgebraElement) else AlgebraElement(a))
    pb = t.pi(b if isinstance(b, AlgebraElement) else AlgebraElement(b))
    D = t.twists[ell].D.mat
    c = D @ pa - pa @ D
    tw = t.twists[ell]
    bp = jconj(t.J, tw.nu.mat @ pb @ tw.nu_inv)
    bm = jconj(t.J, tw.nu_inv @ pb @ tw.nu.mat)
    return float(np.linalg.norm(c @ bp - bm @ c))


@dataclass(frozen=True, eq=False)
class _Tensors:
    """Real-bilinear residual tensors over the algebra basis, shape ``(d_a, d_b, 2 n^2)``."""

    first: np.ndarray
    zeroth: np.ndarray
    scale: float = 1.0

    @property
    def floor(self) -> float:
        # absolute zero for constraint rows built from these tensors
        return 1e-11 * self.scale


def residual_tensor(t: TwistedTriple, ell: int) -> _Tensors:
    basis = t.alg.rep_basis
    d = basis.shape[0]
    D = t.twists[ell].D.mat
    C = D @ basis - basis @ D
    P, M = _right_actions(t, ell, basis)
    first = np.einsum("iab,jbc->ijac", C, P) - np.einsum("jab,ibc->ijac", M, C)
    zp = np.einsum("iab,jbc->ijac", basis, P) - np.einsum("jab,ibc->ijac", P, basis)
    zm = np.einsum("iab,jbc->ijac", basis, M) - np.einsum("jab,ibc->ijac", M, basis)
    first = first.reshape(d, d, -1)
    zeroth = np.concatenate([zp.reshape(d, d, -1), zm.reshape(d, d, -1)], axis=2)
    # the basis is orthonormal up to its Gram matrix; ||D|| sets the size of commutators
    scale = max(1.0, float(np.linalg.norm(D))) * max(1.0, float(np.max(np.linalg.norm(basis, axis=(1, 2)))) ** 2)
    return _Tensors(first.view(np.float64), zeroth.view(np.float64), scale)


def _coeff_basis(alg: FiniteAlgebra, sub: Optional[RealSubspace]) -> np.ndarray:
    """Rows are coefficient vectors spanning ``sub`` (the whole algebra when None)."""
    if sub is None:
        return np.eye(alg.dim)
    if sub.ambient_dim == alg.dim:
        return np.asarray(sub.basis)
    rows = [alg.coords(m).coeffs for m in sub.matrices()]
    return np.array(rows).reshape(-1, alg.dim)


def _to_matrix_space(alg: FiniteAlgebra, coeffs: np.ndarray) -> RealSubspace:
    n = alg.n
    vecs = [flatten(alg.embed(AlgebraElement(c))) for c in coeffs]
    return RealSubspace(2 * n * n, orthonormalize(vecs, 2 * n * n) if vecs else np.zeros((0, 2 * n * n)))


def _b_constraints(T: _Tensors, A: np.ndarray, zeroth: bool) -> list[np.ndarray]:
    # rows: for each a in A, the map x -> sum_j x_j R(a, e_j)
    out = [np.einsum("ki,ijf->kfj", A, T.first).reshape(-1, T.first.shape[1])]
    if zeroth:
        out.append(np.einsum("ki,ijf->kfj", A, T.zeroth).reshape(-1, T.zeroth.shape[1]))
    return out


def _a_constraints(T: _Tensors, B: np.ndarray) -> list[np.ndarray]:
    return [np.einsum("kj,ijf->kfi", B, T.first).reshape(-1, T.first.shape[0])]


def compatible_subspace(
    t: TwistedTriple,
    ell: int,
    a_set: Optional[RealSubspace] = None,
    zeroth: bool = False,
    _tensors: Optional[_Tensors] = None,
) -> RealSubspace:
    """All ``b`` in the algebra with vanishing first-order residual against every ``a`` in ``a_set``.

    ``a_set`` may live in matrix space or in coefficient space; the result is
    returned in matrix space. ``zeroth`` also imposes the twisted zeroth-order
    constraints on ``b``.
    """
    T = _tensors or residual_tensor(t, ell)
    A = _coeff_basis(t.alg, a_set)
    ns = real_nullspace(_b_constraints(T, A, zeroth), t.alg.dim, T.floor)
    return _to_matrix_space(t.alg, ns.basis)


@dataclass(frozen=True, eq=False)
class BreakReport:
    surviving: RealSubspace
    coeffs: np.ndarray = field(repr=False)
    signature: Optional[Signature]
    iterations: int
    dims: tuple[int, ...]
    residual_max: float
    is_subalgebra: bool
    one_shot_dim: int
    components: tuple[dict, ...] = ()
    flags: tuple[str, ...] = ()

    @property
    def dim(self) -> int:
        return self.surviving.dim

    def as_dict(self) -> dict:
        return {
            "dim": self.dim,
            "signature": None if self.signature is None else self.signature.as_dict(),
            "iterations": self.iterations,
            "dims": list(self.dims),
            "residual_max": self.residual_max,
            "is_subalgebra": self.is_subalgebra,
            "one_shot_dim": self.one_shot_dim,
            "components": list(self.components),
            "flags": list(self.flags),
        }


def _pair_residual_max(T: _Tensors, U: np.ndarray) -> float:
    if U.shape[0] == 0:
        return 0.0
    r = np.einsum("pi,qj,ijf->pqf", U, U, T.first)
    return float(np.max(np.linalg.norm(r, axis=2)))


def _descend(tensors: Sequence[_Tensors], U: np.ndarray, zeroth: bool, floor: float, max_iter: int):
    """Shrink ``U`` (rows = coefficient vectors) until the residual vanishes on ``U x U``."""
    dims = [U.shape[0]]
    it = 0
    while it < max_iter and U.shape[0]:
        it += 1
        rows = []
        for T in tensors:
            rows += _b_constraints(T, U, zeroth)
            rows += _a_constraints(T, U)
        ns = real_nullspace([r @ U.T for r in rows], U.shape[0], floor)
        U_next = ns.basis @ U
        dims.append(U_next.shape[0])
        done = U_next.shape[0] == U.shape[0]
        U = U_next
        if done:
            break
    return U, it, dims


def _bimodule_blocks(t: TwistedTriple, seed: int) -> list[np.ndarray]:
    """Joint central projections of the left and right actions (falls back to the left ones)."""
    P = central_projections(t.alg.span(), seed=seed)
    Q = [jconj(t.J, p) for p in P]
    if any(np.linalg.norm(p @ q - q @ p) > 1e-9 for p in P for q in Q):
        return P
    return [p @ q for p in P for q in Q if np.linalg.norm(p @ q) > 1e-9]


def _atoms(D: np.ndarray, blocks: Sequence[np.ndarray], floor: float) -> list[np.ndarray]:
    out = []
    for i, p in enumerate(blocks):
        for j in range(i, len(blocks)):
            q = blocks[j]
            x = p @ D @ q if i == j else p @ D @ q + q @ D @ p
            if np.linalg.norm(x) > floor:
                out.append(x)
    return out


def _split_rows(t: TwistedTriple, ell: int, X: np.ndarray, right: bool) -> np.ndarray:
    basis = t.alg.rep_basis
    if right:
        P, M = _right_actions(t, ell, basis)
        cols = X @ P - M @ X
    else:
        cols = X @ basis - basis @ X
    return np.ascontiguousarray(cols.reshape(len(basis), -1)).view(np.float64).T


MAX_ATOMS = 12


@dataclass(eq=False)
class _SplitData:
    """Blocks of each ``D_l`` and their left-side rows; independent of the twists."""

    atoms: list[tuple[int, np.ndarray]]
    left: list[np.ndarray]

    @classmethod
    def build(cls, t: TwistedTriple, floor: float, seed: int) -> "_SplitData":
        blocks = _bimodule_blocks(t, seed)
        atoms = [(ell, x) for ell, tw in enumerate(t.twists) for x in _atoms(tw.D.mat, blocks, floor)]
        return cls(atoms, [_split_rows(t, ell, x, False) for ell, x in atoms])


def _split_starts(t: TwistedTriple, split: _SplitData, floor: float) -> list[tuple[str, np.ndarray]]:
    """Distinct starting subspaces, largest first."""
    d = t.alg.dim
    right = [_split_rows(t, ell, x, True) for ell, x in split.atoms]
    seen = {}
    for choice in itertools.product((False, True), repeat=len(split.atoms)):
        rows = [r if c else l for l, r, c in zip(split.left, right, choice)]
        B = real_nullspace(rows, d, floor).basis
        key = np.round(B.T @ B, 8).tobytes()
        if key not in seen:
            seen[key] = ("split:" + "".join("R" if c else "L" for c in choice), B)
    return sorted(seen.values(), key=lambda e: -e[1].shape[0])


def breaking_fixed_point(
    t: TwistedTriple,
    max_iter: int = 50,
    zeroth: bool = True,
    seed: int = 0,
    split_search: bool = True,
    _tensors: Optional[Sequence[_Tensors]] = None,
    _split: Optional[_SplitData] = None,
) -> BreakReport:
    """Largest subalgebra found on which the twisted conditions hold for all pairs.

    The plain descent alternates b-side and a-side solves from the whole
    algebra. Since the first-order condition is bilinear this can undershoot,
    so with ``split_search`` every assignment of the blocks of each ``D_l`` to
    "commutes with S" or "twisted-commutes with the right action of S" gives
    a further start, each refined by the same descent. The largest certified
    result wins. ``zeroth`` adds the twisted zeroth-order conditions.
    """
    alg = t.alg
    d = alg.dim
    tensors = list(_tensors) if _tensors is not None else [residual_tensor(t, i) for i in range(len(t.twists))]
    full = np.eye(d)
    floor = max((T.floor for T in tensors), default=0.0)
    # one-shot lower bound: b against the full algebra
    one_shot = real_nullspace([c for T in tensors for c in _b_constraints(T, full, zeroth)], d, floor)
    per = []
    for i, T in enumerate(tensors):
        b_only = real_nullspace(_b_constraints(T, full, zeroth), d, T.floor)
        per.append({"component": i, "b_dim": b_only.dim})

    def certified(U):
        return U.shape[0] > 0 and is_subalgebra(alg, _to_matrix_space(alg, U), t.tol)

    U, it, dims = _descend(tensors, full, zeroth, floor, max_iter)
    best = ("descent", U, it, dims)
    best_dim = U.shape[0] if certified(U) else -1
    flags = []
    tried = 0
    if split_search and best_dim < d:
        split = _split if _split is not None else _SplitData.build(t, floor, seed)
        if len(split.atoms) > MAX_ATOMS:
            flags.append("split search skipped: too many blocks")
        else:
            for label, start in _split_starts(t, split, floor):
                # a start bounds every result reached from it
                if start.shape[0] <= best_dim:
                    break
                tried += 1
                V, it_v, dims_v = _descend(tensors, start, zeroth, floor, max_iter)
                if V.shape[0] > best_dim and certified(V):
                    best = (label, V, it_v, [d] + dims_v)
                    best_dim = V.shape[0]
    method, U, it, dims = best
    surviving = _to_matrix_space(alg, U)
    resid = max((_pair_residual_max(T, U) for T in tensors), default=0.0)
    for entry, T in zip(per, tensors):
        entry["residual_max"] = _pair_residual_max(T, U)
    sub = best_dim >= 0
    sig = None
    if sub:
        sig = structure_signature(surviving, seed=seed, tol=t.tol)
    else:
        flags.append("subspace-only")
    if one_shot.dim != U.shape[0]:
        flags.append("one-shot differs")
    if method != "descent":
        flags.append(f"start {method}")
    return BreakReport(surviving, U, sig, it, tuple(dims), resid, sub, one_shot.dim, tuple(per), tuple(flags))


# -- commutant decomposition --------------------------------------------------------


def _fast_commutant(gens: np.ndarray, seed: int = 0) -> RealSubspace:
    """Commutant of a spanning set, solved on a few random combinations and verified."""
    rng = np.random.default_rng(seed)
    n = gens.shape[1]
    picked = [np.tensordot(rng.standard_normal(len(gens)), gens, 1) for _ in range(2)]
    picked += [p.conj().T for p in picked]
    while True:
        com = commutant(picked, n)
        mats = com.matrices()
        bad = [g for g in gens if any(np.linalg.norm(g @ x - x @ g) > 1e-9 * max(1.0, np.linalg.norm(g)) for x in mats)]
        if not bad:
            return com
        picked.append(bad[0])


def decompose_dd16(t: TwistedTriple, ell: int = 0) -> dict:
    """Least-squares split ``D_l = D0 + D1`` with ``D0`` commuting with ``nu J A J^-1 nu`` and ``D1`` with ``A``."""
    alg = t.alg
    tw = t.twists[ell]
    nu = tw.nu.mat
    gens = alg.rep_basis
    opp = np.array([nu @ jconj(t.J, g) @ nu for g in gens])
    c0 = _fast_commutant(opp)
    c1 = _fast_commutant(gens)
    D = tw.D.mat
    target = flatten(D)
    B0, B1 = c0.basis.T, c1.basis.T
    M = np.hstack([B0, B1])
    x, *_ = np.linalg.lstsq(M, target, rcond=None)
    k = B0.shape[1]
    n = t.n
    D0 = (B0 @ x[:k]).view(complex).reshape(n, n)
    D1 = (B1 @ x[k:]).view(complex).reshape(n, n)
    residual = float(np.linalg.norm(D - D0 - D1))
    return {
        "D0": D0,
        "D1": D1,
        "residual": residual,
        "holds": residual <= t.tol.atol + t.tol.rtol * float(np.linalg.norm(D)),
        "dims": (c0.dim, c1.dim),
    }


# -- twist search ----------------------------------------------------------------------


@dataclass(frozen=True)
class TwistAnsatz:
    family: str = "signed-diagonal"
    involutive: bool = True
    selfadjoint: bool = False
    regularity: bool = True
    epsilon_prime: bool = True
    zeroth_order: bool = True
    blocks: int = 4
    candidates: tuple = ()

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown ansatz family {self.family!r}")
        if self.family == "user" and not self.candidates:
            raise ValueError("user family needs candidates")


def _diag_sign_patterns(n: int, max_free: int = 12):
    if n <= max_free:
        for s in itertools.product((1.0, -1.0), repeat=n):
            yield np.array(s)
        return
    # too many entries: signs constant on equal runs
    k = max_free
    while n % k:
        k -= 1
    for s in itertools.product((1.0, -1.0), repeat=k):
        yield np.repeat(np.array(s), n // k)


def enumerate_candidates(n: int, ansatz: TwistAnsatz) -> list[tuple[str, np.ndarray]]:
    fam = ansatz.family
    if fam == "identity":
        return [("I", np.eye(n, dtype=complex))]
    if fam == "user":
        return [(f"user{i}", np.asarray(c, dtype=complex)) for i, c in enumerate(ansatz.candidates)]
    if fam == "signed-diagonal":
        out = []
        for s in _diag_sign_patterns(n):
            label = "diag(" + "".join("+" if x > 0 else "-" for x in s) + ")"
            out.append((label, np.diag(s).astype(complex)))
        return out
    m = ansatz.blocks
    if n % m:
        raise ValueError(f"dimension {n} is not divisible into {m} blocks")
    k = n // m
    out = []
    for perm in itertools.permutations(range(m)):
        P = np.zeros((m, m))
        P[list(perm), range(m)] = 1.0
        for s in itertools.product((1.0, -1.0), repeat=m):
            nu = np.kron(P @ np.diag(s), np.eye(k)).astype(complex)
            label = "perm" + "".join(map(str, perm)) + ":" + "".join("+" if x > 0 else "-" for x in s)
            out.append((label, nu))
    return out


def _admissible(t: TwistedTriple, ell: int, nu: np.ndarray, ansatz: TwistAnsatz) -> Optional[dict]:
    tol = t.tol
    n = t.n
    eye = np.eye(n)
    cut = 1e-10
    if ansatz.involutive and defect(nu @ nu, eye, tol) > cut:
        return None
    a1, _, _ = fit_sign(nu, nu.conj().T, tol)
    if ansatz.selfadjoint and a1 is None:
        return None
    F = t.J.mat
    if ansatz.regularity and defect(nu @ F @ np.conj(nu), F, tol) > cut:
        return None
    D = t.twists[ell].D.mat
    ep, rp, rm = fit_sign(D @ F @ np.conj(nu), nu @ F @ np.conj(D), tol)
    if ansatz.epsilon_prime and min(rp, rm) > cut:
        return None
    if t.gamma is not None:
        g = t.gamma.mat
        if fit_sign(g @ nu @ F, nu @ F @ np.conj(g), tol)[0] is None:
            return None
    if ansatz.zeroth_order:
        tt = t.with_twists([Twist(tw.D, Op.linear(nu) if i == ell else tw.nu) for i, tw in enumerate(t.twists)])
        z = residual_tensor(tt, ell).zeroth
        if np.max(np.abs(z), initial=0.0) > cut:
            return None
    return {"epsilon_prime": ep, "alpha1": a1}


def admissible_candidates(t: TwistedTriple, ell: int, ansatz: TwistAnsatz) -> list[tuple[str, np.ndarray, dict]]:
    out = []
    for label, nu in enumerate_candidates(t.n, ansatz):
        info = _admissible(t, ell, nu, ansatz)
        if info is not None:
            out.append((label, nu, info))
    return out


@dataclass(frozen=True, eq=False)
class SearchResult:
    labels: tuple[str, ...]
    twists: tuple[np.ndarray, ...] = field(repr=False)
    epsilon_prime: Optional[int]
    report: BreakReport

    def as_dict(self) -> dict:
        return {"twists": list(self.labels), "epsilon_prime": self.epsilon_prime, **self.report.as_dict()}


def search_twists(
    t: TwistedTriple,
    ansatz: TwistAnsatz,
    decomposition: Optional[Sequence[np.ndarray]] = None,
    threads: Optional[int] = None,
) -> dict:
    """Break the algebra for every admissible twist assignment of the given family.

    Returns the per-component candidate counts, the assignments and their
    reports sorted by surviving dimension (descending), then by labels.
    """
    if decomposition is not None:
        comps = [np.asarray(c, dtype=complex) for c in decomposition]
        if defect(sum(comps), t.D.mat, t.tol) > t.tol.rtol:
            raise ValueError("decomposition does not sum to D")
        n = t.n
        t = t.with_twists([Twist(Op.linear(c), Op.identity(n)) for c in comps])
    k = len(t.twists)
    per = [admissible_candidates(t, ell, ansatz) for ell in range(k)]
    counts = [len(p) for p in per]

    assignments = []
    for combo in itertools.product(*per):
        eps = {c[2]["epsilon_prime"] for c in combo} - {None}
        if ansatz.epsilon_prime and len(eps) > 1:
            continue
        assignments.append(combo)

    # residual tensors depend on one component's twist only; share them
    tensors = {}
    for ell, cands in enumerate(per):
        for label, nu, _ in cands:
            tl = t.with_twists([Twist(tw.D, Op.linear(nu)) if i == ell else tw for i, tw in enumerate(t.twists)])
            tensors[ell, label] = residual_tensor(tl, ell)
    split = None
    if tensors:
        floor = max(T.floor for T in tensors.values())
        split = _SplitData.build(t, floor, 0)

    def work(combo):
        tt = t.with_twists([Twist(tw.D, Op.linear(c[1])) for tw, c in zip(t.twists, combo)])
        ts = [tensors[ell, c[0]] for ell, c in enumerate(combo)]
        rep = breaking_fixed_point(tt, _tensors=ts, _split=split)
        eps = {c[2]["epsilon_prime"] for c in combo} - {None}
        return SearchResult(
            tuple(c[0] for c in combo),
            tuple(c[1] for c in combo),
            eps.pop() if len(eps) == 1 else None,
            rep,
        )

    workers = threads if threads is not None else thread_count()
    if workers > 1 and len(assignments) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(work, assignments))
    else:
        results = [work(c) for c in assignments]
    results.sort(key=lambda r: (-r.report.dim, r.labels))
    notes = [] if assignments else ["no admissible twist assignment"]
    return {"candidates_per_component": counts, "assignments": len(assignments), "results": results, "notes": notes}


# -- reduction checks ---------------------------------------------------------------------


def _first_order_pairs(t: TwistedTriple, D: np.ndarray, right_plus: np.ndarray, right_minus: np.ndarray) -> np.ndarray:
    basis = t.alg.rep_basis
    C = D @ basis - basis @ D
    return np.einsum("iab,jbc->ijac", C, right_plus) - np.einsum("jab,ibc->ijac", right_minus, C)


def reduction_checks(t: TwistedTriple) -> ConditionReport:
    """Consistency of the twisted conditions with their untwisted reductions."""
    tol = t.tol
    n = t.n
    eye = np.eye(n)
    basis = t.alg.rep_basis
    F = t.J.mat
    Fi = np.linalg.inv(F)
    res: list[ConditionResult] = []

    def add(name, r, comp=None, required=True, note="", cut=None):
        cut = tol.rtol if cut is None else cut
        res.append(ConditionResult(name, bool(r <= cut), float(r), None, comp, required, note))

    for ell, tw in enumerate(t.twists):
        nu, nui = tw.nu.mat, tw.nu_inv
        D = tw.D.mat
        untw = F @ np.conj(basis) @ Fi
        if defect(nu @ nu, eye, tol) <= 1e-10:
            # nul1C computed with J' = nu J against 1C with J
            Fp = nu @ F
            Fpi = np.linalg.inv(Fp)
            bp = Fp @ np.conj(nu @ basis @ nui) @ Fpi
            bm = Fp @ np.conj(nui @ basis @ nu) @ Fpi
            lhs = _first_order_pairs(t, D, bp, bm)
            rhs = _first_order_pairs(t, D, untw, untw)
            add("Jprime_reduction", _stack_defect(lhs, rhs, tol), ell, cut=1e-10)
            # involutive nu: twisted first order on b equals 1C on nu b nu
            P, M = _right_actions(t, ell, basis)
            tw_stack = _first_order_pairs(t, D, P, M)
            moved = F @ np.conj(nu @ basis @ nu) @ Fi
            add("involutive_first_order", _stack_defect(tw_stack, _first_order_pairs(t, D, moved, moved), tol), ell, cut=1e-10)
        else:
            add("Jprime_reduction", 0.0, ell, required=False, note="nu is not involutive; branch skipped")
        if np.array_equal(nu, eye):
            P, M = _right_actions(t, ell, basis)
            add("trivial_twist_first_order",
                _stack_defect(_first_order_pairs(t, D, P, M), _first_order_pairs(t, D, untw, untw), tol),
                ell, cut=1e-12)
    a1 = t.signs.alpha1
    gap_op = (a1 if a1 is not None else 1) * sum(tw.nu.mat @ tw.D.mat for tw in t.twists)
    add("Dprime_gap", defect(gap_op, t.D.mat, tol), required=False,
        note="status only" if a1 is not None else "alpha1 indeterminate; +1 used")
    if all(np.array_equal(tw.nu.mat, eye) for tw in t.twists) and len(t.twists) == 1:
        rep = verify_axioms(t)
        for tw_name, plain in (("nul1C", "1C"), ("nueC", "eC"), ("nul0C_plus", "0C"), ("gnuJ", "gJ")):
            if rep.find(tw_name) and rep.find(plain):
                add(f"trivial_{tw_name}", abs(rep.residual(tw_name) - rep.residual(plain)), cut=1e-12)
    return ConditionReport(tuple(res))


def _stack_defect(x: np.ndarray, y: np.ndarray, tol: Tolerance) -> float:
    diff = np.linalg.norm(x - y, axis=(-2, -1))
    scale = np.maximum(np.linalg.norm(x, axis=(-2, -1)), np.linalg.norm(y, axis=(-2, -1)))
    return float(np.max(diff / (tol.floor + scale), initial=0.0))
