"""Finite spectral triples with (multi)twisted real structure and their axiom checks.

A triple carries a list of twist components ``(D_l, nu_l)`` with ``sum D_l = D``;
a single twist is just a one-element list.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Any, Iterator, Optional, Sequence

import numpy as np

from .algebra import FiniteAlgebra
from .opcore import (
    DEFAULT_TOL,
    Op,
    Parity,
    Tolerance,
    compose,
    conjugate_by,
    defect,
)

__all__ = [
    "Twist",
    "TwistedTriple",
    "Signs",
    "ConditionResult",
    "ConditionReport",
    "UntwistError",
    "UntwistResult",
    "verify_axioms",
    "extract_signs",
    "fit_sign",
    "untwist",
    "jconj",
    "first_order_stack",
]


@dataclass(frozen=True, eq=False)
class Twist:
    D: Op
    nu: Op

    def __post_init__(self):
        if not (self.D.is_linear and self.nu.is_linear):
            raise ValueError("twist components and twist operators must be linear")
        if self.D.n != self.nu.n:
            raise ValueError("dimension mismatch in twist component")
        if not np.isfinite(self.cond):
            raise ValueError("twist operator is not invertible")

    @cached_property
    def cond(self) -> float:
        c = float(np.linalg.cond(self.nu.mat))
        return c if c < 1e14 else float("inf")

    @cached_property
    def nu_inv(self) -> np.ndarray:
        return np.linalg.inv(self.nu.mat)


def _coerce_op(x, parity: Parity) -> Op:
    if isinstance(x, Op):
        if x.parity is not parity:
            raise ValueError(f"expected a {parity.value} operator")
        return x
    return Op(x, parity)


@dataclass(frozen=True, eq=False)
class TwistedTriple:
    """Bundle ``(A, C^n, D, J, gamma, {(D_l, nu_l)})``.

    ``base`` and ``potential`` record the unfluctuated triple and the one-form
    when the triple was produced by a fluctuation.
    """

    alg: FiniteAlgebra
    D: Op
    J: Op
    gamma: Optional[Op] = None
    twists: tuple[Twist, ...] = ()
    tol: Tolerance = DEFAULT_TOL
    require_selfadjoint: bool = True
    base: Optional["TwistedTriple"] = field(default=None, repr=False)
    potential: Any = field(default=None, repr=False)
    metadata: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "D", _coerce_op(self.D, Parity.LINEAR))
        object.__setattr__(self, "J", _coerce_op(self.J, Parity.ANTILINEAR))
        if self.gamma is not None:
            object.__setattr__(self, "gamma", _coerce_op(self.gamma, Parity.LINEAR))
        n = self.alg.n
        if self.D.n != n or self.J.n != n or (self.gamma is not None and self.gamma.n != n):
            raise ValueError("operators and algebra act on different dimensions")
        twists = tuple(self.twists) or (Twist(self.D, Op.identity(n)),)
        object.__setattr__(self, "twists", twists)
        total = sum(tw.D.mat for tw in twists)
        if defect(total, self.D.mat, self.tol) > self.tol.rtol:
            raise ValueError("twist components do not sum to D")
        if self.require_selfadjoint and self.hermiticity_defect > self.tol.rtol:
            raise ValueError(f"D is not self-adjoint (defect {self.hermiticity_defect:.3e})")
        jj = self.J.mat @ np.conj(self.J.mat)
        if min(defect(jj, np.eye(n), self.tol), defect(jj, -np.eye(n), self.tol)) > self.tol.rtol:
            raise ValueError("J^2 is not +-1")
        # J* = J^-1: transpose of F equals conj(F^-1)
        if defect(self.J.mat.T, np.conj(np.linalg.inv(self.J.mat)), self.tol) > self.tol.rtol:
            raise ValueError("J is not antiunitary")

    @property
    def n(self) -> int:
        return self.alg.n

    @property
    def hermiticity_defect(self) -> float:
        return defect(self.D.mat, self.D.mat.conj().T, self.tol)

    @property
    def is_trivially_twisted(self) -> bool:
        return all(np.array_equal(tw.nu.mat, np.eye(self.n)) for tw in self.twists)

    @cached_property
    def signs(self) -> "Signs":
        return extract_signs(self)

    def with_twists(self, twists: Sequence[Twist]) -> "TwistedTriple":
        return replace(self, twists=tuple(twists), base=None, potential=None)

    def with_single_twist(self, nu) -> "TwistedTriple":
        return self.with_twists([Twist(self.D, _coerce_op(nu, Parity.LINEAR))])

    def with_dirac(self, D, components: Optional[Sequence] = None, **kw) -> "TwistedTriple":
        """Same data with a new Dirac operator; ``components`` replace the ``D_l``."""
        D = _coerce_op(D, Parity.LINEAR)
        if components is None:
            if len(self.twists) != 1:
                raise ValueError("multitwist triples need explicit components")
            components = [D.mat]
        twists = tuple(Twist(Op.linear(c), tw.nu) for c, tw in zip(components, self.twists))
        return replace(self, D=D, twists=twists, **kw)

    def pi(self, el) -> np.ndarray:
        return self.alg.embed(el)


def jconj(J: Op, x) -> np.ndarray:
    """``J X J^-1``."""
    return conjugate_by(J, x)


# -- reports -------------------------------------------------------------------


@dataclass(frozen=True)
class ConditionResult:
    name: str
    passed: bool
    residual: float
    sign: Optional[int] = None
    component: Optional[int] = None
    required: bool = True
    note: str = ""

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "component": self.component,
            "pass": self.passed,
            "residual": self.residual,
            "sign": self.sign,
            "required": self.required,
            "note": self.note,
        }


@dataclass(frozen=True)
class ConditionReport:
    results: tuple[ConditionResult, ...]
    notices: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results if r.required)

    def __iter__(self) -> Iterator[ConditionResult]:
        return iter(self.results)

    def names(self) -> list[str]:
        return list(dict.fromkeys(r.name for r in self.results))

    def find(self, name: str) -> list[ConditionResult]:
        return [r for r in self.results if r.name == name]

    def residual(self, name: str) -> float:
        rs = self.find(name)
        if not rs:
            raise KeyError(name)
        return max(r.residual for r in rs)

    def ok(self, name: str) -> bool:
        rs = self.find(name)
        if not rs:
            raise KeyError(name)
        return all(r.passed for r in rs)

    def failures(self) -> list[ConditionResult]:
        return [r for r in self.results if r.required and not r.passed]

    def as_dict(self) -> dict:
        return {
            "pass": self.passed,
            "conditions": [r.as_dict() for r in self.results],
            "notices": list(self.notices),
        }


# -- signs ---------------------------------------------------------------------


@dataclass(frozen=True)
class Signs:
    """KO signs; ``None`` marks an indeterminate or inapplicable sign."""

    eps: Optional[int]
    eps_prime: Optional[int]
    eps_dprime: Optional[int]
    alpha1: Optional[int]
    alpha2: Optional[int]
    per_component: tuple[dict, ...] = ()

    def triple(self) -> tuple:
        return (self.eps, self.eps_prime, self.eps_dprime)

    def as_dict(self) -> dict:
        return {
            "epsilon": self.eps,
            "epsilon_prime": self.eps_prime,
            "epsilon_dprime": self.eps_dprime,
            "alpha1": self.alpha1,
            "alpha2": self.alpha2,
            "per_component": list(self.per_component),
        }


def fit_sign(x, y, tol: Tolerance = DEFAULT_TOL) -> tuple[Optional[int], float, float]:
    """Sign ``s`` with ``x = s y``; accepted only when the other sign clearly fails."""
    rp = defect(x, y, tol)
    rm = defect(x, -np.asarray(y), tol)
    if rp < tol.rtol and rm > 10 * tol.rtol:
        return 1, rp, rm
    if rm < tol.rtol and rp > 10 * tol.rtol:
        return -1, rp, rm
    return None, rp, rm


def _eps_prime_pair(J: Op, D: np.ndarray, nu: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # matrices of the antilinear operators D J nu and nu J D
    lhs = D @ J.mat @ np.conj(nu)
    rhs = nu @ J.mat @ np.conj(D)
    return lhs, rhs


def _gnuj_pair(J: Op, gamma: np.ndarray, nu: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return gamma @ nu @ J.mat, nu @ J.mat @ np.conj(gamma)


def _common(values: Sequence[Optional[int]]) -> Optional[int]:
    vals = set(values)
    if len(vals) == 1:
        return vals.pop()
    return None


def extract_signs(t: TwistedTriple) -> Signs:
    tol = t.tol
    n = t.n
    eps, _, _ = fit_sign(t.J.mat @ np.conj(t.J.mat), np.eye(n), tol)
    per = []
    for tw in t.twists:
        nu = tw.nu.mat
        ep, rp, rm = fit_sign(*_eps_prime_pair(t.J, tw.D.mat, nu), tol)
        epp = None
        if t.gamma is not None:
            epp, _, _ = fit_sign(*_gnuj_pair(t.J, t.gamma.mat, nu), tol)
        a1, _, _ = fit_sign(nu, nu.conj().T, tol)
        a2, _, _ = fit_sign(nu, tw.nu_inv, tol)
        per.append(
            {
                "epsilon_prime": ep,
                "epsilon_prime_residuals": [rp, rm],
                "epsilon_dprime": epp,
                "alpha1": a1,
                "alpha2": a2,
            }
        )
    return Signs(
        eps=eps,
        eps_prime=_common([p["epsilon_prime"] for p in per]),
        eps_dprime=_common([p["epsilon_dprime"] for p in per]) if t.gamma is not None else None,
        alpha1=_common([p["alpha1"] for p in per]),
        alpha2=_common([p["alpha2"] for p in per]),
        per_component=tuple(per),
    )


# -- condition evaluation ------------------------------------------------------


def _pair_defects(lhs: np.ndarray, rhs: np.ndarray, tol: Tolerance) -> np.ndarray:
    """Relative defects over the leading batch axes of two stacks of matrices."""
    diff = np.linalg.norm(lhs - rhs, axis=(-2, -1))
    scale = np.maximum(np.linalg.norm(lhs, axis=(-2, -1)), np.linalg.norm(rhs, axis=(-2, -1)))
    return diff / (tol.floor + scale)


def first_order_stack(
    D: np.ndarray,
    basis: np.ndarray,
    right_plus: np.ndarray,
    right_minus: np.ndarray,
    tol: Tolerance,
) -> np.ndarray:
    """Defects of ``[D,a_i] P_j = M_j [D,a_i]`` for every pair, shape ``(d_a, d_b)``."""
    comms = D[None] @ basis - basis @ D[None]
    out = np.empty((basis.shape[0], right_plus.shape[0]))
    for i, c in enumerate(comms):
        lhs = c[None] @ right_plus
        rhs = right_minus @ c[None]
        out[i] = _pair_defects(lhs, rhs, tol)
    return out


def _conj_stack(J: Op, left: np.ndarray, mats: np.ndarray, right: np.ndarray) -> np.ndarray:
    # J (left M right) J^-1 for every M in the stack
    f = J.mat
    finv = np.linalg.inv(f)
    inner = left[None] @ mats @ right[None]
    return f[None] @ np.conj(inner) @ finv[None]


def _commutator_defects(x: np.ndarray, y: np.ndarray, tol: Tolerance) -> float:
    worst = 0.0
    for a in x:
        worst = max(worst, float(_pair_defects(a[None] @ y, y @ a[None], tol).max(initial=0.0)))
    return worst


def _normalizes(alg: FiniteAlgebra, nu: np.ndarray, nu_inv: np.ndarray, tol: Tolerance) -> tuple[bool, float]:
    worst = 0.0
    for b in alg.rep_basis:
        img = nu @ b @ nu_inv
        proj = alg.embed(alg.coords(img))
        worst = max(worst, defect(img, proj, tol))
    return worst <= tol.rtol, worst


def verify_axioms(t: TwistedTriple, include_reference: bool = True) -> ConditionReport:
    """Evaluate every defining condition on all pairs of algebra basis elements."""
    tol = t.tol
    n = t.n
    A = t.alg.rep_basis
    eye = np.eye(n)
    results: list[ConditionResult] = []
    notices: list[str] = []

    def add(name, resid, sign=None, comp=None, required=True, note=""):
        resid = float(resid)
        results.append(ConditionResult(name, resid <= tol.rtol, resid, sign, comp, required, note))

    add("D_selfadjoint", t.hermiticity_defect)
    jj = t.J.mat @ np.conj(t.J.mat)
    eps, rp, rm = fit_sign(jj, eye, tol)
    add("J_squared", min(rp, rm), sign=eps)
    add("J_antiunitary", defect(t.J.mat.T, np.conj(np.linalg.inv(t.J.mat)), tol))
    add("twist_sum", defect(sum(tw.D.mat for tw in t.twists), t.D.mat, tol))

    right = _conj_stack(t.J, eye, A, eye)
    add("0C", _commutator_defects(A, right, tol))

    if t.gamma is not None:
        g = t.gamma.mat
        add("gamma_involution", defect(g @ g, eye, tol))
        add("gamma_selfadjoint", defect(g, g.conj().T, tol))
        add("gamma_anticommutes_D", defect(g @ t.D.mat, -t.D.mat @ g, tol))
        add("gamma_commutes_algebra", _commutator_defects(g[None], A, tol))
    else:
        notices.append("no grading supplied: grading conditions skipped")

    all_normalize = True
    for ell, tw in enumerate(t.twists):
        nu, nui = tw.nu.mat, tw.nu_inv
        Dl = tw.D.mat
        b_plus = _conj_stack(t.J, nu, A, nui)
        b_minus = _conj_stack(t.J, nui, A, nu)
        add("nul0C_plus", _commutator_defects(A, b_plus, tol), comp=ell)
        add("nul0C_minus", _commutator_defects(A, b_minus, tol), comp=ell)
        add("nul1C", first_order_stack(Dl, A, b_plus, b_minus, tol).max(initial=0.0), comp=ell)

        normal, ndef = _normalizes(t.alg, nu, nui, tol)
        all_normalize &= normal
        add("automorphism", ndef, comp=ell, required=False,
            note="" if normal else "nu does not normalize the represented algebra")
        nu2, nu2i = nu @ nu, nui @ nui
        add("nu1C", first_order_stack(Dl, A, _conj_stack(t.J, nu2, A, nu2i), right, tol).max(initial=0.0),
            comp=ell, required=normal)
        ns = nu.conj().T
        nsi = np.linalg.inv(ns)
        add("nu1Cstar",
            first_order_stack(Dl, A, _conj_stack(t.J, ns, A, nsi), _conj_stack(t.J, nsi, A, ns), tol).max(initial=0.0),
            comp=ell, required=normal)

        ep, rp, rm = fit_sign(*_eps_prime_pair(t.J, Dl, nu), tol)
        note = "" if ep is not None else f"indeterminate sign (residuals +: {rp:.3e}, -: {rm:.3e})"
        add("nueC", min(rp, rm), sign=ep, comp=ell, note=note)
        add("RC", defect(nu @ t.J.mat @ np.conj(nu), t.J.mat, tol), comp=ell)
        notices.append(f"component {ell}: condition number of nu {tw.cond:.6g}")
        if t.gamma is not None:
            g = t.gamma.mat
            epp, rp2, rm2 = fit_sign(*_gnuj_pair(t.J, g, nu), tol)
            add("gnuJ", min(rp2, rm2), sign=epp, comp=ell)
            add("gcomm", defect(g @ nu @ nu, nu @ nu @ g, tol), comp=ell)

    eps_primes = [r.sign for r in results if r.name == "nueC"]
    if len(set(eps_primes)) > 1:
        results = [
            replace(r, passed=False, note=(r.note + " inconsistent epsilon' across components").strip())
            if r.name == "nueC" else r
            for r in results
        ]
        notices.append("epsilon' differs between twist components")

    if include_reference:
        D = t.D.mat
        add("1C", first_order_stack(D, A, right, right, tol).max(initial=0.0), required=False)
        e1, rp, rm = fit_sign(D @ t.J.mat, t.J.mat @ np.conj(D), tol)
        add("eC", min(rp, rm), sign=e1, required=False)
        if t.gamma is not None:
            g = t.gamma.mat
            e2, rp, rm = fit_sign(g @ t.J.mat, t.J.mat @ np.conj(g), tol)
            add("gJ", min(rp, rm), sign=e2, required=False)
    if not all_normalize:
        notices.append("some twist does not normalize the algebra; automorphism-based forms reported only")
    return ConditionReport(tuple(results), tuple(notices))


# -- untwisting ----------------------------------------------------------------


class UntwistError(ValueError):
    def __init__(self, relation: str, residual: float):
        super().__init__(f"untwisting precondition failed: {relation} (residual {residual:.3e})")
        self.relation = relation
        self.residual = residual


@dataclass(frozen=True)
class UntwistResult:
    triple: TwistedTriple
    branch: int
    predicted: tuple


def untwist(t: TwistedTriple, branch: Optional[int] = None) -> UntwistResult:
    """Trade a mild twist for a trivially-twisted triple.

    Branch 1 needs ``nu = a nu* = a nu^-1`` and returns ``J' = nu J``.
    Branch 2 needs ``nu = a2 nu^-1``, ``nu D = b1 D nu`` and (with a grading)
    ``nu gamma = b2 gamma nu``; it keeps ``J``.
    """
    if len(t.twists) != 1:
        raise UntwistError("single twist required", float(len(t.twists)))
    tol = t.tol
    nu = t.twists[0].nu.mat
    nui = t.twists[0].nu_inv
    s = t.signs
    a1, r1p, r1m = fit_sign(nu, nu.conj().T, tol)
    a2, r2p, r2m = fit_sign(nu, nui, tol)

    def signed(*xs):
        if any(x is None for x in xs):
            return None
        return int(np.prod(xs))

    use1 = branch == 1 or (branch is None and a1 is not None and a1 == a2)
    if use1:
        if a1 is None:
            raise UntwistError("nu = +-nu*", min(r1p, r1m))
        if a2 is None or a2 != a1:
            raise UntwistError("nu = alpha nu^-1 with the same alpha as nu = alpha nu*", min(r2p, r2m))
        Jp = compose(Op.linear(nu), t.J)
        out = TwistedTriple(t.alg, t.D, Jp, t.gamma, tol=tol, metadata=dict(t.metadata))
        return UntwistResult(out, 1, (s.eps, signed(a1, s.eps_prime), s.eps_dprime))
    if a2 is None:
        raise UntwistError("nu = +-nu^-1", min(r2p, r2m))
    b1, rp, rm = fit_sign(nu @ t.D.mat, t.D.mat @ nu, tol)
    if b1 is None:
        raise UntwistError("nu D = +-D nu", min(rp, rm))
    b2 = 1
    if t.gamma is not None:
        b2, rp, rm = fit_sign(nu @ t.gamma.mat, t.gamma.mat @ nu, tol)
        if b2 is None:
            raise UntwistError("nu gamma = +-gamma nu", min(rp, rm))
    out = TwistedTriple(t.alg, t.D, t.J, t.gamma, tol=tol, metadata=dict(t.metadata))
    epp = signed(b2, s.eps_dprime) if t.gamma is not None else None
    return UntwistResult(out, 2, (s.eps, signed(a2, b1, s.eps_prime), epp))
