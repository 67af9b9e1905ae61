"""Noncommutative one-forms, twisted-opposite maps and inner fluctuations."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .algebra import AlgebraElement
from .opcore import defect
from .triple import TwistedTriple, jconj

__all__ = [
    "OneForm",
    "TwistedOppositeForm",
    "build_one_form",
    "form_matrix",
    "symmetrize",
    "adjoint_pairs",
    "twist_opposite_element",
    "delta_odot",
    "twist_opposite_form",
    "odot_matrix",
    "fluctuate",
    "compose_fluctuations",
    "quadratic_term",
    "fluctuate_quadratic",
    "quadratic_gauge_law",
    "normalize_pairs",
    "hermitian_pairs",
    "FluctuationWarning",
]


class FluctuationWarning(UserWarning):
    pass


Pair = tuple[AlgebraElement, AlgebraElement]


def _as_el(x) -> AlgebraElement:
    return x if isinstance(x, AlgebraElement) else AlgebraElement(x)


def _dirac(t: TwistedTriple, component: Optional[int]) -> np.ndarray:
    if component is None:
        return t.D.mat
    return t.twists[component].D.mat


def form_matrix(t: TwistedTriple, pairs: Iterable[Pair], D: np.ndarray) -> np.ndarray:
    out = np.zeros((t.n, t.n), dtype=complex)
    for a, b in pairs:
        pa, pb = t.pi(a), t.pi(b)
        out += pa @ (D @ pb - pb @ D)
    return out


@dataclass(frozen=True, eq=False)
class OneForm:
    """``sum pi(a_i) [D_sel, pi(b_i)]`` with ``D_sel`` a twist component or the whole D."""

    pairs: tuple[Pair, ...]
    matrix: np.ndarray
    dirac: np.ndarray = field(repr=False)
    component: Optional[int] = None

    @property
    def is_selfadjoint(self) -> bool:
        return defect(self.matrix, self.matrix.conj().T) <= 1e-9


def build_one_form(t: TwistedTriple, pairs: Iterable, component: Optional[int] = None) -> OneForm:
    pairs = tuple((_as_el(a), _as_el(b)) for a, b in pairs)
    for a, b in pairs:
        if len(a) != t.alg.dim or len(b) != t.alg.dim:
            raise ValueError("pair element does not belong to the algebra")
    D = _dirac(t, component)
    m = form_matrix(t, pairs, D)
    m.setflags(write=False)
    return OneForm(pairs, m, D, component)


def adjoint_pairs(t: TwistedTriple, pairs: Sequence[Pair]) -> list[Pair]:
    """Pairs for the adjoint form: (a[D,b])* = b*[D,a*] - [D, b*a*]."""
    alg = t.alg
    unit = alg.unit()
    out = []
    for a, b in pairs:
        a_s, b_s = alg.star(a), alg.star(b)
        out.append((b_s, a_s))
        out.append((-unit, alg.mul(b_s, a_s)))
    return out


def symmetrize(t: TwistedTriple, w: OneForm) -> OneForm:
    """``(w + w*) / 2`` with its generator pairs."""
    pairs = [(a.scale(0.5), b) for a, b in w.pairs]
    pairs += [(a.scale(0.5), b) for a, b in adjoint_pairs(t, w.pairs)]
    return build_one_form(t, pairs, w.component)


# -- twisted-opposite maps -----------------------------------------------------


def _twist(t: TwistedTriple, ell: int) -> tuple[np.ndarray, np.ndarray]:
    tw = t.twists[ell]
    return tw.nu.mat, tw.nu_inv


def twist_opposite_element(t: TwistedTriple, a, variant: str, ell: int = 0) -> np.ndarray:
    """``a^+ = J nu^-1 a* nu J^-1`` (variant ``"plus"``) or ``a^- = J nu a* nu^-1 J^-1`` (``"minus"``)."""
    nu, nui = _twist(t, ell)
    pa = t.pi(_as_el(a)).conj().T
    if variant in ("plus", "+", "oplus"):
        return jconj(t.J, nui @ pa @ nu)
    if variant in ("minus", "-", "ominus"):
        return jconj(t.J, nu @ pa @ nui)
    raise ValueError(f"unknown variant {variant!r}")


def delta_odot(t: TwistedTriple, a, ell: int = 0) -> np.ndarray:
    """``D_l a^- - a^+ D_l``."""
    D = t.twists[ell].D.mat
    return D @ twist_opposite_element(t, a, "minus", ell) - twist_opposite_element(t, a, "plus", ell) @ D


def _eps_prime(t: TwistedTriple, ell: int) -> tuple[int, bool]:
    ep = t.signs.per_component[ell]["epsilon_prime"]
    if ep is None:
        return 1, False
    return ep, True


def odot_matrix(t: TwistedTriple, w: np.ndarray, ell: int = 0) -> np.ndarray:
    """``eps' nu_l J w J^-1 nu_l``."""
    nu, _ = _twist(t, ell)
    ep, _ = _eps_prime(t, ell)
    return ep * nu @ jconj(t.J, w) @ nu


@dataclass(frozen=True, eq=False)
class TwistedOppositeForm:
    source: OneForm
    component: int
    matrix: np.ndarray
    expansion: np.ndarray = field(repr=False)
    nueC_holds: bool = True

    @property
    def expansion_defect(self) -> float:
        return defect(self.matrix, self.expansion)


def twist_opposite_form(t: TwistedTriple, w: OneForm, ell: Optional[int] = None) -> TwistedOppositeForm:
    """The conjugated form together with its expansion through the maps ``a^+``, ``a^-``.

    The two agree when the twisted epsilon' relation holds for the component.
    """
    if ell is None:
        ell = w.component if w.component is not None else 0
    m = odot_matrix(t, w.matrix, ell)
    _, known = _eps_prime(t, ell)
    alg = t.alg
    D = w.dirac
    exp = np.zeros_like(m)
    for a, b in w.pairs:
        a_s, b_s = alg.star(a), alg.star(b)
        plus_a = twist_opposite_element(t, a_s, "plus", ell)
        exp += plus_a @ (D @ twist_opposite_element(t, b_s, "minus", ell)
                         - twist_opposite_element(t, b_s, "plus", ell) @ D)
    if not known:
        warnings.warn("epsilon' is indeterminate for this component", FluctuationWarning, stacklevel=2)
    m.setflags(write=False)
    return TwistedOppositeForm(w, ell, m, exp, known)


# -- fluctuations ---------------------------------------------------------------


def _component_forms(t: TwistedTriple, w: OneForm) -> list[Optional[OneForm]]:
    k = len(t.twists)
    if w.component is not None:
        return [w if i == w.component else None for i in range(k)]
    if k == 1:
        return [w]
    # a form over the whole D splits into one form per component
    return [build_one_form(t, w.pairs, i) for i in range(k)]


def fluctuate(t: TwistedTriple, w: OneForm, symmetrize_form: bool = False) -> TwistedTriple:
    """``D_l -> D_l + w_l + eps' nu_l J w_l J^-1 nu_l`` for each component.

    The result records ``base`` and ``potential``; a non-self-adjoint outcome
    is flagged in ``metadata["flags"]`` rather than refused.
    """
    if symmetrize_form:
        w = symmetrize(t, w)
    comps = []
    for ell, (tw, wl) in enumerate(zip(t.twists, _component_forms(t, w))):
        if wl is None:
            comps.append(tw.D.mat)
        else:
            comps.append(tw.D.mat + wl.matrix + odot_matrix(t, wl.matrix, ell))
    D = sum(comps)
    flags = []
    if defect(D, D.conj().T, t.tol) > t.tol.rtol:
        flags.append("non-self-adjoint")
    if len(t.twists) > 1:
        flags.append("multitwist: per-component twisted-opposite forms")
    meta = dict(t.metadata)
    meta["flags"] = flags
    return t.with_dirac(D, comps, require_selfadjoint=False, base=t, potential=w, metadata=meta)


def compose_fluctuations(t: TwistedTriple, w: OneForm, pairs_prime: Iterable) -> OneForm:
    """Single form over D equivalent to fluctuating by ``w`` and then by ``sum c[D_w, d]``.

    Per pair: (a - c d a)[D,b] + (c - c a b)[D,d] + c a [D, b d].
    """
    if len(t.twists) != 1:
        raise ValueError("closure formula is implemented for a single twist")
    alg = t.alg
    mul = alg.mul
    pairs_prime = [(_as_el(c), _as_el(d)) for c, d in pairs_prime]
    out = list(w.pairs) + list(pairs_prime)
    for a, b in w.pairs:
        for c, d in pairs_prime:
            ca = mul(c, a)
            out.append((ca, mul(b, d)))
            out.append((-mul(ca, b), d))
            out.append((-mul(mul(c, d), a), b))
    return build_one_form(t, out, w.component)


# -- fluctuations without first order --------------------------------------------


def _require_untwisted(t: TwistedTriple):
    if not t.is_trivially_twisted:
        raise ValueError("quadratic fluctuations are defined for trivially-twisted triples only")


def quadratic_term(t: TwistedTriple, pairs: Iterable) -> np.ndarray:
    """``sum_ij J a_i J^-1 a_j [[D, b_j], J b_i J^-1]``."""
    _require_untwisted(t)
    pairs = [(_as_el(a), _as_el(b)) for a, b in pairs]
    D = t.D.mat
    out = np.zeros((t.n, t.n), dtype=complex)
    for ai, bi in pairs:
        ja = jconj(t.J, t.pi(ai))
        jb = jconj(t.J, t.pi(bi))
        for aj, bj in pairs:
            pa, pb = t.pi(aj), t.pi(bj)
            c = D @ pb - pb @ D
            out += ja @ pa @ (c @ jb - jb @ c)
    return out


def fluctuate_quadratic(t: TwistedTriple, pairs: Iterable) -> TwistedTriple:
    """``D + sum a[D,b] + sum JaJ^-1 [D, JbJ^-1] + quadratic term``."""
    _require_untwisted(t)
    pairs = [(_as_el(a), _as_el(b)) for a, b in pairs]
    D = t.D.mat
    lin = form_matrix(t, pairs, D)
    opp = _opposite_linear(t, pairs)
    quad = quadratic_term(t, pairs)
    Dw = D + lin + opp + quad
    meta = dict(t.metadata)
    meta["quadratic_norm"] = float(np.linalg.norm(quad))
    meta["flags"] = [] if defect(Dw, Dw.conj().T, t.tol) <= t.tol.rtol else ["non-self-adjoint"]
    return t.with_dirac(Dw, require_selfadjoint=False, base=t, potential=None, metadata=meta)


def normalize_pairs(t: TwistedTriple, pairs: Iterable) -> list[Pair]:
    """Append ``(1 - sum a_i b_i, 1)`` so that the pairs satisfy ``sum a_i b_i = 1``.

    The extra pair adds nothing to any of the fluctuation terms since ``[D, 1] = 0``.
    """
    alg = t.alg
    pairs = [(_as_el(a), _as_el(b)) for a, b in pairs]
    s = alg.zero()
    for a, b in pairs:
        s = s + alg.mul(a, b)
    return pairs + [(alg.unit() - s, alg.unit())]


def hermitian_pairs(t: TwistedTriple, pairs: Iterable) -> list[Pair]:
    """Pairs closed under ``(a, b) -> (b*, a*)`` with ``sum a_i b_i = 1``.

    For such pairs the quadratic fluctuation is self-adjoint.
    """
    alg = t.alg
    pairs = [(_as_el(a), _as_el(b)) for a, b in pairs]
    out = pairs + [(alg.star(b), alg.star(a)) for a, b in pairs]
    s = alg.zero()
    for a, b in out:
        s = s + alg.mul(a, b)
    half = (alg.unit() - s).scale(0.5)
    return out + [(half, alg.unit()), (alg.unit(), half)]


def _opposite_linear(t: TwistedTriple, pairs: Sequence[Pair]) -> np.ndarray:
    D = t.D.mat
    out = np.zeros((t.n, t.n), dtype=complex)
    for a, b in pairs:
        jb = jconj(t.J, t.pi(b))
        out += jconj(t.J, t.pi(a)) @ (D @ jb - jb @ D)
    return out


def quadratic_gauge_law(t: TwistedTriple, pairs: Iterable, u) -> np.ndarray:
    """Quadratic term after ``(a, b) -> (u a, b u*)``, predicted from the old data.

    With ``x^ = J x J^-1``, ``U = u u^`` and normalized pairs:
    ``U w2 U* + u^ (u w u*) u^* - u w u* + u w~^u u* - w~^u`` where ``w~^u`` is
    the transformed opposite term. The correction terms vanish under the
    first-order condition.
    """
    _require_untwisted(t)
    pairs = [(_as_el(a), _as_el(b)) for a, b in pairs]
    alg = t.alg
    s = alg.zero()
    for a, b in pairs:
        s = s + alg.mul(a, b)
    if defect(t.pi(s), np.eye(t.n), t.tol) > t.tol.rtol:
        raise ValueError("pairs must satisfy sum a_i b_i = 1; see normalize_pairs")
    u = _as_el(u)
    us = alg.star(u)
    pu = t.pi(u)
    hu = jconj(t.J, pu)
    U = pu @ hu
    uwu = pu @ form_matrix(t, pairs, t.D.mat) @ pu.conj().T
    opp_u = _opposite_linear(t, [(alg.mul(u, a), alg.mul(b, us)) for a, b in pairs])
    w2 = quadratic_term(t, pairs)
    return (U @ w2 @ U.conj().T + hu @ uwu @ hu.conj().T - uwu
            + pu @ opp_u @ pu.conj().T - opp_u)
