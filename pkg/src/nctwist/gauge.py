"""Twisted gauge transformations, bilinear forms and spectral actions."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .algebra import AlgebraElement
from .fluct import (
    OneForm,
    build_one_form,
    delta_odot,
    fluctuate,
    odot_matrix,
    twist_opposite_element,
)
from .opcore import defect
from .triple import ConditionReport, ConditionResult, TwistedTriple, jconj

__all__ = [
    "GaugeError",
    "GaugePair",
    "adjoint_action",
    "gauge_pair",
    "transform_potential",
    "transform_dirac",
    "verify_vw",
    "bilinear_form",
    "symmetry_defect",
    "covariance_defect",
    "Actions",
    "actions",
]


class GaugeError(ValueError):
    pass


def _el(x) -> AlgebraElement:
    return x if isinstance(x, AlgebraElement) else AlgebraElement(x)


def _unitary(t: TwistedTriple, u) -> np.ndarray:
    pu = t.pi(_el(u))
    if defect(pu @ pu.conj().T, np.eye(t.n), t.tol) > t.tol.rtol:
        raise GaugeError("gauge element is not unitary")
    return pu


def adjoint_action(t: TwistedTriple, u, kind: str = "Ad", ell: int = 0, inverse: bool = False) -> np.ndarray:
    """``V = u J nu u nu^-1 J^-1`` (``Ad``) or ``V~ = u J nu^-1 u nu J^-1`` (``TAd``).

    ``inverse=True`` gives the same expression in ``u*``, which inverts it
    whenever the twisted zeroth-order conditions hold.
    """
    pu = _unitary(t, u)
    if inverse:
        pu = pu.conj().T
    tw = t.twists[ell]
    nu, nui = tw.nu.mat, tw.nu_inv
    if kind == "Ad":
        return pu @ jconj(t.J, nu @ pu @ nui)
    if kind == "TAd":
        return pu @ jconj(t.J, nui @ pu @ nu)
    raise ValueError(f"unknown kind {kind!r}")


@dataclass(frozen=True, eq=False)
class GaugePair:
    u: AlgebraElement
    component: int
    V: np.ndarray = field(repr=False)
    V_inv: np.ndarray = field(repr=False)
    Vt: np.ndarray = field(repr=False)
    Vt_inv: np.ndarray = field(repr=False)

    @property
    def unitarity_defect(self) -> float:
        """How far ``V~*`` is from ``V^-1``; zero when nu = +-nu*."""
        return defect(self.Vt.conj().T, self.V_inv)


def gauge_pair(t: TwistedTriple, u, ell: int = 0) -> GaugePair:
    return GaugePair(
        _el(u),
        ell,
        adjoint_action(t, u, "Ad", ell),
        adjoint_action(t, u, "Ad", ell, inverse=True),
        adjoint_action(t, u, "TAd", ell),
        adjoint_action(t, u, "TAd", ell, inverse=True),
    )


def transform_potential(t: TwistedTriple, w: OneForm, u) -> OneForm:
    """``u w u* + u[D, u*]`` as a one-form with explicit pairs."""
    _unitary(t, u)
    u = _el(u)
    alg = t.alg
    us = alg.star(u)
    pairs = []
    for a, b in w.pairs:
        ua = alg.mul(u, a)
        pairs.append((ua, alg.mul(b, us)))
        pairs.append((-alg.mul(ua, b), us))
    pairs.append((u, us))
    return build_one_form(t, pairs, w.component)


def _base_and_form(t: TwistedTriple) -> tuple[TwistedTriple, OneForm]:
    if t.base is not None and isinstance(t.potential, OneForm):
        return t.base, t.potential
    return t, build_one_form(t, [])


def transform_dirac(t: TwistedTriple, u, route: str = "formula") -> TwistedTriple:
    """Gauge transform of a (possibly fluctuated) triple.

    ``route="formula"`` fluctuates the base by the transformed potential;
    ``route="conjugation"`` applies ``V~_l D_l V_l^-1`` componentwise.
    """
    base, w = _base_and_form(t)
    if route == "formula":
        return fluctuate(base, transform_potential(base, w, u))
    if route != "conjugation":
        raise ValueError(f"unknown route {route!r}")
    comps = []
    for ell, tw in enumerate(t.twists):
        vt = adjoint_action(t, u, "TAd", ell)
        vi = adjoint_action(t, u, "Ad", ell, inverse=True)
        comps.append(vt @ tw.D.mat @ vi)
    D = sum(comps)
    return t.with_dirac(D, comps, require_selfadjoint=False, base=None, potential=None)


def verify_vw(t: TwistedTriple, u, w: Optional[OneForm] = None, ell: int = 0) -> ConditionReport:
    """Relations between ``V``, ``V~`` and the triple data for a unitary ``u``."""
    tol = t.tol
    gp = gauge_pair(t, u, ell)
    n = t.n
    eye = np.eye(n)
    res: list[ConditionResult] = []

    def add(name, r, required=True, note=""):
        res.append(ConditionResult(name, bool(r <= tol.rtol), float(r), None, ell, required, note))

    add("V_inverse", max(defect(gp.V @ gp.V_inv, eye, tol), defect(gp.V_inv @ gp.V, eye, tol)))
    add("Vt_inverse", max(defect(gp.Vt @ gp.Vt_inv, eye, tol), defect(gp.Vt_inv @ gp.Vt, eye, tol)))
    pu = t.pi(gp.u)
    worst_v = worst_vt = 0.0
    for a in t.alg.rep_basis:
        target = pu @ a @ pu.conj().T
        worst_v = max(worst_v, defect(gp.V @ a @ gp.V_inv, target, tol))
        worst_vt = max(worst_vt, defect(gp.Vt @ a @ gp.Vt_inv, target, tol))
    add("V_algebra", worst_v)
    add("Vt_algebra", worst_vt)
    if t.gamma is not None:
        g = t.gamma.mat
        add("V_gamma", defect(gp.V @ g @ gp.V_inv, g, tol))
        add("Vt_gamma", defect(gp.Vt @ g @ gp.Vt_inv, g, tol))
    tw = t.twists[ell]
    nu, nui = tw.nu.mat, tw.nu_inv
    # antilinear operators compared through their matrices
    nuJ = nu @ t.J.mat
    add("Vt_nuJ", defect(gp.Vt @ nuJ @ np.conj(gp.Vt_inv), nuJ, tol))
    Jnu = t.J.mat @ np.conj(nu)
    add("V_Jnu", defect(gp.V @ Jnu @ np.conj(gp.V_inv), Jnu, tol))
    a1 = t.signs.per_component[ell]["alpha1"]
    add(
        "Vt_adjoint_is_V_inverse",
        gp.unitarity_defect,
        required=a1 is not None,
        note="" if a1 is not None else "nu is not proportional to nu*",
    )
    base, form = (t, w) if w is not None else _base_and_form(t)
    comps = [form.component] if form.component is not None else range(len(base.twists))
    for c in comps:
        wl = form if form.component == c or len(base.twists) == 1 else build_one_form(base, form.pairs, c)
        lhs = odot_matrix(base, transform_potential(base, wl, u).matrix, c)
        up = twist_opposite_element(base, base.alg.star(gp.u), "plus", c)
        um = twist_opposite_element(base, gp.u, "minus", c)
        rhs = up @ odot_matrix(base, wl.matrix, c) @ um + up @ delta_odot(base, gp.u, c)
        res.append(ConditionResult("odot_gauge", bool(defect(lhs, rhs, tol) <= tol.rtol),
                                   float(defect(lhs, rhs, tol)), None, c))
    fl = fluctuate(base, form)
    add("Dirac_gauge", defect(transform_dirac(fl, u, "formula").D.mat,
                              transform_dirac(fl, u, "conjugation").D.mat, tol))
    return ConditionReport(tuple(res))


# -- bilinear forms and actions ----------------------------------------------------


def bilinear_form(t: TwistedTriple, psi, phi, kind: str = "twisted") -> complex:
    """``<J nu psi, D phi>`` summed over components, or the naive ``<J psi, D phi>``."""
    psi = np.asarray(psi, dtype=complex)
    phi = np.asarray(phi, dtype=complex)
    if kind == "naive":
        return complex(np.vdot(t.J.mat @ np.conj(psi), t.D.mat @ phi))
    if kind != "twisted":
        raise ValueError(f"unknown kind {kind!r}")
    total = 0j
    for tw in t.twists:
        jn = t.J.mat @ np.conj(tw.nu.mat @ psi)
        total += np.vdot(jn, tw.D.mat @ phi)
    return complex(total)


def symmetry_defect(t: TwistedTriple, psi, phi) -> float:
    """``|A(psi, phi) - a1 eps eps' A(phi, psi)|`` relative to the larger value."""
    s = t.signs
    if None in (s.alpha1, s.eps, s.eps_prime):
        raise ValueError("signs needed for the symmetry relation are indeterminate")
    x = bilinear_form(t, psi, phi)
    y = s.alpha1 * s.eps * s.eps_prime * bilinear_form(t, phi, psi)
    return abs(x - y) / (t.tol.floor + max(abs(x), abs(y)))


def covariance_defect(t: TwistedTriple, u, ell: int = 0) -> float:
    """``V~* J nu V`` against ``J nu``; zero means the twisted form is gauge invariant."""
    gp = gauge_pair(t, u, ell)
    Jnu = t.J.mat @ np.conj(t.twists[ell].nu.mat)
    lhs = gp.Vt.conj().T @ Jnu @ np.conj(gp.V)
    return defect(lhs, Jnu, t.tol)


@dataclass(frozen=True)
class Actions:
    fermionic: complex
    bosonic: float
    spectrum: np.ndarray = field(repr=False)

    def as_dict(self) -> dict:
        return {
            "fermionic": [self.fermionic.real, self.fermionic.imag],
            "bosonic": self.bosonic,
            "spectrum": [float(x) for x in self.spectrum],
        }


def actions(
    t: TwistedTriple,
    psi,
    f_coeffs: Sequence[float] = (0.0, 0.0, 1.0),
    cutoff: float = 1.0,
) -> Actions:
    """Fermionic ``<J nu psi~, D psi~>`` and bosonic ``sum f(lambda / cutoff)``.

    ``f_coeffs`` are polynomial coefficients in increasing degree; ``psi~`` is
    the positive-chirality part of ``psi`` when a grading is present. The
    spectrum uses the Hermitian part of D when D is not self-adjoint.
    """
    if cutoff <= 0:
        raise ValueError("cutoff must be positive")
    psi = np.asarray(psi, dtype=complex)
    if t.gamma is not None:
        psi = 0.5 * (psi + t.gamma.mat @ psi)
    sf = bilinear_form(t, psi, psi)
    D = t.D.mat
    spec = np.linalg.eigvalsh(0.5 * (D + D.conj().T))
    sb = float(np.sum(np.polynomial.polynomial.polyval(spec / cutoff, np.asarray(f_coeffs, dtype=float))))
    return Actions(sf, sb, spec)
