"""Concrete finite triples: the C_L + C_R + M_2(C) toy model and the finite
Standard-Model / left-right data, plus the JSON document format."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from typing import Optional, Sequence

import jsonschema
import numpy as np

from .algebra import FiniteAlgebra, Summand
from .opcore import Op, Parity
from .schemas import TRIPLE_SCHEMA, TRIPLE_SCHEMA_ID
from .triple import Twist, TwistedTriple

__all__ = [
    "ToyParams",
    "SMParams",
    "toy_algebra",
    "toy_dirac",
    "toy_J",
    "toy_gamma",
    "toy_decomposition",
    "toy_signed_twist",
    "toy_diagonal_twist",
    "build_toy",
    "sm_algebra",
    "sm_dirac",
    "sm_J",
    "sm_gamma",
    "build_sm_finite",
    "DocumentError",
    "serialize",
    "deserialize",
    "dumps",
    "loads",
    "load_fixture",
    "fixture_names",
]


# -- toy model -----------------------------------------------------------------


@dataclass(frozen=True)
class ToyParams:
    k_x: complex = 1.0
    k_y: complex = 1.0

    def __post_init__(self):
        if not (np.isfinite(complex(self.k_x)) and np.isfinite(complex(self.k_y))):
            raise ValueError("toy parameters must be finite")


def toy_algebra() -> FiniteAlgebra:
    """C_L + C_R + M_2(C) acting on C^8 as diag(l, r) x 1_2  +  1_2 x M."""

    def rep(lam_l, lam_r, m):
        out = np.zeros((8, 8), dtype=complex)
        out[:4, :4] = np.kron(np.diag([lam_l[0, 0], lam_r[0, 0]]), np.eye(2))
        out[4:, 4:] = np.kron(np.eye(2), m)
        return out

    summands = (Summand("C_L", "C"), Summand("C_R", "C"), Summand("M2", "M", 2))
    return FiniteAlgebra.from_representation(summands, rep)


def _swap(k: int) -> np.ndarray:
    z = np.zeros((k, k))
    e = np.eye(k)
    return np.block([[z, e], [e, z]]).astype(complex)


def toy_J() -> Op:
    return Op.antilinear(_swap(4))


def toy_dirac(p: ToyParams) -> np.ndarray:
    kx, ky = complex(p.k_x), complex(p.k_y)
    S = np.kron(np.array([[0, kx], [np.conj(kx), 0]]), np.eye(2))
    T = np.diag([ky, 0, 0, 0]).astype(complex)
    return np.block([[S, T.conj().T], [T, S.conj()]])


def toy_gamma() -> np.ndarray:
    """A grading for the toy data; not part of the model, used as an even test fixture."""
    return np.diag([1.0, 1, -1, -1, -1, -1, 1, 1]).astype(complex)


def toy_decomposition(p: ToyParams, name: str) -> list[np.ndarray]:
    """Split of the toy Dirac operator: ``whole``, ``2twist`` (D1, D2') or ``3twist`` (D1, D2, D3)."""
    D = toy_dirac(p)
    z = np.zeros((4, 4), dtype=complex)
    d1 = D.copy()
    d1[:4, 4:] = 0
    d1[4:, :4] = 0
    d2 = np.block([[z, D[:4, 4:]], [z, z]])
    d3 = np.block([[z, z], [D[4:, :4], z]])
    if name == "whole":
        return [D]
    if name == "2twist":
        return [d1, d2 + d3]
    if name == "3twist":
        return [d1, d2, d3]
    raise ValueError(f"unknown decomposition {name!r}")


def toy_signed_twist(signs: Sequence[float]) -> np.ndarray:
    """``diag(s, s)`` for four signs (or phases) ``s``; regular for unimodular real s."""
    s = np.asarray(signs, dtype=complex)
    if s.shape != (4,):
        raise ValueError("four entries expected")
    return np.diag(np.concatenate([s, s]))


def toy_diagonal_twist(t: complex, r: complex) -> np.ndarray:
    """``diag(t, r, 1/t, 1/r, 1/conj t, 1/conj r, conj t, conj r)``.

    Regular and compatible with the Dirac operator for ``k_y = 0`` for any
    nonzero ``t, r``; only normalizes the algebra when ``t = r``.
    """
    t, r = complex(t), complex(r)
    if t == 0 or r == 0:
        raise ValueError("twist entries must be nonzero")
    p = np.array([t, r, 1 / t, 1 / r])
    return np.diag(np.concatenate([p, 1 / np.conj(p)]))


def build_toy(
    p: ToyParams = ToyParams(),
    twists: Optional[Sequence] = None,
    decomposition: str = "whole",
    gamma: Optional[np.ndarray] = None,
) -> TwistedTriple:
    """Toy triple on C^8; ``twists`` is a list of nu matrices matching ``decomposition``."""
    D = toy_dirac(p)
    comps = toy_decomposition(p, decomposition)
    if twists is None:
        twists = [np.eye(8)] * len(comps)
    if len(twists) != len(comps):
        raise ValueError(f"decomposition {decomposition!r} needs {len(comps)} twists")
    tw = tuple(Twist(Op.linear(c), Op.linear(nu)) for c, nu in zip(comps, twists))
    meta = {"model": "toy", "k_x": _cpair(p.k_x), "k_y": _cpair(p.k_y), "decomposition": decomposition}
    return TwistedTriple(
        toy_algebra(),
        Op.linear(D),
        toy_J(),
        None if gamma is None else Op.linear(gamma),
        tw,
        metadata=meta,
    )


# -- finite Standard Model / left-right data -----------------------------------

# one generation: particles 0..15 then antiparticles 16..31; particle index
# 4 c + w with c = 0 lepton, c = 1..3 quark colours, w in (nu_R, e_R, nu_L, e_L)


@dataclass(frozen=True)
class SMParams:
    k_nu: object = 0.1
    k_e: object = 0.2
    k_u: object = 0.3
    k_d: object = 0.4
    k_nuR: object = 1.0
    generations: int = 1

    def __post_init__(self):
        if self.generations not in (1, 3):
            raise ValueError("generations must be 1 or 3")
        g = self.generations
        for name in ("k_nu", "k_e", "k_u", "k_d", "k_nuR"):
            m = self.matrix(name)
            if m.shape != (g, g):
                raise ValueError(f"{name} must be {g}x{g} for {g} generation(s)")
            if not np.all(np.isfinite(m)):
                raise ValueError(f"{name} has non-finite entries")

    def matrix(self, name: str) -> np.ndarray:
        v = np.asarray(getattr(self, name), dtype=complex)
        if v.ndim == 0:
            v = v * np.eye(self.generations)
        return v

    @property
    def quark_lepton_unified(self) -> bool:
        return bool(
            np.array_equal(self.matrix("k_nu"), self.matrix("k_u"))
            and np.array_equal(self.matrix("k_e"), self.matrix("k_d"))
        )


def _yukawa_block(k1: np.ndarray, k2: np.ndarray) -> np.ndarray:
    g = k1.shape[0]
    z = np.zeros((g, g), dtype=complex)
    return np.block(
        [
            [z, z, k1.conj().T, z],
            [z, z, z, k2.conj().T],
            [k1, z, z, z],
            [z, k2, z, z],
        ]
    )


def sm_dirac(p: SMParams) -> np.ndarray:
    g = p.generations
    blocks = [_yukawa_block(p.matrix("k_nu"), p.matrix("k_e"))]
    blocks += [_yukawa_block(p.matrix("k_u"), p.matrix("k_d"))] * 3
    m = 16 * g
    S = np.zeros((m, m), dtype=complex)
    for c, b in enumerate(blocks):
        S[4 * g * c : 4 * g * (c + 1), 4 * g * c : 4 * g * (c + 1)] = b
    T = np.zeros((m, m), dtype=complex)
    T[:g, :g] = p.matrix("k_nuR")
    return np.block([[S, T.conj().T], [T, S.conj()]])


def sm_J(generations: int = 1) -> Op:
    return Op.antilinear(_swap(16 * generations))


def sm_gamma(generations: int = 1) -> np.ndarray:
    """-1 on right-handed and +1 on left-handed particles, negated on antiparticles."""
    chir = np.repeat(np.array([-1.0, -1.0, 1.0, 1.0]), generations)
    part = np.tile(chir, 4)
    return np.diag(np.concatenate([part, -part])).astype(complex)


def _lr_rep(g: int):
    eg = np.eye(g)

    def rep_parts(q_r, q_l, m4):
        particle = np.kron(np.eye(4), np.kron(np.block([[q_r, np.zeros((2, 2))], [np.zeros((2, 2)), q_l]]), eg))
        anti = np.kron(m4, np.eye(4 * g))
        out = np.zeros((32 * g, 32 * g), dtype=complex)
        out[: 16 * g, : 16 * g] = particle
        out[16 * g :, 16 * g :] = anti
        return out

    return rep_parts


def sm_algebra(name: str = "A_SM", generations: int = 1) -> FiniteAlgebra:
    """``A_LR = H_R + H_L + M_4(C)`` or its subalgebra ``A_SM = C + H + M_3(C)``.

    In ``A_SM`` the complex number acts as ``diag(l, conj l)`` on the
    right-handed doublet and as ``l`` on the lepton row of ``M_4``.
    """
    rep = _lr_rep(generations)
    if name == "A_LR":
        summands = (Summand("H_R", "H"), Summand("H_L", "H"), Summand("M4", "M", 4))
        return FiniteAlgebra.from_representation(summands, rep)
    if name == "A_SM":
        summands = (Summand("C", "C"), Summand("H", "H"), Summand("M3", "M", 3))

        def rep_sm(lam, q, m3):
            z = lam[0, 0]
            q_r = np.diag([z, np.conj(z)])
            m4 = np.zeros((4, 4), dtype=complex)
            m4[0, 0] = z
            m4[1:, 1:] = m3
            return rep(q_r, q, m4)

        return FiniteAlgebra.from_representation(summands, rep_sm)
    raise ValueError(f"unknown algebra {name!r}")


def build_sm_finite(
    p: SMParams = SMParams(),
    algebra: str = "A_SM",
    twists: Optional[Sequence] = None,
    components: Optional[Sequence[np.ndarray]] = None,
) -> TwistedTriple:
    D = sm_dirac(p)
    comps = list(components) if components is not None else [D]
    if twists is None:
        twists = [np.eye(D.shape[0])] * len(comps)
    tw = tuple(Twist(Op.linear(c), Op.linear(nu)) for c, nu in zip(comps, twists))
    meta = {"model": "sm", "algebra": algebra, "generations": p.generations}
    return TwistedTriple(
        sm_algebra(algebra, p.generations),
        Op.linear(D),
        sm_J(p.generations),
        Op.linear(sm_gamma(p.generations)),
        tw,
        metadata=meta,
    )


# -- documents -----------------------------------------------------------------


class DocumentError(ValueError):
    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


def _cpair(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _mat_to_doc(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _mat_from_doc(x, path: str) -> np.ndarray:
    try:
        arr = np.asarray(x, dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise DocumentError(f"not a matrix of [re, im] pairs ({e})", path) from None
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise DocumentError(f"expected a square matrix of [re, im] pairs, got shape {arr.shape}", path)
    return arr[..., 0] + 1j * arr[..., 1]


def serialize(t: TwistedTriple) -> dict:
    return {
        "schema": TRIPLE_SCHEMA_ID,
        "algebra": {
            "summands": [{"label": s.label, "kind": s.kind, "size": s.size} for s in t.alg.summands],
            "rep_basis": [_mat_to_doc(b) for b in t.alg.rep_basis],
        },
        "D": _mat_to_doc(t.D.mat),
        "J": {"matrix": _mat_to_doc(t.J.mat), "parity": "antilinear"},
        "gamma": None if t.gamma is None else _mat_to_doc(t.gamma.mat),
        "twists": [{"D_l": _mat_to_doc(tw.D.mat), "nu_l": _mat_to_doc(tw.nu.mat)} for tw in t.twists],
        "metadata": dict(t.metadata),
    }


def deserialize(doc: dict) -> TwistedTriple:
    if not isinstance(doc, dict):
        raise DocumentError("document must be a JSON object")
    if doc.get("schema") != TRIPLE_SCHEMA_ID:
        raise DocumentError(f"unsupported schema {doc.get('schema')!r}, expected {TRIPLE_SCHEMA_ID!r}", "schema")
    try:
        jsonschema.validate(doc, TRIPLE_SCHEMA)
    except jsonschema.ValidationError as e:
        path = "/".join(str(p) for p in e.absolute_path)
        raise DocumentError(e.message, path) from None
    summands = [Summand(s["label"], s["kind"], s["size"]) for s in doc["algebra"]["summands"]]
    basis = [_mat_from_doc(b, f"algebra/rep_basis/{i}") for i, b in enumerate(doc["algebra"]["rep_basis"])]
    try:
        alg = FiniteAlgebra(tuple(summands), np.stack(basis))
    except ValueError as e:
        raise DocumentError(str(e), "algebra") from None
    D = _mat_from_doc(doc["D"], "D")
    J = _mat_from_doc(doc["J"]["matrix"], "J/matrix")
    gamma = None if doc.get("gamma") is None else _mat_from_doc(doc["gamma"], "gamma")
    twists = []
    for i, tw in enumerate(doc["twists"]):
        try:
            twists.append(
                Twist(Op.linear(_mat_from_doc(tw["D_l"], f"twists/{i}/D_l")),
                      Op.linear(_mat_from_doc(tw["nu_l"], f"twists/{i}/nu_l")))
            )
        except ValueError as e:
            if isinstance(e, DocumentError):
                raise
            raise DocumentError(str(e), f"twists/{i}") from None
    try:
        return TwistedTriple(
            alg,
            Op(D, Parity.LINEAR),
            Op(J, Parity.ANTILINEAR),
            None if gamma is None else Op(gamma, Parity.LINEAR),
            tuple(twists),
            metadata=dict(doc.get("metadata", {})),
        )
    except ValueError as e:
        raise DocumentError(str(e), _field_for(str(e))) from None


def _field_for(message: str) -> str:
    for key, path in (("twist", "twists"), ("J", "J/matrix"), ("self-adjoint", "D"), ("dimension", "D")):
        if key in message:
            return path
    return ""


def dumps(t: TwistedTriple) -> str:
    return json.dumps(serialize(t), indent=1)


def loads(text: str) -> TwistedTriple:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentError(f"invalid JSON: {e.msg}", f"line {e.lineno} column {e.colno}") from None
    return deserialize(doc)


def fixture_names() -> list[str]:
    files = resources.files("nctwist") / "data"
    return sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".json"))


def load_fixture(name: str) -> TwistedTriple:
    path = resources.files("nctwist") / "data" / f"{name}.json"
    return loads(path.read_text(encoding="utf-8"))
