import json
from pathlib import Path

import numpy as np
import pytest

from nctwist import models
from nctwist.algebra import (
    QUAT_BASIS,
    AlgebraElement,
    FiniteAlgebra,
    Summand,
    central_projections,
    embed,
    is_subalgebra,
    quaternion,
    random_unitary,
    structure_signature,
)
from nctwist.opcore import RealSubspace, flatten

GOLDEN = Path(__file__).parent / "golden"
Z2 = np.zeros((2, 2))


@pytest.fixture(scope="module")
def alg():
    return models.toy_algebra()


def c3_span(alg):
    # (l, r, diag(l, m)) with l, r, m complex
    mats = []
    for blocks in [(1, 0, np.diag([1, 0])), (0, 1, Z2), (0, 0, np.diag([0, 1]))]:
        m = embed(alg, alg.element(*blocks))
        mats += [m, 1j * m]
    return RealSubspace.span_matrices(mats)


def test_embed_left_unit(alg):
    expected = np.diag([1, 1, 0, 0, 0, 0, 0, 0])
    assert np.allclose(embed(alg, alg.element(1, 0, Z2)), expected)


def test_embed_matrix_unit(alg):
    assert np.allclose(embed(alg, alg.element(0, 0, np.eye(2))), np.diag([0] * 4 + [1] * 4))


def test_embed_unit(alg):
    assert np.allclose(embed(alg, alg.element(1, 1, np.eye(2))), np.eye(8))
    assert np.allclose(embed(alg, alg.unit()), np.eye(8))


def test_embed_m2_block_structure(alg):
    m = np.array([[1, 2j], [3, 4 - 1j]])
    out = embed(alg, alg.element(0, 0, m))
    assert np.allclose(out[4:, 4:], np.kron(np.eye(2), m))
    assert np.allclose(out[:4], 0)


def test_embed_wrong_length(alg):
    with pytest.raises(ValueError):
        alg.embed(np.zeros(alg.dim + 1))


def test_mul_star_homomorphism(alg, rng):
    for _ in range(20):
        a, b = alg.random_element(rng), alg.random_element(rng)
        assert np.allclose(alg.embed(alg.mul(a, b)), alg.embed(a) @ alg.embed(b))
        assert np.allclose(alg.embed(alg.star(a)), alg.embed(a).conj().T)


def test_quaternion_basis():
    q = quaternion(1, 2, 3, 4)
    assert np.allclose(q, sum(c * e for c, e in zip((1, 2, 3, 4), QUAT_BASIS)))
    # quaternions are closed under products and have q q* = |q|^2
    assert np.allclose(q @ q.conj().T, 30 * np.eye(2))


def test_bad_algebra_rejected():
    with pytest.raises(ValueError):
        FiniteAlgebra((Summand("x", "C"),), np.stack([np.eye(2), np.eye(2)]).astype(complex))
    with pytest.raises(ValueError):
        # no unit in the span
        FiniteAlgebra((Summand("x", "C"),), np.stack([np.diag([1, 0]), np.diag([1j, 0])]).astype(complex))


def test_subalgebra_unit(alg):
    assert is_subalgebra(alg, RealSubspace.span_matrices([np.eye(8)]))


def test_not_subalgebra(alg):
    off = alg.element(0, 0, np.array([[0, 1], [0, 0]]))
    span = RealSubspace.span_matrices([alg.embed(alg.element(1, 0, Z2)), alg.embed(off)])
    # oracle: the product of the off-diagonal unit with its adjoint leaves the span
    e = alg.embed(off)
    assert not span.contains(flatten(e @ e.conj().T))
    assert not is_subalgebra(alg, span)


def test_c3_is_subalgebra(alg):
    assert is_subalgebra(alg, c3_span(alg))


def test_signature_m2():
    span = RealSubspace.span_matrices([e for i in range(2) for j in range(2)
                                       for e in (np.eye(2)[:, [i]] @ np.eye(2)[[j]],
                                                 1j * np.eye(2)[:, [i]] @ np.eye(2)[[j]])])
    sig = structure_signature(span)
    assert sig.blocks == (2,) and not sig.commutative and sig.real_dim == 8


def test_signature_c3(alg):
    sig = structure_signature(c3_span(alg))
    assert sig.blocks == (1, 1, 1) and sig.commutative and sig.real_dim == 6
    assert sig.kinds == ("C", "C", "C")


def test_signature_toy(alg):
    sig = structure_signature(alg.span())
    assert sig.blocks == (1, 1, 2) and sig.real_dim == 12 and not sig.commutative


def test_signature_a_lr(lr):
    sig = structure_signature(lr.alg.span())
    assert sig.blocks == (1, 1, 4) and sig.kinds == ("H", "H", "C") and sig.real_dim == 40


def test_central_projections_toy(alg):
    projs = central_projections(alg.span())
    assert len(projs) == 3
    assert np.allclose(sum(projs), np.eye(8))
    for p in projs:
        assert np.allclose(p @ p, p)


def test_random_unitary_zero_scale(alg):
    u = random_unitary(alg, 7, scale=0.0)
    assert np.allclose(alg.embed(u), np.eye(8))


@pytest.mark.parametrize("seed", range(10))
def test_random_unitary_is_unitary(alg, seed):
    U = alg.embed(random_unitary(alg, seed))
    assert np.linalg.norm(U @ U.conj().T - np.eye(8)) < 1e-10


def test_random_unitary_golden(alg):
    doc = json.loads((GOLDEN / "random_unitary_toy_seed42.json").read_text())
    u = random_unitary(alg, doc["seed"])
    assert np.allclose(u.coeffs, doc["coeffs"], rtol=0, atol=1e-12)


def test_element_arithmetic(alg):
    a = AlgebraElement(np.arange(alg.dim, dtype=float))
    assert np.allclose((a + a - a).coeffs, a.coeffs)
    assert np.allclose((-a).scale(2).coeffs, -2 * a.coeffs)
    with pytest.raises(ValueError):
        a.coeffs[0] = 1.0
