import json

import numpy as np
import pytest

from nctwist import models
from nctwist.models import DocumentError
from nctwist.triple import verify_axioms


def test_toy_representation_blocks():
    alg = models.toy_algebra()
    M = np.array([[1, 2], [3, 4]], dtype=complex)
    pi = alg.embed(alg.element(5, 7, M))
    assert np.allclose(pi[:4, :4], np.diag([5, 5, 7, 7]))
    assert np.allclose(pi[4:, 4:], np.kron(np.eye(2), M))
    assert np.allclose(pi[:4, 4:], 0) and np.allclose(pi[4:, :4], 0)


def test_toy_J():
    J = models.toy_J()
    e1 = np.zeros(8)
    e1[0] = 1
    assert np.allclose(J.mat @ e1, np.eye(8)[4])
    assert np.allclose(J.mat @ np.conj(J.mat), np.eye(8))


def test_toy_dirac_selfadjoint_and_decompositions():
    p = models.ToyParams(1.0, 1.0)
    D = models.toy_dirac(p)
    assert np.allclose(D, D.conj().T)
    for name, k in (("whole", 1), ("2twist", 2), ("3twist", 3)):
        comps = models.toy_decomposition(p, name)
        assert len(comps) == k and np.allclose(sum(comps), D)
    d1, d2, d3 = models.toy_decomposition(p, "3twist")
    J = models.toy_J().mat
    assert np.allclose(J @ np.conj(d2) @ J, d3)
    with pytest.raises(ValueError):
        models.toy_decomposition(p, "4twist")


def test_toy_ky0_passes():
    assert verify_axioms(models.build_toy(models.ToyParams(1.0, 0.0))).passed


def test_toy_param_validation():
    with pytest.raises(ValueError):
        models.ToyParams(float("nan"), 1.0)
    with pytest.raises(ValueError):
        models.toy_diagonal_twist(0, 1)
    with pytest.raises(ValueError):
        models.build_toy(models.ToyParams(), twists=[np.eye(8)], decomposition="2twist")


@pytest.mark.parametrize("g,n", [(1, 32), (3, 96)])
def test_sm_dimension(g, n):
    p = models.SMParams(generations=g, k_nu=0.1 * np.eye(g), k_e=0.2 * np.eye(g), k_u=0.3 * np.eye(g),
                        k_d=0.4 * np.eye(g), k_nuR=np.eye(g))
    t = models.build_sm_finite(p)
    assert t.n == n


def test_sm_algebra_satisfies_first_order():
    rep = verify_axioms(models.build_sm_finite(models.SMParams(), algebra="A_SM"))
    assert rep.ok("0C") and rep.ok("1C") and rep.passed


def test_lr_algebra_fails_first_order(lr):
    rep = verify_axioms(lr)
    assert rep.ok("0C") and not rep.ok("1C")


def test_lr_first_order_needs_unified_yukawas_and_no_majorana():
    unified = dict(k_nu=0.3, k_u=0.3, k_e=0.4, k_d=0.4)
    assert verify_axioms(models.build_sm_finite(models.SMParams(k_nuR=0.0, **unified), algebra="A_LR")).ok("1C")
    assert not verify_axioms(models.build_sm_finite(models.SMParams(**unified), algebra="A_LR")).ok("1C")
    assert not verify_axioms(models.build_sm_finite(models.SMParams(k_nuR=0.0), algebra="A_LR")).ok("1C")


def test_sm_params_validation():
    with pytest.raises(ValueError):
        models.SMParams(generations=2)
    with pytest.raises(ValueError):
        models.SMParams(generations=3, k_nu=np.eye(2))
    assert models.SMParams(k_nu=0.3, k_e=0.4).quark_lepton_unified


def test_roundtrip_bitwise(toy1):
    back = models.loads(models.dumps(toy1))
    assert np.array_equal(back.D.mat, toy1.D.mat)
    assert np.array_equal(back.J.mat, toy1.J.mat)
    assert np.array_equal(back.alg.rep_basis, toy1.alg.rep_basis)
    assert back.metadata == json.loads(json.dumps(toy1.metadata))


def test_roundtrip_multitwist_gamma():
    t = models.build_toy(models.ToyParams(1.0, 1.0), decomposition="3twist", gamma=models.toy_gamma())
    back = models.deserialize(models.serialize(t))
    assert len(back.twists) == 3
    assert np.array_equal(back.gamma.mat, t.gamma.mat)
    for a, b in zip(back.twists, t.twists):
        assert np.array_equal(a.D.mat, b.D.mat) and np.array_equal(a.nu.mat, b.nu.mat)


def test_non_selfadjoint_document_rejected(toy0):
    doc = models.serialize(toy0)
    doc["D"][0][2] = [5.0, 0.0]
    doc["twists"][0]["D_l"][0][2] = [5.0, 0.0]
    with pytest.raises(DocumentError, match="^D: .*self-adjoint"):
        models.deserialize(doc)


def test_document_errors_name_the_field(toy0):
    doc = models.serialize(toy0)
    doc["twists"][0]["nu_l"][0][0] = ["x", 0]
    with pytest.raises(DocumentError, match="twists/0/nu_l"):
        models.deserialize(doc)
    with pytest.raises(DocumentError, match="line 1"):
        models.loads("{")
    with pytest.raises(DocumentError, match="schema"):
        models.deserialize({"schema": "other"})
    with pytest.raises(DocumentError):
        models.deserialize([])


def test_shipped_fixture_matches_builder():
    t = models.load_fixture("toy_ky1")
    ref = models.build_toy(models.ToyParams(1.0, 1.0))
    assert np.array_equal(t.D.mat, ref.D.mat)
    assert np.array_equal(t.alg.rep_basis, ref.alg.rep_basis)
    assert t.is_trivially_twisted


def test_fixture_names():
    names = models.fixture_names()
    for n in ("toy_ky1", "toy_ky0", "toy_spectrum_gap", "lr_one_generation"):
        assert n in names
