import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qpoker.algebra import (AlgebraDomainError, Octonion, Quaternion, QUAT_I, QUAT_J, QUAT_K,
                            QUAT_ONE, fano_table, oct_conj_norm_inv, oct_mul, oct_mul_batch,
                            quat_conj_norm_inv, quat_mul, quat_mul_batch, quat_to_su2,
                            quats_to_su2, sample_unit, sample_units, su2_to_quat)

coef = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
quats = st.builds(Quaternion, coef, coef, coef, coef)
octs = st.lists(coef, min_size=8, max_size=8).map(lambda c: Octonion(tuple(c)))


def close(x, y, tol=1e-9):
    return np.allclose(np.asarray(x), np.asarray(y), atol=tol)


def test_hamilton_relations():
    assert QUAT_I * QUAT_J == QUAT_K
    assert QUAT_J * QUAT_K == QUAT_I
    assert QUAT_K * QUAT_I == QUAT_J
    for u in (QUAT_I, QUAT_J, QUAT_K):
        assert u * u == -QUAT_ONE
    assert QUAT_I * QUAT_J * QUAT_K == -QUAT_ONE


def test_polynomial_expansion():
    assert (QUAT_ONE + QUAT_I) * (QUAT_ONE + QUAT_J) == Quaternion(1, 1, 1, 1)


@given(quats)
def test_identity_is_neutral(q):
    assert QUAT_ONE * q == q == q * QUAT_ONE


def test_conj_norm_inverse_examples():
    assert quat_conj_norm_inv(QUAT_ONE) == (QUAT_ONE, 1.0, QUAT_ONE)
    conj, norm, inv = quat_conj_norm_inv(QUAT_I)
    assert conj == -QUAT_I and norm == 1 and inv == -QUAT_I
    two = Quaternion(Fraction(2), 0, 0, 0)
    assert two.inverse() == Quaternion(Fraction(1, 2), 0, 0, 0)
    assert two * two.inverse() == QUAT_ONE


def test_zero_inverse_raises():
    with pytest.raises(AlgebraDomainError):
        Quaternion().inverse()
    with pytest.raises(AlgebraDomainError):
        Octonion().inverse()


@given(quats, quats)
def test_quaternion_norm_multiplicative(p, q):
    assert abs((p * q).norm() - p.norm() * q.norm()) <= 1e-9 * max(1.0, p.norm() * q.norm())


@given(quats, quats, quats)
def test_quaternion_associative(p, q, r):
    assert close(((p * q) * r).as_array(), (p * (q * r)).as_array(), 1e-8)


@given(quats, quats)
def test_quaternion_conj_reverses_products(p, q):
    assert close((p * q).conj().as_array(), (q.conj() * p.conj()).as_array())


@given(quats.filter(lambda q: q.norm2() > 1e-3))
def test_quaternion_inverse(q):
    assert (q * q.inverse()).isclose(QUAT_ONE, 1e-9)


def test_exact_rational_arithmetic():
    p = Quaternion(Fraction(1, 2), Fraction(1, 2), Fraction(1, 2), Fraction(1, 2))
    assert p.norm2() == 1
    assert p * p.conj() == Quaternion(Fraction(1), Fraction(0), Fraction(0), Fraction(0))


def test_batch_product_matches_scalar():
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=(50, 4)), rng.normal(size=(50, 4))
    ref = np.array([quat_mul(Quaternion.from_array(x), Quaternion.from_array(y)).as_array()
                    for x, y in zip(a, b)])
    assert close(quat_mul_batch(a, b), ref, 1e-12)


# --- octonions ------------------------------------------------------------

def unit(k):
    return Octonion.unit(k)


def test_octonion_units_square_to_minus_one_and_anticommute():
    for j in range(1, 8):
        assert unit(j) * unit(j) == -unit(0)
    for j, k in itertools.permutations(range(1, 8), 2):
        assert unit(j) * unit(k) == -(unit(k) * unit(j))


def test_octonions_are_not_associative():
    lhs = (unit(1) * unit(2)) * unit(4)
    rhs = unit(1) * (unit(2) * unit(4))
    assert lhs == -rhs


def test_octonion_conj_norm_inverse_examples():
    one = unit(0)
    assert oct_conj_norm_inv(one) == (one, 1.0, one)
    conj, norm, inv = oct_conj_norm_inv(unit(5))
    assert conj == -unit(5) and norm == 1 and inv == -unit(5)
    o = unit(0) + unit(1)
    conj, norm, inv = oct_conj_norm_inv(o)
    assert abs(norm - np.sqrt(2)) < 1e-15
    assert inv.isclose((unit(0) - unit(1)) / 2)
    assert (o * inv).isclose(one)


@given(octs, octs)
def test_octonion_norm_multiplicative(x, y):
    assert abs((x * y).norm() - x.norm() * y.norm()) <= 1e-9 * max(1.0, x.norm() * y.norm())


@given(octs, octs)
def test_octonion_alternative(p, q):
    assert close((p * (p * q)).as_array(), ((p * p) * q).as_array(), 1e-7)
    assert close(((q * p) * p).as_array(), (q * (p * p)).as_array(), 1e-7)


@given(octs, octs)
def test_octonion_conj_reverses_products(p, q):
    assert close((p * q).conj().as_array(), (q.conj() * p.conj()).as_array(), 1e-8)


def test_octonion_batch_product_matches_scalar():
    rng = np.random.default_rng(1)
    a, b = rng.normal(size=(40, 8)), rng.normal(size=(40, 8))
    ref = np.array([oct_mul(Octonion(tuple(x)), Octonion(tuple(y))).as_array()
                    for x, y in zip(a, b)])
    assert close(oct_mul_batch(a, b), ref, 1e-12)


def test_fano_table():
    table = fano_table()
    assert len(table) == 7
    pairs = []
    for j, k, l in table:
        assert unit(j) * unit(k) == unit(l)
        assert unit(k) * unit(j) == -unit(l)
        pairs += [frozenset(p) for p in itertools.combinations((j, k, l), 2)]
    assert len(pairs) == 21 and len(set(pairs)) == 21


def test_left_multiplication_is_a_regular_signed_permutation():
    for src in range(8):
        targets = []
        for u in range(8):
            prod = (unit(u) * unit(src)).coeffs
            nz = [n for n, x in enumerate(prod) if x != 0]
            assert len(nz) == 1 and abs(prod[nz[0]]) == 1
            targets.append(nz[0])
        assert sorted(targets) == list(range(8))


# --- sampling and SU(2) ---------------------------------------------------

@pytest.mark.parametrize("dim", [4, 8])
def test_sample_units_statistics(dim):
    x = sample_units(dim, 100_000, np.random.default_rng(42))
    assert np.allclose(np.linalg.norm(x, axis=1), 1, atol=1e-12)
    sigma = 1 / np.sqrt(dim * 100_000)
    assert np.all(np.abs(x.mean(axis=0)) < 4 * sigma)
    sq = x[:, 0] ** 2
    assert abs(sq.mean() - 1 / dim) < 4 * sq.std() / np.sqrt(len(sq))


def test_sampling_is_deterministic_per_seed():
    a = sample_units(4, 10, np.random.default_rng(5))
    b = sample_units(4, 10, np.random.default_rng(5))
    assert np.array_equal(a, b)
    assert isinstance(sample_unit(8, np.random.default_rng(0)), Octonion)
    with pytest.raises(ValueError):
        sample_units(3, 1, np.random.default_rng(0))


def test_su2_images():
    assert close(quat_to_su2(QUAT_ONE), np.eye(2), 1e-15)
    for u in (QUAT_I, QUAT_J, QUAT_K):
        m = quat_to_su2(u)
        assert abs(np.trace(m)) < 1e-15
        assert close(m @ m.conj().T, np.eye(2), 1e-15)
        assert abs(np.linalg.det(m) - 1) < 1e-15


def test_su2_homomorphism_and_roundtrip():
    rng = np.random.default_rng(3)
    for _ in range(100):
        p, q = sample_unit(4, rng), sample_unit(4, rng)
        assert close(quat_to_su2(p) @ quat_to_su2(q), quat_to_su2(p * q), 1e-12)
        assert su2_to_quat(quat_to_su2(p)).isclose(p)


def test_su2_rejects_non_units():
    with pytest.raises(AlgebraDomainError):
        quat_to_su2(Quaternion(2, 0, 0, 0))
    with pytest.raises(AlgebraDomainError):
        su2_to_quat(np.diag([1, 2]))
    assert quats_to_su2(np.zeros((3, 4))).shape == (3, 2, 2)
