"""Scalar arithmetic, inner products, and matrix plumbing."""

import math
from fractions import Fraction

import numpy as np
import pytest

from zeropat import Field, RepMatrix, Scalar, inner_product
from zeropat.fano import canonical_matrix
from zeropat.scalars import comp_gram, comp_matmul, fast_gram, fast_matmul, realify


def test_field_order_reflects_inclusion_chain():
    assert Field.RATIONAL < Field.REAL < Field.COMPLEX < Field.QUATERNION
    assert not Field.QUATERNION < Field.RATIONAL


def test_quaternion_multiplication_table():
    i = Scalar.quat(0, 1, 0, 0)
    j = Scalar.quat(0, 0, 1, 0)
    k = Scalar.quat(0, 0, 0, 1)
    assert i * j == k
    assert j * i == -k
    assert j * k == i
    assert k * j == -i
    assert k * i == j
    assert i * k == -j
    assert i * i == Scalar.quat(-1)
    assert (i * j) * k == Scalar.quat(-1)


def test_quaternion_associativity_random():
    rng = np.random.default_rng(0)
    for _ in range(50):
        a, b, c = (Scalar.quat(*rng.standard_normal(4)) for _ in range(3))
        lhs, rhs = (a * b) * c, a * (b * c)
        assert all(abs(x - y) < 1e-12 for x, y in zip(lhs.value, rhs.value))


def test_rational_arithmetic_is_exact():
    half = Scalar.rational(1, 2)
    two_thirds = Scalar.rational(2, 3)
    assert half * two_thirds == Scalar.rational(1, 3)
    a = Scalar.rational(10**30 + 1, 3)
    b = Scalar.rational(7, 11)
    assert (a + b) - b == a


def test_conjugation():
    q = Scalar.quat(1, 2, 3, 4)
    assert q.conjugate() == Scalar.quat(1, -2, -3, -4)
    assert q.conjugate().conjugate() == q
    assert Scalar.real(5.0).conjugate() == Scalar.real(5.0)
    assert Scalar.quat(1, 1, 1, 1).magnitude() == pytest.approx(2.0)


def test_magnitude_is_multiplicative():
    rng = np.random.default_rng(1)
    for tag in (Field.REAL, Field.COMPLEX, Field.QUATERNION):
        for _ in range(20):
            n = {Field.REAL: 1, Field.COMPLEX: 2, Field.QUATERNION: 4}[tag]
            mk = lambda: Scalar(tag, rng.standard_normal()) if n == 1 else (
                Scalar.cplx(*rng.standard_normal(2)) if n == 2 else Scalar.quat(*rng.standard_normal(4))
            )
            a, b = mk(), mk()
            assert (a * b).magnitude() == pytest.approx(a.magnitude() * b.magnitude(), abs=1e-12)
    a = Scalar.rational(3, 7)
    b = Scalar.rational(-14, 9)
    assert (a * b).magnitude() == a.magnitude() * b.magnitude()


def test_magnitude_squared_is_self_times_conjugate():
    q = Scalar.quat(0.3, -1.2, 0.5, 2.0)
    prod = q * q.conjugate()
    assert prod.is_real(1e-12)
    assert prod.real_part() == pytest.approx(q.magnitude() ** 2, abs=1e-12)


def test_scalar_tag_mismatch_raises():
    with pytest.raises(ValueError):
        Scalar.real(1.0) * Scalar.cplx(1.0)


def test_inner_product_cube_roots_of_unity():
    w = Scalar.cplx(-0.5, math.sqrt(3) / 2)
    u = [Scalar.cplx(1), Scalar.cplx(1), Scalar.cplx(1)]
    v = [Scalar.cplx(1), w, w * w]
    assert inner_product(u, v).magnitude() < 1e-12


def test_inner_product_of_integer_matrix_column():
    M = canonical_matrix(7)
    col = M.column(0)
    assert inner_product(col, col) == Scalar.rational(4)


def test_inner_product_quaternion_order_matters():
    i = Scalar.quat(0, 1, 0, 0)
    j = Scalar.quat(0, 0, 1, 0)
    assert inner_product([i, j], [j, i]).is_zero()
    # conjugation sits on the left argument
    assert inner_product([i], [j]) == Scalar.quat(0, 0, 0, -1)


def test_inner_product_self_is_real_nonnegative():
    rng = np.random.default_rng(2)
    u = [Scalar.quat(*rng.standard_normal(4)) for _ in range(5)]
    v = [Scalar.quat(*rng.standard_normal(4)) for _ in range(5)]
    s = inner_product(u, u)
    assert s.is_real(1e-12) and s.real_part() >= 0.0
    assert inner_product([Scalar.real(0.0)], [Scalar.real(0.0)]).is_zero()
    lhs = inner_product(u, v)
    rhs = inner_product(v, u).conjugate()
    assert all(abs(x - y) < 1e-12 for x, y in zip(lhs.value, rhs.value))


def test_inner_product_length_mismatch():
    with pytest.raises(ValueError):
        inner_product([Scalar.real(1.0)], [Scalar.real(1.0), Scalar.real(2.0)])


def test_rational_does_not_embed_implicitly():
    r = Scalar.rational(1, 3)
    with pytest.raises(ValueError):
        r * Scalar.real(3.0)
    assert r.to_real().value == pytest.approx(1.0 / 3.0)
    with pytest.raises(ValueError):
        Scalar.real(1.0).to_real()


@pytest.mark.parametrize(
    "s",
    [
        Scalar.rational(-22, 7),
        Scalar.real(1.5),
        Scalar.cplx(0.25, -1.75),
        Scalar.quat(1.0, -2.0, 0.125, 4.0),
    ],
)
def test_scalar_json_round_trip(s):
    assert Scalar.from_json(s.tag, s.to_json()) == s


def test_scalar_json_encoding_shapes():
    assert Scalar.rational(1, 2).to_json() == {"q": "1/2"}
    assert Scalar.real(2.5).to_json() == 2.5
    assert Scalar.cplx(1.0, -1.0).to_json() == [1.0, -1.0]
    assert Scalar.quat(1, 2, 3, 4).to_json() == [1.0, 2.0, 3.0, 4.0]


def test_matrix_json_round_trip():
    m = canonical_matrix(7)
    again = RepMatrix.from_json(m.to_json())
    assert again.tag is Field.RATIONAL
    assert m.max_abs_diff(again) == 0

    q = RepMatrix.from_components(Field.QUATERNION, np.random.default_rng(3).standard_normal((3, 2, 4)))
    back = RepMatrix.from_json(q.to_json())
    assert q.max_abs_diff(back) < 1e-15


def test_quaternion_matmul_matches_component_reference():
    rng = np.random.default_rng(4)
    A = rng.standard_normal((5, 4, 4))
    B = rng.standard_normal((4, 3, 4))
    assert np.allclose(comp_matmul(A, B), fast_matmul(A, B), atol=1e-13)
    assert np.allclose(comp_gram(A), fast_gram(A), atol=1e-13)
    # realify is a homomorphism
    assert np.allclose(realify(A) @ realify(B), realify(comp_matmul(A, B)), atol=1e-12)


def test_gram_of_quaternion_matrix_is_hermitian():
    rng = np.random.default_rng(5)
    A = RepMatrix.from_components(Field.QUATERNION, rng.standard_normal((6, 3, 4)))
    G = A.gram()
    Gt = G.conj_transpose()
    assert G.max_abs_diff(Gt) < 1e-12


def test_cast_chain():
    m = canonical_matrix(7)
    r = m.cast(Field.REAL)
    c = m.cast(Field.COMPLEX)
    h = m.cast(Field.QUATERNION)
    assert r.data[0, 0] == -1.0
    assert c.data[0, 0] == -1.0 + 0j
    assert tuple(h.data[0, 0]) == (-1.0, 0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        h.cast(Field.REAL)
