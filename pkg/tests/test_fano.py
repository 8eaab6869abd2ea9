"""The rigid 7x7 core: pattern, exact matrix, normalization recursion."""

from fractions import Fraction

import numpy as np
import pytest

from zeropat import Field, RepMatrix, Scalar
from zeropat.fano import (
    canonical_matrix,
    column_democracies,
    fano_matrix,
    fano_pattern,
    normalize_to_canonical,
    quadratic_residues,
)

# The canonical 7x7 integer matrix, written out independently of the
# construction code: diagonal -1, +1 where (row - col) mod 7 is in {1, 2, 4}.
M_ROWS = [
    [-1, 0, 0, 1, 0, 1, 1],
    [1, -1, 0, 0, 1, 0, 1],
    [1, 1, -1, 0, 0, 1, 0],
    [0, 1, 1, -1, 0, 0, 1],
    [1, 0, 1, 1, -1, 0, 0],
    [0, 1, 0, 1, 1, -1, 0],
    [0, 0, 1, 0, 1, 1, -1],
]


def test_pattern_matches_integer_matrix_entry_by_entry():
    pat = fano_pattern(7)
    for i in range(7):
        for j in range(7):
            assert pat.stars[i, j] == (M_ROWS[i][j] != 0), (i, j)


def test_pattern_column_supports():
    pat = fano_pattern(7)
    assert pat.column_support(0) == {0, 1, 2, 4}
    assert not pat.stars[3, 0]  # 3 is not a quadratic residue mod 7
    assert fano_pattern(11).column_support(0) == {0, 1, 3, 4, 5, 9}
    assert quadratic_residues(11) == {1, 3, 4, 5, 9}


def test_pattern_row_structure():
    # Diagonal STAR and (p-1)/2 off-diagonal STARs per row; off-diagonal
    # positions (i, j), (j, i) carry exactly one STAR between them.
    for p in (7, 11, 19):
        pat = fano_pattern(p)
        stars = pat.stars
        assert all(stars[i, i] for i in range(p))
        for i in range(p):
            assert int(stars[i].sum()) - 1 == (p - 1) // 2
        for i in range(p):
            for j in range(i + 1, p):
                assert int(stars[i, j]) + int(stars[j, i]) == 1


def test_p3_degenerate_diagonal():
    # k = 1 makes the diagonal value vanish: the pattern is the cyclic shift.
    pat = fano_pattern(3)
    assert pat.to_text() == "00*\n*00\n0*0"
    m = fano_matrix(3)
    assert m.data[1, 0] == Fraction(1)
    assert m.data[0, 0] == Fraction(0)
    assert m.gram().is_identity(0.0)


def test_half_integer_matrix_values():
    half_m = fano_matrix(7)
    for i in range(7):
        for j in range(7):
            assert half_m.data[i, j] == Fraction(M_ROWS[i][j], 2)
    assert canonical_matrix(7).data[0, 0] == Fraction(-1)


@pytest.mark.parametrize("p", [3, 7, 11, 19, 23, 31, 43])
def test_exact_gram_identity(p):
    assert fano_matrix(p).gram().is_identity(0.0)


def test_star_count_per_column():
    for p in (7, 11, 19, 23, 31, 43):
        pat = fano_pattern(p)
        m = fano_matrix(p)
        for j in range(p):
            assert len(pat.column_support(j)) == (p + 1) // 2
            nonzeros = sum(1 for i in range(p) if m.data[i, j] != 0)
            assert nonzeros == (p + 1) // 2


def test_p11_entries_and_norm():
    m = fano_matrix(11)
    assert m.data[0, 0] == Fraction(-2, 3)
    assert m.data[1, 0] == Fraction(1, 3)
    col = [m.data[i, 0] for i in range(11)]
    assert sum(x * x for x in col) == 1


@pytest.mark.parametrize("p", [2, 4, 5, 9, 13, 15])
def test_invalid_primes_rejected(p):
    with pytest.raises(ValueError):
        fano_pattern(p)


def test_large_prime_needs_flag():
    with pytest.raises(ValueError):
        fano_matrix(47)
    assert fano_matrix(47, allow_large=True).gram().is_identity(0.0)


def test_normalize_half_matrix_is_pure_scaling():
    trace = normalize_to_canonical(fano_matrix(7))
    assert all(d == Scalar.rational(2) for d in trace.D_factors)
    assert all(u == Scalar.rational(1) for u in trace.U_factors)
    assert trace.B_final.max_abs_diff(canonical_matrix(7)) == 0
    assert all(x == Scalar.rational(1) for x in trace.x)
    assert all(y == Scalar.rational(1) for y in trace.y)
    assert all(z == Scalar.rational(1) for z in trace.z)
    assert all(X == Scalar.rational(1) for X in trace.X)


def test_normalize_absorbs_unit_quaternion_column_scale():
    half_m = fano_matrix(7).cast(Field.QUATERNION)
    w = Scalar.quat(0.5, 0.5, 0.5, 0.5)  # unit quaternion
    data = half_m.data.copy()
    for i in range(7):
        e = Scalar.quat(*data[i, 3])
        data[i, 3] = (e * w).value
    scaled = RepMatrix(Field.QUATERNION, data)
    trace = normalize_to_canonical(scaled)
    target = canonical_matrix(7).cast(Field.QUATERNION)
    assert trace.B_final.max_abs_diff(target) < 1e-12
    # the absorbed factor shows up in the column-3 diagonal scale
    d3 = trace.D_factors[3]
    expected = (w.conjugate() * Scalar.quat(2.0)).value
    assert all(abs(a - b) < 1e-12 for a, b in zip(d3.value, expected))


def test_normalize_rejects_wrong_pattern():
    half_m = fano_matrix(7)
    rolled = RepMatrix(Field.RATIONAL, np.roll(half_m.data, 1, axis=0))
    with pytest.raises(ValueError):
        normalize_to_canonical(rolled)


def test_normalize_rejects_non_orthogonal():
    half_m = fano_matrix(7).cast(Field.REAL)
    data = half_m.data.copy()
    data[0, 0] += 1e-3
    with pytest.raises(ValueError):
        normalize_to_canonical(RepMatrix(Field.REAL, data), orth_tol=1e-6)


def test_column_democracies_cover_all_columns():
    demos = column_democracies(7)
    assert len(demos) == 7
    pat = fano_pattern(7)
    for j, d in enumerate(demos):
        assert d.column == j
        assert set(d.rows) == pat.column_support(j)
