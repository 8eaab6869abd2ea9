"""Quadratic-residue circulant constructions and their rigidity.

For a prime p = 4k - 1 the p x p matrix with (1-k)/k on the diagonal and 1/k
at positions (i, j) where i - j is a nonzero quadratic residue mod p has
exactly orthonormal columns over the rationals.  For p = 7 this is half of an
integer matrix whose zero-pattern doubles as an incidence structure of the
Fano plane; that pattern is rigid: every matrix with the same zero-pattern
and mutually orthogonal columns reduces to the canonical integer matrix by
diagonal scalings alone.  ``normalize_to_canonical`` performs that reduction
and ``rigidity_probe`` searches for counterexamples at other primes.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import numpy as np

from .patterns import ZeroPattern, Democracy, matches_pattern
from .scalars import Field, RepMatrix, Scalar

# Exact rational Gram checks stay fast up to this prime; pass allow_large to go higher.
DEFAULT_MAX_PRIME = 43

# Two normalized representations within this distance count as the same solution.
# Two decades above the solver residual tolerance, separating genuine distinct
# solutions from optimizer noise.
CLUSTER_TOL = 1e-6


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    f = 2
    while f * f <= n:
        if n % f == 0:
            return False
        f += 1
    return True


def _check_prime(p: int, allow_large: bool):
    if not _is_prime(p) or p % 4 != 3:
        raise ValueError(f"p must be a prime congruent to 3 mod 4, got {p}")
    if p > DEFAULT_MAX_PRIME and not allow_large:
        raise ValueError(f"p={p} exceeds the default cap {DEFAULT_MAX_PRIME}; pass allow_large=True")


def quadratic_residues(p: int) -> set:
    """Nonzero quadratic residues modulo p."""
    return {(x * x) % p for x in range(1, p)}


def fano_pattern(p: int = 7, allow_large: bool = False) -> ZeroPattern:
    """Zero-pattern of fano_matrix(p).

    STAR at (i, j) iff (i - j) mod p is a nonzero quadratic residue, or i = j
    when the diagonal value (1-k)/k is itself nonzero (every p except 3).
    """
    _check_prime(p, allow_large)
    k = (p + 1) // 4
    qr = quadratic_residues(p)
    stars = np.zeros((p, p), dtype=bool)
    for i in range(p):
        for j in range(p):
            d = (i - j) % p
            stars[i, j] = d in qr or (d == 0 and k != 1)
    return ZeroPattern(stars)


def fano_matrix(p: int = 7, allow_large: bool = False) -> RepMatrix:
    """Exact rational p x p matrix with orthonormal columns; k = (p+1)/4."""
    _check_prime(p, allow_large)
    k = (p + 1) // 4
    qr = quadratic_residues(p)
    m = RepMatrix.zeros(Field.RATIONAL, p, p)
    data = m.data.copy()
    for i in range(p):
        for j in range(p):
            d = (i - j) % p
            if d == 0:
                data[i, j] = Fraction(1 - k, k)
            elif d in qr:
                data[i, j] = Fraction(1, k)
    return RepMatrix(Field.RATIONAL, data)


def canonical_matrix(p: int = 7, allow_large: bool = False) -> RepMatrix:
    """Integer form k * fano_matrix(p): diagonal 1-k, residue positions 1.

    This is the fixed point of the normalization recursion; for p = 7 it has
    -1 on the diagonal and +1 at the residue positions.
    """
    k = (p + 1) // 4
    return fano_matrix(p, allow_large).scaled(Scalar.rational(k))


def column_democracies(p: int = 7) -> list:
    """One four-way democracy on the STAR entries of each column (p = 7 only)."""
    if p != 7:
        raise ValueError("column democracies are defined for the 7x7 pattern")
    pat = fano_pattern(7)
    return [Democracy(j, tuple(sorted(pat.column_support(j)))) for j in range(7)]


@dataclass
class NormalizationTrace:
    """Record of the diagonal-scaling recursion B = U A D.

    D_factors are the nontrivial entries of the right diagonal factors
    (one per column, fixing each diagonal entry of B); U_factors are the unit
    scalars of the left factors (one per row from 1 on, fixing each
    subdiagonal entry to be real and positive).  x, y, z collect the cyclic
    off-diagonal entries of B at offsets 1, 2 and 4 below the diagonal, and
    X[i] = 1 / conjugate(x[i]).
    """

    D_factors: list
    U_factors: list
    B_final: RepMatrix
    x: list = dc_field(default_factory=list)
    y: list = dc_field(default_factory=list)
    z: list = dc_field(default_factory=list)
    X: list = dc_field(default_factory=list)


def _scale_column(grid, col, s):
    for row in grid:
        row[col] = row[col] * s


def _scale_row(grid, row, s):
    grid[row] = [s * v for v in grid[row]]


def _unit_phase_inverse(q: Scalar) -> Scalar:
    """conjugate(q) / |q|: the unit scalar u with u * q = |q| real positive."""
    m = q.magnitude()
    if q.tag is Field.RATIONAL:
        inv_m = Scalar.rational(Fraction(1, 1) / m)
    else:
        inv_m = Scalar(q.tag, 1.0 / m) if q.tag is not Field.QUATERNION else Scalar.quat(1.0 / m)
    return q.conjugate() * inv_m


def _real_scalar(tag: Field, value) -> Scalar:
    if tag is Field.RATIONAL:
        return Scalar.rational(Fraction(value))
    if tag is Field.QUATERNION:
        return Scalar.quat(float(value))
    return Scalar(tag, value)


def normalize_to_canonical(
    A: RepMatrix,
    orth_tol: float = 1e-6,
    star_tol: float = 1e-9,
) -> NormalizationTrace:
    """Reduce an orthogonal representation of the 7x7 residue pattern to canonical form.

    Columns are rescaled on the right (D) to pin every diagonal entry to -1
    and rows are rescaled on the left by unit scalars (U) to make each
    subdiagonal entry real and positive, in the interleaved order
    D0, U1, D1, ..., U6, D6.  The whole procedure stays inside the scalar
    system of A.  Rigidity of the pattern means B = U A D always lands on the
    canonical integer matrix; callers compare ``B_final`` against
    ``canonical_matrix(7)`` to exploit or probe that fact.
    """
    return _normalize(A, 7, orth_tol, star_tol, want_trace=True)


def normalize_general(A: RepMatrix, p: int, orth_tol: float = 1e-6) -> RepMatrix:
    """Generalized normalization used by rigidity probing for any supported p.

    Mirrors the p = 7 recursion: diagonal entries are scaled to 1-k, then
    subdiagonal entries are made real and positive.  For p = 3 the diagonal
    is structurally zero and the single STAR per column is scaled to 1
    instead.  This extrapolation beyond p = 7 is one choice among several and
    is used only to compare solver outputs for equality up to scalings.
    """
    return _normalize(A, p, orth_tol, 1e-9, want_trace=True).B_final


def _normalize(A, p, orth_tol, star_tol, want_trace):
    if (A.rows, A.cols) != (p, p):
        raise ValueError(f"expected a {p}x{p} matrix")
    pat = fano_pattern(p, allow_large=True)
    if A.tag is Field.RATIONAL:
        if not matches_pattern(A, pat):
            raise ValueError("matrix does not match the residue pattern")
    else:
        if not matches_pattern(A, pat, zero_tol=star_tol, star_floor=star_tol * 10):
            raise ValueError("matrix does not match the residue pattern")
    gram = A.gram()
    mags = gram.magnitudes()
    off = [mags[i, j] for i in range(p) for j in range(p) if i != j]
    worst = max(off)
    if (worst != 0) if A.tag is Field.RATIONAL else (float(worst) > orth_tol):
        raise ValueError(f"columns are not mutually orthogonal (max off-diagonal {worst})")

    k = (p + 1) // 4
    grid = [[A.entry(i, j) for j in range(A.cols)] for i in range(A.rows)]
    d_factors = []
    u_factors = []

    if k == 1:
        # Degenerate diagonal: each column has its single STAR on the subdiagonal.
        for i in range(p):
            q = grid[(i + 1) % p][i]
            if q.is_zero(star_tol):
                raise ValueError(f"required nonzero entry ({(i + 1) % p}, {i}) is zero")
            d = q.inverse()
            _scale_column(grid, i, d)
            d_factors.append(d)
    else:
        target = _real_scalar(A.tag, 1 - k)
        for i in range(p):
            q = grid[i][i]
            if q.is_zero(star_tol):
                raise ValueError(f"required nonzero entry ({i}, {i}) is zero")
            d = q.inverse() * target
            _scale_column(grid, i, d)
            d_factors.append(d)
            if i + 1 < p:
                q = grid[i + 1][i]
                if q.is_zero(star_tol):
                    raise ValueError(f"required nonzero entry ({i + 1}, {i}) is zero")
                u = _unit_phase_inverse(q)
                _scale_row(grid, i + 1, u)
                u_factors.append(u)

    B = RepMatrix.from_scalars(grid)
    trace = NormalizationTrace(D_factors=d_factors, U_factors=u_factors, B_final=B)
    if want_trace and p == 7:
        trace.x = [grid[(i + 1) % 7][i] for i in range(7)]
        trace.y = [grid[(i + 2) % 7][i] for i in range(7)]
        trace.z = [grid[(i + 4) % 7][i] for i in range(7)]
        trace.X = [s.conjugate().inverse() for s in trace.x]
    return trace


# ---------------------------------------------------------------------------
# Rigidity probing
# ---------------------------------------------------------------------------


@dataclass
class RigidityCluster:
    representative: RepMatrix
    count: int
    distance_to_canonical: float


@dataclass
class RigidityReport:
    p: int
    field: Field
    restarts: int
    clusters: list
    verdict: str  # rigid-so-far | non-rigid | inconclusive
    found: int
    failed: int
    max_democracy_spread: float

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "field": self.field.value,
            "restarts": self.restarts,
            "clusters": [
                {
                    "representative": c.representative.to_json(),
                    "count": c.count,
                    "distance_to_canonical": c.distance_to_canonical,
                }
                for c in self.clusters
            ],
            "verdict": self.verdict,
            "found": self.found,
            "failed": self.failed,
            "max_democracy_spread": self.max_democracy_spread,
        }


def rigidity_probe(
    p: int,
    field: Field,
    restarts: int = 20,
    seed: int = 0,
    jobs: int = 1,
    allow_large: bool = False,
):
    """Search for distinct orthogonal representations of fano_pattern(p).

    Runs the numerical solver once per restart, normalizes every successful
    witness, and clusters the normalized matrices at distance CLUSTER_TOL.
    Verdict: "rigid-so-far" when a single cluster equal to the canonical
    matrix is seen, "non-rigid" otherwise, "inconclusive" when no restart
    converges.  This is numerical evidence, never a proof.
    """
    from .solver import SolveOptions, find_representation

    if field is Field.RATIONAL:
        raise ValueError("rigidity probing runs over REAL, COMPLEX or QUATERNION")
    pattern = fano_pattern(p, allow_large)
    opts = SolveOptions(
        restarts=restarts,
        seed=seed,
        unit_columns=True,
        keep_all=True,
        jobs=jobs,
        stop_after_found=False,
    )
    report = find_representation(pattern, field, opts)

    canon = canonical_matrix(p, allow_large).cast(field)

    clusters = []
    normalized = []
    found = failed = 0
    max_spread = 0.0
    for item in report.restart_results:
        if not item.found:
            failed += 1
            continue
        found += 1
        w = item.witness
        b = normalize_general(w, p)
        normalized.append(b)
        mags = w.magnitudes()
        for j in range(p):
            col = [float(mags[i, j]) for i in sorted(pattern.column_support(j))]
            max_spread = max(max_spread, max(col) - min(col))
        for c in clusters:
            if b.max_abs_diff(c.representative) <= CLUSTER_TOL:
                c.count += 1
                break
        else:
            clusters.append(
                RigidityCluster(
                    representative=b,
                    count=1,
                    distance_to_canonical=b.max_abs_diff(canon),
                )
            )

    if found == 0:
        verdict = "inconclusive"
    elif len(clusters) == 1 and clusters[0].distance_to_canonical <= CLUSTER_TOL:
        verdict = "rigid-so-far"
    else:
        verdict = "non-rigid"
    return RigidityReport(
        p=p,
        field=field,
        restarts=restarts,
        clusters=clusters,
        verdict=verdict,
        found=found,
        failed=failed,
        max_democracy_spread=max_spread,
    ), report
