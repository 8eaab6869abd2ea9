"""Zero-patterns, four-way democracies, and pattern/matrix conformance.

A zero-pattern is a rectangular grid over {ZERO, STAR}; STAR marks an entry
that must be nonzero in any matrix realizing the pattern.  A democracy names
four STAR positions within one column whose magnitudes must agree.  Patterns
are immutable after construction.

Text format (bit-exact): one line per row made of the characters '0' and '*',
followed by zero or more lines ``D <col> <r1> <r2> <r3> <r4>`` declaring
democracies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scalars import Field, RepMatrix, Scalar

# Default thresholds for floating pattern verdicts.  The solver keeps STAR
# entries at or above DEFAULT_STAR_FLOOR, leaving a four-decade gap.
DEFAULT_ZERO_TOL = 1e-7
DEFAULT_STAR_FLOOR = 1e-3


class ZeroPattern:
    """A rows x cols grid over {ZERO, STAR}, stored as a boolean array."""

    def __init__(self, stars: np.ndarray):
        stars = np.asarray(stars, dtype=bool)
        if stars.ndim != 2 or stars.shape[0] == 0 or stars.shape[1] == 0:
            raise ValueError("pattern must be a non-empty 2-d grid")
        stars = stars.copy()
        stars.setflags(write=False)
        self.stars = stars

    @property
    def rows(self) -> int:
        return self.stars.shape[0]

    @property
    def cols(self) -> int:
        return self.stars.shape[1]

    def star_count(self) -> int:
        return int(self.stars.sum())

    def column_support(self, j: int) -> set:
        if not 0 <= j < self.cols:
            raise ValueError(f"column {j} out of range")
        return set(np.nonzero(self.stars[:, j])[0].tolist())

    def transpose(self) -> "ZeroPattern":
        return ZeroPattern(self.stars.T)

    def to_text(self) -> str:
        return "\n".join("".join("*" if x else "0" for x in row) for row in self.stars)

    @staticmethod
    def from_text(text: str) -> "ZeroPattern":
        return parse_pattern(text).pattern

    def __eq__(self, other):
        return (
            isinstance(other, ZeroPattern)
            and self.stars.shape == other.stars.shape
            and bool(np.all(self.stars == other.stars))
        )

    def __repr__(self):
        return f"ZeroPattern({self.rows}x{self.cols}, {self.star_count()} stars)"


@dataclass(frozen=True)
class Democracy:
    """Four STAR positions in one column required to share a magnitude."""

    column: int
    rows: tuple

    def __post_init__(self):
        rows = tuple(sorted(int(r) for r in self.rows))
        if len(rows) != 4 or len(set(rows)) != 4:
            raise ValueError("a democracy names exactly 4 distinct rows")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "column", int(self.column))

    def validate(self, pattern: ZeroPattern):
        if not 0 <= self.column < pattern.cols:
            raise ValueError(f"democracy column {self.column} out of range")
        for r in self.rows:
            if not 0 <= r < pattern.rows:
                raise ValueError(f"democracy row {r} out of range")
            if not pattern.stars[r, self.column]:
                raise ValueError(f"democracy names ZERO position ({r}, {self.column})")


class ConstrainedZeroPattern:
    """A zero-pattern plus a list of democracies (declaration order kept)."""

    def __init__(self, pattern: ZeroPattern, democracies=()):
        self.pattern = pattern
        self.democracies = tuple(democracies)
        for d in self.democracies:
            d.validate(pattern)

    @property
    def rows(self) -> int:
        return self.pattern.rows

    @property
    def cols(self) -> int:
        return self.pattern.cols

    def __eq__(self, other):
        return (
            isinstance(other, ConstrainedZeroPattern)
            and self.pattern == other.pattern
            and self.democracies == other.democracies
        )

    def __repr__(self):
        return f"ConstrainedZeroPattern({self.rows}x{self.cols}, {len(self.democracies)} democracies)"


def parse_pattern(text: str) -> ConstrainedZeroPattern:
    """Parse the pattern text format; inverse of serialize_pattern."""
    lines = text.splitlines()
    grid_lines = []
    demo_lines = []
    for ln in lines:
        if ln.startswith("D ") or ln == "D":
            demo_lines.append(ln)
        elif demo_lines:
            raise ValueError("grid rows may not follow democracy lines")
        else:
            grid_lines.append(ln)
    if grid_lines and grid_lines[-1] == "":
        grid_lines.pop()
    if not grid_lines:
        raise ValueError("empty pattern")
    width = len(grid_lines[0])
    rows = []
    for ln in grid_lines:
        if len(ln) != width or width == 0:
            raise ValueError("ragged or empty pattern rows")
        row = []
        for ch in ln:
            if ch == "*":
                row.append(True)
            elif ch == "0":
                row.append(False)
            else:
                raise ValueError(f"invalid pattern character {ch!r}")
        rows.append(row)
    pattern = ZeroPattern(np.array(rows, dtype=bool))
    demos = []
    for ln in demo_lines:
        parts = ln.split()
        if len(parts) != 6:
            raise ValueError(f"malformed democracy line {ln!r}")
        try:
            nums = [int(p) for p in parts[1:]]
        except ValueError as exc:
            raise ValueError(f"malformed democracy line {ln!r}") from exc
        demos.append(Democracy(nums[0], tuple(nums[1:])))
    return ConstrainedZeroPattern(pattern, demos)


def serialize_pattern(cp: ConstrainedZeroPattern) -> str:
    out = [cp.pattern.to_text()]
    for d in cp.democracies:
        out.append("D {} {} {} {} {}".format(d.column, *d.rows))
    return "\n".join(out)


def mutual_support(p: ZeroPattern, a: int, b: int) -> set:
    """Rows where columns a and b are both STAR."""
    if a == b:
        raise ValueError("mutual support needs two distinct columns")
    return p.column_support(a) & p.column_support(b)


def matches_pattern(
    A: RepMatrix,
    p: ZeroPattern,
    zero_tol: float = DEFAULT_ZERO_TOL,
    star_floor: float = DEFAULT_STAR_FLOOR,
) -> bool:
    """Saturation check: ZERO entries at most zero_tol, STAR entries at least star_floor.

    For RATIONAL matrices the test is exact: ZERO positions must vanish and
    STAR positions must be nonzero (zero_tol is treated as 0).
    """
    if (A.rows, A.cols) != (p.rows, p.cols):
        raise ValueError("matrix/pattern dimension mismatch")
    if A.tag is Field.RATIONAL:
        for i in range(A.rows):
            for j in range(A.cols):
                v = A.data[i, j]
                if p.stars[i, j]:
                    if v == 0:
                        return False
                elif v != 0:
                    return False
        return True
    if not 0 <= zero_tol < star_floor:
        raise ValueError("need 0 <= zero_tol < star_floor")
    mags = A.magnitudes()
    stars = p.stars
    if np.any(mags[stars] < star_floor):
        return False
    if np.any(mags[~stars] > zero_tol):
        return False
    return True


def democracy_spread(A: RepMatrix, d: Democracy):
    """Largest pairwise difference among the four democracy magnitudes."""
    mags = [A.entry(r, d.column).magnitude() for r in d.rows]
    return max(mags) - min(mags)


def democracy_satisfied(A: RepMatrix, d: Democracy, mag_tol: float = 1e-6) -> bool:
    """True when the democracy's four magnitudes agree within mag_tol.

    Exact equality is required for RATIONAL matrices.
    """
    spread = democracy_spread(A, d)
    if A.tag is Field.RATIONAL:
        return spread == 0
    return float(spread) <= mag_tol


def bipartite_double(p: ZeroPattern) -> ZeroPattern:
    """Block pattern [[0, P], [P^T, 0]] of a square pattern P."""
    if p.rows != p.cols:
        raise ValueError("bipartite doubling needs a square pattern")
    n = p.rows
    out = np.zeros((2 * n, 2 * n), dtype=bool)
    out[:n, n:] = p.stars
    out[n:, :n] = p.stars.T
    return ZeroPattern(out)


def hermitian_double(U: RepMatrix, tol: float = 1e-9) -> RepMatrix:
    """Block matrix [[0, U], [U^dagger, 0]] of a square matrix with orthonormal columns.

    The result H is Hermitian and squares to the identity, hence is unitary;
    its zero-pattern is the bipartite double of U's pattern.
    """
    if U.rows != U.cols:
        raise ValueError("hermitian doubling needs a square matrix")
    gram = U.gram()
    if not gram.is_identity(tol):
        raise ValueError("input columns are not orthonormal within tolerance")
    n = U.rows
    H = RepMatrix.zeros(U.tag, 2 * n, 2 * n)
    data = H.data.copy()
    Ud = U.conj_transpose()
    if U.tag is Field.QUATERNION:
        data[:n, n:, :] = U.data
        data[n:, :n, :] = Ud.data
    else:
        data[:n, n:] = U.data
        data[n:, :n] = Ud.data
    return RepMatrix(U.tag, data)


def pattern_of_matrix(
    A: RepMatrix,
    zero_tol: float = DEFAULT_ZERO_TOL,
    star_floor: float = DEFAULT_STAR_FLOOR,
) -> ZeroPattern:
    """Read the zero-pattern off a matrix.

    Raises if any entry magnitude falls in the ambiguous gap
    (zero_tol, star_floor); the pattern would not be well-defined there.
    For RATIONAL matrices the reading is exact.
    """
    if A.tag is Field.RATIONAL:
        stars = np.array(
            [[A.data[i, j] != 0 for j in range(A.cols)] for i in range(A.rows)], dtype=bool
        )
        return ZeroPattern(stars)
    mags = A.magnitudes()
    in_gap = (mags > zero_tol) & (mags < star_floor)
    if np.any(in_gap):
        i, j = map(int, np.argwhere(in_gap)[0])
        raise ValueError(f"entry ({i}, {j}) has ambiguous magnitude {mags[i, j]:.3e}")
    return ZeroPattern(mags >= star_floor)
