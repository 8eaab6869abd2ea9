"""Seed patterns, witnesses, exact obstructions, and the separation pipeline.

Each consecutive pair of scalar systems (RAT, REAL), (REAL, COMPLEX),
(COMPLEX, QUAT) is separated by a small constrained pattern that has a
constrained orthogonal representation over the upper system but provably none
over the lower one.  The gadget expansion compiles the magnitude constraints
into a pure zero-pattern, the solver completes the seed witness, and a square
unitary completion yields a pattern realizable over the upper system only.

The impossibility side never trusts the optimizer: it is carried by three
exact, tolerance-free records (sign enumeration over the reals, a finite
cube-root case analysis over the complexes in exact cyclotomic arithmetic,
and an integer square-root check for the rationals).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .gadget import FixupMode, GadgetExpansion, GadgetPolicy, completion_warm_start, expand
from .patterns import (
    ConstrainedZeroPattern,
    Democracy,
    ZeroPattern,
    democracy_spread,
    parse_pattern,
    pattern_of_matrix,
)
from .scalars import Field, RepMatrix, Scalar
from .solver import (
    DEMOCRACY_TOL,
    SolveOptions,
    complete_to_square,
    find_representation,
    verify_witness,
)

# Square dimensions the construction is reported against.
TARGET_DIMENSIONS = {Field.REAL: 35, Field.COMPLEX: 47, Field.QUATERNION: 141}

# Barrier floor for completion solves (seed witness frozen, norms free).
# Entries of the free structure settle at roughly twice this, so unit-scaling
# the finished columns keeps every entry far above the pattern verdict gap.
COMPLETION_STAR_FLOOR = 0.05

_SEED_TEXT = {
    Field.REAL: "*\n*\n*\n*\n*\nD 0 0 1 2 3\nD 0 1 2 3 4",
    Field.COMPLEX: "**\n**\n**\n*0\n0*\nD 0 0 1 2 3\nD 1 0 1 2 4",
    Field.QUATERNION: "****\n****\n****\n*00*\n0**0\n00**\nD 0 0 1 2 3\nD 1 0 1 2 4\nD 2 0 1 2 5",
}

SQRT3_HALF = math.sqrt(3.0) / 2.0


class PipelineError(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


def lower_field(upper: Field) -> Field:
    chain = [Field.RATIONAL, Field.REAL, Field.COMPLEX, Field.QUATERNION]
    idx = chain.index(upper)
    if idx == 0:
        raise ValueError("no scalar system below the rationals")
    return chain[idx - 1]


def seed_pattern(upper_field: Field) -> ConstrainedZeroPattern:
    """The constrained seed pattern separating upper_field from the one below."""
    if upper_field not in _SEED_TEXT:
        raise ValueError("seed patterns exist for REAL, COMPLEX and QUATERNION")
    return parse_pattern(_SEED_TEXT[upper_field])


def seed_witness(upper_field: Field, seed: int = 0) -> RepMatrix:
    """A constrained orthogonal representation of the seed over upper_field.

    REAL and COMPLEX witnesses are written down directly.  The quaternion
    witness pins the two cube roots a = -1/2 + (sqrt(3)/2) i and
    b = -1/2 + (sqrt(3)/2) j (third roots of unity along different imaginary
    axes) in columns 1 and 2 and completes the remaining entries numerically;
    the pinned roots make the result reproducible.
    """
    if upper_field is Field.REAL:
        return RepMatrix(Field.REAL, np.ones((5, 1)))
    if upper_field is Field.COMPLEX:
        w = complex(-0.5, SQRT3_HALF)
        data = np.array(
            [
                [1.0, 1.0],
                [1.0, w],
                [1.0, w.conjugate()],
                [1.0, 0.0],
                [0.0, 1.0],
            ],
            dtype=complex,
        )
        return RepMatrix(Field.COMPLEX, data)
    if upper_field is not Field.QUATERNION:
        raise ValueError("seed witnesses exist for REAL, COMPLEX and QUATERNION")

    cp = seed_pattern(Field.QUATERNION)
    one = Scalar.quat(1.0)
    a = Scalar.quat(-0.5, SQRT3_HALF, 0.0, 0.0)
    b = Scalar.quat(-0.5, 0.0, SQRT3_HALF, 0.0)
    frozen = {
        (0, 0): one, (1, 0): one, (2, 0): one, (3, 0): one,
        (0, 1): one, (1, 1): a, (2, 1): a * a, (4, 1): one,
        (0, 2): one, (1, 2): b, (2, 2): b * b,
    }
    opts = SolveOptions(
        restarts=16,
        seed=seed,
        unit_columns=False,
        frozen=frozen,
        democracies=cp.democracies,
        star_floor=0.05,  # known completions have entries well above this
    )
    report = find_representation(cp.pattern, Field.QUATERNION, opts)
    if not report.found:
        raise PipelineError("seed", "quaternion seed completion did not converge; likely a bug")
    return report.witness


# ---------------------------------------------------------------------------
# Exact obstruction records
# ---------------------------------------------------------------------------


def check_real_obstruction() -> dict:
    """Three reals of equal magnitude never sum to zero: full sign table.

    Exhaustive over the 8 sign patterns at unit magnitude; the minimum
    absolute sum is 1, not 0.  This is what makes the two-column complex seed
    unrealizable over the reals: orthogonality of its columns demands three
    equal-magnitude reals with vanishing sum.
    """
    cases = []
    best = None
    for s0 in (1, -1):
        for s1 in (1, -1):
            for s2 in (1, -1):
                total = s0 + s1 + s2
                cases.append({"signs": [s0, s1, s2], "sum": total, "abs_sum": abs(total)})
                best = abs(total) if best is None else min(best, abs(total))
    return {
        "kind": "real-sign-enumeration",
        "cases": cases,
        "min_abs_sum": best,
        "conclusion": "three equal-magnitude reals cannot sum to zero",
        "verdict": "impossible over REAL",
    }


def rational_magnitude_note(n_entries: int) -> dict:
    """Unit column with n equal-magnitude nonzero entries: magnitude 1/sqrt(n).

    The common magnitude is rational iff n is a perfect square; the check is
    exact integer arithmetic.  n = 5 is the case the real seed produces.
    """
    if n_entries <= 0:
        raise ValueError("need a positive entry count")
    root = math.isqrt(n_entries)
    is_square = root * root == n_entries
    record = {
        "kind": "rational-magnitude",
        "n_entries": n_entries,
        "magnitude_squared": str(Fraction(1, n_entries)),
        "is_perfect_square": is_square,
    }
    if is_square:
        record["magnitude"] = str(Fraction(1, root))
        record["verdict"] = "rational"
    else:
        record["magnitude"] = f"1/sqrt({n_entries})"
        record["verdict"] = "impossible over RAT"
    return record


class _Cyclo:
    """Exact arithmetic in Q(w), w a primitive cube root of unity (w^2 = -1 - w)."""

    __slots__ = ("a", "b")

    def __init__(self, a, b=0):
        self.a = Fraction(a)
        self.b = Fraction(b)

    def __add__(self, other):
        return _Cyclo(self.a + other.a, self.b + other.b)

    def __mul__(self, other):
        a1, b1, a2, b2 = self.a, self.b, other.a, other.b
        return _Cyclo(a1 * a2 - b1 * b2, a1 * b2 + b1 * a2 - b1 * b2)

    def conj(self):
        return _Cyclo(self.a - self.b, -self.b)

    def is_zero(self):
        return self.a == 0 and self.b == 0

    def __eq__(self, other):
        return self.a == other.a and self.b == other.b

    def __str__(self):
        return f"{self.a} + {self.b} w"


def check_complex_obstruction() -> dict:
    """No complex constrained representation of the quaternion seed: 4-branch analysis.

    Over the complexes, three equal-magnitude numbers sum to zero in exactly
    two ways (consecutive ratios w or w^2, the non-real cube roots of unity).
    On the first three rows, orthogonality of columns 1 and 2 to column 0
    therefore leaves a binary choice each.  Equal choices make the truncated
    columns parallel, forcing the product of the required-nonzero entries at
    (5, 2) and (5, 3) to vanish; different choices make them orthogonal,
    forcing the same at (4, 1) and (4, 2).  Every branch is contradictory.
    All arithmetic is exact in Q(w).
    """
    one = _Cyclo(1)
    w = _Cyclo(0, 1)
    w2 = w * w
    roots = {"w": w, "w2": w2}
    branches = []
    for name_a, wa in roots.items():
        for name_b, wb in roots.items():
            v1 = [one, wa, wa * wa]
            v2 = [one, wb, wb * wb]
            inner = _Cyclo(0)
            for p, q in zip(v1, v2):
                inner = inner + p.conj() * q
            parallel = all(p == q for p, q in zip(v1, v2))
            branch = {
                "choice": [name_a, name_b],
                "truncated_inner_product": str(inner),
                "classification": "parallel" if parallel else "orthogonal",
            }
            if parallel:
                # col1 _|_ col3 pins <v1, v3> = 0 on the first three rows, and
                # col2 = lambda * col1 there, so col2 _|_ col3 collapses to the
                # (5,2)*(5,3) term, which the pattern requires to be nonzero.
                branch["contradiction"] = {
                    "forced_zero_product": [[5, 2], [5, 3]],
                    "reason": "truncated columns 1, 2 parallel; their remaining overlap with column 3 must vanish",
                }
            else:
                if not inner.is_zero():
                    raise AssertionError("case analysis out of sync")
                # col1 _|_ col2 collapses to the (4,1)*(4,2) term.
                branch["contradiction"] = {
                    "forced_zero_product": [[4, 1], [4, 2]],
                    "reason": "truncated columns 1, 2 orthogonal; their only remaining overlap must vanish",
                }
            branches.append(branch)
    return {
        "kind": "complex-cube-root-branches",
        "branches": branches,
        "all_contradictory": all("contradiction" in b for b in branches),
        "verdict": "impossible over COMPLEX",
    }


def obstruction_for(lower: Field) -> dict:
    if lower is Field.RATIONAL:
        return rational_magnitude_note(5)
    if lower is Field.REAL:
        return check_real_obstruction()
    if lower is Field.COMPLEX:
        return check_complex_obstruction()
    raise ValueError("no obstruction record above the quaternions")


# ---------------------------------------------------------------------------
# End-to-end pipeline
# ---------------------------------------------------------------------------


@dataclass
class SeparationCase:
    lower_field: Field
    upper_field: Field
    seed: ConstrainedZeroPattern
    expansion: GadgetExpansion
    square_pattern: ZeroPattern
    witness: RepMatrix
    obstruction: dict
    target_n: int
    achieved_n: int
    completion_residual: float
    unitarity_error: float
    seed_democracy_spread: float
    policy: GadgetPolicy

    def report(self) -> dict:
        return {
            "lower_field": self.lower_field.value,
            "upper_field": self.upper_field.value,
            "policy": self.policy.fixup_mode.value,
            "target_n": self.target_n,
            "achieved_n": self.achieved_n,
            "expanded_rows": self.expansion.output.rows,
            "expanded_cols": self.expansion.output.cols,
            "completion_residual": self.completion_residual,
            "unitarity_error": self.unitarity_error,
            "seed_democracy_spread": self.seed_democracy_spread,
            "obstruction_verdict": self.obstruction["verdict"],
        }


def _unit_columns(A: RepMatrix) -> RepMatrix:
    comp = A.to_components()
    norms = np.sqrt(np.sum(comp**2, axis=(0, 2)))
    comp = comp / norms[None, :, None]
    return RepMatrix.from_components(A.tag, comp)


def build_separation(
    upper_field: Field,
    policy: GadgetPolicy | None = None,
    seed: int = 0,
    restarts: int = 8,
    jobs: int = 1,
) -> SeparationCase:
    """Run the full pipeline for one inclusion.

    seed pattern -> gadget expansion -> freeze the (column-normalized) seed
    witness through the embedding -> solve the remaining entries -> complete
    to a square matrix with orthonormal columns -> read off the separating
    pattern and attach the exact obstruction for the lower system.
    """
    policy = policy or GadgetPolicy()
    low = lower_field(upper_field)

    try:
        cp = seed_pattern(upper_field)
        witness0 = seed_witness(upper_field, seed=seed)
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError("seed", str(exc)) from exc

    try:
        expansion = expand(cp, policy)
    except Exception as exc:
        raise PipelineError("expand", str(exc)) from exc

    try:
        # Freeze the raw witness and solve pure orthogonality: unit norms
        # would clash with the fix-up mass the frozen columns must absorb.
        # The raised barrier floor keeps the free structure substantial, which
        # also keeps the completed pattern away from the verdict gap.
        frozen = {}
        for (i, j), (oi, oj) in expansion.embedding.items():
            if cp.pattern.stars[i, j]:
                frozen[(oi, oj)] = witness0.entry(i, j)
        opts = SolveOptions(
            restarts=restarts,
            seed=seed,
            unit_columns=False,
            star_floor=COMPLETION_STAR_FLOOR,
            frozen=frozen,
            jobs=jobs,
            initial_guess=completion_warm_start(expansion, witness0),
        )
        completion = find_representation(expansion.output, upper_field, opts)
        if not completion.found:
            raise ValueError(
                f"completion search exhausted (best residual {completion.best_residual:.3e})"
            )
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError("complete", str(exc)) from exc

    try:
        square = complete_to_square(_unit_columns(completion.witness), seed=seed)
    except Exception as exc:
        raise PipelineError("square", str(exc)) from exc

    try:
        square_pattern = pattern_of_matrix(square)
        gram = square.gram()
        eye = RepMatrix.identity(square.tag, square.rows)
        unit_err = gram.max_abs_diff(eye)
        spread = 0.0
        for d in cp.democracies:
            col = expansion.embedding[(d.rows[0], d.column)][1]
            mapped = Democracy(col, tuple(expansion.embedding[(r, d.column)][0] for r in d.rows))
            spread = max(spread, float(democracy_spread(square, mapped)))
        if unit_err > 1e-8:
            raise ValueError(f"square witness unitarity error {unit_err:.3e}")
        if spread > DEMOCRACY_TOL:
            raise ValueError(f"embedded seed democracy spread {spread:.3e}")
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError("verify", str(exc)) from exc

    return SeparationCase(
        lower_field=low,
        upper_field=upper_field,
        seed=cp,
        expansion=expansion,
        square_pattern=square_pattern,
        witness=square,
        obstruction=obstruction_for(low),
        target_n=TARGET_DIMENSIONS[upper_field],
        achieved_n=square.rows,
        completion_residual=completion.best_residual,
        unitarity_error=float(unit_err),
        seed_democracy_spread=float(spread),
        policy=policy,
    )
