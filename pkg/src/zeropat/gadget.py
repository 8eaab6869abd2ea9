"""Gadget expansion: compiling magnitude constraints into pure zero-patterns.

Each four-way democracy of a constrained pattern is replaced, one at a time,
by an embedded copy of the rigid 7x7 residue pattern.  A single stage appends
three all-zero control rows, six control columns carrying the last six
columns of the residue pattern (democracy rows play residue rows 0, 1, 2, 4;
control rows play rows 3, 5, 6), and finally two-STAR fix-up rows that
restore orthogonality between each older column and each control column
wherever their supports overlap.  Orthogonal representations of the expanded
pattern are forced, by rigidity of the embedded block, to satisfy the
original democracy; conversely any constrained representation extends to the
expansion.

Fix-up policy: a size-1 overlap always needs exactly one row; a size-2
overlap gets two rows under SAFE, or the smallest count that a local
completion experiment certifies under MINIMAL.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field as dc_field

import numpy as np

from .fano import fano_pattern
from .patterns import (
    ConstrainedZeroPattern,
    Democracy,
    ZeroPattern,
    democracy_spread,
    serialize_pattern,
)
from .scalars import Field, Scalar
from .solver import DEMOCRACY_TOL, SolveOptions, find_representation

# Democracy rows (ascending) play these rows of the embedded residue pattern,
# control rows the remaining three.  Ascending order is pinned for determinism.
DEMOCRACY_BLOCK_ROWS = (0, 1, 2, 4)
CONTROL_BLOCK_ROWS = (3, 5, 6)


class FixupMode(enum.Enum):
    SAFE = "safe"
    MINIMAL = "minimal"


@dataclass(frozen=True)
class GadgetPolicy:
    fixup_mode: FixupMode = FixupMode.SAFE
    # MINIMAL certification: random local instances per candidate row count.
    certify_instances: int = 5
    certify_tol: float = 1e-9
    seed: int = 0


@dataclass
class PairFixup:
    col_a: int
    col_b: int
    support: tuple
    rows: tuple  # appended row indices (0, 1 or 2 of them)


@dataclass
class ExpansionStage:
    democracy: Democracy
    control_rows: tuple
    control_cols: tuple
    block_rows: tuple  # rows of the embedded 7x7 block, in residue-row order
    block_cols: tuple  # its columns: the democracy column then the control columns
    fixups: tuple

    def to_json(self) -> dict:
        return {
            "democracy": {"column": self.democracy.column, "rows": list(self.democracy.rows)},
            "control_rows": list(self.control_rows),
            "control_cols": list(self.control_cols),
            "block_rows": list(self.block_rows),
            "block_cols": list(self.block_cols),
            "fixups": [
                {
                    "col_a": f.col_a,
                    "col_b": f.col_b,
                    "support": list(f.support),
                    "rows": list(f.rows),
                }
                for f in self.fixups
            ],
        }


@dataclass
class GadgetExpansion:
    input: ConstrainedZeroPattern
    output: ZeroPattern
    embedding: dict  # input (row, col) -> output (row, col)
    stages: list = dc_field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "input": serialize_pattern(self.input),
            "output": self.output.to_text(),
            "embedding": sorted([list(k), list(v)] for k, v in self.embedding.items()),
            "stages": [s.to_json() for s in self.stages],
        }


def expand_one(T: ConstrainedZeroPattern, policy: GadgetPolicy | None = None) -> GadgetExpansion:
    """Expand a pattern with exactly one democracy."""
    policy = policy or GadgetPolicy()
    if len(T.democracies) != 1:
        raise ValueError("expand_one needs exactly one democracy")
    demo = T.democracies[0]
    c0 = demo.column
    m, n = T.rows, T.cols
    F = fano_pattern(7).stars

    # Stage one: three all-zero control rows at the bottom.
    control_rows = (m, m + 1, m + 2)
    grid = np.zeros((m + 3, n + 6), dtype=bool)
    grid[:m, :n] = T.pattern.stars

    # Stage two: six control columns on the right.
    control_cols = tuple(range(n, n + 6))
    for t in range(1, 7):
        col = n + t - 1
        for s, frow in enumerate(DEMOCRACY_BLOCK_ROWS):
            grid[demo.rows[s], col] = F[frow, t]
        for u, frow in enumerate(CONTROL_BLOCK_ROWS):
            grid[control_rows[u], col] = F[frow, t]
    block_rows = (
        demo.rows[0],
        demo.rows[1],
        demo.rows[2],
        control_rows[0],
        demo.rows[3],
        control_rows[1],
        control_rows[2],
    )
    block_cols = (c0,) + control_cols

    # Stage three: fix-up rows per (older column, control column) pair.
    rng = np.random.default_rng([policy.seed, m, n, c0])
    fixups = []
    extra_rows = []
    next_row = m + 3
    for a in range(n):
        if a == c0:
            continue
        support_a = set(np.nonzero(grid[:, a])[0].tolist())
        for b in control_cols:
            support_b = set(np.nonzero(grid[:, b])[0].tolist())
            support = tuple(sorted(support_a & support_b))
            if len(support) > 2:
                raise AssertionError("control columns overlap an old column in >2 rows")
            if not support:
                continue
            if len(support) == 1:
                count = 1
            elif policy.fixup_mode is FixupMode.SAFE:
                count = 2
            else:
                count = _certify_minimal_rows(policy, rng)
            rows = tuple(range(next_row, next_row + count))
            next_row += count
            for r in rows:
                extra_rows.append((r, a, b))
            fixups.append(PairFixup(col_a=a, col_b=b, support=support, rows=rows))

    total_rows = next_row
    out = np.zeros((total_rows, n + 6), dtype=bool)
    out[: m + 3] = grid
    for r, a, b in extra_rows:
        out[r, a] = True
        out[r, b] = True

    embedding = {(i, j): (i, j) for i in range(m) for j in range(n)}
    stage = ExpansionStage(
        democracy=demo,
        control_rows=control_rows,
        control_cols=control_cols,
        block_rows=block_rows,
        block_cols=block_cols,
        fixups=tuple(fixups),
    )
    return GadgetExpansion(
        input=T,
        output=ZeroPattern(out),
        embedding=embedding,
        stages=[stage],
    )


def _certify_minimal_rows(policy: GadgetPolicy, rng: np.random.Generator) -> int:
    """Smallest fix-up row count that completes a size-2 overlap numerically.

    The local subproblem freezes the two overlapping entries of each column
    (the control column with equal magnitudes, as rigidity forces; the other
    column generic) and asks the solver to zero the pair inner product using
    only the appended rows.  A candidate count is accepted when every random
    instance completes below the certification tolerance; real scalars are
    used as the hardest case.
    """
    for count in (0, 1):
        if _pair_completes(count, policy, rng):
            return count
    return 2


def _pair_completes(count: int, policy: GadgetPolicy, rng: np.random.Generator) -> bool:
    for _ in range(policy.certify_instances):
        a_vals = rng.uniform(0.5, 1.5, size=2) * rng.choice([-1.0, 1.0], size=2)
        b_mag = rng.uniform(0.5, 1.5)
        b_vals = b_mag * rng.choice([-1.0, 1.0], size=2)
        rows = 2 + count
        stars = np.ones((rows, 2), dtype=bool)
        frozen = {}
        for i in range(2):
            frozen[(i, 0)] = Scalar.real(a_vals[i])
            frozen[(i, 1)] = Scalar.real(b_vals[i])
        opts = SolveOptions(
            restarts=3,
            seed=int(rng.integers(0, 2**31)),
            unit_columns=False,
            frozen=frozen,
            residual_tol=policy.certify_tol,
        )
        report = find_representation(ZeroPattern(stars), Field.REAL, opts)
        if not report.found:
            return False
    return True


def expand(T: ConstrainedZeroPattern, policy: GadgetPolicy | None = None) -> GadgetExpansion:
    """Left fold of expand_one over the democracies in declaration order.

    Appending only ever grows the grid down and right, so input positions map
    to themselves and earlier stage records stay valid verbatim.
    """
    policy = policy or GadgetPolicy()
    stages = []
    pattern = T.pattern
    for demo in T.democracies:
        step = expand_one(ConstrainedZeroPattern(pattern, (demo,)), policy)
        pattern = step.output
        stages.extend(step.stages)
    embedding = {(i, j): (i, j) for i in range(T.rows) for j in range(T.cols)}
    return GadgetExpansion(input=T, output=pattern, embedding=embedding, stages=stages)


def completion_warm_start(E: GadgetExpansion, input_witness) -> dict:
    """Closed-form values completing a constrained input witness through E.

    The rigidity of each embedded block determines the control-column values
    up to gauge: with row phases read off the democracy entries and a common
    column scale equal to the democracy magnitude, the block is exactly a
    phase-scaled copy of the canonical integer matrix.  Fix-up entries then
    cancel the known overlap sums pair by pair.  The result is a near-exact
    orthogonal representation of E.output extending the witness, intended as
    a solver warm start (position -> Scalar for every non-input STAR).
    """
    from .fano import canonical_matrix

    field = input_witness.tag
    if field is Field.RATIONAL:
        raise ValueError("warm starts are built over floating scalar systems")
    M = canonical_matrix(7).cast(Field.REAL).data  # integer entries as floats

    values = {}
    for (i, j), (oi, oj) in E.embedding.items():
        if E.input.pattern.stars[i, j]:
            values[(oi, oj)] = input_witness.entry(i, j)

    def real_scalar(v: float) -> Scalar:
        if field is Field.REAL:
            return Scalar.real(v)
        if field is Field.COMPLEX:
            return Scalar.cplx(v)
        return Scalar.quat(v)

    out = {}

    def put(pos, s):
        values[pos] = s
        out[pos] = s

    for stage in E.stages:
        demo = stage.democracy
        mags = [values[(r, demo.column)].magnitude() for r in demo.rows]
        gamma = float(sum(mags)) / 4.0
        row_phase = {}
        for s_idx, fr in enumerate(DEMOCRACY_BLOCK_ROWS):
            w = values[(demo.rows[s_idx], demo.column)]
            row_phase[fr] = w * real_scalar(M[fr, 0] / gamma)  # M[fr,0] = +-1
        for fr in CONTROL_BLOCK_ROWS:
            row_phase[fr] = Scalar.one(field) if field is not Field.QUATERNION else Scalar.quat(1.0)
        for t in range(1, 7):
            col = stage.control_cols[t - 1]
            for fr in range(7):
                if M[fr, t] != 0.0:
                    put((stage.block_rows[fr], col), row_phase[fr] * real_scalar(M[fr, t] * gamma))
        for f in stage.fixups:
            s = Scalar.zero(field)
            for r in f.support:
                s = s + values[(r, f.col_a)].conjugate() * values[(r, f.col_b)]
            smag = float(s.magnitude())
            if len(f.rows) == 1:
                if smag < 1e-12:
                    # An exactly-cancelling pair cannot be fixed by one row;
                    # plant benign values and let the solver report the truth.
                    u, v = real_scalar(0.3 * gamma), real_scalar(-0.3 * gamma)
                    put((f.rows[0], f.col_a), u)
                    put((f.rows[0], f.col_b), v)
                else:
                    m = smag**0.5
                    put((f.rows[0], f.col_a), real_scalar(m))
                    put((f.rows[0], f.col_b), (-s) * real_scalar(1.0 / m))
            elif len(f.rows) == 2:
                for c in (0.4 * gamma, 0.55 * gamma, 0.7 * gamma):
                    half = s * real_scalar(-0.5 / c)
                    v1 = half + real_scalar(-c)
                    v2 = half + real_scalar(c)
                    if min(v1.magnitude(), v2.magnitude()) >= 0.1 * gamma:
                        break
                put((f.rows[0], f.col_a), real_scalar(c))
                put((f.rows[0], f.col_b), v1)
                put((f.rows[1], f.col_a), real_scalar(c))
                put((f.rows[1], f.col_b), v2)
    return out


# ---------------------------------------------------------------------------
# Numerical certification of the expansion's two guarantees
# ---------------------------------------------------------------------------


@dataclass
class CertifyReport:
    field: Field
    trials: int
    democracy_trials: list  # per-trial dicts for the forced-democracy battery
    completion_status: str  # ran | skipped
    completion_reason: str
    completion_trials: list

    @property
    def ok(self) -> bool:
        b1 = all(t["found"] and t["democracies_ok"] for t in self.democracy_trials)
        if self.completion_status == "ran":
            return b1 and all(t["found"] for t in self.completion_trials)
        return b1

    def to_json(self) -> dict:
        return {
            "field": self.field.value,
            "trials": self.trials,
            "democracy_trials": self.democracy_trials,
            "completion": {
                "status": self.completion_status,
                "reason": self.completion_reason,
                "trials": self.completion_trials,
            },
            "ok": self.ok,
        }


def certify_expansion(
    E: GadgetExpansion,
    field: Field,
    trials: int = 5,
    seed: int = 0,
    restarts: int = 8,
) -> CertifyReport:
    """Run the two experiment batteries behind the expansion's guarantees.

    Battery one solves the expanded pattern unconstrained and asserts every
    input democracy is satisfied on the embedded submatrix.  Battery two
    finds a constrained representation of the input, freezes it through the
    embedding, and asserts the solver completes the remaining entries; it is
    skipped when no constrained witness exists over the field.
    """
    demo_trials = []
    for t in range(trials):
        # The raised floor keeps fix-up entries alive: at the default floor
        # the search drifts to representations of strict sub-patterns.
        opts = SolveOptions(
            restarts=restarts,
            seed=seed * 1000003 + 2 * t,
            unit_columns=True,
            star_floor=0.05,
        )
        rep = find_representation(E.output, field, opts)
        entry = {"found": rep.found, "democracies_ok": True, "max_spread": 0.0}
        if rep.found:
            spread = 0.0
            for d in E.input.democracies:
                col = E.embedding[(d.rows[0], d.column)][1]
                mapped = Democracy(col, tuple(E.embedding[(r, d.column)][0] for r in d.rows))
                spread = max(spread, float(democracy_spread(rep.witness, mapped)))
            entry["max_spread"] = spread
            entry["democracies_ok"] = spread <= DEMOCRACY_TOL
        demo_trials.append(entry)

    completion_trials = []
    witness_opts = SolveOptions(
        restarts=max(16, restarts),
        seed=seed * 1000003 + 1,
        unit_columns=True,
        democracies=E.input.democracies,
    )
    witness_rep = find_representation(E.input.pattern, field, witness_opts)
    if not witness_rep.found:
        status = "skipped"
        reason = f"no constrained witness over {field.value}"
        if witness_rep.strongly_infeasible:
            reason += " (strongly infeasible)"
    else:
        status, reason = "ran", ""
        frozen = {}
        for (i, j), (oi, oj) in E.embedding.items():
            if E.input.pattern.stars[i, j]:
                frozen[(oi, oj)] = witness_rep.witness.entry(i, j)
        warm = completion_warm_start(E, witness_rep.witness)
        for t in range(trials):
            # Orthogonality only: the frozen columns must absorb fix-up mass,
            # which unit norms would forbid.
            opts = SolveOptions(
                restarts=restarts,
                seed=seed * 1000003 + 2 * t + 1,
                unit_columns=False,
                star_floor=0.05,
                frozen=frozen,
                initial_guess=warm,
            )
            rep = find_representation(E.output, field, opts)
            completion_trials.append({"found": rep.found, "residual": rep.best_residual})
    return CertifyReport(
        field=field,
        trials=trials,
        democracy_trials=demo_trials,
        completion_status=status,
        completion_reason=reason,
        completion_trials=completion_trials,
    )
