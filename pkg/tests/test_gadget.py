"""Gadget expansion: bookkeeping, embedded blocks, certification."""

import numpy as np
import pytest

from zeropat import (
    ConstrainedZeroPattern,
    Field,
    FixupMode,
    GadgetPolicy,
    SolveOptions,
    certify_expansion,
    completion_warm_start,
    expand,
    expand_one,
    find_representation,
    parse_pattern,
)
from zeropat.fano import fano_pattern
from zeropat.separators import seed_pattern
from zeropat.solver import Problem

SAFE = GadgetPolicy(FixupMode.SAFE)
MINIMAL = GadgetPolicy(FixupMode.MINIMAL)


def first_demo(cp):
    return ConstrainedZeroPattern(cp.pattern, (cp.democracies[0],))


def test_expand_one_real_seed_has_no_fixups():
    e = expand_one(first_demo(seed_pattern(Field.REAL)), SAFE)
    assert (e.output.rows, e.output.cols) == (8, 7)
    assert sum(len(s.fixups) for s in e.stages) == 0
    stage = e.stages[0]
    assert stage.control_rows == (5, 6, 7)
    assert stage.control_cols == (1, 2, 3, 4, 5, 6)


def test_expand_one_requires_single_democracy():
    with pytest.raises(ValueError):
        expand_one(seed_pattern(Field.REAL), SAFE)


def test_embedded_block_is_residue_pattern():
    for upper in (Field.REAL, Field.COMPLEX, Field.QUATERNION):
        e = expand(seed_pattern(upper), SAFE)
        F = fano_pattern(7).stars
        for stage in e.stages:
            rows = np.array(stage.block_rows)
            cols = np.array(stage.block_cols)
            block = e.output.stars[np.ix_(rows, cols)]
            assert np.array_equal(block, F), stage.democracy


def test_complex_seed_first_stage_support_sizes():
    e = expand_one(first_demo(seed_pattern(Field.COMPLEX)), SAFE)
    sizes = [len(f.support) for f in e.stages[0].fixups]
    assert sizes == [2, 1, 1, 1, 2, 2]
    assert sum(len(f.rows) for f in e.stages[0].fixups) == 9


@pytest.mark.parametrize(
    "upper,safe_rows,minimal_rows,cols",
    [
        (Field.REAL, 38, 35, 13),
        (Field.COMPLEX, 56, 47, 14),
        (Field.QUATERNION, 186, 141, 22),
    ],
)
def test_expansion_dimensions(upper, safe_rows, minimal_rows, cols):
    es = expand(seed_pattern(upper), SAFE)
    assert (es.output.rows, es.output.cols) == (safe_rows, cols)
    em = expand(seed_pattern(upper), MINIMAL)
    assert (em.output.rows, em.output.cols) == (minimal_rows, cols)


def test_row_and_column_bookkeeping():
    cp = seed_pattern(Field.COMPLEX)
    e = expand(cp, SAFE)
    rows = cp.rows
    cols = cp.cols
    for stage in e.stages:
        fixup_rows = sum(len(f.rows) for f in stage.fixups)
        rows += 3 + fixup_rows
        cols += 6
    assert (rows, cols) == (e.output.rows, e.output.cols)


def test_fixup_rows_have_two_stars_each():
    for policy in (SAFE, MINIMAL):
        e = expand(seed_pattern(Field.COMPLEX), policy)
        c0s = {s.democracy.column for s in e.stages}
        for stage in e.stages:
            for f in stage.fixups:
                assert f.col_a != f.col_b
                assert f.col_a not in c0s and f.col_b not in c0s
                for r in f.rows:
                    row = e.output.stars[r]
                    assert int(row.sum()) == 2
                    assert row[f.col_a] and row[f.col_b]


def test_safe_dominates_minimal():
    es = expand(seed_pattern(Field.COMPLEX), SAFE)
    em = expand(seed_pattern(Field.COMPLEX), MINIMAL)
    for ss, sm in zip(es.stages, em.stages):
        pairs_s = {(f.col_a, f.col_b): len(f.rows) for f in ss.fixups}
        pairs_m = {(f.col_a, f.col_b): len(f.rows) for f in sm.fixups}
        assert set(pairs_m) <= set(pairs_s)
        for key, nm in pairs_m.items():
            assert nm <= pairs_s[key]


def test_single_column_democracies_add_no_stars_to_it():
    cp = seed_pattern(Field.REAL)  # both democracies constrain column 0
    e = expand(cp, SAFE)
    support = e.output.column_support(0)
    assert support == {0, 1, 2, 3, 4}


def test_empty_democracy_set_is_identity():
    cp = ConstrainedZeroPattern(fano_pattern(7), ())
    e = expand(cp, SAFE)
    assert e.output == cp.pattern
    assert e.stages == []


def test_residue_pattern_with_democracies_still_expands():
    # the generic algorithm always appends; it does not detect that the
    # residue pattern already forces its own democracies
    from zeropat.fano import column_democracies

    cp = ConstrainedZeroPattern(fano_pattern(7), (column_democracies(7)[0],))
    e = expand(cp, SAFE)
    assert e.output.rows > 7 and e.output.cols == 13


def test_all_zero_extra_column_gets_no_fixups():
    cp = parse_pattern("*0\n*0\n*0\n*0\nD 0 0 1 2 3")
    e = expand(cp, SAFE)
    assert all(not f for s in e.stages for f in s.fixups)
    assert e.output.column_support(1) == set()


def test_warm_start_is_near_exact():
    from zeropat.separators import seed_witness

    cp = seed_pattern(Field.COMPLEX)
    e = expand(cp, SAFE)
    w0 = seed_witness(Field.COMPLEX)
    warm = completion_warm_start(e, w0)
    frozen = {
        (i, j): w0.entry(i, j)
        for (i, j) in e.embedding
        if cp.pattern.stars[i, j]
    }
    opts = SolveOptions(
        restarts=1, unit_columns=False, star_floor=0.05, frozen=frozen, initial_guess=warm
    )
    prob = Problem(e.output, Field.COMPLEX, opts)
    x = prob.guess_init()
    assert prob.constraint_residual(x) < 1e-9


def test_certify_expansion_real_seed():
    e = expand(seed_pattern(Field.REAL), SAFE)
    report = certify_expansion(e, Field.REAL, trials=2, seed=0, restarts=4)
    assert report.completion_status == "ran"
    assert all(t["found"] and t["democracies_ok"] for t in report.democracy_trials)
    assert all(t["found"] for t in report.completion_trials)
    assert report.ok


def test_certify_expansion_skips_when_no_witness():
    e = expand(seed_pattern(Field.COMPLEX), SAFE)
    report = certify_expansion(e, Field.REAL, trials=1, seed=0, restarts=4)
    assert report.completion_status == "skipped"
    assert "no constrained witness over REAL" in report.completion_reason


def test_expansion_json_shape():
    e = expand(seed_pattern(Field.REAL), SAFE)
    payload = e.to_json()
    assert {"input", "output", "embedding", "stages"} <= set(payload)
    assert len(payload["stages"]) == 2
    assert payload["output"].count("\n") + 1 == e.output.rows
