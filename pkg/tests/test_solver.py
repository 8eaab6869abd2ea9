"""Solver: gradients, determinism, search, completion, verification."""

import json

import numpy as np
import pytest

from zeropat import (
    Democracy,
    Field,
    RepMatrix,
    Scalar,
    SolveOptions,
    complete_to_square,
    find_representation,
    parse_pattern,
    verify_witness,
)
from zeropat.fano import canonical_matrix, column_democracies, fano_matrix, fano_pattern, normalize_to_canonical
from zeropat.scalars import comp_mul
from zeropat.solver import Problem, VerifyTols

FIELDS = (Field.REAL, Field.COMPLEX, Field.QUATERNION)


def random_problem(field, rng, rows=6, cols=4):
    """A random pattern with a democracy and one frozen entry."""
    while True:
        stars = rng.random((rows, cols)) < 0.75
        if all(stars[:, j].sum() >= 4 for j in range(cols)) and stars[0, 0]:
            break
    pat = parse_pattern("\n".join("".join("*" if x else "0" for x in row) for row in stars))
    demo_rows = tuple(sorted(np.nonzero(stars[:, 1])[0][:4].tolist()))
    demos = [Democracy(1, demo_rows)] if len(demo_rows) == 4 else []
    frozen = {(0, 0): Scalar.one(field)}
    opts = SolveOptions(restarts=1, democracies=demos, frozen=frozen, star_floor=0.05)
    return Problem(pat.pattern, field, opts)


def central_difference(prob, x, h=1e-6):
    g = np.zeros_like(x)
    for i in range(len(x)):
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (prob.loss_and_grad(xp)[0] - prob.loss_and_grad(xm)[0]) / (2 * h)
    return g


@pytest.mark.parametrize("field", FIELDS)
def test_analytic_gradient_matches_central_differences(field):
    rng = np.random.default_rng(11)
    for trial in range(5):
        prob = random_problem(field, rng)
        x = prob.random_init(rng)
        _, g = prob.loss_and_grad(x)
        gfd = central_difference(prob, x)
        err = np.linalg.norm(g - gfd) / max(1.0, np.linalg.norm(gfd))
        assert err < 1e-4, (field, trial, err)


@pytest.mark.parametrize("field", FIELDS)
def test_jacobian_matches_loss(field):
    rng = np.random.default_rng(12)
    prob = random_problem(field, rng)
    x = prob.random_init(rng)
    F = prob.residual_vector(x)
    L, g = prob.loss_and_grad(x)
    assert float(F @ F) == pytest.approx(L, rel=1e-12)
    J = prob.jacobian(x)
    assert np.allclose(2.0 * J.T @ F, g, atol=1e-10)


def test_loss_invariant_under_unit_column_scaling():
    # magnitudes and Gram magnitudes ignore a right unit-scalar factor
    for field in FIELDS:
        rng = np.random.default_rng(13)
        pat = fano_pattern(7)
        demos = [column_democracies(7)[2]]
        prob = Problem(pat, field, SolveOptions(restarts=1, democracies=demos))
        x = prob.random_init(rng)
        A = prob.assemble(x)
        if field is Field.REAL:
            unit = np.array([-1.0])
        elif field is Field.COMPLEX:
            unit = np.array([np.cos(0.7), np.sin(0.7)])
        else:
            unit = rng.standard_normal(4)
            unit /= np.linalg.norm(unit)
        A2 = A.copy()
        A2[:, 2, :] = comp_mul(A[:, 2, :], unit[None, :])
        x2 = A2[prob._free_idx].ravel()
        l1 = prob.loss_and_grad(x)[0]
        l2 = prob.loss_and_grad(x2)[0]
        assert l1 == pytest.approx(l2, rel=1e-12)


def test_trivial_single_star():
    pat = parse_pattern("*").pattern
    for field in FIELDS:
        rep = find_representation(pat, field, SolveOptions(restarts=2, seed=1))
        assert rep.found
        assert rep.best_residual < 1e-12
        assert rep.witness.magnitudes()[0, 0] == pytest.approx(1.0, abs=1e-9)


def test_residue_pattern_solves_and_normalizes():
    target = canonical_matrix(7)
    for field in FIELDS:
        rep = find_representation(fano_pattern(7), Field(field), SolveOptions(restarts=8, seed=0))
        assert rep.found, field
        trace = normalize_to_canonical(rep.witness)
        assert trace.B_final.max_abs_diff(target.cast(field)) < 1e-6
        verdict = verify_witness(rep.witness, fano_pattern(7), column_democracies(7))
        assert verdict.ok


def test_report_determinism_across_runs_and_workers():
    opts = dict(restarts=4, seed=3)
    a = find_representation(fano_pattern(7), Field.COMPLEX, SolveOptions(**opts))
    b = find_representation(fano_pattern(7), Field.COMPLEX, SolveOptions(**opts))
    c = find_representation(fano_pattern(7), Field.COMPLEX, SolveOptions(**opts, jobs=2))
    ja, jb, jc = (json.dumps(r.to_json(), sort_keys=True) for r in (a, b, c))
    assert ja == jb == jc


def test_frozen_entry_must_sit_on_star():
    with pytest.raises(ValueError):
        find_representation(
            parse_pattern("*0\n0*").pattern,
            Field.REAL,
            SolveOptions(restarts=1, frozen={(0, 1): Scalar.real(1.0)}),
        )


def test_democracy_must_name_stars():
    pat = parse_pattern("*0\n**\n**\n**\n**").pattern
    with pytest.raises(ValueError):
        find_representation(
            pat, Field.REAL, SolveOptions(restarts=1, democracies=[Democracy(0, (0, 1, 2, 4))])
        )
    with pytest.raises(ValueError):
        SolveOptions(residual_tol=1e-2, star_floor=1e-3)


def test_constrained_complex_seed_infeasible_over_reals():
    cp = parse_pattern("**\n**\n**\n*0\n0*\nD 0 0 1 2 3\nD 1 0 1 2 4")
    rep = find_representation(
        cp.pattern,
        Field.REAL,
        SolveOptions(restarts=8, seed=0, democracies=cp.democracies),
    )
    assert rep.status == "EXHAUSTED"
    assert rep.strongly_infeasible
    assert rep.witness is None


def test_complete_to_square_two_dim():
    A = RepMatrix(Field.REAL, np.array([[1.0], [0.0]]))
    U = complete_to_square(A, seed=0)
    assert np.allclose(np.abs(U.data[:, 1]), [0.0, 1.0], atol=1e-12)


def test_complete_to_square_keeps_square_input():
    half_m = fano_matrix(7)
    assert complete_to_square(half_m, seed=0).max_abs_diff(half_m) == 0


@pytest.mark.parametrize("field", FIELDS)
def test_complete_to_square_random(field):
    rng = np.random.default_rng(21)
    n = field.ncomp
    comp = rng.standard_normal((9, 3, n))
    A = RepMatrix.from_components(field, comp)
    # orthonormalize the three columns first
    from zeropat.solver import _conj2
    from zeropat.scalars import MULT_TABLE

    cols = []
    for j in range(3):
        v = comp[:, j, :]
        for u in cols:
            c = np.einsum("ma,mb,abg->g", _conj2(u), v, MULT_TABLE[n])
            v = v - comp_mul(u, c[None, :])
        cols.append(v / np.sqrt(np.sum(v * v)))
    A = RepMatrix.from_components(field, np.stack(cols, axis=1))

    U = complete_to_square(A, seed=5)
    assert (U.rows, U.cols) == (9, 9)
    assert U.gram().is_identity(1e-8)
    assert np.allclose(U.to_components()[:, :3, :], A.to_components(), atol=0)
    # completed entries stay above the pattern floor
    from zeropat.scalars import comp_abs

    assert comp_abs(U.to_components()[:, 3:, :]).min() >= 1e-3


def test_complete_to_square_rejects_bad_input():
    bad = RepMatrix(Field.REAL, np.array([[1.0, 1.0], [0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        complete_to_square(bad, seed=0)
    wide = RepMatrix(Field.REAL, np.ones((2, 3)))
    with pytest.raises(ValueError):
        complete_to_square(wide, seed=0)


def test_verify_witness_exact_and_failures():
    half_m = fano_matrix(7)
    F = fano_pattern(7)
    demos = column_democracies(7)
    good = verify_witness(half_m, F, demos)
    assert good.ok and good.orth_residual == 0.0 and good.demo_max_spread == 0

    bad_pattern = verify_witness(RepMatrix.identity(Field.RATIONAL, 7), F)
    assert not bad_pattern.pattern_ok

    perturbed = half_m.cast(Field.REAL)
    data = perturbed.data.copy()
    data[0, 0] += 1e-3
    verdict = verify_witness(RepMatrix(Field.REAL, data), F, demos, VerifyTols())
    assert not verdict.orth_ok
    assert not verdict.ok
