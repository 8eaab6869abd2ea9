"""Numerical search for orthogonal representations of zero-patterns.

The solver parameterizes the free STAR entries of a pattern as real
components (1 per entry for REAL, 2 for COMPLEX, 4 for QUATERNION), leaves
ZERO positions structurally zero, holds frozen entries fixed, and minimizes

    L(A) = sum_{j<k} |<col_j, col_k>|^2
         + [unit_columns] sum_j (<col_j, col_j> - 1)^2
         + sum over free STAR entries of max(0, 2*star_floor - |entry|)^2
         + sum over democracy pairs of (|e1| - |e2|)^2

by multi-start L-BFGS with an analytic gradient, plus a Gauss-Newton polish
when a restart lands close to a solution.  The hinge barrier keeps STAR
entries away from zero during the search; acceptance re-checks every STAR
magnitude afterwards, so the barrier never fakes a solution.  EXHAUSTED is
evidence of absence only, never proof.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.optimize import least_squares, minimize

from .patterns import (
    DEFAULT_STAR_FLOOR,
    DEFAULT_ZERO_TOL,
    Democracy,
    ZeroPattern,
    democracy_satisfied,
    democracy_spread,
    matches_pattern,
)
from .scalars import (
    Field,
    MULT_TABLE,
    RepMatrix,
    Scalar,
    comp_abs,
    comp_conj,
    comp_mul,
    fast_gram,
    fast_matmul,
)

DEMOCRACY_TOL = 1e-6
# Residual above which an exhausted search is flagged as strongly infeasible,
# distinguishing plateaus from near-misses.
STRONG_INFEASIBILITY = 1e-3


@dataclass
class SolveOptions:
    restarts: int = 32
    max_iters: int = 5000
    residual_tol: float = 1e-9
    star_floor: float = DEFAULT_STAR_FLOOR
    seed: int = 0
    democracies: tuple = ()
    frozen: dict | None = None  # (row, col) -> Scalar
    unit_columns: bool = True
    keep_all: bool = False
    jobs: int = 1
    # Fresh descents per restart before giving up on it.  Each attempt draws
    # from the restart's own RNG stream, so results do not depend on worker
    # scheduling.  Sign-rigid REAL landscapes profit the most.
    inner_tries: int = 4
    # Stop evaluating restarts once one succeeds (in index order, so the
    # outcome is independent of worker count).  Exhaustive sweeps such as
    # rigidity probing turn this off.
    stop_after_found: bool = True
    # Optional warm start: (row, col) -> Scalar covering every free STAR
    # position.  Restart 0 descends from it first; everything else stays
    # randomized.
    initial_guess: dict | None = None

    def __post_init__(self):
        if not self.residual_tol < self.star_floor:
            raise ValueError("residual_tol must be below star_floor")
        self.democracies = tuple(self.democracies)


@dataclass
class RestartResult:
    index: int
    residual: float
    found: bool
    min_star: float
    witness: RepMatrix | None


@dataclass
class SolveReport:
    status: str  # FOUND | EXHAUSTED
    best_residual: float
    witness: RepMatrix | None
    restart_residuals: list
    min_star_magnitude: float
    strongly_infeasible: bool
    restart_results: list = dc_field(default_factory=list)
    seed: int = 0

    @property
    def found(self) -> bool:
        return self.status == "FOUND"

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "best_residual": self.best_residual,
            "witness": self.witness.to_json() if self.witness is not None else None,
            "restart_residuals": self.restart_residuals,
            "min_star_magnitude": self.min_star_magnitude,
            "strongly_infeasible": self.strongly_infeasible,
            "rng": {"algorithm": "PCG64", "seed": self.seed, "stream": "per-restart (seed, index)"},
        }


class Problem:
    """Assembled optimization problem for one (pattern, field, options) triple."""

    def __init__(self, pattern: ZeroPattern, field: Field, opts: SolveOptions):
        if field is Field.RATIONAL:
            raise ValueError("the solver works over REAL, COMPLEX or QUATERNION")
        self.pattern = pattern
        self.field = field
        self.ncomp = field.ncomp
        self.opts = opts
        r, c = pattern.rows, pattern.cols
        self.shape = (r, c)

        stars = [(i, j) for i in range(r) for j in range(c) if pattern.stars[i, j]]
        self.star_positions = stars
        frozen = dict(opts.frozen or {})
        for (i, j), s in frozen.items():
            if not pattern.stars[i, j]:
                raise ValueError(f"frozen entry at ZERO position ({i}, {j})")
            if s.tag is not field:
                raise ValueError("frozen scalar tag does not match the solve field")
        for d in opts.democracies:
            d.validate(pattern)
        self.frozen = frozen
        self.free_positions = [p for p in stars if p not in frozen]
        self.nfree = len(self.free_positions)
        self.nparams = self.nfree * self.ncomp
        self._param_index = {p: k for k, p in enumerate(self.free_positions)}

        self.pairs = list(itertools.combinations(range(c), 2))
        self.demo_pairs = []  # (pos_a, pos_b) with positions (row, col)
        for d in opts.democracies:
            entries = [(row, d.column) for row in d.rows]
            for a, b in itertools.combinations(entries, 2):
                self.demo_pairs.append((a, b))

        self._base = np.zeros((r, c, self.ncomp))
        for (i, j), s in frozen.items():
            self._base[i, j] = _scalar_components(s, self.ncomp)

        # Index arrays for vectorized assembly and gradients.
        def _idx(ps):
            if not ps:
                return np.zeros(0, dtype=int), np.zeros(0, dtype=int)
            arr = np.array(ps, dtype=int)
            return arr[:, 0], arr[:, 1]

        self._free_idx = _idx(self.free_positions)
        self._star_idx = _idx(stars)
        self._demo_a_idx = _idx([a for a, _ in self.demo_pairs])
        self._demo_b_idx = _idx([b for _, b in self.demo_pairs])
        self._offdiag_mask = ~np.eye(c, dtype=bool)

    # ---- assembly ----

    def assemble(self, x: np.ndarray) -> np.ndarray:
        A = self._base.copy()
        if self.nfree:
            A[self._free_idx] = x.reshape(self.nfree, self.ncomp)
        return A

    def guess_init(self) -> np.ndarray:
        """Parameter vector from opts.initial_guess; must cover all free positions."""
        guess = self.opts.initial_guess or {}
        x = np.zeros((self.nfree, self.ncomp))
        for k, pos in enumerate(self.free_positions):
            s = guess.get(pos)
            if s is None:
                raise ValueError(f"initial guess missing free position {pos}")
            if s.tag is not self.field:
                raise ValueError("initial guess scalar tag mismatch")
            x[k] = _scalar_components(s, self.ncomp)
        return x.ravel()

    def random_init(self, rng: np.random.Generator) -> np.ndarray:
        """Free entries drawn uniform on the field's unit sphere, scaled by 1/sqrt(rows)."""
        n, m = self.nfree, self.ncomp
        if m == 1:
            units = (rng.integers(0, 2, size=(n, 1)) * 2 - 1).astype(float)
        elif m == 2:
            theta = rng.uniform(0.0, 2.0 * np.pi, size=n)
            units = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        else:
            units = rng.standard_normal((n, 4))
            norms = np.linalg.norm(units, axis=1)
            while np.any(norms < 1e-8):
                bad = norms < 1e-8
                units[bad] = rng.standard_normal((int(bad.sum()), 4))
                norms = np.linalg.norm(units, axis=1)
            units /= norms[:, None]
        return (units / np.sqrt(self.shape[0])).ravel()

    # ---- residuals ----

    def _entry_mags(self, A):
        return comp_abs(A)

    def residual_vector(self, x: np.ndarray, include_barrier: bool = True) -> np.ndarray:
        """Stacked residuals: orthogonality, unit norms, democracy gaps, barrier hinges.

        The polish stage drops the barrier hinges: they are nonsmooth exactly
        where pinned entries sit, and feasibility is re-checked afterwards.
        """
        A = self.assemble(x)
        G = fast_gram(A)
        parts = [np.concatenate([G[j, k] for j, k in self.pairs]) if self.pairs else np.zeros(0)]
        if self.opts.unit_columns:
            parts.append(np.diagonal(G[..., 0]) - 1.0)
        mags = self._entry_mags(A)
        if self.demo_pairs:
            parts.append(mags[self._demo_a_idx] - mags[self._demo_b_idx])
        if include_barrier and self.nfree:
            floor = 2.0 * self.opts.star_floor
            parts.append(np.maximum(0.0, floor - mags[self._free_idx]))
        return np.concatenate(parts)

    def constraint_residual(self, x: np.ndarray) -> float:
        """sqrt of the squared orthogonality + unit + democracy violations (no barrier)."""
        A = self.assemble(x)
        G = fast_gram(A)
        total = 0.5 * float(np.sum((G[self._offdiag_mask]) ** 2))
        if self.opts.unit_columns:
            total += float(np.sum((np.diagonal(G[..., 0]) - 1.0) ** 2))
        if self.demo_pairs:
            mags = self._entry_mags(A)
            gaps = mags[self._demo_a_idx] - mags[self._demo_b_idx]
            total += float(np.sum(gaps**2))
        return float(np.sqrt(total))

    def loss_and_grad(self, x: np.ndarray, barrier_at: float | None = None):
        """Value and analytic gradient of L with respect to the free components.

        ``barrier_at`` overrides the hinge threshold (default 2 * star_floor);
        the annealing phase of a descent raises it temporarily.
        """
        A = self.assemble(x)
        G = fast_gram(A)
        c = self.shape[1]
        loss = 0.5 * float(np.sum((G[self._offdiag_mask]) ** 2))
        Ghat = G.copy()
        diag = np.arange(c)
        Ghat[diag, diag] = 0.0
        if self.opts.unit_columns:
            dev = np.diagonal(G[..., 0]) - 1.0
            loss += float(np.sum(dev**2))
            Ghat[diag, diag, 0] = 2.0 * dev
        dA = 2.0 * fast_matmul(A, Ghat)

        mags = self._entry_mags(A)
        if self.demo_pairs:
            ai, bi = self._demo_a_idx, self._demo_b_idx
            gaps = mags[ai] - mags[bi]
            loss += float(np.sum(gaps**2))
            unit_a = A[ai] / np.maximum(mags[ai], 1e-300)[:, None]
            unit_b = A[bi] / np.maximum(mags[bi], 1e-300)[:, None]
            np.add.at(dA, ai, 2.0 * gaps[:, None] * unit_a)
            np.add.at(dA, bi, -2.0 * gaps[:, None] * unit_b)
        if self.nfree:
            floor = 2.0 * self.opts.star_floor if barrier_at is None else barrier_at
            fi = self._free_idx
            h = np.maximum(0.0, floor - mags[fi])
            loss += float(np.sum(h**2))
            active = h > 0.0
            if np.any(active):
                rows = fi[0][active]
                cols = fi[1][active]
                unit = A[rows, cols] / np.maximum(mags[rows, cols], 1e-300)[:, None]
                np.add.at(dA, (rows, cols), -2.0 * h[active][:, None] * unit)
            grad = dA[fi].ravel()
        else:
            grad = np.zeros(0)
        return loss, grad

    def jacobian(self, x: np.ndarray, include_barrier: bool = True) -> np.ndarray:
        """Dense Jacobian of residual_vector; used by the Gauss-Newton polish."""
        A = self.assemble(x)
        cA = comp_conj(A)
        n = self.ncomp
        q = MULT_TABLE[n]
        nres = len(self.pairs) * n
        if self.opts.unit_columns:
            nres += self.shape[1]
        nres += len(self.demo_pairs)
        if include_barrier and self.nfree:
            nres += self.nfree
        J = np.zeros((nres, self.nparams))

        col_free = {}
        for k, (i, j) in enumerate(self.free_positions):
            col_free.setdefault(j, []).append((i, k))

        row0 = 0
        sign = np.ones(n)
        sign[1:] = -1.0
        for j, k in self.pairs:
            # d G_jk[g] / d A[m, j, a] = sign(a) * sum_b Q[a, b, g] A[m, k, b]
            dj = np.einsum("mb,abg->mag", A[:, k, :], q) * sign[None, :, None]
            # d G_jk[g] / d A[m, k, b] = sum_a conj(A)[m, j, a] Q[a, b, g]
            dk = np.einsum("ma,abg->mbg", cA[:, j, :], q)
            for col, block in ((j, dj), (k, dk)):
                for m, pidx in col_free.get(col, ()):
                    J[row0 : row0 + n, pidx * n : (pidx + 1) * n] += block[m].T
            row0 += n
        if self.opts.unit_columns:
            for j in range(self.shape[1]):
                for m, pidx in col_free.get(j, ()):
                    J[row0, pidx * n : (pidx + 1) * n] = 2.0 * A[m, j]
                row0 += 1
        mags = self._entry_mags(A)
        safe = np.maximum(mags, 1e-300)
        for a, b in self.demo_pairs:
            for pos, sgn in ((a, 1.0), (b, -1.0)):
                pidx = self._param_index.get(pos)
                if pidx is not None:
                    J[row0, pidx * n : (pidx + 1) * n] = sgn * A[pos] / safe[pos]
            row0 += 1
        if include_barrier:
            floor = 2.0 * self.opts.star_floor
            for pidx, p in enumerate(self.free_positions):
                if floor - mags[p] > 0.0:
                    J[row0, pidx * n : (pidx + 1) * n] = -A[p] / safe[p]
                row0 += 1
        return J

    # ---- acceptance ----

    def evaluate(self, x: np.ndarray):
        """(residual, min_star, demo_ok, witness) for a converged parameter vector."""
        A = self.assemble(x)
        mags = self._entry_mags(A)
        min_star = float(mags[self._star_idx].min()) if self.star_positions else 0.0
        demo_ok = True
        if self.demo_pairs:
            gaps = np.abs(mags[self._demo_a_idx] - mags[self._demo_b_idx])
            demo_ok = bool(gaps.max() <= DEMOCRACY_TOL)
        residual = self.constraint_residual(x)
        return residual, min_star, demo_ok, RepMatrix.from_components(self.field, A)


def _scalar_components(s: Scalar, ncomp: int) -> np.ndarray:
    if ncomp == 1:
        return np.array([s.value])
    if ncomp == 2:
        return np.array([s.value.real, s.value.imag])
    return np.array(s.value, dtype=float)


def _lbfgs(
    prob: Problem,
    x: np.ndarray,
    barrier_at: float | None = None,
    maxiter: int | None = None,
) -> np.ndarray:
    maxiter = maxiter or prob.opts.max_iters
    res = minimize(
        prob.loss_and_grad,
        x,
        args=(barrier_at,),
        jac=True,
        method="L-BFGS-B",
        options={
            "maxiter": maxiter,
            "maxfun": 2 * maxiter,
            "ftol": 1e-20,
            "gtol": 1e-14,
            "maxcor": 30,
        },
    )
    return res.x


def _polish(prob: Problem, x: np.ndarray) -> np.ndarray:
    """Gauss-Newton polish on the smooth constraint residuals (no barrier rows)."""
    residual = prob.constraint_residual(x)
    if prob.opts.residual_tol < residual <= 1e-2:
        polish = least_squares(
            lambda v: prob.residual_vector(v, include_barrier=False),
            x,
            jac=lambda v: prob.jacobian(v, include_barrier=False),
            method="trf",
            tr_solver="lsmr",
            xtol=1e-15,
            ftol=1e-15,
            gtol=1e-15,
            max_nfev=100,
        )
        if prob.constraint_residual(polish.x) < residual:
            x = polish.x
    return x


def _descend(prob: Problem, x: np.ndarray) -> np.ndarray:
    """One full descent: annealed L-BFGS, Gauss-Newton polish, sign-flip escapes.

    Descents can stall with some required entries pinned at the barrier hinge
    when their sign (or phase sector) is wrong; flipping one pinned entry at a
    time and re-descending resolves the common single-entry cases
    deterministically.
    """
    anneal = 0.5 / np.sqrt(prob.shape[0])
    if anneal > 2.0 * prob.opts.star_floor:
        x = _lbfgs(prob, x, barrier_at=anneal, maxiter=min(1500, prob.opts.max_iters))
    x = _lbfgs(prob, x)
    x = _polish(prob, x)

    # The barrier-free polish can park required entries just below the floor;
    # a short barrier run lifts them along the solution set, then a re-polish
    # renails the constraints.
    if prob.nfree:
        for _ in range(2):
            residual = prob.constraint_residual(x)
            free_mags = np.linalg.norm(x.reshape(prob.nfree, prob.ncomp), axis=1)
            if residual > prob.opts.residual_tol or free_mags.min() >= prob.opts.star_floor:
                break
            x = _lbfgs(prob, x, maxiter=800)
            x = _polish(prob, x)

    residual = prob.constraint_residual(x)
    if prob.opts.residual_tol < residual <= 1e-2 and prob.nfree:
        vals = x.reshape(prob.nfree, prob.ncomp)
        mags = np.linalg.norm(vals, axis=1)
        pinned = np.nonzero(mags < 3.0 * prob.opts.star_floor)[0]
        scale = 1.0 / np.sqrt(prob.shape[0])
        best_x, best_r = x, residual
        for k in pinned[:4]:
            trial = x.reshape(prob.nfree, prob.ncomp).copy()
            m = max(mags[k], 1e-12)
            trial[k] = -trial[k] / m * scale
            xt = _polish(prob, _lbfgs(prob, trial.ravel(), maxiter=min(2500, prob.opts.max_iters)))
            rt = prob.constraint_residual(xt)
            if rt < best_r:
                best_x, best_r = xt, rt
            if rt <= prob.opts.residual_tol:
                break
        x = best_x
    return x


def _phase_round(prob_c: Problem, A: np.ndarray) -> np.ndarray:
    """Gauge a complex solution towards the reals; return a REAL init vector.

    Row/column phases making every entry +-real satisfy a consistency system
    at doubled angles, which spectral synchronization solves: the top
    singular pair of conj(A*A) (elementwise square, so the sign ambiguity of
    "real" drops out, weighted by |A|^2) carries the doubled phases.
    """
    Z = A[..., 0] + 1j * A[..., 1]
    K = np.conj(Z * Z)
    U, _S, Vh = np.linalg.svd(K)
    p = U[:, 0]
    q = Vh[0, :].conj()
    p = np.where(np.abs(p) > 1e-12, p / np.abs(p), 1.0)
    q = np.where(np.abs(q) > 1e-12, q / np.abs(q), 1.0)
    phi = np.exp(0.5j * np.angle(p))
    psi = np.exp(-0.5j * np.angle(q))
    rounded = phi[:, None] * Z * psi[None, :]
    return np.real(rounded)[prob_c._free_idx].ravel()


def _relaxation_attempt(prob: Problem, rng: np.random.Generator) -> np.ndarray | None:
    """Solve the complex relaxation and round phases to signs (REAL only).

    Sign-rigid real landscapes trap plain descents; the complex problem is
    far easier, and when the pattern is realizable over the reals its
    solutions are real ones dressed with row/column phases, which the
    rounding strips.
    """
    from dataclasses import replace

    frozen_c = {
        pos: Scalar.cplx(s.value) for pos, s in (prob.opts.frozen or {}).items()
    }
    opts_c = replace(prob.opts, frozen=frozen_c, initial_guess=None)
    prob_c = Problem(prob.pattern, Field.COMPLEX, opts_c)
    xc = _descend(prob_c, prob_c.random_init(rng))
    if prob_c.constraint_residual(xc) > 1e-6:
        return None
    return _phase_round(prob_c, prob_c.assemble(xc))


def _run_restart(pattern: ZeroPattern, field: Field, opts: SolveOptions, idx: int) -> RestartResult:
    prob = Problem(pattern, field, opts)
    rng = np.random.default_rng([opts.seed, idx])
    best = None
    tries = max(1, opts.inner_tries)
    for attempt in range(tries):
        if idx == 0 and attempt == 0 and opts.initial_guess is not None:
            x = prob.guess_init()
        elif field is Field.REAL and attempt == tries - 1 and prob.nparams:
            x = _relaxation_attempt(prob, rng)
            if x is None:
                x = prob.random_init(rng)
        else:
            x = prob.random_init(rng)
        if prob.nparams:
            x = _descend(prob, x)
        residual, min_star, demo_ok, witness = prob.evaluate(x)
        found = residual <= opts.residual_tol and min_star >= opts.star_floor and demo_ok
        cand = RestartResult(index=idx, residual=residual, found=found, min_star=min_star, witness=witness)
        if best is None or (cand.found, -cand.residual) > (best.found, -best.residual):
            best = cand
        if found or not prob.nparams:
            break
    return best


def _restart_worker(payload):
    pattern_stars, field, opts, idx = payload
    return _run_restart(ZeroPattern(pattern_stars), field, opts, idx)


def find_representation(pattern: ZeroPattern, field: Field, opts: SolveOptions | None = None) -> SolveReport:
    """Multi-start search for an orthogonal representation of ``pattern``.

    Deterministic for fixed (pattern, field, options including seed): every
    restart owns the RNG stream derived from (seed, restart index), all
    restarts are evaluated, and the report keeps the minimal-residual restart
    (among successful ones when any succeed), ties broken by restart index.
    """
    opts = opts or SolveOptions()
    Problem(pattern, field, opts)  # validate inputs before spawning work
    indices = list(range(opts.restarts))
    if opts.jobs > 1 and len(indices) > 1:
        payloads = [(np.asarray(pattern.stars), field, opts, i) for i in indices]
        with ProcessPoolExecutor(max_workers=opts.jobs) as pool:
            results = list(pool.map(_restart_worker, payloads))
        results.sort(key=lambda r: r.index)
        if opts.stop_after_found:
            # Keep the prefix up to the first success: identical to what a
            # sequential early-stopping run evaluates.
            for i, r in enumerate(results):
                if r.found:
                    results = results[: i + 1]
                    break
    else:
        results = []
        for i in indices:
            r = _run_restart(pattern, field, opts, i)
            results.append(r)
            if opts.stop_after_found and r.found:
                break

    found = [r for r in results if r.found]
    pool_for_best = found if found else results
    best = min(pool_for_best, key=lambda r: (r.residual, r.index))
    status = "FOUND" if found else "EXHAUSTED"
    all_residuals = [r.residual for r in results]
    report = SolveReport(
        status=status,
        best_residual=best.residual,
        witness=best.witness if found else None,
        restart_residuals=all_residuals,
        min_star_magnitude=best.min_star,
        strongly_infeasible=(not found) and min(all_residuals, default=np.inf) > STRONG_INFEASIBILITY,
        restart_results=results if opts.keep_all else [],
        seed=opts.seed,
    )
    return report


# ---------------------------------------------------------------------------
# Completion to a square unitary
# ---------------------------------------------------------------------------


def complete_to_square(
    A: RepMatrix,
    seed: int = 0,
    min_entry: float = DEFAULT_STAR_FLOOR,
    input_tol: float = 1e-9,
    output_tol: float = 1e-8,
) -> RepMatrix:
    """Extend orthonormal columns to a square matrix with orthonormal columns.

    New columns are random vectors orthonormalized against all prior columns
    (two modified Gram-Schmidt passes).  A draw is rejected and redrawn when
    its residual norm is tiny or when any entry magnitude falls below
    ``min_entry``, so the completed block has a well-defined all-STAR pattern
    away from the verdict gap; 20 rejections for one column is an error.
    The first ``A.cols`` columns of the result are exactly A's.
    """
    if A.cols > A.rows:
        raise ValueError("cannot complete a matrix with more columns than rows")
    gram = A.gram()
    if A.tag is Field.RATIONAL:
        if not gram.is_identity(0.0):
            raise ValueError("input columns are not exactly orthonormal")
        if A.cols == A.rows:
            return A.copy()
        raise ValueError("rational completion is not supported; cast to a floating field")
    if not gram.is_identity(input_tol):
        raise ValueError("input columns are not orthonormal within tolerance")
    if A.cols == A.rows:
        return A.copy()

    r = A.rows
    ncomp = A.tag.ncomp
    rng = np.random.default_rng([seed, 0x5157])
    base = [A.to_components()[:, j, :] for j in range(A.cols)]

    # The final columns are nearly determined by the earlier draws, so a dirty
    # entry there cannot be fixed by redrawing that column alone; on a stuck
    # column the whole completion restarts with fresh randomness.
    out = None
    for _attempt in range(20):
        cols = list(base)
        stuck = False
        while len(cols) < r and not stuck:
            for retry in range(20):
                v = rng.standard_normal((r, ncomp))
                for _ in range(2):  # double MGS pass for orthogonality at 1e-8 scale
                    for u in cols:
                        coeff = np.einsum("ma,mb,abg->g", _conj2(u), v, MULT_TABLE[ncomp])
                        v = v - comp_mul(u, coeff[None, :])
                norm = float(np.sqrt(np.sum(v * v)))
                if norm < 1e-6:
                    continue
                v = v / norm
                if float(comp_abs(v).min()) < min_entry:
                    continue
                cols.append(v)
                break
            else:
                stuck = True
        if not stuck:
            out = np.stack(cols, axis=1)
            break
    if out is None:
        raise ValueError("square completion failed after 20 re-randomizations")
    U = RepMatrix.from_components(A.tag, out)
    if not U.gram().is_identity(output_tol):
        raise ValueError("completed matrix failed the unitarity check")
    return U


def _conj2(u):
    out = u.copy()
    out[:, 1:] = -out[:, 1:]
    return out


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------


@dataclass
class VerifyTols:
    zero_tol: float = DEFAULT_ZERO_TOL
    star_floor: float = DEFAULT_STAR_FLOOR
    orth_tol: float = 1e-9
    demo_tol: float = DEMOCRACY_TOL


@dataclass
class VerifyReport:
    pattern_ok: bool
    orth_ok: bool
    orth_residual: float
    max_offdiag: float
    demo_ok: bool
    demo_max_spread: float

    @property
    def ok(self) -> bool:
        return self.pattern_ok and self.orth_ok and self.demo_ok

    def to_json(self) -> dict:
        return {
            "pattern_ok": self.pattern_ok,
            "orth_ok": self.orth_ok,
            "orth_residual": self.orth_residual,
            "max_offdiag": self.max_offdiag,
            "demo_ok": self.demo_ok,
            "demo_max_spread": self.demo_max_spread,
            "ok": self.ok,
        }


def verify_witness(
    A: RepMatrix,
    p: ZeroPattern,
    democracies=(),
    tols: VerifyTols | None = None,
) -> VerifyReport:
    """Check pattern match, column orthogonality and democracies of a witness.

    Exact mode for RATIONAL matrices (no tolerances); the verdict record
    carries all three sub-results rather than raising.
    """
    tols = tols or VerifyTols()
    if (A.rows, A.cols) != (p.rows, p.cols):
        raise ValueError("matrix/pattern dimension mismatch")
    pattern_ok = matches_pattern(A, p, tols.zero_tol, tols.star_floor)

    G = A.gram()
    mags = G.magnitudes()
    sq = 0.0
    max_off = 0.0
    exact = A.tag is Field.RATIONAL
    for j in range(A.cols):
        for k in range(j + 1, A.cols):
            m = mags[j, k]
            sq += float(m) ** 2
            max_off = max(max_off, float(m))
    orth_residual = float(np.sqrt(sq))
    orth_ok = (max_off == 0.0) if exact else (orth_residual <= tols.orth_tol)

    demo_ok = True
    demo_spread = 0.0
    for d in democracies:
        demo_spread = max(demo_spread, float(democracy_spread(A, d)))
        if not democracy_satisfied(A, d, tols.demo_tol):
            demo_ok = False
    return VerifyReport(
        pattern_ok=pattern_ok,
        orth_ok=orth_ok,
        orth_residual=orth_residual,
        max_offdiag=max_off,
        demo_ok=demo_ok,
        demo_max_spread=demo_spread,
    )
