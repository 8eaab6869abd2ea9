"""Command-line interface.

Machine-readable JSON goes to stdout, human summaries to stderr.  Exit codes:
0 success / positive verdict, 1 negative verdict, 2 usage or parse error,
3 internal or pipeline error.  All randomness flows from --seed (default 0),
so identical invocations produce byte-identical stdout.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .fano import fano_matrix, fano_pattern, rigidity_probe
from .gadget import FixupMode, GadgetPolicy, expand
from .patterns import (
    bipartite_double,
    hermitian_double,
    parse_pattern,
    serialize_pattern,
)
from .scalars import Field, RepMatrix, Scalar
from .separators import PipelineError, build_separation
from .solver import SolveOptions, VerifyTols, find_representation, verify_witness

FIELD_LETTERS = {"R": Field.REAL, "C": Field.COMPLEX, "H": Field.QUATERNION}

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2
EXIT_INTERNAL = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        print(json.dumps({"error": "usage", "detail": message}, sort_keys=True))
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _emit(obj, summary: str | None = None) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))
    if summary:
        print(summary, file=sys.stderr)


def _fail(code: int, message: str, **extra) -> int:
    payload = {"error": message}
    payload.update(extra)
    print(json.dumps(payload, indent=2, sort_keys=True))
    print(f"error: {message}", file=sys.stderr)
    return code


def _read_pattern_file(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValueError(f"cannot read pattern file {path}: {exc}") from exc
    return parse_pattern(text)


def _read_matrix_file(path: str) -> RepMatrix:
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValueError(f"cannot read matrix file {path}: {exc}") from exc
    return RepMatrix.from_json(obj)


def _read_freeze_file(path: str) -> dict:
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValueError(f"cannot read freeze file {path}: {exc}") from exc
    tag = Field(obj["tag"])
    frozen = {}
    for row, col, enc in obj["entries"]:
        frozen[(int(row), int(col))] = Scalar.from_json(tag, enc)
    return frozen


def cmd_fano(args) -> int:
    try:
        if args.matrix:
            m = fano_matrix(args.p, allow_large=args.allow_large)
            _emit(m.to_json(), f"exact rational {args.p}x{args.p} matrix with orthonormal columns")
        else:
            pat = fano_pattern(args.p, allow_large=args.allow_large)
            _emit({"p": args.p, "pattern": pat.to_text()}, f"{args.p}x{args.p} residue pattern")
    except ValueError as exc:
        return _fail(EXIT_USAGE, str(exc))
    return EXIT_OK


def cmd_double(args) -> int:
    try:
        if args.pattern:
            cp = _read_pattern_file(args.pattern)
            doubled = bipartite_double(cp.pattern)
            _emit(
                {"rows": doubled.rows, "cols": doubled.cols, "pattern": doubled.to_text()},
                f"bipartite double: {doubled.rows}x{doubled.cols}",
            )
        else:
            m = _read_matrix_file(args.matrix)
            h = hermitian_double(m)
            _emit(h.to_json(), f"hermitian double: {h.rows}x{h.cols}")
    except ValueError as exc:
        return _fail(EXIT_USAGE, str(exc))
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        cp = _read_pattern_file(args.pattern)
        matrix = _read_matrix_file(args.matrix)
    except ValueError as exc:
        return _fail(EXIT_USAGE, str(exc))
    tols = VerifyTols(
        zero_tol=args.zero_tol,
        star_floor=args.star_floor,
        orth_tol=args.orth_tol,
        demo_tol=args.demo_tol,
    )
    try:
        verdict = verify_witness(matrix, cp.pattern, cp.democracies, tols)
    except ValueError as exc:
        return _fail(EXIT_USAGE, str(exc))
    _emit(verdict.to_json(), "verify: " + ("PASS" if verdict.ok else "FAIL"))
    return EXIT_OK if verdict.ok else EXIT_NEGATIVE


def cmd_search(args) -> int:
    try:
        cp = _read_pattern_file(args.pattern)
        frozen = _read_freeze_file(args.freeze) if args.freeze else None
        opts = SolveOptions(
            restarts=args.restarts,
            seed=args.seed,
            democracies=cp.democracies,
            frozen=frozen,
            unit_columns=not args.no_unit_columns,
            star_floor=args.star_floor,
            jobs=args.jobs,
            stop_after_found=not args.full_sweep,
        )
        report = find_representation(cp.pattern, FIELD_LETTERS[args.field], opts)
    except ValueError as exc:
        return _fail(EXIT_USAGE, str(exc))
    _emit(
        report.to_json(),
        f"search: {report.status} best_residual={report.best_residual:.3e}",
    )
    return EXIT_OK if report.found else EXIT_NEGATIVE


def cmd_rigidity(args) -> int:
    try:
        probe, _solves = rigidity_probe(
            args.p,
            FIELD_LETTERS[args.field],
            restarts=args.restarts,
            seed=args.seed,
            jobs=args.jobs,
            allow_large=args.allow_large,
        )
    except ValueError as exc:
        return _fail(EXIT_USAGE, str(exc))
    _emit(probe.to_json(), f"rigidity p={args.p} {args.field}: {probe.verdict}")
    return EXIT_OK if probe.verdict == "rigid-so-far" else EXIT_NEGATIVE


def cmd_gadget(args) -> int:
    try:
        cp = _read_pattern_file(getattr(args, "in"))
        policy = GadgetPolicy(FixupMode(args.policy), seed=args.seed)
        expansion = expand(cp, policy)
    except ValueError as exc:
        return _fail(EXIT_USAGE, str(exc))
    payload = expansion.to_json()
    if args.out:
        Path(args.out).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    _emit(
        payload,
        f"gadget: {cp.rows}x{cp.cols} -> {expansion.output.rows}x{expansion.output.cols}",
    )
    return EXIT_OK


def cmd_build_separator(args) -> int:
    field = FIELD_LETTERS[args.field]
    policy = GadgetPolicy(FixupMode(args.policy), seed=args.seed)
    try:
        case = build_separation(field, policy, seed=args.seed, jobs=args.jobs)
    except PipelineError as exc:
        return _fail(EXIT_INTERNAL, str(exc), stage=exc.stage)
    except ValueError as exc:
        return _fail(EXIT_USAGE, str(exc))

    report = case.report()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "pattern.txt").write_text(case.square_pattern.to_text() + "\n")
    (out / "witness.json").write_text(
        json.dumps(case.witness.to_json(), indent=2, sort_keys=True) + "\n"
    )
    (out / "obstruction.json").write_text(
        json.dumps(case.obstruction, indent=2, sort_keys=True) + "\n"
    )
    (out / "expansion.json").write_text(
        json.dumps(case.expansion.to_json(), indent=2, sort_keys=True) + "\n"
    )
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    _emit(
        report,
        f"separation {case.lower_field.value} < {case.upper_field.value}: "
        f"n={case.achieved_n} (target {case.target_n}), bundle in {out}",
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="zeropat", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fano", help="residue pattern or exact rational matrix")
    p.add_argument("--p", type=int, default=7)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--matrix", action="store_true")
    group.add_argument("--pattern", action="store_true")
    p.add_argument("--allow-large", action="store_true")
    p.set_defaults(func=cmd_fano)

    p = sub.add_parser("double", help="bipartite double of a pattern, or hermitian double of a matrix")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--pattern", metavar="FILE")
    group.add_argument("--matrix", metavar="FILE")
    p.set_defaults(func=cmd_double)

    p = sub.add_parser("verify", help="check a matrix against a constrained pattern")
    p.add_argument("--pattern", required=True, metavar="FILE")
    p.add_argument("--matrix", required=True, metavar="FILE")
    p.add_argument("--zero-tol", type=float, default=1e-7)
    p.add_argument("--star-floor", type=float, default=1e-3)
    p.add_argument("--orth-tol", type=float, default=1e-9)
    p.add_argument("--demo-tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("search", help="multi-start search for an orthogonal representation")
    p.add_argument("--pattern", required=True, metavar="FILE")
    p.add_argument("--field", required=True, choices=sorted(FIELD_LETTERS))
    p.add_argument("--restarts", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--freeze", metavar="FILE", help="JSON {tag, entries: [[row, col, scalar], ...]}")
    p.add_argument("--star-floor", type=float, default=1e-3)
    p.add_argument("--no-unit-columns", action="store_true")
    p.add_argument("--full-sweep", action="store_true", help="evaluate every restart")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("rigidity", help="probe uniqueness of residue-pattern representations")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--field", required=True, choices=sorted(FIELD_LETTERS))
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--allow-large", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_rigidity)

    p = sub.add_parser("gadget", help="expand democracies into a pure zero-pattern")
    p.add_argument("--in", required=True, metavar="FILE")
    p.add_argument("--policy", choices=["safe", "minimal"], default="safe")
    p.add_argument("--out", metavar="FILE")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gadget)

    p = sub.add_parser("build-separator", help="construct a separating square pattern bundle")
    p.add_argument("--field", required=True, choices=sorted(FIELD_LETTERS))
    p.add_argument("--policy", choices=["safe", "minimal"], default="safe")
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_build_separator)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE
    try:
        return args.func(args)
    except ValueError as exc:
        return _fail(EXIT_USAGE, str(exc))
    except Exception as exc:  # pragma: no cover - defensive
        return _fail(EXIT_INTERNAL, f"internal error: {exc}")


if __name__ == "__main__":
    sys.exit(main())
