"""Command-line front door.

Reports are JSON on stdout, one object per invocation, deterministic for
fixed argv, input files and seeds.  Human-readable tables go to stderr
under --pretty.  Exit codes: 0 success (a negative cube check is a result,
not an error), 1 domain errors, 2 malformed input or usage.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .algebra import from_table, validate_axioms
from .dynamics import (
    BRUTE_FORCE_DIM_LIMIT,
    EXACT_OPERATOR_DIM_LIMIT,
    ai_closed_form,
    ai_recurrence,
    count_xi_bruteforce,
    mu3_mass_identity_check,
    phi_conjugation_check,
    phi_fixed_points,
)
from .errors import InputFormatError, MedlabError, NotMedianClosed
from .generators import GeneratorSpec
from .io import (
    algebra_payload,
    dump_json,
    file_digest,
    load_algebra,
    load_group,
    load_measure,
    payload_to_algebra,
)
from .measures import NotCubical, classify_balanced, fixed_point_scan, is_balanced
from .groups import invariant_balanced_search, select_invariant_cube
from .walls import NotCube, detect_cube, walls_of

FORMAT_VERSION = 1
CONJUGATION_GRID = ("0", "1/5", "1/3", "1/2", "3/4", "1")


def _report(args, command: str, input_paths, results: dict) -> None:
    envelope = {
        "command": command,
        "inputs": {str(p): file_digest(p) for p in input_paths},
        "results": results,
        "versions": {"tool": __version__, "format": FORMAT_VERSION},
    }
    print(json.dumps(envelope, sort_keys=True))


def _pretty(args, lines) -> None:
    if getattr(args, "pretty", False):
        for line in lines:
            print(line, file=sys.stderr)


def _record_dict(record) -> dict:
    return {
        "start_seed": list(record.start_seed),
        "kind": record.kind,
        "converged": record.converged,
        "iterations": record.iterations,
        "residual": record.residual,
        "snapped": record.snapped,
        "cubical": record.cubical,
        "cube_dim": record.cube_dim,
    }


def _distinct_dict(measure, verdict) -> dict:
    entry = {
        "weights": {
            measure.algebra.point_string(i): str(w)
            for i, w in enumerate(measure.weights)
            if w
        },
        "cubical": not isinstance(verdict, NotCubical),
    }
    if entry["cubical"]:
        entry["cube_dim"] = verdict.dim
        entry["cube_points"] = list(verdict.cube.parent_points())
    else:
        entry["witness"] = [str(x) for x in verdict.witness]
    return entry


def _print_csv(header, rows) -> None:
    print(",".join(header))
    for row in rows:
        print(",".join(str(v) for v in row))


# -- commands -------------------------------------------------------------------


def cmd_validate(args) -> int:
    path = Path(args.file)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputFormatError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputFormatError(f"{path} is not valid JSON: {exc}") from exc
    if isinstance(payload, dict) and "table" in payload:
        violation = validate_axioms(payload["table"])
        if violation is not None:
            results = {
                "kind": "table",
                "valid": False,
                "axiom": violation.axiom,
                "witness": list(violation.witness),
            }
        else:
            algebra, iso = from_table(payload["table"])
            results = {
                "kind": "table",
                "valid": True,
                "points": len(algebra),
                "embedding": algebra_payload(algebra),
                "iso": list(iso),
            }
    else:
        try:
            algebra = payload_to_algebra(payload, origin=str(path))
        except InputFormatError as exc:
            if "majority" in str(exc):
                # structurally fine but not median-closed: report, do not fail
                results = {"kind": "algebra", "valid": False, "reason": str(exc)}
                _report(args, "validate", [path], results)
                return 0
            raise
        results = {
            "kind": "algebra",
            "valid": True,
            "points": len(algebra),
            "ambient_dim": algebra.ambient_dim,
            "reduced": algebra.is_reduced,
        }
    _report(args, "validate", [path], results)
    _pretty(args, [f"{path}: {'OK' if results['valid'] else 'INVALID'}"])
    return 0


def cmd_walls(args) -> int:
    algebra = load_algebra(args.file)
    walls = walls_of(algebra)
    entries = []
    for wall in walls:
        side_a = sorted(wall.negative)
        side_b = sorted(wall.positive)
        entries.append(
            {
                "id": wall.index,
                "sizes": [len(side_a), len(side_b)],
                "side_a": [algebra.point_string(i) for i in side_a],
                "side_b": [algebra.point_string(i) for i in side_b],
            }
        )
    results = {
        "points": len(algebra),
        "ambient_dim": algebra.ambient_dim,
        "reduced": algebra.is_reduced,
        "count": len(walls),
        "walls": entries,
    }
    _report(args, "walls", [args.file], results)
    _pretty(
        args,
        [f"{len(walls)} walls"]
        + [f"  wall {e['id']}: sizes {e['sizes'][0]}|{e['sizes'][1]}" for e in entries],
    )
    return 0


def cmd_cube(args) -> int:
    algebra = load_algebra(args.file)
    verdict = detect_cube(algebra)
    if isinstance(verdict, NotCube):
        results = {
            "cube": False,
            "reason": verdict.reason,
            "witness": list(verdict.witness),
        }
        _pretty(args, [f"not a cube: {verdict.reason} {verdict.witness}"])
    else:
        results = {
            "cube": True,
            "dim": verdict.dim,
            "wall_ids": [w.index for w in verdict.walls],
            "iso": {
                verdict.sub.point_string(i): verdict.iso.target.point_string(verdict.iso.map[i])
                for i in range(len(verdict.sub))
            },
        }
        _pretty(args, [f"cube of dimension {verdict.dim}"])
    _report(args, "cube", [args.file], results)
    return 0


def cmd_balance(args) -> int:
    algebra = load_algebra(args.file)
    scan = fixed_point_scan(
        algebra,
        starts=args.starts,
        seed=args.seed,
        tol=args.tol,
        max_iter=args.max_iter,
        jobs=args.jobs,
    )
    records = [_record_dict(r) for r in scan.records]
    results = {
        "starts": args.starts,
        "seed": args.seed,
        "tol": args.tol,
        "max_iter": args.max_iter,
        "snap_rate": scan.snap_rate,
        "records": records,
        "distinct": [_distinct_dict(m, v) for m, v in scan.results],
    }
    if args.csv:
        header = ["start_seed", "converged", "iterations", "residual", "snapped", "cubical", "cube_dim"]
        rows = [
            [
                f"{r['start_seed'][0]}:{r['start_seed'][1]}",
                r["converged"],
                r["iterations"],
                r["residual"],
                r["snapped"],
                r["cubical"],
                r["cube_dim"],
            ]
            for r in records
        ]
        _print_csv(header, rows)
    else:
        _report(args, "balance", [args.file], results)
    _pretty(
        args,
        [
            f"{args.starts} starts, snap rate {scan.snap_rate:.2f}, "
            f"{len(scan.results)} distinct measures, "
            f"{len(scan.counterexamples())} counterexamples"
        ],
    )
    return 0


def cmd_classify(args) -> int:
    measure = load_measure(args.file)
    if not is_balanced(measure):
        raise MedlabError(f"{args.file}: measure is not balanced; nothing to classify")
    verdict = classify_balanced(measure.algebra, measure)
    if isinstance(verdict, NotCubical):
        print(
            "FALSIFICATION CANDIDATE: balanced measure did not classify as cubical",
            file=sys.stderr,
        )
        results = {
            "balanced": True,
            "cubical": False,
            "witness": [str(x) for x in verdict.witness],
        }
    else:
        results = {
            "balanced": True,
            "cubical": True,
            "cube_dim": verdict.dim,
            "support": list(verdict.cube.parent_points()),
        }
        _pretty(args, [f"cubical, dimension {verdict.dim}"])
    _report(args, "classify", [args.file], results)
    return 0


def cmd_formulas(args) -> int:
    rows = []
    for n in range(1, args.n_max + 1):
        recurrence = ai_recurrence(n)
        closed = ai_closed_form(n)
        brute = count_xi_bruteforce(n) if n <= BRUTE_FORCE_DIM_LIMIT else None
        methods = [recurrence.a, closed.a] + ([brute.a] if brute else [])
        agree = len(set(methods)) == 1
        fixed = [str(r) for r in phi_fixed_points(n)]
        conjugation = None
        if n <= min(5, EXACT_OPERATOR_DIM_LIMIT):
            conjugation = {
                "t_grid": list(CONJUGATION_GRID),
                "ok": all(
                    phi_conjugation_check(n, Fraction(t))
                    and mu3_mass_identity_check(n, Fraction(t))
                    for t in CONJUGATION_GRID
                ),
            }
        rows.append(
            {
                "n": n,
                "counts": {
                    "brute_force": list(brute.a) if brute else None,
                    "recurrence": list(recurrence.a),
                    "closed_form": list(closed.a),
                },
                "agree": agree,
                "total": sum(recurrence.a),
                "fixed_points": fixed,
                "conjugation": conjugation,
            }
        )
    results = {"n_max": args.n_max, "rows": rows}
    if args.csv:
        header = [
            "n", "a0", "a1", "a2", "a3", "agree", "total", "fixed_points", "conjugation_ok",
        ]
        csv_rows = [
            [
                row["n"],
                *row["counts"]["recurrence"],
                row["agree"],
                row["total"],
                ";".join(row["fixed_points"]),
                row["conjugation"]["ok"] if row["conjugation"] else "",
            ]
            for row in rows
        ]
        _print_csv(header, csv_rows)
    else:
        _report(args, "formulas", [], results)
    _pretty(
        args,
        [
            f"n={row['n']}: counts {row['counts']['recurrence']} agree={row['agree']} "
            f"fixed={row['fixed_points']}"
            for row in rows
        ],
    )
    return 0


def cmd_act(args) -> int:
    algebra = load_algebra(args.algebra)
    group = load_group(args.group, algebra=algebra)
    scan = invariant_balanced_search(
        algebra,
        group,
        starts=args.starts,
        seed=args.seed,
        tol=args.tol,
        max_iter=args.max_iter,
        jobs=args.jobs,
    )
    certificate = select_invariant_cube(scan, group)
    records = []
    for record in scan.records:
        entry = _record_dict(record)
        entry["invariant"] = record.accepted
        records.append(entry)
    results = {
        "group_order": len(group),
        "starts": args.starts,
        "seed": args.seed,
        "snap_rate": scan.snap_rate,
        "records": records,
        "distinct": [_distinct_dict(m, v) for m, v in scan.results],
        "invariant_cube": {
            "dim": certificate.dim,
            "points": list(certificate.parent_points()),
        },
    }
    _report(args, "act", [args.algebra, args.group], results)
    _pretty(
        args,
        [
            f"group order {len(group)}; invariant cube of dimension {certificate.dim} "
            f"on {list(certificate.parent_points())}"
        ],
    )
    return 0


def cmd_gen(args) -> int:
    if args.kind == "hypercube":
        spec = GeneratorSpec("hypercube", {"n": args.n})
    elif args.kind == "tree":
        edges = []
        for chunk in args.edges.split(","):
            chunk = chunk.strip()
            if not chunk:
                continue
            try:
                u, v = chunk.split("-")
                edges.append((int(u), int(v)))
            except ValueError as exc:
                raise InputFormatError(f"bad edge {chunk!r}; expected 'u-v'") from exc
        spec = GeneratorSpec("tree", {"edges": edges})
    elif args.kind == "grid":
        spec = GeneratorSpec("grid", {"a": args.a, "b": args.b})
    elif args.kind == "random":
        spec = GeneratorSpec("random_subalgebra", {"d": args.d, "k": args.k}, seed=args.seed)
    else:  # pragma: no cover - argparse restricts choices
        raise InputFormatError(f"unknown generator {args.kind!r}")
    algebra = spec.build()
    payload = algebra_payload(algebra, meta={"generator": spec.describe()})
    text = dump_json(payload)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        results = {
            "written": str(args.output),
            "points": len(algebra),
            "ambient_dim": algebra.ambient_dim,
            "digest": file_digest(args.output),
        }
        _report(args, "gen", [args.output], results)
    else:
        sys.stdout.write(text)
    _pretty(args, [f"{algebra.name or args.kind}: {len(algebra)} points"])
    return 0


# -- parser ---------------------------------------------------------------------


def _add_common(sub) -> None:
    sub.add_argument("--pretty", action="store_true", help="human summary on stderr")


def _add_search_options(sub) -> None:
    sub.add_argument("--starts", type=int, default=100, help="number of iteration starts")
    sub.add_argument("--seed", type=int, default=0, help="base seed (default 0, never time-based)")
    sub.add_argument("--tol", type=float, default=1e-12, help="iteration stop tolerance")
    sub.add_argument("--max-iter", type=int, default=10_000, help="iteration cap per start")
    sub.add_argument("--jobs", type=int, default=1, help="worker threads; output order is canonical")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="medlab",
        description="Exact toolkit for finite median algebras, walls, cubes and balanced measures.",
    )
    parser.add_argument("--version", action="version", version=f"medlab {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("validate", help="validate an algebra file or a ternary table")
    p.add_argument("file")
    _add_common(p)
    p.set_defaults(func=cmd_validate)

    p = commands.add_parser("walls", help="enumerate walls of an algebra")
    p.add_argument("file")
    _add_common(p)
    p.set_defaults(func=cmd_walls)

    p = commands.add_parser("cube", help="certify an algebra as a cube or explain why not")
    p.add_argument("file")
    _add_common(p)
    p.set_defaults(func=cmd_cube)

    p = commands.add_parser("balance", help="seeded fixed-point search for balanced measures")
    p.add_argument("file")
    _add_search_options(p)
    p.add_argument("--csv", action="store_true", help="per-start rows as CSV instead of JSON")
    _add_common(p)
    p.set_defaults(func=cmd_balance)

    p = commands.add_parser("classify", help="certify a balanced measure as uniform on a cube")
    p.add_argument("file", help="measure file (algebra inline or by path)")
    _add_common(p)
    p.set_defaults(func=cmd_classify)

    p = commands.add_parser("formulas", help="triple counts, fixed points, conjugation checks")
    p.add_argument("--n-max", type=int, default=7)
    p.add_argument("--csv", action="store_true", help="one CSV row per dimension")
    _add_common(p)
    p.set_defaults(func=cmd_formulas)

    p = commands.add_parser("act", help="invariant cube under a finite group action")
    p.add_argument("algebra")
    p.add_argument("group")
    _add_search_options(p)
    _add_common(p)
    p.set_defaults(func=cmd_act)

    p = commands.add_parser("gen", help="generate corpus algebras")
    kinds = p.add_subparsers(dest="kind", required=True)
    ph = kinds.add_parser("hypercube")
    ph.add_argument("n", type=int)
    pt = kinds.add_parser("tree")
    pt.add_argument("--edges", required=True, help="comma-separated edges, e.g. '0-1,1-2'")
    pg = kinds.add_parser("grid")
    pg.add_argument("a", type=int)
    pg.add_argument("b", type=int)
    pr = kinds.add_parser("random")
    pr.add_argument("--d", type=int, required=True)
    pr.add_argument("--k", type=int, required=True)
    pr.add_argument("--seed", type=int, default=0)
    for sub in (ph, pt, pg, pr):
        sub.add_argument("-o", "--output", default=None)
        _add_common(sub)
        sub.set_defaults(func=cmd_gen)
    p.set_defaults(kind=None)

    return parser


def run(argv=None) -> int:
    """Parse argv and execute; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except InputFormatError as exc:
        print(f"medlab: invalid input: {exc}", file=sys.stderr)
        return 2
    except MedlabError as exc:
        print(f"medlab: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
