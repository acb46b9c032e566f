"""Command-line interface.

Exit codes: 0 success, 1 verification/validation failure, 2 usage or
configuration error, 3 resource limit exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import fields

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import encoder, matrix, pipeline, proof as proofmod, sat, symmetry
from .cnf import __version__, read_dimacs, var_of, write_dimacs
from .errors import Plane15Error, ResourceLimit

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3


def _load_fixture(path: str | None, propagate: bool = True) -> matrix.PartialMatrix:
    if path is None:
        return matrix.default_fixture(propagated=propagate)
    with open(path) as f:
        m = matrix.load_fixture(f.read())
    if propagate:
        m = matrix.propagate_forced_zeros(m).matrix
    return m


def _variant(name: str) -> encoder.EncodingVariant:
    return encoder.EncodingVariant(name)


# ----------------------------------------------------------------------


def cmd_fixture_validate(args) -> int:
    m = _load_fixture(args.fixture, propagate=not args.no_propagate)
    report = matrix.validate_structure(m)
    if args.json:
        print(json.dumps(report.to_json_dict(), indent=2))
    else:
        print(report.to_text())
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_encode(args) -> int:
    m = _load_fixture(args.fixture)
    cnf = encoder.assemble(m, _variant(args.variant), max_row=args.rows)
    if args.output:
        write_dimacs(cnf, args.output)
    else:
        write_dimacs(cnf, sys.stdout)
    if args.stats:
        stats = encoder.statistics(cnf, _variant(args.variant))
        payload = {"statistics": stats}
        if args.rows == 51:
            payload["reference"] = encoder.reference_comparison(stats)
        print(json.dumps(payload, indent=2), file=sys.stderr)
    return EXIT_OK


def cmd_solve(args) -> int:
    if args.cnf:
        with open(args.cnf) as f:
            cnf = read_dimacs(f)
    else:
        m = _load_fixture(args.fixture)
        cnf = encoder.assemble(m, _variant(args.variant), max_row=args.rows)
    cfg = sat.SolverConfig(
        seed=args.seed, max_conflicts=args.max_conflicts, max_seconds=args.max_seconds
    )
    sink = sat.DrupSink(args.proof) if args.proof else None
    solver = sat.Solver(cnf, config=cfg, proof=sink)
    try:
        outcome = solver.solve(assumptions=args.assume)
    finally:
        if sink:
            sink.close()
    result = {"status": outcome.status.value, "conflicts": solver.conflicts}
    if outcome.status is sat.Status.SAT and args.model:
        result["model"] = list(outcome.model)
    if outcome.status is sat.Status.UNSAT_UNDER_ASSUMPTIONS:
        result["core"] = list(outcome.core)
    print(json.dumps(result, indent=2))
    return EXIT_OK


class _Limit(Exception):
    pass


def cmd_enumerate(args) -> int:
    m = _load_fixture(args.fixture)
    cnf = encoder.assemble(m, _variant(args.variant), max_row=27)
    projection = tuple(
        sorted(var_of(r, c) for r, c in m.unknown_cells() if r <= 27)
    )
    found = []
    if args.symmetry:
        group = symmetry.automorphisms(m)
        stab = symmetry.stabilizer(group, 1)
        records = []

        def on_model(projected):
            comp = pipeline.Pipeline.completion_from_model(projected)
            records.append(symmetry.orbit(stab, comp))
            if args.limit and len(records) >= args.limit:
                raise _Limit
            return symmetry.blocking_clauses(stab, comp)

        hook = sat.EnumerationHook(projection=projection, on_model=on_model)
        try:
            sat.Solver(cnf, config=sat.SolverConfig(seed=args.seed)).enumerate(hook)
        except _Limit:
            pass
        out = {
            "inequivalent": len(records),
            "total_completions": sum(r.orbit_size for r in records),
            "truncated": bool(args.limit and len(records) >= args.limit),
        }
        if args.completions:
            out["representatives"] = [
                r.representative.to_json_list() for r in records
            ]
        print(json.dumps(out, indent=2))
    else:

        def on_model(projected):
            found.append(projected)
            if args.limit and len(found) >= args.limit:
                raise _Limit
            return [tuple(-l for l in projected)]

        hook = sat.EnumerationHook(projection=projection, on_model=on_model)
        try:
            sat.Solver(cnf, config=sat.SolverConfig(seed=args.seed)).enumerate(hook)
        except _Limit:
            pass
        out = {
            "total_completions": len(found),
            "truncated": bool(args.limit and len(found) >= args.limit),
        }
        if args.completions:
            out["completions"] = [
                pipeline.Pipeline.completion_from_model(p).to_json_list()
                for p in found
            ]
        print(json.dumps(out, indent=2))
    return EXIT_OK


def _config_from_args(args) -> pipeline.RunConfig:
    cfg = pipeline.RunConfig()
    if args.config:
        with open(args.config, "rb") as f:
            data = tomllib.load(f)
        known = {f.name for f in fields(pipeline.RunConfig)}
        unknown = set(data) - known
        if unknown:
            raise Plane15Error(f"unknown config keys: {sorted(unknown)}")
        cfg = pipeline.RunConfig(**data)
    if args.repro:
        cfg.rows = 51
        cfg.symmetry = True
        cfg.phase2_mode = "both"
        cfg.run_witness = True
    for name in ("rows", "variant", "phase2_mode", "parallelism", "seed",
                 "max_conflicts", "max_seconds", "output_dir"):
        v = getattr(args, name, None)
        if v is not None:
            setattr(cfg, name, v)
    if args.no_symmetry:
        cfg.symmetry = False
    if args.baseline:
        cfg.run_baseline = True
    if args.no_witness:
        cfg.run_witness = False
    cfg.validate()
    return cfg


def cmd_pipeline(args) -> int:
    try:
        cfg = _config_from_args(args)
    except Plane15Error as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_USAGE
    m = _load_fixture(args.fixture)
    p = pipeline.Pipeline(cfg, m)
    report = p.run()
    print(json.dumps({"output_dir": p.out_dir}, indent=2))
    failures = []
    mono = report.data.get("phase2_monolithic")
    if mono:
        if mono["status"] == "budget_exhausted":
            return EXIT_RESOURCE
        if mono["verification"] and mono["verification"]["verdict"] != "verified":
            failures.append("monolithic proof not verified")
    inc = report.data.get("phase2_incremental")
    if inc and inc["sat_counterexamples"]:
        failures.append("a completion extends to 51 rows")
    base = report.data.get("baseline")
    if base and base["status"] == "budget_exhausted":
        return EXIT_RESOURCE
    if failures:
        print("; ".join(failures), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_check_proof(args) -> int:
    with open(args.cnf) as f:
        cnf = read_dimacs(f)
    report = proofmod.check_drup(cnf, proofmod.iter_drup(args.proof))
    print(json.dumps(report.to_json_dict(), indent=2))
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_show_witness(args) -> int:
    with open(args.witness) as f:
        m = matrix.load_fixture(f.read())
    report = matrix.validate_structure(m)
    fixture = _load_fixture(args.fixture)
    completion_cells = [
        [i, j]
        for i in range(22, 28)
        for j in range(16, 76)
        if m.char(i, j) == "1" and fixture.char(i, j) == "."
    ]
    if args.json:
        print(
            json.dumps(
                {
                    "valid": report.ok,
                    "rows": list(m.rows),
                    "completion": completion_cells,
                },
                indent=2,
            )
        )
    else:
        for row in m.rows:
            print(row)
        print()
        print("valid:", report.ok)
        print("completion cells:", completion_cells)
    return EXIT_OK if report.ok else EXIT_FAIL


# ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="plane15",
        description="Search for and certify nonexistence of weight-15 codewords "
        "in a projective plane of order ten.",
    )
    ap.add_argument("--version", action="version", version=f"plane15 {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_fixture(p):
        p.add_argument("--fixture", help="path to a fixture file (default: embedded)")

    p = sub.add_parser("fixture-validate", help="validate the incidence fixture")
    add_fixture(p)
    p.add_argument("--no-propagate", action="store_true",
                   help="skip forced-zero propagation before validating")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_fixture_validate)

    p = sub.add_parser("encode", help="emit a DIMACS CNF instance")
    add_fixture(p)
    p.add_argument("--rows", type=int, default=51, choices=(27, 45, 51))
    p.add_argument("--variant", default=encoder.DEFAULT_VARIANT.value,
                   choices=[v.value for v in encoder.EncodingVariant])
    p.add_argument("-o", "--output", help="output path (default: stdout)")
    p.add_argument("--stats", action="store_true",
                   help="print statistics JSON to stderr")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("solve", help="solve an instance with the embedded solver")
    add_fixture(p)
    p.add_argument("--rows", type=int, default=51, choices=(27, 45, 51))
    p.add_argument("--variant", default=encoder.DEFAULT_VARIANT.value,
                   choices=[v.value for v in encoder.EncodingVariant])
    p.add_argument("--cnf", help="solve this DIMACS file instead of encoding")
    p.add_argument("--assume", type=int, nargs="*", default=(),
                   help="assumption literals")
    p.add_argument("--proof", help="write a DRUP proof here")
    p.add_argument("--model", action="store_true", help="print the model if SAT")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-conflicts", type=int)
    p.add_argument("--max-seconds", type=float)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("enumerate", help="enumerate 27-row completions")
    add_fixture(p)
    p.add_argument("--variant", default=encoder.DEFAULT_VARIANT.value,
                   choices=[v.value for v in encoder.EncodingVariant])
    p.add_argument("--symmetry", action=argparse.BooleanOptionalAction, default=True,
                   help="enumerate orbits instead of raw completions")
    p.add_argument("--limit", type=int, help="stop after this many results")
    p.add_argument("--completions", action="store_true",
                   help="include the completions in the output")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("pipeline", help="run the full pipeline")
    add_fixture(p)
    p.add_argument("--config", help="TOML file mirroring the run configuration")
    p.add_argument("--repro", action="store_true",
                   help="preset reproducing the published computation "
                   "(51 rows, symmetry, both phase-2 modes, witness)")
    p.add_argument("--rows", type=int, choices=(27, 45, 51))
    p.add_argument("--variant", choices=[v.value for v in encoder.EncodingVariant])
    p.add_argument("--phase2-mode", dest="phase2_mode",
                   choices=("incremental", "monolithic", "both"))
    p.add_argument("--parallelism", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--max-conflicts", dest="max_conflicts", type=int)
    p.add_argument("--max-seconds", dest="max_seconds", type=float)
    p.add_argument("--output-dir", dest="output_dir",
                   help="base output directory (or set PLANE15_OUT)")
    p.add_argument("--no-symmetry", action="store_true")
    p.add_argument("--baseline", action="store_true",
                   help="also run the symmetry-free baseline refutation")
    p.add_argument("--no-witness", action="store_true")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("check-proof", help="verify a DRUP proof against a CNF")
    p.add_argument("cnf")
    p.add_argument("proof")
    p.set_defaults(func=cmd_check_proof)

    p = sub.add_parser("show-witness", help="display and validate a witness matrix")
    add_fixture(p)
    p.add_argument("witness")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_show_witness)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ResourceLimit as e:
        print(f"resource limit: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (tomllib.TOMLDecodeError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Plane15Error as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
