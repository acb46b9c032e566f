"""End-to-end orchestration: orbit enumeration, extension refutation,
baseline refutation, and the 45-row witness.

Stages write their artifacts (DIMACS instances, completions JSON, DRUP
proofs, report) into a content-addressed output directory so a run is
fully auditable.  The report deliberately excludes wall-clock numbers
(they go to a separate timings file) so that two runs with the same
seed and configuration produce byte-identical reports.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

from . import encoder, matrix, proof as proofmod, sat, symmetry
from .cnf import Cnf, TAG_BLOCKING, content_hash, var_of, write_dimacs
from .errors import CrossCheckMismatch, Plane15Error, ResourceLimit
from .matrix import PartialMatrix, validate_structure

SCHEMA_VERSION = 1

EXPECTED_TOTAL_COMPLETIONS = 42496
EXPECTED_INEQUIVALENT = 1021
EXPECTED_BLOCKING = EXPECTED_TOTAL_COMPLETIONS - EXPECTED_INEQUIVALENT  # 41475
EXPECTED_GROUP_ORDER = 720
EXPECTED_STABILIZER_ORDER = 48


@dataclass
class RunConfig:
    rows: int = 51
    variant: str = encoder.DEFAULT_VARIANT.value
    symmetry: bool = True
    phase2_mode: str = "both"  # "incremental" | "monolithic" | "both"
    parallelism: int = 1
    seed: int = 0
    max_conflicts: int | None = None
    max_seconds: float | None = None
    output_dir: str = "out"
    run_baseline: bool = False
    run_witness: bool = True

    def validate(self) -> None:
        problems = []
        if self.rows not in (27, 45, 51):
            problems.append(f"rows must be 27, 45 or 51, got {self.rows}")
        try:
            encoder.EncodingVariant(self.variant)
        except ValueError:
            problems.append(f"unknown variant {self.variant!r}")
        if self.phase2_mode not in ("incremental", "monolithic", "both"):
            problems.append(f"unknown phase2_mode {self.phase2_mode!r}")
        if self.parallelism < 1:
            problems.append("parallelism must be >= 1")
        if problems:
            raise Plane15Error("; ".join(problems))

    def solver_config(self) -> sat.SolverConfig:
        return sat.SolverConfig(
            seed=self.seed,
            max_conflicts=self.max_conflicts,
            max_seconds=self.max_seconds,
        )


@dataclass
class PipelineReport:
    data: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(self.data, indent=2, sort_keys=True) + "\n"

    def timings_json(self) -> str:
        return json.dumps(self.timings, indent=2, sort_keys=True) + "\n"


def _config_digest(cfg: RunConfig, fixture_text: str) -> str:
    blob = json.dumps(asdict(cfg), sort_keys=True) + fixture_text
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


class Pipeline:
    def __init__(self, cfg: RunConfig, m: PartialMatrix | None = None):
        cfg.validate()
        self.cfg = cfg
        self.m = m or matrix.default_fixture()
        self.fixture_text = matrix.serialize(self.m)
        self.variant = encoder.EncodingVariant(cfg.variant)
        digest = _config_digest(cfg, self.fixture_text)
        self.out_dir = os.path.join(
            os.environ.get("PLANE15_OUT", cfg.output_dir), digest
        )
        os.makedirs(self.out_dir, exist_ok=True)
        self.report = PipelineReport()
        self.report.data["schema_version"] = SCHEMA_VERSION
        self.report.data["fixture_hash"] = content_hash(self.fixture_text)
        self.report.data["config"] = asdict(cfg)
        self._group = None
        self._stab = None

    # ------------------------------------------------------------------

    def _path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def _timed(self, stage: str, fn):
        t0 = time.monotonic()
        try:
            return fn()
        finally:
            self.timings_record(stage, time.monotonic() - t0)

    def timings_record(self, stage: str, seconds: float) -> None:
        self.report.timings[stage] = round(seconds, 3)

    def cnf_for_rows(self, rows: int) -> Cnf:
        return encoder.assemble(self.m, self.variant, max_row=rows)

    def group(self) -> symmetry.SymmetryGroup:
        if self._group is None:
            self._group = self._timed(
                "automorphisms", lambda: symmetry.automorphisms(self.m)
            )
            self._stab = symmetry.stabilizer(self._group, 1)
            self.report.data["group_order"] = self._group.order
            self.report.data["stabilizer_order"] = self._stab.order
        return self._group

    def stabilizer(self) -> symmetry.SymmetryGroup:
        self.group()
        return self._stab

    # ------------------------------------------------------------------
    # stage: encoding statistics

    def encode_stage(self) -> dict:
        def run():
            cnf = self.cnf_for_rows(self.cfg.rows)
            stats = encoder.statistics(cnf, self.variant)
            path = self._path(f"instance_{self.cfg.rows}.cnf")
            write_dimacs(cnf, path)
            reference = (
                encoder.reference_comparison(stats) if self.cfg.rows == 51 else None
            )
            return {"statistics": stats, "reference": reference, "dimacs": path}

        result = self._timed("encode", run)
        self.report.data["encoding"] = {
            k: v for k, v in result.items() if k != "dimacs"
        }
        self.report.data["artifacts"] = self.report.data.get("artifacts", {})
        self.report.data["artifacts"]["instance"] = os.path.basename(result["dimacs"])
        return result

    # ------------------------------------------------------------------
    # stage: phase 1

    def completion_projection(self) -> list[int]:
        return sorted(
            var_of(r, c) for r, c in self.m.unknown_cells() if r <= 27
        )

    @staticmethod
    def completion_from_model(projected) -> symmetry.Completion:
        from .cnf import cell_of

        cells = [cell_of(l) for l in projected if l > 0]
        return symmetry.Completion.from_cells(cells)

    def phase1(self, cross_check: bool = True) -> dict:
        def run():
            stab = self.stabilizer()
            cnf27 = self.cnf_for_rows(27)
            projection = tuple(self.completion_projection())
            records: list[symmetry.OrbitRecord] = []

            def on_model(projected):
                comp = self.completion_from_model(projected)
                record = symmetry.orbit(stab, comp)
                records.append(record)
                return symmetry.blocking_clauses(stab, comp)

            hook = sat.EnumerationHook(projection=projection, on_model=on_model)
            solver = sat.Solver(cnf27, config=self.cfg.solver_config())
            solver.enumerate(hook)

            representatives = [r.representative for r in records]
            for r in records:
                if symmetry.canonical(stab, r.representative) != r.representative:
                    raise CrossCheckMismatch("representative is not canonical")
            total = sum(r.orbit_size for r in records)
            histogram = {}
            for r in records:
                histogram[r.orbit_size] = histogram.get(r.orbit_size, 0) + 1

            raw_total = None
            if cross_check:
                union = set()
                for r in records:
                    union.update(r.members)
                if len(union) != total:
                    raise CrossCheckMismatch("orbits overlap")
                raw = sat.Solver(cnf27, config=self.cfg.solver_config())
                raw_models = raw.enumerate(sat.self_blocking_hook(projection))
                raw_comps = {self.completion_from_model(mdl) for mdl in raw_models}
                raw_total = len(raw_models)
                if raw_comps != union:
                    raise CrossCheckMismatch(
                        f"raw enumeration ({len(raw_comps)}) differs from orbit union ({len(union)})"
                    )
            with open(self._path("orbits.json"), "w") as f:
                json.dump(
                    [r.to_json_dict() for r in records], f, sort_keys=True
                )
                f.write("\n")
            return {
                "records": records,
                "representatives": representatives,
                "total": total,
                "inequivalent": len(records),
                "histogram": histogram,
                "raw_total": raw_total,
            }

        result = self._timed("phase1", run)
        self.report.data["phase1"] = {
            "total_completions": result["total"],
            "inequivalent": result["inequivalent"],
            "orbit_size_histogram": {
                str(k): v for k, v in sorted(result["histogram"].items())
            },
            "raw_total": result["raw_total"],
        }
        return result

    # ------------------------------------------------------------------
    # stage: phase 2

    def phase2_incremental(self, representatives) -> dict:
        def run():
            if not representatives:
                return {"outcomes": [], "suspicious_empty": True, "counterexamples": []}
            cnf51 = self.cnf_for_rows(51)
            if self.cfg.parallelism > 1:
                outcomes = self._incremental_parallel(cnf51, representatives)
            else:
                outcomes = self._incremental_serial(cnf51, representatives)
            counterexamples = []
            for idx, (status, payload) in enumerate(outcomes):
                if status == "sat":
                    counterexamples.append(
                        {"representative_index": idx, "model_valid": payload}
                    )
            return {
                "outcomes": outcomes,
                "suspicious_empty": False,
                "counterexamples": counterexamples,
            }

        result = self._timed("phase2_incremental", run)
        outcomes = result["outcomes"]
        self.report.data["phase2_incremental"] = {
            "representatives": len(outcomes),
            "unsat": sum(1 for s, _ in outcomes if s == "unsat"),
            "sat_counterexamples": result["counterexamples"],
            "suspicious_empty": result.get("suspicious_empty", False),
        }
        return result

    def _incremental_serial(self, cnf51, representatives):
        solver = sat.Solver(cnf51, config=self.cfg.solver_config())
        outcomes = []
        for comp in representatives:
            outcomes.append(_refute_one(solver, comp, self.m))
        return outcomes

    def _incremental_parallel(self, cnf51, representatives):
        chunks = [
            list(enumerate(representatives))[i :: self.cfg.parallelism]
            for i in range(self.cfg.parallelism)
        ]
        fixture_rows = self.m.rows
        args = [
            (fixture_rows, self.cfg.variant, [(i, c.cells) for i, c in chunk])
            for chunk in chunks
        ]
        merged = {}
        with ProcessPoolExecutor(max_workers=self.cfg.parallelism) as pool:
            for part in pool.map(_refute_chunk, args):
                merged.update(part)
        return [merged[i] for i in range(len(representatives))]

    def phase2_monolithic(self, records) -> dict:
        """One instance, one proof: the 51-row CNF plus a blocking clause
        for every non-representative completion, refuted with a single
        DRUP certificate.

        An unguided CDCL run on this instance wanders for days, so the
        proof is generated in two passes over the same solver and sink:
        first each representative's 30-literal cube is refuted under
        assumptions and the negated assumption core — which is RUP
        against the clause database at that point — is appended to the
        proof, then a final unrestricted solve derives the empty clause.
        The certificate remains an ordinary DRUP refutation of the
        monolithic instance; the cube pass only steers where the learnt
        clauses come from.
        """

        def run():
            cnf51 = self.cnf_for_rows(51)
            blocking = []
            for record in records:
                for member in record.members:
                    if member != record.representative:
                        blocking.append(tuple(-l for l in member.literals()))
            for cl in blocking:
                cnf51.add(cl, TAG_BLOCKING)
            count = sum(1 for t in cnf51.tags if t == TAG_BLOCKING)
            instance_path = self._path("monolithic.cnf")
            write_dimacs(cnf51, instance_path)
            proof_path = self._path("monolithic.drup")
            sink = sat.DrupSink(proof_path)
            solver = sat.Solver(cnf51, config=self.cfg.solver_config(), proof=sink)
            try:
                outcome = self._monolithic_solve(solver, records)
            except ResourceLimit as e:
                sink.close()
                return {
                    "blocking_clauses": count,
                    "status": "budget_exhausted",
                    "proof": proof_path,
                    "verification": None,
                    "conflicts": solver.conflicts,
                    "note": str(e),
                }
            sink.close()
            verdict = None
            if outcome.status is sat.Status.UNSAT:
                report = proofmod.check_drup(cnf51, proofmod.iter_drup(proof_path))
                verdict = report.to_json_dict()
                if not report.ok:
                    raise Plane15Error("monolithic proof failed verification")
            return {
                "blocking_clauses": count,
                "status": outcome.status.value,
                "proof": proof_path,
                "verification": verdict,
                "conflicts": solver.conflicts,
            }

        result = self._timed("phase2_monolithic", run)
        self.report.data["phase2_monolithic"] = {
            "blocking_clauses": result["blocking_clauses"],
            "status": result["status"],
            "proof": os.path.basename(result["proof"]),
            "verification": result["verification"],
        }
        return result

    @staticmethod
    def _monolithic_solve(solver, records):
        for record in records:
            out = solver.solve(assumptions=record.representative.literals())
            if out.status is sat.Status.SAT:
                return out
            if out.status is sat.Status.UNSAT:
                return out
            # UNSAT under assumptions: the negated core is derivable by
            # unit propagation from the current database, so appending
            # it keeps the proof checkable and prunes the final solve
            if not solver.add_clause([-l for l in out.core]):
                return sat.SolveOutcome(status=sat.Status.UNSAT)
        return solver.solve()

    # ------------------------------------------------------------------
    # stage: baseline

    def baseline(self) -> dict:
        def run():
            cnf51 = self.cnf_for_rows(51)
            instance_path = self._path("baseline.cnf")
            write_dimacs(cnf51, instance_path)
            proof_path = self._path("baseline.drup")
            sink = sat.DrupSink(proof_path)
            solver = sat.Solver(cnf51, config=self.cfg.solver_config(), proof=sink)
            try:
                outcome = solver.solve()
            except ResourceLimit as e:
                return {
                    "status": "budget_exhausted",
                    "proof": proof_path,
                    "verification": None,
                    "dimacs": instance_path,
                    "conflicts": solver.conflicts,
                    "note": str(e),
                }
            finally:
                sink.close()
            verdict = None
            if outcome.status is sat.Status.UNSAT:
                report = proofmod.check_drup(cnf51, proofmod.iter_drup(proof_path))
                verdict = report.to_json_dict()
            return {
                "status": outcome.status.value,
                "proof": proof_path,
                "verification": verdict,
                "dimacs": instance_path,
                "conflicts": solver.conflicts,
            }

        result = self._timed("baseline", run)
        self.report.data["baseline"] = {
            "status": result["status"],
            "proof": os.path.basename(result["proof"]),
            "verification": result["verification"],
        }
        return result

    # ------------------------------------------------------------------
    # stage: 45-row witness

    def witness45(self, representatives=None) -> dict:
        """Find and validate a satisfying 45-row extension.

        If phase-1 representatives are available they are used as
        assumption cubes (splitting the search); otherwise the instance
        is solved directly.
        """

        def run():
            cnf45 = self.cnf_for_rows(45)
            cfg = self.cfg.solver_config()
            outcome = None
            if representatives:
                solver = sat.Solver(cnf45, config=cfg)
                for comp in representatives:
                    out = solver.solve(assumptions=comp.literals())
                    if out.status is sat.Status.SAT:
                        outcome = out
                        break
                if outcome is None:
                    raise Plane15Error(
                        "45-row instance unsatisfiable under every representative"
                    )
            else:
                solver = sat.Solver(cnf45, config=cfg)
                outcome = solver.solve()
                if outcome.status is not sat.Status.SAT:
                    raise Plane15Error("45-row instance reported unsatisfiable")
            assignment = {abs(l): l > 0 for l in outcome.model}
            grid = [list(r) for r in self.m.rows]
            for i in range(1, 46):
                for j in range(1, 76):
                    if grid[i - 1][j - 1] == ".":
                        grid[i - 1][j - 1] = "1" if assignment[var_of(i, j)] else "0"
            witness = PartialMatrix(rows=tuple("".join(r) for r in grid))
            report = validate_structure(witness)
            if not report.ok:
                raise Plane15Error(
                    "witness failed structural validation: "
                    + "; ".join(str(f) for f in report.findings[:5])
                )
            completion = symmetry.Completion.from_cells(
                [
                    (i, j)
                    for i in range(22, 28)
                    for j in range(16, 76)
                    if witness.char(i, j) == "1" and self.m.char(i, j) == "."
                ]
            )
            path = self._path("witness45.txt")
            with open(path, "w") as f:
                f.write(matrix.serialize(witness))
            return {
                "witness": witness,
                "completion": completion,
                "path": path,
                "valid": True,
            }

        result = self._timed("witness45", run)
        self.report.data["witness45"] = {
            "valid": result["valid"],
            "witness": os.path.basename(result["path"]),
            "completion": result["completion"].to_json_list(),
        }
        return result

    # ------------------------------------------------------------------

    def run(self) -> PipelineReport:
        """Execute the configured stages and write the report files."""
        self.encode_stage()
        phase1_result = None
        if self.cfg.symmetry:
            self.group()
            phase1_result = self.phase1()
            with open(self._path("completions.json"), "w") as f:
                json.dump(
                    [c.to_json_list() for c in phase1_result["representatives"]],
                    f,
                    sort_keys=True,
                )
                f.write("\n")
            if self.cfg.rows == 51:
                if self.cfg.phase2_mode in ("incremental", "both"):
                    self.phase2_incremental(phase1_result["representatives"])
                if self.cfg.phase2_mode in ("monolithic", "both"):
                    self.phase2_monolithic(phase1_result["records"])
        if self.cfg.run_witness and self.cfg.rows >= 45:
            reps = phase1_result["representatives"] if phase1_result else None
            self.witness45(reps)
        if self.cfg.run_baseline:
            self.baseline()
        self._check_conservation(phase1_result)
        with open(self._path("report.json"), "w") as f:
            f.write(self.report.to_json())
        with open(self._path("timings.json"), "w") as f:
            f.write(self.report.timings_json())
        return self.report

    def _check_conservation(self, phase1_result) -> None:
        if phase1_result is None:
            return
        total = phase1_result["total"]
        inequivalent = phase1_result["inequivalent"]
        blocked = self.report.data.get("phase2_monolithic", {}).get("blocking_clauses")
        if blocked is not None and inequivalent + blocked != total:
            raise CrossCheckMismatch(
                f"inequivalent ({inequivalent}) + blocked ({blocked}) != total ({total})"
            )
        if phase1_result["raw_total"] is not None and phase1_result["raw_total"] != total:
            raise CrossCheckMismatch("raw enumeration count != orbit-size sum")


# ----------------------------------------------------------------------
# helpers shared with worker processes


def _refute_one(solver, comp, fixture):
    out = solver.solve(assumptions=comp.literals())
    if out.status is sat.Status.SAT:
        assignment = {abs(l): l > 0 for l in out.model}
        model_valid = _validate_full_model(fixture, assignment)
        return ("sat", model_valid)
    if out.status is sat.Status.UNSAT_UNDER_ASSUMPTIONS:
        return ("unsat", len(out.core))
    return ("unsat", 0)  # globally unsat


def _validate_full_model(fixture, assignment) -> bool:
    grid = [list(r) for r in fixture.rows]
    for i in range(1, 52):
        for j in range(1, 76):
            if grid[i - 1][j - 1] == ".":
                grid[i - 1][j - 1] = "1" if assignment.get(var_of(i, j), False) else "0"
    witness = PartialMatrix(rows=tuple("".join(r) for r in grid))
    return validate_structure(witness).ok


def _refute_chunk(args):
    fixture_rows, variant, indexed_cells = args
    m = PartialMatrix(rows=fixture_rows)
    cnf51 = encoder.assemble(m, encoder.EncodingVariant(variant), max_row=51)
    solver = sat.Solver(cnf51)
    out = {}
    for idx, cells in indexed_cells:
        comp = symmetry.Completion(cells=cells)
        out[idx] = _refute_one(solver, comp, m)
    return out


def run_pipeline(cfg: RunConfig, m: PartialMatrix | None = None) -> PipelineReport:
    return Pipeline(cfg, m).run()
