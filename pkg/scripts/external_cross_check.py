#!/usr/bin/env python3
"""Cross-check exported DIMACS instances with an external SAT solver.

Usage:
    python scripts/external_cross_check.py SOLVER [ARGS...]

The solver command is run once per instance with the DIMACS path
appended; exit code 10 is read as SAT and 20 as UNSAT (the standard
SAT-competition convention).  Results are written to
tests/data/external_crosscheck.json so the acceptance suite can use the
51-row refutation as the documented baseline cross-check.
"""

import json
import hashlib
import subprocess
import sys
import tempfile
import time
from pathlib import Path

from plane15 import encoder, matrix
from plane15.cnf import write_dimacs

EXPECTED = {27: "sat", 45: "sat", 51: "unsat"}


def main() -> int:
    if len(sys.argv) < 2:
        print(__doc__, file=sys.stderr)
        return 2
    solver_cmd = sys.argv[1:]
    m = matrix.default_fixture()
    results = []
    ok = True
    with tempfile.TemporaryDirectory() as tmp:
        for rows, expected in EXPECTED.items():
            path = Path(tmp) / f"instance_{rows}.cnf"
            cnf = encoder.assemble(m, max_row=rows)
            write_dimacs(cnf, str(path))
            digest = hashlib.sha256(path.read_bytes()).hexdigest()
            t0 = time.monotonic()
            proc = subprocess.run(
                solver_cmd + [str(path)], capture_output=True, text=True
            )
            elapsed = time.monotonic() - t0
            verdict = {10: "sat", 20: "unsat"}.get(proc.returncode, "unknown")
            results.append(
                {
                    "rows": rows,
                    "expected": expected,
                    "result": verdict,
                    "elapsed_seconds": round(elapsed, 2),
                    "dimacs_sha256": digest,
                    "solver": " ".join(solver_cmd),
                }
            )
            status = "OK" if verdict == expected else "MISMATCH"
            if verdict != expected:
                ok = False
            print(f"rows={rows}: {verdict} ({elapsed:.1f}s) {status}")
    out = Path(__file__).resolve().parent.parent / "tests" / "data"
    record = {
        "result": next(r["result"] for r in results if r["rows"] == 51),
        "instance": {"rows": 51, "symmetry_breaking": False},
        "runs": results,
    }
    (out / "external_crosscheck.json").write_text(
        json.dumps(record, indent=2) + "\n"
    )
    print(f"wrote {out / 'external_crosscheck.json'}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
