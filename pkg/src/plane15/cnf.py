"""Clause database over the 51x75 variable grid, with DIMACS text I/O.

Literals are DIMACS-style signed integers.  The variable for grid cell
(i, j) is (i-1)*75 + j, a bijection between cells of the 51x75 window
and the integers 1..3825.  All files produced by this package (DIMACS
instances, proofs, completion listings) share this numbering.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .errors import EmptyClauseError, ParseError

GRID_COLS = 75
GRID_ROWS = 51
NUM_VARS = GRID_ROWS * GRID_COLS  # 3825

__version__ = "0.1.0"


def var_of(row: int, col: int) -> int:
    """Variable number for grid cell (row, col), both 1-based."""
    return (row - 1) * GRID_COLS + col


def cell_of(var: int) -> tuple[int, int]:
    """Inverse of var_of."""
    return (var - 1) // GRID_COLS + 1, (var - 1) % GRID_COLS + 1


def make_clause(lits) -> tuple[int, ...] | None:
    """Canonical clause: sorted by (variable, sign), duplicates removed.

    Returns None for tautologies (a literal and its negation co-occur).
    Raises EmptyClauseError on an empty literal set.
    """
    out = sorted(set(lits), key=lambda l: (abs(l), l < 0))
    if not out:
        raise EmptyClauseError("clause simplified to the empty clause")
    seen = set()
    for l in out:
        if -l in seen:
            return None
        seen.add(l)
    return tuple(out)


# Provenance tags, in canonical emission order.
TAG_UNIT = "unit"
TAG_AMO = "amo"
TAG_ROW_ALO = "row_alo"
TAG_COL_ALO = "col_alo"
TAG_BLOCKING = "blocking"


@dataclass
class Cnf:
    """Ordered, globally deduplicated clause list with provenance tags."""

    num_vars: int
    clauses: list[tuple[int, ...]] = field(default_factory=list)
    tags: list[str] = field(default_factory=list)
    comments: list[str] = field(default_factory=list)
    _index: set = field(default_factory=set, repr=False)

    def add(self, lits, tag: str) -> bool:
        """Add a clause unless it is a tautology or a duplicate.

        Returns True if the clause was actually appended.
        """
        clause = make_clause(lits)
        if clause is None:
            return False
        if clause in self._index:
            return False
        self._index.add(clause)
        self.clauses.append(clause)
        self.tags.append(tag)
        return True

    def counts_by_tag(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for t in self.tags:
            out[t] = out.get(t, 0) + 1
        return out

    def unit_literals(self) -> list[int]:
        return [c[0] for c in self.clauses if len(c) == 1]

    def __len__(self) -> int:
        return len(self.clauses)


def write_dimacs(cnf: Cnf, destination) -> None:
    """Write standard DIMACS CNF text.

    destination is a writable text file object or a path.  Comment lines
    carry whatever provenance strings were recorded on the Cnf.
    """
    if hasattr(destination, "write"):
        _write_dimacs(cnf, destination)
    else:
        with open(destination, "w") as f:
            _write_dimacs(cnf, f)


def _write_dimacs(cnf: Cnf, f) -> None:
    for c in cnf.comments:
        f.write(f"c {c}\n")
    f.write(f"p cnf {cnf.num_vars} {len(cnf.clauses)}\n")
    lines = [" ".join(map(str, clause)) + " 0\n" for clause in cnf.clauses]
    f.write("".join(lines))


def read_dimacs(source) -> Cnf:
    """Parse DIMACS CNF text from a path or file object."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source) as f:
            text = f.read()
    num_vars = None
    declared = None
    clauses = []
    comments = []
    pending: list[int] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("c"):
            comments.append(line[1:].strip())
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError(f"malformed problem line {line!r}", lineno)
            num_vars, declared = int(parts[2]), int(parts[3])
            continue
        if num_vars is None:
            raise ParseError("clause before problem line", lineno)
        try:
            ints = [int(tok) for tok in line.split()]
        except ValueError:
            raise ParseError(f"non-integer token in {line!r}", lineno)
        for v in ints:
            if v == 0:
                clauses.append(tuple(pending))
                pending = []
            else:
                if abs(v) > num_vars:
                    raise ParseError(f"literal {v} out of range", lineno)
                pending.append(v)
    if pending:
        raise ParseError("unterminated clause at end of input")
    if num_vars is None:
        raise ParseError("missing problem line")
    if declared is not None and declared != len(clauses):
        raise ParseError(
            f"problem line declares {declared} clauses, found {len(clauses)}"
        )
    cnf = Cnf(num_vars=num_vars, comments=comments)
    for c in clauses:
        cnf.clauses.append(c)
        cnf.tags.append("input")
        cnf._index.add(tuple(sorted(c, key=lambda l: (abs(l), l < 0))))
    return cnf


def content_hash(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()[:16]
