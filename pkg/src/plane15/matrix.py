"""Partial incidence matrix: loading, validation, propagation, supports.

The matrix is the 51x75 upper-left window of a hypothetical order-ten
plane's incidence matrix.  Rows 1-6 are the heavy lines, 7-21 the medium
lines, 22-51 the light lines; columns 1-15 are the A points and 16-75
the C points.  Cells are One/Zero/Unknown; the text format uses
'1'/'0'/'.' respectively.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass
from enum import Enum
from itertools import combinations

from .cnf import cell_of, var_of
from .errors import (
    BadCharacter,
    BadDimensions,
    Contradiction,
    IncompleteAssignment,
    InvariantViolation,
)

N_ROWS = 51
N_COLS = 75

HEAVY_ROWS = range(1, 7)
MEDIUM_ROWS = range(7, 22)
LIGHT_ROWS = range(22, 52)
A_COLS = range(1, 16)
C_COLS = range(16, 76)

# Light rows come in five groups of six; each group shares a single
# anchor column among the A points and carries an identity block whose
# first column is listed last.  The final block starts at column 39, so
# it overlaps the previous block's column range by one.
LIGHT_GROUPS = (
    (22, 1, 16),
    (28, 10, 22),
    (34, 15, 28),
    (40, 11, 34),
    (46, 14, 39),
)
ANCHOR_COLS = (1, 10, 15, 11, 14)


class Cell(Enum):
    ONE = "1"
    ZERO = "0"
    UNKNOWN = "."


@dataclass(frozen=True)
class PartialMatrix:
    """Immutable tri-state grid; rows stored as strings over '01.'."""

    rows: tuple[str, ...]

    def cell(self, i: int, j: int) -> Cell:
        return Cell(self.rows[i - 1][j - 1])

    def char(self, i: int, j: int) -> str:
        return self.rows[i - 1][j - 1]

    def row_class(self, i: int) -> str:
        if i in HEAVY_ROWS:
            return "heavy"
        if i in MEDIUM_ROWS:
            return "medium"
        return "light"

    def col_class(self, j: int) -> str:
        return "A" if j in A_COLS else "C"

    def unknown_cells(self) -> list[tuple[int, int]]:
        return [
            (i + 1, j + 1)
            for i, row in enumerate(self.rows)
            for j, ch in enumerate(row)
            if ch == "."
        ]

    def row_ones(self, i: int) -> frozenset[int]:
        return frozenset(j + 1 for j, ch in enumerate(self.rows[i - 1]) if ch == "1")

    def col_ones(self, j: int) -> frozenset[int]:
        return frozenset(i for i in range(1, N_ROWS + 1) if self.rows[i - 1][j - 1] == "1")

    def is_fully_known(self) -> bool:
        return all("." not in r for r in self.rows)


@dataclass(frozen=True)
class Finding:
    """One violated invariant, with coordinates."""

    code: str
    message: str
    where: tuple = ()

    def __str__(self) -> str:
        loc = f" at {self.where}" if self.where else ""
        return f"{self.code}: {self.message}{loc}"


@dataclass
class ValidationReport:
    findings: list[Finding]

    @property
    def ok(self) -> bool:
        return not self.findings

    def to_text(self) -> str:
        if self.ok:
            return "ok: no invariant violations\n"
        return "".join(str(f) + "\n" for f in self.findings)

    def to_json_dict(self) -> dict:
        return {
            "ok": self.ok,
            "findings": [
                {"code": f.code, "message": f.message, "where": list(f.where)}
                for f in self.findings
            ],
        }


@dataclass(frozen=True)
class SupportSets:
    """S: medium row -> its One columns; T: anchor column -> its light rows."""

    S: dict[int, tuple[int, ...]]
    T: dict[int, tuple[int, ...]]


def load_fixture(text: str) -> PartialMatrix:
    """Parse the 51x75 text format and check structural invariants."""
    lines = text.splitlines()
    if len(lines) != N_ROWS:
        raise BadDimensions(f"expected {N_ROWS} lines, got {len(lines)}")
    for i, line in enumerate(lines, start=1):
        if len(line) != N_COLS:
            raise BadDimensions(f"line {i}: expected {N_COLS} characters, got {len(line)}")
        for j, ch in enumerate(line, start=1):
            if ch not in "01.":
                raise BadCharacter(i, j, ch)
    m = PartialMatrix(rows=tuple(lines))
    report = validate_structure(m)
    if not report.ok:
        raise InvariantViolation(report.findings)
    return m


def serialize(m: PartialMatrix) -> str:
    return "\n".join(m.rows) + "\n"


def default_fixture_text(propagated: bool = True) -> str:
    """Shipped starting grid.

    propagated=True is the default instance: the text figure's blanks
    minus the 300 zeros that single-step pair reasoning already forces
    (leaving 750 unknowns).  propagated=False is the raw transcription
    with 1050 unknowns.
    """
    name = "fixture.txt" if propagated else "fixture_unpropagated.txt"
    return importlib.resources.files("plane15.data").joinpath(name).read_text()


def default_fixture(propagated: bool = True) -> PartialMatrix:
    return load_fixture(default_fixture_text(propagated))


def validate_structure(m: PartialMatrix) -> ValidationReport:
    """Check every structural invariant; violations are report entries.

    For pairs of fully known medium/light rows (and anchor/C column
    pairs) the intersect-exactly-once requirement is checked; pairs with
    unknowns are only held to at-most-once.
    """
    f: list[Finding] = []

    for i in range(1, 22):
        for j in range(1, N_COLS + 1):
            if m.char(i, j) == ".":
                f.append(Finding("known-region", "unknown cell in rows 1-21", (i, j)))
    for j in range(1, 16):
        for i in range(1, N_ROWS + 1):
            if m.char(i, j) == ".":
                f.append(Finding("known-region", "unknown cell in columns 1-15", (i, j)))

    # Row class weights over the known part of the window.
    for i in HEAVY_ROWS:
        ones = m.row_ones(i)
        a_ones = [j for j in ones if j in A_COLS]
        if len(a_ones) != 5 or len(ones) != 5:
            f.append(Finding("heavy-weight", f"heavy row has {len(a_ones)} A-ones, {len(ones)} total (want 5/5)", (i,)))
    for i in MEDIUM_ROWS:
        ones = m.row_ones(i)
        a = sum(1 for j in ones if j in A_COLS)
        if a != 3 or len(ones) != 11:
            f.append(Finding("medium-weight", f"medium row has {a} A-ones, {len(ones)} total (want 3/11)", (i,)))

    # Light rows: single anchor One among the A columns, per group.
    for start, anchor, diag in LIGHT_GROUPS:
        for t in range(6):
            i = start + t
            a_ones = [j for j in m.row_ones(i) if j in A_COLS]
            if a_ones != [anchor]:
                f.append(Finding("light-anchor", f"light row A-ones {a_ones}, want [{anchor}]", (i,)))
            if m.char(i, diag + t) != "1":
                f.append(Finding("diag-block", "missing diagonal One", (i, diag + t)))
            for u in range(6):
                if u != t and m.char(i, diag + u) == "1":
                    f.append(Finding("diag-block", "off-diagonal One inside identity block", (i, diag + u)))

    for i, j in m.unknown_cells():
        if i < 22 or j < 16:
            continue  # already reported by known-region checks
    stray = [(i, j) for (i, j) in m.unknown_cells() if i >= 22 and j <= 15]
    for where in stray:
        f.append(Finding("unknown-region", "unknown cell outside rows 22-51 x cols 16-75", where))

    # Pairwise intersections.
    row_one = [m.row_ones(i) for i in range(1, N_ROWS + 1)]
    row_unk = [frozenset(j + 1 for j, ch in enumerate(m.rows[i]) if ch == ".") for i in range(N_ROWS)]
    for a, b in combinations(range(N_ROWS), 2):
        common = row_one[a] & row_one[b]
        if len(common) > 1:
            f.append(Finding("row-intersect", f"rows share {len(common)} Ones", (a + 1, b + 1, tuple(sorted(common)))))
        elif not common and not row_unk[a] and not row_unk[b]:
            ia, ib = a + 1, b + 1
            if ia in MEDIUM_ROWS and ib in LIGHT_ROWS:
                f.append(Finding("row-intersect", "fully known medium/light rows never meet", (ia, ib)))
    col_one = [m.col_ones(j) for j in range(1, N_COLS + 1)]
    col_unk = [frozenset(i for i in range(1, N_ROWS + 1) if m.char(i, j) == ".") for j in range(1, N_COLS + 1)]
    for a, b in combinations(range(N_COLS), 2):
        common = col_one[a] & col_one[b]
        if len(common) > 1:
            f.append(Finding("col-intersect", f"columns share {len(common)} Ones", (a + 1, b + 1, tuple(sorted(common)))))
        elif not common and not col_unk[a] and not col_unk[b]:
            ja, jb = a + 1, b + 1
            if ja in ANCHOR_COLS and jb in C_COLS:
                f.append(Finding("col-intersect", "fully known anchor/C columns never meet", (ja, jb)))

    return ValidationReport(findings=f)


@dataclass(frozen=True)
class PropagationResult:
    matrix: PartialMatrix
    forced: tuple[tuple[int, int], ...]

    @property
    def count(self) -> int:
        return len(self.forced)


def propagate_forced_zeros(m: PartialMatrix) -> PropagationResult:
    """Set to Zero every Unknown whose One would double an intersection.

    Iterates to a fixpoint; only Unknown -> Zero transitions happen.
    Raises Contradiction if an Unknown cell is simultaneously required
    to be One by nothing (never introduced) yet forced Zero twice --
    which cannot happen, so the only contradiction source is a cell
    whose row/column already violates at-most-once (pre-checked).
    """
    report = validate_structure(m)
    if any(x.code.endswith("intersect") and "share" in x.message for x in report.findings):
        raise Contradiction("matrix violates at-most-once before propagation")
    grid = [list(r) for r in m.rows]
    forced: list[tuple[int, int]] = []
    while True:
        row_one = [set(j for j in range(N_COLS) if grid[i][j] == "1") for i in range(N_ROWS)]
        col_one = [set(i for i in range(N_ROWS) if grid[i][j] == "1") for j in range(N_COLS)]
        changed = False
        for i in range(N_ROWS):
            for j in range(N_COLS):
                if grid[i][j] != ".":
                    continue
                rows_meet = any(row_one[i] & row_one[i2] for i2 in col_one[j])
                cols_meet = rows_meet or any(col_one[j] & col_one[j2] for j2 in row_one[i])
                if cols_meet:
                    grid[i][j] = "0"
                    forced.append((i + 1, j + 1))
                    changed = True
        if not changed:
            break
    out = PartialMatrix(rows=tuple("".join(r) for r in grid))
    return PropagationResult(matrix=out, forced=tuple(forced))


def support_sets(m: PartialMatrix) -> SupportSets:
    """S(i) for medium rows and T(k) for the five anchor columns."""
    S = {i: tuple(sorted(m.row_ones(i))) for i in MEDIUM_ROWS}
    T = {k: tuple(sorted(i for i in m.col_ones(k) if i in LIGHT_ROWS)) for k in ANCHOR_COLS}
    return SupportSets(S=S, T=T)


def apply_model(m: PartialMatrix, assignment: dict[int, bool], partial: bool = False) -> PartialMatrix:
    """Fill Unknown cells from a variable assignment.

    assignment maps variable numbers (var_of) to booleans.  Unless
    partial=True, every Unknown cell must be covered.
    """
    grid = [list(r) for r in m.rows]
    missing = []
    for i, j in m.unknown_cells():
        v = var_of(i, j)
        if v in assignment:
            grid[i - 1][j - 1] = "1" if assignment[v] else "0"
        elif not partial:
            missing.append((i, j))
    if missing:
        raise IncompleteAssignment(f"{len(missing)} unknown cells uncovered, first {missing[0]}")
    return PartialMatrix(rows=tuple("".join(r) for r in grid))


def model_to_assignment(model_literals) -> dict[int, bool]:
    """Signed-literal list -> var->bool map."""
    return {abs(l): l > 0 for l in model_literals}
