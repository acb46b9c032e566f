"""Automorphisms of the known 21x75 submatrix and orbits of completions.

A symmetry is a pair of permutations (rows 1-21, columns 1-75) that
fixes the known submatrix bit-for-bit.  The group is computed from the
matrix itself by backtracking over the 720 heavy-row permutations; each
one extends in at most one way because the class structure (heavy pair
patterns on A columns, A-triples on medium rows, medium patterns on C
columns) separates everything.  The claimed orders (720 for the group,
48 for the column-1 stabilizer) are therefore test assertions, not
assumptions.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

from .cnf import var_of
from .errors import AmbiguousExtension, InvariantViolation, NoRenormalization
from .matrix import A_COLS, C_COLS, HEAVY_ROWS, MEDIUM_ROWS, N_COLS, PartialMatrix

KNOWN_ROWS = 21

# Completions live on rows 22-27 x columns 16-75; together with the
# fixture's six diagonal Ones they hold the 36 Ones of the first light
# group's C-column part, so a completion has exactly 30 cells.
COMPLETION_ROWS = range(22, 28)
COMPLETION_SIZE = 30
IDENTITY_BLOCK_COLS = range(16, 22)


@dataclass(frozen=True)
class Symmetry:
    """row_perm[i] / col_perm[j] give the image of row i / column j.

    Both tuples are 1-based with a dummy entry at index 0.
    """

    row_perm: tuple[int, ...]  # length 22, entries permute 1..21
    col_perm: tuple[int, ...]  # length 76, entries permute 1..75

    def is_identity(self) -> bool:
        return all(self.row_perm[i] == i for i in range(1, KNOWN_ROWS + 1)) and all(
            self.col_perm[j] == j for j in range(1, N_COLS + 1)
        )

    def compose(self, other: "Symmetry") -> "Symmetry":
        """self after other: (self*other)(x) = self(other(x))."""
        rp = (0,) + tuple(self.row_perm[other.row_perm[i]] for i in range(1, KNOWN_ROWS + 1))
        cp = (0,) + tuple(self.col_perm[other.col_perm[j]] for j in range(1, N_COLS + 1))
        return Symmetry(row_perm=rp, col_perm=cp)

    def inverse(self) -> "Symmetry":
        rp = [0] * (KNOWN_ROWS + 1)
        cp = [0] * (N_COLS + 1)
        for i in range(1, KNOWN_ROWS + 1):
            rp[self.row_perm[i]] = i
        for j in range(1, N_COLS + 1):
            cp[self.col_perm[j]] = j
        return Symmetry(row_perm=tuple(rp), col_perm=tuple(cp))

    def to_json_dict(self) -> dict:
        return {
            "row_perm": list(self.row_perm[1:]),
            "col_perm": list(self.col_perm[1:]),
        }


@dataclass(frozen=True)
class SymmetryGroup:
    elements: tuple[Symmetry, ...]

    @property
    def order(self) -> int:
        return len(self.elements)

    def verify_group_axioms(self) -> None:
        """Closure, identity, inverses; raises InvariantViolation."""
        index = {e: None for e in self.elements}
        if not any(e.is_identity() for e in self.elements):
            raise InvariantViolation(["group lacks the identity element"])
        for e in self.elements:
            if e.inverse() not in index:
                raise InvariantViolation([f"inverse missing for an element"])
        for a in self.elements:
            for b in self.elements:
                if a.compose(b) not in index:
                    raise InvariantViolation(["group not closed under composition"])


@dataclass(frozen=True, order=True)
class Completion:
    """The 30 cells assigned One beyond the fixture in rows 22-27."""

    cells: tuple[tuple[int, int], ...]  # sorted (row, col)

    def __post_init__(self):
        problems = []
        if len(self.cells) != COMPLETION_SIZE:
            problems.append(f"expected {COMPLETION_SIZE} cells, got {len(self.cells)}")
        if tuple(sorted(self.cells)) != self.cells:
            problems.append("cells not sorted")
        rows = {}
        cols = {}
        for r, c in self.cells:
            if r not in COMPLETION_ROWS or c not in C_COLS:
                problems.append(f"cell ({r},{c}) outside rows 22-27 x columns 16-75")
            rows[r] = rows.get(r, 0) + 1
            cols[c] = cols.get(c, 0) + 1
        for r, n in rows.items():
            if n != COMPLETION_SIZE // len(COMPLETION_ROWS):
                problems.append(f"row {r} has {n} cells, want 5")
        for c, n in cols.items():
            if n > 1:
                problems.append(f"column {c} has {n} cells")
        if problems:
            raise InvariantViolation(problems)

    def to_json_list(self) -> list[list[int]]:
        return [list(c) for c in self.cells]

    def literals(self) -> list[int]:
        """Positive literals of the 30 cells under the grid variable map."""
        return [var_of(r, c) for r, c in self.cells]

    @staticmethod
    def from_cells(cells) -> "Completion":
        return Completion(cells=tuple(sorted(map(tuple, cells))))


@dataclass(frozen=True)
class OrbitRecord:
    representative: Completion
    orbit_size: int
    members: tuple[Completion, ...]

    def to_json_dict(self) -> dict:
        return {
            "representative": self.representative.to_json_list(),
            "orbit_size": self.orbit_size,
            "members": [m.to_json_list() for m in self.members],
        }


def _heavy_pair(m: PartialMatrix, col: int) -> frozenset[int]:
    return frozenset(i for i in HEAVY_ROWS if m.char(i, col) == "1")


def automorphisms(m: PartialMatrix, verify: bool = True) -> SymmetryGroup:
    """Full automorphism group of the known 21x75 submatrix.

    Backtracking over heavy-row permutations; each extends uniquely (or
    not at all) through A columns, medium rows, and C columns, because
    on this matrix every class carries a distinguishing pattern.
    """
    for i in range(1, KNOWN_ROWS + 1):
        if "." in m.rows[i - 1]:
            raise InvariantViolation([f"row {i} not fully known"])

    # A column <-> unordered pair of heavy rows.
    pair_of_col = {j: _heavy_pair(m, j) for j in A_COLS}
    col_of_pair = {}
    for j, p in pair_of_col.items():
        if len(p) != 2 or p in col_of_pair:
            raise AmbiguousExtension(f"A column {j} heavy pattern not a distinct pair")
        col_of_pair[p] = j

    # Medium row <-> set of A columns carrying its Ones.
    triple_of_row = {
        i: frozenset(j for j in A_COLS if m.char(i, j) == "1") for i in MEDIUM_ROWS
    }
    row_of_triple = {}
    for i, t in triple_of_row.items():
        if t in row_of_triple:
            raise AmbiguousExtension(f"medium rows share the A-triple {sorted(t)}")
        row_of_triple[t] = i

    # C column <-> set of medium rows carrying its Ones.
    medium_pattern = {
        j: frozenset(i for i in MEDIUM_ROWS if m.char(i, j) == "1") for j in C_COLS
    }
    col_of_pattern = {}
    for j, p in medium_pattern.items():
        if p in col_of_pattern:
            raise AmbiguousExtension(f"C columns {col_of_pattern[p]} and {j} indistinguishable")
        col_of_pattern[p] = j

    elements = []
    for heavy in permutations(range(1, 7)):
        sigma = {i: heavy[i - 1] for i in HEAVY_ROWS}
        col_perm = [0] * (N_COLS + 1)
        ok = True
        for j in A_COLS:
            image_pair = frozenset(sigma[i] for i in pair_of_col[j])
            target = col_of_pair.get(image_pair)
            if target is None:
                ok = False
                break
            col_perm[j] = target
        if not ok:
            continue
        row_perm = [0] * (KNOWN_ROWS + 1)
        for i in HEAVY_ROWS:
            row_perm[i] = sigma[i]
        for i in MEDIUM_ROWS:
            image_triple = frozenset(col_perm[j] for j in triple_of_row[i])
            target = row_of_triple.get(image_triple)
            if target is None:
                ok = False
                break
            row_perm[i] = target
        if not ok:
            continue
        for j in C_COLS:
            image_pattern = frozenset(row_perm[i] for i in medium_pattern[j])
            target = col_of_pattern.get(image_pattern)
            if target is None:
                ok = False
                break
            col_perm[j] = target
        if not ok:
            continue
        sym = Symmetry(row_perm=tuple(row_perm), col_perm=tuple(col_perm))
        if _fixes_submatrix(sym, m):
            elements.append(sym)
    group = SymmetryGroup(elements=tuple(elements))
    if verify:
        group.verify_group_axioms()
        for e in group.elements:
            if not _fixes_submatrix(e, m):
                raise InvariantViolation(["element does not fix the submatrix"])
    return group


def _fixes_submatrix(sym: Symmetry, m: PartialMatrix) -> bool:
    for i in range(1, KNOWN_ROWS + 1):
        src = m.rows[i - 1]
        dst = m.rows[sym.row_perm[i] - 1]
        for j in range(1, N_COLS + 1):
            if src[j - 1] != dst[sym.col_perm[j] - 1]:
                return False
    return True


def stabilizer(g: SymmetryGroup, column: int) -> SymmetryGroup:
    """Subgroup whose column permutation fixes the given column."""
    return SymmetryGroup(
        elements=tuple(e for e in g.elements if e.col_perm[column] == column)
    )


def apply_to_completion(sym: Symmetry, c: Completion) -> Completion:
    """Image of a completion under a column-1-fixing symmetry.

    The column permutation is applied to the 36 Ones of rows 22-27 on
    columns 16-75 (the completion plus the six diagonal Ones); the rows
    are then relabeled so that columns 16-21 carry an identity block
    again.  If the permuted block is not a permutation matrix the
    symmetry does not act on completions and NoRenormalization is
    raised.
    """
    ones = {r: set() for r in COMPLETION_ROWS}
    for r in COMPLETION_ROWS:
        ones[r].add(16 + (r - 22))  # fixture diagonal One
    for r, col in c.cells:
        ones[r].add(col)
    permuted = {r: {sym.col_perm[j] for j in js} for r, js in ones.items()}
    block_row_of = {}
    for r, js in permuted.items():
        hits = [j for j in js if j in IDENTITY_BLOCK_COLS]
        if len(hits) != 1:
            raise NoRenormalization(
                f"row {r} has {len(hits)} Ones in columns 16-21 after permutation"
            )
        block_row_of[r] = 22 + (hits[0] - 16)
    if sorted(block_row_of.values()) != list(COMPLETION_ROWS):
        raise NoRenormalization("permuted identity block is not a permutation matrix")
    cells = []
    for r, js in permuted.items():
        new_r = block_row_of[r]
        for j in js:
            if j not in IDENTITY_BLOCK_COLS:
                cells.append((new_r, j))
    return Completion.from_cells(cells)


def orbit(stab: SymmetryGroup, c: Completion) -> OrbitRecord:
    """All distinct images of c; representative = lexicographic minimum."""
    images = {apply_to_completion(e, c) for e in stab.elements}
    members = tuple(sorted(images))
    return OrbitRecord(
        representative=members[0], orbit_size=len(members), members=members
    )


def canonical(stab: SymmetryGroup, c: Completion) -> Completion:
    return orbit(stab, c).representative


def blocking_clauses(stab: SymmetryGroup, c: Completion) -> list[tuple[int, ...]]:
    """One 30-literal clause per distinct orbit member, each the
    disjunction of the negated member variables."""
    record = orbit(stab, c)
    return [
        tuple(-lit for lit in member.literals()) for member in record.members
    ]
