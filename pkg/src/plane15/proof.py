"""Forward DRUP proof checking, independent of the solver.

A DRUP proof is a sequence of clause additions and deletions.  Each
added clause must be derivable from the active clause set by reverse
unit propagation (RUP): assume the negation of every literal in the
clause, propagate, and require a conflict.  The proof is Verified when
an empty-clause addition passes its check.

The propagation engine here is written separately from the solver's
(persistent unit base plus temporary assumption trail) so that a bug in
the solver cannot hide inside its own checker.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .cnf import Cnf
from .errors import ParseError


class LineKind(Enum):
    ADD = "add"
    DELETE = "delete"


@dataclass(frozen=True)
class ProofLine:
    kind: LineKind
    literals: tuple[int, ...]


class Verdict(Enum):
    VERIFIED = "verified"
    FAILED = "failed"


@dataclass
class CheckReport:
    verdict: Verdict
    steps_checked: int
    units_propagated: int
    failed_step: int | None = None
    reason: str | None = None
    missing_deletions: int = 0

    @property
    def ok(self) -> bool:
        return self.verdict is Verdict.VERIFIED

    def to_json_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "steps_checked": self.steps_checked,
            "units_propagated": self.units_propagated,
            "failed_step": self.failed_step,
            "reason": self.reason,
            "missing_deletions": self.missing_deletions,
        }


def iter_drup(source):
    """Yield ProofLines from plain-text DRUP.

    Integer clauses terminated by 0; a 'd' prefix marks deletion;
    'c' lines and blanks are ignored.
    """
    if hasattr(source, "read"):
        f = source
        own = False
    else:
        f = open(source)
        own = True
    try:
        for lineno, raw in enumerate(f, start=1):
            raw = raw.strip()
            if not raw or raw.startswith("c"):
                continue
            kind = LineKind.ADD
            body = raw
            if raw == "d" or raw.startswith("d "):
                kind = LineKind.DELETE
                body = raw[1:]
            try:
                ints = [int(t) for t in body.split()]
            except ValueError:
                raise ParseError(f"non-integer token in proof line {raw!r}", lineno)
            if not ints or ints[-1] != 0:
                raise ParseError("proof line not 0-terminated", lineno)
            if any(v == 0 for v in ints[:-1]):
                raise ParseError("embedded 0 in proof line", lineno)
            yield ProofLine(kind=kind, literals=tuple(ints[:-1]))
    finally:
        if own:
            f.close()


def parse_drup(source) -> list[ProofLine]:
    return list(iter_drup(source))


def _key(lits) -> tuple[int, ...]:
    return tuple(sorted(set(lits), key=lambda l: (abs(l), l < 0)))


class _Clause(list):
    """Clause literal list with an in-place deletion flag.

    The flag must live on the object itself: tracking deleted clauses
    by id() is unsound because a collected list's id can be recycled by
    a later clause, which would then be silently skipped forever.
    """

    __slots__ = ("dead",)

    def __init__(self, lits):
        super().__init__(lits)
        self.dead = False


class _Propagator:
    """Active clause set with watched-literal unit propagation.

    The trail prefix of length base_size is persistent (implied by the
    clause set alone); RUP checks push temporary assumptions on top and
    undo them afterwards.  Deleted clauses are marked dead and skipped
    lazily during watcher scans.
    """

    def __init__(self, num_vars: int):
        self.num_vars = num_vars
        self.value = bytearray(num_vars + 1)  # 0 unset, 1 true, 2 false
        self.watches = {}
        self.index = {}  # clause key -> [copies, clause list or None]
        self.trail = []
        self.base_size = 0
        self.units_propagated = 0
        self.contradiction = False
        self.pending_units = []

    def _ensure_var(self, lits) -> None:
        """Grow the assignment array for proofs that mention variables
        beyond the input formula's range."""
        top = max((abs(l) for l in lits), default=0)
        if top > self.num_vars:
            self.value.extend(b"\x00" * (top - self.num_vars))
            self.num_vars = top

    def _is_false(self, lit: int) -> bool:
        return self.value[abs(lit)] == (2 if lit > 0 else 1)

    def _is_true(self, lit: int) -> bool:
        return self.value[abs(lit)] == (1 if lit > 0 else 2)

    def _set(self, lit: int) -> bool:
        v = abs(lit)
        want = 1 if lit > 0 else 2
        cur = self.value[v]
        if cur:
            return cur == want
        self.value[v] = want
        self.trail.append(lit)
        return True

    def add_clause(self, lits) -> None:
        self._ensure_var(lits)
        k = _key(lits)
        entry = self.index.get(k)
        if entry is not None:
            entry[0] += 1
            return
        seen = set(k)
        if any(-l in seen for l in k):
            self.index[k] = [1, None]  # tautology: inert
            return
        clause = _Clause(k)
        # order literals: a true literal or two non-false literals first,
        # so the watch invariant holds against the persistent base
        clause.sort(key=lambda l: (self._is_false(l), not self._is_true(l)))
        self.index[k] = [1, clause]
        if len(clause) == 1:
            self.pending_units.append(clause[0])
            return
        if self._is_false(clause[0]):
            self.contradiction = True  # every literal false under base
            return
        if not self._is_true(clause[0]) and self._is_false(clause[1]):
            self.pending_units.append(clause[0])  # unit under base
            return
        self.watches.setdefault(-clause[0], []).append(clause)
        self.watches.setdefault(-clause[1], []).append(clause)

    def delete_clause(self, lits) -> bool:
        k = _key(lits)
        entry = self.index.get(k)
        if entry is None:
            return False
        entry[0] -= 1
        if entry[0] == 0:
            if entry[1] is not None:
                entry[1].dead = True
            del self.index[k]
        return True

    def propagate_base(self) -> bool:
        """Extend the persistent trail with pending units and their
        consequences; False (and contradiction) on conflict."""
        if self.contradiction:
            return False
        start = self.base_size
        for u in self.pending_units:
            if not self._set(u):
                self.contradiction = True
        self.pending_units = []
        if not self.contradiction and not self._propagate_from(start):
            self.contradiction = True
        if self.contradiction:
            return False
        self.base_size = len(self.trail)
        return True

    def _propagate_from(self, start: int) -> bool:
        trail = self.trail
        i = start
        while i < len(trail):
            lit = trail[i]
            i += 1
            self.units_propagated += 1
            watchers = self.watches.get(lit)
            if not watchers:
                continue
            j = 0
            w = 0
            n = len(watchers)
            conflict = False
            while w < n:
                clause = watchers[w]
                w += 1
                if clause.dead:
                    continue
                if clause[0] == -lit:
                    clause[0], clause[1] = clause[1], clause[0]
                if self._is_true(clause[0]):
                    watchers[j] = clause
                    j += 1
                    continue
                moved = False
                for t in range(2, len(clause)):
                    if not self._is_false(clause[t]):
                        clause[1], clause[t] = clause[t], clause[1]
                        self.watches.setdefault(-clause[1], []).append(clause)
                        moved = True
                        break
                if moved:
                    continue
                watchers[j] = clause
                j += 1
                if self._is_false(clause[0]) or not self._set(clause[0]):
                    conflict = True
                    break
            if conflict:
                while w < n:
                    watchers[j] = watchers[w]
                    j += 1
                    w += 1
                del watchers[j:]
                return False
            del watchers[j:]
        return True

    def rup(self, lits) -> bool:
        """True iff negating the clause propagates to a conflict."""
        if self.contradiction:
            return True
        self._ensure_var(lits)
        mark = len(self.trail)
        conflict = False
        for l in lits:
            if self._is_true(l) or not self._set(-l):
                conflict = True
                break
        if not conflict:
            conflict = not self._propagate_from(mark)
        for lit in self.trail[mark:]:
            self.value[abs(lit)] = 0
        del self.trail[mark:]
        return conflict


def check_drup(cnf: Cnf, proof) -> CheckReport:
    """Forward-check a DRUP proof (list or iterable of ProofLines)."""
    prop = _Propagator(cnf.num_vars)
    for clause in cnf.clauses:
        prop.add_clause(clause)
    prop.propagate_base()
    steps = 0
    missing = 0
    verified = prop.contradiction
    if not verified:
        for idx, line in enumerate(proof):
            steps += 1
            if line.kind is LineKind.DELETE:
                if not prop.delete_clause(line.literals):
                    missing += 1
                continue
            if not prop.rup(line.literals):
                return CheckReport(
                    verdict=Verdict.FAILED,
                    steps_checked=steps,
                    units_propagated=prop.units_propagated,
                    failed_step=idx,
                    reason="clause is not derivable by reverse unit propagation",
                    missing_deletions=missing,
                )
            if not line.literals:
                verified = True
                break
            prop.add_clause(line.literals)
            if not prop.propagate_base():
                verified = True
                break
    return CheckReport(
        verdict=Verdict.VERIFIED if verified else Verdict.FAILED,
        steps_checked=steps,
        units_propagated=prop.units_propagated,
        failed_step=None,
        reason=None if verified else "proof ended without an empty-clause addition",
        missing_deletions=missing,
    )
