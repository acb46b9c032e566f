"""Embedded CDCL SAT solver.

Conflict-driven clause learning with two watched literals, first-UIP
conflict analysis with clause minimization, activity-based decisions
(exponential decay), phase saving, geometric restarts, activity-based
learnt-clause reduction, incremental solving under assumptions, DRUP
proof logging, and all-solutions enumeration through a programmatic
callback that injects blocking clauses.

Literals cross the API boundary as DIMACS-style signed integers.
Internally a literal is encoded as var<<1 for the positive and
var<<1 | 1 for the negative polarity.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum
from heapq import heappop, heappush

from .cnf import Cnf
from .errors import CallbackContract, ResourceLimit, SinkFailure


def _enc(lit: int) -> int:
    return (abs(lit) << 1) | (lit < 0)


def _dec(enc: int) -> int:
    v = enc >> 1
    return -v if enc & 1 else v


class Status(Enum):
    SAT = "sat"
    UNSAT = "unsat"
    UNSAT_UNDER_ASSUMPTIONS = "unsat-under-assumptions"


@dataclass(frozen=True)
class SolveOutcome:
    status: Status
    model: tuple[int, ...] = ()  # total assignment, DIMACS literals
    core: tuple[int, ...] = ()  # subset of assumptions implying conflict


@dataclass
class SolverConfig:
    """Heuristic constants; defaults are pinned for reproducibility."""

    seed: int = 0
    var_decay: float = 0.95
    clause_decay: float = 0.999
    restart_policy: str = "luby"  # "luby" or "geometric"
    restart_first: int = 32
    restart_inc: float = 1.5
    learnt_size_frac: float = 0.3
    learnt_size_inc: float = 1.1
    max_conflicts: int | None = None
    max_seconds: float | None = None


@dataclass
class EnumerationHook:
    """projection: variables whose values constitute a reported model.

    on_model receives the projected model (DIMACS literals over the
    projection variables, in ascending variable order) and must return
    a non-empty list of blocking clauses.  At least one returned clause
    must be falsified by the current total model, otherwise enumeration
    could loop forever and CallbackContract is raised.  (A clause that
    is not falsified by the current model is permitted so that a single
    callback can block a whole equivalence class of models at once.)
    """

    projection: tuple[int, ...]
    on_model: callable = None


def self_blocking_hook(projection) -> EnumerationHook:
    """Plain all-solutions hook: block exactly the model just found."""

    def on_model(projected):
        return [tuple(-l for l in projected)]

    return EnumerationHook(projection=tuple(projection), on_model=on_model)


class DrupSink:
    """Writes DRUP proof text to a file object or path."""

    def __init__(self, destination):
        if hasattr(destination, "write"):
            self._f = destination
            self._own = False
        else:
            self._f = open(destination, "w")
            self._own = True

    def _emit(self, text: str) -> None:
        try:
            self._f.write(text)
        except OSError as e:
            raise SinkFailure(str(e)) from e

    def add(self, dimacs_lits) -> None:
        self._emit(" ".join(map(str, dimacs_lits)) + " 0\n")

    def delete(self, dimacs_lits) -> None:
        self._emit("d " + " ".join(map(str, dimacs_lits)) + " 0\n")

    def empty_clause(self) -> None:
        self._emit("0\n")

    def close(self) -> None:
        if self._own:
            self._f.close()


class Solver:
    """One CDCL instance over a fixed variable range.

    The instance is reusable: solve() may be called repeatedly with
    different assumptions, retaining learnt clauses (incremental-style
    interface).  Not thread-safe; run separate instances concurrently
    instead.
    """

    def __init__(self, cnf: Cnf, config: SolverConfig | None = None, proof: DrupSink | None = None):
        self.cfg = config or SolverConfig()
        self.proof = proof
        n = cnf.num_vars
        self.num_vars = n
        self.assign = bytearray(n + 1)  # 0 unset, 1 true, 2 false
        self.level = [0] * (n + 1)
        self.reason = [None] * (n + 1)
        self.activity = [0.0] * (n + 1)
        self.saved_phase = bytearray(n + 1)  # 0/2 -> try false first, 1 -> true
        self.watches = [[] for _ in range(2 * n + 2)]
        self.trail = []
        self.trail_lim = []
        self.qhead = 0
        self.clauses = []  # problem + injected clauses
        self.learnts = []
        self.cla_activity = {}
        self.var_inc = 1.0
        self.cla_inc = 1.0
        self.ok = True
        self.conflicts = 0
        self._seen = bytearray(n + 1)
        for clause in cnf.clauses:
            self._add_input_clause(clause)

    # ------------------------------------------------------------------
    # clause management

    def _add_input_clause(self, dimacs_lits) -> bool:
        """Add a problem clause at level 0.  Returns False on conflict."""
        if not self.ok:
            return False
        lits = sorted({_enc(l) for l in dimacs_lits})
        out = []
        for e in lits:
            if (e ^ 1) in out:
                return True  # tautology
        for e in lits:
            val = self.assign[e >> 1]
            if val and self.level[e >> 1] == 0:
                if val == 1 + (e & 1):
                    return True  # satisfied at level 0
                continue  # falsified at level 0: drop literal
            out.append(e)
        if not out:
            self.ok = False
            return False
        if len(out) == 1:
            if not self._enqueue(out[0], None):
                self.ok = False
                return False
            self.ok = self._propagate() is None
            return self.ok
        clause = out
        self.clauses.append(clause)
        self._attach(clause)
        return True

    def add_clause(self, dimacs_lits, log_proof: bool = True) -> bool:
        """Inject a clause between solves (level 0).

        Logged to the proof as an addition so downstream checking can
        treat injected clauses like learnt ones.  Returns False if the
        database became unsatisfiable.
        """
        self._cancel_until(0)
        if self.proof and log_proof:
            self.proof.add(dimacs_lits)
        ok = self._add_input_clause(dimacs_lits)
        if not ok and self.proof:
            self.proof.empty_clause()
        return ok

    def _attach(self, clause) -> None:
        self.watches[clause[0] ^ 1].append([clause, clause[1]])
        self.watches[clause[1] ^ 1].append([clause, clause[0]])

    def _detach_all_and_rebuild(self) -> None:
        self.watches = [[] for _ in range(2 * self.num_vars + 2)]
        for clause in self.clauses:
            self._attach(clause)
        for clause in self.learnts:
            self._attach(clause)

    # ------------------------------------------------------------------
    # assignment trail

    def _lit_true(self, e: int) -> bool:
        return self.assign[e >> 1] == 1 + (e & 1)

    def _lit_false(self, e: int) -> bool:
        return self.assign[e >> 1] == 2 - (e & 1)

    def _enqueue(self, e: int, reason_clause) -> bool:
        v = e >> 1
        if self.assign[v]:
            return self.assign[v] == 1 + (e & 1)
        self.assign[v] = 1 + (e & 1)
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason_clause
        self.trail.append(e)
        return True

    def _cancel_until(self, lvl: int) -> None:
        if len(self.trail_lim) <= lvl:
            return
        bound = self.trail_lim[lvl]
        for i in range(len(self.trail) - 1, bound - 1, -1):
            e = self.trail[i]
            v = e >> 1
            self.saved_phase[v] = self.assign[v]
            self.assign[v] = 0
            self.reason[v] = None
            heappush(self._order, (-self.activity[v], v))
        del self.trail[bound:]
        del self.trail_lim[lvl:]
        self.qhead = len(self.trail)

    # ------------------------------------------------------------------
    # propagation

    def _propagate(self):
        watches = self.watches
        assign = self.assign
        trail = self.trail
        while self.qhead < len(trail):
            p = trail[self.qhead]
            self.qhead += 1
            false_lit = p ^ 1
            ws = watches[p]  # watchers of ~(made-true literal): stored under index of the watched literal's negation
            i = j = 0
            n = len(ws)
            confl = None
            while i < n:
                entry = ws[i]
                i += 1
                blocker = entry[1]
                if assign[blocker >> 1] == 1 + (blocker & 1):
                    ws[j] = entry
                    j += 1
                    continue
                clause = entry[0]
                if clause[0] == false_lit:
                    clause[0], clause[1] = clause[1], false_lit
                first = clause[0]
                if first != blocker and assign[first >> 1] == 1 + (first & 1):
                    entry[1] = first
                    ws[j] = entry
                    j += 1
                    continue
                # search a new watch
                found = False
                for k in range(2, len(clause)):
                    lk = clause[k]
                    if assign[lk >> 1] != 2 - (lk & 1):
                        clause[1] = lk
                        clause[k] = false_lit
                        watches[lk ^ 1].append(entry)
                        found = True
                        break
                if found:
                    continue
                # unit or conflict
                entry[1] = first
                ws[j] = entry
                j += 1
                if assign[first >> 1] == 2 - (first & 1):
                    confl = clause
                    self.qhead = len(trail)
                    while i < n:
                        ws[j] = ws[i]
                        j += 1
                        i += 1
                    break
                else:
                    self._enqueue(first, clause)
            del ws[j:]
            if confl is not None:
                return confl
        return None

    # ------------------------------------------------------------------
    # activity

    def _bump_var(self, v: int) -> None:
        self.activity[v] += self.var_inc
        if self.activity[v] > 1e100:
            for x in range(1, self.num_vars + 1):
                self.activity[x] *= 1e-100
            self.var_inc *= 1e-100
        if self.assign[v] == 0:
            heappush(self._order, (-self.activity[v], v))

    def _bump_clause(self, clause) -> None:
        key = id(clause)
        act = self.cla_activity.get(key)
        if act is None:
            return
        act += self.cla_inc
        if act > 1e20:
            for k in self.cla_activity:
                self.cla_activity[k] *= 1e-20
            self.cla_inc *= 1e-20
            act = self.cla_activity[key] + self.cla_inc
        self.cla_activity[key] = act

    # ------------------------------------------------------------------
    # conflict analysis

    def _analyze(self, confl):
        seen = self._seen
        learnt = [0]
        path = 0
        p = None
        index = len(self.trail) - 1
        cur_level = len(self.trail_lim)
        to_clear = []
        c = confl
        while True:
            self._bump_clause(c)
            for q in (c if p is None else c[1:]):
                v = q >> 1
                if not seen[v] and self.level[v] > 0:
                    seen[v] = 1
                    to_clear.append(v)
                    self._bump_var(v)
                    if self.level[v] >= cur_level:
                        path += 1
                    else:
                        learnt.append(q)
            while not seen[self.trail[index] >> 1]:
                index -= 1
            p = self.trail[index]
            c = self.reason[p >> 1]
            seen[p >> 1] = 0
            index -= 1
            path -= 1
            if path == 0:
                break
        learnt[0] = p ^ 1

        # clause minimization: drop literals implied by the rest
        kept = [learnt[0]]
        for q in learnt[1:]:
            if self.reason[q >> 1] is None or not self._redundant(q, to_clear):
                kept.append(q)
        for v in to_clear:
            seen[v] = 0

        # backtrack level = second-highest level in the clause
        if len(kept) == 1:
            bt = 0
        else:
            levels = sorted((self.level[q >> 1] for q in kept[1:]), reverse=True)
            bt = levels[0]
            # move a literal of the backtrack level to position 1
            for idx in range(1, len(kept)):
                if self.level[kept[idx] >> 1] == bt:
                    kept[1], kept[idx] = kept[idx], kept[1]
                    break
        return kept, bt

    def _redundant(self, q, to_clear) -> bool:
        """True if q is implied by the other learnt literals (so it can
        be dropped).  Walks reasons; any decision reached means q is
        needed.  Marks made on success stay seen (standard behavior)."""
        seen = self._seen
        stack = [q]
        marked = []
        while stack:
            e = stack.pop()
            reason_clause = self.reason[e >> 1]
            if reason_clause is None:
                for v in marked:
                    seen[v] = 0
                return False
            for lit in reason_clause[1:]:
                v = lit >> 1
                if not seen[v] and self.level[v] > 0:
                    seen[v] = 1
                    marked.append(v)
                    to_clear.append(v)
                    stack.append(lit)
        return True

    # ------------------------------------------------------------------
    # learnt DB reduction

    def _reduce_db(self) -> None:
        act = self.cla_activity
        self.learnts.sort(key=lambda cl: act.get(id(cl), 0.0))
        locked = {id(self.reason[e >> 1]) for e in self.trail if self.reason[e >> 1] is not None}
        keep = []
        limit = len(self.learnts) // 2
        removed = []
        for idx, cl in enumerate(self.learnts):
            if idx < limit and len(cl) > 2 and id(cl) not in locked:
                removed.append(cl)
                act.pop(id(cl), None)
            else:
                keep.append(cl)
        if not removed:
            return
        self.learnts = keep
        self._detach_all_and_rebuild()
        if self.proof:
            for cl in removed:
                self.proof.delete([_dec(e) for e in cl])

    # ------------------------------------------------------------------
    # decisions

    def _pick_branch(self):
        while self._order:
            negact, v = heappop(self._order)
            if self.assign[v] == 0:
                phase = self.saved_phase[v]
                return (v << 1) | (0 if phase == 1 else 1)
        for v in range(1, self.num_vars + 1):
            if self.assign[v] == 0:
                return (v << 1) | 1
        return None

    # ------------------------------------------------------------------
    # main search

    def solve(self, assumptions=()) -> SolveOutcome:
        self._cancel_until(0)
        if not self.ok:
            if self.proof:
                self.proof.empty_clause()
            return SolveOutcome(status=Status.UNSAT)
        self._order = []
        for v in range(1, self.num_vars + 1):
            if self.assign[v] == 0:
                heappush(self._order, (-self.activity[v], v))
        assume = [_enc(l) for l in assumptions]
        restart_count = 0
        if self.cfg.restart_policy == "luby":
            restart_limit = self.cfg.restart_first * luby(0)
        else:
            restart_limit = self.cfg.restart_first
        conflicts_at_restart = 0
        max_learnts = max(1000, int(len(self.clauses) * self.cfg.learnt_size_frac))
        start = time.monotonic()

        confl = self._propagate()
        if confl is not None:
            self.ok = False
            if self.proof:
                self.proof.empty_clause()
            return SolveOutcome(status=Status.UNSAT)

        while True:
            confl = self._propagate()
            if confl is not None:
                self.conflicts += 1
                conflicts_at_restart += 1
                if len(self.trail_lim) == 0:
                    self.ok = False
                    if self.proof:
                        self.proof.empty_clause()
                    return SolveOutcome(status=Status.UNSAT)
                learnt, bt = self._analyze(confl)
                self._cancel_until(bt)
                if self.proof:
                    self.proof.add([_dec(e) for e in learnt])
                if len(learnt) == 1:
                    if not self._enqueue(learnt[0], None):
                        self.ok = False
                        if self.proof:
                            self.proof.empty_clause()
                        return SolveOutcome(status=Status.UNSAT)
                else:
                    clause = learnt
                    self.learnts.append(clause)
                    self.cla_activity[id(clause)] = self.cla_inc
                    self._attach(clause)
                    self._enqueue(clause[0], clause)
                self.var_inc /= self.cfg.var_decay
                self.cla_inc /= self.cfg.clause_decay
                if self.cfg.max_conflicts is not None and self.conflicts >= self.cfg.max_conflicts:
                    raise ResourceLimit(f"conflict budget {self.cfg.max_conflicts} exhausted")
                if self.cfg.max_seconds is not None and time.monotonic() - start > self.cfg.max_seconds:
                    raise ResourceLimit(f"time budget {self.cfg.max_seconds}s exhausted")
                continue

            if conflicts_at_restart >= restart_limit and len(self.trail_lim) > len(assume):
                conflicts_at_restart = 0
                restart_count += 1
                if self.cfg.restart_policy == "luby":
                    restart_limit = self.cfg.restart_first * luby(restart_count)
                else:
                    restart_limit = int(restart_limit * self.cfg.restart_inc)
                self._cancel_until(len(assume))
                continue

            if len(self.learnts) >= max_learnts:
                self._reduce_db()
                max_learnts = int(max_learnts * self.cfg.learnt_size_inc)

            # next decision: pending assumptions first
            dl = len(self.trail_lim)
            if dl < len(assume):
                e = assume[dl]
                if self._lit_true(e):
                    self.trail_lim.append(len(self.trail))
                    continue
                if self._lit_false(e):
                    core = self._analyze_final(e)
                    return SolveOutcome(
                        status=Status.UNSAT_UNDER_ASSUMPTIONS, core=tuple(core)
                    )
                self.trail_lim.append(len(self.trail))
                self._enqueue(e, None)
                continue
            decision = self._pick_branch()
            if decision is None:
                model = tuple(
                    v if self.assign[v] == 1 else -v
                    for v in range(1, self.num_vars + 1)
                )
                return SolveOutcome(status=Status.SAT, model=model)
            self.trail_lim.append(len(self.trail))
            self._enqueue(decision, None)

    def _analyze_final(self, failed_enc) -> list[int]:
        """Assumptions implying the negation of the failed assumption."""
        core = [_dec(failed_enc)]
        if not self.trail_lim:
            return core
        seen = bytearray(self.num_vars + 1)
        seen[failed_enc >> 1] = 1
        for i in range(len(self.trail) - 1, self.trail_lim[0] - 1, -1):
            e = self.trail[i]
            v = e >> 1
            if not seen[v]:
                continue
            r = self.reason[v]
            if r is None:
                core.append(_dec(e))
            else:
                for lit in r[1:]:
                    if self.level[lit >> 1] > 0:
                        seen[lit >> 1] = 1
        return core

    # ------------------------------------------------------------------
    # enumeration

    def enumerate(self, hook: EnumerationHook) -> list[tuple[int, ...]]:
        """All projected models not excluded by callback clauses.

        After each model the callback's blocking clauses are added at
        level zero and the search restarts; with a self-blocking
        callback this enumerates every solution projected onto the
        projection variables.
        """
        projection = sorted(hook.projection)
        models = []
        while True:
            outcome = self.solve()
            if outcome.status is Status.UNSAT:
                return models
            model_map = {abs(l): l > 0 for l in outcome.model}
            projected = tuple(v if model_map[v] else -v for v in projection)
            clauses = hook.on_model(projected)
            if not clauses:
                raise CallbackContract("callback returned no blocking clauses")
            falsified = False
            for cl in clauses:
                if all(not _model_satisfies_literal(model_map, l) for l in cl):
                    falsified = True
                    break
            if not falsified:
                raise CallbackContract(
                    "no returned clause is falsified by the current model"
                )
            models.append(projected)
            for cl in clauses:
                if not self.add_clause(cl):
                    return models


def luby(x: int) -> int:
    """x-th term (0-based) of the Luby sequence 1,1,2,1,1,2,4,1,..."""
    size, seq = 1, 0
    while size < x + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != x:
        size = (size - 1) >> 1
        seq -= 1
        x %= size
    return 1 << seq


def _model_satisfies_literal(model_map: dict, lit: int) -> bool:
    return model_map.get(abs(lit), False) == (lit > 0)


def solve(cnf: Cnf, assumptions=(), config: SolverConfig | None = None, proof: DrupSink | None = None) -> SolveOutcome:
    return Solver(cnf, config=config, proof=proof).solve(assumptions)


def enumerate_models(cnf: Cnf, hook: EnumerationHook, config: SolverConfig | None = None, proof: DrupSink | None = None) -> list[tuple[int, ...]]:
    return Solver(cnf, config=config, proof=proof).enumerate(hook)
