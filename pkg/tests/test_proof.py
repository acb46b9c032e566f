import io
import random

import pytest

from plane15 import proof as proofmod, sat
from plane15.cnf import Cnf
from plane15.errors import ParseError

from test_sat import build_cnf, oracle_models, random_cnf


def check_text(cnf, text):
    return proofmod.check_drup(cnf, proofmod.parse_drup(io.StringIO(text)))


def test_handcrafted_valid_proof():
    # (a|b) (a|-b) (-a|b) (-a|-b) refuted via unit a then empty
    cnf = build_cnf(2, [(1, 2), (1, -2), (-1, 2), (-1, -2)])
    report = check_text(cnf, "1 0\n0\n")
    assert report.ok


def test_implicit_conflict_short_circuits():
    """Adding a unit whose propagation already conflicts completes the
    proof without an explicit empty-clause line."""
    cnf = build_cnf(2, [(1, 2), (1, -2), (-1, 2), (-1, -2)])
    report = check_text(cnf, "1 0\n")
    assert report.ok
    assert report.steps_checked == 1


def test_non_rup_step_rejected():
    cnf = build_cnf(3, [(1, 2), (-1, 3)])
    report = check_text(cnf, "3 0\n")
    assert not report.ok
    assert report.failed_step == 0
    assert "reverse unit propagation" in report.reason


def test_proof_without_empty_clause_fails():
    # satisfiable formula stays satisfiable after the derived unit
    cnf = build_cnf(2, [(1, 2), (-1, 2)])
    report = check_text(cnf, "2 0\n")
    assert not report.ok
    assert "empty-clause" in report.reason


def test_deletions_tracked():
    cnf = build_cnf(3, [(1, 2), (1, -2), (-1, 2), (-1, -2), (3, 1)])
    # deleting the redundant (3 1) is fine; deleting an absent clause is
    # counted, not fatal
    report = check_text(cnf, "d 3 1 0\nd 1 -2 -1 0\n1 0\n0\n")
    assert report.ok
    assert report.missing_deletions == 1


def test_deleting_needed_clause_breaks_proof():
    cnf = build_cnf(2, [(1, 2), (1, -2), (-1, 2), (-1, -2)])
    report = check_text(cnf, "d 1 2 0\n1 0\n")
    assert not report.ok


def test_parse_errors():
    with pytest.raises(ParseError):
        proofmod.parse_drup(io.StringIO("1 2\n"))  # not 0-terminated
    with pytest.raises(ParseError):
        proofmod.parse_drup(io.StringIO("1 x 0\n"))
    with pytest.raises(ParseError):
        proofmod.parse_drup(io.StringIO("1 0 2 0\n"))


def test_comments_and_blanks_ignored():
    lines = proofmod.parse_drup(io.StringIO("c hi\n\n1 0\nd 1 0\n0\n"))
    kinds = [l.kind for l in lines]
    assert kinds == [
        proofmod.LineKind.ADD,
        proofmod.LineKind.DELETE,
        proofmod.LineKind.ADD,
    ]
    assert lines[-1].literals == ()


def test_tautology_in_input_is_inert():
    cnf = Cnf(num_vars=1)
    cnf.clauses.append((1, -1))  # bypass Cnf.add's tautology filter
    cnf.tags.append("test")
    report = proofmod.check_drup(cnf, [])
    assert not report.ok  # satisfiable formula: nothing to verify


def _unsat_corpus(count=150, seed=29):
    """Random UNSAT formulas with their solver-produced proofs."""
    rng = random.Random(seed)
    corpus = []
    while len(corpus) < count:
        n, clauses = random_cnf(rng)
        if oracle_models(n, clauses):
            continue
        cnf = build_cnf(n, clauses)
        buf = io.StringIO()
        out = sat.solve(cnf, proof=sat.DrupSink(buf))
        assert out.status is sat.Status.UNSAT
        lines = proofmod.parse_drup(io.StringIO(buf.getvalue()))
        if len(lines) >= 2:  # trivial one-line proofs mutate uselessly
            corpus.append((cnf, lines))
    return corpus


def mutate(rng, lines):
    """One random single-line corruption of a proof."""
    lines = list(lines)
    idx = rng.randrange(len(lines))
    line = lines[idx]
    choice = rng.randrange(4)
    if choice == 0:
        del lines[idx]
    elif choice == 1 and line.literals:
        lits = list(line.literals)
        p = rng.randrange(len(lits))
        lits[p] = -lits[p]
        lines[idx] = proofmod.ProofLine(kind=line.kind, literals=tuple(lits))
    elif choice == 2 and line.literals:
        lits = list(line.literals)
        p = rng.randrange(len(lits))
        max_var = max((abs(l) for ln in lines for l in ln.literals), default=1)
        v = abs(lits[p]) % max_var + 1
        lits[p] = v if lits[p] > 0 else -v
        lines[idx] = proofmod.ProofLine(kind=line.kind, literals=tuple(lits))
    else:
        flipped = (
            proofmod.LineKind.DELETE
            if line.kind is proofmod.LineKind.ADD
            else proofmod.LineKind.ADD
        )
        lines[idx] = proofmod.ProofLine(kind=flipped, literals=line.literals)
    return lines


def naive_rup_check(cnf, lines) -> bool:
    """Deliberately simple reference DRUP checker (no watched literals,
    quadratic scans) used as an independent judge for the mutation
    harness.  A mutation is a genuine corruption iff this judge rejects
    the mutated proof."""

    def propagate(clauses, assigned):
        assigned = dict(assigned)
        changed = True
        while changed:
            changed = False
            for cl in clauses:
                unassigned = []
                satisfied = False
                for l in cl:
                    v = assigned.get(abs(l))
                    if v is None:
                        unassigned.append(l)
                    elif v == (l > 0):
                        satisfied = True
                        break
                if satisfied:
                    continue
                if not unassigned:
                    return None  # conflict
                if len(unassigned) == 1:
                    l = unassigned[0]
                    assigned[abs(l)] = l > 0
                    changed = True
        return assigned

    def is_rup(clauses, lits):
        if any(-l in lits for l in lits):
            return True  # the clause is a tautology; its negation conflicts
        assigned = {abs(l): (l < 0) for l in lits}
        return propagate(clauses, assigned) is None

    active = [list(set(cl)) for cl in cnf.clauses]
    active = [cl for cl in active if not any(-l in cl for l in cl)]
    if propagate(active, {}) is None:
        return True
    for line in lines:
        key = frozenset(line.literals)
        if line.kind is proofmod.LineKind.DELETE:
            for i, cl in enumerate(active):
                if frozenset(cl) == key:
                    del active[i]
                    break
            continue
        if not is_rup(active, line.literals):
            return False
        if not line.literals:
            return True
        if not any(-l in key for l in key):
            active.append(list(key))
        if propagate(active, {}) is None:
            return True
    return False


def test_mutation_harness_small():
    """Single-line proof corruptions must be rejected; mutations that
    happen to leave a valid proof (per an independent naive judge) are
    benign and their fraction is reported rather than counted against
    the checker."""
    rng = random.Random(31)
    corpus = _unsat_corpus(count=40)
    corruptions = rejected_corruptions = benign = 0
    for cnf, lines in corpus:
        for _ in range(5):
            mutant = mutate(rng, lines)
            ok = proofmod.check_drup(cnf, mutant).ok
            valid = naive_rup_check(cnf, mutant)
            assert ok == valid, (cnf.clauses, [l for l in mutant])
            if valid:
                benign += 1
            else:
                corruptions += 1
                rejected_corruptions += 1  # ok == valid was just asserted
    assert corruptions + benign == 200
    assert corruptions > 0
    assert rejected_corruptions == corruptions  # 100% >= 99% required


def test_differential_against_second_propagation():
    """The checker's base propagation agrees with the solver's verdict
    on formulas decided purely by unit propagation."""
    rng = random.Random(37)
    for _ in range(300):
        n, clauses = random_cnf(rng, max_vars=6, max_clauses=12, max_width=2)
        cnf = build_cnf(n, clauses)
        report = proofmod.check_drup(cnf, [])
        out = sat.solve(cnf)
        if report.ok:  # empty proof verified => input already contradictory
            assert out.status is sat.Status.UNSAT
