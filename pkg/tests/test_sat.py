import io
import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from plane15 import proof as proofmod, sat
from plane15.cnf import Cnf
from plane15.errors import CallbackContract, ResourceLimit


# ----------------------------------------------------------------------
# brute-force oracle


def oracle_models(num_vars, clauses):
    """All satisfying total assignments as frozensets of true variables."""
    models = []
    for bits in itertools.product((False, True), repeat=num_vars):
        ok = True
        for cl in clauses:
            if not any((bits[abs(l) - 1]) == (l > 0) for l in cl):
                ok = False
                break
        if ok:
            models.append(frozenset(v + 1 for v in range(num_vars) if bits[v]))
    return models


def random_cnf(rng, max_vars=8, max_clauses=30, max_width=4):
    n = rng.randint(1, max_vars)
    m = rng.randint(1, max_clauses)
    clauses = []
    for _ in range(m):
        w = rng.randint(1, min(max_width, n))
        vs = rng.sample(range(1, n + 1), w)
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in vs))
    return n, clauses


def build_cnf(n, clauses):
    cnf = Cnf(num_vars=n)
    for cl in clauses:
        cnf.add(cl, "test")
    return cnf


# ----------------------------------------------------------------------


def test_random_cnfs_match_oracle():
    rng = random.Random(42)
    for trial in range(1500):
        n, clauses = random_cnf(rng)
        cnf = build_cnf(n, clauses)
        out = sat.solve(cnf, config=sat.SolverConfig(seed=trial))
        expected = bool(oracle_models(n, clauses))
        got = out.status is sat.Status.SAT
        assert got == expected, (trial, n, clauses)
        if got:
            assignment = {abs(l): l > 0 for l in out.model}
            for cl in clauses:
                assert any(assignment[abs(l)] == (l > 0) for l in cl)


def test_assumptions_match_oracle():
    rng = random.Random(7)
    for trial in range(600):
        n, clauses = random_cnf(rng, max_vars=7)
        k = rng.randint(1, n)
        assume = [
            v if rng.random() < 0.5 else -v
            for v in rng.sample(range(1, n + 1), k)
        ]
        cnf = build_cnf(n, clauses)
        out = sat.solve(cnf, assumptions=assume)
        expected = bool(
            oracle_models(n, clauses + [(a,) for a in assume])
        )
        base_sat = bool(oracle_models(n, clauses))
        if expected:
            assert out.status is sat.Status.SAT
            model_map = {abs(l): l > 0 for l in out.model}
            for a in assume:
                assert model_map[abs(a)] == (a > 0)
        elif base_sat:
            assert out.status is sat.Status.UNSAT_UNDER_ASSUMPTIONS
            # the failed core must itself be contradictory with the formula
            assert out.core
            assert not oracle_models(n, clauses + [(a,) for a in out.core])
        else:
            assert out.status in (
                sat.Status.UNSAT,
                sat.Status.UNSAT_UNDER_ASSUMPTIONS,
            )


def test_incremental_reuse_is_consistent():
    rng = random.Random(11)
    for trial in range(120):
        n, clauses = random_cnf(rng, max_vars=7)
        cnf = build_cnf(n, clauses)
        solver = sat.Solver(cnf)
        for _ in range(5):
            k = rng.randint(0, n)
            assume = [
                v if rng.random() < 0.5 else -v
                for v in rng.sample(range(1, n + 1), k)
            ]
            out = solver.solve(assumptions=assume)
            expected = bool(oracle_models(n, clauses + [(a,) for a in assume]))
            assert (out.status is sat.Status.SAT) == expected


def test_enumeration_matches_oracle():
    rng = random.Random(3)
    for trial in range(300):
        n, clauses = random_cnf(rng, max_vars=6, max_clauses=15)
        cnf = build_cnf(n, clauses)
        projection = tuple(range(1, n + 1))
        models = sat.enumerate_models(cnf, sat.self_blocking_hook(projection))
        got = {frozenset(l for l in m if l > 0) for m in models}
        expected = set(oracle_models(n, clauses))
        assert got == expected, (trial, clauses)


def test_projected_enumeration():
    # x1 free, clause forces x2 true: projecting onto {2} gives one model
    cnf = build_cnf(2, [(2,)])
    models = sat.enumerate_models(cnf, sat.self_blocking_hook((2,)))
    assert models == [(2,)]


def test_unsat_proofs_verified():
    rng = random.Random(17)
    checked = 0
    for trial in range(400):
        n, clauses = random_cnf(rng)
        if oracle_models(n, clauses):
            continue
        cnf = build_cnf(n, clauses)
        buf = io.StringIO()
        out = sat.solve(cnf, proof=sat.DrupSink(buf))
        assert out.status is sat.Status.UNSAT
        report = proofmod.check_drup(
            cnf, proofmod.parse_drup(io.StringIO(buf.getvalue()))
        )
        assert report.ok, (trial, clauses, buf.getvalue())
        checked += 1
    assert checked > 50


def test_callback_contract_enforced():
    cnf = build_cnf(2, [(1, 2)])
    hook = sat.EnumerationHook(
        projection=(1, 2), on_model=lambda projected: [(1, 2)]
    )
    with pytest.raises(CallbackContract):
        sat.Solver(cnf).enumerate(hook)


def test_resource_limit_conflicts():
    # pigeonhole-ish hard instance: 4 holes, 5 pigeons
    clauses = []
    def v(p, h):
        return p * 4 + h + 1
    for p in range(5):
        clauses.append(tuple(v(p, h) for h in range(4)))
    for h in range(4):
        for p1 in range(5):
            for p2 in range(p1 + 1, 5):
                clauses.append((-v(p1, h), -v(p2, h)))
    cnf = build_cnf(20, clauses)
    with pytest.raises(ResourceLimit):
        sat.solve(cnf, config=sat.SolverConfig(max_conflicts=3))


def test_luby_sequence():
    assert [sat.luby(i) for i in range(15)] == [
        1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8,
    ]


def test_seed_changes_are_still_correct():
    rng = random.Random(23)
    n, clauses = random_cnf(rng, max_vars=8, max_clauses=20)
    expected = bool(oracle_models(n, clauses))
    for seed in range(5):
        out = sat.solve(build_cnf(n, clauses), config=sat.SolverConfig(seed=seed))
        assert (out.status is sat.Status.SAT) == expected


@settings(max_examples=300, deadline=None)
@given(st.data())
def test_hypothesis_random_formulas(data):
    n = data.draw(st.integers(min_value=1, max_value=6))
    clauses = data.draw(
        st.lists(
            st.lists(
                st.integers(min_value=1, max_value=n).flatmap(
                    lambda v: st.sampled_from([v, -v])
                ),
                min_size=1,
                max_size=4,
            ).map(tuple),
            min_size=1,
            max_size=12,
        )
    )
    cnf = build_cnf(n, clauses)
    out = sat.solve(cnf)
    expected = bool(oracle_models(n, clauses))
    assert (out.status is sat.Status.SAT) == expected
