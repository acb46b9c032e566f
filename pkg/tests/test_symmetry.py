import random

import pytest

from plane15 import symmetry
from plane15.errors import InvariantViolation


def test_group_order_720(group):
    assert group.order == 720


def test_stabilizer_order_48(stab):
    assert stab.order == 48


def test_group_axioms(group):
    group.verify_group_axioms()  # raises on failure


def test_identity_present(group):
    assert sum(1 for e in group.elements if e.is_identity()) == 1


def test_compose_inverse_is_identity(group):
    rng = random.Random(0)
    for e in rng.sample(group.elements, 25):
        assert e.compose(e.inverse()).is_identity()
        assert e.inverse().compose(e).is_identity()


def test_stabilizer_fixes_column_one(stab):
    for e in stab.elements:
        assert e.col_perm[1] == 1


def test_stabilizer_is_subgroup(group, stab):
    members = set(group.elements)
    assert all(e in members for e in stab.elements)
    stab.verify_group_axioms()


def test_apply_identity(stab, sample_completion):
    ident = next(e for e in stab.elements if e.is_identity())
    assert symmetry.apply_to_completion(ident, sample_completion) == sample_completion


def test_action_is_compatible_with_composition(stab, sample_completion):
    rng = random.Random(1)
    for _ in range(20):
        a = rng.choice(stab.elements)
        b = rng.choice(stab.elements)
        lhs = symmetry.apply_to_completion(
            a, symmetry.apply_to_completion(b, sample_completion)
        )
        rhs = symmetry.apply_to_completion(a.compose(b), sample_completion)
        assert lhs == rhs


def test_orbit_properties(stab, sample_completion):
    record = symmetry.orbit(stab, sample_completion)
    assert sample_completion in record.members
    assert record.representative == min(record.members)
    assert record.orbit_size == len(record.members)
    assert stab.order % record.orbit_size == 0  # orbit-stabilizer theorem
    # the orbit is closed under the stabilizer action
    member_set = set(record.members)
    for e in stab.elements:
        for m in record.members:
            assert symmetry.apply_to_completion(e, m) in member_set


def test_canonical_is_idempotent(stab, sample_completion):
    canon = symmetry.canonical(stab, sample_completion)
    assert symmetry.canonical(stab, canon) == canon


def test_blocking_clauses(stab, sample_completion):
    record = symmetry.orbit(stab, sample_completion)
    clauses = symmetry.blocking_clauses(stab, sample_completion)
    assert len(clauses) == record.orbit_size
    for cl in clauses:
        assert len(cl) == 30
        assert all(l < 0 for l in cl)
    # each clause is falsified exactly by its member's assignment
    lit_sets = {frozenset(-l for l in cl) for cl in clauses}
    assert lit_sets == {frozenset(m.literals()) for m in record.members}


def test_completion_validation():
    with pytest.raises(InvariantViolation):
        symmetry.Completion.from_cells([(22, 30)])  # wrong size
    cells = [(22, 30 + k) for k in range(30)]  # 30 cells all in one row
    with pytest.raises(InvariantViolation):
        symmetry.Completion.from_cells(cells)


def test_symmetry_json_round_trip(stab):
    e = stab.elements[5]
    d = e.to_json_dict()
    assert len(d["row_perm"]) == 21
    assert len(d["col_perm"]) == 75
    back = symmetry.Symmetry(
        row_perm=(0,) + tuple(d["row_perm"]),
        col_perm=(0,) + tuple(d["col_perm"]),
    )
    assert back == e
