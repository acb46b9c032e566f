import pytest

from plane15 import matrix
from plane15.cnf import var_of
from plane15.errors import BadCharacter, BadDimensions, InvariantViolation


def test_default_fixture_has_750_unknowns(fixture_matrix):
    assert len(fixture_matrix.unknown_cells()) == 750


def test_unpropagated_fixture_has_1050_unknowns():
    m = matrix.default_fixture(propagated=False)
    assert len(m.unknown_cells()) == 1050


def test_propagation_forces_exactly_300_zeros():
    m = matrix.default_fixture(propagated=False)
    result = matrix.propagate_forced_zeros(m)
    assert result.count == 300
    assert result.matrix == matrix.default_fixture(propagated=True)


def test_validate_structure_ok(fixture_matrix):
    report = matrix.validate_structure(fixture_matrix)
    assert report.ok
    assert report.findings == []


def test_row_classes(fixture_matrix):
    assert [fixture_matrix.row_class(i) for i in (1, 6)] == ["heavy", "heavy"]
    assert [fixture_matrix.row_class(i) for i in (7, 21)] == ["medium", "medium"]
    assert [fixture_matrix.row_class(i) for i in (22, 51)] == ["light", "light"]


def test_col_classes(fixture_matrix):
    assert fixture_matrix.col_class(1) == "A"
    assert fixture_matrix.col_class(15) == "A"
    assert fixture_matrix.col_class(16) == "C"
    assert fixture_matrix.col_class(75) == "C"


def test_known_rows_pairwise_intersections(fixture_matrix):
    """Any two fully known rows share exactly one One (axiom P2)."""
    ones = [fixture_matrix.row_ones(i) for i in range(1, 22)]
    for a in range(21):
        for b in range(a + 1, 21):
            assert len(ones[a] & ones[b]) == 1, (a + 1, b + 1)


def test_row_weights_in_window(fixture_matrix):
    for i in range(1, 7):
        assert len(fixture_matrix.row_ones(i)) == 5
    for i in range(7, 22):
        assert len(fixture_matrix.row_ones(i)) == 11


def test_col_ones_consistent_with_rows(fixture_matrix):
    for j in (1, 8, 15, 16, 40, 75):
        expected = frozenset(
            i for i in range(1, 52) if fixture_matrix.char(i, j) == "1"
        )
        assert fixture_matrix.col_ones(j) == expected


def test_serialize_round_trip(fixture_matrix):
    text = matrix.serialize(fixture_matrix)
    assert matrix.load_fixture(text) == fixture_matrix


def test_load_fixture_bad_dimensions():
    with pytest.raises(BadDimensions):
        matrix.load_fixture("10\n01\n")


def test_load_fixture_bad_character(fixture_matrix):
    text = matrix.serialize(fixture_matrix).replace("1", "x", 1)
    with pytest.raises(BadCharacter):
        matrix.load_fixture(text)


def test_load_fixture_rejects_broken_invariants(fixture_matrix):
    # flip a known One in row 1 to Zero: heavy row weight invariant breaks
    rows = list(fixture_matrix.rows)
    rows[0] = rows[0].replace("1", "0", 1)
    with pytest.raises(InvariantViolation):
        matrix.load_fixture("\n".join(rows) + "\n")


def test_apply_model_fills_unknowns(fixture_matrix):
    assignment = {
        var_of(r, c): False for r, c in fixture_matrix.unknown_cells()
    }
    filled = matrix.apply_model(fixture_matrix, assignment)
    assert filled.is_fully_known()
    # all unknowns became Zero
    for r, c in fixture_matrix.unknown_cells():
        assert filled.char(r, c) == "0"


def test_apply_model_partial(fixture_matrix):
    r, c = fixture_matrix.unknown_cells()[0]
    out = matrix.apply_model(fixture_matrix, {var_of(r, c): True}, partial=True)
    assert out.char(r, c) == "1"
    assert not out.is_fully_known()


def test_support_sets(fixture_matrix):
    s = matrix.support_sets(fixture_matrix)
    # every medium row carries 3 A-columns and 8 C-columns
    for i in range(7, 22):
        assert len(s.S[i]) == 11
        assert sum(1 for j in s.S[i] if j >= 16) == 8
    # every anchor column is carried by its group of six light rows
    for k, rows in s.T.items():
        assert len(rows) == 6
        assert all(22 <= r <= 51 for r in rows)
