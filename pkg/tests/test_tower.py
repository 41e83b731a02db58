"""Refinement tower: frozen level data, filtration maps, commuting squares."""

import pytest

from shiftca.errors import IllDefinedTransition, InputFormatError
from shiftca.presentations import Presentation
from shiftca.tower import (
    build_tower,
    filtration_M,
    filtration_map_A,
    filtration_map_I,
    matrix_A,
    matrix_B,
    matrix_I,
    projection_delta,
    stable_permutation,
)

GOLDEN = Presentation.sft(("0", "1"), ((1, 1), (1, 0)))
EVEN = Presentation.labeled_graph(
    ("0", "1"), 2, [(0, 0, "0"), (0, 1, "1"), (1, 0, "1")]
)
FULL2 = Presentation.sft(("a", "b"), ((1, 1), (1, 1)))
POINT = Presentation.sft(("0",), ((1,),))


def partition_at(tw, l):
    return frozenset(frozenset(c.tsets) for c in tw.level(l).classes)


def test_golden_frozen_tower():
    tw = build_tower(GOLDEN)
    assert tw.stabilized_at == 1
    assert [tw.m(l) for l in range(3)] == [1, 2, 2]
    assert matrix_I(tw, 1).to_lists() == [[0, 1], [1, 0]]
    assert matrix_A(tw, 1).to_lists() == [[1, 1], [0, 1]]
    assert matrix_B(tw, 1).to_lists() == [[-1, 0], [1, -1]]
    assert tw.summary() == {
        "tsets": 2,
        "monoid": 5,
        "m": [1, 2, 2],
        "stabilized_at": 1,
    }


def test_even_shift_frozen_tower():
    tw = build_tower(EVEN)
    assert tw.stabilized_at == 2
    assert [tw.m(l) for l in range(4)] == [1, 2, 3, 3]
    assert matrix_I(tw, 2).to_lists() == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    assert matrix_A(tw, 2).to_lists() == [[1, 1, 0], [0, 1, 1], [0, 1, 0]]
    assert matrix_B(tw, 2).to_lists() == [[0, -1, 0], [0, 0, -1], [0, -1, 1]]


def test_full_shift_and_single_point_towers():
    tw = build_tower(FULL2)
    assert tw.stabilized_at == 0
    assert matrix_B(tw, 1).to_lists() == [[-1]]
    tw = build_tower(POINT)
    assert tw.stabilized_at == 0
    assert matrix_B(tw, 1).to_lists() == [[0]]


def test_per_symbol_transition_matrices_sum():
    tw = build_tower(GOLDEN)
    total = matrix_A(tw, 1, 0) + matrix_A(tw, 1, 1)
    assert total.to_lists() == matrix_A(tw, 1).to_lists()


def test_refinement_rows_are_unit_vectors():
    for pres in (GOLDEN, EVEN, FULL2, POINT):
        tw = build_tower(pres)
        tw.ensure_level(tw.stabilized_at + 3)
        for l in range(tw.top_level):
            fine = tw.level(l + 1)
            coarse = tw.level(l)
            for row in matrix_I(tw, l).rows:
                assert sum(row) == 1
                assert set(row) <= {0, 1}
            for c in fine.classes:
                parent = coarse.classes[fine.parent[c.index]]
                assert set(c.tsets) <= set(parent.tsets)


def test_partition_stabilizes_permanently():
    for pres in (GOLDEN, EVEN, FULL2, POINT):
        tw = build_tower(pres)
        l0 = tw.stabilized_at
        tw.ensure_level(l0 + 3)
        base = partition_at(tw, l0)
        assert partition_at(tw, l0 + 1) == base
        assert partition_at(tw, l0 + 2) == base
        stable_permutation(tw, l0)  # square, one 1 per row and column


def test_classes_sorted_by_past_encoding():
    tw = build_tower(EVEN)
    alpha = tw.graph.alphabet
    for l in range(tw.top_level + 1):
        keys = [c.past.encode(alpha) for c in tw.level(l).classes]
        assert keys == sorted(keys)


def test_filtration_bounds_checked():
    tw = build_tower(GOLDEN)
    with pytest.raises(InputFormatError):
        filtration_M(tw, 1, 2)
    with pytest.raises(InputFormatError):
        filtration_M(tw, 1, -1)


def test_golden_filtration_sets():
    tw = build_tower(GOLDEN)
    assert filtration_M(tw, 1, 0) == (0, 1)
    assert filtration_M(tw, 1, 1) == (0, 1)


def test_length_filtration_can_exclude_classes():
    # v0 --a--> v1 --b--> v1 (loop): the ray a b b b... has an empty strict
    # past, so its class never gains a past word of length exactly 1.
    pres = Presentation.labeled_graph(("a", "b"), 2, [(0, 1, "a"), (1, 1, "b")])
    tw = build_tower(pres)
    assert tw.stabilized_at == 1
    assert [tw.m(l) for l in range(3)] == [1, 2, 2]
    assert filtration_M(tw, 1, 0) == (0, 1)
    assert filtration_M(tw, 1, 1) == (1,)
    alpha = tw.graph.alphabet
    excluded = tw.level(1).classes[0]
    assert excluded.past.render(alpha) == [""]
    assert excluded.has_exact_past == (True, False)
    kept = tw.level(1).classes[1]
    assert kept.past.render(alpha) == ["", "a", "b"]


def test_stable_permutation_rejects_unstabilized_level():
    tw = build_tower(EVEN)
    with pytest.raises(IllDefinedTransition):
        stable_permutation(tw, 0)  # 2x1 refinement, not a permutation


def test_budget_capped_tower_reports_no_stabilization():
    tw = build_tower(EVEN, max_level=1)
    assert tw.stabilized_at is None
    assert tw.top_level == 1


def test_m_sequence_is_presentation_independent():
    recoded = Presentation.forbidden_words(("0", "1"), [("1", "1")])
    t1 = build_tower(GOLDEN)
    t2 = build_tower(recoded)
    assert t1.stabilized_at == t2.stabilized_at == 1
    assert [t1.m(l) for l in range(3)] == [t2.m(l) for l in range(3)]
    assert matrix_B(t1, 1).to_lists() == matrix_B(t2, 1).to_lists()
    full = Presentation.forbidden_words(("a", "b"), [])
    t3 = build_tower(full)
    assert t3.stabilized_at == 0
    assert matrix_B(t3, 1).to_lists() == [[-1]]


def test_transition_square_commutes():
    for pres in (GOLDEN, EVEN, FULL2, POINT):
        tw = build_tower(pres)
        tw.ensure_level(tw.stabilized_at + 3)
        top = tw.top_level
        for l in range(top - 1):
            for k in range(l + 1):
                lhs = filtration_map_A(tw, l + 1, k) @ filtration_map_I(tw, l, k)
                rhs = filtration_map_I(tw, l + 1, k + 1) @ filtration_map_A(tw, l, k)
                assert lhs.to_lists() == rhs.to_lists(), (pres.kind, l, k)


def test_projection_square_commutes():
    for pres in (GOLDEN, EVEN, FULL2, POINT):
        tw = build_tower(pres)
        tw.ensure_level(tw.stabilized_at + 3)
        top = tw.top_level
        for l in range(1, top):
            for k in range(l):
                lhs = filtration_map_I(tw, l, k + 1) @ projection_delta(tw, l, k)
                rhs = projection_delta(tw, l + 1, k) @ filtration_map_I(tw, l, k)
                assert lhs.to_lists() == rhs.to_lists(), (pres.kind, l, k)


def test_boundary_intertwines_refinement():
    for pres in (GOLDEN, EVEN, FULL2, POINT):
        tw = build_tower(pres)
        tw.ensure_level(tw.stabilized_at + 3)
        top = tw.top_level
        for l in range(1, top - 1):
            lhs = matrix_I(tw, l + 1) @ matrix_B(tw, l)
            rhs = matrix_B(tw, l + 1) @ filtration_map_I(tw, l, 1)
            assert lhs.to_lists() == rhs.to_lists(), (pres.kind, l)
