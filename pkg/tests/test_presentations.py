import json

import pytest
from hypothesis import given, strategies as st

from shiftca.errors import (
    DanglingEdge,
    DuplicateSymbol,
    EmptyShift,
    InputFormatError,
    InvalidSymbol,
    WordNotInLanguage,
    ZeroRow,
)
from shiftca.presentations import (
    Presentation,
    is_in_language,
    language,
    language_upto,
    require_word_in_language,
    to_labeled_graph,
)

GOLDEN = Presentation.sft(("0", "1"), ((1, 1), (1, 0)))
EVEN = Presentation.labeled_graph(
    ("0", "1"), 2, [(0, 0, "0"), (0, 1, "1"), (1, 0, "1")]
)


def test_sft_validation():
    with pytest.raises(ZeroRow):
        Presentation.sft(("a", "b"), ((1, 1), (0, 0)))
    with pytest.raises(InputFormatError):
        Presentation.sft(("a", "b"), ((1, 1),))
    with pytest.raises(InputFormatError):
        Presentation.sft(("a", "b"), ((1, 2), (1, 1)))
    with pytest.raises(DuplicateSymbol):
        Presentation.sft(("a", "a"), ((1, 1), (1, 1)))


def test_labeled_graph_validation():
    with pytest.raises(DanglingEdge):
        Presentation.labeled_graph(("a",), 1, [(0, 3, "a")])
    with pytest.raises(InvalidSymbol):
        Presentation.labeled_graph(("a",), 1, [(0, 0, "b")])
    # a graph with no infinite paths presents the empty shift
    with pytest.raises(EmptyShift):
        to_labeled_graph(
            Presentation.labeled_graph(("a",), 2, [(0, 1, "a")])
        )


def test_json_round_trip():
    for p in (
        GOLDEN,
        EVEN,
        Presentation.forbidden_words(("0", "1"), [("1", "1")]),
    ):
        doc = json.loads(p.to_json())
        assert doc["format"] == "shiftspace-v1"
        assert Presentation.from_json(p.to_json()) == p


def test_from_dict_rejects_unknown_format():
    with pytest.raises(InputFormatError):
        Presentation.from_dict({"format": "something-else"})


def test_golden_language_counts():
    # Fibonacci growth: no "11" factor
    assert [len(language(GOLDEN, k)) for k in range(6)] == [1, 2, 3, 5, 8, 13]
    assert len(language_upto(GOLDEN, 4)) == 1 + 2 + 3 + 5 + 8
    assert is_in_language(GOLDEN, ("0", "1", "0"))
    assert not is_in_language(GOLDEN, ("1", "1"))


def test_even_shift_language_counts():
    # odd blocks of 1s between 0s are forbidden
    assert [len(language(EVEN, k)) for k in range(5)] == [1, 2, 4, 7, 12]
    assert is_in_language(EVEN, ("0", "1", "1", "0"))
    assert not is_in_language(EVEN, ("0", "1", "0"))


def test_forbidden_words_matches_matrix_presentation():
    fw = Presentation.forbidden_words(("0", "1"), [("1", "1")])
    for k in range(6):
        assert language(fw, k) == language(GOLDEN, k)


def test_language_is_shortlex_and_factor_closed():
    words = language_upto(EVEN, 4)
    keyed = sorted(words, key=lambda w: (len(w), w))
    assert list(words) == keyed
    wordset = set(words)
    for w in words:
        for i in range(len(w)):
            for j in range(i, len(w) + 1):
                assert w[i:j] in wordset


def test_require_word_in_language():
    g = to_labeled_graph(GOLDEN)
    require_word_in_language(g, ("0", "1"))
    with pytest.raises(WordNotInLanguage):
        require_word_in_language(g, ("1", "1"))


def test_essentialization_prunes_dead_vertices():
    # vertex 2 has no outgoing edge; it must not survive
    p = Presentation.labeled_graph(
        ("a", "b"), 3, [(0, 0, "a"), (0, 1, "b"), (1, 0, "a"), (0, 2, "b")]
    )
    g = to_labeled_graph(p)
    assert g.n_vertices == 2
    assert is_in_language(p, ("b", "a"))


def test_word_formatting_multichar_symbols():
    p = Presentation.sft(("aa", "bb"), ((1, 1), (1, 1)))
    g = to_labeled_graph(p)
    w = ("aa", "bb")
    assert g.alphabet.parse_word(g.alphabet.format_word(w)) == w


@given(st.lists(st.sampled_from(("0", "1")), max_size=6))
def test_membership_matches_point_extension(prefix):
    # u is in the language iff it end-walks to a nonempty vertex set,
    # which for an essential graph means some point starts with u
    w = tuple(prefix)
    g = to_labeled_graph(GOLDEN)
    brute = all(w[i : i + 2] != ("1", "1") for i in range(len(w)))
    assert is_in_language(g, w) == brute
