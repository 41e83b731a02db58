"""Shift-space presentations.

A one-sided shift space can be handed to this package in three ways:

``sft``
    a square 0-1 transition matrix A over the alphabet; the space is the set
    of one-sided sequences x with A(x_i, x_{i+1}) = 1 for every i.
``forbidden_words``
    a finite list of forbidden factors; the space is every sequence avoiding
    all of them.
``labeled_graph``
    a finite directed multigraph with edge labels; the space is the set of
    label sequences of infinite paths.

Everything downstream works on the labeled-graph form, produced by
:func:`to_labeled_graph`.  Vertex sets are represented as Python int bitmasks
throughout the package.

>>> p = Presentation.sft(("0", "1"), ((1, 1), (1, 0)))
>>> g = to_labeled_graph(p)
>>> g.n_vertices, len(g.edges)
(2, 3)
>>> [g.alphabet.format_word(w) for w in language(p, 2)]
['00', '01', '10']
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Optional, Sequence

from .errors import (
    DanglingEdge,
    DuplicateSymbol,
    EmptyAlphabet,
    EmptyShift,
    InputFormatError,
    InvalidSymbol,
    WordNotInLanguage,
    ZeroRow,
)

#: A word is a tuple of symbols; the empty tuple is the empty word.
Word = tuple[str, ...]

EPSILON: Word = ()

SCHEMA_NAME = "shiftspace-v1"

_KIND_FIELDS = {
    "sft": {"format", "kind", "alphabet", "matrix"},
    "forbidden_words": {"format", "kind", "alphabet", "forbidden"},
    "labeled_graph": {"format", "kind", "alphabet", "vertices", "edges"},
}


@dataclass(frozen=True)
class Alphabet:
    """Ordered, duplicate-free tuple of symbol strings.

    Symbol order is significant: it fixes word comparison (shortlex with
    alphabet-index tie-break) and with it every canonical ordering downstream.
    """

    symbols: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.symbols) == 0:
            raise EmptyAlphabet("alphabet must contain at least one symbol")
        seen = set()
        for s in self.symbols:
            if not isinstance(s, str) or s == "":
                raise InvalidSymbol(f"symbol {s!r} is not a nonempty string")
            if "." in s:
                raise InvalidSymbol(
                    f"symbol {s!r} contains '.', the word separator"
                )
            if s in seen:
                raise DuplicateSymbol(f"symbol {s!r} appears twice")
            seen.add(s)

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self) -> Iterator[str]:
        return iter(self.symbols)

    @cached_property
    def _index(self) -> dict[str, int]:
        return {s: i for i, s in enumerate(self.symbols)}

    @cached_property
    def single_char(self) -> bool:
        return all(len(s) == 1 for s in self.symbols)

    def index(self, symbol: str) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise InvalidSymbol(f"symbol {symbol!r} not in alphabet") from None

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._index

    def format_word(self, word: Word) -> str:
        """Render a word: concatenated if all symbols are single characters,
        otherwise '.'-separated.  The empty word renders as ''."""
        return ("" if self.single_char else ".").join(word)

    def parse_word(self, text: str) -> Word:
        """Inverse of :meth:`format_word` (symbol membership is checked)."""
        if text == "":
            return EPSILON
        parts = tuple(text) if self.single_char else tuple(text.split("."))
        for s in parts:
            if s not in self._index:
                raise InvalidSymbol(f"symbol {s!r} not in alphabet")
        return parts

    def sort_key(self, word: Word):
        """Shortlex key: length first, then alphabet-index lexicographic."""
        return (len(word), tuple(self._index[s] for s in word))


@dataclass(frozen=True)
class Presentation:
    """Validated, immutable description of a shift space (one of three kinds).

    Construct through :meth:`sft`, :meth:`forbidden_words`,
    :meth:`labeled_graph`, or :meth:`from_json`.
    """

    kind: str
    alphabet: Alphabet
    matrix: Optional[tuple[tuple[int, ...], ...]] = None
    forbidden: Optional[tuple[Word, ...]] = None
    n_vertices: Optional[int] = None
    edges: Optional[tuple[tuple[int, int, str], ...]] = None

    # -- constructors ------------------------------------------------------

    @staticmethod
    def sft(symbols: Sequence[str], matrix: Sequence[Sequence[int]]) -> "Presentation":
        alphabet = Alphabet(tuple(symbols))
        n = len(alphabet)
        if len(matrix) != n:
            raise InputFormatError(
                f"matrix has {len(matrix)} rows for {n} symbols"
            )
        rows = []
        for i, row in enumerate(matrix):
            if len(row) != n:
                raise InputFormatError(f"matrix row {i} has length {len(row)}")
            for x in row:
                if x not in (0, 1):
                    raise InputFormatError(
                        f"matrix entries must be 0 or 1, found {x!r}"
                    )
            if not any(row):
                raise ZeroRow(f"row {i} ({alphabet.symbols[i]!r}) is all zero")
            rows.append(tuple(int(x) for x in row))
        return Presentation("sft", alphabet, matrix=tuple(rows))

    @staticmethod
    def forbidden_words(
        symbols: Sequence[str], forbidden: Sequence[Sequence[str]]
    ) -> "Presentation":
        alphabet = Alphabet(tuple(symbols))
        out = []
        for w in forbidden:
            word = tuple(w)
            if len(word) == 0:
                raise InputFormatError("the empty word cannot be forbidden")
            for s in word:
                if s not in alphabet:
                    raise InvalidSymbol(f"forbidden word uses unknown symbol {s!r}")
            out.append(word)
        # canonical order, duplicates removed
        uniq = sorted(set(out), key=alphabet.sort_key)
        return Presentation("forbidden_words", alphabet, forbidden=tuple(uniq))

    @staticmethod
    def labeled_graph(
        symbols: Sequence[str],
        n_vertices: int,
        edges: Sequence[tuple[int, int, str]],
    ) -> "Presentation":
        alphabet = Alphabet(tuple(symbols))
        if not isinstance(n_vertices, int) or n_vertices <= 0:
            raise InputFormatError("vertices must be a positive integer")
        es = []
        for e in edges:
            src, dst, label = e
            if not isinstance(src, int) or not isinstance(dst, int):
                raise InputFormatError(f"edge {e!r} endpoints must be integers")
            if not (0 <= src < n_vertices) or not (0 <= dst < n_vertices):
                raise DanglingEdge(f"edge {e!r} leaves the vertex range")
            if label not in alphabet:
                raise InvalidSymbol(f"edge label {label!r} not in alphabet")
            es.append((int(src), int(dst), label))
        uniq = sorted(set(es), key=lambda e: (e[0], e[1], alphabet.index(e[2])))
        return Presentation(
            "labeled_graph", alphabet, n_vertices=n_vertices, edges=tuple(uniq)
        )

    # -- JSON --------------------------------------------------------------

    @staticmethod
    def from_dict(doc: dict) -> "Presentation":
        if not isinstance(doc, dict):
            raise InputFormatError("document must be a JSON object")
        if doc.get("format") != SCHEMA_NAME:
            raise InputFormatError(
                f"format must be {SCHEMA_NAME!r}, got {doc.get('format')!r}"
            )
        kind = doc.get("kind")
        if kind not in _KIND_FIELDS:
            raise InputFormatError(f"unknown kind {kind!r}")
        expected = _KIND_FIELDS[kind]
        actual = set(doc)
        if actual != expected:
            extra = sorted(actual - expected)
            missing = sorted(expected - actual)
            raise InputFormatError(
                f"kind {kind!r} requires exactly fields {sorted(expected)}; "
                f"unexpected {extra}, missing {missing}"
            )
        symbols = doc["alphabet"]
        if not isinstance(symbols, list):
            raise InputFormatError("alphabet must be a list of strings")
        if kind == "sft":
            if not isinstance(doc["matrix"], list):
                raise InputFormatError("matrix must be a list of rows")
            return Presentation.sft(symbols, doc["matrix"])
        if kind == "forbidden_words":
            if not isinstance(doc["forbidden"], list):
                raise InputFormatError("forbidden must be a list of words")
            alphabet = Alphabet(tuple(symbols))
            words = [alphabet.parse_word(w) if isinstance(w, str) else tuple(w)
                     for w in doc["forbidden"]]
            return Presentation.forbidden_words(symbols, words)
        # labeled_graph
        if not isinstance(doc["edges"], list):
            raise InputFormatError("edges must be a list")
        edges = []
        for e in doc["edges"]:
            if not isinstance(e, dict) or set(e) != {"from", "to", "label"}:
                raise InputFormatError(
                    f"edge {e!r} must be an object with exactly from/to/label"
                )
            edges.append((e["from"], e["to"], e["label"]))
        return Presentation.labeled_graph(symbols, doc["vertices"], edges)

    @staticmethod
    def from_json(text: str) -> "Presentation":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputFormatError(f"not valid JSON: {exc}") from exc
        return Presentation.from_dict(doc)

    def to_dict(self) -> dict:
        doc: dict = {"format": SCHEMA_NAME, "kind": self.kind,
                     "alphabet": list(self.alphabet.symbols)}
        if self.kind == "sft":
            doc["matrix"] = [list(r) for r in self.matrix]
        elif self.kind == "forbidden_words":
            doc["forbidden"] = [self.alphabet.format_word(w) for w in self.forbidden]
        else:
            doc["vertices"] = self.n_vertices
            doc["edges"] = [
                {"from": s, "to": t, "label": a} for (s, t, a) in self.edges
            ]
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class Graph:
    """Essential labeled graph: every vertex has at least one outgoing edge.

    This is the working form every algorithm consumes.  ``vertex_names`` maps
    the internal 0..n-1 indices back to whatever the source presentation
    called the vertices (symbol strings for SFTs, block words for
    forbidden-word inputs, original indices for explicit graphs).
    """

    alphabet: Alphabet
    n_vertices: int
    edges: tuple[tuple[int, int, int], ...]  # (src, dst, symbol index)
    vertex_names: tuple[str, ...]

    @cached_property
    def full_mask(self) -> int:
        return (1 << self.n_vertices) - 1

    @cached_property
    def _out_masks(self) -> tuple[tuple[int, ...], ...]:
        """per symbol a, per vertex v: bitmask of targets of a-labeled edges."""
        table = [[0] * self.n_vertices for _ in self.alphabet]
        for src, dst, a in self.edges:
            table[a][src] |= 1 << dst
        return tuple(tuple(row) for row in table)

    def pre(self, tset: int, symbol_index: int) -> int:
        """Vertices with an edge labeled ``symbol_index`` into ``tset``."""
        out = self._out_masks[symbol_index]
        mask = 0
        for v in range(self.n_vertices):
            if out[v] & tset:
                mask |= 1 << v
        return mask

    def post(self, vset: int, symbol_index: int) -> int:
        """Targets of edges labeled ``symbol_index`` leaving ``vset``."""
        out = self._out_masks[symbol_index]
        mask = 0
        rest = vset
        while rest:
            v = (rest & -rest).bit_length() - 1
            mask |= out[v]
            rest &= rest - 1
        return mask

    def symbol_relation_rows(self, symbol_index: int) -> tuple[int, ...]:
        """Rows of the edge relation for one symbol (bitmask per vertex)."""
        return self._out_masks[symbol_index]

    def vertices_in(self, mask: int) -> list[int]:
        out = []
        rest = mask
        while rest:
            v = (rest & -rest).bit_length() - 1
            out.append(v)
            rest &= rest - 1
        return out


def _essentialize(
    alphabet: Alphabet,
    n: int,
    edges: list[tuple[int, int, int]],
    names: list[str],
) -> Graph:
    """Iteratively delete vertices without outgoing edges, then reindex."""
    alive = set(range(n))
    while True:
        have_out = {src for (src, dst, a) in edges if src in alive and dst in alive}
        dead = alive - have_out
        if not dead:
            break
        alive -= dead
    if not alive:
        raise EmptyShift("no vertex supports an infinite path")
    order = sorted(alive)
    remap = {v: i for i, v in enumerate(order)}
    kept = sorted(
        (remap[s], remap[t], a)
        for (s, t, a) in edges
        if s in alive and t in alive
    )
    return Graph(
        alphabet=alphabet,
        n_vertices=len(order),
        edges=tuple(kept),
        vertex_names=tuple(names[v] for v in order),
    )


def to_labeled_graph(p: Presentation) -> Graph:
    """Convert any presentation kind to an essential labeled graph.

    sft: one vertex per symbol, edge i -> j labeled j iff A(i,j) = 1.  Note
    that a symbol whose matrix column is zero never occurs as an edge label,
    so sequences beginning with it are not represented; they contribute no
    past-set classes.

    forbidden_words: higher-block recoding with block length
    b = max(1, max forbidden length - 1); vertices are the forbidden-factor-
    free b-blocks, with an edge u -> u[1:]+a labeled u[0] whenever the
    (b+1)-block u+a is also factor-free.

    labeled_graph: taken as-is.  All three routes end with essentialization
    (vertices must have outgoing edges; starts without incoming edges are
    fine for one-sided spaces).
    """
    alphabet = p.alphabet
    if p.kind == "sft":
        n = len(alphabet)
        edges = [
            (i, j, j)
            for i in range(n)
            for j in range(n)
            if p.matrix[i][j]
        ]
        names = list(alphabet.symbols)
        return _essentialize(alphabet, n, edges, names)

    if p.kind == "forbidden_words":
        m = max((len(w) for w in p.forbidden), default=1)
        b = max(1, m - 1)
        forb = set(p.forbidden)

        def factor_free(word: Word) -> bool:
            for i in range(len(word)):
                for j in range(i + 1, len(word) + 1):
                    if word[i:j] in forb:
                        return False
            return True

        blocks: list[Word] = []
        stack: list[Word] = [EPSILON]
        # depth-first in alphabet order builds blocks in lexicographic order
        while stack:
            w = stack.pop()
            if len(w) == b:
                blocks.append(w)
                continue
            for s in reversed(alphabet.symbols):
                w2 = w + (s,)
                if factor_free(w2):
                    stack.append(w2)
        if not blocks:
            raise EmptyShift("every block of the recoding length is forbidden")
        index = {w: i for i, w in enumerate(blocks)}
        edges = []
        for w in blocks:
            for s in alphabet.symbols:
                w2 = w + (s,)
                if not factor_free(w2):
                    continue
                tail = w2[1:]
                if tail in index:
                    edges.append((index[w], index[tail], alphabet.index(w[0])))
        names = [alphabet.format_word(w) for w in blocks]
        return _essentialize(alphabet, len(blocks), edges, names)

    if p.kind == "labeled_graph":
        edges = [(s, t, alphabet.index(a)) for (s, t, a) in p.edges]
        names = [str(v) for v in range(p.n_vertices)]
        return _essentialize(alphabet, p.n_vertices, edges, names)

    raise InputFormatError(f"unknown kind {p.kind!r}")


def _end_set(g: Graph, word: Word) -> int:
    """Bitmask of vertices where a path labeled ``word`` can end (0 if none)."""
    s = g.full_mask
    for sym in word:
        s = g.post(s, g.alphabet.index(sym))
        if s == 0:
            return 0
    return s


def is_in_language(p: Presentation | Graph, word: Word) -> bool:
    """True iff some point of the shift contains ``word`` as a factor."""
    g = p if isinstance(p, Graph) else to_labeled_graph(p)
    return _end_set(g, word) != 0


def language(p: Presentation | Graph, k: int) -> list[Word]:
    """All admissible words of length exactly ``k``, in shortlex order.

    >>> p = Presentation.sft(("a", "b"), ((1, 1), (1, 0)))
    >>> [len(language(p, k)) for k in range(6)]
    [1, 2, 3, 5, 8, 13]
    """
    if k < 0:
        raise InputFormatError("word length must be nonnegative")
    g = p if isinstance(p, Graph) else to_labeled_graph(p)
    layer: list[tuple[Word, int]] = [(EPSILON, g.full_mask)]
    for _ in range(k):
        nxt: list[tuple[Word, int]] = []
        for w, s in layer:
            for i, sym in enumerate(g.alphabet.symbols):
                s2 = g.post(s, i)
                if s2:
                    nxt.append((w + (sym,), s2))
        layer = nxt
    return [w for w, _ in layer]


def language_upto(p: Presentation | Graph, k: int) -> list[Word]:
    """All admissible words of length at most ``k``, in shortlex order."""
    g = p if isinstance(p, Graph) else to_labeled_graph(p)
    out: list[Word] = []
    layer: list[tuple[Word, int]] = [(EPSILON, g.full_mask)]
    for depth in range(k + 1):
        out.extend(w for w, _ in layer)
        if depth == k:
            break
        nxt: list[tuple[Word, int]] = []
        for w, s in layer:
            for i, sym in enumerate(g.alphabet.symbols):
                s2 = g.post(s, i)
                if s2:
                    nxt.append((w + (sym,), s2))
        layer = nxt
    return out


def require_word_in_language(g: Graph, word: Word) -> None:
    if _end_set(g, word) == 0:
        raise WordNotInLanguage(
            f"word {g.alphabet.format_word(word)!r} is not admissible"
        )
