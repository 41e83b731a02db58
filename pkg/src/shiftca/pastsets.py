"""Past sets and the transition-relation monoid of a labeled graph.

For a point x of the shift, T(x) is the set of graph vertices from which x
can be read along an infinite path.  The past set of x at window l collects
every word u of length <= l (the empty word included) such that u·x is again
a point; it is a function of T(x) alone, computed through predecessor sets:

    u·x is a point  <=>  Pre_u(T(x)) is nonempty,

where Pre_u(t) applies the u-labeled edge relation backwards, one symbol at a
time.  The finitely many word relations R_u (u ranging over admissible words)
form a monoid under composition; its left-to-right Cayley graph — nodes are
distinct nonzero relations, the edge for symbol a maps R_u to R_{u·a} — is
the single combinatorial object behind realized T-sets, past sets, point
counting, and the word-class bookkeeping of the conditions module.

Vertex sets and relation rows are Python int bitmasks (bit v = vertex v).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Optional

from .errors import MonoidBudgetExceeded, WordNotInLanguage
from .presentations import EPSILON, Graph, Word

DEFAULT_MONOID_CAP = 1_000_000


@dataclass(frozen=True)
class RelationElement:
    """Boolean vertex-to-vertex relation, stored as one bitmask row per
    source vertex: ``rows[v]`` is the set of endpoints of paths from v."""

    rows: tuple[int, ...]

    @staticmethod
    def identity(n: int) -> "RelationElement":
        return RelationElement(tuple(1 << v for v in range(n)))

    @staticmethod
    def of_symbol(g: Graph, symbol_index: int) -> "RelationElement":
        return RelationElement(g.symbol_relation_rows(symbol_index))

    def compose(self, other: "RelationElement") -> "RelationElement":
        """Relational composition: first self, then other."""
        out = []
        for row in self.rows:
            acc = 0
            rest = row
            while rest:
                w = (rest & -rest).bit_length() - 1
                acc |= other.rows[w]
                rest &= rest - 1
            out.append(acc)
        return RelationElement(tuple(out))

    @cached_property
    def dom(self) -> int:
        mask = 0
        for v, row in enumerate(self.rows):
            if row:
                mask |= 1 << v
        return mask

    @cached_property
    def ran(self) -> int:
        acc = 0
        for row in self.rows:
            acc |= row
        return acc

    @property
    def is_zero(self) -> bool:
        return all(r == 0 for r in self.rows)


class MonoidGraph:
    """Cayley graph of the word-relation monoid of a labeled graph.

    node 0 is the identity relation (the empty word).  ``step[i][a]`` is the
    node reached from node i by composing with symbol a on the right, or None
    when the product is the zero relation.  Nodes are created in BFS order
    from the identity, symbols in alphabet order, so numbering is canonical.
    """

    def __init__(self, g: Graph, cap: int = DEFAULT_MONOID_CAP):
        self.graph = g
        n_sym = len(g.alphabet)
        gens = [RelationElement.of_symbol(g, a) for a in range(n_sym)]
        ident = RelationElement.identity(g.n_vertices)
        self.nodes: list[RelationElement] = [ident]
        index: dict[tuple[int, ...], int] = {ident.rows: 0}
        self.step: list[list[Optional[int]]] = []
        frontier = [0]
        while frontier:
            nxt = []
            for i in frontier:
                row: list[Optional[int]] = []
                for a in range(n_sym):
                    prod = self.nodes[i].compose(gens[a])
                    if prod.is_zero:
                        row.append(None)
                        continue
                    j = index.get(prod.rows)
                    if j is None:
                        j = len(self.nodes)
                        if j >= cap:
                            raise MonoidBudgetExceeded(
                                f"relation monoid exceeds cap {cap}"
                            )
                        index[prod.rows] = j
                        self.nodes.append(prod)
                        nxt.append(j)
                    row.append(j)
                # step rows are appended in node order because BFS visits
                # nodes in creation order
                self.step.append(row)
            frontier = nxt
        self._index = index

    def __len__(self) -> int:
        return len(self.nodes)

    def node_of_word(self, word: Word) -> Optional[int]:
        """Monoid node of a word, or None when its relation is zero."""
        i = 0
        alph = self.graph.alphabet
        for s in word:
            j = self.step[i][alph.index(s)]
            if j is None:
                return None
            i = j
        return i

    def relation_of_word(self, word: Word) -> RelationElement:
        i = self.node_of_word(word)
        if i is None:
            raise WordNotInLanguage(
                f"word {self.graph.alphabet.format_word(word)!r} not admissible"
            )
        return self.nodes[i]

    @cached_property
    def doms(self) -> tuple[int, ...]:
        return tuple(r.dom for r in self.nodes)

    def successors(self, i: int) -> Iterable[int]:
        return (j for j in self.step[i] if j is not None)

    @cached_property
    def cycle_reachable(self) -> tuple[bool, ...]:
        """cycle_reachable[i]: node i is reachable from some node lying on a
        directed cycle (itself included).  Such nodes are exactly the word
        relations shared by infinitely many words."""
        on_cycle = _cyclic_nodes(len(self.nodes), self.successors)
        flag = list(on_cycle)
        # forward closure
        work = [i for i, f in enumerate(flag) if f]
        while work:
            i = work.pop()
            for j in self.successors(i):
                if not flag[j]:
                    flag[j] = True
                    work.append(j)
        return tuple(flag)


def _cyclic_nodes(n: int, successors: Callable[[int], Iterable[int]]) -> list[bool]:
    """Nodes lying on a directed cycle, via iterative Tarjan SCC."""
    UNSEEN = -1
    index_of = [UNSEEN] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    result = [False] * n
    counter = 0
    for root in range(n):
        if index_of[root] != UNSEEN:
            continue
        work: list[tuple[int, Iterable[int]]] = [(root, iter(successors(root)))]
        index_of[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if index_of[w] == UNSEEN:
                    index_of[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, iter(successors(w))))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index_of[w])
            if advanced:
                continue
            work.pop()
            if work:
                pv = work[-1][0]
                low[pv] = min(low[pv], low[v])
            if low[v] == index_of[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                if len(comp) > 1:
                    for w in comp:
                        result[w] = True
                else:
                    w = comp[0]
                    if w in successors(w):
                        result[w] = True
    return result


def _trim_to_live(nodes: set[int], successors: Callable[[int], Iterable[int]]) -> set[int]:
    """Largest subset where every node keeps an outgoing edge inside the set
    (iteratively delete out-degree-0 nodes)."""
    alive = set(nodes)
    changed = True
    while changed:
        changed = False
        dead = [v for v in alive if not any(w in alive for w in successors(v))]
        if dead:
            alive.difference_update(dead)
            changed = True
    return alive


def realized_tsets(monoid: MonoidGraph) -> tuple[int, ...]:
    """All vertex sets of the form T(x), sorted by bitmask value.

    A candidate D (necessarily the domain of some reachable relation) is
    realized by a point iff the subgraph of monoid nodes with domain D still
    contains a node after trimming to out-degree >= 1 inside the subgraph:
    the trimmed survivors are exactly the relations from which some infinite
    word keeps its domain pinned at D forever, and domains only shrink along
    composition, so such a tail pins T(x) = D.
    """
    by_dom: dict[int, set[int]] = {}
    for i, d in enumerate(monoid.doms):
        by_dom.setdefault(d, set()).add(i)
    out = []
    for d, nodes in by_dom.items():
        live = _trim_to_live(
            nodes, lambda v: (j for j in monoid.successors(v) if j in nodes)
        )
        if live:
            out.append(d)
    return tuple(sorted(out))


@dataclass(frozen=True)
class PastSet:
    """The words u (|u| <= level) that can be prepended to a point/word.

    ``words`` is shortlex-sorted and always contains the empty word.
    """

    level: int
    words: tuple[Word, ...]

    def encode(self, alphabet) -> tuple:
        """Canonical comparison key: the shortlex-ordered key sequence."""
        return tuple(alphabet.sort_key(w) for w in self.words)

    def render(self, alphabet) -> list[str]:
        return [alphabet.format_word(w) for w in self.words]

    def __contains__(self, word: Word) -> bool:
        return word in set(self.words)


class PastSetCalculator:
    """Memoized past sets over vertex-set bitmasks.

    P_l(t) = {ε} ∪ { w·a : Pre_a(t) != 0, w ∈ P_{l-1}(Pre_a(t)) },
    because prepending happens one final symbol at a time:
    Pre_{w·a}(t) = Pre_w(Pre_a(t)).
    """

    def __init__(self, g: Graph):
        self.graph = g
        self._memo: dict[tuple[int, int], tuple[Word, ...]] = {}
        self._pre_memo: dict[tuple[int, int], int] = {}

    def pre(self, tset: int, symbol_index: int) -> int:
        key = (tset, symbol_index)
        v = self._pre_memo.get(key)
        if v is None:
            v = self.graph.pre(tset, symbol_index)
            self._pre_memo[key] = v
        return v

    def words_of_set(self, tset: int, level: int) -> tuple[Word, ...]:
        if level == 0:
            return (EPSILON,)
        key = (tset, level)
        cached = self._memo.get(key)
        if cached is not None:
            return cached
        alph = self.graph.alphabet
        words: list[Word] = [EPSILON]
        for a, sym in enumerate(alph.symbols):
            p = self.pre(tset, a)
            if p:
                words.extend(w + (sym,) for w in self.words_of_set(p, level - 1))
        result = tuple(sorted(words, key=alph.sort_key))
        self._memo[key] = result
        return result

    def past_set(self, tset: int, level: int) -> PastSet:
        return PastSet(level, self.words_of_set(tset, level))

    def has_exact_length_word(self, tset: int, k: int) -> bool:
        """Is there an admissible prepend-word of length exactly k?"""
        frontier = {tset}
        for _ in range(k):
            nxt = set()
            for s in frontier:
                for a in range(len(self.graph.alphabet)):
                    p = self.pre(s, a)
                    if p:
                        nxt.add(p)
            frontier = nxt
            if not frontier:
                return False
        return bool(frontier)


def point_past_set(g: Graph, tset: int, level: int) -> PastSet:
    """Past set of any point x with T(x) = ``tset``."""
    return PastSetCalculator(g).past_set(tset, level)


def word_past_set(
    g: Graph, word: Word, level: int, monoid: Optional[MonoidGraph] = None
) -> PastSet:
    """Past set of a finite word: all v with |v| <= level and v·word
    admissible.  Raises WordNotInLanguage when the word itself is not.

    v·word is admissible iff the range of R_v meets the domain of R_word,
    i.e. iff Pre_v(dom R_word) != 0 — the same computation as for points,
    applied to the word's relation domain.
    """
    monoid = monoid or MonoidGraph(g)
    rel = monoid.relation_of_word(word)
    return PastSetCalculator(g).past_set(rel.dom, level)
