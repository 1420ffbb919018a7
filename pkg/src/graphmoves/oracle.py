"""Enumeration of legal moves and a bounded breadth-first search over them.

The search only applies moves forwards. Two graphs count as connected when
their forward balls meet, which is enough for an oracle that must never join
graphs with different fingerprints.
"""

from __future__ import annotations

import itertools
import random
from collections import deque
from typing import Iterable, Iterator, Mapping

from .graph import INF, Graph, Mult, canonical_key, condition_K
from .moves import Move, apply_move

PRIMITIVE_KINDS = "SROIC"


def two_part_splits(edges: Mapping[str, Mult]) -> Iterator[tuple[dict[str, Mult], dict[str, Mult]]]:
    """Unordered splits of an edge multiset into two nonempty parts, at most one infinite; ``inf`` stays whole."""
    items = sorted(edges.items())
    choices = []
    for _, k in items:
        choices.append((0, INF) if k is INF else tuple(range(k + 1)))
    seen = set()
    for pick in itertools.product(*choices):
        a = {t: c for (t, _), c in zip(items, pick) if c != 0}
        b = {}
        for (t, k), c in zip(items, pick):
            rest = INF if k is INF and c == 0 else (0 if k is INF else k - c)
            if rest != 0:
                b[t] = rest
        if not a or not b:
            continue
        if INF in a.values() and INF in b.values():
            continue
        key = frozenset([tuple(sorted(a.items(), key=str)), tuple(sorted(b.items(), key=str))])
        if key in seen:
            continue
        seen.add(key)
        yield a, b


def legal_moves(g: Graph, kinds: str = PRIMITIVE_KINDS, max_vertices: int | None = None) -> Iterator[Move]:
    """Every legal primitive move of the given kinds, with two-part splits for (O) and (I)."""
    grow_ok = max_vertices is None or len(g) < max_vertices
    splice_ok = max_vertices is None or len(g) + 2 <= max_vertices
    for w in g.vertices:
        if "S" in kinds and len(g) > 1 and g.is_regular(w) and g.is_source(w):
            yield Move.S(w)
        if "R" in kinds and g.is_regular(w) and g.out_degree(w) == 1:
            (t, _), = g.out(w).items()
            if t != w and len(g.inn(w)) == 1:
                yield Move.R(w)
        if "O" in kinds and grow_ok and not g.is_sink(w):
            for a, b in two_part_splits(g.out(w)):
                yield Move.O(w, [a, b])
        if "I" in kinds and grow_ok and g.is_regular(w) and not g.is_source(w):
            for a, b in two_part_splits(g.inn(w)):
                yield Move.I(w, [a, b])
        if "C" in kinds and splice_ok and g.is_regular(w) and g.return_path_class(w) >= 2:
            yield Move.C(w)


def random_graph(rng: random.Random, max_vertices: int = 8, max_mult: int = 3, density: float = 0.35,
                 infinite: float = 0.0) -> Graph:
    """A random graph; ``infinite`` is the chance that a present entry is ``inf``."""
    n = rng.randint(1, max_vertices)
    adj: dict[str, dict[str, Mult]] = {}
    for u in range(n):
        row = {}
        for v in range(n):
            if rng.random() < density:
                row[str(v + 1)] = INF if rng.random() < infinite else rng.randint(1, max_mult)
        adj[str(u + 1)] = row
    return Graph([str(i + 1) for i in range(n)], adj)


def random_condition_k_graph(rng: random.Random, **kw) -> Graph:
    while True:
        g = random_graph(rng, **kw)
        if condition_K(g):
            return g


def random_legal_move(g: Graph, rng: random.Random, kinds: str = PRIMITIVE_KINDS,
                      max_vertices: int | None = None) -> Move | None:
    moves = list(legal_moves(g, kinds, max_vertices))
    return rng.choice(moves) if moves else None


def all_small_graphs(vertices: int, max_mult: int) -> Iterator[Graph]:
    """All graphs on ``vertices`` vertices with entries in ``0..max_mult``, one per isomorphism class."""
    labels = [str(i + 1) for i in range(vertices)]
    seen = set()
    for entries in itertools.product(range(max_mult + 1), repeat=vertices * vertices):
        adj = {labels[u]: {labels[v]: entries[u * vertices + v] for v in range(vertices)} for u in range(vertices)}
        g = Graph(labels, adj)
        key = canonical_key(g)
        if key not in seen:
            seen.add(key)
            yield g


class UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def bfs_components(starts: Iterable[Graph], depth: int, kinds: str = PRIMITIVE_KINDS,
                   max_vertices: int | None = None, max_states: int | None = None):
    """Forward search from all ``starts`` at once, up to ``depth`` moves.

    Returns ``(union_find, states, truncated)`` where ``states`` maps a canonical
    key to a representative graph; every applied move unites its endpoints.
    """
    uf = UnionFind()
    states: dict = {}
    frontier = deque()
    for g in starts:
        k = canonical_key(g)
        if k not in states:
            states[k] = g
            uf.find(k)
            frontier.append((g, k, 0))
    truncated = False
    while frontier:
        g, k, d = frontier.popleft()
        if d >= depth:
            continue
        for m in legal_moves(g, kinds, max_vertices):
            h = apply_move(g, m)
            hk = canonical_key(h)
            uf.union(k, hk)
            if hk not in states:
                if max_states is not None and len(states) >= max_states:
                    truncated = True
                    continue
                states[hk] = h
                frontier.append((h, hk, d + 1))
    return uf, states, truncated


def bfs_connects(g1: Graph, g2: Graph, depth: int, kinds: str = PRIMITIVE_KINDS,
                 max_vertices: int | None = None, max_states: int | None = None) -> tuple[bool, bool]:
    """``(connected, truncated)`` for the forward balls of radius ``depth``."""
    uf, _, truncated = bfs_components([g1, g2], depth, kinds, max_vertices, max_states)
    return uf.find(canonical_key(g1)) == uf.find(canonical_key(g2)), truncated


__all__ = ["legal_moves", "two_part_splits", "random_graph", "random_condition_k_graph", "random_legal_move",
           "all_small_graphs", "bfs_components", "bfs_connects", "UnionFind", "PRIMITIVE_KINDS"]
