"""Directed multigraphs with multiplicities in N0 plus infinity.

A :class:`Graph` is an ordered tuple of opaque string labels together with a
sparse adjacency map. Only nonzero multiplicities are stored, so two graphs
with the same labels and the same nonzero entries compare equal.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence, Union

from .intmat import BlockMatrix, IntMatrix
from .poset import Poset


class _Infinity:
    """The multiplicity of infinitely many parallel edges."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INF"

    def __str__(self) -> str:
        return "inf"

    def __reduce__(self):
        return (_Infinity, ())

    def __hash__(self) -> int:
        return hash("graphmoves.INF")

    def __eq__(self, other: object) -> bool:
        return other is self

    def __lt__(self, other) -> bool:
        return False

    def __le__(self, other) -> bool:
        return other is self

    def __gt__(self, other) -> bool:
        return other is not self

    def __ge__(self, other) -> bool:
        return True

    def __add__(self, other):
        if other is self or isinstance(other, int):
            return self
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, int):
            return self
        raise ArithmeticError("inf - inf is undefined")

    def __rsub__(self, other):
        raise ArithmeticError("finite - inf is undefined")

    def __mul__(self, other):
        if other is self:
            return self
        if isinstance(other, int):
            if other < 0:
                raise ArithmeticError("inf times a negative number")
            return 0 if other == 0 else self
        return NotImplemented

    __rmul__ = __mul__

    def __bool__(self) -> bool:
        return True


INF = _Infinity()
Mult = Union[int, _Infinity]


def is_inf(x) -> bool:
    return x is INF


def parse_mult(token: str) -> Mult:
    """``"inf"`` or a nonnegative decimal integer."""
    t = token.strip().lower()
    if t in ("inf", "infinity", "oo"):
        return INF
    try:
        k = int(t)
    except ValueError:
        raise ValueError(f"bad multiplicity token {token!r}") from None
    if k < 0:
        raise ValueError(f"negative multiplicity {k}")
    return k


def format_mult(k: Mult) -> str:
    return "inf" if k is INF else str(k)


def add_mult(a: Mult, b: Mult) -> Mult:
    if a is INF or b is INF:
        return INF
    return a + b


def mul_mult(a: Mult, b: Mult) -> Mult:
    if a == 0 or b == 0:
        return 0
    if a is INF or b is INF:
        return INF
    return a * b


class GraphError(ValueError):
    """Malformed graph input."""


class PreconditionViolated(ValueError):
    """An operation was applied outside its domain.

    ``vertex`` names the offending vertex when there is one.
    """

    def __init__(self, reason: str, vertex: str | None = None):
        self.vertex = vertex
        self.reason = reason
        super().__init__(f"{reason} (vertex {vertex})" if vertex is not None else reason)


@dataclass(frozen=True)
class VertexClass:
    kind: str  # "regular", "infinite-emitter" or "sink"
    supports_loop: bool
    return_paths: int  # 0, 1, or 2 meaning "at least two"


class Graph:
    """Finite directed graph; edge multiplicities are ints or :data:`INF`."""

    __slots__ = ("vertices", "_adj", "_index", "__dict__")

    def __init__(self, vertices: Sequence[str], adj: Mapping[str, Mapping[str, Mult]] | None = None):
        vertices = tuple(str(v) for v in vertices)
        if not vertices:
            raise GraphError("a graph needs at least one vertex")
        if len(set(vertices)) != len(vertices):
            raise GraphError("duplicate vertex labels")
        index = {v: i for i, v in enumerate(vertices)}
        clean: dict[str, dict[str, Mult]] = {v: {} for v in vertices}
        for u, row in (adj or {}).items():
            if u not in index:
                raise GraphError(f"unknown vertex {u!r}")
            for v, k in row.items():
                if v not in index:
                    raise GraphError(f"unknown vertex {v!r}")
                if k is not INF:
                    if not isinstance(k, int) or k < 0:
                        raise GraphError(f"bad multiplicity {k!r} on ({u}, {v})")
                    if k == 0:
                        continue
                clean[u][v] = k
        self.vertices = vertices
        self._index = index
        self._adj = clean

    # -- construction -------------------------------------------------------
    @classmethod
    def from_matrix(cls, A: Sequence[Sequence[Mult]], labels: Sequence[str] | None = None) -> "Graph":
        n = len(A)
        labels = [str(i + 1) for i in range(n)] if labels is None else list(labels)
        adj = {labels[i]: {labels[j]: A[i][j] for j in range(n) if A[i][j] != 0} for i in range(n)}
        return cls(labels, adj)

    def with_entries(self, changes: Mapping[tuple[str, str], Mult]) -> "Graph":
        adj = {u: dict(r) for u, r in self._adj.items()}
        for (u, v), k in changes.items():
            if u not in self._index or v not in self._index:
                raise GraphError(f"unknown vertex in ({u}, {v})")
            if k is not INF and (not isinstance(k, int) or k < 0):
                raise GraphError(f"bad multiplicity {k!r} on ({u}, {v})")
            if k == 0:
                adj[u].pop(v, None)
            else:
                adj[u][v] = k
        g = Graph.__new__(Graph)
        g.vertices, g._index, g._adj = self.vertices, self._index, adj
        return g

    # -- basic access -----------------------------------------------------
    def __len__(self) -> int:
        return len(self.vertices)

    def index(self, v: str) -> int:
        return self._index[v]

    def __contains__(self, v: str) -> bool:
        return v in self._index

    def mult(self, u: str, v: str) -> Mult:
        return self._adj[u].get(v, 0)

    def out(self, u: str) -> dict[str, Mult]:
        """Nonzero out-multiplicities of ``u`` (a fresh dict)."""
        return dict(self._adj[u])

    def inn(self, v: str) -> dict[str, Mult]:
        return {u: self._adj[u][v] for u in self.vertices if v in self._adj[u]}

    def edges(self) -> Iterator[tuple[str, str, Mult]]:
        for u in self.vertices:
            row = self._adj[u]
            for v in self.vertices:
                if v in row:
                    yield (u, v, row[v])

    def out_degree(self, u: str) -> Mult:
        total: Mult = 0
        for k in self._adj[u].values():
            total = add_mult(total, k)
        return total

    def in_degree(self, v: str) -> Mult:
        total: Mult = 0
        for k in self.inn(v).values():
            total = add_mult(total, k)
        return total

    def is_sink(self, v: str) -> bool:
        return not self._adj[v]

    def is_infinite_emitter(self, v: str) -> bool:
        return any(k is INF for k in self._adj[v].values())

    def is_regular(self, v: str) -> bool:
        return bool(self._adj[v]) and not self.is_infinite_emitter(v)

    def is_singular(self, v: str) -> bool:
        return not self.is_regular(v)

    def is_source(self, v: str) -> bool:
        return all(v not in self._adj[u] for u in self.vertices)

    def has_loop(self, v: str) -> bool:
        return v in self._adj[v]

    def loops(self, v: str) -> Mult:
        return self.mult(v, v)

    def regular_vertices(self) -> list[str]:
        return [v for v in self.vertices if self.is_regular(v)]

    def singular_vertices(self) -> list[str]:
        return [v for v in self.vertices if not self.is_regular(v)]

    # -- matrices ---------------------------------------------------------
    def adjacency(self) -> list[list[Mult]]:
        return [[self.mult(u, v) for v in self.vertices] for u in self.vertices]

    def b_matrix(self) -> list[list[Mult]]:
        """``A - I`` with ``inf - 1 = inf``."""
        out = self.adjacency()
        for i in range(len(self.vertices)):
            if out[i][i] is not INF:
                out[i][i] -= 1
        return out

    def b_bullet(self, row_order: Sequence[str] | None = None, col_order: Sequence[str] | None = None) -> IntMatrix:
        """``B`` with singular rows removed; all entries are finite."""
        rows = [v for v in (row_order or self.vertices) if self.is_regular(v)]
        cols = list(col_order or self.vertices)
        data = [[self.mult(u, v) - (u == v) for v in cols] for u in rows]
        return IntMatrix(data, len(rows), len(cols))

    # -- reachability -------------------------------------------------------
    def reachable(self, u: str) -> frozenset[str]:
        """Vertices reached from ``u`` by a path of length >= 0."""
        return self._reach[u]

    def reaches_positive(self, u: str, w: str) -> bool:
        """Whether there is a path of positive length from ``u`` to ``w``."""
        return any(w in self._reach[x] for x in self._adj[u])

    @cached_property
    def _reach(self) -> dict[str, frozenset[str]]:
        out = {}
        for s in self.vertices:
            seen = {s}
            stack = [s]
            while stack:
                x = stack.pop()
                for y in self._adj[x]:
                    if y not in seen:
                        seen.add(y)
                        stack.append(y)
            out[s] = frozenset(seen)
        return out

    @cached_property
    def sccs(self) -> tuple[tuple[str, ...], ...]:
        """Mutual-reachability classes, each in vertex order, listed by first vertex."""
        seen: set[str] = set()
        out = []
        for v in self.vertices:
            if v in seen:
                continue
            comp = tuple(w for w in self.vertices if w in self._reach[v] and v in self._reach[w])
            seen.update(comp)
            out.append(comp)
        return tuple(out)

    def scc_of(self, v: str) -> tuple[str, ...]:
        for c in self.sccs:
            if v in c:
                return c
        raise KeyError(v)

    def _scc_edge_count(self, comp: Sequence[str]) -> Mult:
        cs = set(comp)
        total: Mult = 0
        for u in comp:
            for w, k in self._adj[u].items():
                if w in cs:
                    total = add_mult(total, k)
        return total

    def return_path_class(self, v: str) -> int:
        """0, 1, or 2 (meaning at least two) return paths based at ``v``."""
        comp = self.scc_of(v)
        edges = self._scc_edge_count(comp)
        if edges == 0:
            return 0
        # A strongly connected graph with exactly as many edges as vertices is a
        # single cycle; otherwise each vertex has at least two return paths.
        if edges is not INF and edges == len(comp):
            return 1
        return 2

    def vertex_class(self, v: str) -> VertexClass:
        if self.is_sink(v):
            kind = "sink"
        elif self.is_infinite_emitter(v):
            kind = "infinite-emitter"
        else:
            kind = "regular"
        return VertexClass(kind, self.has_loop(v), self.return_path_class(v))

    # -- identity -------------------------------------------------------------
    def triples(self) -> list[tuple[str, str, str]]:
        return sorted((u, v, format_mult(k)) for u, v, k in self.edges())

    @cached_property
    def digest(self) -> str:
        """sha256 of the vertex list and the sorted adjacency triples."""
        head = "vertices " + " ".join(sorted(self.vertices)) + "\n"
        adj = self._adj
        body = "".join([f"{u} {v} {'inf' if row[v] is INF else row[v]}\n"
                        for u in sorted(adj) for row in (adj[u],) for v in sorted(row)])
        return hashlib.sha256((head + body).encode()).hexdigest()

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Graph) and self.vertices == other.vertices and self._adj == other._adj

    def __hash__(self) -> int:
        return hash(self.digest)

    def __repr__(self) -> str:
        body = ", ".join(f"{u}->{v}:{format_mult(k)}" for u, v, k in self.edges())
        return f"Graph([{', '.join(self.vertices)}]; {body})"

    def relabel(self, mapping: Mapping[str, str], order: Sequence[str] | None = None) -> "Graph":
        """Rename vertices; ``order`` (new labels) defaults to the image of the old order."""
        new_vertices = list(order) if order is not None else [mapping[v] for v in self.vertices]
        adj = {mapping[u]: {mapping[v]: k for v, k in row.items()} for u, row in self._adj.items()}
        return Graph(new_vertices, adj)

    def reorder(self, order: Sequence[str]) -> "Graph":
        if sorted(order) != sorted(self.vertices):
            raise GraphError("reorder needs a permutation of the vertices")
        return Graph(order, self._adj)

    def standard_labels(self) -> "Graph":
        """Relabel to ``"1".."N"`` following the current order."""
        return self.relabel({v: str(i + 1) for i, v in enumerate(self.vertices)})

    def induced(self, keep: Iterable[str]) -> "Graph":
        keep = set(keep)
        verts = [v for v in self.vertices if v in keep]
        return Graph(verts, {u: {v: k for v, k in self._adj[u].items() if v in keep} for u in verts})

    def fresh_label(self, base: str) -> str:
        lab = base
        while lab in self._index:
            lab += "'"
        return lab


def build_graph(vertex_count: int, edge_list: Iterable[tuple[int, int, Mult | str]]) -> Graph:
    """Graph on ``"1".."N"`` from 1-based ``(u, v, k)`` triples.

    Duplicate pairs are summed, with infinity absorbing; zero entries vanish.
    """
    if vertex_count < 1:
        raise GraphError("vertex_count must be at least 1")
    labels = [str(i + 1) for i in range(vertex_count)]
    adj: dict[str, dict[str, Mult]] = {v: {} for v in labels}
    for u, v, k in edge_list:
        if isinstance(k, str):
            k = parse_mult(k)
        elif k is not INF and (not isinstance(k, int) or k < 0):
            raise GraphError(f"negative or non-integer multiplicity {k!r}")
        if not (1 <= u <= vertex_count and 1 <= v <= vertex_count):
            raise GraphError(f"edge ({u}, {v}) references a vertex outside 1..{vertex_count}")
        if k == 0:
            continue
        su, sv = str(u), str(v)
        adj[su][sv] = add_mult(adj[su].get(sv, 0), k)
    return Graph(labels, adj)


def matrices(g: Graph) -> tuple[list[list[Mult]], list[list[Mult]], IntMatrix]:
    """``(A, B, B_bullet)`` in vertex order."""
    return g.adjacency(), g.b_matrix(), g.b_bullet()


def condition_K(g: Graph) -> bool:
    """No vertex has exactly one return path."""
    return all(g.return_path_class(v) != 1 for v in g.vertices)


def shape_violation(g: Graph) -> tuple[str, str] | None:
    """First vertex breaking the "regular with loop, or singular emitting
    infinitely to every vertex it reaches" shape, with the reason."""
    for v in g.vertices:
        if g.is_regular(v):
            if not g.has_loop(v):
                return v, "regular vertex without a loop"
        else:
            for w in g.vertices:
                if g.reaches_positive(v, w) and g.mult(v, w) is not INF:
                    return v, f"singular vertex reaches {w} but emits finitely many edges to it"
    return None


# ---------------------------------------------------------------------------
# Block structure
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BlockStructure:
    """Blocks of vertices over a poset; block ``i`` is listed regular-first."""

    poset: Poset
    blocks: tuple[tuple[str, ...], ...]
    regular: frozenset[str]

    @property
    def N(self) -> int:
        return len(self.blocks)

    @cached_property
    def block_of(self) -> dict[str, int]:
        return {v: i for i, b in enumerate(self.blocks) for v in b}

    @cached_property
    def m(self) -> tuple[int, ...]:
        return tuple(sum(1 for v in b if v in self.regular) for b in self.blocks)

    @cached_property
    def n(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)

    @cached_property
    def row_order(self) -> tuple[str, ...]:
        return tuple(v for b in self.blocks for v in b if v in self.regular)

    @cached_property
    def col_order(self) -> tuple[str, ...]:
        return tuple(v for b in self.blocks for v in b)

    def singular_counts(self) -> tuple[int, ...]:
        return tuple(n - m for n, m in zip(self.n, self.m))

    def bullet(self, g: Graph) -> BlockMatrix:
        mat = g.b_bullet(self.row_order, self.col_order)
        return BlockMatrix(mat, self.m, self.n, self.poset)


def ideal_poset(g: Graph, check_condition_k: bool = True) -> BlockStructure:
    """Blocks are mutual-reachability classes ordered by reachability.

    Requires the "regular with a loop, or singular emitting infinitely to
    everything reachable" shape; otherwise raises :class:`PreconditionViolated`.
    """
    bad = shape_violation(g)
    if bad is not None:
        raise PreconditionViolated(bad[1], bad[0])
    if check_condition_k and not condition_K(g):
        v = next(v for v in g.vertices if g.return_path_class(v) == 1)
        raise PreconditionViolated("Condition (K) fails: exactly one return path", v)
    comps = list(g.sccs)
    pos = {v: i for i, v in enumerate(g.vertices)}
    key = [min(pos[v] for v in c) for c in comps]
    reach = [[bool(set(g.reachable(c[0])) & set(d)) for d in comps] for c in comps]
    # Kahn's algorithm; ties go to the class holding the earliest vertex.
    remaining = set(range(len(comps)))
    order = []
    while remaining:
        avail = [a for a in remaining if not any(b != a and b in remaining and reach[b][a] for b in remaining)]
        nxt = min(avail, key=lambda a: key[a])
        order.append(nxt)
        remaining.remove(nxt)
    rank = {c: i for i, c in enumerate(order)}
    relations = [(rank[a], rank[b]) for a in range(len(comps)) for b in range(len(comps)) if a != b and reach[a][b]]
    poset = Poset(len(comps), relations)
    regular = frozenset(g.regular_vertices())
    blocks = []
    for c in order:
        comp = comps[c]
        blocks.append(tuple([v for v in comp if v in regular] + [v for v in comp if v not in regular]))
    return BlockStructure(poset, tuple(blocks), regular)


def graph_from_bullet(structure: BlockStructure, bullet: IntMatrix, cyclic: Sequence[bool] | None = None) -> Graph:
    """Rebuild a graph in the saturated shape from ``B_bullet``.

    Regular rows come from ``bullet + I``; a singular vertex of block ``i``
    emits infinitely many edges to every vertex of blocks strictly above
    ``i``, and to its own block when that block carries a cycle.
    """
    rows, cols = structure.row_order, structure.col_order
    if bullet.shape != (len(rows), len(cols)):
        raise ValueError("matrix shape does not match the block structure")
    adj: dict[str, dict[str, Mult]] = {v: {} for v in cols}
    for a, u in enumerate(rows):
        for b, v in enumerate(cols):
            k = bullet[a, b] + (u == v)
            if k < 0:
                raise ValueError(f"entry ({u}, {v}) would be negative")
            if k:
                adj[u][v] = k
    bof = structure.block_of
    if cyclic is None:
        cyclic = [structure.m[i] > 0 or structure.n[i] > 1 for i in range(structure.N)]
    for v in cols:
        if v in structure.regular:
            continue
        i = bof[v]
        for w in cols:
            j = bof[w]
            if (i != j and structure.poset.leq(i, j)) or (i == j and cyclic[i]):
                adj[v][w] = INF
    return Graph(cols, adj)


# ---------------------------------------------------------------------------
# Isomorphism
# ---------------------------------------------------------------------------

def _mult_key(k: Mult) -> tuple[int, int]:
    return (1, 0) if k is INF else (0, k)


def _refine(g: Graph) -> dict[str, str]:
    """Stable color refinement; colors are short digests comparable across graphs."""

    def digest(obj) -> str:
        return hashlib.sha1(repr(obj).encode()).hexdigest()[:16]

    colors = {v: digest((_mult_key(g.mult(v, v)), g.is_regular(v))) for v in g.vertices}
    while True:
        new = {}
        for v in g.vertices:
            outs = sorted((colors[w], _mult_key(k)) for w, k in g.out(v).items())
            ins = sorted((colors[u], _mult_key(k)) for u, k in g.inn(v).items())
            new[v] = digest((colors[v], outs, ins))
        if len(set(new.values())) == len(set(colors.values())):
            return new
        colors = new


def find_isomorphism(g: Graph, h: Graph) -> dict[str, str] | None:
    """A label map ``g -> h`` preserving all multiplicities, or ``None``."""
    if len(g) != len(h):
        return None
    if sorted(_mult_key(k) for *_, k in g.edges()) != sorted(_mult_key(k) for *_, k in h.edges()):
        return None
    cg, ch = _refine(g), _refine(h)
    if sorted(cg.values()) != sorted(ch.values()):
        return None
    order = sorted(g.vertices, key=lambda v: (sum(1 for w in g.vertices if cg[w] == cg[v]), g.index(v)))
    mapping: dict[str, str] = {}
    used: set[str] = set()

    def consistent(v: str, t: str) -> bool:
        if g.mult(v, v) != h.mult(t, t):
            return False
        for w, x in mapping.items():
            if g.mult(v, w) != h.mult(t, x) or g.mult(w, v) != h.mult(x, t):
                return False
        return True

    def extend(i: int) -> bool:
        if i == len(order):
            return True
        v = order[i]
        for t in h.vertices:
            if t in used or ch[t] != cg[v] or not consistent(v, t):
                continue
            mapping[v] = t
            used.add(t)
            if extend(i + 1):
                return True
            del mapping[v]
            used.discard(t)
        return False

    return dict(mapping) if extend(0) else None


def is_isomorphic(g: Graph, h: Graph) -> bool:
    return find_isomorphism(g, h) is not None


def canonical_key(g: Graph) -> tuple:
    """Isomorphism-invariant key: the least adjacency listing over all
    orderings compatible with the refined coloring."""
    colors = _refine(g)
    classes: dict[str, list[str]] = {}
    for v in g.vertices:
        classes.setdefault(colors[v], []).append(v)
    keys = sorted(classes)
    best = None
    n = len(g)

    # Backtrack over class-respecting orders, pruning on prefixes.
    slots = [c for c in keys for _ in classes[c]]
    order: list[str] = []
    used: set[str] = set()

    def prefix_code(o: list[str]) -> tuple:
        k = len(o)
        return tuple(_mult_key(g.mult(o[i], o[j])) for i in range(k) for j in range(k) if max(i, j) == k - 1)

    def rec(depth: int, acc: tuple) -> None:
        nonlocal best
        if depth == n:
            if best is None or acc < best:
                best = acc
            return
        for v in classes[slots[depth]]:
            if v in used:
                continue
            order.append(v)
            used.add(v)
            code = acc + prefix_code(order)
            if best is None or code <= best[: len(code)]:
                rec(depth + 1, code)
            order.pop()
            used.discard(v)

    rec(0, ())
    return (tuple(keys), best)


__all__ = [
    "INF", "Mult", "is_inf", "parse_mult", "format_mult", "add_mult", "mul_mult", "Graph", "GraphError",
    "PreconditionViolated", "VertexClass", "build_graph", "matrices", "condition_K", "shape_violation",
    "BlockStructure", "ideal_poset", "graph_from_bullet", "find_isomorphism", "is_isomorphic", "canonical_key",
]
