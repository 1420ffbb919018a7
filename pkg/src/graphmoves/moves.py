"""Graph moves, derived matrix moves, and replayable certificates.

Every move is a small frozen value with a one-line text form. Applying a move
checks its precondition and returns a new :class:`Graph`; nothing mutates.

Vertex labels created by moves are deterministic, so replaying a move list
reproduces every intermediate digest byte for byte:

* outsplit/insplit at ``w``: part 1 keeps ``w``, part ``j`` becomes ``w.j``;
* Cuntz splice at ``v``: new vertices ``v.c1`` and ``v.c2``;
* inverse collapse on an edge ``u -> v``: new vertex ``u>v``.

A ``'`` is appended while a label is taken.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .graph import (INF, Graph, Mult, PreconditionViolated, add_mult, find_isomorphism, format_mult,
                    mul_mult, parse_mult)


class IllegalDerivedMove(PreconditionViolated):
    """A row/column operation whose witness or result is not admissible."""


MAT_OPS = ("col+", "col-", "row+", "row-")
DERIVED_KINDS = {"col_add": "col+", "col_sub": "col-", "row_add": "row+", "row_sub": "row-"}

Part = tuple[tuple[str, Mult], ...]


def _part(d: Mapping[str, Mult]) -> Part:
    return tuple((k, v) for k, v in d.items() if v != 0)


@dataclass(frozen=True)
class Move:
    """One move. Field use depends on ``kind``:

    ``S w``, ``R w``, ``COL w``: ``vertex``.
    ``O w | ...`` / ``I w | ...``: ``vertex`` and ``parts`` (target or source counts).
    ``C v``: ``vertex``; ``unchecked`` skips the return-path test.
    ``T``: ``path`` whose first edge has infinite multiplicity.
    ``EXP u v``: inverse collapse of one edge, ``vertex=u``, ``target=v``.
    ``MAT op from into``: derived row/column move with witness ``path``.
    """

    kind: str
    vertex: str = ""
    parts: tuple[Part, ...] = ()
    path: tuple[str, ...] = ()
    target: str = ""
    op: str = ""
    unchecked: bool = False

    # -- constructors -------------------------------------------------------
    @staticmethod
    def S(w: str) -> "Move":
        return Move("S", vertex=w)

    @staticmethod
    def R(w: str) -> "Move":
        return Move("R", vertex=w)

    @staticmethod
    def O(w: str, parts: Sequence[Mapping[str, Mult]]) -> "Move":
        return Move("O", vertex=w, parts=tuple(_part(p) for p in parts))

    @staticmethod
    def I(w: str, parts: Sequence[Mapping[str, Mult]]) -> "Move":
        return Move("I", vertex=w, parts=tuple(_part(p) for p in parts))

    @staticmethod
    def C(v: str, unchecked: bool = False) -> "Move":
        return Move("C", vertex=v, unchecked=unchecked)

    @staticmethod
    def T(path: Sequence[str]) -> "Move":
        return Move("T", path=tuple(path))

    @staticmethod
    def COL(v: str) -> "Move":
        return Move("COL", vertex=v)

    @staticmethod
    def EXP(u: str, v: str) -> "Move":
        return Move("EXP", vertex=u, target=v)

    @staticmethod
    def MAT(op: str, frm: str, into: str, path: Sequence[str]) -> "Move":
        if op not in MAT_OPS:
            raise ValueError(f"unknown matrix move {op!r}")
        return Move("MAT", vertex=frm, target=into, op=op, path=tuple(path))

    # -- text -------------------------------------------------------------------
    def to_line(self) -> str:
        k = self.kind
        if k in ("S", "R", "COL"):
            return f"{k} {self.vertex}"
        if k == "C":
            return f"C {self.vertex}" + (" unchecked" if self.unchecked else "")
        if k in ("O", "I"):
            parts = " ; ".join(" ".join(f"{x}:{format_mult(c)}" for x, c in p) for p in self.parts)
            return f"{k} {self.vertex} | {parts}"
        if k == "T":
            return "T path=" + ",".join(self.path)
        if k == "EXP":
            return f"EXP {self.vertex} {self.target}"
        if k == "MAT":
            return f"MAT {self.op} {self.vertex} {self.target} path=" + ",".join(self.path)
        raise ValueError(f"unknown move kind {k!r}")

    def __str__(self) -> str:
        return self.to_line()

    def relabel(self, mapping: Mapping[str, str]) -> "Move":
        f = lambda x: mapping.get(x, x)  # noqa: E731
        return Move(self.kind, f(self.vertex) if self.vertex else "",
                    tuple(tuple((f(x), c) for x, c in p) for p in self.parts),
                    tuple(f(x) for x in self.path), f(self.target) if self.target else "", self.op, self.unchecked)


def parse_move(line: str) -> Move:
    """Inverse of :meth:`Move.to_line`."""
    line = line.strip()
    head, _, rest = line.partition(" ")
    rest = rest.strip()
    if head in ("S", "R", "COL"):
        if not rest or " " in rest:
            raise ValueError(f"expected one vertex: {line!r}")
        return Move(head, vertex=rest)
    if head == "C":
        toks = rest.split()
        if len(toks) == 1:
            return Move.C(toks[0])
        if len(toks) == 2 and toks[1] == "unchecked":
            return Move.C(toks[0], unchecked=True)
        raise ValueError(f"bad C line: {line!r}")
    if head in ("O", "I"):
        w, bar, body = rest.partition("|")
        if not bar:
            raise ValueError(f"missing '|' in {line!r}")
        parts = []
        for chunk in body.split(";"):
            d: dict[str, Mult] = {}
            for tok in chunk.split():
                x, colon, c = tok.rpartition(":")
                if not colon:
                    raise ValueError(f"bad part entry {tok!r}")
                d[x] = add_mult(d.get(x, 0), parse_mult(c))
            parts.append(d)
        return Move(head, vertex=w.strip(), parts=tuple(_part(p) for p in parts))
    if head == "T":
        if not rest.startswith("path="):
            raise ValueError(f"bad T line: {line!r}")
        return Move.T(rest[5:].split(","))
    if head == "EXP":
        toks = rest.split()
        if len(toks) != 2:
            raise ValueError(f"bad EXP line: {line!r}")
        return Move.EXP(*toks)
    if head == "MAT":
        toks = rest.split()
        if len(toks) != 4 or not toks[3].startswith("path="):
            raise ValueError(f"bad MAT line: {line!r}")
        return Move.MAT(toks[0], toks[1], toks[2], toks[3][5:].split(","))
    raise ValueError(f"unknown move {head!r}")


# ---------------------------------------------------------------------------
# Primitive moves
# ---------------------------------------------------------------------------

def split_labels(g: Graph, w: str, count: int) -> list[str]:
    """Labels of the ``count`` vertices replacing ``w`` in a split."""
    taken = set(g.vertices)
    out = [w]
    for j in range(2, count + 1):
        lab = f"{w}.{j}"
        while lab in taken:
            lab += "'"
        taken.add(lab)
        out.append(lab)
    return out


def splice_labels(g: Graph, v: str) -> tuple[str, str]:
    taken = set(g.vertices)
    u1 = f"{v}.c1"
    while u1 in taken:
        u1 += "'"
    taken.add(u1)
    u2 = f"{v}.c2"
    while u2 in taken:
        u2 += "'"
    return u1, u2


def expand_label(g: Graph, u: str, v: str) -> str:
    return g.fresh_label(f"{u}>{v}")


def _check_partition(total: Mapping[str, Mult], parts: Sequence[Part], what: str, w: str) -> list[dict[str, Mult]]:
    if not parts:
        raise PreconditionViolated(f"{what}: empty partition", w)
    dicts = []
    for p in parts:
        d: dict[str, Mult] = {}
        for x, c in p:
            if c is not INF and (not isinstance(c, int) or c < 0):
                raise PreconditionViolated(f"{what}: bad count {c!r}", w)
            d[x] = add_mult(d.get(x, 0), c)
        d = {x: c for x, c in d.items() if c != 0}
        if not d:
            raise PreconditionViolated(f"{what}: partition has an empty set", w)
        dicts.append(d)
    keys = set(total) | {x for d in dicts for x in d}
    for x in keys:
        s: Mult = 0
        for d in dicts:
            s = add_mult(s, d.get(x, 0))
        if s != total.get(x, 0):
            raise PreconditionViolated(
                f"{what}: parts give {format_mult(s)} edges at {x}, graph has {format_mult(total.get(x, 0))}", w)
    return dicts


def _insert_after(vertices: Sequence[str], w: str, new: Sequence[str]) -> list[str]:
    out = []
    for v in vertices:
        out.append(v)
        if v == w:
            out.extend(new)
    return out


def _source_removal(g: Graph, w: str) -> Graph:
    if w not in g:
        raise PreconditionViolated("unknown vertex", w)
    if not g.is_regular(w):
        raise PreconditionViolated("(S) needs a regular vertex", w)
    if not g.is_source(w):
        raise PreconditionViolated("(S) needs a source", w)
    if len(g) == 1:
        raise PreconditionViolated("(S) would leave an empty graph", w)
    keep = [v for v in g.vertices if v != w]
    return Graph(keep, {u: {v: k for v, k in g.out(u).items() if v != w} for u in keep})


def _reduction(g: Graph, w: str) -> Graph:
    if w not in g:
        raise PreconditionViolated("unknown vertex", w)
    if not g.is_regular(w):
        raise PreconditionViolated("(R) needs a regular vertex", w)
    out = g.out(w)
    if g.out_degree(w) != 1:
        raise PreconditionViolated("(R) needs exactly one edge out of w", w)
    (t, _), = out.items()
    if t == w:
        raise PreconditionViolated("(R) needs the edge out of w to leave w", w)
    inn = g.inn(w)
    if len(inn) != 1:
        raise PreconditionViolated("(R) needs all edges into w to come from one vertex", w)
    (x, k), = inn.items()
    keep = [v for v in g.vertices if v != w]
    adj = {u: {v: c for v, c in g.out(u).items() if v != w} for u in keep}
    adj[x][t] = add_mult(adj[x].get(t, 0), k)
    return Graph(keep, adj)


def _outsplit(g: Graph, w: str, parts: Sequence[Part]) -> Graph:
    if w not in g:
        raise PreconditionViolated("unknown vertex", w)
    if g.is_sink(w):
        raise PreconditionViolated("(O) needs a vertex that is not a sink", w)
    dicts = _check_partition(g.out(w), parts, "(O)", w)
    if sum(1 for d in dicts if any(c is INF for c in d.values())) > 1:
        raise PreconditionViolated("(O) allows at most one infinite part", w)
    labels = split_labels(g, w, len(dicts))
    verts = _insert_after(g.vertices, w, labels[1:])
    adj: dict[str, dict[str, Mult]] = {v: {} for v in verts}
    for u in g.vertices:
        if u == w:
            continue
        for v, k in g.out(u).items():
            if v == w:
                for lab in labels:
                    adj[u][lab] = k
            else:
                adj[u][v] = k
    for j, d in enumerate(dicts):
        src = labels[j]
        for v, k in d.items():
            if v == w:
                for lab in labels:
                    adj[src][lab] = k
            else:
                adj[src][v] = k
    return Graph(verts, adj)


def _insplit(g: Graph, w: str, parts: Sequence[Part]) -> Graph:
    if w not in g:
        raise PreconditionViolated("unknown vertex", w)
    if not g.is_regular(w):
        raise PreconditionViolated("(I) needs a regular vertex", w)
    if g.is_source(w):
        raise PreconditionViolated("(I) needs a vertex that is not a source", w)
    dicts = _check_partition(g.inn(w), parts, "(I)", w)
    labels = split_labels(g, w, len(dicts))
    verts = _insert_after(g.vertices, w, labels[1:])
    adj: dict[str, dict[str, Mult]] = {v: {} for v in verts}
    for u in g.vertices:
        if u == w:
            continue
        for v, k in g.out(u).items():
            if v != w:
                adj[u][v] = k
    for j, d in enumerate(dicts):
        dst = labels[j]
        for x, k in d.items():
            if x == w:
                for lab in labels:
                    adj[lab][dst] = k
            else:
                adj[x][dst] = k
    for v, k in g.out(w).items():
        if v != w:
            for lab in labels:
                adj[lab][v] = k
    return Graph(verts, adj)


def _splice(g: Graph, v: str, unchecked: bool) -> Graph:
    if v not in g:
        raise PreconditionViolated("unknown vertex", v)
    if not unchecked:
        if not g.is_regular(v):
            raise PreconditionViolated("(C) needs a regular vertex", v)
        if g.return_path_class(v) < 2:
            raise PreconditionViolated("(C) needs at least two return paths", v)
    u1, u2 = splice_labels(g, v)
    adj = {u: g.out(u) for u in g.vertices}
    adj[v][u1] = 1
    adj[u1] = {v: 1, u1: 1, u2: 1}
    adj[u2] = {u1: 1, u2: 1}
    return Graph(list(g.vertices) + [u1, u2], adj)


def _collapse(g: Graph, v: str) -> Graph:
    if v not in g:
        raise PreconditionViolated("unknown vertex", v)
    if not g.is_regular(v):
        raise PreconditionViolated("collapse needs a regular vertex", v)
    if g.has_loop(v):
        raise PreconditionViolated("collapse needs a vertex without a loop", v)
    keep = [u for u in g.vertices if u != v]
    outv = g.out(v)
    adj = {u: {w: k for w, k in g.out(u).items() if w != v} for u in keep}
    for x, a in g.inn(v).items():
        for y, b in outv.items():
            adj[x][y] = add_mult(adj[x].get(y, 0), mul_mult(a, b))
    return Graph(keep, adj)


def _saturate(g: Graph, path: Sequence[str]) -> Graph:
    if len(path) < 2:
        raise PreconditionViolated("(T) needs a path of positive length")
    for v in path:
        if v not in g:
            raise PreconditionViolated("unknown vertex", v)
    for a, b in zip(path, path[1:]):
        if g.mult(a, b) == 0:
            raise PreconditionViolated(f"(T) path uses a missing edge {a}->{b}", a)
    if g.mult(path[0], path[1]) is not INF:
        raise PreconditionViolated("(T) needs infinitely many edges along the first step", path[0])
    return g.with_entries({(path[0], path[-1]): INF})


def _expand(g: Graph, u: str, v: str) -> Graph:
    if u not in g or v not in g:
        raise PreconditionViolated("unknown vertex", u if u not in g else v)
    k = g.mult(u, v)
    if k == 0:
        raise PreconditionViolated(f"inverse collapse needs an edge {u}->{v}", u)
    mid = expand_label(g, u, v)
    adj = {x: g.out(x) for x in g.vertices}
    adj[u][v] = k if k is INF else k - 1
    adj[u][mid] = 1
    adj[mid] = {v: 1}
    return Graph(list(g.vertices) + [mid], adj)


def apply_move(g: Graph, m: Move) -> Graph:
    """Apply ``m`` to ``g``; raises :class:`PreconditionViolated` when illegal."""
    k = m.kind
    if k == "S":
        return _source_removal(g, m.vertex)
    if k == "R":
        return _reduction(g, m.vertex)
    if k == "O":
        return _outsplit(g, m.vertex, m.parts)
    if k == "I":
        return _insplit(g, m.vertex, m.parts)
    if k == "C":
        return _splice(g, m.vertex, m.unchecked)
    if k == "COL":
        return _collapse(g, m.vertex)
    if k == "T":
        return _saturate(g, m.path)
    if k == "EXP":
        return _expand(g, m.vertex, m.target)
    if k == "MAT":
        return derived_matrix_move(g, m.op, m.vertex, m.target, m.path)
    raise PreconditionViolated(f"unknown move kind {k!r}")


# ---------------------------------------------------------------------------
# Derived row/column moves
# ---------------------------------------------------------------------------

def _b(g: Graph, x: str, y: str):
    k = g.mult(x, y)
    if x == y and k is not INF:
        return k - 1
    return k


def _a_from_b(x: str, y: str, b) -> Mult:
    if b is INF:
        return INF
    return b + 1 if x == y else b


def _check_representable(x: str, y: str, b) -> None:
    if b is INF:
        return
    if x == y and b < -1:
        raise IllegalDerivedMove(f"diagonal entry at {x} would be {b}", x)
    if x != y and b < 0:
        raise IllegalDerivedMove(f"entry ({x}, {y}) would be {b}", x)


def _validate_col_path(g: Graph, frm: str, into: str, path: Sequence[str]) -> None:
    if frm == into:
        raise IllegalDerivedMove("source and target must be distinct", frm)
    if len(path) < 2 or path[0] != frm or path[-1] != into:
        raise IllegalDerivedMove(f"witness path must run from {frm} to {into}", frm)
    if len(set(path)) != len(path):
        raise IllegalDerivedMove("witness path must visit distinct vertices", frm)
    for a, b in zip(path, path[1:]):
        if a not in g or b not in g:
            raise IllegalDerivedMove("witness path leaves the graph", a)
        if g.mult(a, b) == 0:
            raise IllegalDerivedMove(f"witness path uses a missing edge {a}->{b}", a)
    for a in path[:-1]:
        d = g.out_degree(a)
        if d is not INF and d < 2:
            raise IllegalDerivedMove("each witness vertex but the last must emit at least two edges", a)


def _validate_row_path(g: Graph, frm: str, into: str, path: Sequence[str]) -> None:
    if frm == into:
        raise IllegalDerivedMove("source and target must be distinct", frm)
    if len(path) < 2 or path[0] != into or path[-1] != frm:
        raise IllegalDerivedMove(f"witness path must run from {into} to {frm}", into)
    if len(set(path)) != len(path):
        raise IllegalDerivedMove("witness path must visit distinct vertices", into)
    for a, b in zip(path, path[1:]):
        if a not in g or b not in g:
            raise IllegalDerivedMove("witness path leaves the graph", a)
        if g.mult(a, b) == 0:
            raise IllegalDerivedMove(f"witness path uses a missing edge {a}->{b}", a)
    for a in path[1:]:
        if not g.is_regular(a):
            raise IllegalDerivedMove("each witness vertex after the first must be regular", a)
        d = g.in_degree(a)
        if d is not INF and d < 2:
            raise IllegalDerivedMove("each witness vertex after the first must receive at least two edges", a)


def _combine(g: Graph, op: str, frm: str, into: str) -> Graph:
    """The graph of ``B'+I`` where ``B'`` is ``B`` after the raw operation."""
    changes: dict[tuple[str, str], Mult] = {}
    sub = op.endswith("-")
    if op.startswith("col"):
        support = set(g.inn(frm)) | {frm}
        cells = [((x, into), (x, frm)) for x in g.vertices if x in support]
    else:
        support = set(g.out(frm)) | {frm}
        cells = [((into, y), (frm, y)) for y in g.vertices if y in support]
    for (x, y), (p, q) in cells:
        b0 = _b(g, x, y)
        d = _b(g, p, q)
        if d == 0:
            continue
        if not sub:
            nb = add_mult(b0, d) if (b0 is INF or d is INF) else b0 + d
        elif d is INF:
            if b0 is not INF:
                raise IllegalDerivedMove(f"cannot subtract infinitely many edges at ({x}, {y})", x)
            nb = INF
        else:
            nb = b0 if b0 is INF else b0 - d
        _check_representable(x, y, nb)
        changes[(x, y)] = _a_from_b(x, y, nb)
    return g.with_entries(changes)


def derived_matrix_move(g: Graph, kind: str, frm: str, into: str, witness_path: Sequence[str]) -> Graph:
    """Row or column addition/subtraction on ``B = A - I``.

    ``kind`` is ``col_add``, ``col_sub``, ``row_add``, ``row_sub`` or the short
    forms ``col+``, ``col-``, ``row+``, ``row-``. Column moves add column
    ``frm`` into column ``into`` and need a witness path ``frm -> ... -> into``;
    row moves add row ``frm`` into row ``into`` and need a path
    ``into -> ... -> frm``. A subtraction is legal when the result is a graph
    and the addition undoing it is legal there.
    """
    op = DERIVED_KINDS.get(kind, kind)
    if op not in MAT_OPS:
        raise IllegalDerivedMove(f"unknown derived move {kind!r}")
    for v in (frm, into):
        if v not in g:
            raise IllegalDerivedMove("unknown vertex", v)
    path = tuple(witness_path)
    if op == "col+":
        _validate_col_path(g, frm, into, path)
        return _combine(g, op, frm, into)
    if op == "row+":
        _validate_row_path(g, frm, into, path)
        if not g.is_regular(frm):
            raise IllegalDerivedMove("the added row must belong to a regular vertex", frm)
        return _combine(g, op, frm, into)
    if frm == into:
        raise IllegalDerivedMove("source and target must be distinct", frm)
    if op == "row-" and not g.is_regular(frm):
        raise IllegalDerivedMove("the subtracted row must belong to a regular vertex", frm)
    result = _combine(g, op, frm, into)
    undo = "col+" if op == "col-" else "row+"
    try:
        back = derived_matrix_move(result, undo, frm, into, path)
    except IllegalDerivedMove as exc:
        raise IllegalDerivedMove(f"the addition undoing this subtraction is illegal: {exc.reason}",
                                 exc.vertex) from None
    if back != g:
        raise IllegalDerivedMove("the undoing addition does not restore the graph", frm)
    return result


def find_witness_path(g: Graph, op: str, frm: str, into: str, max_len: int | None = None) -> tuple[str, ...] | None:
    """Shortest admissible witness path for a derived move, if any."""
    op = DERIVED_KINDS.get(op, op)
    if frm == into or frm not in g or into not in g:
        return None
    if op in ("col-", "row-"):
        try:
            result = _combine(g, op, frm, into)
        except IllegalDerivedMove:
            return None
        path = find_witness_path(result, "col+" if op == "col-" else "row+", frm, into, max_len)
        if path is None:
            return None
        try:
            derived_matrix_move(g, op, frm, into, path)
        except IllegalDerivedMove:
            return None
        return path
    if op == "col+":
        start, goal = frm, into

        def ok_step(a: str, b: str) -> bool:
            d = g.out_degree(a)
            return d is INF or d >= 2
    else:
        start, goal = into, frm

        def ok_step(a: str, b: str) -> bool:
            if not g.is_regular(b):
                return False
            d = g.in_degree(b)
            return d is INF or d >= 2
    prev = {start: None}
    queue = deque([start])
    while queue:
        a = queue.popleft()
        if a == goal:
            break
        for b in g.vertices:
            if b in prev or g.mult(a, b) == 0 or not ok_step(a, b):
                continue
            prev[b] = a
            queue.append(b)
    if goal not in prev:
        return None
    path = [goal]
    while prev[path[-1]] is not None:
        path.append(prev[path[-1]])
    path.reverse()
    if max_len is not None and len(path) - 1 > max_len:
        return None
    try:
        derived_matrix_move(g, op, frm, into, path)
    except IllegalDerivedMove:
        return None
    return tuple(path)


def mat_move(g: Graph, op: str, frm: str, into: str) -> Move:
    """A ``MAT`` move with an automatically found witness path."""
    op = DERIVED_KINDS.get(op, op)
    path = find_witness_path(g, op, frm, into)
    if path is None:
        raise IllegalDerivedMove(f"no admissible witness path for {op} {frm}->{into}", frm)
    return Move.MAT(op, frm, into, path)


# ---------------------------------------------------------------------------
# Sequences and certificates
# ---------------------------------------------------------------------------

@dataclass
class MoveSequence:
    """Moves applied in order from ``start``; ``hashes[i]`` is the digest after move ``i``."""

    start: Graph
    moves: list[Move] = field(default_factory=list)
    hashes: list[str] = field(default_factory=list)

    @classmethod
    def build(cls, start: Graph, moves: Iterable[Move]) -> "MoveSequence":
        seq = cls(start)
        for m in moves:
            seq.append(m)
        return seq

    @classmethod
    def concat(cls, seqs: Sequence["MoveSequence"]) -> "MoveSequence":
        """Sequences joined end to start; each junction must match by digest."""
        out = cls(seqs[0].start)
        for k, s in enumerate(seqs):
            if k and s.start.digest != seqs[k - 1].end.digest:
                raise CertificateError(f"sequence {k + 1} does not start where sequence {k} ends")
            out.moves += s.moves
            out.hashes += s.hashes
        out._end = seqs[-1].end
        return out

    def append(self, m: Move) -> Graph:
        g = apply_move(self.end, m)
        self.moves.append(m)
        self.hashes.append(g.digest)
        self._end = g
        return g

    def extend(self, moves: Iterable[Move]) -> Graph:
        for m in moves:
            self.append(m)
        return self.end

    @property
    def end(self) -> Graph:
        cached = self.__dict__.get("_end")
        if cached is not None:
            return cached
        g = self.start
        for m in self.moves:
            g = apply_move(g, m)
        self._end = g
        return g

    def __len__(self) -> int:
        return len(self.moves)

    def replay(self) -> Graph:
        """Re-apply every move and check the recorded digests."""
        g = self.start
        for i, (m, h) in enumerate(zip(self.moves, self.hashes)):
            try:
                g = apply_move(g, m)
            except PreconditionViolated as exc:
                raise CertificateError(f"move {i + 1} ({m.to_line()}) is illegal: {exc}") from None
            if g.digest != h:
                raise CertificateError(f"move {i + 1} ({m.to_line()}) gives digest {g.digest[:12]}, "
                                       f"recorded {h[:12]}")
        if len(self.hashes) != len(self.moves):
            raise CertificateError("hash list does not match the move list")
        return g


class CertificateError(ValueError):
    """A certificate does not replay or does not close up."""


@dataclass
class Segment:
    """``left`` runs from the previous anchor, ``right`` from the next one;
    ``iso`` maps the end of ``left`` onto the end of ``right``."""

    left: MoveSequence
    right: MoveSequence
    iso: dict[str, str]


@dataclass
class MoveCertificate:
    """A zigzag chain ``anchor_0 -> X_1 ~ Y_1 <- anchor_1 -> ... <- anchor_k``.

    Each segment's left sequence starts at the previous anchor and its right
    sequence at the next one; their ends are identified by an explicit vertex
    bijection. The chain proves ``anchor_0`` and ``anchor_k`` move equivalent.
    """

    segments: list[Segment]

    @property
    def start(self) -> Graph:
        return self.segments[0].left.start

    @property
    def end(self) -> Graph:
        return self.segments[-1].right.start

    @property
    def anchors(self) -> list[Graph]:
        return [self.segments[0].left.start] + [s.right.start for s in self.segments]

    def move_count(self) -> int:
        return sum(len(s.left) + len(s.right) for s in self.segments)

    def moves(self) -> list[Move]:
        return [m for s in self.segments for m in list(s.left.moves) + list(s.right.moves)]

    def verify(self) -> None:
        """Replay everything; raise :class:`CertificateError` on any failure."""
        if not self.segments:
            raise CertificateError("empty certificate")
        for k, seg in enumerate(self.segments):
            if k > 0 and seg.left.start.digest != self.segments[k - 1].right.start.digest:
                raise CertificateError(f"segment {k + 1} does not start at the previous anchor")
            a = seg.left.replay()
            b = seg.right.replay()
            if not check_iso(a, b, seg.iso):
                raise CertificateError(f"segment {k + 1}: the stated bijection is not an isomorphism")

    def is_valid(self) -> bool:
        try:
            self.verify()
        except CertificateError:
            return False
        return True

    def then(self, other: "MoveCertificate") -> "MoveCertificate":
        if self.end.digest != other.start.digest:
            raise CertificateError("certificates do not meet")
        return MoveCertificate(self.segments + other.segments)

    def reversed(self) -> "MoveCertificate":
        segs = []
        for s in reversed(self.segments):
            inv = {v: k for k, v in s.iso.items()}
            segs.append(Segment(s.right, s.left, inv))
        return MoveCertificate(segs)


def check_iso(a: Graph, b: Graph, iso: Mapping[str, str]) -> bool:
    if len(a) != len(b) or set(iso) != set(a.vertices) or set(iso.values()) != set(b.vertices):
        return False
    for u in a.vertices:
        for v in a.vertices:
            if a.mult(u, v) != b.mult(iso[u], iso[v]):
                return False
    return True


def identity_iso(g: Graph) -> dict[str, str]:
    return {v: v for v in g.vertices}


def forward_certificate(start: Graph, moves: Iterable[Move]) -> MoveCertificate:
    """One-sided certificate: the moves lead from ``start`` to the end anchor."""
    seq = MoveSequence.build(start, moves)
    end = seq.end
    return MoveCertificate([Segment(seq, MoveSequence(end), identity_iso(end))])


def trivial_certificate(g: Graph) -> MoveCertificate:
    return MoveCertificate([Segment(MoveSequence(g), MoveSequence(g), identity_iso(g))])


def iso_certificate(a: Graph, b: Graph) -> MoveCertificate:
    iso = find_isomorphism(a, b)
    if iso is None:
        raise CertificateError("graphs are not isomorphic")
    return MoveCertificate([Segment(MoveSequence(a), MoveSequence(b), iso)])


def chain(certs: Sequence[MoveCertificate]) -> MoveCertificate:
    out = certs[0]
    for c in certs[1:]:
        out = out.then(c)
    return out


def compact(cert: MoveCertificate) -> MoveCertificate:
    """Merge consecutive one-sided segments with identity bijections."""
    segs: list[Segment] = []
    for s in cert.segments:
        if (segs and not segs[-1].right.moves and segs[-1].iso == identity_iso(segs[-1].right.start)
                and segs[-1].left.end.digest == s.left.start.digest
                and segs[-1].left.end.vertices == s.left.start.vertices):
            prev = segs[-1]
            merged = MoveSequence(prev.left.start, list(prev.left.moves) + list(s.left.moves),
                                  list(prev.left.hashes) + list(s.left.hashes))
            segs[-1] = Segment(merged, s.right, s.iso)
        else:
            segs.append(s)
    return MoveCertificate(segs)


# ---------------------------------------------------------------------------
# Expansion of derived moves into primitive moves
# ---------------------------------------------------------------------------

def _one_step_col(g: Graph, u: str, v: str) -> tuple[list[Move], Graph]:
    """Column ``u`` into column ``v`` along the edge ``u -> v``: outsplit then collapse."""
    rest = g.out(u)
    k = rest[v]
    rest[v] = k if k is INF else k - 1
    o = Move.O(u, [rest, {v: 1}])
    g1 = apply_move(g, o)
    child = split_labels(g, u, 2)[1]
    c = Move.COL(child)
    return [o, c], apply_move(g1, c)


def _one_step_row(g: Graph, u: str, v: str) -> tuple[list[Move], Graph]:
    """Row ``u`` into row ``v`` along the edge ``v -> u``: insplit then collapse."""
    rest = g.inn(u)
    k = rest[v]
    rest[v] = k if k is INF else k - 1
    i = Move.I(u, [rest, {v: 1}])
    g1 = apply_move(g, i)
    child = split_labels(g, u, 2)[1]
    c = Move.COL(child)
    return [i, c], apply_move(g1, c)


def _additions_left_right(op: str, path: Sequence[str]) -> tuple[list[str], list[str]]:
    """Order of one-step additions on each side (see the module docstring of
    :func:`expand_derived_move`)."""
    n = len(path) - 1
    if op == "col+":
        left = [path[i] for i in range(n - 1, -1, -1)]
        right = [path[i] for i in range(n - 1, 0, -1)]
    else:
        left = [path[i] for i in range(1, n + 1)]
        right = [path[i] for i in range(1, n)]
    return left, right


def _run_one_steps(g: Graph, op: str, sources: Sequence[str], target: str) -> MoveSequence:
    seq = MoveSequence(g)
    cur = g
    for s in sources:
        moves, _ = (_one_step_col if op == "col+" else _one_step_row)(cur, s, target)
        for m in moves:
            cur = seq.append(m)
    return seq


def expand_derived_move(g: Graph, move: Move) -> MoveCertificate:
    """Primitive moves realizing a ``MAT`` move.

    A column addition along ``u_0 -> ... -> u_n`` is carried out as one-step
    additions of columns ``u_{n-1}, ..., u_0`` into ``u_n`` (each an outsplit
    followed by a collapse). The extra columns ``u_1, ..., u_{n-1}`` are then
    removed by running their one-step additions from the target graph, so the
    certificate has one segment whose two sides meet in the middle. Rows are
    handled the same way with insplits. Subtractions swap the two sides of the
    addition that undoes them.
    """
    if move.kind != "MAT":
        raise ValueError("only MAT moves expand")
    target = apply_move(g, move)
    op = move.op
    if op in ("col-", "row-"):
        undo = Move.MAT("col+" if op == "col-" else "row+", move.vertex, move.target, move.path)
        cert = expand_derived_move(target, undo)
        return cert.reversed()
    head = move.target
    left_src, right_src = _additions_left_right(op, move.path)
    left = _run_one_steps(g, op, left_src, head)
    right = _run_one_steps(target, op, right_src, head)
    if left.end.digest != right.end.digest:
        raise IllegalDerivedMove("expansion sides do not meet", move.vertex)
    cert = MoveCertificate([Segment(left, right, identity_iso(left.end))])
    return cert


def expand_certificate(cert: MoveCertificate) -> MoveCertificate:
    """Replace every ``MAT`` move by primitive moves (adds anchors as needed)."""
    out: list[MoveCertificate] = []
    for seg in cert.segments:
        left_chain = _expand_sequence(seg.left)
        right_chain = _expand_sequence(seg.right)
        a_end, b_end = left_chain.end, right_chain.end
        mid = MoveCertificate([Segment(MoveSequence(a_end), MoveSequence(b_end), seg.iso)])
        out.append(left_chain.then(mid).then(right_chain.reversed()))
    return compact(chain(out))


def _expand_sequence(seq: MoveSequence) -> MoveCertificate:
    parts: list[MoveCertificate] = []
    pending: list[Move] = []
    cur = seq.start
    anchor = cur
    for m in seq.moves:
        if m.kind == "MAT":
            if pending:
                parts.append(forward_certificate(anchor, pending))
                pending = []
            parts.append(expand_derived_move(cur, m))
            cur = apply_move(cur, m)
            anchor = cur
        else:
            pending.append(m)
            cur = apply_move(cur, m)
    if pending or not parts:
        parts.append(forward_certificate(anchor, pending))
    return chain(parts)


__all__ = [
    "Move", "parse_move", "apply_move", "IllegalDerivedMove", "derived_matrix_move", "find_witness_path",
    "mat_move", "MoveSequence", "Segment", "MoveCertificate", "CertificateError", "check_iso", "identity_iso",
    "forward_certificate", "trivial_certificate", "iso_certificate", "chain", "compact", "expand_derived_move",
    "expand_certificate", "split_labels", "splice_labels", "expand_label", "MAT_OPS", "DERIVED_KINDS",
]
