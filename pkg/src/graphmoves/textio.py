"""Line-oriented text formats for graphs, integer matrices and certificates.

Graph file::

    graph <name>
    vertices <N>
    edge <u> <v> <k|inf>

Vertices are ``1..N``; ``#`` starts a comment. Certificate file::

    certificate <name1> <name2>
    start <digest of the first graph>
    end <digest of the second graph>
    segment
    left
    <move>
    hash <digest after the move>
    right
    ...
    iso <a>=<b> ...

A certificate with several segments lists each intermediate anchor graph
after its segment with ``anchor``, ``labels ...``, labeled ``edge`` lines and
``done``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from .graph import Graph, GraphError, build_graph, format_mult, parse_mult
from .intmat import IntMatrix
from .moves import MoveCertificate, MoveSequence, Segment, parse_move


class ParseError(ValueError):
    """Malformed input; ``line`` is 1-based or 0 when the whole file is at fault."""

    def __init__(self, line: int, message: str):
        self.line = line
        self.message = message
        super().__init__(f"line {line}: {message}" if line else message)


def _lines(text: str) -> Iterator[tuple[int, list[str]]]:
    for no, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].strip()
        if body:
            yield no, body.split()


# ---------------------------------------------------------------------------
# Graphs
# ---------------------------------------------------------------------------

@dataclass
class GraphFile:
    name: str
    graph: Graph

    @classmethod
    def parse(cls, text: str) -> "GraphFile":
        name = None
        count = None
        edges = []
        for no, tok in _lines(text):
            head = tok[0]
            if head == "graph":
                if name is not None:
                    raise ParseError(no, "second 'graph' line")
                if len(tok) != 2:
                    raise ParseError(no, "expected 'graph <name>'")
                name = tok[1]
            elif head == "vertices":
                if name is None:
                    raise ParseError(no, "'vertices' before 'graph'")
                if count is not None:
                    raise ParseError(no, "second 'vertices' line")
                if len(tok) != 2 or not tok[1].isdigit() or int(tok[1]) < 1:
                    raise ParseError(no, "expected 'vertices <N>' with N >= 1")
                count = int(tok[1])
            elif head == "edge":
                if count is None:
                    raise ParseError(no, "'edge' before 'vertices'")
                if len(tok) != 4:
                    raise ParseError(no, "expected 'edge <u> <v> <k|inf>'")
                try:
                    u, v = int(tok[1]), int(tok[2])
                except ValueError:
                    raise ParseError(no, f"bad vertex in {' '.join(tok)!r}") from None
                if not (1 <= u <= count and 1 <= v <= count):
                    raise ParseError(no, f"vertex out of range 1..{count}")
                try:
                    k = parse_mult(tok[3])
                except ValueError as exc:
                    raise ParseError(no, str(exc)) from None
                edges.append((u, v, k))
            else:
                raise ParseError(no, f"unknown directive {head!r}")
        if name is None:
            raise ParseError(0, "missing 'graph' line")
        if count is None:
            raise ParseError(0, "missing 'vertices' line")
        try:
            return cls(name, build_graph(count, edges))
        except GraphError as exc:
            raise ParseError(0, str(exc)) from None

    def serialize(self) -> str:
        g = self.graph
        pos = {v: k + 1 for k, v in enumerate(g.vertices)}
        lines = [f"graph {self.name}", f"vertices {len(g)}"]
        for u in g.vertices:
            for v in g.vertices:
                k = g.mult(u, v)
                if k != 0:
                    lines.append(f"edge {pos[u]} {pos[v]} {format_mult(k)}")
        return "\n".join(lines) + "\n"


def parse_graph(text: str) -> Graph:
    return GraphFile.parse(text).graph


def serialize_graph(g: Graph, name: str = "g") -> str:
    return GraphFile(name, g).serialize()


# ---------------------------------------------------------------------------
# Matrices
# ---------------------------------------------------------------------------

def parse_matrix(text: str) -> IntMatrix:
    """Whitespace-separated integer rows."""
    rows = []
    for no, tok in _lines(text):
        try:
            rows.append([int(x) for x in tok])
        except ValueError:
            raise ParseError(no, "expected integers") from None
        if len(rows[-1]) != len(rows[0]):
            raise ParseError(no, f"row has {len(rows[-1])} entries, expected {len(rows[0])}")
    if not rows:
        raise ParseError(0, "empty matrix")
    return IntMatrix(rows)


def serialize_matrix(m: IntMatrix) -> str:
    return "".join(" ".join(str(x) for x in r) + "\n" for r in m.data)


# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------

def _anchor_lines(g: Graph) -> list[str]:
    out = ["anchor", "labels " + " ".join(g.vertices)]
    for u in g.vertices:
        for v in g.vertices:
            k = g.mult(u, v)
            if k != 0:
                out.append(f"edge {u} {v} {format_mult(k)}")
    out.append("done")
    return out


def serialize_certificate(cert: MoveCertificate, name1: str = "g1", name2: str = "g2") -> str:
    lines = [f"certificate {name1} {name2}", f"start {cert.start.digest}", f"end {cert.end.digest}"]
    for k, seg in enumerate(cert.segments):
        lines.append("segment")
        for side, seq in (("left", seg.left), ("right", seg.right)):
            lines.append(side)
            for m, h in zip(seq.moves, seq.hashes):
                lines.append(m.to_line())
                lines.append(f"hash {h}")
        lines.append("iso " + " ".join(f"{a}={b}" for a, b in seg.iso.items()))
        if k + 1 < len(cert.segments):
            lines += _anchor_lines(seg.right.start)
    return "\n".join(lines) + "\n"


@dataclass
class _RawSegment:
    left: list = None
    right: list = None
    iso: dict = None
    anchor: Graph | None = None


def parse_certificate(text: str, g1: Graph, g2: Graph) -> MoveCertificate:
    """Rebuild a certificate between ``g1`` and ``g2``; digests are checked on replay.

    Raises :class:`ParseError` on malformed text or when the stated endpoint
    digests differ from those of ``g1`` and ``g2``.
    """
    lines = list(_raw_lines(text))
    if not lines or not lines[0][1].startswith("certificate "):
        raise ParseError(lines[0][0] if lines else 0, "expected 'certificate <name1> <name2>'")
    it = iter(lines[1:])
    segs: list[_RawSegment] = []
    side = None
    start = end = None
    anchor_labels: list[str] | None = None
    anchor_edges: list = []
    in_anchor = False
    for no, body in it:
        head, _, rest = body.partition(" ")
        if in_anchor:
            if head == "labels":
                anchor_labels = rest.split()
            elif head == "edge":
                tok = rest.split()
                if len(tok) != 3:
                    raise ParseError(no, "expected 'edge <u> <v> <k>'")
                try:
                    anchor_edges.append((tok[0], tok[1], parse_mult(tok[2])))
                except ValueError as exc:
                    raise ParseError(no, str(exc)) from None
            elif head == "done":
                if anchor_labels is None:
                    raise ParseError(no, "anchor without labels")
                adj = {v: {} for v in anchor_labels}
                for u, v, k in anchor_edges:
                    adj.setdefault(u, {})[v] = k
                try:
                    segs[-1].anchor = Graph(anchor_labels, adj)
                except GraphError as exc:
                    raise ParseError(no, str(exc)) from None
                in_anchor, anchor_labels, anchor_edges = False, None, []
            else:
                raise ParseError(no, f"unexpected {head!r} inside an anchor")
            continue
        if head == "start":
            start = rest.strip()
        elif head == "end":
            end = rest.strip()
        elif head == "segment":
            segs.append(_RawSegment([], [], None))
            side = None
        elif head in ("left", "right") and not rest:
            if not segs:
                raise ParseError(no, f"'{head}' outside a segment")
            side = head
        elif head == "hash":
            cur = _current(segs, side, no)
            if not cur or cur[-1][1] is not None:
                raise ParseError(no, "'hash' without a preceding move")
            cur[-1] = (cur[-1][0], rest.strip())
        elif head == "iso":
            if not segs:
                raise ParseError(no, "'iso' outside a segment")
            iso = {}
            for tok in rest.split():
                a, eq, b = tok.partition("=")
                if not eq:
                    raise ParseError(no, f"bad iso entry {tok!r}")
                iso[a] = b
            segs[-1].iso = iso
            side = None
        elif head == "anchor" and not rest:
            if not segs:
                raise ParseError(no, "'anchor' outside a segment")
            in_anchor = True
        else:
            cur = _current(segs, side, no)
            if cur and cur[-1][1] is None:
                raise ParseError(no, "move without a 'hash' line")
            try:
                cur.append((parse_move(body), None))
            except ValueError as exc:
                raise ParseError(no, str(exc)) from None
    if start is not None and start != g1.digest:
        raise ParseError(0, "the certificate starts at a different graph")
    if end is not None and end != g2.digest:
        raise ParseError(0, "the certificate ends at a different graph")
    if not segs:
        raise ParseError(0, "no segments")
    out = []
    prev = g1
    for k, raw in enumerate(segs):
        if raw.iso is None:
            raise ParseError(0, f"segment {k + 1} has no 'iso' line")
        nxt = g2 if k + 1 == len(segs) else raw.anchor
        if nxt is None:
            raise ParseError(0, f"segment {k + 1} needs an anchor graph")
        for name, items in (("left", raw.left), ("right", raw.right)):
            if items and items[-1][1] is None:
                raise ParseError(0, f"segment {k + 1} {name}: last move has no hash")
        left = MoveSequence(prev, [m for m, _ in raw.left], [h for _, h in raw.left])
        right = MoveSequence(nxt, [m for m, _ in raw.right], [h for _, h in raw.right])
        out.append(Segment(left, right, raw.iso))
        prev = nxt
    return MoveCertificate(out)


def _current(segs, side, no):
    if not segs or side is None:
        raise ParseError(no, "move outside a 'left' or 'right' section")
    return segs[-1].left if side == "left" else segs[-1].right


def _raw_lines(text: str) -> Iterator[tuple[int, str]]:
    for no, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].strip()
        if body:
            yield no, body


__all__ = ["GraphFile", "ParseError", "parse_graph", "serialize_graph", "parse_matrix", "serialize_matrix",
           "serialize_certificate", "parse_certificate"]
