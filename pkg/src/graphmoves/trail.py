"""A move certificate from ``E`` to ``E`` Cuntz spliced twice at a vertex.

The construction first normalizes the graph around the splice vertex so that
it is regular and carries two loops, doing the same moves on the spliced
graph. It then runs two matrix trails, one from the spliced graph and one
from the normalized graph, which meet up to relabeling.
"""

from __future__ import annotations

from collections import deque

from .graph import INF, Graph, PreconditionViolated, find_isomorphism
from .moves import (Move, MoveCertificate, MoveSequence, Segment, _one_step_col, apply_move, identity_iso,
                    mat_move, split_labels, splice_labels)


def splice_twice(g: Graph, v: str, unchecked: bool = False) -> Graph:
    """``E_{v,--}``: splice at ``v`` and then at the first new vertex."""
    u1, _ = splice_labels(g, v)
    once = apply_move(g, Move.C(v, unchecked))
    return apply_move(once, Move.C(u1, unchecked))


class _Runner:
    """Applies moves to a graph and records them."""

    def __init__(self, g: Graph):
        self.g = g
        self.moves: list[Move] = []

    def do(self, m: Move) -> Graph:
        self.g = apply_move(self.g, m)
        self.moves.append(m)
        return self.g

    def mat(self, op: str, frm: str, into: str) -> Graph:
        return self.do(mat_move(self.g, op, frm, into))

    def col_one_step(self, z: str, r: str) -> Graph:
        moves, _ = _one_step_col(self.g, z, r)
        for m in moves:
            self.do(m)
        return self.g


def _shortest_path(g: Graph, a: str, b: str, allowed=None) -> list[str] | None:
    """Shortest path of positive length from ``a`` to ``b``."""
    prev: dict[str, str | None] = {}
    queue = deque()
    for y in g.out(a):
        if y not in prev and (allowed is None or y in allowed):
            prev[y] = a
            queue.append(y)
    while queue:
        x = queue.popleft()
        if x == b:
            break
        for y in g.out(x):
            if y not in prev and (allowed is None or y in allowed):
                prev[y] = x
                queue.append(y)
    if b not in prev:
        return None
    path = [b]
    while True:
        p = prev[path[-1]]
        path.append(p)
        if p == a and len(path) > 1:
            break
    path.reverse()
    return path


def _regular_reach(g: Graph, a: str) -> set[str]:
    """Vertices reachable from ``a`` along paths whose later sources are regular."""
    seen: set[str] = set()
    queue = deque(g.out(a))
    seen.update(queue)
    while queue:
        x = queue.popleft()
        if not g.is_regular(x):
            continue
        for y in g.out(x):
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return seen


def _fix_regular_path(run: _Runner, a: str, b: str) -> bool:
    """One step towards a path ``a -> b`` through regular vertices; False if none was needed."""
    g = run.g
    if b in _regular_reach(g, a):
        return False
    path = _shortest_path(g, a, b)
    if path is None:
        raise PreconditionViolated(f"no path from {a} to {b}", a)
    for i in range(1, len(path) - 1):
        if not g.is_regular(path[i]):
            run.col_one_step(path[i], path[i + 1])
            return True
    raise AssertionError("a shortest path through regular vertices was missed")


def _setup(g: Graph, u: str) -> tuple[list[Move], str, tuple[Move, str] | None]:
    """Moves normalizing ``g`` around ``u``.

    Returns the moves, the label of the resulting splice vertex, and, when the
    last move is an outsplit at an infinite emitter ``u``, the outsplit to use
    on the spliced graph instead of it together with the label of the
    outsplit's second vertex.
    """
    run = _Runner(g)
    gadget, _ = splice_labels(g, u)

    def scc() -> list[str]:
        return [w for w in run.g.scc_of(u) if w != u]

    changed = True
    while changed:
        changed = False
        for w in scc():
            if run.g.is_regular(w) and not run.g.has_loop(w):
                run.do(Move.COL(w))
                changed = True
                break
        if changed:
            continue
        for w in scc():
            if run.g.is_infinite_emitter(w) and not run.g.has_loop(w):
                comp = set(run.g.scc_of(u))
                for z, k in run.g.out(w).items():
                    if k is INF and z in comp:
                        back = _shortest_path(run.g, z, w, comp) if z != w else [w]
                        run.do(Move.T([w] + back))
                        break
                else:
                    inside = {z: k for z, k in run.g.out(w).items() if z in comp}
                    outside = {z: k for z, k in run.g.out(w).items() if z not in comp}
                    run.do(Move.O(w, [inside, outside]))
                changed = True
                break
        if changed:
            continue
        for w in scc():
            if _fix_regular_path(run, u, w) or _fix_regular_path(run, w, u):
                changed = True
                break

    g = run.g
    comp = set(g.scc_of(u))
    if g.is_infinite_emitter(u) and any(k is INF and w in comp for w, k in g.out(u).items()):
        w0 = next(w for w, k in g.out(u).items() if k is INF and w in comp)
        for w in [u] + scc():
            if g.mult(u, w) is not INF:
                tail = [w0] if w == w0 else _shortest_path(g, w0, w, comp)
                g = run.do(Move.T([u] + tail))
        first = {u: 2}
        first.update({w: 1 for w in scc()})
        rest = {w: k for w, k in g.out(u).items()}
        for w, k in first.items():
            rest[w] = rest[w] if rest[w] is INF else rest[w] - k
        run.do(Move.O(u, [first, rest]))
        child = split_labels(g, u, 2)[1]
        spliced = Move.O(u, [{**first, gadget: 1}, rest])
        return run.moves, u, (spliced, child)

    loops = g.loops(u)
    while loops is not INF and loops < 2:
        w = next((w for w in scc() if g.mult(u, w) != 0), None)
        if w is None:
            raise PreconditionViolated("vertex does not support two return paths", u)
        g = run.mat("col+", w, u)
        loops = g.loops(u)

    if g.is_regular(u):
        return run.moves, u, None

    first = {w: k for w, k in g.out(u).items() if w in comp}
    rest = {w: k for w, k in g.out(u).items() if w not in comp}
    run.do(Move.O(u, [first, rest]))
    child = split_labels(g, u, 2)[1]
    return run.moves, u, (Move.O(u, [{**first, gadget: 1}, rest]), child)


def trail_moves(g: Graph, v: str) -> tuple[MoveSequence, MoveSequence]:
    """The two trails for a regular ``v`` with at least two loops.

    Returns ``(from_E, from_spliced)``; their end graphs are isomorphic.
    """
    u1, u2 = splice_labels(g, v)
    once = apply_move(g, Move.C(v))
    w1, w2 = splice_labels(once, u1)
    spl = apply_move(once, Move.C(u1))

    # vertices n, n+1, ..., n+4 of the spliced matrix are v, u2, u1, w1, w2
    left = _Runner(spl)
    left.mat("row+", w1, u1)
    left.mat("col-", w1, w2)
    left.do(Move.COL(w2))
    left.mat("row-", u2, u1)
    left.mat("row+", w1, v)
    left.mat("row-", u2, v)
    left.mat("row-", u2, v)
    left.mat("row+", u1, w1)
    left.mat("col-", u1, u2)
    left.do(Move.COL(u2))

    # insplit v with one loop on its own, then put a vertex on the edge v -> v.2
    right = _Runner(g)
    inn = g.inn(v)
    inn[v] = inn[v] if inn[v] is INF else inn[v] - 1
    right.do(Move.I(v, [inn, {v: 1}]))
    v2 = split_labels(g, v, 2)[1]
    mid = right.g.fresh_label(f"{v}>{v2}")
    right.do(Move.EXP(v, v2))
    # vertices n, n+1, n+2 are v, mid, v2
    right.mat("col+", v2, mid)
    right.mat("col+", v2, mid)
    right.mat("row+", mid, v2)
    right.mat("row-", v, v2)
    right.mat("col+", mid, v)
    right.mat("col+", v2, mid)
    return MoveSequence.build(g, right.moves), MoveSequence.build(spl, left.moves)


def cuntz_splice_twice_trail(g: Graph, v: str) -> MoveCertificate:
    """Certificate from ``g`` to ``g`` spliced twice at ``v``.

    Raises :class:`PreconditionViolated` if ``v`` lacks two return paths.
    """
    if v not in g:
        raise PreconditionViolated("unknown vertex", v)
    if g.return_path_class(v) < 2:
        raise PreconditionViolated("vertex does not support two return paths", v)
    target = splice_twice(g, v, unchecked=True)

    norm, w, special = _setup(g, v)
    f = MoveSequence.build(g, norm).end
    segments: list[Segment] = []
    if norm:
        segments.append(Segment(MoveSequence.build(g, norm), MoveSequence(f), identity_iso(f)))

    from_f, from_fspl = trail_moves(f, w)
    a, b = from_f.end, from_fspl.end
    iso = find_isomorphism(a, b)
    if iso is None:
        raise PreconditionViolated("the two trails do not meet", w)
    segments.append(Segment(from_f, from_fspl, iso))
    fspl = from_fspl.start

    if special is None:
        mirrored = MoveSequence.build(target, norm)
        fix = MoveSequence(fspl)
    else:
        spliced_split, child = special
        mirrored = MoveSequence.build(target, norm[:-1] + [spliced_split])
        _, u2 = splice_labels(f, w)
        fix = MoveSequence.build(fspl, [mat_move(fspl, "col+", u2, child)])
    if fix.moves or mirrored.moves or fix.end.digest != mirrored.end.digest:
        iso = find_isomorphism(fix.end, mirrored.end)
        if iso is None:
            raise PreconditionViolated("normalization does not commute with the splice", v)
        segments.append(Segment(fix, mirrored, iso))
    else:
        last = segments[-1]
        segments[-1] = Segment(last.left, MoveSequence(target, list(last.right.moves), list(last.right.hashes)), last.iso)
    return MoveCertificate(segments)


__all__ = ["cuntz_splice_twice_trail", "splice_twice", "trail_moves"]
