"""Canonical form: five machine-checked properties and the moves reaching them.

1. every vertex is regular with a loop, or singular emitting infinitely many
   edges to every vertex it reaches;
2. a regular vertex reaching a vertex reaches it through regular vertices;
3. every block carrying a cycle has at least three regular vertices;
4. ``B_bullet`` is strictly positive on all comparable blocks (diagonal
   entries included, so every regular vertex has two loops);
5. every nonempty diagonal block has at least two 1's in its Smith form.

``canonicalize`` repairs the first failing property, rechecks everything and
repeats. Each repair keeps the earlier properties, so the loop ends.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ConditionKViolated
from ..graph import INF, BlockStructure, Graph, PreconditionViolated, ideal_poset, shape_violation
from ..intmat import smith_normal_form
from ..moves import Move, MoveSequence, mat_move, split_labels
from ..shape import normalize_shape, require_condition_k, shortest_path
from ..trail import _fix_regular_path, _regular_reach, _Runner

PROPERTIES = ("shape", "regular paths", "cycle sizes", "positivity", "smith ones")
MAX_ROUNDS = 10000


@dataclass
class CanonicalFormReport:
    graph: Graph
    moves: MoveSequence
    checklist: dict[str, bool]

    @property
    def ok(self) -> bool:
        return all(self.checklist.values())

    def text(self) -> str:
        lines = [f"({k + 1}) {name}: {'yes' if self.checklist[name] else 'NO'}" for k, name in enumerate(PROPERTIES)]
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# Property checks; each returns a witness of failure or None
# ---------------------------------------------------------------------------

def _b(g: Graph, x: str, y: str):
    k = g.mult(x, y)
    if k is INF:
        return INF
    return k - (x == y)


def regular_path_violation(g: Graph) -> tuple[str, str] | None:
    for v in g.regular_vertices():
        reach = _regular_reach(g, v)
        for w in g.reachable(v):
            if w not in reach:
                return v, w
    return None


def _cyclic(g: Graph, st: BlockStructure, i: int) -> bool:
    blk = st.blocks[i]
    return len(blk) > 1 or g.mult(blk[0], blk[0]) != 0


def cycle_size_violation(g: Graph, st: BlockStructure) -> int | None:
    for i in range(st.N):
        if _cyclic(g, st, i) and st.m[i] < 3:
            return i
    return None


def positivity_violation(g: Graph, st: BlockStructure) -> tuple[str, str] | None:
    P, bof = st.poset, st.block_of
    for x in st.row_order:
        for y in st.col_order:
            if P.leq(bof[x], bof[y]) and _b(g, x, y) <= 0:
                return x, y
    return None


def smith_violation(g: Graph, st: BlockStructure) -> int | None:
    bm = st.bullet(g)
    for i in range(st.N):
        blk = bm.block(i, i)
        if blk.rows and blk.cols:
            ones = sum(1 for d in smith_normal_form(blk).divisors if d == 1)
            if ones < 2:
                return i
    return None


def checklist(g: Graph) -> dict[str, bool]:
    """The five properties, each ``True`` or ``False``."""
    out = dict.fromkeys(PROPERTIES, False)
    out["shape"] = shape_violation(g) is None
    if not out["shape"]:
        return out
    st = ideal_poset(g, check_condition_k=False)
    out["regular paths"] = regular_path_violation(g) is None
    out["cycle sizes"] = cycle_size_violation(g, st) is None
    out["positivity"] = positivity_violation(g, st) is None
    out["smith ones"] = smith_violation(g, st) is None
    return out


# ---------------------------------------------------------------------------
# Repairs
# ---------------------------------------------------------------------------

def positivity_step(g: Graph, st: BlockStructure) -> tuple[str, str] | None:
    """A column addition ``(frm, into)`` raising a nonpositive comparable entry.

    For a zero at ``(x, y)`` the column of the next vertex ``z`` on a shortest
    path ``x -> y`` is added into column ``y``, raising ``B(x, y)`` by
    ``B(x, z) > 0``; for a zero diagonal entry a neighbour inside the block is
    used. Entries never decrease.
    """
    bad = positivity_violation(g, st)
    if bad is None:
        return None
    x, y = bad
    if x != y:
        return shortest_path(g, x, y)[1], y
    blk = set(st.blocks[st.block_of[x]])
    z = next((z for z in g.out(x) if z != x and z in blk), None)
    if z is None:
        raise PreconditionViolated("vertex has one loop and no other edge in its block", x)
    return z, x


def _fix_cycle_size(run: _Runner, st: BlockStructure, i: int) -> None:
    g = run.g
    blk = st.blocks[i]
    regular = [v for v in blk if g.is_regular(v)]
    for u in regular:
        L = g.loops(u)
        if L >= 2:
            rest = g.out(u)
            rest[u] = L - 1
            run.do(Move.O(u, [rest, {u: 1}]))
            return
    if regular:
        u = regular[0]
        w = next(w for w in g.out(u) if w != u and w in blk)
        run.mat("col+", w, u)
        return
    v = blk[0]
    rest = g.out(v)
    run.do(Move.O(v, [rest, {v: 2}]))


def grow_split(run: _Runner, v: str) -> str:
    """Outsplit a regular ``v`` keeping all five properties; returns the new label.

    First ``v`` gets at least four loops and two edges to every other vertex
    it reaches (column additions), then its edges are split as
    ``{v: 2} + {y: 1 for each other y}`` and the rest. Row ``v`` becomes
    ``1`` on the diagonal, ``2`` at the new vertex and ``1`` elsewhere.
    """
    g = run.g
    blk = set(g.scc_of(v))
    while g.loops(v) < 4:
        z = next(z for z in g.out(v) if z != v and z in blk)
        g = run.mat("col+", z, v)
    for y in list(g.out(v)):
        if y != v and g.mult(v, y) < 2:
            g = run.mat("col+", v, y)
    out = g.out(v)
    first = {v: 2}
    first.update({y: 1 for y in out if y != v})
    rest = {y: k - first[y] for y, k in out.items() if k - first[y] > 0}
    child = split_labels(g, v, 2)[1]
    run.do(Move.O(v, [first, rest]))
    return child


def _fix_smith(run: _Runner, st: BlockStructure, i: int) -> None:
    v = next(v for v in st.blocks[i] if run.g.is_regular(v))
    grow_split(run, v)


def _repair(run: _Runner) -> bool:
    """One repair step; ``False`` when all five properties hold."""
    g = run.g
    if shape_violation(g) is not None:
        _, moves = normalize_shape(g, check_condition_k=False)
        for m in moves:
            run.do(m)
        return True
    bad = regular_path_violation(g)
    if bad is not None:
        _fix_regular_path(run, *bad)
        return True
    st = ideal_poset(g, check_condition_k=False)
    i = cycle_size_violation(g, st)
    if i is not None:
        _fix_cycle_size(run, st, i)
        return True
    step = positivity_step(g, st)
    if step is not None:
        run.mat("col+", *step)
        return True
    i = smith_violation(g, st)
    if i is not None:
        _fix_smith(run, st, i)
        return True
    return False


def canonicalize(g: Graph) -> CanonicalFormReport:
    """Canonical form of a Condition (K) graph with the full move log."""
    require_condition_k(g)
    run = _Runner(g)
    for _ in range(MAX_ROUNDS):
        if not _repair(run):
            break
    else:
        raise ConditionKViolated("canonical form did not converge")
    seq = MoveSequence.build(g, run.moves)
    return CanonicalFormReport(seq.end, seq, checklist(seq.end))


def fix_positivity(run: _Runner, on_step=None) -> None:
    """Column additions until property (4) holds; ``on_step(frm, into)`` sees each."""
    while True:
        st = ideal_poset(run.g, check_condition_k=False)
        step = positivity_step(run.g, st)
        if step is None:
            return
        run.mat("col+", *step)
        if on_step is not None:
            on_step(*step)


__all__ = ["canonicalize", "checklist", "CanonicalFormReport", "PROPERTIES", "positivity_step", "grow_split",
           "fix_positivity", "regular_path_violation", "cycle_size_violation", "positivity_violation",
           "smith_violation"]
