"""Turning a GL_P-equivalence into an SL_P-equivalence by graph surgery.

A diagonal block of ``U`` with determinant -1 is fixed by expanding both
graphs at two regular vertices of the block: each is outsplit with one loop
moved to a new vertex and the new row is added back. The new ``B_bullet`` is
column equivalent to the old one extended by a 2x2 identity, and pairing the
two identity blocks crosswise flips the determinant.

A diagonal block of ``V`` with determinant -1 is fixed by a Cuntz splice in
the first graph against an expansion of the second: the spliced matrix is
equivalent to the old one extended by the identity through a pair whose
column part has determinant -1.

All matrices are label indexed and every intermediate equation is checked.
Column additions restoring positivity follow, with ``V`` updated alongside.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import HypothesisViolated, NotAnEquivalence
from ..graph import Graph, ideal_poset
from ..intmat import IntMatrix
from ..moves import Move, MoveSequence, split_labels, splice_labels
from ..shape import normalize_shape
from ..trail import _Runner
from .canonical import fix_positivity
from .standard import Alignment, LabeledEquivalence


@dataclass
class SLResult:
    G1: Graph
    G2: Graph
    equivalence: LabeledEquivalence
    moves1: MoveSequence
    moves2: MoveSequence

    def __iter__(self):
        eq = self.equivalence
        return iter((self.G1, self.G2, eq.U, eq.V, self.moves1, self.moves2))


# ---------------------------------------------------------------------------
# Label-indexed matrix helpers
# ---------------------------------------------------------------------------

def _eye(labels) -> dict:
    return {(a, a): 1 for a in labels}


def _matrix(entries: dict, rows, cols) -> IntMatrix:
    return IntMatrix([[entries.get((a, b), 0) for b in cols] for a in rows], len(rows), len(cols))


def _extended(g: Graph, rows, cols, new) -> IntMatrix:
    """``B_bullet`` on the old labels extended by an identity on the ``new`` ones."""
    old_r = [r for r in rows if r not in new]
    old_c = [c for c in cols if c not in new]
    B = g.b_bullet(old_r, old_c)
    ri = {v: k for k, v in enumerate(old_r)}
    ci = {v: k for k, v in enumerate(old_c)}
    out = IntMatrix.zeros(len(rows), len(cols))
    for a, x in enumerate(rows):
        for b, y in enumerate(cols):
            if x in ri and y in ci:
                out.data[a][b] = B.data[ri[x]][ci[y]]
            elif x == y:
                out.data[a][b] = 1
    return out


def _swap(cols, a: str, b: str) -> IntMatrix:
    e = _eye(cols)
    del e[(a, a)], e[(b, b)]
    e[(a, b)] = e[(b, a)] = 1
    return _matrix(e, cols, cols)


def _elementary(labels, frm: str, into: str, sign: int) -> IntMatrix:
    """On the right: column ``frm`` added ``sign`` times into column ``into``.
    On the left (rows): row ``into`` gets ``sign`` times row ``frm``."""
    e = _eye(labels)
    e[(frm, into)] = sign
    return _matrix(e, labels, labels)


def _transpose_elementary(labels, frm: str, into: str, sign: int) -> IntMatrix:
    e = _eye(labels)
    e[(into, frm)] = sign
    return _matrix(e, labels, labels)


# ---------------------------------------------------------------------------
# The two local constructions
# ---------------------------------------------------------------------------

def expand(run: _Runner, v: str, w: str) -> tuple[str, str]:
    """Outsplit one loop off ``v`` and ``w`` and add the new rows back."""
    new = []
    for x in (v, w):
        g = run.g
        child = split_labels(g, x, 2)[1]
        rest = g.out(x)
        rest[x] -= 1
        run.do(Move.O(x, [rest, {x: 1}]))
        new.append(child)
    for x, child in zip((v, w), new):
        run.mat("row+", child, x)
    return new[0], new[1]


def expansion_matrix(g: Graph, rows, cols, v: str, w: str, a: str, b: str) -> IntMatrix:
    """``V'`` with ``B_bullet V' = B''`` after :func:`expand` (``a``, ``b`` the new labels)."""
    Vp = _elementary(cols, b, w, -1) @ _elementary(cols, a, v, -1) @ _swap(cols, v, a) @ _swap(cols, w, b)
    if g.b_bullet(rows, cols) @ Vp != _extended(g, rows, cols, {a, b}):
        raise NotAnEquivalence("expansion: column equivalence check failed")
    return Vp


def splice_matrices(g: Graph, rows, cols, v: str, u1: str, u2: str) -> tuple[IntMatrix, IntMatrix, str, str]:
    """``U_-, V_-`` with ``U_- B_bullet V_- = B''`` after a splice at ``v``.

    Row ``v`` loses the row of one splice vertex ``q``; column ``v`` loses
    column ``q`` and the two splice columns are swapped. Returns the matrices
    and ``(p, q)``.
    """
    target = _extended(g, rows, cols, {u1, u2})
    B = g.b_bullet(rows, cols)
    for p, q in ((u1, u2), (u2, u1)):
        Um = _transpose_elementary(rows, q, v, -1)
        Vm = _elementary(cols, q, v, -1) @ _swap(cols, p, q)
        if Um @ B @ Vm == target:
            return Um, Vm, p, q
    raise NotAnEquivalence("splice: equivalence check failed")


def _direct_sum(M: IntMatrix, rows_old, cols_old, rows, cols, extra: dict) -> IntMatrix:
    ri = {v: k for k, v in enumerate(rows_old)}
    ci = {v: k for k, v in enumerate(cols_old)}
    out = IntMatrix.zeros(len(rows), len(cols))
    for a, x in enumerate(rows):
        for b, y in enumerate(cols):
            if x in ri and y in ci:
                out.data[a][b] = M.data[ri[x]][ci[y]]
            else:
                out.data[a][b] = extra.get((x, y), 0)
    return out


# ---------------------------------------------------------------------------
# Determinants per block
# ---------------------------------------------------------------------------

def block_dets(eq: LabeledEquivalence, g1: Graph, g2: Graph, alignment: Alignment) -> list[tuple[int, int]]:
    """``(det U{i}, det V{i})`` for every block in the first graph's numbering."""
    st = ideal_poset(g1, check_condition_k=False)
    r1 = {v: k for k, v in enumerate(eq.rows1)}
    c1 = {v: k for k, v in enumerate(eq.cols1)}
    r2 = {v: k for k, v in enumerate(eq.rows2)}
    c2 = {v: k for k, v in enumerate(eq.cols2)}
    out = []
    for i in range(st.N):
        b1, b2 = alignment.block_pair(g1, g2, i)
        rr1 = [r1[v] for v in b1 if g1.is_regular(v)]
        rr2 = [r2[v] for v in b2 if g2.is_regular(v)]
        cc1 = [c1[v] for v in b1]
        cc2 = [c2[v] for v in b2]
        out.append((eq.U.submatrix(rr2, rr1).det(), eq.V.submatrix(cc1, cc2).det()))
    return out


def _two_regular(g: Graph, blk) -> tuple[str, str]:
    regular = [v for v in blk if g.is_regular(v)]
    if len(regular) < 2:
        raise HypothesisViolated("a block needing a determinant fix has fewer than two regular vertices")
    return regular[0], regular[1]


# ---------------------------------------------------------------------------
# Main entry point
# ---------------------------------------------------------------------------

def gl_to_sl(F1: Graph, F2: Graph, eq: LabeledEquivalence, alignment: Alignment) -> SLResult:
    """Graphs ``G1``, ``G2`` reached by logged moves and an SL_P-equivalence between them."""
    eq.check(F1, F2, "gl_to_sl input")
    run1, run2 = _Runner(F1), _Runner(F2)
    st = ideal_poset(F1, check_condition_k=False)
    for i, (_, dv) in enumerate(block_dets(eq, F1, F2, alignment)):
        if st.n[i] == 1 and dv != 1:
            raise HypothesisViolated(f"V{{{i + 1}}} must be the identity on a one-vertex block")

    for which in ("U", "V"):
        for i in range(st.N):
            du, dv = block_dets(eq, run1.g, run2.g, alignment)[i]
            d = du if which == "U" else dv
            if d == 1:
                continue
            if d != -1:
                raise NotAnEquivalence(f"block {i + 1}: determinant {d} is not a unit")
            b1, b2 = alignment.block_pair(run1.g, run2.g, i)
            if which == "U":
                eq = _fix_u(run1, run2, eq, _two_regular(run1.g, b1), _two_regular(run2.g, b2),
                           alignment, i)
            else:
                eq = _fix_v(run1, run2, eq, _two_regular(run1.g, b1)[0], _two_regular(run2.g, b2), alignment, i)
            eq.check(run1.g, run2.g, f"determinant fix at block {i + 1}")

    eq = _restore_positivity(run1, run2, eq)
    for i, (du, dv) in enumerate(block_dets(eq, run1.g, run2.g, alignment)):
        if du != 1 or dv != 1:
            raise NotAnEquivalence(f"block {i + 1}: determinants ({du}, {dv}) after the fix")
    seq1 = MoveSequence.build(F1, run1.moves)
    seq2 = MoveSequence.build(F2, run2.moves)
    return SLResult(seq1.end, seq2.end, eq, seq1, seq2)


def _pairings(new1: tuple[str, str], new2: tuple[str, str]):
    a1, b1 = new1
    a2, b2 = new2
    return ({a1: a2, b1: b2}, {a1: b2, b1: a2})


def _sum_pair(eq: LabeledEquivalence, rows1, cols1, rows2, cols2, pi: dict) -> tuple[IntMatrix, IntMatrix]:
    """``U`` and ``V`` extended by the bijection ``pi`` of the new vertices."""
    U = _direct_sum(eq.U, eq.rows2, eq.rows1, rows2, rows1, {(y, x): 1 for x, y in pi.items()})
    V = _direct_sum(eq.V, eq.cols1, eq.cols2, cols1, cols2, {(x, y): 1 for x, y in pi.items()})
    return U, V


def _choose(candidates, run1: _Runner, run2: _Runner, alignment: Alignment, i: int) -> LabeledEquivalence:
    """The candidate whose ``U{i}`` has determinant 1 in the aligned orders."""
    for eq in candidates:
        if block_dets(eq, run1.g, run2.g, alignment)[i][0] == 1:
            return eq
    raise NotAnEquivalence(f"block {i + 1}: no pairing of the new vertices fixes det U")


def _fix_u(run1: _Runner, run2: _Runner, eq: LabeledEquivalence, vw1, vw2, alignment: Alignment,
           i: int) -> LabeledEquivalence:
    new1 = expand(run1, *vw1)
    new2 = expand(run2, *vw2)
    rows1, cols1 = eq.rows1 + new1, eq.cols1 + new1
    rows2, cols2 = eq.rows2 + new2, eq.cols2 + new2
    V1p = expansion_matrix(run1.g, rows1, cols1, *vw1, *new1)
    V2p_inv = expansion_matrix(run2.g, rows2, cols2, *vw2, *new2).inverse()
    out = []
    for pi in _pairings(new1, new2):
        U, Vbar = _sum_pair(eq, rows1, cols1, rows2, cols2, pi)
        out.append(LabeledEquivalence(rows1, cols1, rows2, cols2, U, V1p @ Vbar @ V2p_inv))
    return _choose(out, run1, run2, alignment, i)


def _fix_v(run1: _Runner, run2: _Runner, eq: LabeledEquivalence, v1: str, vw2, alignment: Alignment,
           i: int) -> LabeledEquivalence:
    new1 = splice_labels(run1.g, v1)
    run1.do(Move.C(v1))
    for m in normalize_shape(run1.g, check_condition_k=False)[1]:
        if m.kind != "T":
            raise NotAnEquivalence(f"splice: unexpected normalizing move {m.to_line()}")
        run1.do(m)
    new2 = expand(run2, *vw2)
    rows1, cols1 = eq.rows1 + new1, eq.cols1 + new1
    rows2, cols2 = eq.rows2 + new2, eq.cols2 + new2
    Um, Vm, _, _ = splice_matrices(run1.g, rows1, cols1, v1, *new1)
    V2p_inv = expansion_matrix(run2.g, rows2, cols2, *vw2, *new2).inverse()
    out = []
    for pi in _pairings(new1, new2):
        Ubar, Vbar = _sum_pair(eq, rows1, cols1, rows2, cols2, pi)
        out.append(LabeledEquivalence(rows1, cols1, rows2, cols2, Ubar @ Um, Vm @ Vbar @ V2p_inv))
    return _choose(out, run1, run2, alignment, i)


def _restore_positivity(run1: _Runner, run2: _Runner, eq: LabeledEquivalence) -> LabeledEquivalence:
    V = eq.V.copy()
    c1 = {v: k for k, v in enumerate(eq.cols1)}
    c2 = {v: k for k, v in enumerate(eq.cols2)}

    def on_first(frm: str, into: str) -> None:
        f, t = c1[frm], c1[into]
        V.data[f] = [x - y for x, y in zip(V.data[f], V.data[t])]

    def on_second(frm: str, into: str) -> None:
        f, t = c2[frm], c2[into]
        for r in V.data:
            r[t] += r[f]

    fix_positivity(run1, on_first)
    fix_positivity(run2, on_second)
    out = LabeledEquivalence(eq.rows1, eq.cols1, eq.rows2, eq.cols2, eq.U, V)
    out.check(run1.g, run2.g, "positivity repair")
    return out


__all__ = ["gl_to_sl", "SLResult", "expand", "expansion_matrix", "splice_matrices", "block_dets"]
