"""From elementary steps to moves, and the end-to-end equivalence decision."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..errors import (HypothesisViolated, IllegalStep, NotAnEquivalence, NotComparable, NotPositive, NotSL,
                      SearchBudgetExceeded)
from ..fingerprint import DistinguishedAt, Inconclusive, compare_fingerprints, fk_fingerprint
from ..graph import Graph, find_isomorphism, ideal_poset
from ..intmat import BlockMatrix, ElementaryStep
from ..lift import DEFAULT_BUDGET
from ..moves import (CertificateError, IllegalDerivedMove, MoveCertificate, MoveSequence, Segment, check_iso,
                     mat_move)
from ..shape import require_condition_k
from .canonical import canonicalize
from .glsl import gl_to_sl
from .positive import positive_factorization
from .standard import lift_pair, standardize_pair

Distinguished = DistinguishedAt


@dataclass
class Certificate:
    certificate: MoveCertificate

    def __str__(self) -> str:
        return f"Certificate: {self.certificate.move_count()} moves"


EquivalenceVerdict = Certificate | DistinguishedAt | Inconclusive


def step_move_args(step: ElementaryStep, rows: Sequence[str], cols: Sequence[str]) -> tuple[str, str, str]:
    """``(op, frm, into)`` of the derived matrix move realizing ``step``."""
    sign = "+" if step.sign > 0 else "-"
    if step.side == "left":
        return f"row{sign}", rows[step.j], rows[step.i]
    return f"col{sign}", cols[step.i], cols[step.j]


def steps_to_moves(g: Graph, steps: Sequence[ElementaryStep], rows: Sequence[str] | None = None,
                   cols: Sequence[str] | None = None) -> MoveSequence:
    """One derived matrix move per step; indices refer to ``rows``/``cols`` of ``B_bullet``.

    The orders default to the block orders of ``g``. Each step must lie in
    ``SL_P`` for the block structure and give a legal graph.
    """
    st = ideal_poset(g, check_condition_k=False)
    rows = tuple(st.row_order if rows is None else rows)
    cols = tuple(st.col_order if cols is None else cols)
    block = {v: st.block_of[v] for v in cols}
    row_blocks = [block[v] for v in rows]
    col_blocks = [block[v] for v in cols]
    shape = BlockMatrix(g.b_bullet(rows, cols), _sizes(row_blocks, st.N), _sizes(col_blocks, st.N), st.poset) \
        if _contiguous(row_blocks) and _contiguous(col_blocks) else None
    seq = MoveSequence(g)
    for step in steps:
        if shape is not None:
            legal = step.block_legal(shape)
        elif step.side == "left":
            legal = st.poset.leq(row_blocks[step.i], row_blocks[step.j])
        else:
            legal = st.poset.leq(col_blocks[step.i], col_blocks[step.j])
        if not legal:
            raise IllegalStep(step, "violates the block order")
        op, frm, into = step_move_args(step, rows, cols)
        try:
            seq.append(mat_move(seq.end, op, frm, into))
        except IllegalDerivedMove as exc:
            raise IllegalStep(step, exc.reason) from None
    return seq


def _sizes(blocks: Sequence[int], N: int) -> list[int]:
    return [sum(1 for b in blocks if b == i) for i in range(N)]


def _contiguous(blocks: Sequence[int]) -> bool:
    return list(blocks) == sorted(blocks)


def decide_equivalence(e1: Graph, e2: Graph, budget: int = DEFAULT_BUDGET):
    """``Certificate``, ``Distinguished`` or ``Inconclusive`` for a pair of Condition (K) graphs.

    A certificate is returned only after it has been replayed and its closing
    bijection checked.
    """
    require_condition_k(e1)
    require_condition_k(e2)
    res = compare_fingerprints(fk_fingerprint(e1), fk_fingerprint(e2), budget=budget)
    if isinstance(res, DistinguishedAt):
        return res
    if isinstance(res, Inconclusive):
        if budget <= 0:
            return Inconclusive("lift", f"budget {budget}")
        return res

    c1, c2 = canonicalize(e1), canonicalize(e2)
    for name, c in (("first", c1), ("second", c2)):
        if not c.ok:
            return Inconclusive("canonicalize", f"{name} graph fails {c.checklist}")
    try:
        pair = standardize_pair(c1.graph, c2.graph, budget=budget)
    except NotComparable as exc:
        return Inconclusive("standardize", exc.site)
    try:
        eq = lift_pair(pair, budget=budget)
    except SearchBudgetExceeded as exc:
        return Inconclusive("lift", str(exc))
    except NotComparable as exc:
        return Inconclusive("lift", exc.site)
    try:
        sl = gl_to_sl(pair.F1, pair.F2, eq, pair.alignment)
        orders = pair.alignment.orders(sl.G1, sl.G2)
        eqa = sl.equivalence.aligned(orders)
        B1, B2 = orders.matrices(sl.G1, sl.G2)
        steps = positive_factorization(B1, B2, eqa.U, eqa.V)
        tail = steps_to_moves(sl.G1, steps, orders.rows1, orders.cols1)
    except (HypothesisViolated, NotAnEquivalence, NotPositive, NotSL, IllegalStep) as exc:
        return Inconclusive("factorization", f"{type(exc).__name__}: {exc}")

    end = tail.end
    iso = dict(zip(orders.cols1, orders.cols2))
    if not check_iso(end, sl.G2, iso):
        iso = find_isomorphism(end, sl.G2)
        if iso is None:
            return Inconclusive("isomorphism", "final graphs are not isomorphic")
    left = MoveSequence.concat([c1.moves, pair.moves1, sl.moves1, tail])
    right = MoveSequence.concat([c2.moves, pair.moves2, sl.moves2])
    cert = MoveCertificate([Segment(left, right, iso)])
    try:
        cert.verify()
    except CertificateError as exc:
        return Inconclusive("certificate", str(exc))
    return Certificate(cert)


__all__ = ["decide_equivalence", "steps_to_moves", "step_move_args", "Certificate", "Distinguished",
           "Inconclusive", "EquivalenceVerdict"]
