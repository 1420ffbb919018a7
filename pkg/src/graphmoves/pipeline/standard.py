"""Standard-form pairs and label-indexed matrix equivalences between them.

Blocks of the two graphs are matched by representative vertex labels, which
survive every move used here, so the matching stays valid while vertices are
added. ``B_bullet`` matrices are taken with rows and columns listed block by
block in the first graph's order, the second graph's blocks following the
matching.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..errors import NotAnEquivalence, NotComparable
from ..fingerprint import DistinguishedAt, Inconclusive, compare_fingerprints, fk_fingerprint
from ..graph import BlockStructure, Graph, ideal_poset
from ..intmat import BlockMatrix, IntMatrix, smith_normal_form
from ..lift import DEFAULT_BUDGET, find_gl_equivalence
from ..moves import MoveSequence
from ..trail import _Runner
from .canonical import grow_split


@dataclass(frozen=True)
class Alignment:
    """Block ``i`` of the first graph contains ``reps[i][0]`` and matches the
    block of the second graph containing ``reps[i][1]``."""

    reps: tuple[tuple[str, str], ...]

    @classmethod
    def from_bijection(cls, st1: BlockStructure, st2: BlockStructure, rho: Sequence[int]) -> "Alignment":
        return cls(tuple((st1.blocks[i][0], st2.blocks[rho[i]][0]) for i in range(st1.N)))

    def orders(self, g1: Graph, g2: Graph) -> "AlignedOrders":
        st1 = ideal_poset(g1, check_condition_k=False)
        st2 = ideal_poset(g2, check_condition_k=False)
        idx = {st1.block_of[a]: k for k, (a, _) in enumerate(self.reps)}
        order = [st1.blocks[i] for i in range(st1.N)]
        rows1, cols1, rows2, cols2 = [], [], [], []
        for i, blk in enumerate(order):
            other = st2.blocks[st2.block_of[self.reps[idx[i]][1]]]
            rows1 += [v for v in blk if v in st1.regular]
            cols1 += list(blk)
            rows2 += [v for v in other if v in st2.regular]
            cols2 += list(other)
        m2 = tuple(sum(1 for v in st2.blocks[st2.block_of[self.reps[idx[i]][1]]] if v in st2.regular)
                   for i in range(st1.N))
        n2 = tuple(len(st2.blocks[st2.block_of[self.reps[idx[i]][1]]]) for i in range(st1.N))
        return AlignedOrders(st1, tuple(rows1), tuple(cols1), tuple(rows2), tuple(cols2), m2, n2)

    def block_pair(self, g1: Graph, g2: Graph, i: int) -> tuple[tuple[str, ...], tuple[str, ...]]:
        """Vertices of block ``i`` (first graph's numbering) in both graphs."""
        st1 = ideal_poset(g1, check_condition_k=False)
        st2 = ideal_poset(g2, check_condition_k=False)
        a = next(a for a, _ in self.reps if st1.block_of[a] == i)
        b = dict(self.reps)[a]
        return st1.blocks[i], st2.blocks[st2.block_of[b]]


@dataclass(frozen=True)
class AlignedOrders:
    structure: BlockStructure
    rows1: tuple[str, ...]
    cols1: tuple[str, ...]
    rows2: tuple[str, ...]
    cols2: tuple[str, ...]
    m2: tuple[int, ...]
    n2: tuple[int, ...]

    @property
    def same_shape(self) -> bool:
        return self.structure.m == self.m2 and self.structure.n == self.n2

    def matrices(self, g1: Graph, g2: Graph) -> tuple[BlockMatrix, BlockMatrix]:
        st = self.structure
        if not self.same_shape:
            raise NotComparable("block sizes differ")
        B1 = BlockMatrix(g1.b_bullet(self.rows1, self.cols1), st.m, st.n, st.poset)
        B2 = BlockMatrix(g2.b_bullet(self.rows2, self.cols2), st.m, st.n, st.poset)
        return B1, B2


@dataclass
class LabeledEquivalence:
    """``U @ B1 @ V == B2`` with ``B1 = g1.b_bullet(rows1, cols1)`` and
    ``B2 = g2.b_bullet(rows2, cols2)``; ``U`` is indexed by ``rows2 x rows1``
    and ``V`` by ``cols1 x cols2``."""

    rows1: tuple[str, ...]
    cols1: tuple[str, ...]
    rows2: tuple[str, ...]
    cols2: tuple[str, ...]
    U: IntMatrix
    V: IntMatrix

    def holds(self, g1: Graph, g2: Graph) -> bool:
        B1 = g1.b_bullet(self.rows1, self.cols1)
        B2 = g2.b_bullet(self.rows2, self.cols2)
        return self.U @ B1 @ self.V == B2

    def check(self, g1: Graph, g2: Graph, stage: str) -> None:
        if not self.holds(g1, g2):
            raise NotAnEquivalence(f"{stage}: U B1 V differs from B2")

    def reorder(self, rows1, cols1, rows2, cols2) -> "LabeledEquivalence":
        """The same equivalence written in other vertex orders."""
        r1 = {v: k for k, v in enumerate(self.rows1)}
        c1 = {v: k for k, v in enumerate(self.cols1)}
        r2 = {v: k for k, v in enumerate(self.rows2)}
        c2 = {v: k for k, v in enumerate(self.cols2)}
        U = IntMatrix([[self.U.data[r2[a]][r1[b]] for b in rows1] for a in rows2], len(rows2), len(rows1))
        V = IntMatrix([[self.V.data[c1[a]][c2[b]] for b in cols2] for a in cols1], len(cols1), len(cols2))
        return LabeledEquivalence(tuple(rows1), tuple(cols1), tuple(rows2), tuple(cols2), U, V)

    def aligned(self, orders: AlignedOrders) -> "LabeledEquivalence":
        return self.reorder(orders.rows1, orders.cols1, orders.rows2, orders.cols2)


@dataclass
class StandardPair:
    F1: Graph
    F2: Graph
    moves1: MoveSequence
    moves2: MoveSequence
    alignment: Alignment

    def __iter__(self):
        return iter((self.F1, self.F2, self.moves1, self.moves2))


def block_alignment(g1: Graph, g2: Graph, budget: int = DEFAULT_BUDGET) -> Alignment:
    """Block matching from a passing fingerprint comparison; raises ``NotComparable``."""
    f1, f2 = fk_fingerprint(g1), fk_fingerprint(g2)
    if f1.normalized or f2.normalized:
        raise NotComparable("inputs must be in canonical form")
    res = compare_fingerprints(f1, f2, budget=budget)
    if isinstance(res, DistinguishedAt):
        raise NotComparable(res.site)
    if isinstance(res, Inconclusive):
        raise NotComparable(f"{res.stage}: {res.reason}")
    return Alignment.from_bijection(f1.structure, f2.structure, res.bijection)


def has_entry_one(g: Graph, blk: Sequence[str]) -> bool:
    regular = [v for v in blk if g.is_regular(v)]
    return any(g.mult(x, y) - (x == y) == 1 for x in regular for y in blk)


def _regular_in(g: Graph, blk: Sequence[str]) -> str:
    return next(v for v in blk if g.is_regular(v))


def standardize_pair(g1: Graph, g2: Graph, alignment: Alignment | None = None,
                     budget: int = DEFAULT_BUDGET) -> StandardPair:
    """Grow matched blocks to equal sizes, each diagonal block holding an entry 1.

    Inputs must be in canonical form with matching fingerprints. Growth uses
    the outsplit of :func:`grow_split`, which keeps the canonical properties
    and leaves a 1 on the diagonal of the split vertex.
    """
    if alignment is None:
        alignment = block_alignment(g1, g2, budget)
    runs = (_Runner(g1), _Runner(g2))
    st = ideal_poset(g1, check_condition_k=False)
    for i in range(st.N):
        while True:
            blocks = alignment.block_pair(runs[0].g, runs[1].g, i)
            m = [sum(1 for v in blk if run.g.is_regular(v)) for run, blk in zip(runs, blocks)]
            if len(blocks[0]) - m[0] != len(blocks[1]) - m[1]:
                raise NotComparable(f"singular vertex counts differ in block {i + 1}")
            if m[0] == 0 or m[1] == 0:
                if m[0] != m[1]:
                    raise NotComparable(f"regular vertex counts 0 vs nonzero in block {i + 1}")
                break
            lacking = [k for k in (0, 1) if not has_entry_one(runs[k].g, blocks[k])]
            if lacking:
                k = lacking[0]
            elif m[0] != m[1]:
                k = 0 if m[0] < m[1] else 1
            else:
                break
            grow_split(runs[k], _regular_in(runs[k].g, blocks[k]))
    seq1 = MoveSequence.build(g1, runs[0].moves)
    seq2 = MoveSequence.build(g2, runs[1].moves)
    pair = StandardPair(seq1.end, seq2.end, seq1, seq2, alignment)
    check_standard(pair)
    return pair


def check_standard(pair: StandardPair) -> None:
    orders = pair.alignment.orders(pair.F1, pair.F2)
    if not orders.same_shape:
        raise NotComparable("block sizes differ after standardization")
    st = orders.structure
    for i in range(st.N):
        if st.m[i]:
            b1, b2 = pair.alignment.block_pair(pair.F1, pair.F2, i)
            if not (has_entry_one(pair.F1, b1) and has_entry_one(pair.F2, b2)):
                raise NotComparable(f"diagonal block {i + 1} has no entry 1")


def lift_pair(pair: StandardPair, budget: int = DEFAULT_BUDGET) -> LabeledEquivalence:
    """A GL_P-equivalence between the aligned ``B_bullet`` matrices with ``V{i} = I`` where ``n_i = 1``."""
    orders = pair.alignment.orders(pair.F1, pair.F2)
    B1, B2 = orders.matrices(pair.F1, pair.F2)
    fixed = [i for i, n in enumerate(orders.structure.n) if n == 1]
    res = find_gl_equivalence(B1, B2, fixed_w=fixed, budget=budget)
    eq = LabeledEquivalence(orders.rows1, orders.cols1, orders.rows2, orders.cols2, res.U, res.V)
    eq.check(pair.F1, pair.F2, "lift")
    return eq


def smith_divisors(g: Graph, blk: Sequence[str]) -> tuple[int, ...]:
    rows = [v for v in blk if g.is_regular(v)]
    return tuple(smith_normal_form(g.b_bullet(rows, list(blk))).divisors)


__all__ = ["Alignment", "AlignedOrders", "LabeledEquivalence", "StandardPair", "block_alignment",
           "standardize_pair", "check_standard", "lift_pair", "has_entry_one"]
