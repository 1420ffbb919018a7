"""Filtered K-theory fingerprints of graphs and their comparison.

The fingerprint of a graph is the K-web of the transposed matrix
``C = (B_bullet)^T`` over the opposite order, together with the number of
singular vertices and a cycle flag for every block. Two fingerprints are
compared by searching an order isomorphism of the block posets that matches
all groups, and then a GL-equivalence between the stabilized matrices ``C``;
the equivalence induces the commuting ladder of K-web isomorphisms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import NotComparable, SearchBudgetExceeded
from .graph import INF, BlockStructure, Graph, ideal_poset, shape_violation
from .intmat import BlockMatrix, IntMatrix
from .kweb import KWeb, compute_kweb, site_name
from .lift import DEFAULT_BUDGET, find_gl_equivalence, permute_blocks, stabilize
from .moves import Move
from .shape import normalize_shape, require_condition_k

NOT_COMPARED = "order on K0 groups: not compared"


@dataclass
class FKInvariant:
    graph: Graph
    structure: BlockStructure
    transposed: BlockMatrix
    web: KWeb
    singular_counts: tuple[int, ...]
    cyclic: tuple[bool, ...]
    normalized: bool = False
    normalizing_moves: list[Move] = field(default_factory=list)

    @property
    def poset(self):
        return self.structure.poset

    @property
    def size(self) -> int:
        return self.structure.N

    def k0(self, site) -> str:
        return str(self.web.cok[frozenset(site)])

    def k1(self, i: int) -> str:
        return str(self.web.ker[i]) if i in self.web.ker else "0"

    def text(self) -> str:
        """Canonical text form: poset, per-site groups, counts and map matrices."""
        lines = [f"blocks {self.size}"]
        for a, b in self.poset.covers():
            lines.append(f"below {a + 1} {b + 1}")
        for i in range(self.size):
            lines.append(f"block {i + 1} vertices {','.join(self.structure.blocks[i])} "
                         f"singular {self.singular_counts[i]} cyclic {int(self.cyclic[i])}")
        for c in self.web.sites:
            g = self.web.cok[c]
            lines.append(f"K0 {site_name(c)} {g} orders {list(g.orders)}")
        for i in sorted(self.web.ker):
            lines.append(f"K1 {site_name([i])} {self.web.ker[i]}")
        for mp in self.web.maps:
            lines.append(f"map {mp.kind} {_node(mp.src)} {_node(mp.dst)} {mp.matrix.tolist()}")
        lines.append(NOT_COMPARED)
        return "\n".join(lines)


def _node(node) -> str:
    return f"K0{site_name(node[1])}" if node[0] == "cok" else f"K1{site_name([node[1]])}"


def _cyclic_flags(g: Graph, st: BlockStructure) -> tuple[bool, ...]:
    out = []
    for blk in st.blocks:
        v = blk[0]
        out.append(len(blk) > 1 or g.mult(v, v) is INF or (g.mult(v, v) or 0) > 0)
    return tuple(out)


def fk_fingerprint(g: Graph) -> FKInvariant:
    """Fingerprint of a Condition (K) graph; other shapes are normalized first."""
    require_condition_k(g)
    normalized = shape_violation(g) is not None
    moves: list[Move] = []
    if normalized:
        g, moves = normalize_shape(g, check_condition_k=False)
    st = ideal_poset(g)
    C = st.bullet(g).transpose()
    web = compute_kweb(C)
    return FKInvariant(g, st, C, web, st.singular_counts(), _cyclic_flags(g, st), normalized, moves)


# ---------------------------------------------------------------------------
# Comparison
# ---------------------------------------------------------------------------

@dataclass
class DistinguishedAt:
    site: str

    def __str__(self) -> str:
        return f"Distinguished: {self.site}"


@dataclass
class NecessaryConditionsPass:
    bijection: tuple[int, ...]
    U: IntMatrix | None = None
    V: IntMatrix | None = None
    note: str = NOT_COMPARED

    def __str__(self) -> str:
        pairs = ", ".join(f"{i + 1}->{j + 1}" for i, j in enumerate(self.bijection))
        return f"Pass: blocks {pairs} ({self.note})"


@dataclass
class Inconclusive:
    stage: str
    reason: str

    def __str__(self) -> str:
        return f"Inconclusive ({self.stage}): {self.reason}"


def invariant_mismatch(f1: FKInvariant, f2: FKInvariant, rho) -> str | None:
    """The first invariant that differs under the block bijection ``rho``, if any."""
    for i in range(f1.size):
        j = rho[i]
        if f1.singular_counts[i] != f2.singular_counts[j]:
            return f"singular vertices {f1.singular_counts[i]} vs {f2.singular_counts[j]} at {site_name([i])}"
        if f1.cyclic[i] != f2.cyclic[j]:
            return f"cycle flag {int(f1.cyclic[i])} vs {int(f2.cyclic[j])} at {site_name([i])}"
    for c in f1.web.sites:
        c2 = frozenset(rho[i] for i in c)
        a, b = str(f1.web.cok[c]), str(f2.web.cok[c2])
        if a != b:
            return f"K₀ {a} vs {b} at {site_name(c)}"
    for i in sorted(f1.web.ker):
        a, b = str(f1.web.ker[i]), str(f2.web.ker[rho[i]])
        if a != b:
            return f"K₁ {a} vs {b} at {site_name([i])}"
    return None


def _anchors(f: FKInvariant, C: BlockMatrix) -> dict[int, list[int]]:
    """Vertex classes fixed by the order: blocks made of one singular vertex without a loop."""
    out = {}
    for i in range(f.size):
        if f.structure.m[i] == 0 and f.structure.n[i] == 1 and not f.cyclic[i]:
            x = [0] * C.row_sizes[i]
            x[0] = 1
            out[i] = x
    return out


def stabilized_pair(f1: FKInvariant, f2: FKInvariant, rho) -> tuple[BlockMatrix, BlockMatrix]:
    """``C1`` and ``C2`` (blocks renumbered by ``rho``) padded to equal sizes with gcd 1."""
    C2 = permute_blocks(f2.transposed, rho)
    C1 = f1.transposed
    e1, e2 = [], []
    for i in range(f1.size):
        cols = max(C1.col_sizes[i], C2.col_sizes[i])
        e1.append(cols - C1.col_sizes[i] + 1)
        e2.append(cols - C2.col_sizes[i] + 1)
    return stabilize(C1, e1), stabilize(C2, e2)


def compare_fingerprints(f1: FKInvariant, f2: FKInvariant, budget: int = DEFAULT_BUDGET):
    """``DistinguishedAt``, ``NecessaryConditionsPass`` or ``Inconclusive``."""
    if f1.size != f2.size:
        return DistinguishedAt(f"poset size {f1.size} vs {f2.size}")
    first_mismatch = None
    exhausted = None
    isos = list(f1.poset.isomorphisms(f2.poset))
    if not isos:
        return DistinguishedAt("block order: posets are not isomorphic")
    for rho in isos:
        bad = invariant_mismatch(f1, f2, rho)
        if bad is not None:
            first_mismatch = first_mismatch or bad
            continue
        C1, C2 = stabilized_pair(f1, f2, rho)
        anchors = {i: (x, x) for i, x in _anchors(f1, C1).items()}
        try:
            res = find_gl_equivalence(C1, C2, anchors=anchors, budget=budget)
        except SearchBudgetExceeded as exc:
            exhausted = str(exc)
            continue
        except NotComparable as exc:
            first_mismatch = first_mismatch or exc.site
            continue
        return NecessaryConditionsPass(tuple(rho), res.U, res.V)
    if exhausted is not None:
        return Inconclusive("ladder search", exhausted)
    return DistinguishedAt(first_mismatch)


__all__ = ["FKInvariant", "fk_fingerprint", "compare_fingerprints", "DistinguishedAt", "NecessaryConditionsPass",
           "Inconclusive", "invariant_mismatch", "stabilized_pair", "NOT_COMPARED"]
