"""The reduced K-web of a block matrix and isomorphisms between K-webs.

For every block ``i`` of the poset the web holds the cokernels of ``B{r_i}``,
``B{s_i}`` and ``B{i}`` (``r_i`` the blocks strictly below ``i``, ``s_i`` the
blocks below or equal to ``i``), the kernel of ``B{i}`` when ``r_i`` is not
empty, and the maps of the exact sequence

    ker B{i} -> cok B{r_i} -> cok B{s_i} -> cok B{i}

together with the inclusions ``cok B{s_j} -> cok B{r_i}`` for immediate
predecessors ``j`` of a block with at least two of them.

Groups are presented in Smith coordinates. A cokernel element ``[x]`` has
coordinates ``(U x)_k`` at the positions ``k`` where the Smith divisor is not
1 (reduced modulo the divisor when it is positive); a kernel element ``x`` has
coordinates ``(V^{-1} x)[r:]``. Maps are integer matrices on these coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import NotAnEquivalence
from .intmat import (AbelianGroupPresentation, BlockMatrix, IntMatrix, as_matrix, in_lattice, kernel_basis,
                     smith_normal_form, verify_membership)

Site = frozenset


def site_name(c: Iterable[int]) -> str:
    return "{" + ",".join(str(i + 1) for i in sorted(c)) + "}"


# ---------------------------------------------------------------------------
# Presented groups
# ---------------------------------------------------------------------------

class CokGroup:
    """``Z^m / M Z^n`` with generators taken from the Smith witness ``U^{-1}``."""

    def __init__(self, matrix: IntMatrix):
        self.matrix = matrix
        self.snf = smith_normal_form(matrix)
        m = matrix.rows
        r = self.snf.rank
        self.full_orders = [self.snf.divisors[k] if k < r else 0 for k in range(m)]
        self.index = [k for k in range(m) if self.full_orders[k] != 1]
        self.orders = tuple(self.full_orders[k] for k in self.index)

    @property
    def size(self) -> int:
        return len(self.index)

    @property
    def presentation(self) -> AbelianGroupPresentation:
        return AbelianGroupPresentation(tuple(d for d in self.orders if d), sum(1 for d in self.orders if d == 0))

    def generators(self) -> list[list[int]]:
        return [self.snf.U_inv.col(k) for k in self.index]

    def reduce(self, coords: Sequence[int]) -> tuple[int, ...]:
        return tuple(c % d if d else c for c, d in zip(coords, self.orders))

    def coords(self, x: Sequence[int]) -> tuple[int, ...]:
        y = self.snf.U.apply(x)
        return self.reduce([y[k] for k in self.index])

    def lift(self, coords: Sequence[int]) -> list[int]:
        """A representative in ``Z^m`` of the element with the given coordinates."""
        out = [0] * self.matrix.rows
        for c, g in zip(coords, self.generators()):
            if c:
                for t in range(len(out)):
                    out[t] += c * g[t]
        return out

    def is_zero(self, x: Sequence[int]) -> bool:
        return not any(self.coords(x))

    def reduce_matrix(self, mat: IntMatrix) -> IntMatrix:
        """Reduce the rows of a map matrix into this group."""
        return IntMatrix([[x % d if d else x for x in row] for row, d in zip(mat.data, self.orders)],
                         mat.rows, mat.cols)

    def __str__(self) -> str:
        return str(self.presentation)


class KerGroup:
    """``ker M`` with basis the trailing columns of the Smith witness ``V``."""

    def __init__(self, matrix: IntMatrix):
        self.matrix = matrix
        self.snf = smith_normal_form(matrix)
        self.rank_start = self.snf.rank
        self.basis = [self.snf.V.col(j) for j in range(self.snf.rank, matrix.cols)]

    @property
    def size(self) -> int:
        return len(self.basis)

    @property
    def presentation(self) -> AbelianGroupPresentation:
        return AbelianGroupPresentation((), self.size)

    def coords(self, x: Sequence[int]) -> tuple[int, ...]:
        y = self.snf.V_inv.apply(x)
        return tuple(y[self.rank_start:])

    def __str__(self) -> str:
        return str(self.presentation)


def cok_map(src: CokGroup, dst: CokGroup, f: IntMatrix) -> IntMatrix:
    """Matrix of ``[x] -> [f x]`` on generators; raises if it is not well defined."""
    for j in range(src.matrix.cols):
        if not dst.is_zero(f.apply(src.matrix.col(j))):
            raise ValueError("map does not send relations to relations")
    cols = [dst.coords(f.apply(g)) for g in src.generators()]
    return IntMatrix.from_columns(cols, dst.size)


def ker_to_cok_map(src: KerGroup, dst: CokGroup, f: IntMatrix) -> IntMatrix:
    cols = [dst.coords(f.apply(b)) for b in src.basis]
    return IntMatrix.from_columns(cols, dst.size)


def ker_map(src: KerGroup, dst: KerGroup, f: IntMatrix) -> IntMatrix:
    cols = []
    for b in src.basis:
        y = f.apply(b)
        if any(dst.matrix.apply(y)):
            raise ValueError("map does not preserve kernels")
        cols.append(dst.coords(y))
    return IntMatrix.from_columns(cols, dst.size)


def is_group_iso(mat: IntMatrix, src_orders: Sequence[int], dst_orders: Sequence[int]) -> bool:
    """Whether a map between ``Z/d_1 + ...`` presentations is an isomorphism.

    Equal invariants plus surjectivity suffice: a surjective endomorphism of a
    finitely generated abelian group is injective.
    """
    a = AbelianGroupPresentation(tuple(sorted(d for d in src_orders if d)), sum(1 for d in src_orders if d == 0))
    b = AbelianGroupPresentation(tuple(sorted(d for d in dst_orders if d)), sum(1 for d in dst_orders if d == 0))
    if a != b:
        return False
    if not dst_orders:
        return True
    rel = IntMatrix.diag(list(dst_orders))
    return smith_normal_form(mat.hstack(rel)).divisors == tuple(1 for _ in dst_orders)


# ---------------------------------------------------------------------------
# The web
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WebMap:
    """One arrow of the web. ``src``/``dst`` are ``("cok", site)`` or ``("ker", i)``."""

    kind: str
    src: tuple
    dst: tuple
    matrix: IntMatrix


@dataclass
class KWeb:
    bm: BlockMatrix
    sites: list[Site]
    cok: dict[Site, CokGroup]
    ker: dict[int, KerGroup]
    maps: list[WebMap] = field(default_factory=list)

    @property
    def poset(self):
        return self.bm.poset

    def group(self, node: tuple):
        return self.cok[node[1]] if node[0] == "cok" else self.ker[node[1]]

    def invariants(self) -> dict[str, str]:
        out = {f"K0{site_name(c)}": str(self.cok[c]) for c in self.sites}
        out.update({f"K1{site_name([i])}": str(self.ker[i]) for i in sorted(self.ker)})
        return out

    def describe(self) -> str:
        lines = [f"{k}: {v}" for k, v in self.invariants().items()]
        for mp in self.maps:
            lines.append(f"{mp.kind} {_node_name(mp.src)} -> {_node_name(mp.dst)}: {mp.matrix.tolist()}")
        return "\n".join(lines)


def _node_name(node: tuple) -> str:
    return f"K0{site_name(node[1])}" if node[0] == "cok" else f"K1{site_name([node[1]])}"


def web_sites(poset) -> list[Site]:
    out: list[Site] = []
    for i in range(poset.size):
        for c in (poset.strict_down(i), poset.down(i), frozenset([i])):
            if c and c not in out:
                out.append(frozenset(c))
    return out


def _embedding(bm: BlockMatrix, small: Iterable[int], big: Iterable[int], rows: bool = True) -> IntMatrix:
    """0/1 matrix putting the rows (or columns) of ``small`` blocks into those of ``big``."""
    idx = bm.row_indices if rows else bm.col_indices
    a, b = idx(small), idx(big)
    pos = {x: t for t, x in enumerate(b)}
    out = IntMatrix.zeros(len(b), len(a))
    for s, x in enumerate(a):
        out.data[pos[x]][s] = 1
    return out


def compute_kweb(bm: BlockMatrix) -> KWeb:
    """The K-web of ``bm``; raises ``ValueError`` if ``bm`` is not in ``M_P``."""
    mem = verify_membership(bm, "M_P")
    if not mem:
        raise ValueError(f"membership violation: {mem.report}")
    P = bm.poset
    sites = web_sites(P)
    cok = {c: CokGroup(bm.sub(sorted(c))) for c in sites}
    ker = {i: KerGroup(bm.block(i, i)) for i in range(P.size) if P.strict_down(i)}
    web = KWeb(bm, sites, cok, ker)
    for i in range(P.size):
        r, s, one = P.strict_down(i), P.down(i), frozenset([i])
        if r:
            off = bm.sub(sorted(r), [i])
            web.maps.append(WebMap("boundary", ("ker", i), ("cok", r), ker_to_cok_map(ker[i], cok[r], off)))
            web.maps.append(WebMap("inclusion", ("cok", r), ("cok", s), cok_map(cok[r], cok[s], _embedding(bm, r, s))))
        if s != one:
            proj = _embedding(bm, one, s).transpose()
            web.maps.append(WebMap("projection", ("cok", s), ("cok", one), cok_map(cok[s], cok[one], proj)))
        imm = P.immediate_predecessors(i)
        if len(imm) >= 2:
            for j in imm:
                sj = P.down(j)
                web.maps.append(WebMap("inclusion", ("cok", sj), ("cok", r), cok_map(cok[sj], cok[r], _embedding(bm, sj, r))))
    return web


def _preimage_lattice(f: IntMatrix, target: IntMatrix) -> IntMatrix:
    """Generators of ``{x : f x in target Z^k}``."""
    stacked = f.hstack(-target)
    basis = kernel_basis(stacked)
    cols = [b[:f.cols] for b in basis]
    return IntMatrix.from_columns(cols, f.cols) if cols else IntMatrix.zeros(f.cols, 0)


def exactness_report(web: KWeb) -> list[str]:
    """Failures of image = kernel along every stored four-term sequence (empty if exact)."""
    bm, P = web.bm, web.poset
    bad = []
    for i in sorted(web.ker):
        r, s, one = P.strict_down(i), P.down(i), frozenset([i])
        Br, Bs, Bi = bm.sub(sorted(r)), bm.sub(sorted(s)), bm.sub([i])
        emb = _embedding(bm, r, s)
        proj = _embedding(bm, one, s).transpose()
        off = bm.sub(sorted(r), [i])
        # at cok B{r_i}: image of the boundary equals the kernel of the inclusion
        kb = web.ker[i].basis
        image = Br.hstack(IntMatrix.from_columns([off.apply(b) for b in kb], Br.rows)) if kb else Br
        kern = _preimage_lattice(emb, Bs)
        if not all(in_lattice(kern.col(t), image) for t in range(kern.cols)):
            bad.append(f"K0{site_name(r)}: kernel of inclusion larger than image of boundary")
        if not all(in_lattice(emb.apply(image.col(t)), Bs) for t in range(image.cols)):
            bad.append(f"K0{site_name(r)}: inclusion does not kill the boundary")
        # at cok B{s_i}: image of the inclusion equals the kernel of the projection
        image2 = Bs.hstack(emb)
        kern2 = _preimage_lattice(proj, Bi)
        if not all(in_lattice(kern2.col(t), image2) for t in range(kern2.cols)):
            bad.append(f"K0{site_name(s)}: kernel of projection larger than image of inclusion")
        if not all(in_lattice(proj.apply(image2.col(t)), Bi) for t in range(image2.cols)):
            bad.append(f"K0{site_name(s)}: projection does not kill the inclusion")
    return bad


def is_exact(web: KWeb) -> bool:
    return not exactness_report(web)


# ---------------------------------------------------------------------------
# Isomorphisms
# ---------------------------------------------------------------------------

@dataclass
class KWebIso:
    """Maps ``phi[c]`` on cokernel sites and ``psi[i]`` on kernels."""

    phi: dict[Site, IntMatrix]
    psi: dict[int, IntMatrix]

    def _apply(self, node: tuple) -> IntMatrix:
        return self.phi[node[1]] if node[0] == "cok" else self.psi[node[1]]

    def failures(self, src: KWeb, dst: KWeb) -> list[str]:
        out = []
        for c in src.sites:
            if not is_group_iso(self.phi[c], src.cok[c].orders, dst.cok[c].orders):
                out.append(f"phi{site_name(c)} is not an isomorphism")
        for i in src.ker:
            if not is_group_iso(self.psi[i], [0] * src.ker[i].size, [0] * dst.ker[i].size):
                out.append(f"psi{site_name([i])} is not an isomorphism")
        for a, b in zip(src.maps, dst.maps):
            g = dst.group(b.dst)
            left = self._apply(a.dst) @ a.matrix
            right = b.matrix @ self._apply(a.src)
            if isinstance(g, CokGroup):
                left, right = g.reduce_matrix(left), g.reduce_matrix(right)
            if left != right:
                out.append(f"{a.kind} {_node_name(a.src)} -> {_node_name(a.dst)} does not commute")
        return out

    def commutes(self, src: KWeb, dst: KWeb) -> bool:
        return not self.failures(src, dst)

    def equals(self, other: "KWebIso", dst: KWeb) -> bool:
        for c in dst.sites:
            g = dst.cok[c]
            if g.reduce_matrix(self.phi[c]) != g.reduce_matrix(other.phi[c]):
                return False
        return all(self.psi[i] == other.psi[i] for i in dst.ker)


def identity_web_iso(web: KWeb) -> KWebIso:
    return KWebIso({c: IntMatrix.identity(web.cok[c].size) for c in web.sites},
                   {i: IntMatrix.identity(web.ker[i].size) for i in web.ker})


def compose(second: KWebIso, first: KWebIso, dst: KWeb) -> KWebIso:
    """``second o first``, reduced into the groups of ``dst``."""
    return KWebIso({c: dst.cok[c].reduce_matrix(second.phi[c] @ first.phi[c]) for c in dst.sites},
                   {i: second.psi[i] @ first.psi[i] for i in dst.ker})


def check_equivalence(U: IntMatrix, V: IntMatrix, B: BlockMatrix, B2: BlockMatrix) -> None:
    """Raise :class:`NotAnEquivalence` unless ``(U, V)`` is a GL_P-equivalence ``B -> B2``."""
    U, V = as_matrix(U), as_matrix(V)
    if B.row_sizes != B2.row_sizes or B.col_sizes != B2.col_sizes or B.poset != B2.poset:
        raise NotAnEquivalence("block structures differ")
    if U.shape != (B.matrix.rows, B.matrix.rows) or V.shape != (B.matrix.cols, B.matrix.cols):
        raise NotAnEquivalence("U or V has the wrong shape")
    if not verify_membership(BlockMatrix(U, B.row_sizes, B.row_sizes, B.poset), "GL_P"):
        raise NotAnEquivalence("U is not in GL_P")
    if not verify_membership(BlockMatrix(V, B.col_sizes, B.col_sizes, B.poset), "GL_P"):
        raise NotAnEquivalence("V is not in GL_P")
    if U @ B.matrix @ V != B2.matrix:
        raise NotAnEquivalence("U B V differs from B'")


def induced_iso(U, V, B: BlockMatrix, B2: BlockMatrix, webs: tuple[KWeb, KWeb] | None = None) -> KWebIso:
    """``kappa_(U,V)``: ``[x] -> [U{c} x]`` on cokernels, ``x -> V{i}^{-1} x`` on kernels."""
    U, V = as_matrix(U), as_matrix(V)
    check_equivalence(U, V, B, B2)
    w1, w2 = webs if webs is not None else (compute_kweb(B), compute_kweb(B2))
    Ub = BlockMatrix(U, B.row_sizes, B.row_sizes, B.poset)
    Vb = BlockMatrix(V, B.col_sizes, B.col_sizes, B.poset)
    phi = {c: cok_map(w1.cok[c], w2.cok[c], Ub.sub(sorted(c))) for c in w1.sites}
    psi = {i: ker_map(w1.ker[i], w2.ker[i], Vb.block(i, i).inverse()) for i in w1.ker}
    return KWebIso(phi, psi)


__all__ = ["CokGroup", "KerGroup", "KWeb", "KWebIso", "WebMap", "compute_kweb", "exactness_report", "is_exact",
           "induced_iso", "identity_web_iso", "compose", "check_equivalence", "cok_map", "ker_map", "is_group_iso",
           "site_name", "web_sites"]
