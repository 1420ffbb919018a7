"""Search for GL_P-equivalences ``U B V = B'`` and lifts of K-web isomorphisms.

Write ``W = V^{-1}``; the equation ``U B = B' W`` is linear. On a diagonal block
with Smith forms ``S1 B{i} T1 = D = S2 B'{i} T2`` every solution is
``U{i} = S2^{-1} g S1`` and ``W{i} = T2 h T1^{-1}`` with ``g D = D h``. Such pairs
``(g, h)`` are enumerated (breadth first from the identity, one representative
for each induced action on ``cok D`` and ``ker D``), and for every choice of
diagonal blocks the off-diagonal blocks are found by solving the remaining
linear system over the integers. Blocks are assigned in a linear extension of
the order, so each partial system involves only blocks chosen so far.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from math import gcd
from typing import Mapping, Sequence

from .errors import GcdNotOne, NotAnEquivalence, NotComparable, SearchBudgetExceeded
from .intmat import BlockMatrix, IntMatrix, matrix_gcd, smith_normal_form, verify_membership
from .kweb import CokGroup, KerGroup, KWebIso, check_equivalence, compute_kweb, induced_iso, site_name
from .linsolve import solve_system
from .poset import Poset

DEFAULT_BUDGET = 4000
DEFAULT_CANDIDATES = 400
ENTRY_BOUND = 3


@dataclass
class _Diag:
    """A diagonal block choice ``U{i}``, ``W{i}``.

    ``W{i}`` may still move by ``L Y R`` for an integer matrix ``Y``: these are
    the stabilizer elements mapping into the kernel coordinates, an abelian
    family that enters the equations linearly.
    """

    U: IntMatrix
    W: IntMatrix
    L: IntMatrix
    R: IntMatrix


@dataclass
class LiftResult:
    U: IntMatrix
    V: IntMatrix
    solves: int


# ---------------------------------------------------------------------------
# Stabilizer of a Smith form
# ---------------------------------------------------------------------------

def _elem(size: int, entries: Mapping[tuple[int, int], int]) -> IntMatrix:
    e = IntMatrix.identity(size)
    for (a, b), x in entries.items():
        e.data[a][b] = x
    return e


def stabilizer_generators(divisors: Sequence[int], m: int, n: int) -> list[tuple[IntMatrix, IntMatrix]]:
    """Pairs ``(g, h)`` in ``GL_m x GL_n`` with ``g D = D h`` for ``D = diag(divisors)``."""
    r = len(divisors)
    d = [divisors[k] if k < r else 0 for k in range(max(m, n))]
    gens: list[tuple[IntMatrix, IntMatrix]] = []
    Im, In = IntMatrix.identity(m), IntMatrix.identity(n)
    for k in range(m):
        for l in range(m):
            if k == l:
                continue
            if l >= r:
                gens.append((_elem(m, {(k, l): 1}), In))
            elif k < r:
                if d[l] % d[k] == 0:
                    gens.append((_elem(m, {(k, l): 1}), _elem(n, {(k, l): d[l] // d[k]})))
                elif d[k] % d[l] == 0:
                    gens.append((_elem(m, {(k, l): d[k] // d[l]}), _elem(n, {(k, l): 1})))
    for k in range(r, n):
        for l in range(n):
            if k != l:
                gens.append((Im, _elem(n, {(k, l): 1})))
    for k in range(max(m, n)):
        if k < r:
            gens.append((_elem(m, {(k, k): -1}), _elem(n, {(k, k): -1})))
            continue
        if k < m:
            gens.append((_elem(m, {(k, k): -1}), In))
        if k < n:
            gens.append((Im, _elem(n, {(k, k): -1})))
    ones = [k for k in range(r) if d[k] == 1]
    if ones:
        o = ones[0]
        for t in range(r):
            dt = d[t]
            if dt <= 2:
                continue
            units = [u for u in range(2, dt) if gcd(u, dt) == 1]
            if len(units) > 12:
                units = units[:12]
            for u in units:
                x = pow(u, -1, dt)
                w = (x * u - 1) // dt
                g = _elem(m, {(o, o): x, (o, t): w, (t, o): dt, (t, t): u})
                h = _elem(n, {(o, o): x, (o, t): w * dt, (t, o): 1, (t, t): u})
                gens.append((g, h))
    return gens


def _signature(g: IntMatrix, h: IntMatrix, divisors: Sequence[int], m: int, n: int):
    r = len(divisors)
    d = [divisors[k] if k < r else 0 for k in range(m)]
    T = [k for k in range(m) if d[k] != 1]
    cok = tuple(tuple(g.data[k][l] % d[k] if d[k] else g.data[k][l] for l in T) for k in T)
    ker = tuple(tuple(h.data[k][l] for l in range(r, n)) for k in range(r, n))
    free = [g.data[k][l] for k in T if not d[k] for l in T] + [x for row in ker for x in row]
    return (cok, ker), max((abs(x) for x in free), default=0)


def stabilizer_representatives(divisors: Sequence[int], m: int, n: int, cap: int = DEFAULT_CANDIDATES,
                               bound: int = ENTRY_BOUND) -> tuple[list[tuple[IntMatrix, IntMatrix]], bool]:
    """One ``(g, h)`` per induced action, identity first; also whether the list is complete."""
    gens = stabilizer_generators(divisors, m, n)
    start = (IntMatrix.identity(m), IntMatrix.identity(n))
    sig, _ = _signature(*start, divisors, m, n)
    seen = {sig}
    out = [start]
    queue = deque([start])
    complete = True
    while queue:
        g, h = queue.popleft()
        for a, b in gens:
            ng, nh = a @ g, b @ h
            s, size = _signature(ng, nh, divisors, m, n)
            if s in seen:
                continue
            if size > bound:
                complete = False
                continue
            if len(out) >= cap:
                return out, False
            seen.add(s)
            out.append((ng, nh))
            queue.append((ng, nh))
    return out, complete


# ---------------------------------------------------------------------------
# Block matrix helpers
# ---------------------------------------------------------------------------

def permute_blocks(bm: BlockMatrix, perm: Sequence[int]) -> BlockMatrix:
    """Block ``t`` of the result is block ``perm[t]`` of ``bm``."""
    rows = [r for b in perm for r in bm.row_indices([b])]
    cols = [c for b in perm for c in bm.col_indices([b])]
    P = bm.poset
    poset = Poset(P.size, [(t, u) for t in range(P.size) for u in range(P.size) if t != u and P.leq(perm[t], perm[u])])
    return BlockMatrix(bm.matrix.submatrix(rows, cols), [bm.row_sizes[b] for b in perm],
                       [bm.col_sizes[b] for b in perm], poset)


def stabilize(bm: BlockMatrix, extra: Sequence[int]) -> BlockMatrix:
    """Append ``extra[i]`` rows and columns to block ``i`` holding an identity matrix."""
    N = bm.poset.size
    rs = [bm.row_sizes[i] + extra[i] for i in range(N)]
    cs = [bm.col_sizes[i] + extra[i] for i in range(N)]
    out = IntMatrix.zeros(sum(rs), sum(cs))
    ro, co = [0], [0]
    for i in range(N):
        ro.append(ro[-1] + rs[i])
        co.append(co[-1] + cs[i])
    for i in range(N):
        for j in range(N):
            blk = bm.block(i, j)
            for a in range(blk.rows):
                for b in range(blk.cols):
                    out.data[ro[i] + a][co[j] + b] = blk.data[a][b]
        for t in range(extra[i]):
            out.data[ro[i] + bm.row_sizes[i] + t][co[i] + bm.col_sizes[i] + t] = 1
    return BlockMatrix(out, rs, cs, bm.poset)


# ---------------------------------------------------------------------------
# The search
# ---------------------------------------------------------------------------

class _System:
    """Linear system for the off-diagonal blocks of ``U`` and ``W``."""

    def __init__(self, B: BlockMatrix, B2: BlockMatrix, blocks: Sequence[int], diag: Mapping[int, _Diag]):
        self.B, self.B2 = B, B2
        P = B.poset
        m, n = B.row_sizes, B.col_sizes
        self.var: dict[tuple[str, int, int], int] = {}
        size = 0
        chosen = set(blocks)
        for j in blocks:
            d = diag[j]
            if d.L.cols and d.R.rows and any(P.lt(i, j) and m[i] for i in blocks):
                self.var[("Y", j, j)] = size
                size += d.L.cols * d.R.rows
        for i in blocks:
            for k in blocks:
                if i != k and P.leq(i, k):
                    self.var[("U", i, k)] = size
                    size += m[i] * m[k]
                    self.var[("W", i, k)] = size
                    size += n[i] * n[k]
        self.size = size
        self.blocks = list(blocks)
        self.chosen = chosen
        self.rows: list[list[int]] = []
        self.rhs: list[int] = []

    def u_index(self, i, k, a, c):
        return self.var[("U", i, k)] + a * self.B.row_sizes[k] + c

    def w_index(self, k, j, c, b):
        return self.var[("W", k, j)] + c * self.B.col_sizes[j] + b

    def add_pair_equations(self, i: int, j: int, diag: Mapping[int, _Diag]) -> None:
        B, B2, P = self.B, self.B2, self.B.poset
        mi, nj = B.row_sizes[i], B.col_sizes[j]
        if not mi or not nj:
            return
        Ui, Wj = diag[i].U, diag[j].W
        known = Ui @ B.block(i, j) - B2.block(i, j) @ Wj
        ystart = self.var.get(("Y", j, j))
        if ystart is not None:
            BL, R = B2.block(i, j) @ diag[j].L, diag[j].R
        mids = [k for k in self.blocks if P.leq(i, k) and P.leq(k, j)]
        bk = {k: B.block(k, j) for k in mids if k != i}
        b2k = {k: B2.block(i, k) for k in mids if k != j}
        for a in range(mi):
            for b in range(nj):
                row = [0] * self.size
                for k, blk in bk.items():
                    for c in range(blk.rows):
                        x = blk.data[c][b]
                        if x:
                            row[self.u_index(i, k, a, c)] += x
                for k, blk in b2k.items():
                    for c in range(blk.cols):
                        x = blk.data[a][c]
                        if x:
                            row[self.w_index(k, j, c, b)] -= x
                if ystart is not None:
                    for p_ in range(BL.cols):
                        x = BL.data[a][p_]
                        if x:
                            for q in range(R.rows):
                                if R.data[q][b]:
                                    row[ystart + p_ * R.rows + q] -= x * R.data[q][b]
                self.rows.append(row)
                self.rhs.append(-known.data[a][b])

    def add_site_equations(self, c: Sequence[int], pairs: Sequence[tuple[list[int], list[int]]],
                           diag: Mapping[int, _Diag]) -> None:
        """``U{c} x - y`` in the column lattice of ``B'{c}`` for each ``(x, y)``."""
        B, B2, P = self.B, self.B2, self.B.poset
        c = sorted(c)
        sub2 = B2.sub(c)
        row_off = {}
        t = 0
        for k in c:
            row_off[k] = t
            t += B.row_sizes[k]
        for x, y in pairs:
            zstart = self.size
            self.size += sub2.cols
            for r in self.rows:
                r.extend([0] * sub2.cols)
            for a_blk in c:
                Ua = diag[a_blk].U
                xa = x[row_off[a_blk]:row_off[a_blk] + B.row_sizes[a_blk]]
                known = Ua.apply(xa)
                for a in range(B.row_sizes[a_blk]):
                    row = [0] * self.size
                    for k in c:
                        if k != a_blk and P.leq(a_blk, k):
                            xk = x[row_off[k]:row_off[k] + B.row_sizes[k]]
                            for q, xv in enumerate(xk):
                                if xv:
                                    row[self.u_index(a_blk, k, a, q)] += xv
                    grow = row_off[a_blk] + a
                    for col in range(sub2.cols):
                        v = sub2.data[grow][col]
                        if v:
                            row[zstart + col] -= v
                    self.rows.append(row)
                    self.rhs.append(y[grow] - known[a])

    def solve(self) -> list[int] | None:
        if not self.rows:
            return [0] * self.size
        return solve_system(self.rows, self.rhs, self.size)


def _assemble(B: BlockMatrix, blocks, diag, system: _System, x: Sequence[int]) -> tuple[IntMatrix, IntMatrix]:
    m, n = B.row_sizes, B.col_sizes
    U = IntMatrix.zeros(B.matrix.rows, B.matrix.rows)
    W = IntMatrix.zeros(B.matrix.cols, B.matrix.cols)
    ro, co = B.row_offsets, B.col_offsets
    for i in blocks:
        Ui, Wi = diag[i].U, diag[i].W
        ystart = system.var.get(("Y", i, i))
        if ystart is not None:
            L, R = diag[i].L, diag[i].R
            Y = IntMatrix([[x[ystart + p_ * R.rows + q] for q in range(R.rows)] for p_ in range(L.cols)], L.cols, R.rows)
            Wi = Wi + L @ Y @ R
        for a in range(m[i]):
            for b in range(m[i]):
                U.data[ro[i] + a][ro[i] + b] = Ui.data[a][b]
        for a in range(n[i]):
            for b in range(n[i]):
                W.data[co[i] + a][co[i] + b] = Wi.data[a][b]
    for (kind, i, k), start in system.var.items():
        if kind == "Y":
            continue
        if kind == "U":
            for a in range(m[i]):
                for c in range(m[k]):
                    U.data[ro[i] + a][ro[k] + c] = x[start + a * m[k] + c]
        else:
            for c in range(n[i]):
                for b in range(n[k]):
                    W.data[co[i] + c][co[k] + b] = x[start + c * n[k] + b]
    return U, W


def _check_gcd(bm: BlockMatrix) -> None:
    for i in range(bm.poset.size):
        if bm.row_sizes[i] and bm.col_sizes[i]:
            g = matrix_gcd(bm.block(i, i))
            if g != 1:
                raise GcdNotOne(i, g)


def find_gl_equivalence(B: BlockMatrix, B2: BlockMatrix, *, fixed_w: Sequence[int] = (),
                        kappa: KWebIso | None = None, psi: Mapping[int, IntMatrix] | None = None,
                        anchors: Mapping[int, tuple[Sequence[int], Sequence[int]]] | None = None, budget: int = DEFAULT_BUDGET,
                        candidates: int = DEFAULT_CANDIDATES, require_gcd: bool = True) -> LiftResult:
    """A verified GL_P-equivalence ``(U, V)`` from ``B`` to ``B2``.

    ``fixed_w`` lists blocks where ``V{i}`` must be the identity. With
    ``kappa`` the equivalence must induce that K-web isomorphism. ``anchors``
    maps a block ``i`` to a pair ``(x, y)`` with ``[U{i} x] = [y]`` required in
    the cokernel of ``B2{i}``. Raises
    :class:`NotComparable` on a Smith form mismatch of a diagonal block and
    :class:`SearchBudgetExceeded` when the bounded search finds nothing.
    """
    P = B.poset
    if B.row_sizes != B2.row_sizes or B.col_sizes != B2.col_sizes or P != B2.poset:
        raise NotComparable("block sizes")
    for bm in (B, B2):
        mem = verify_membership(bm, "M_P")
        if not mem:
            raise ValueError(f"membership violation: {mem.report}")
        if require_gcd:
            _check_gcd(bm)
    if budget <= 0:
        raise SearchBudgetExceeded("lift: budget 0")
    webs = (compute_kweb(B), compute_kweb(B2)) if kappa is not None else None

    order = list(P.topological_order)
    cands: dict[int, list[_Diag]] = {}
    for i in order:
        s1, s2 = smith_normal_form(B.block(i, i)), smith_normal_form(B2.block(i, i))
        if s1.divisors != s2.divisors:
            raise NotComparable(f"K0{site_name([i])}")
        mi, ni = B.row_sizes[i], B.col_sizes[i]
        reps, _ = stabilizer_representatives(s1.divisors, mi, ni, cap=candidates)
        r = s1.rank
        lst = []
        for g, h in reps:
            Ui = s2.U_inv @ g @ s1.U
            Wi = s2.V @ h @ s1.V_inv
            if i in fixed_w:
                if Wi != IntMatrix.identity(ni):
                    continue
                L, R = IntMatrix.zeros(ni, 0), IntMatrix.zeros(0, ni)
            else:
                L = s2.V.submatrix(range(ni), range(r, ni))
                R = (h @ s1.V_inv).submatrix(range(r), range(ni))
            lst.append(_Diag(Ui, Wi, L, R))
        if kappa is not None:
            lst = [d for d in lst if _matches_diag(kappa, webs, i, d.U, d.W)]
        if psi and i in psi:
            k1, k2 = KerGroup(B.block(i, i)), KerGroup(B2.block(i, i))
            lst = [d for d in lst
                   if IntMatrix.from_columns([k2.coords(d.W.apply(b)) for b in k1.basis], k2.size) == psi[i]]
        if anchors and i in anchors:
            x, y = anchors[i]
            cg = CokGroup(B2.block(i, i))
            lst = [d for d in lst if cg.coords(d.U.apply(x)) == cg.coords(y)]
        if not lst:
            raise SearchBudgetExceeded(f"lift: no admissible diagonal block {i + 1}")
        cands[i] = lst

    site_pairs = _site_targets(kappa, webs) if kappa is not None else {}
    solves = 0
    diag: dict[int, _Diag] = {}

    def system_for(t: int) -> _System:
        blocks = order[:t + 1]
        sysm = _System(B, B2, blocks, diag)
        for i in blocks:
            for j in blocks:
                if i != j and P.leq(i, j):
                    sysm.add_pair_equations(i, j, diag)
        chosen = set(blocks)
        for c, pairs in site_pairs.items():
            if len(c) > 1 and c <= chosen:
                sysm.add_site_equations(sorted(c), pairs, diag)
        return sysm

    def needs_solve(t: int) -> bool:
        i = order[t]
        return any(P.lt(j, i) for j in order[:t])

    def conflict(t: int) -> set[int]:
        """Earlier positions whose choices share unknowns with the equations of position ``t``."""
        below = P.strict_down(order[t])
        return {s for s in range(t) if order[s] in below or any(P.leq(k, order[s]) for k in below)}

    everything = set(range(len(order)))

    def rec(t: int):
        """Conflict-directed backjumping: returns ``(solution, conflict positions)``."""
        nonlocal solves
        if t == len(order):
            sysm = system_for(t - 1) if order else None
            if sysm is None:
                return (IntMatrix.zeros(0, 0), IntMatrix.zeros(0, 0)), set()
            solves += 1
            x = sysm.solve()
            if x is None:
                return None, everything
            U, W = _assemble(B, order, diag, sysm, x)
            try:
                V = W.inverse()
                check_equivalence(U, V, B, B2)
            except (ValueError, NotAnEquivalence):
                return None, everything
            if kappa is not None and not induced_iso(U, V, B, B2, webs).equals(kappa, webs[1]):
                return None, everything
            return (U, V), set()
        conf: set[int] = set()
        for cand in cands[order[t]]:
            diag[order[t]] = cand
            if needs_solve(t) and t + 1 < len(order):
                if solves >= budget:
                    raise SearchBudgetExceeded(f"lift: budget {budget} exhausted")
                solves += 1
                if system_for(t).solve() is None:
                    conf |= conflict(t)
                    continue
            out, c = rec(t + 1)
            if out is not None:
                return out, set()
            if t not in c:
                diag.pop(order[t], None)
                return None, c
            conf |= c - {t}
            if solves >= budget:
                raise SearchBudgetExceeded(f"lift: budget {budget} exhausted")
        diag.pop(order[t], None)
        return None, conf

    out, _ = rec(0)
    if out is None:
        raise SearchBudgetExceeded("lift: candidate space exhausted")
    return LiftResult(out[0], out[1], solves)


def _matches_diag(kappa: KWebIso, webs, i: int, Ui: IntMatrix, Wi: IntMatrix) -> bool:
    w1, w2 = webs
    c = frozenset([i])
    g1, g2 = w1.cok[c], w2.cok[c]
    phi = IntMatrix.from_columns([g2.coords(Ui.apply(x)) for x in g1.generators()], g2.size)
    if g2.reduce_matrix(phi) != g2.reduce_matrix(kappa.phi[c]):
        return False
    if i in w1.ker:
        k1, k2 = w1.ker[i], w2.ker[i]
        psi = IntMatrix.from_columns([k2.coords(Wi.apply(b)) for b in k1.basis], k2.size)
        if psi != kappa.psi[i]:
            return False
    return True


def _site_targets(kappa: KWebIso, webs) -> dict[frozenset, list[tuple[list[int], list[int]]]]:
    w1, w2 = webs
    out = {}
    for c in w1.sites:
        if len(c) < 2:
            continue
        g1, g2 = w1.cok[c], w2.cok[c]
        phi = kappa.phi[c]
        pairs = []
        for t, x in enumerate(g1.generators()):
            pairs.append((x, g2.lift(phi.col(t))))
        out[c] = pairs
    return out


def lift_kweb_iso(B: BlockMatrix, B2: BlockMatrix, kappa: KWebIso, psi: Mapping[int, IntMatrix] | None = None,
                  *, budget: int = DEFAULT_BUDGET, candidates: int = DEFAULT_CANDIDATES) -> tuple[IntMatrix, IntMatrix]:
    """A GL_P-equivalence inducing ``kappa``; ``psi`` fixes the kernel maps of minimal blocks.

    The kernel map of block ``i`` is ``x -> V{i}^{-1} x`` in kernel coordinates.
    Raises :class:`GcdNotOne` when a nonempty diagonal block has entry gcd
    other than 1 and :class:`SearchBudgetExceeded` when nothing is found.
    """
    res = find_gl_equivalence(B, B2, kappa=kappa, psi=psi, budget=budget, candidates=candidates)
    return res.U, res.V


__all__ = ["find_gl_equivalence", "lift_kweb_iso", "stabilize", "permute_blocks", "stabilizer_generators",
           "stabilizer_representatives", "LiftResult", "DEFAULT_BUDGET"]
