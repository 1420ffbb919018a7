"""Positive factorization of SL_P-equivalences into basic elementary steps.

Given ``B, B'`` in ``M_P+`` and ``(U, V)`` in ``SL_P x SL_P`` with
``U B V = B'``, produce basic elementary steps (one ``+-1`` entry each) whose
left and right products are exactly ``U`` and ``V`` and such that every
intermediate matrix is strictly positive on all comparable blocks.

Diagonal blocks are handled one at a time: a subtraction that would create a
nonpositive row is preceded by nonnegative column additions, or replaced by a
signed transposition through a helper row; the accumulated permutation is
undone with three-cycles, each written as six basic elementary factors. When
``U{i} B{i}`` has no positive entry at all, a self-equivalence of ``B{i}`` built
from its rank-two corner is inserted first. Off-diagonal blocks are then
cleared block row by block row (for ``U``) and block column by block column (for
``V``), with nonnegative compensators keeping every entry positive.
"""

from __future__ import annotations

import random
from math import gcd
from typing import Sequence

from ..errors import HypothesisViolated, NotAnEquivalence, NotPositive, NotSL
from ..intmat import BlockMatrix, ElementaryStep, IntMatrix, smith_normal_form, step_products, verify_membership
from ..poset import Poset

MAX_DECOMPOSITION_STEPS = 200000
DECOMPOSITION_RETRIES = 20

# The fixed factorization of the three-cycle C = [[0,1,0],[0,0,1],[1,0,0]]:
# C = C0 C1 C2 C3 C4 C5, each factor a basic elementary matrix given by its
# off-diagonal entry (row, column, value) with 0-based positions.
THREE_CYCLE_ENTRIES = ((2, 1, -1), (1, 0, -1), (0, 2, -1), (0, 1, 1), (2, 0, 1), (1, 2, 1))


def three_cycle_factors() -> list[IntMatrix]:
    """The six factors ``C0 .. C5`` as 3x3 matrices."""
    out = []
    for a, b, x in THREE_CYCLE_ENTRIES:
        e = IntMatrix.identity(3)
        e.data[a][b] = x
        out.append(e)
    return out


def three_cycle_steps(a: int, b: int, c: int) -> list[ElementaryStep]:
    """Left steps (in application order) multiplying rows ``a, b, c`` by ``C``.

    Afterwards row ``a`` holds old row ``b``, row ``b`` old row ``c`` and row
    ``c`` old row ``a``.
    """
    idx = (a, b, c)
    return [ElementaryStep("left", idx[r], idx[s], x) for r, s, x in reversed(THREE_CYCLE_ENTRIES)]


# ---------------------------------------------------------------------------
# A matrix walk with checked steps
# ---------------------------------------------------------------------------

def _single(m: IntMatrix) -> BlockMatrix:
    return BlockMatrix(m, (m.rows,), (m.cols,), Poset(1))


class _Walk:
    """A block matrix and the steps applied so far; every step is checked
    for block legality and positivity of the entries it changes."""

    def __init__(self, bm: BlockMatrix):
        self.bm = bm
        self.m = bm.matrix.tolist()
        P = bm.poset
        rows, cols = bm.matrix.shape
        self.rb = [bm.row_block_of(r) for r in range(rows)]
        self.cb = [bm.col_block_of(c) for c in range(cols)]
        self.row_cols = [[c for c in range(cols) if P.leq(self.rb[r], self.cb[c])] for r in range(rows)]
        self.col_rows = [[r for r in range(rows) if P.leq(self.rb[r], self.cb[c])] for c in range(cols)]
        self.steps: list[ElementaryStep] = []

    @property
    def matrix(self) -> IntMatrix:
        return IntMatrix(self.m, len(self.m), self.bm.matrix.cols)

    def apply(self, s: ElementaryStep, times: int = 1) -> None:
        if times <= 0:
            return
        if not s.block_legal(self.bm):
            raise NotPositive("step", f"{s} is not block legal")
        m = self.m
        for _ in range(times):
            if s.side == "left":
                ri, rj = m[s.i], m[s.j]
                for k in range(len(ri)):
                    ri[k] += s.sign * rj[k]
                bad = [c for c in self.row_cols[s.i] if ri[c] <= 0]
                where = [(s.i, c) for c in bad]
            else:
                for r in m:
                    r[s.j] += s.sign * r[s.i]
                where = [(r, s.j) for r in self.col_rows[s.j] if m[r][s.j] <= 0]
            if where:
                r, c = where[0]
                raise NotPositive(f"block ({self.rb[r] + 1},{self.cb[c] + 1})",
                                  f"step {s} makes entry ({r + 1},{c + 1}) equal {m[r][c]}")
            self.steps.append(s)

    def run(self, steps: Sequence[ElementaryStep]) -> None:
        for s in steps:
            self.apply(s)


def reverse_steps(steps: Sequence[ElementaryStep]) -> list[ElementaryStep]:
    """Steps undoing ``steps``: inverses in reverse order."""
    return [s.inverse() for s in reversed(steps)]


def transpose_steps(steps: Sequence[ElementaryStep]) -> list[ElementaryStep]:
    """Steps acting on ``B`` the way ``steps`` act on ``B^T``."""
    return [ElementaryStep("right" if s.side == "left" else "left", s.j, s.i, s.sign) for s in steps]


def _sign(x: int) -> int:
    return (x > 0) - (x < 0)


def _need(value: int, unit: int) -> int:
    """How many additions of ``unit > 0`` make ``value`` positive."""
    return 0 if value > 0 else (-value) // unit + 1


# ---------------------------------------------------------------------------
# One diagonal block
# ---------------------------------------------------------------------------

def _next_reduction(S: list[list[int]]) -> tuple[int, int, int] | None:
    """Next row operation ``(i, j, s)``: row_i += s row_j, reducing ``S`` towards ``I``."""
    K = len(S)
    for c in range(K):
        col = [S[r][c] for r in range(K)]
        if all(col[r] == (r == c) for r in range(K)):
            continue
        below = [r for r in range(c, K) if col[r]]
        if len(below) >= 2:
            p = min(below, key=lambda r: (abs(col[r]), col[r] < 0, r != c))
            r = max((r for r in below if r != p), key=lambda r: abs(col[r]))
            return r, p, -_sign(col[r] * col[p])
        p = below[0]
        if p != c:
            return c, p, 1
        if col[c] == -1:
            return c + 1, c, -1
        r = next(r for r in range(c) if col[r])
        return r, c, -_sign(col[r])
    return None


def _greedy_reduction(S: list[list[int]]) -> tuple[int, int, int] | None:
    """The row operation shrinking the total absolute value of ``S`` most, if any."""
    best, op = 0, None
    K = len(S)
    for i in range(K):
        base = sum(abs(x) for x in S[i])
        for j in range(K):
            if i == j:
                continue
            for s in (1, -1):
                gain = base - sum(abs(x + s * y) for x, y in zip(S[i], S[j]))
                if gain > best:
                    best, op = gain, (i, j, s)
    return op


def _lead(row: Sequence[int]) -> int:
    return next((k for k, x in enumerate(row) if x), len(row))


def decompose_nonzero_rows(U: IntMatrix, B: IntMatrix) -> list[tuple[int, int, int]]:
    """Basic elementary factors ``E_1, ..., E_k`` (application order) with
    ``E_k ... E_1 = U`` such that no ``E_t ... E_1 B`` has a zero row.

    ``U`` is reduced to the identity by row operations; the visited states
    are exactly the partial products, read backwards. An operation that would
    put a row into the left kernel of ``B`` is preceded by adding a row that
    keeps it out. When the reduction cycles it is retried through a seeded
    random ``G``: ``U G^-1`` is reduced against ``G B`` (the states ``U`` to
    ``G``) and a checked random walk from ``I`` to ``G`` is undone.
    """
    if U.det() != 1:
        raise NotSL("the factor has determinant different from 1")
    K = U.rows
    for attempt in range(DECOMPOSITION_RETRIES + 1):
        if attempt == 0:
            G, walk = IntMatrix.identity(K), []
        else:
            G, walk = _random_walk(B, random.Random(attempt), 2 * K)
        ops = _reduce_avoiding_kernel(U @ G.inverse(), G @ B)
        if ops is not None:
            ops += [(i, j, -s) for i, j, s in reversed(walk)]
            return [(i, j, -s) for i, j, s in reversed(ops)]
    raise NotPositive("diagonal block", "elementary decomposition did not terminate")


def _random_walk(B: IntMatrix, rng: random.Random, length: int) -> tuple[IntMatrix, list[tuple[int, int, int]]]:
    """Row operations from ``I`` whose partial products never map a row of ``B`` to zero."""
    K = B.rows
    S = IntMatrix.identity(K).tolist()
    Bt = B.tolist()
    walk = []
    while len(walk) < length:
        i, j = rng.sample(range(K), 2)
        s = rng.choice((1, -1))
        row = [S[i][k] + s * S[j][k] for k in range(K)]
        if any(sum(row[k] * Bt[k][c] for k in range(K)) for c in range(B.cols)):
            S[i] = row
            walk.append((i, j, s))
    return IntMatrix(S), walk


def _reduce_avoiding_kernel(U: IntMatrix, B: IntMatrix) -> list[tuple[int, int, int]] | None:
    """Row operations taking ``U`` to ``I`` with no row ever in the left kernel of ``B``.

    ``None`` when the run revisits a state or exceeds the step bound.
    """
    S = U.tolist()
    K = len(S)
    Bt = B.tolist()

    def image(row):
        return [sum(row[k] * Bt[k][c] for k in range(K)) for c in range(B.cols)]

    def zero_after(i, j, s):
        return not any(image([S[i][k] + s * S[j][k] for k in range(K)]))

    ops: list[tuple[int, int, int]] = []
    seen = {tuple(map(tuple, S))}
    greedy = True
    while True:
        op = _greedy_reduction(S) if greedy else None
        if op is None:
            greedy = False
            op = _next_reduction(S)
        if op is None:
            return ops
        if len(ops) > MAX_DECOMPOSITION_STEPS:
            return None
        i, j, s = op
        if zero_after(i, j, s):
            if greedy:
                greedy = False
                continue
            # Rows supported on later columns survive the current column sweep,
            # so the detour is not undone by the next reduction.
            detour = None
            for u in sorted((u for u in range(K) if u not in (i, j)), key=lambda u: -_lead(S[u])):
                for t in (1, -1):
                    row = [S[i][k] + t * S[u][k] for k in range(K)]
                    after = [row[k] + s * S[j][k] for k in range(K)]
                    if any(image(row)) and any(image(after)):
                        detour = (i, u, t)
                        break
                if detour is not None:
                    break
            if detour is None:
                raise NotPositive("diagonal block", "cannot avoid a zero row")
            op = detour
        i, j, s = op
        for k in range(K):
            S[i][k] += s * S[j][k]
        ops.append(op)
        state = tuple(map(tuple, S))
        if state in seen:
            return None
        seen.add(state)


def _boost_columns(w: _Walk, diff, cols: Sequence[int]) -> None:
    """Right additions of one column making ``diff`` (a row combination) positive on ``cols``."""
    x = diff()
    c = max(cols, key=lambda k: x[k])
    if x[c] <= 0:
        raise NotPositive("diagonal block", "no positive entry to absorb a subtraction")
    for k in cols:
        if k != c:
            w.apply(ElementaryStep("right", c, k, 1), _need(x[k], x[c]))


def _absorb(w: _Walk, i: int, j: int, sign: int) -> tuple[int, int] | None:
    """Apply row_i += sign row_j positively, up to a signed transposition.

    Returns ``None`` when the step was applied as is, or ``(i, k)`` when the
    result is ``T E`` for the signed transposition ``T`` sending row ``k`` to
    row ``i`` and minus row ``i`` to row ``k``.
    """
    m = w.m
    cols = range(len(m[0]))
    if sign > 0:
        w.apply(ElementaryStep("left", i, j, 1))
        return None
    x = [m[i][c] - m[j][c] for c in cols]
    if any(v > 0 for v in x):
        _boost_columns(w, lambda: [m[i][c] - m[j][c] for c in cols], cols)
        w.apply(ElementaryStep("left", i, j, -1))
        return None
    _boost_columns(w, lambda: [m[j][c] - m[i][c] for c in cols], cols)
    k = next(k for k in range(len(m)) if k not in (i, j))
    for a, b, s in ((k, j, 1), (k, i, -1), (i, k, 1), (i, j, -1), (k, i, -1)):
        w.apply(ElementaryStep("left", a, b, s))
    return i, k


def _conjugate(S: IntMatrix, i: int, j: int, sign: int) -> tuple[int, int, int]:
    E = IntMatrix.identity(S.rows)
    E.data[i][j] = sign
    C = S @ E @ S.inverse()
    off = [(a, b, C[a, b]) for a in range(C.rows) for b in range(C.cols) if a != b and C[a, b]]
    (a, b, x), = off
    return a, b, x


def _cycle_decomposition(target: Sequence[int]) -> list[tuple[int, int, int]]:
    """Three-cycles whose product sends row ``target[r]`` to position ``r``."""
    K = len(target)
    arr = list(range(K))
    out = []
    for r in range(K):
        if arr[r] == target[r]:
            continue
        p = arr.index(target[r])
        q = next(q for q in range(r + 1, K) if q != p)
        out.append((r, p, q))
        arr[r], arr[p], arr[q] = arr[p], arr[q], arr[r]
    return out


def positive_left(B: IntMatrix, U: IntMatrix) -> list[ElementaryStep]:
    """Positive equivalence ``(U, I)`` from a positive ``B`` to ``U B > 0``.

    Right steps occur only as compensators and cancel out.
    """
    K = B.rows
    if K < 3:
        raise NotPositive("diagonal block", "needs at least three rows")
    elems = decompose_nonzero_rows(U, B)
    w = _Walk(_single(B))
    S = IntMatrix.identity(K)
    comp: list[ElementaryStep] = []
    for i, j, s in elems:
        a, b, x = _conjugate(S, i, j, s)
        n0 = len(w.steps)
        t = _absorb(w, a, b, x)
        comp.extend(st for st in w.steps[n0:] if st.side == "right")
        if t is not None:
            T = IntMatrix.identity(K)
            p, k = t
            T.data[p][p] = T.data[k][k] = 0
            T.data[p][k] = 1
            T.data[k][p] = -1
            S = T @ S
    if not S.is_nonnegative():
        raise NotPositive("diagonal block", "signed permutation left over")
    Sinv = S.inverse()
    target = [next(c for c in range(K) if Sinv[r, c]) for r in range(K)]
    for a, b, c in _cycle_decomposition(target):
        w.run(three_cycle_steps(a, b, c))
    w.run(reverse_steps(comp))
    if w.matrix != U @ B:
        raise NotAnEquivalence("positive left factorization does not reach U B")
    return w.steps


def positive_pair(B: IntMatrix, B2: IntMatrix, U: IntMatrix, W: IntMatrix) -> list[ElementaryStep]:
    """Positive equivalence ``(U, W^{-1})`` from ``B`` to ``B2`` when ``U B = B2 W``
    and ``U B`` has a positive entry."""
    UB = U @ B
    pos = [(i, j) for i in range(UB.rows) for j in range(UB.cols) if UB[i, j] > 0]
    if not pos:
        raise NotPositive("diagonal block", "U B has no positive entry")
    i, j = max(pos, key=lambda ij: UB[ij])
    q_steps = []
    for k in range(UB.cols):
        if k != j:
            q_steps += [ElementaryStep("right", j, k, 1)] * _need(UB[i, k], UB[i, j])
    Q = step_products(q_steps, B.rows, B.cols)[1]
    UBQ = UB @ Q
    p_steps = []
    for r in range(UB.rows):
        if r != i:
            cnt = max(_need(UBQ[r, k], UBQ[i, k]) for k in range(UB.cols))
            p_steps += [ElementaryStep("left", r, i, 1)] * cnt
    P = step_products(p_steps, B.rows, B.cols)[0]
    U1, B1, B3, W1 = P @ U, B @ Q, P @ B2, W @ Q
    steps_a = positive_left(B1, U1)
    steps_b = transpose_steps(positive_left(B3.transpose(), W1.transpose()))
    steps = q_steps + steps_a + reverse_steps(steps_b) + reverse_steps(p_steps)
    w = _Walk(_single(B))
    w.run(steps)
    if w.matrix != B2:
        raise NotAnEquivalence("positive pair factorization does not reach B'")
    return steps


def _det_one(m: IntMatrix, rows: bool) -> IntMatrix:
    """Negate the third row (or column) when needed to get determinant 1."""
    if m.det() == 1:
        return m
    out = m.copy()
    if rows:
        out.data[2] = [-x for x in out.data[2]]
    else:
        for r in out.data:
            r[2] = -r[2]
    return out


def _mixed_combination(a: Sequence[int], b: Sequence[int], bound: int = 60) -> tuple[int, int]:
    pairs = sorted(((x, y) for x in range(-bound, bound + 1) for y in range(-bound, bound + 1)
                    if gcd(x, y) == 1), key=lambda p: (abs(p[0]) + abs(p[1]), p))
    for x, y in pairs:
        r = [x * u + y * v for u, v in zip(a, b)]
        if any(t > 0 for t in r) and any(t < 0 for t in r):
            return x, y
    raise NotPositive("diagonal block", "no mixed-sign combination of the corner rows")


def _ext_gcd(a: int, b: int) -> tuple[int, int]:
    """``(x, y)`` with ``a x + b y = 1`` for coprime ``a, b``."""
    x0, y0, x1, y1, r0, r1 = 1, 0, 0, 1, a, b
    while r1:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return (x0, y0) if r0 == 1 else (-x0, -y0)


def _embed2(H: IntMatrix, size: int) -> IntMatrix:
    out = IntMatrix.identity(size)
    for a in range(2):
        for b in range(2):
            out.data[a][b] = H[a, b]
    return out


def _corner(B: IntMatrix) -> tuple[IntMatrix, IntMatrix]:
    """``X, Y`` in ``SL`` with ``X B Y = diag(1, 1, F)``."""
    snf = smith_normal_form(B)
    if len(snf.divisors) < 2 or snf.divisors[1] != 1:
        raise NotPositive("diagonal block", "Smith form has fewer than two 1's")
    return _det_one(snf.U, rows=True), _det_one(snf.V, rows=False)


def _has_positive(M: IntMatrix) -> bool:
    return any(x > 0 for row in M.data for x in row)


def _small_sl2(bound: int) -> list[IntMatrix]:
    r = range(-bound, bound + 1)
    out = [IntMatrix([[a, b], [c, d]]) for a in r for b in r for c in r for d in r if a * d - b * c == 1]
    return sorted(out, key=lambda H: (sum(abs(x) for row in H.data for x in row), H.tolist()))


def dominating_corner(B: IntMatrix, U: IntMatrix) -> tuple[IntMatrix, int]:
    """``H_m = [[m, -1], [1, 0]] H'`` with ``m`` one above the sign-domination threshold.

    ``H'`` in ``SL_2`` makes the first row ``r`` of ``H' (X B)(12; *)`` take
    both signs; with ``c`` the first column of ``X^{-1}``, the matrices built
    from ``H_m`` have the signs of ``m c r`` and ``m (U c) r`` wherever those
    are nonzero.
    """
    X, _ = _corner(B)
    XB = X @ B
    alpha, beta = _mixed_combination(XB.row(0), XB.row(1))
    x, y = _ext_gcd(alpha, beta)
    Hp = IntMatrix([[alpha, beta], [-y, x]])
    Xi = X.inverse()

    def A_of(m: int) -> IntMatrix:
        return Xi @ _embed2(IntMatrix([[m, -1], [1, 0]]) @ Hp, B.rows) @ X

    threshold = 0
    for M in (IntMatrix.identity(B.rows), U):
        K0 = M @ A_of(0) @ B
        L = M @ A_of(1) @ B - K0
        for r in range(L.rows):
            for c in range(L.cols):
                if L[r, c]:
                    threshold = max(threshold, abs(K0[r, c]) // abs(L[r, c]))
    m = threshold + 1
    return IntMatrix([[m, -1], [1, 0]]) @ Hp, m


def corner_self_equivalence(B: IntMatrix, U: IntMatrix, small: int = 2) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """``(A, Bm, H)`` with ``A B Bm = B`` where ``A B`` and ``U A B`` have positive entries.

    ``A = X^{-1} (H + I) X`` and ``Bm = Y (H + I)^{-1} Y^{-1}`` for the corner
    ``X B Y = diag(1, 1, F)``. Small ``H`` (entries up to ``small``) are tried
    first, smallest ``A`` winning; the dominating ``H_m`` always works.
    """
    X, Y = _corner(B)
    Xi, Yi = X.inverse(), Y.inverse()
    best = None
    for H in _small_sl2(small):
        A = Xi @ _embed2(H, B.rows) @ X
        if _has_positive(A @ B) and _has_positive(U @ A @ B):
            size = sum(abs(x) for M in (A, U @ A) for row in M.data for x in row)
            if best is None or size < best[0]:
                best = (size, H)
    H = best[1] if best else dominating_corner(B, U)[0]
    A = Xi @ _embed2(H, B.rows) @ X
    Bm = Y @ _embed2(H, B.cols).inverse() @ Yi
    if A @ B @ Bm != B:
        raise NotAnEquivalence("corner construction is not a self-equivalence")
    return A, Bm, H


def block_positive_steps(B: IntMatrix, U: IntMatrix, V: IntMatrix) -> list[ElementaryStep]:
    """Positive equivalence ``(U, V)`` from a positive block ``B`` to ``U B V``."""
    B2 = U @ B @ V
    if U == IntMatrix.identity(B.rows) and V == IntMatrix.identity(B.cols):
        return []
    if any(x > 0 for row in (U @ B).tolist() for x in row):
        return positive_pair(B, B2, U, V.inverse())
    A, Bm, _ = corner_self_equivalence(B, U)
    back = positive_pair(B, B, A, Bm.inverse())
    forward = positive_pair(B, B2, U @ A, (Bm @ V).inverse())
    return reverse_steps(back) + forward


# ---------------------------------------------------------------------------
# Whole matrices over a poset
# ---------------------------------------------------------------------------

def _square(bm: BlockMatrix, sizes: Sequence[int], M: IntMatrix) -> BlockMatrix:
    return BlockMatrix(M, sizes, sizes, bm.poset)


def _lift_diagonal_step(w: _Walk, s: ElementaryStep) -> None:
    """Apply a diagonal-block step, first absorbing its effect on comparable blocks."""
    m = w.m
    if s.sign > 0:
        w.apply(s)
        return
    if s.side == "left":
        i, j = s.i, s.j
        blk = w.rb[i]
        diag = [c for c in w.row_cols[i] if w.cb[c] == blk]
        r = max(diag, key=lambda c: m[i][c] - m[j][c])
        unit = m[i][r] - m[j][r]
        for c in w.row_cols[i]:
            if w.cb[c] != blk and unit > 0:
                w.apply(ElementaryStep("right", r, c, 1), _need(m[i][c] - m[j][c], unit))
    else:
        i, j = s.i, s.j
        blk = w.cb[j]
        diag = [r for r in w.col_rows[j] if w.rb[r] == blk]
        t = max(diag, key=lambda r: m[r][j] - m[r][i])
        unit = m[t][j] - m[t][i]
        for r in w.col_rows[j]:
            if w.rb[r] != blk and unit > 0:
                w.apply(ElementaryStep("left", r, t, 1), _need(m[r][j] - m[r][i], unit))
    w.apply(s)


def _sweep_rows(w: _Walk, U: IntMatrix) -> None:
    """Apply a block unitriangular ``U`` on the left with column compensators."""
    bm = w.bm
    P = bm.poset
    roff = bm.row_offsets
    order = P.topological_order
    for i in order:
        rows_i = range(roff[i], roff[i + 1])
        for j in order:
            if j == i or not P.leq(i, j):
                continue
            rows_j = range(roff[j], roff[j + 1])
            N = {(p, q): U[p, q] for p in rows_i for q in rows_j if U[p, q]}
            if not N:
                continue
            for (p, q), x in N.items():
                if x > 0:
                    w.apply(ElementaryStep("left", p, q, 1), x)
            neg = {pq: -x for pq, x in N.items() if x < 0}
            if not neg:
                continue
            m = w.m
            cols = len(m[0])
            final = {p: list(m[p]) for p in rows_i}
            for (p, q), x in neg.items():
                for c in range(cols):
                    final[p][c] -= x * m[q][c]
            diag = [c for c in range(cols) if w.cb[c] == i]
            r = max(diag, key=lambda c: min(m[p][c] for p in rows_i))
            for c in range(cols):
                if w.cb[c] == i:
                    continue
                cnt = max((_need(final[p][c], m[p][r]) for p in rows_i if c in w.row_cols[p]), default=0)
                w.apply(ElementaryStep("right", r, c, 1), cnt)
            for (p, q), x in neg.items():
                w.apply(ElementaryStep("left", p, q, -1), x)


def _column_factors(V: IntMatrix, bm: BlockMatrix) -> list[tuple[int, IntMatrix]]:
    """``V = V_1 V_2 ...``, each factor nontrivial in one block column only."""
    P = bm.poset
    coff = bm.col_offsets
    acc = IntMatrix.identity(V.rows)
    out = []
    for i in P.topological_order:
        T = acc.inverse() @ V
        F = IntMatrix.identity(V.rows)
        for c in range(coff[i], coff[i + 1]):
            for r in range(V.rows):
                F.data[r][c] = T[r, c]
        out.append((i, F))
        acc = acc @ F
    if acc != V:
        raise NotAnEquivalence("block column factorization failed")
    return out


def _sweep_cols(w: _Walk, V: IntMatrix) -> list[ElementaryStep]:
    """Apply a block unitriangular ``V`` on the right with row compensators.

    Returns the compensator steps in order of application.
    """
    bm = w.bm
    coff = bm.col_offsets
    comps: list[ElementaryStep] = []
    for i, F in _column_factors(V, bm):
        cols_i = range(coff[i], coff[i + 1])
        N = {(c, d): F[c, d] for d in cols_i for c in range(F.rows) if c not in cols_i and F[c, d]}
        for (c, d), x in N.items():
            if x > 0:
                w.apply(ElementaryStep("right", c, d, 1), x)
        neg = {cd: -x for cd, x in N.items() if x < 0}
        if not neg:
            continue
        m = w.m

        def final_row(r):
            out = list(m[r])
            for (c, d), x in neg.items():
                out[d] -= x * m[r][c]
            return out

        rows = [r for r in range(len(m)) if any(r in w.col_rows[d] for d in cols_i)]
        while True:
            fin = {r: final_row(r) for r in rows}
            bad = [r for r in rows if any(fin[r][d] <= 0 for d in cols_i if r in w.col_rows[d])]
            if not bad:
                break
            r = max(bad, key=lambda r: w.rb[r])
            good = [t for t in rows if t not in bad and w.rb[t] != w.rb[r] and bm.poset.leq(w.rb[r], w.rb[t])
                    and all(fin[t][d] > 0 for d in cols_i)]
            if not good:
                raise NotPositive(f"block column {i + 1}", f"no row can compensate row {r + 1}")
            t = max(good, key=lambda t: min(fin[t][d] for d in cols_i))
            cnt = max(_need(fin[r][d], fin[t][d]) for d in cols_i if r in w.col_rows[d])
            st = ElementaryStep("left", r, t, 1)
            w.apply(st, cnt)
            comps += [st] * cnt
        for (c, d), x in neg.items():
            w.apply(ElementaryStep("right", c, d, -1), x)
    return comps


def positive_factorization(B: BlockMatrix, B2: BlockMatrix, U: IntMatrix, V: IntMatrix) -> list[ElementaryStep]:
    """Elementary steps from ``B`` to ``B2 = U B V`` staying in ``M_P+``.

    The left steps multiply to ``U`` and the right steps to ``V``.
    """
    for name, bm in (("B", B), ("B'", B2)):
        ok = verify_membership(bm, "M_P+")
        if not ok:
            raise NotPositive(name, ok.report)
    for name, M, sizes in (("U", U, B.row_sizes), ("V", V, B.col_sizes)):
        ok = verify_membership(BlockMatrix(M, sizes, sizes, B.poset), "SL_P")
        if not ok:
            raise NotSL(f"{name}: {ok.report}")
    if U @ B.matrix @ V != B2.matrix:
        raise NotAnEquivalence("U B V differs from B'")
    N = B.poset.size
    Ub = _square(B, B.row_sizes, U)
    Vb = _square(B, B.col_sizes, V)
    w = _Walk(B)
    roff, coff = B.row_offsets, B.col_offsets
    for i in range(N):
        if B.row_sizes[i] == 0:
            if Vb.block(i, i) != IntMatrix.identity(B.col_sizes[i]):
                raise HypothesisViolated(f"block {i + 1} has no rows but V{{{i + 1}}} is not the identity")
            continue
        local = block_positive_steps(B.block(i, i), Ub.block(i, i), Vb.block(i, i))
        for s in local:
            off = roff[i] if s.side == "left" else coff[i]
            _lift_diagonal_step(w, ElementaryStep(s.side, s.i + off, s.j + off, s.sign))
    Uc, Vc = step_products(w.steps, U.rows, V.rows)
    _sweep_rows(w, U @ Uc.inverse())
    Uc, Vc = step_products(w.steps, U.rows, V.rows)
    if Uc != U:
        raise NotAnEquivalence("row sweep did not reach U")
    # Remaining: C -> B2 with C (Vc^{-1} V) = B2. Walk backwards from B2.
    back = _Walk(B2)
    comps = _sweep_cols(back, (Vc.inverse() @ V).inverse())
    w.run(comps)
    if w.matrix != back.matrix:
        raise NotAnEquivalence("column sweep endpoints do not meet")
    w.run(reverse_steps(back.steps))
    Uf, Vf = step_products(w.steps, U.rows, V.rows)
    if w.matrix != B2.matrix or Uf != U or Vf != V:
        raise NotAnEquivalence("positive factorization does not reproduce (U, V)")
    return w.steps


__all__ = ["positive_factorization", "block_positive_steps", "positive_left", "positive_pair",
           "corner_self_equivalence", "dominating_corner", "decompose_nonzero_rows", "three_cycle_factors", "three_cycle_steps",
           "THREE_CYCLE_ENTRIES", "reverse_steps", "transpose_steps"]
