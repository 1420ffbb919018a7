"""Exact integer matrices: Smith normal form with witnesses, block matrices
over a poset, elementary steps, and cokernel/kernel presentations.

All arithmetic is on Python ints. Empty matrices (zero rows or zero columns)
are first-class values and keep their shape.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd
from typing import Iterable, Sequence

from .poset import Poset


class IntMatrix:
    """Dense integer matrix that remembers its shape even when empty."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, data: Sequence[Sequence[int]] = (), rows: int | None = None, cols: int | None = None):
        data = [list(map(int, r)) for r in data]
        if rows is None:
            rows = len(data)
        if cols is None:
            cols = len(data[0]) if data else 0
        if len(data) != rows and not (rows > 0 and not data):
            raise ValueError("row count does not match data")
        if not data:
            data = [[0] * cols for _ in range(rows)]
        for r in data:
            if len(r) != cols:
                raise ValueError("ragged matrix data")
        self.rows = rows
        self.cols = cols
        self.data = data

    # -- constructors --------------------------------------------------
    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls([[0] * cols for _ in range(rows)], rows, cols)

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls([[int(i == j) for j in range(n)] for i in range(n)], n, n)

    @classmethod
    def diag(cls, entries: Sequence[int], rows: int | None = None, cols: int | None = None) -> "IntMatrix":
        rows = len(entries) if rows is None else rows
        cols = len(entries) if cols is None else cols
        m = cls.zeros(rows, cols)
        for i, d in enumerate(entries):
            m.data[i][i] = d
        return m

    @classmethod
    def column(cls, vec: Sequence[int]) -> "IntMatrix":
        return cls([[v] for v in vec], len(vec), 1)

    @classmethod
    def from_columns(cls, cols: Sequence[Sequence[int]], rows: int) -> "IntMatrix":
        m = cls.zeros(rows, len(cols))
        for j, c in enumerate(cols):
            for i in range(rows):
                m.data[i][j] = c[i]
        return m

    # -- basics ----------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def copy(self) -> "IntMatrix":
        return IntMatrix([r[:] for r in self.data], self.rows, self.cols)

    def tolist(self) -> list[list[int]]:
        return [r[:] for r in self.data]

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.data[i][j]

    def __setitem__(self, ij: tuple[int, int], value: int) -> None:
        i, j = ij
        self.data[i][j] = value

    def row(self, i: int) -> list[int]:
        return self.data[i][:]

    def col(self, j: int) -> list[int]:
        return [self.data[i][j] for i in range(self.rows)]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IntMatrix):
            return NotImplemented
        return self.shape == other.shape and self.data == other.data

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, tuple(map(tuple, self.data))))

    def __repr__(self) -> str:
        return f"IntMatrix({self.data}, rows={self.rows}, cols={self.cols})"

    def __str__(self) -> str:
        if self.rows == 0 or self.cols == 0:
            return f"[empty {self.rows}x{self.cols}]"
        width = max(len(str(x)) for r in self.data for x in r)
        return "\n".join("[" + " ".join(str(x).rjust(width) for x in r) + "]" for r in self.data)

    # -- arithmetic -------------------------------------------------------
    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        out = IntMatrix.zeros(self.rows, other.cols)
        od = other.data
        for i, r in enumerate(self.data):
            acc = out.data[i]
            for k, a in enumerate(r):
                if a:
                    ok = od[k]
                    for j in range(other.cols):
                        b = ok[j]
                        if b:
                            acc[j] += a * b
        return out

    def __add__(self, other: "IntMatrix") -> "IntMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return IntMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.data, other.data)], self.rows, self.cols)

    def __sub__(self, other: "IntMatrix") -> "IntMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return IntMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self.data, other.data)], self.rows, self.cols)

    def __neg__(self) -> "IntMatrix":
        return IntMatrix([[-a for a in r] for r in self.data], self.rows, self.cols)

    def scale(self, k: int) -> "IntMatrix":
        return IntMatrix([[k * a for a in r] for r in self.data], self.rows, self.cols)

    def apply(self, vec: Sequence[int]) -> list[int]:
        if len(vec) != self.cols:
            raise ValueError("vector length mismatch")
        return [sum(a * b for a, b in zip(r, vec)) for r in self.data]

    def transpose(self) -> "IntMatrix":
        return IntMatrix([[self.data[i][j] for i in range(self.rows)] for j in range(self.cols)], self.cols, self.rows)

    T = property(transpose)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "IntMatrix":
        return IntMatrix([[self.data[i][j] for j in cols] for i in rows], len(rows), len(cols))

    def hstack(self, other: "IntMatrix") -> "IntMatrix":
        if self.rows != other.rows:
            raise ValueError("row mismatch")
        return IntMatrix([a + b for a, b in zip(self.data, other.data)], self.rows, self.cols + other.cols)

    def vstack(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.cols:
            raise ValueError("column mismatch")
        return IntMatrix([r[:] for r in self.data] + [r[:] for r in other.data], self.rows + other.rows, self.cols)

    def is_zero(self) -> bool:
        return all(a == 0 for r in self.data for a in r)

    def is_positive(self) -> bool:
        return all(a > 0 for r in self.data for a in r)

    def is_nonnegative(self) -> bool:
        return all(a >= 0 for r in self.data for a in r)

    def det(self) -> int:
        if self.rows != self.cols:
            raise ValueError("determinant of a non-square matrix")
        return bareiss_det(self.data)

    def inverse(self) -> "IntMatrix":
        """Inverse of a unimodular matrix."""
        if self.rows != self.cols:
            raise ValueError("inverse of a non-square matrix")
        res = smith_normal_form(self)
        if any(d != 1 for d in res.divisors) or len(res.divisors) != self.rows:
            raise ValueError("matrix is not unimodular")
        # U M V = I  =>  M^{-1} = V U
        return res.V @ res.U


def bareiss_det(rows: Sequence[Sequence[int]]) -> int:
    n = len(rows)
    if n == 0:
        return 1
    a = [list(r) for r in rows]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def as_matrix(m: IntMatrix | Sequence[Sequence[int]]) -> IntMatrix:
    return m if isinstance(m, IntMatrix) else IntMatrix(m)


# ---------------------------------------------------------------------------
# Smith normal form
# ---------------------------------------------------------------------------

@dataclass
class SNFResult:
    """``U @ A @ V == D`` with ``D`` diagonal and ``d_i | d_{i+1}``.

    ``U_inv`` and ``V_inv`` are tracked alongside so that cokernel generators
    and kernel coordinates never require a separate inversion.
    """

    D: IntMatrix
    U: IntMatrix
    V: IntMatrix
    U_inv: IntMatrix
    V_inv: IntMatrix
    divisors: tuple[int, ...]

    @property
    def rank(self) -> int:
        return len(self.divisors)


def smith_normal_form(m: IntMatrix | Sequence[Sequence[int]]) -> SNFResult:
    """Smith normal form with unimodular witnesses.

    Pivot rule: the nonzero entry of least absolute value in the active
    submatrix, ties broken row-major. Output is deterministic.
    """
    a_mat = as_matrix(m)
    rows, cols = a_mat.shape
    a = a_mat.tolist()
    U = IntMatrix.identity(rows).data
    Ui = IntMatrix.identity(rows).data
    V = IntMatrix.identity(cols).data
    Vi = IntMatrix.identity(cols).data

    def row_swap(i, j):
        a[i], a[j] = a[j], a[i]
        U[i], U[j] = U[j], U[i]
        for r in Ui:
            r[i], r[j] = r[j], r[i]

    def col_swap(i, j):
        for r in a:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]
        Vi[i], Vi[j] = Vi[j], Vi[i]

    def row_add(i, j, q):
        # row_i += q * row_j
        ai, aj = a[i], a[j]
        for k in range(cols):
            ai[k] += q * aj[k]
        ui, uj = U[i], U[j]
        for k in range(rows):
            ui[k] += q * uj[k]
        for r in Ui:  # column j -= q * column i
            r[j] -= q * r[i]

    def col_add(i, j, q):
        # col_j += q * col_i
        for r in a:
            r[j] += q * r[i]
        for r in V:
            r[j] += q * r[i]
        vi, vj = Vi[i], Vi[j]  # row i -= q * row j
        for k in range(cols):
            vi[k] -= q * vj[k]

    def row_neg(i):
        a[i] = [-x for x in a[i]]
        U[i] = [-x for x in U[i]]
        for r in Ui:
            r[i] = -r[i]

    t = 0
    divisors = []
    while t < min(rows, cols):
        while True:
            best = None
            for i in range(t, rows):
                ai = a[i]
                for j in range(t, cols):
                    x = ai[j]
                    if x and (best is None or abs(x) < best[0]):
                        best = (abs(x), i, j)
            if best is None:
                break
            _, pi, pj = best
            if pi != t:
                row_swap(t, pi)
            if pj != t:
                col_swap(t, pj)
            p = a[t][t]
            dirty = False
            for i in range(t + 1, rows):
                if a[i][t]:
                    q = a[i][t] // p
                    if q:
                        row_add(i, t, -q)
                    if a[i][t]:
                        dirty = True
            for j in range(t + 1, cols):
                if a[t][j]:
                    q = a[t][j] // p
                    if q:
                        col_add(t, j, -q)
                    if a[t][j]:
                        dirty = True
            if dirty:
                continue
            bad = None
            for i in range(t + 1, rows):
                for j in range(t + 1, cols):
                    if a[i][j] % p:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            row_add(t, bad, 1)
        if best is None:
            break
        if a[t][t] < 0:
            row_neg(t)
        divisors.append(a[t][t])
        t += 1
    return SNFResult(
        D=IntMatrix(a, rows, cols),
        U=IntMatrix(U, rows, rows),
        V=IntMatrix(V, cols, cols),
        U_inv=IntMatrix(Ui, rows, rows),
        V_inv=IntMatrix(Vi, cols, cols),
        divisors=tuple(divisors),
    )


def matrix_gcd(m: IntMatrix | Sequence[Sequence[int]]) -> int:
    """gcd of all entries; 0 for the zero or empty matrix."""
    g = 0
    for r in as_matrix(m).data:
        for x in r:
            g = gcd(g, x)
    return g


# ---------------------------------------------------------------------------
# Abelian groups, cokernels, kernels, lattices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AbelianGroupPresentation:
    """``Z/t_1 + ... + Z/t_k + Z^rank`` with ``t_1 | t_2 | ...`` and every ``t_i > 1``."""

    torsion: tuple[int, ...]
    rank: int

    def is_trivial(self) -> bool:
        return not self.torsion and self.rank == 0

    @property
    def order(self) -> int | None:
        if self.rank:
            return None
        out = 1
        for t in self.torsion:
            out *= t
        return out

    def __str__(self) -> str:
        parts = [f"Z/{t}" for t in self.torsion] + ["Z"] * self.rank
        return " + ".join(parts) if parts else "0"


def cokernel(m: IntMatrix | Sequence[Sequence[int]]) -> AbelianGroupPresentation:
    """Presentation of ``Z^rows / M Z^cols``."""
    mat = as_matrix(m)
    res = smith_normal_form(mat)
    torsion = tuple(d for d in res.divisors if d != 1)
    return AbelianGroupPresentation(torsion, mat.rows - res.rank)


def kernel_basis(m: IntMatrix | Sequence[Sequence[int]]) -> list[list[int]]:
    """Basis of ``ker M`` in ``Z^cols``: the SNF column witnesses at zero pivots."""
    mat = as_matrix(m)
    res = smith_normal_form(mat)
    return [res.V.col(j) for j in range(res.rank, mat.cols)]


def solve_integer(m: IntMatrix, rhs: Sequence[int]) -> list[int] | None:
    """An integer solution ``x`` of ``m x = rhs`` or ``None``."""
    res = smith_normal_form(m)
    y = res.U.apply(rhs)
    x_snf = [0] * m.cols
    for i, d in enumerate(res.divisors):
        if y[i] % d:
            return None
        x_snf[i] = y[i] // d
    if any(y[i] for i in range(res.rank, m.rows)):
        return None
    return res.V.apply(x_snf)


def in_lattice(vec: Sequence[int], gens: IntMatrix) -> bool:
    """Whether ``vec`` is an integer combination of the columns of ``gens``."""
    if gens.cols == 0:
        return not any(vec)
    return solve_integer(gens, vec) is not None


def lattices_equal(a: IntMatrix, b: IntMatrix) -> bool:
    return all(in_lattice(a.col(j), b) for j in range(a.cols)) and all(
        in_lattice(b.col(j), a) for j in range(b.cols))


def is_primitive(m: IntMatrix) -> bool:
    """Whether the rows of ``m`` extend to a unimodular matrix."""
    if m.rows == 0:
        return True
    res = smith_normal_form(m)
    return res.rank == m.rows and all(d == 1 for d in res.divisors)


def complete_to_unimodular(m: IntMatrix) -> IntMatrix:
    """Rows of ``m`` followed by completion rows, determinant +-1.

    ``m`` must be primitive (see :func:`is_primitive`).
    """
    t, n = m.shape
    res = smith_normal_form(m)
    if res.rank != t or any(d != 1 for d in res.divisors):
        raise ValueError("rows are not primitive")
    # U m V = [I 0]  =>  m = U^{-1} [I 0] V^{-1}
    left = IntMatrix.identity(n)
    for i in range(t):
        for j in range(t):
            left.data[i][j] = res.U_inv.data[i][j]
    return left @ res.V_inv


# ---------------------------------------------------------------------------
# Block matrices over a poset
# ---------------------------------------------------------------------------

def _offsets(sizes: Sequence[int]) -> list[int]:
    out = [0]
    for s in sizes:
        out.append(out[-1] + s)
    return out


@dataclass
class BlockMatrix:
    """Integer matrix partitioned by row sizes ``m`` and column sizes ``n``
    over a common poset."""

    matrix: IntMatrix
    row_sizes: tuple[int, ...]
    col_sizes: tuple[int, ...]
    poset: Poset

    def __post_init__(self):
        self.row_sizes = tuple(self.row_sizes)
        self.col_sizes = tuple(self.col_sizes)
        if len(self.row_sizes) != self.poset.size or len(self.col_sizes) != self.poset.size:
            raise ValueError("multiindex length does not match poset size")
        if sum(self.row_sizes) != self.matrix.rows or sum(self.col_sizes) != self.matrix.cols:
            raise ValueError("multiindex sums do not match matrix shape")

    @property
    def row_offsets(self) -> list[int]:
        return _offsets(self.row_sizes)

    @property
    def col_offsets(self) -> list[int]:
        return _offsets(self.col_sizes)

    def row_indices(self, blocks: Iterable[int]) -> list[int]:
        off = self.row_offsets
        return [r for b in sorted(blocks) for r in range(off[b], off[b + 1])]

    def col_indices(self, blocks: Iterable[int]) -> list[int]:
        off = self.col_offsets
        return [c for b in sorted(blocks) for c in range(off[b], off[b + 1])]

    def block(self, i: int, j: int) -> IntMatrix:
        return self.matrix.submatrix(self.row_indices([i]), self.col_indices([j]))

    def sub(self, rows: Iterable[int], cols: Iterable[int] | None = None) -> IntMatrix:
        """``B{rows, cols}``; with one argument the principal block ``B{c}``."""
        rows = list(rows)
        cols = rows if cols is None else list(cols)
        return self.matrix.submatrix(self.row_indices(rows), self.col_indices(cols))

    def row_block_of(self, r: int) -> int:
        off = self.row_offsets
        for b in range(len(self.row_sizes)):
            if off[b] <= r < off[b + 1]:
                return b
        raise IndexError(r)

    def col_block_of(self, c: int) -> int:
        off = self.col_offsets
        for b in range(len(self.col_sizes)):
            if off[b] <= c < off[b + 1]:
                return b
        raise IndexError(c)

    def with_matrix(self, matrix: IntMatrix) -> "BlockMatrix":
        return BlockMatrix(matrix, self.row_sizes, self.col_sizes, self.poset)

    def transpose(self) -> "BlockMatrix":
        """Transpose over the opposite order."""
        return BlockMatrix(self.matrix.transpose(), self.col_sizes, self.row_sizes, self.poset.opposite())

    def square_row_structure(self) -> "BlockMatrix":
        """Shape bookkeeping helper: row sizes used on both sides (for ``U``)."""
        return BlockMatrix(IntMatrix.identity(self.matrix.rows), self.row_sizes, self.row_sizes, self.poset)


@dataclass
class Membership:
    ok: bool
    report: str = ""

    def __bool__(self) -> bool:
        return self.ok


MEMBERSHIP_CLASSES = ("M_P", "GL_P", "SL_P", "M_P+")


def snf_ones(m: IntMatrix) -> int:
    return sum(1 for d in smith_normal_form(m).divisors if d == 1)


def verify_membership(bm: BlockMatrix, cls: str) -> Membership:
    """Check ``bm`` against one of ``M_P``, ``GL_P``, ``SL_P``, ``M_P+``."""
    if cls not in MEMBERSHIP_CLASSES:
        raise ValueError(f"unknown class {cls!r}")
    P = bm.poset
    N = P.size
    for i in range(N):
        for j in range(N):
            if not P.leq(i, j) and not bm.block(i, j).is_zero():
                return Membership(False, f"block ({i + 1},{j + 1}) nonzero but {i + 1} is not below {j + 1}")
    if cls == "M_P":
        return Membership(True)
    if cls in ("GL_P", "SL_P"):
        for i in range(N):
            if bm.row_sizes[i] != bm.col_sizes[i]:
                return Membership(False, f"diagonal block {i + 1} is not square")
            if bm.row_sizes[i] == 0:
                continue  # empty block counts as determinant +1
            d = bm.block(i, i).det()
            if d not in (1, -1) or (cls == "SL_P" and d != 1):
                return Membership(False, f"diagonal block {i + 1} has determinant {d}")
        return Membership(True)
    # M_P+
    for i in range(N):
        blk = bm.block(i, i)
        if blk.rows == 0 or blk.cols == 0:
            continue
        if blk.rows < 3 or blk.cols < 3:
            return Membership(False, f"diagonal block {i + 1} has size {blk.rows}x{blk.cols} (< 3)")
        if not blk.is_positive():
            return Membership(False, f"diagonal block {i + 1} is not strictly positive")
        if snf_ones(blk) < 2:
            return Membership(False, f"diagonal block {i + 1} has fewer than two 1's in its Smith form")
    for i in range(N):
        for j in range(N):
            if i != j and P.leq(i, j):
                blk = bm.block(i, j)
                if blk.rows and blk.cols and not blk.is_positive():
                    return Membership(False, f"off-diagonal block ({i + 1},{j + 1}) is not strictly positive")
    return Membership(True)


# ---------------------------------------------------------------------------
# Elementary steps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ElementaryStep:
    """A basic elementary matrix acting on one side.

    ``side == "left"``: row ``j`` is added ``sign`` times into row ``i``
    (multiplication by ``E_(i,j)^{sign}`` on the left).
    ``side == "right"``: column ``i`` is added ``sign`` times into column ``j``
    (multiplication by ``E_(i,j)^{sign}`` on the right).
    """

    side: str
    i: int
    j: int
    sign: int = 1

    def __post_init__(self):
        if self.side not in ("left", "right"):
            raise ValueError("side must be 'left' or 'right'")
        if self.i == self.j:
            raise ValueError("elementary step needs distinct indices")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    def inverse(self) -> "ElementaryStep":
        return ElementaryStep(self.side, self.i, self.j, -self.sign)

    def matrix(self, size: int) -> IntMatrix:
        e = IntMatrix.identity(size)
        e.data[self.i][self.j] = self.sign
        return e

    def apply(self, m: IntMatrix) -> IntMatrix:
        out = m.copy()
        if self.side == "left":
            ri, rj = out.data[self.i], out.data[self.j]
            for k in range(out.cols):
                ri[k] += self.sign * rj[k]
        else:
            for r in out.data:
                r[self.j] += self.sign * r[self.i]
        return out

    def block_legal(self, bm: BlockMatrix) -> bool:
        """Whether the step matrix lies in ``SL_P`` for the block structure."""
        if self.side == "left":
            return bm.poset.leq(bm.row_block_of(self.i), bm.row_block_of(self.j))
        return bm.poset.leq(bm.col_block_of(self.i), bm.col_block_of(self.j))

    def __str__(self) -> str:
        op = "+" if self.sign > 0 else "-"
        if self.side == "left":
            return f"row{op} {self.j + 1}->{self.i + 1}"
        return f"col{op} {self.i + 1}->{self.j + 1}"


def apply_steps(m: IntMatrix, steps: Iterable[ElementaryStep]) -> IntMatrix:
    for s in steps:
        m = s.apply(m)
    return m


def step_products(steps: Sequence[ElementaryStep], rows: int, cols: int) -> tuple[IntMatrix, IntMatrix]:
    """``(U, V)`` with ``apply_steps(B, steps) == U @ B @ V``."""
    U = IntMatrix.identity(rows)
    V = IntMatrix.identity(cols)
    for s in steps:
        if s.side == "left":
            U = s.apply(U)
        else:
            V = s.apply(V)
    return U, V


def block_diag(*mats: IntMatrix) -> IntMatrix:
    rows = sum(m.rows for m in mats)
    cols = sum(m.cols for m in mats)
    out = IntMatrix.zeros(rows, cols)
    r0 = c0 = 0
    for m in mats:
        for i in range(m.rows):
            for j in range(m.cols):
                out.data[r0 + i][c0 + j] = m.data[i][j]
        r0 += m.rows
        c0 += m.cols
    return out


__all__ = [
    "IntMatrix", "SNFResult", "smith_normal_form", "matrix_gcd", "AbelianGroupPresentation",
    "cokernel", "kernel_basis", "solve_integer", "in_lattice", "lattices_equal", "is_primitive",
    "complete_to_unimodular", "BlockMatrix", "Membership", "verify_membership", "snf_ones",
    "ElementaryStep", "apply_steps", "step_products", "block_diag", "bareiss_det", "as_matrix",
]
