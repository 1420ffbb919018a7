"""Integer solutions of linear systems ``A x = b`` by column echelon form.

Unimodular column operations turn ``A`` into a lower echelon matrix ``H`` with
``A V = H``; a solution then comes from forward substitution. Work is done on
numpy ``int64`` arrays while entries stay small and restarts on Python ints
(``dtype=object``) if they grow.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

_SAFE = 1 << 40


class _Overflow(Exception):
    pass


def _echelon(a: np.ndarray, guard: bool) -> tuple[np.ndarray, np.ndarray, list[tuple[int, int]]]:
    m, n = a.shape
    work = np.zeros((m + n, n), dtype=a.dtype)
    work[:m] = a
    for j in range(n):
        work[m + j, j] = 1
    pivots: list[tuple[int, int]] = []
    c = 0
    for t in range(m):
        if c >= n:
            break
        while True:
            row = work[t, c:]
            nz = np.nonzero(row)[0]
            if len(nz) == 0:
                break
            absv = np.abs(row[nz])
            p = int(nz[int(np.argmin(absv))]) + c
            if p != c:
                work[:, [c, p]] = work[:, [p, c]]
            nz = np.nonzero(work[t, c + 1:])[0] + c + 1
            if len(nz) == 0:
                pivots.append((t, c))
                c += 1
                break
            q = work[t, nz] // work[t, c]
            work[:, nz] -= np.outer(work[:, c], q)
        if guard and work.size and int(np.abs(work).max()) > _SAFE:
            raise _Overflow
    return work[:m], work[m:], pivots


def column_echelon(a: Sequence[Sequence[int]], n: int | None = None):
    """``(H, V, pivots)`` with ``A V = H``; ``pivots`` lists ``(row, col)``."""
    rows = [list(r) for r in a]
    if n is None:
        n = len(rows[0]) if rows else 0
    try:
        arr = np.array(rows, dtype=np.int64).reshape(len(rows), n)
        if arr.size and int(np.abs(arr).max()) > _SAFE:
            raise _Overflow
        return _echelon(arr, True)
    except (_Overflow, OverflowError):
        arr = np.empty((len(rows), n), dtype=object)
        for i, r in enumerate(rows):
            for j, x in enumerate(r):
                arr[i, j] = int(x)
        return _echelon(arr, False)


def solve_system(a: Sequence[Sequence[int]], b: Sequence[int], n: int) -> list[int] | None:
    """An integer ``x`` (length ``n``) with ``A x = b``, or ``None``."""
    m = len(a)
    if m == 0:
        return [0] * n
    if n == 0:
        return [] if not any(b) else None
    h, v, pivots = column_echelon(a, n)
    piv_of_row = dict(pivots)
    y = [0] * n
    used = 0
    for t in range(m):
        s = int(b[t])
        for j in range(used):
            hv = int(h[t, j])
            if hv:
                s -= hv * y[j]
        if t in piv_of_row:
            c = piv_of_row[t]
            d = int(h[t, c])
            if s % d:
                return None
            y[c] = s // d
            used = c + 1
        elif s:
            return None
    return [sum(int(v[i, j]) * y[j] for j in range(used) if y[j]) for i in range(n)]


def nullspace(a: Sequence[Sequence[int]], n: int) -> list[list[int]]:
    """A basis of ``{x in Z^n : A x = 0}``."""
    if not a:
        return [[int(i == j) for i in range(n)] for j in range(n)]
    h, v, pivots = column_echelon(a, n)
    r = len(pivots)
    return [[int(v[i, j]) for i in range(n)] for j in range(r, n)]


__all__ = ["column_echelon", "solve_system", "nullspace"]
