"""Finite partial orders on block indices ``0..N-1``.

The order is stored as a reflexive, transitive relation matrix. Nothing here
assumes that the numbering is a linear extension, so the opposite order (used
for transposed block matrices) is an ordinary :class:`Poset` as well.
"""

from __future__ import annotations

from functools import cached_property
from typing import Iterable, Iterator, Sequence


class Poset:
    """Partial order on ``range(size)`` given by covering or order pairs."""

    def __init__(self, size: int, relations: Iterable[tuple[int, int]] = ()):
        if size < 0:
            raise ValueError("poset size must be nonnegative")
        leq = [[i == j for j in range(size)] for i in range(size)]
        for i, j in relations:
            if not (0 <= i < size and 0 <= j < size):
                raise ValueError(f"relation ({i}, {j}) out of range")
            leq[i][j] = True
        # transitive closure (Warshall)
        for k in range(size):
            for i in range(size):
                if leq[i][k]:
                    row_k = leq[k]
                    row_i = leq[i]
                    for j in range(size):
                        if row_k[j]:
                            row_i[j] = True
        for i in range(size):
            for j in range(i + 1, size):
                if leq[i][j] and leq[j][i]:
                    raise ValueError(f"relation is not antisymmetric at ({i}, {j})")
        self.size = size
        self._leq = tuple(tuple(r) for r in leq)

    # -- basic queries -------------------------------------------------
    def leq(self, i: int, j: int) -> bool:
        return self._leq[i][j]

    def lt(self, i: int, j: int) -> bool:
        return i != j and self._leq[i][j]

    def comparable(self, i: int, j: int) -> bool:
        return self._leq[i][j] or self._leq[j][i]

    def down(self, i: int) -> frozenset[int]:
        """``{j : j <= i}``."""
        return frozenset(j for j in range(self.size) if self._leq[j][i])

    def strict_down(self, i: int) -> frozenset[int]:
        return frozenset(j for j in range(self.size) if j != i and self._leq[j][i])

    def up(self, i: int) -> frozenset[int]:
        return frozenset(j for j in range(self.size) if self._leq[i][j])

    def immediate_predecessors(self, i: int) -> list[int]:
        below = self.strict_down(i)
        return sorted(j for j in below if not any(self.lt(j, k) and self.lt(k, i) for k in below))

    def minimal(self) -> list[int]:
        return [i for i in range(self.size) if not self.strict_down(i)]

    def is_convex(self, c: Iterable[int]) -> bool:
        c = set(c)
        for i in c:
            for j in c:
                for k in range(self.size):
                    if k not in c and self.leq(i, k) and self.leq(k, j):
                        return False
        return True

    def pairs(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.size) for j in range(self.size) if i != j and self._leq[i][j]]

    def covers(self) -> list[tuple[int, int]]:
        return [(j, i) for i in range(self.size) for j in self.immediate_predecessors(i)]

    @cached_property
    def topological_order(self) -> tuple[int, ...]:
        """A linear extension, smallest index first among available blocks."""
        remaining = set(range(self.size))
        order = []
        while remaining:
            nxt = min(i for i in remaining if not any(j in remaining for j in self.strict_down(i)))
            order.append(nxt)
            remaining.remove(nxt)
        return tuple(order)

    def opposite(self) -> "Poset":
        return Poset(self.size, [(j, i) for (i, j) in self.pairs()])

    def relabel(self, perm: Sequence[int]) -> "Poset":
        """Poset on the same size with ``perm[i]`` playing the role of ``i``."""
        return Poset(self.size, [(perm[i], perm[j]) for (i, j) in self.pairs()])

    def isomorphisms(self, other: "Poset") -> Iterator[tuple[int, ...]]:
        """Yield order isomorphisms ``rho`` (as tuples, ``rho[i]`` in ``other``)."""
        if self.size != other.size:
            return
        n = self.size
        sig_a = [(len(self.strict_down(i)), len(self.up(i))) for i in range(n)]
        sig_b = [(len(other.strict_down(i)), len(other.up(i))) for i in range(n)]
        if sorted(sig_a) != sorted(sig_b):
            return
        rho = [-1] * n
        used = [False] * n

        def extend(i: int) -> Iterator[tuple[int, ...]]:
            if i == n:
                yield tuple(rho)
                return
            for t in range(n):
                if used[t] or sig_a[i] != sig_b[t]:
                    continue
                if any(self.leq(i, k) != other.leq(t, rho[k]) or self.leq(k, i) != other.leq(rho[k], t)
                       for k in range(i)):
                    continue
                rho[i] = t
                used[t] = True
                yield from extend(i + 1)
                used[t] = False
            rho[i] = -1

        yield from extend(0)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Poset) and self.size == other.size and self._leq == other._leq

    def __hash__(self) -> int:
        return hash((self.size, self._leq))

    def __repr__(self) -> str:
        return f"Poset({self.size}, {self.covers()})"


def chain(size: int) -> Poset:
    return Poset(size, [(i, i + 1) for i in range(size - 1)])


def antichain(size: int) -> Poset:
    return Poset(size)


def all_posets(size: int) -> list[Poset]:
    """Every labeled poset on ``size`` points whose numbering is a linear extension."""
    pairs = [(i, j) for i in range(size) for j in range(i + 1, size)]
    seen = set()
    out = []
    for mask in range(1 << len(pairs)):
        rel = [pairs[k] for k in range(len(pairs)) if mask >> k & 1]
        p = Poset(size, rel)
        if p not in seen:
            seen.add(p)
            out.append(p)
    return out


__all__ = ["Poset", "chain", "antichain", "all_posets"]
