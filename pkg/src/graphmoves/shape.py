"""Bring a graph into the shape where every regular vertex has a loop and
every singular vertex emits infinitely many edges to each vertex it reaches.

Only collapses, outsplits of infinite emitters into their infinite and
finite edges, and (T) saturations are used, so the result is move
equivalent to the input and the move log replays.
"""

from __future__ import annotations

from collections import deque

from .errors import ConditionKViolated
from .graph import INF, Graph, condition_K
from .moves import Move, apply_move


def require_condition_k(g: Graph) -> None:
    for v in g.vertices:
        if g.return_path_class(v) == 1:
            raise ConditionKViolated("Condition (K) fails: exactly one return path", v)


def shortest_path(g: Graph, a: str, b: str) -> list[str] | None:
    """Shortest path of positive length from ``a`` to ``b``."""
    prev: dict[str, str] = {}
    queue = deque()
    for y in g.out(a):
        if y not in prev:
            prev[y] = a
            queue.append(y)
    while queue and b not in prev:
        x = queue.popleft()
        for y in g.out(x):
            if y not in prev:
                prev[y] = x
                queue.append(y)
    if b not in prev:
        return None
    path = [b]
    while len(path) == 1 or path[-1] != a:
        path.append(prev[path[-1]])
    path.reverse()
    return path


def _next_move(g: Graph) -> Move | None:
    for v in g.vertices:
        if g.is_regular(v) and not g.has_loop(v):
            return Move.COL(v)
    for v in g.vertices:
        if g.is_infinite_emitter(v):
            out = g.out(v)
            finite = {w: k for w, k in out.items() if k is not INF}
            if finite:
                infinite = {w: k for w, k in out.items() if k is INF}
                return Move.O(v, [infinite, finite])
    for v in g.vertices:
        if g.is_infinite_emitter(v):
            for w in g.vertices:
                if g.mult(v, w) is not INF and g.reaches_positive(v, w):
                    return Move.T(shortest_path(g, v, w))
    return None


def normalize_shape(g: Graph, check_condition_k: bool = True) -> tuple[Graph, list[Move]]:
    """The normalized graph and the moves leading to it."""
    if check_condition_k:
        require_condition_k(g)
    moves: list[Move] = []
    while True:
        m = _next_move(g)
        if m is None:
            return g, moves
        g = apply_move(g, m)
        moves.append(m)


__all__ = ["normalize_shape", "require_condition_k", "shortest_path", "condition_K"]
