import collections
import itertools
import random

from hypothesis import given, settings

from graphmoves.fingerprint import NecessaryConditionsPass, compare_fingerprints, fk_fingerprint
from graphmoves.graph import INF, canonical_key, condition_K, is_isomorphic
from graphmoves.moves import Move, apply_move
from graphmoves.oracle import all_small_graphs, bfs_components, bfs_connects, legal_moves, two_part_splits

from conftest import graph_of, small_graphs


def burnside_count(n, values):
    """Isomorphism classes of n-vertex matrices over ``values``: average number of fixed matrices."""
    total = 0
    perms = list(itertools.permutations(range(n)))
    for p in perms:
        seen, cycles = set(), 0
        for cell in itertools.product(range(n), repeat=2):
            if cell in seen:
                continue
            cycles += 1
            while cell not in seen:
                seen.add(cell)
                cell = (p[cell[0]], p[cell[1]])
        total += values ** cycles
    return total // len(perms)


def test_small_graph_counts_match_burnside():
    assert len(list(all_small_graphs(1, 2))) == burnside_count(1, 3) == 3
    assert len(list(all_small_graphs(2, 2))) == burnside_count(2, 3) == 45
    assert len(list(all_small_graphs(3, 1))) == burnside_count(3, 2) == 104


def test_two_part_splits():
    assert list(two_part_splits({"a": 1})) == []
    assert len(list(two_part_splits({"a": 2}))) == 1
    assert len(list(two_part_splits({"a": 2, "b": 1}))) == 2
    # an infinite edge bundle is never cut in two
    assert list(two_part_splits({"a": INF, "b": 1})) == [({"b": 1}, {"a": INF})]


@settings(max_examples=60, deadline=None)
@given(small_graphs(max_vertices=5, infinite=True))
def test_canonical_key_ignores_labels(g):
    rng = random.Random(len(g))
    labels = [f"x{k}" for k in range(len(g))]
    rng.shuffle(labels)
    h = g.relabel(dict(zip(g.vertices, labels)), order=sorted(labels))
    assert canonical_key(g) == canonical_key(h)


@settings(max_examples=40, deadline=None)
@given(small_graphs(max_vertices=3, max_mult=2))
def test_legal_moves_respect_the_vertex_cap(g):
    for m in legal_moves(g, max_vertices=4):
        assert len(apply_move(g, m)) <= 4


def test_bfs_finds_a_single_splice(two_loops):
    splice = apply_move(two_loops, Move.C("u"))
    assert bfs_connects(two_loops, splice, 1) == (True, False)
    assert bfs_connects(two_loops, graph_of([[3]]), 1, max_vertices=2) == (False, False)


def test_bfs_reports_truncation(two_loops):
    connected, truncated = bfs_connects(two_loops, graph_of([[3]]), 2, max_states=5)
    assert truncated and not connected


def test_small_bfs_is_sound():
    starts = [g for n in (1, 2) for g in all_small_graphs(n, 2) if condition_K(g)]
    uf, states, truncated = bfs_components(starts, 2, max_vertices=3)
    assert not truncated
    groups = collections.defaultdict(list)
    for key, g in states.items():
        groups[uf.find(key)].append(g)
    for members in groups.values():
        ref = fk_fingerprint(members[0])
        for g in members[1:]:
            assert isinstance(compare_fingerprints(ref, fk_fingerprint(g)), NecessaryConditionsPass)
    # the E_* graph and the two-loop graph meet within two moves
    assert uf.find(canonical_key(graph_of([[2]]))) == uf.find(canonical_key(graph_of([[1, 1], [1, 1]])))
    assert is_isomorphic(states[canonical_key(graph_of([[2]]))], graph_of([[2]]))
