import random

import pytest
from hypothesis import given, settings, strategies as st

from graphmoves.errors import IllegalStep, NotComparable, NotPositive, NotSL
from graphmoves.fingerprint import DistinguishedAt, Inconclusive
from graphmoves.graph import is_isomorphic
from graphmoves.intmat import BlockMatrix, ElementaryStep, IntMatrix, step_products, verify_membership
from graphmoves.moves import apply_move
from graphmoves.oracle import random_legal_move
from graphmoves.pipeline import (Certificate, canonicalize, checklist, decide_equivalence, gl_to_sl, lift_pair,
                                 positive_factorization, standardize_pair, steps_to_moves)
from graphmoves.pipeline.glsl import block_dets
from graphmoves.pipeline.positive import three_cycle_factors
from graphmoves.poset import all_posets, chain

from conftest import condition_k_graphs, graph_of

SPLICED_TWO_LOOPS = [[2, 1, 0], [1, 1, 1], [0, 1, 1]]


# -- canonical form ----------------------------------------------------------------

def test_two_loops_reach_canonical_form(two_loops):
    rep = canonicalize(two_loops)
    assert rep.ok
    assert rep.text().splitlines() == ["(1) shape: yes", "(2) regular paths: yes", "(3) cycle sizes: yes",
                                       "(4) positivity: yes", "(5) smith ones: yes"]
    assert rep.moves.replay() == rep.graph


def test_loopless_regular_vertex_is_collapsed_first():
    rep = canonicalize(graph_of([[2, 1], [1, 0]]))
    assert rep.moves.moves[0].to_line() == "COL 2"
    assert rep.ok


def test_canonical_form_is_a_fixed_point():
    rep = canonicalize(graph_of([[1, 1], [1, 1]]))
    again = canonicalize(rep.graph)
    assert not again.moves.moves and again.graph == rep.graph


def test_checklist_reports_missing_shape():
    res = checklist(graph_of([[0, 1], [0, 2]]))
    assert res["shape"] is False


@settings(max_examples=25, deadline=None)
@given(condition_k_graphs(max_vertices=4, max_mult=3, infinite=0.1))
def test_canonicalize_always_converges(g):
    rep = canonicalize(g)
    assert rep.ok
    assert all(checklist(rep.graph).values())
    assert rep.moves.start == g and rep.moves.replay() == rep.graph


# -- standard pairs, lifting, determinant fix ----------------------------------------------

def _canonical_pair(A1, A2):
    return canonicalize(graph_of(A1)).graph, canonicalize(graph_of(A2)).graph


def test_standardize_gives_equal_block_sizes():
    g1, g2 = _canonical_pair([[1, 1], [1, 1]], SPLICED_TWO_LOOPS)
    pair = standardize_pair(g1, g2)
    orders = pair.alignment.orders(pair.F1, pair.F2)
    assert orders.same_shape
    assert orders.structure.m == orders.m2 and orders.structure.n == orders.n2


def test_standardize_refuses_different_block_counts():
    g1, g2 = _canonical_pair([[2]], [[2, 1], [0, 2]])
    with pytest.raises(NotComparable):
        standardize_pair(g1, g2)


def test_gl_to_sl_fixes_a_negative_determinant():
    g1, g2 = _canonical_pair([[1, 1], [1, 1]], SPLICED_TWO_LOOPS)
    pair = standardize_pair(g1, g2)
    eq = lift_pair(pair)
    assert block_dets(eq, pair.F1, pair.F2, pair.alignment) == [(1, -1)]
    sl = gl_to_sl(pair.F1, pair.F2, eq, pair.alignment)
    assert block_dets(sl.equivalence, sl.G1, sl.G2, pair.alignment) == [(1, 1)]
    assert sl.equivalence.holds(sl.G1, sl.G2)
    assert sl.moves1.replay() == sl.G1 and sl.moves2.replay() == sl.G2


def test_gl_to_sl_keeps_determinant_one():
    g = canonicalize(graph_of([[3, 1], [1, 3]])).graph
    pair = standardize_pair(g, g)
    eq = lift_pair(pair)
    sl = gl_to_sl(pair.F1, pair.F2, eq, pair.alignment)
    assert all(d == (1, 1) for d in block_dets(sl.equivalence, sl.G1, sl.G2, pair.alignment))


# -- positive factorization --------------------------------------------------------------

def test_three_cycle_factors_multiply_to_the_cycle():
    prod = IntMatrix.identity(3)
    for f in three_cycle_factors():
        prod = prod @ f
    assert prod.tolist() == [[0, 1, 0], [0, 0, 1], [1, 0, 0]]


def test_identity_pair_needs_no_steps():
    B = BlockMatrix(IntMatrix([[2, 1, 1], [1, 2, 1], [1, 1, 2]]), [3], [3], chain(1))
    assert positive_factorization(B, B, IntMatrix.identity(3), IntMatrix.identity(3)) == []


def test_factorization_rejects_bad_inputs():
    B = BlockMatrix(IntMatrix([[2, 1, 1], [1, 2, 1], [1, 1, 2]]), [3], [3], chain(1))
    swap = IntMatrix([[0, 1, 0], [1, 0, 0], [0, 0, 1]])
    with pytest.raises(NotSL):
        positive_factorization(B, B.with_matrix(swap @ B.matrix), swap, IntMatrix.identity(3))
    small = BlockMatrix(IntMatrix([[2, 1], [1, 2]]), [2], [2], chain(1))
    with pytest.raises(NotPositive):
        positive_factorization(small, small, IntMatrix.identity(2), IntMatrix.identity(2))


def random_positive_instance(rng):
    """A pair in M_P+ joined by a random product of block-legal steps."""
    N = rng.randint(1, 3)
    P = rng.choice(all_posets(N))
    sizes = [3] * N
    while True:
        M = IntMatrix([[rng.randint(1, 6) if P.leq(r // 3, c // 3) else 0 for c in range(3 * N)]
                       for r in range(3 * N)])
        B = BlockMatrix(M, sizes, sizes, P)
        if verify_membership(B, "M_P+"):
            break
    while True:
        steps = []
        for _ in range(rng.randint(1, 10)):
            i, j = rng.sample(range(3 * N), 2)
            s = ElementaryStep(rng.choice(["left", "right"]), i, j, rng.choice([1, -1]))
            if s.block_legal(B):
                steps.append(s)
        U, V = step_products(steps, 3 * N, 3 * N)
        B2 = B.with_matrix(U @ M @ V)
        if verify_membership(B2, "M_P+"):
            return B, B2, U, V


def check_positive_path(B, B2, U, V, steps):
    cur = B.matrix
    for s in steps:
        cur = s.apply(cur)
        assert verify_membership(B.with_matrix(cur), "M_P+")
    assert cur == B2.matrix
    assert step_products(steps, U.rows, V.rows) == (U, V)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**9))
def test_positive_factorization_stays_positive(seed):
    B, B2, U, V = random_positive_instance(random.Random(seed))
    check_positive_path(B, B2, U, V, positive_factorization(B, B2, U, V))


def test_factorization_of_a_three_cycle_conjugation():
    B = BlockMatrix(IntMatrix([[2, 1, 1], [1, 3, 1], [1, 1, 4]]), [3], [3], chain(1))
    C = IntMatrix([[0, 1, 0], [0, 0, 1], [1, 0, 0]])
    B2 = B.with_matrix(C @ B.matrix @ C.inverse())
    check_positive_path(B, B2, C, C.inverse(), positive_factorization(B, B2, C, C.inverse()))


# -- steps to moves --------------------------------------------------------------------

def test_no_steps_no_moves(e_star):
    seq = steps_to_moves(e_star, [])
    assert not seq.moves and seq.end == e_star


def test_single_right_step_becomes_column_addition(e_star):
    seq = steps_to_moves(e_star, [ElementaryStep("right", 0, 1)], ["v1", "v2"], ["v1", "v2"])
    m, = seq.moves
    assert (m.kind, m.op, m.vertex, m.target) == ("MAT", "col+", "v1", "v2")
    assert seq.end.b_matrix() == [[0, 1], [1, 1]]


def test_step_against_the_block_order_is_illegal():
    g = canonicalize(graph_of([[2, 1], [0, 2]])).graph
    st_rows = g.b_bullet().rows
    with pytest.raises(IllegalStep):
        steps_to_moves(g, [ElementaryStep("left", st_rows - 1, 0)])


# -- full decision ---------------------------------------------------------------------

def test_decide_e_star_and_splice():
    res = decide_equivalence(graph_of([[1, 1], [1, 1]]), graph_of(SPLICED_TWO_LOOPS))
    assert isinstance(res, Certificate)
    res.certificate.verify()
    assert is_isomorphic(res.certificate.start, graph_of([[1, 1], [1, 1]]))
    assert is_isomorphic(res.certificate.end, graph_of(SPLICED_TWO_LOOPS))


def test_decide_two_and_three_loops():
    res = decide_equivalence(graph_of([[2]]), graph_of([[3]]))
    assert isinstance(res, DistinguishedAt)
    assert str(res) == "Distinguished: K₀ 0 vs Z/2 at {1}"


def test_decide_with_zero_budget():
    res = decide_equivalence(graph_of([[2]]), graph_of(SPLICED_TWO_LOOPS), budget=0)
    assert isinstance(res, Inconclusive) and res.stage == "lift"


@settings(max_examples=8, deadline=None)
@given(condition_k_graphs(max_vertices=3, max_mult=2), st.integers(0, 10**9))
def test_decide_moved_graph_gives_certificate(g, seed):
    rng = random.Random(seed)
    h = g
    for _ in range(3):
        m = random_legal_move(h, rng, max_vertices=6)
        if m is None:
            break
        h = apply_move(h, m)
    res = decide_equivalence(g, h)
    assert isinstance(res, Certificate), str(res)
    res.certificate.verify()
