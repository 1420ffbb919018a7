import random

import pytest
from hypothesis import given, settings, strategies as st

from graphmoves.graph import INF, PreconditionViolated, is_isomorphic
from graphmoves.moves import (CertificateError, IllegalDerivedMove, Move, MoveCertificate, MoveSequence, Segment,
                              apply_move, derived_matrix_move, expand_certificate, expand_derived_move,
                              find_witness_path, forward_certificate, parse_move)
from graphmoves.oracle import legal_moves, random_legal_move
from graphmoves.trail import cuntz_splice_twice_trail, splice_twice

from conftest import condition_k_graphs, graph_of, small_graphs


# -- primitive moves -------------------------------------------------------------

def test_outsplit_two_loops(two_loops):
    g = apply_move(two_loops, Move.O("u", [{"u": 1}, {"u": 1}]))
    assert is_isomorphic(g, graph_of([[1, 1], [1, 1]]))


def test_cuntz_splice_two_loops(two_loops):
    g = apply_move(two_loops, Move.C("u"))
    assert g.vertices == ("u", "u.c1", "u.c2")
    assert g.adjacency() == [[2, 1, 0], [1, 1, 1], [0, 1, 1]]


def test_reduction_needs_single_out_edge():
    g = graph_of([[0, 1, 1], [0, 2, 0], [0, 0, 2]])
    with pytest.raises(PreconditionViolated):
        apply_move(g, Move.R("1"))


def test_reduction_and_source_removal():
    g = graph_of([[0, 1, 0], [0, 0, 1], [0, 0, 2]], ["a", "b", "c"])
    # b receives one edge from a and emits one edge to c
    h = apply_move(g, Move.R("b"))
    assert h.vertices == ("a", "c") and h.mult("a", "c") == 1
    k = apply_move(h, Move.S("a"))
    assert k.vertices == ("c",) and k.mult("c", "c") == 2


def test_source_removal_needs_regular_source(two_loops):
    with pytest.raises(PreconditionViolated):
        apply_move(two_loops, Move.S("u"))


def test_outsplit_rejects_two_infinite_parts():
    g = graph_of([[INF, INF], [0, 2]])
    with pytest.raises(PreconditionViolated):
        apply_move(g, Move.O("1", [{"1": INF}, {"2": INF}]))


def test_outsplit_partition_must_cover(two_loops):
    with pytest.raises(PreconditionViolated):
        apply_move(two_loops, Move.O("u", [{"u": 1}, {"u": 2}]))


def test_splice_needs_two_return_paths():
    with pytest.raises(PreconditionViolated):
        apply_move(graph_of([[1, 1], [0, 2]]), Move.C("1"))
    g = apply_move(graph_of([[1, 1], [0, 2]]), Move.C("1", unchecked=True))
    assert len(g) == 4


def test_collapse_needs_no_loop(two_loops):
    with pytest.raises(PreconditionViolated):
        apply_move(two_loops, Move.COL("u"))


def test_collapse_removes_loopless_vertex():
    g = graph_of([[2, 1], [1, 0]], ["a", "b"])
    h = apply_move(g, Move.COL("b"))
    assert h.vertices == ("a",) and h.mult("a", "a") == 3


# -- derived matrix moves ------------------------------------------------------

def _b(g):
    return [[x for x in row] for row in g.b_matrix()]


def test_col_add_on_e_star(e_star):
    g = derived_matrix_move(e_star, "col_add", "v1", "v2", ["v1", "v2"])
    assert _b(g) == [[0, 1], [1, 1]]
    assert g.adjacency() == [[1, 1], [1, 2]]


def test_row_add_on_e_star(e_star):
    g = derived_matrix_move(e_star, "row_add", "v2", "v1", ["v1", "v2"])
    assert _b(g) == [[1, 1], [1, 0]]


def test_subtraction_creating_negative_entry_is_illegal():
    g = graph_of([[3, 0], [1, 2]], ["a", "b"])
    # column b minus column a would put -2 at (a, b)
    with pytest.raises(IllegalDerivedMove):
        derived_matrix_move(g, "col_sub", "a", "b", ["a", "b"])


def test_subtraction_undoes_addition(e_star):
    g = derived_matrix_move(e_star, "col_add", "v1", "v2", ["v1", "v2"])
    back = derived_matrix_move(g, "col_sub", "v1", "v2", ["v1", "v2"])
    assert back == e_star


def test_adding_a_column_to_itself_is_rejected(e_star):
    with pytest.raises(IllegalDerivedMove):
        derived_matrix_move(e_star, "col_add", "v1", "v1", ["v1"])
    assert find_witness_path(e_star, "col+", "v1", "v1") is None


def test_bad_witness_path_is_rejected():
    g = graph_of([[1, 1], [0, 2]], ["a", "b"])
    # a emits two edges, but there is no path from b to a
    with pytest.raises(IllegalDerivedMove):
        derived_matrix_move(g, "col_add", "b", "a", ["b", "a"])


def test_expand_one_step_col_add(e_star):
    m = Move.MAT("col+", "v1", "v2", ["v1", "v2"])
    cert = expand_derived_move(e_star, m)
    cert.verify()
    seg, = cert.segments
    assert [x.kind for x in seg.left.moves] == ["O", "COL"]
    o = seg.left.moves[0]
    assert o.vertex == "v1" and (("v2", 1),) in o.parts
    assert not seg.right.moves
    assert cert.end == derived_matrix_move(e_star, "col+", "v1", "v2", ["v1", "v2"])


def test_expand_two_step_path():
    g = graph_of([[1, 1, 0], [0, 1, 1], [1, 0, 1]], ["a", "b", "c"])
    m = Move.MAT("col+", "a", "c", ["a", "b", "c"])
    cert = expand_derived_move(g, m)
    cert.verify()
    seg, = cert.segments
    assert [x.kind for x in seg.left.moves] == ["O", "COL", "O", "COL"]
    assert len(seg.right.moves) == 2
    assert cert.end == apply_move(g, m)


def _random_mat_move(g, rng):
    ops = ["col+", "col-", "row+", "row-"]
    for _ in range(30):
        op = rng.choice(ops)
        frm, into = rng.choice(g.vertices), rng.choice(g.vertices)
        path = find_witness_path(g, op, frm, into)
        if path is not None:
            return Move.MAT(op, frm, into, path)
    return None


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9))
def test_expand_agrees_with_derived_move(seed):
    rng = random.Random(seed)
    g = graph_of([[rng.choice([0, 0, 1, 2, 3]) for _ in range(n)] for n in [rng.randint(2, 6)] for _ in range(n)])
    m = _random_mat_move(g, rng)
    if m is None:
        return
    direct = derived_matrix_move(g, m.op, m.vertex, m.target, m.path)
    cert = expand_derived_move(g, m)
    cert.verify()
    assert cert.start == g
    assert is_isomorphic(cert.end, direct)
    assert all(x.kind != "MAT" for x in cert.moves())


# -- sequences and certificates ------------------------------------------------------

@settings(max_examples=40, deadline=None)
@given(condition_k_graphs(max_vertices=5, max_mult=3, infinite=0.1), st.integers(0, 10**9))
def test_replay_reproduces_hashes(g, seed):
    rng = random.Random(seed)
    seq = MoveSequence(g)
    for _ in range(4):
        m = random_legal_move(seq.end, rng, max_vertices=8)
        if m is None:
            break
        seq.append(m)
    assert seq.replay() == seq.end
    assert len(seq.hashes) == len(seq.moves)
    if seq.moves:
        bad = MoveSequence(g, list(seq.moves), list(seq.hashes))
        bad.hashes[-1] = "0" * 64
        with pytest.raises(CertificateError):
            bad.replay()


@settings(max_examples=40, deadline=None)
@given(small_graphs(max_vertices=4, infinite=True), st.integers(0, 10**9))
def test_moves_commute_with_relabeling(g, seed):
    rng = random.Random(seed)
    moves = list(legal_moves(g, max_vertices=6))
    if not moves:
        return
    m = rng.choice(moves)
    names = {v: f"x{v}" for v in g.vertices}
    h = g.relabel(names)
    assert is_isomorphic(apply_move(g, m), apply_move(h, m.relabel(names)))


@settings(max_examples=60, deadline=None)
@given(small_graphs(max_vertices=4, infinite=True), st.integers(0, 10**9))
def test_move_text_round_trip(g, seed):
    rng = random.Random(seed)
    moves = list(legal_moves(g, max_vertices=6))
    if moves:
        m = rng.choice(moves)
        assert parse_move(m.to_line()) == m


def test_certificate_rejects_wrong_iso(two_loops):
    seq = MoveSequence.build(two_loops, [Move.O("u", [{"u": 1}, {"u": 1}])])
    end = seq.end
    good = MoveCertificate([Segment(seq, MoveSequence(end), {v: v for v in end.vertices})])
    good.verify()
    swapped = dict(zip(end.vertices, reversed(end.vertices)))
    MoveCertificate([Segment(seq, MoveSequence(end), swapped)]).verify()  # symmetric graph
    other = graph_of([[1, 2], [1, 1]], end.vertices)
    with pytest.raises(CertificateError):
        MoveCertificate([Segment(seq, MoveSequence(other), {v: v for v in end.vertices})]).verify()


def test_expand_certificate_keeps_endpoints(e_star):
    cert = forward_certificate(e_star, [Move.MAT("col+", "v1", "v2", ["v1", "v2"]),
                                        Move.MAT("row+", "v2", "v1", ["v1", "v2"])])
    flat = expand_certificate(cert)
    flat.verify()
    assert flat.start == cert.start and flat.end == cert.end
    assert all(m.kind != "MAT" for m in flat.moves())


# -- splice twice trail ------------------------------------------------------------

# The double splice of one vertex with two loops, read off the picture: u keeps
# its loops and is joined both ways to w1; w1, w3 and w2, w4 are looped pairs.
DOUBLE_SPLICE = [[2, 1, 0, 0, 0],
                 [1, 1, 1, 1, 0],
                 [0, 1, 1, 0, 0],
                 [0, 1, 0, 1, 1],
                 [0, 0, 0, 1, 1]]


def test_splice_twice_matches_picture(two_loops):
    assert is_isomorphic(splice_twice(two_loops, "u"), graph_of(DOUBLE_SPLICE))


def test_trail_on_two_loops(two_loops):
    cert = cuntz_splice_twice_trail(two_loops, "u")
    cert.verify()
    assert cert.start == two_loops
    assert is_isomorphic(cert.end, graph_of(DOUBLE_SPLICE))
    flat = expand_certificate(cert)
    flat.verify()
    assert is_isomorphic(flat.end, graph_of(DOUBLE_SPLICE))


def test_trail_needs_two_return_paths():
    with pytest.raises(PreconditionViolated):
        cuntz_splice_twice_trail(graph_of([[1]], ["u"]), "u")


def test_trail_on_infinite_emitter():
    g = graph_of([[INF, 1], [1, 2]], ["u", "x"])
    cert = cuntz_splice_twice_trail(g, "u")
    cert.verify()
    assert is_isomorphic(cert.end, splice_twice(g, "u", unchecked=True))


@pytest.mark.parametrize("A,v", [
    ([[1, 1], [1, 1]], "1"),
    ([[3, 1], [0, 2]], "1"),
    ([[0, 1, 0], [1, 1, 1], [1, 0, 0]], "2"),
    ([[1, 1, 0], [1, 0, 1], [0, 1, 2]], "1"),
    ([[INF, 0], [1, INF]], "2"),
])
def test_trail_on_other_graphs(A, v):
    g = graph_of(A)
    cert = cuntz_splice_twice_trail(g, v)
    cert.verify()
    assert cert.start == g
    assert is_isomorphic(cert.end, splice_twice(g, v, unchecked=True))
