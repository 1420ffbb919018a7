import random

import pytest
from hypothesis import given, settings, strategies as st

from graphmoves.errors import GcdNotOne, NotAnEquivalence, SearchBudgetExceeded
from graphmoves.fingerprint import (DistinguishedAt, NecessaryConditionsPass, compare_fingerprints, fk_fingerprint)
from graphmoves.intmat import BlockMatrix, ElementaryStep, IntMatrix, verify_membership
from graphmoves.kweb import compose, compute_kweb, exactness_report, identity_web_iso, induced_iso, is_exact
from graphmoves.lift import find_gl_equivalence, lift_kweb_iso, stabilizer_representatives
from graphmoves.moves import apply_move
from graphmoves.oracle import random_legal_move
from graphmoves.poset import Poset, all_posets, chain

from conftest import condition_k_graphs, graph_of
from test_intmat import invariant_factors

TWO = Poset(2, [(0, 1)])


def _bm(M, sizes, P):
    return BlockMatrix(IntMatrix(M), sizes, sizes, P)


def _orders_by_minors(M):
    """Cokernel orders (1s dropped, 0 for each free summand) from determinantal divisors."""
    d = invariant_factors(M) if M and M[0] else []
    return tuple([x for x in d if x != 1] + [0] * (len(M) - len(d)))


# -- computing webs ----------------------------------------------------------------

def test_web_of_single_block():
    web = compute_kweb(_bm([[2]], [1], chain(1)))
    assert web.invariants() == {"K0{1}": "Z/2"}
    assert not web.ker and not web.maps


def test_web_of_two_block_chain():
    web = compute_kweb(_bm([[2, 1], [0, 3]], [1, 1], TWO))
    assert web.invariants() == {"K0{1}": "Z/2", "K0{1,2}": "Z/6", "K0{2}": "Z/3", "K1{2}": "0"}
    kinds = [(m.kind, m.src[0], m.dst[0]) for m in web.maps]
    assert kinds == [("boundary", "ker", "cok"), ("inclusion", "cok", "cok"), ("projection", "cok", "cok")]
    assert is_exact(web)


def test_web_with_free_part():
    web = compute_kweb(_bm([[0, 1], [0, 3]], [1, 1], TWO))
    assert web.invariants()["K0{1}"] == "Z"
    assert web.invariants()["K0{1,2}"] == "Z"
    assert is_exact(web)


def test_web_rejects_non_member():
    with pytest.raises(ValueError):
        compute_kweb(_bm([[2, 0], [1, 3]], [1, 1], TWO))


def _random_member(rng, P, max_size=2):
    sizes = [rng.randint(0, max_size) for _ in range(P.size)]
    n = sum(sizes)
    starts = [sum(sizes[:i]) for i in range(P.size)]
    block = [i for i in range(P.size) for _ in range(sizes[i])]
    M = [[rng.randint(-4, 4) if P.leq(block[r], block[c]) else 0 for c in range(n)] for r in range(n)]
    return _bm(M, sizes, P), starts


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9))
def test_random_webs_are_exact_and_match_minors(seed):
    rng = random.Random(seed)
    P = rng.choice([p for k in (1, 2, 3) for p in all_posets(k)])
    bm, _ = _random_member(rng, P)
    web = compute_kweb(bm)
    assert exactness_report(web) == []
    for c in web.sites:
        sub = bm.sub(sorted(c)).tolist()
        if sub and sub[0]:
            assert web.cok[c].orders == _orders_by_minors(sub)


# -- induced isomorphisms ---------------------------------------------------------------

def _random_gl_p(rng, sizes, P, steps=6):
    """A product of block-legal elementary matrices, hence in GL_P."""
    n = sum(sizes)
    block = [i for i in range(P.size) for _ in range(sizes[i])]
    M = IntMatrix.identity(n)
    for _ in range(steps):
        if n < 2:
            break
        i, j = rng.sample(range(n), 2)
        if P.leq(block[i], block[j]):
            M = ElementaryStep("left", i, j, rng.choice([1, -1])).apply(M)
    return M


def test_identity_induces_identity():
    bm = _bm([[2, 1], [0, 3]], [1, 1], TWO)
    web = compute_kweb(bm)
    kappa = induced_iso(IntMatrix.identity(2), IntMatrix.identity(2), bm, bm)
    assert kappa.equals(identity_web_iso(web), web)
    assert kappa.commutes(web, web)


def test_induced_iso_of_sign_change():
    bm = _bm([[5]], [1], chain(1))
    kappa = induced_iso(IntMatrix([[-1]]), IntMatrix([[-1]]), bm, bm)
    assert kappa.phi[frozenset([0])].tolist() == [[4]]


def test_induced_iso_rejects_non_equivalence():
    bm = _bm([[2, 1], [0, 3]], [1, 1], TWO)
    with pytest.raises(NotAnEquivalence):
        induced_iso(IntMatrix([[1, 0], [1, 1]]), IntMatrix.identity(2), bm, bm)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**9))
def test_induced_isos_are_functorial(seed):
    rng = random.Random(seed)
    P = rng.choice([p for k in (1, 2, 3) for p in all_posets(k)])
    B, _ = _random_member(rng, P)
    sizes = B.row_sizes
    U1, V1 = _random_gl_p(rng, sizes, P), _random_gl_p(rng, sizes, P)
    U2, V2 = _random_gl_p(rng, sizes, P), _random_gl_p(rng, sizes, P)
    B1 = B.with_matrix(U1 @ B.matrix @ V1)
    B2 = B.with_matrix(U2 @ B1.matrix @ V2)
    w0, w1, w2 = compute_kweb(B), compute_kweb(B1), compute_kweb(B2)
    k1 = induced_iso(U1, V1, B, B1, (w0, w1))
    k2 = induced_iso(U2, V2, B1, B2, (w1, w2))
    k12 = induced_iso(U2 @ U1, V1 @ V2, B, B2, (w0, w2))
    assert k1.commutes(w0, w1) and k2.commutes(w1, w2)
    assert compose(k2, k1, w2).equals(k12, w2)


# -- lifting ----------------------------------------------------------------------

def test_lift_recovers_equivalence():
    B = _bm([[1, 2], [3, 4]], [2], chain(1))
    U = IntMatrix([[1, 1], [0, 1]])
    V = IntMatrix([[1, 0], [2, 1]])
    B2 = B.with_matrix(U @ B.matrix @ V)
    res = find_gl_equivalence(B, B2)
    assert res.U @ B.matrix @ res.V == B2.matrix
    kappa = induced_iso(U, V, B, B2)
    U3, V3 = lift_kweb_iso(B, B2, kappa)
    assert induced_iso(U3, V3, B, B2).equals(kappa, compute_kweb(B2))


def test_lift_needs_gcd_one():
    B = _bm([[2, 4], [6, 8]], [2], chain(1))
    with pytest.raises(GcdNotOne):
        find_gl_equivalence(B, B)


def test_lift_with_zero_budget():
    B = _bm([[1, 2], [3, 4]], [2], chain(1))
    with pytest.raises(SearchBudgetExceeded):
        find_gl_equivalence(B, B, budget=0)


@pytest.mark.parametrize("d,m,n", [((5,), 1, 1), ((1, 3), 2, 2), ((2,), 2, 1), ((1, 4), 2, 3)])
def test_stabilizer_representatives_fix_the_smith_form(d, m, n):
    D = IntMatrix([[d[i] if i == j and i < len(d) else 0 for j in range(n)] for i in range(m)], m, n)
    reps, complete = stabilizer_representatives(d, m, n)
    assert reps[0] == (IntMatrix.identity(m), IntMatrix.identity(n))
    for g, h in reps:
        assert g @ D @ h == D
        assert abs(g.det()) == 1 and abs(h.det()) == 1


def test_stabilizer_of_z5_has_both_signs():
    reps, complete = stabilizer_representatives((5,), 1, 1)
    assert complete and len(reps) == 2


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**9))
def test_lift_of_induced_iso_induces_it(seed):
    rng = random.Random(seed)
    P = rng.choice([p for k in (1, 2) for p in all_posets(k)])
    sizes = [rng.randint(1, 2) for _ in range(P.size)]
    n = sum(sizes)
    block = [i for i in range(P.size) for _ in range(sizes[i])]
    M = [[rng.randint(1, 4) if P.leq(block[r], block[c]) else 0 for c in range(n)] for r in range(n)]
    for i in range(P.size):
        s = sum(sizes[:i])
        M[s][s] = 1  # gcd one on each diagonal block
    B = _bm(M, sizes, P)
    U, V = _random_gl_p(rng, sizes, P), _random_gl_p(rng, sizes, P)
    B2 = B.with_matrix(U @ B.matrix @ V)
    kappa = induced_iso(U, V, B, B2)
    U3, V3 = lift_kweb_iso(B, B2, kappa, budget=2000)
    assert verify_membership(BlockMatrix(U3, sizes, sizes, P), "GL_P")
    assert induced_iso(U3, V3, B, B2).equals(kappa, compute_kweb(B2))


# -- fingerprints --------------------------------------------------------------------

def test_fingerprint_of_two_loops_is_trivial():
    f = fk_fingerprint(graph_of([[2]]))
    assert f.size == 1 and f.k0([0]) == "0"


def test_fingerprint_of_three_loops():
    assert fk_fingerprint(graph_of([[3]])).k0([0]) == "Z/2"


def test_two_and_three_loops_are_distinguished():
    res = compare_fingerprints(fk_fingerprint(graph_of([[2]])), fk_fingerprint(graph_of([[3]])))
    assert isinstance(res, DistinguishedAt)
    assert res.site == "K₀ 0 vs Z/2 at {1}"


def test_identical_graphs_pass():
    f = fk_fingerprint(graph_of([[1, 1], [1, 1]]))
    assert isinstance(compare_fingerprints(f, f), NecessaryConditionsPass)


def test_e_star_and_its_splice_pass():
    f1 = fk_fingerprint(graph_of([[1, 1], [1, 1]]))
    f2 = fk_fingerprint(graph_of([[2, 1, 0], [1, 1, 1], [0, 1, 1]]))
    assert isinstance(compare_fingerprints(f1, f2), NecessaryConditionsPass)


def test_block_count_distinguishes():
    one = fk_fingerprint(graph_of([[2]]))
    two = fk_fingerprint(graph_of([[2, 1], [0, 2]]))
    res = compare_fingerprints(one, two)
    assert isinstance(res, DistinguishedAt) and "poset size" in res.site


def test_fingerprint_text_mentions_unchecked_order():
    assert fk_fingerprint(graph_of([[2]])).text().endswith("order on K0 groups: not compared")


@settings(max_examples=40, deadline=None)
@given(condition_k_graphs(max_vertices=4, max_mult=2, infinite=0.1), st.integers(0, 10**9))
def test_fingerprint_survives_moves(g, seed):
    rng = random.Random(seed)
    f0 = fk_fingerprint(g)
    h = g
    for _ in range(3):
        m = random_legal_move(h, rng, max_vertices=6)
        if m is None:
            break
        h = apply_move(h, m)
    assert not isinstance(compare_fingerprints(f0, fk_fingerprint(h)), DistinguishedAt)
