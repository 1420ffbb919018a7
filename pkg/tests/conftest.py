import random

import pytest
from hypothesis import strategies as st

from graphmoves.graph import INF, Graph, condition_K


def graph_of(A, labels=None):
    return Graph.from_matrix(A, labels)


@pytest.fixture
def two_loops():
    return graph_of([[2]], ["u"])


@pytest.fixture
def three_loops():
    return graph_of([[3]], ["u"])


@pytest.fixture
def e_star():
    return graph_of([[1, 1], [1, 1]], ["v1", "v2"])


@st.composite
def small_graphs(draw, max_vertices=4, max_mult=3, infinite=False):
    """Random graphs; with ``infinite`` some entries are ``inf``."""
    n = draw(st.integers(1, max_vertices))
    values = st.integers(0, max_mult)
    if infinite:
        values = st.one_of(values, st.just(INF))
    rows = draw(st.lists(st.lists(values, min_size=n, max_size=n), min_size=n, max_size=n))
    return graph_of(rows)


@st.composite
def condition_k_graphs(draw, **kw):
    """Random Condition (K) graphs, built from a seeded generator to avoid filtering."""
    from graphmoves.oracle import random_condition_k_graph

    seed = draw(st.integers(0, 2**32 - 1))
    g = random_condition_k_graph(random.Random(seed), **kw)
    assert condition_K(g)
    return g


@st.composite
def int_matrices(draw, max_rows=5, max_cols=5, bound=9):
    r = draw(st.integers(1, max_rows))
    c = draw(st.integers(1, max_cols))
    return draw(st.lists(st.lists(st.integers(-bound, bound), min_size=c, max_size=c), min_size=r, max_size=r))
