import io

import pytest
from hypothesis import given, settings

from graphmoves.cli import main
from graphmoves.graph import INF, is_isomorphic
from graphmoves.intmat import IntMatrix
from graphmoves.pipeline import Certificate, checklist, decide_equivalence
from graphmoves.textio import (GraphFile, ParseError, parse_certificate, parse_graph, parse_matrix,
                               serialize_certificate, serialize_graph, serialize_matrix)

from conftest import small_graphs

TWO_LOOPS = "graph two-loops\nvertices 1\nedge 1 1 2\n"
THREE_LOOPS = "graph three-loops\nvertices 1\nedge 1 1 3\n"
SPLICE = ("graph its-splice\nvertices 3\nedge 1 1 2\nedge 1 2 1\nedge 2 1 1\nedge 2 2 1\nedge 2 3 1\n"
          "edge 3 2 1\nedge 3 3 1\n")
E_STAR = "graph e-star\nvertices 2\nedge 1 1 1\nedge 1 2 1\nedge 2 1 1\nedge 2 2 1\n"


# -- graph files ---------------------------------------------------------------

def test_parse_two_loops():
    assert parse_graph(TWO_LOOPS).adjacency() == [[2]]


def test_parse_e_star():
    assert parse_graph(E_STAR).adjacency() == [[1, 1], [1, 1]]


def test_parse_comments_and_inf():
    g = parse_graph("# header\ngraph g  # name\nvertices 2\nedge 1 2 inf\n\nedge 2 2 2\n")
    assert g.mult("1", "2") is INF


@pytest.mark.parametrize("text,line", [
    ("graph g\nvertices 2\nedge 1 3 1\n", 3),
    ("graph g\nvertices 1\nedge 1 1 -2\n", 3),
    ("graph g\nvertices 1\nedge 1 1 lots\n", 3),
    ("graph g\nvertices 1\nloop 1\n", 3),
    ("vertices 1\n", 1),
    ("graph g\n", 0),
])
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(ParseError) as info:
        parse_graph(text)
    assert info.value.line == line


@pytest.mark.parametrize("text", [TWO_LOOPS, SPLICE, E_STAR])
def test_canonical_files_round_trip(text):
    assert GraphFile.parse(text).serialize() == text


@settings(max_examples=60, deadline=None)
@given(small_graphs(max_vertices=5, infinite=True))
def test_graph_round_trip(g):
    text = serialize_graph(g, "h")
    assert is_isomorphic(parse_graph(text), g)
    assert serialize_graph(parse_graph(text), "h") == text


def test_matrix_round_trip():
    m = IntMatrix([[2, -4], [6, 8]])
    assert parse_matrix(serialize_matrix(m)) == m
    with pytest.raises(ParseError):
        parse_matrix("1 2\n3\n")


# -- certificate files ---------------------------------------------------------------

def test_certificate_round_trip():
    g1, g2 = parse_graph(E_STAR), parse_graph(SPLICE)
    res = decide_equivalence(g1, g2)
    assert isinstance(res, Certificate)
    text = serialize_certificate(res.certificate, "e-star", "its-splice")
    back = parse_certificate(text, g1, g2)
    back.verify()
    assert serialize_certificate(back, "e-star", "its-splice") == text


def test_certificate_for_other_graphs_is_rejected():
    g1, g2 = parse_graph(E_STAR), parse_graph(SPLICE)
    text = serialize_certificate(decide_equivalence(g1, g2).certificate)
    with pytest.raises(ParseError):
        parse_certificate(text, parse_graph(TWO_LOOPS), g2)


# -- commands --------------------------------------------------------------------

def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, text in (("two", TWO_LOOPS), ("three", THREE_LOOPS), ("splice", SPLICE), ("estar", E_STAR)):
        p = tmp_path / f"{name}.g"
        p.write_text(text)
        paths[name] = str(p)
    paths["dir"] = tmp_path
    return paths


def test_equiv_and_verify_close_the_loop(files):
    cert = str(files["dir"] / "c.txt")
    code, text = run("equiv", files["two"], files["splice"], "--emit", cert)
    assert code == 0 and text.startswith("Certificate:")
    code, text = run("verify", cert, files["two"], files["splice"])
    assert code == 0 and text.startswith("valid:")


def test_tampered_certificate_is_invalid(files):
    cert = files["dir"] / "c.txt"
    run("equiv", files["estar"], files["splice"], "--emit", str(cert))
    lines = cert.read_text().splitlines()
    k = next(i for i, x in enumerate(lines) if x.startswith("hash "))
    lines[k] = "hash " + "0" * 64
    cert.write_text("\n".join(lines) + "\n")
    code, text = run("verify", str(cert), files["estar"], files["splice"])
    assert code == 1 and text.startswith("invalid:")


def test_equiv_distinguishes_two_and_three_loops(files):
    code, text = run("equiv", files["two"], files["three"])
    assert code == 1
    assert text.startswith("Distinguished: K₀ 0 vs Z/2")


def test_equiv_with_zero_budget_is_inconclusive(files):
    code, text = run("equiv", files["two"], files["splice"], "--budget", "0")
    assert code == 2 and text.startswith("Inconclusive")


def test_parse_error_exit_code(files):
    bad = files["dir"] / "bad.g"
    bad.write_text("graph g\nvertices 2\nedge 1 3 1\n")
    code, text = run("invariants", str(bad))
    assert code == 3 and "line 3" in text


def test_usage_errors(files):
    assert run()[0] == 3
    assert run("nonsense")[0] == 3
    assert run("invariants", str(files["dir"] / "missing.g"))[0] == 3


def test_condk_reports(files):
    assert run("condk", files["two"]) == (0, "Condition (K): yes\n")
    one = files["dir"] / "one.g"
    one.write_text("graph one\nvertices 1\nedge 1 1 1\n")
    code, text = run("condk", str(one))
    assert code == 1 and "one return path at 1" in text


def test_invariants_and_canonical(files):
    code, text = run("invariants", files["three"])
    assert code == 0 and "K0 {1} Z/2" in text
    out = files["dir"] / "canon.g"
    code, text = run("canonical", files["two"], "--emit", str(out))
    assert code == 0 and "(5) smith ones: yes" in text
    assert all(checklist(parse_graph(out.read_text())).values())


def test_snf_command(files):
    m = files["dir"] / "m.txt"
    m.write_text("2 4\n6 8\n")
    code, text = run("snf", str(m))
    assert code == 0 and text.splitlines()[0] == "divisors 2 4"


def test_oracle_bfs_command(files):
    code, text = run("oracle-bfs", files["two"], files["splice"], "--depth", "1")
    assert code == 0 and text == "connected within depth 1\n"
    code, _ = run("oracle-bfs", files["two"], files["three"], "--depth", "1", "--max-vertices", "2")
    assert code == 1


def test_random_graph_is_reproducible():
    a, b = run("random-graph", "--seed", "7"), run("random-graph", "--seed", "7")
    assert a == b and a[0] == 0
    parse_graph(a[1])
