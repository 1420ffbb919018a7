"""The eight acceptance criteria, each timed against its stated limit.

Every test prints one ``PASS``/``FAIL`` line; run ``pytest tests/test_acceptance.py -v``
or execute this file directly.
"""

import collections
import io
import random
import re
import sys
import time

import pytest

from graphmoves.cli import main as cli_main
from graphmoves.fingerprint import DistinguishedAt, NecessaryConditionsPass, compare_fingerprints, fk_fingerprint
from graphmoves.graph import INF, condition_K, is_isomorphic
from graphmoves.intmat import BlockMatrix, IntMatrix, matrix_gcd, smith_normal_form, step_products, verify_membership
from graphmoves.moves import Move, apply_move, expand_certificate
from graphmoves.oracle import all_small_graphs, bfs_components, random_condition_k_graph, random_legal_move
from graphmoves.pipeline import (Certificate, canonicalize, checklist, decide_equivalence,
                                 positive_factorization)
from graphmoves.pipeline.positive import three_cycle_factors, three_cycle_steps
from graphmoves.poset import chain
from graphmoves.textio import parse_graph, serialize_certificate, serialize_graph
from graphmoves.trail import cuntz_splice_twice_trail

from conftest import graph_of
from test_moves import DOUBLE_SPLICE
from test_pipeline import check_positive_path, random_positive_instance

# Criterion 7 asks for the whole depth-4 move space. One move from the 2742
# start graphs already gives about 61000 states, and depth 2 with a 5-vertex
# cap did not finish in 20 minutes, so the search keeps states with at most
# this many vertices and the criterion is reported as failed. None removes the cap.
BFS_MAX_VERTICES = 4


class Report:
    def __init__(self, capsys, name, limit):
        self.capsys, self.name, self.limit = capsys, name, limit
        self.start = time.perf_counter()

    def finish(self, ok, detail=""):
        elapsed = time.perf_counter() - self.start
        ok = ok and elapsed < self.limit
        with self.capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} {self.name}: {detail} ({elapsed:.2f} s, limit {self.limit:g} s)")
        assert ok, f"{self.name}: {detail} in {elapsed:.2f} s"


def test_criterion_1_splice_twice_trail(capsys):
    rep = Report(capsys, "1 splice twice trail", 1.0)
    two_loops = graph_of([[2]], ["u"])
    cert = cuntz_splice_twice_trail(two_loops, "u")
    cert.verify()
    flat = expand_certificate(cert)
    flat.verify()
    ok = cert.start == two_loops and is_isomorphic(cert.end, graph_of(DOUBLE_SPLICE))
    rep.finish(ok, f"{cert.move_count()} moves, {flat.move_count()} after expansion, end matches the double splice")


def test_criterion_2_fingerprint_move_invariance(capsys):
    rep = Report(capsys, "2 fingerprint move invariance", 60.0)
    rng = random.Random(2)
    passed = total = 0
    kinds = collections.Counter()
    while total < 200:
        g = random_condition_k_graph(rng, max_vertices=8, max_mult=3)
        m = random_legal_move(g, rng)
        if m is None:
            continue
        h = apply_move(g, m)
        total += 1
        kinds[m.kind] += 1
        passed += isinstance(compare_fingerprints(fk_fingerprint(g), fk_fingerprint(h)), NecessaryConditionsPass)
    mix = " ".join(f"{k}:{kinds[k]}" for k in sorted(kinds))
    rep.finish(passed == total, f"{passed}/{total} comparisons pass (moves {mix})")


def _divisibility_chain(d):
    return all(x > 0 for x in d) and all(d[i + 1] % d[i] == 0 for i in range(len(d) - 1))


def test_criterion_3_smith_normal_form_suite(capsys):
    rep = Report(capsys, "3 Smith normal form suite", 10.0)
    rng = random.Random(3)
    good = 0
    for _ in range(1000):
        r, c = rng.randint(1, 6), rng.randint(1, 6)
        B = IntMatrix([[rng.randint(-9, 9) for _ in range(c)] for _ in range(r)])
        res = smith_normal_form(B)
        ok = res.U @ B @ res.V == res.D and abs(res.U.det()) == 1 and abs(res.V.det()) == 1
        ok = ok and _divisibility_chain(res.divisors)
        ok = ok and all(res.D[i, j] == (res.divisors[i] if i == j and i < res.rank else 0)
                        for i in range(r) for j in range(c))
        if not B.is_zero():
            ok = ok and matrix_gcd(B) == res.divisors[0]
        good += ok
    rep.finish(good == 1000, f"{good}/1000 matrices with exact witnesses, divisor chain and gcd = d1")


def test_criterion_4_positive_factorization(capsys):
    rep = Report(capsys, "4 positive factorization", 120.0)
    # pinned regression: the six factors of the three-cycle, and their use on a positive block
    prod = IntMatrix.identity(3)
    for f in three_cycle_factors():
        prod = prod @ f
    pinned = prod.tolist() == [[0, 1, 0], [0, 0, 1], [1, 0, 0]]
    B = BlockMatrix(IntMatrix([[2, 1, 1], [1, 3, 1], [1, 1, 4]]), [3], [3], chain(1))
    steps = three_cycle_steps(0, 1, 2)
    U, _ = step_products(steps, 3, 3)
    pinned = pinned and U.tolist() == [[0, 1, 0], [0, 0, 1], [1, 0, 0]]
    cur = B.matrix
    for s in steps:
        cur = s.apply(cur)
        pinned = pinned and bool(verify_membership(B.with_matrix(cur), "M_P+"))

    rng = random.Random(4)
    good, longest = 0, 0
    for _ in range(100):
        B, B2, U, V = random_positive_instance(rng)
        out = positive_factorization(B, B2, U, V)
        check_positive_path(B, B2, U, V, out)
        good += 1
        longest = max(longest, len(out))
    rep.finish(pinned and good == 100,
               f"{good}/100 instances stay in M_P+ and multiply back, longest {longest} steps; "
               f"three-cycle factors {'ok' if pinned else 'WRONG'}")


def test_criterion_5_end_to_end_positive(capsys, tmp_path):
    rep = Report(capsys, "5 end-to-end positive case", 300.0)
    # graph files number their vertices, so the graphs are taken from the files
    g1, g2, cert = tmp_path / "two-loops.g", tmp_path / "its-splice.g", tmp_path / "c.txt"
    g1.write_text(serialize_graph(graph_of([[2]]), "two-loops"))
    g2.write_text(serialize_graph(apply_move(graph_of([[2]]), Move.C("1")), "its-splice"))
    two_loops, splice = parse_graph(g1.read_text()), parse_graph(g2.read_text())
    res = decide_equivalence(two_loops, splice)
    ok = isinstance(res, Certificate)
    detail = str(res)
    if ok:
        cert.write_text(serialize_certificate(res.certificate, "two-loops", "its-splice"))
        out = io.StringIO()
        ok = cli_main(["verify", str(cert), str(g1), str(g2)], out) == 0
        detail += f"; verify: {out.getvalue().strip()}"
    rep.finish(ok, detail)


def test_criterion_6_end_to_end_negative(capsys):
    rep = Report(capsys, "6 end-to-end negative case", 1.0)
    res = decide_equivalence(graph_of([[2]]), graph_of([[3]]))
    ok = isinstance(res, DistinguishedAt) and res.site.startswith("K₀ 0 vs Z/2")
    rep.finish(ok, str(res))


def _fingerprint_key(f):
    # vertex names differ between isomorphic graphs; drop them before caching
    return re.sub(r" vertices \S+", "", f.text())


def test_criterion_7_oracle_soundness(capsys):
    rep = Report(capsys, "7 oracle soundness", 600.0)
    starts = [g for n in (1, 2, 3) for g in all_small_graphs(n, 2) if condition_K(g)]
    uf, states, truncated = bfs_components(starts, 4, max_vertices=BFS_MAX_VERTICES)
    groups = collections.defaultdict(list)
    for key, g in states.items():
        groups[uf.find(key)].append(g)
    compared, bad = 0, []
    for members in groups.values():
        ref = fk_fingerprint(members[0])
        verdicts = {_fingerprint_key(ref): True}
        for g in members[1:]:
            f = fk_fingerprint(g)
            k = _fingerprint_key(f)
            if k not in verdicts:
                compared += 1
                verdicts[k] = isinstance(compare_fingerprints(ref, f), NecessaryConditionsPass)
                if not verdicts[k]:
                    bad.append((members[0], g))
    scope = "the full move space" if BFS_MAX_VERTICES is None else \
        f"only states with at most {BFS_MAX_VERTICES} vertices, so the criterion as stated is not met"
    rep.finish(BFS_MAX_VERTICES is None and not bad and not truncated,
               f"{len(starts)} start graphs, depth 4, {scope}: {len(states)} states in {len(groups)} components, "
               f"{compared} distinct fingerprints compared, {len(bad)} disagreements")


def canonical_corpus():
    """Twenty Condition (K) graphs: hand-picked shapes followed by seeded random ones."""
    corpus = [graph_of(A) for A in (
        [[2]], [[3]], [[1, 1], [1, 1]], [[2, 1, 0], [1, 1, 1], [0, 1, 1]], [[2, 1], [0, 2]],
        [[2, 1], [1, 0]], [[INF]], [[INF, 1], [1, 2]], [[0, 1, 1], [0, 2, 0], [0, 0, 3]],
        [[2, 1, 0], [0, 2, 1], [0, 0, 2]], [[0, 1, 0], [0, 0, 1], [0, 0, 0]], [[1, 2], [2, 1]],
    )]
    rng = random.Random(8)
    while len(corpus) < 20:
        corpus.append(random_condition_k_graph(rng, max_vertices=5, max_mult=3, infinite=0.1))
    return corpus


def test_criterion_8_canonical_form_checklist(capsys):
    rep = Report(capsys, "8 canonical form checklist", 60.0)
    corpus = canonical_corpus()
    assert len(corpus) == 20 and all(condition_K(g) for g in corpus)
    good, moves = 0, 0
    for g in corpus:
        res = canonicalize(g)
        ok = res.ok and all(checklist(res.graph).values())
        ok = ok and res.moves.start == g and res.moves.replay() == res.graph
        good += ok
        moves += len(res.moves)
    rep.finish(good == 20, f"{good}/20 graphs pass all five properties with replayed logs ({moves} moves in total)")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
