"""Command line interface.

Exit codes: 0 success or equivalent, 1 distinguished or invalid, 2
inconclusive, 3 usage, parse or input errors.
"""

from __future__ import annotations

import argparse
import random
import sys

from .errors import ConditionKViolated
from .fingerprint import fk_fingerprint
from .graph import Graph, PreconditionViolated, condition_K
from .intmat import smith_normal_form
from .lift import DEFAULT_BUDGET
from .moves import CertificateError
from .oracle import bfs_connects, random_condition_k_graph
from .pipeline.assemble import Certificate, decide_equivalence
from .pipeline.canonical import canonicalize
from .fingerprint import DistinguishedAt
from .textio import GraphFile, ParseError, parse_certificate, parse_matrix, serialize_certificate, serialize_matrix

OK, NEGATIVE, INCONCLUSIVE, USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _graph(path: str) -> GraphFile:
    try:
        return GraphFile.parse(_read(path))
    except ParseError as exc:
        raise ParseError(exc.line, f"{path}: {exc.message}") from None


def _write(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None


def _labels_comment(g: Graph) -> list[str]:
    if list(g.vertices) == [str(k + 1) for k in range(len(g))]:
        return []
    return [f"# vertex {k + 1} is {v}" for k, v in enumerate(g.vertices)]


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_invariants(args, out) -> int:
    gf = _graph(args.graph)
    inv = fk_fingerprint(gf.graph)
    if inv.normalized:
        print(f"# normalized by {len(inv.normalizing_moves)} moves first", file=out)
    print(inv.text(), file=out)
    return OK


def cmd_condk(args, out) -> int:
    g = _graph(args.graph).graph
    bad = [v for v in g.vertices if g.return_path_class(v) == 1]
    if condition_K(g):
        print("Condition (K): yes", file=out)
        return OK
    print(f"Condition (K): no (one return path at {', '.join(bad)})", file=out)
    return NEGATIVE


def cmd_canonical(args, out) -> int:
    gf = _graph(args.graph)
    rep = canonicalize(gf.graph)
    print(rep.text(), file=out)
    print(f"moves {len(rep.moves)}", file=out)
    for m in rep.moves.moves:
        print(f"  {m.to_line()}", file=out)
    text = "\n".join(_labels_comment(rep.graph)) + ("\n" if _labels_comment(rep.graph) else "")
    text += GraphFile(f"{gf.name}-canonical", rep.graph).serialize()
    if args.emit:
        _write(args.emit, text)
    else:
        print(text, end="", file=out)
    return OK if rep.ok else NEGATIVE


def cmd_snf(args, out) -> int:
    try:
        m = parse_matrix(_read(args.matrix))
    except ParseError as exc:
        raise ParseError(exc.line, f"{args.matrix}: {exc.message}") from None
    res = smith_normal_form(m)
    print("divisors " + " ".join(str(d) for d in res.divisors), file=out)
    for name, M in (("D", res.D), ("U", res.U), ("V", res.V)):
        print(name, file=out)
        print(serialize_matrix(M), end="", file=out)
    return OK


def cmd_equiv(args, out) -> int:
    g1, g2 = _graph(args.g1), _graph(args.g2)
    verdict = decide_equivalence(g1.graph, g2.graph, budget=args.budget)
    print(str(verdict), file=out)
    if isinstance(verdict, Certificate):
        if args.emit:
            _write(args.emit, serialize_certificate(verdict.certificate, g1.name, g2.name))
            print(f"certificate written to {args.emit}", file=out)
        return OK
    if isinstance(verdict, DistinguishedAt):
        return NEGATIVE
    return INCONCLUSIVE


def cmd_verify(args, out) -> int:
    g1, g2 = _graph(args.g1), _graph(args.g2)
    text = _read(args.cert)
    try:
        cert = parse_certificate(text, g1.graph, g2.graph)
        cert.verify()
    except (ParseError, CertificateError) as exc:
        print(f"invalid: {exc}", file=out)
        return NEGATIVE
    print(f"valid: {cert.move_count()} moves in {len(cert.segments)} segment(s)", file=out)
    return OK


def cmd_oracle_bfs(args, out) -> int:
    g1, g2 = _graph(args.g1), _graph(args.g2)
    connected, truncated = bfs_connects(g1.graph, g2.graph, args.depth, max_vertices=args.max_vertices,
                                        max_states=args.max_states)
    if connected:
        print(f"connected within depth {args.depth}", file=out)
        return OK
    if truncated:
        print(f"not connected within depth {args.depth} (state bound reached)", file=out)
        return INCONCLUSIVE
    print(f"not connected within depth {args.depth}", file=out)
    return NEGATIVE


def cmd_random_graph(args, out) -> int:
    rng = random.Random(args.seed)
    g = random_condition_k_graph(rng, max_vertices=args.vertices, max_mult=args.max_mult)
    print(GraphFile(f"random-{args.seed}", g).serialize(), end="", file=out)
    return OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="graphmoves", description="Graph invariants and move equivalence certificates.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("invariants", help="print the fingerprint of a graph")
    s.add_argument("graph")
    s.set_defaults(func=cmd_invariants)

    s = sub.add_parser("condk", help="check Condition (K)")
    s.add_argument("graph")
    s.set_defaults(func=cmd_condk)

    s = sub.add_parser("canonical", help="canonical form with move log and checklist")
    s.add_argument("graph")
    s.add_argument("--emit", help="write the canonical graph here")
    s.set_defaults(func=cmd_canonical)

    s = sub.add_parser("snf", help="Smith normal form of an integer matrix file")
    s.add_argument("matrix")
    s.set_defaults(func=cmd_snf)

    s = sub.add_parser("equiv", help="decide move equivalence and emit a certificate")
    s.add_argument("g1")
    s.add_argument("g2")
    s.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    s.add_argument("--emit", help="write the certificate here")
    s.set_defaults(func=cmd_equiv)

    s = sub.add_parser("verify", help="replay a certificate between two graphs")
    s.add_argument("cert")
    s.add_argument("g1")
    s.add_argument("g2")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("oracle-bfs", help="bounded forward search over moves")
    s.add_argument("g1")
    s.add_argument("g2")
    s.add_argument("--depth", type=int, required=True)
    s.add_argument("--max-vertices", type=int, default=None)
    s.add_argument("--max-states", type=int, default=None)
    s.set_defaults(func=cmd_oracle_bfs)

    s = sub.add_parser("random-graph", help="a random Condition (K) graph file")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--vertices", type=int, default=4)
    s.add_argument("--max-mult", type=int, default=3)
    s.set_defaults(func=cmd_random_graph)
    return p


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    try:
        args = build_parser().parse_args(argv)
        return args.func(args, out)
    except UsageError as exc:
        print(f"usage error: {exc}", file=out)
        return USAGE
    except ParseError as exc:
        print(f"parse error: {exc}", file=out)
        return USAGE
    except ConditionKViolated as exc:
        print(f"input error (condition K): {exc}", file=out)
        return USAGE
    except PreconditionViolated as exc:
        print(f"input error: {exc}", file=out)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
