"""Exact invariants of directed multigraphs and certificates of move equivalence."""

from .fingerprint import compare_fingerprints, fk_fingerprint
from .graph import INF, Graph, build_graph, condition_K, ideal_poset
from .intmat import IntMatrix, smith_normal_form
from .moves import Move, MoveCertificate, apply_move, derived_matrix_move
from .pipeline import canonicalize, decide_equivalence
from .textio import parse_graph, serialize_graph
from .trail import cuntz_splice_twice_trail

__all__ = ["INF", "Graph", "build_graph", "condition_K", "ideal_poset", "IntMatrix", "smith_normal_form", "Move",
           "MoveCertificate", "apply_move", "derived_matrix_move", "fk_fingerprint", "compare_fingerprints",
           "canonicalize", "decide_equivalence", "parse_graph", "serialize_graph", "cuntz_splice_twice_trail"]
