"""The end-to-end decision: canonical forms, standard pairs, SL_P conversion,
positive factorization and the translation of steps into moves."""

from .assemble import Certificate, Distinguished, Inconclusive, decide_equivalence, steps_to_moves
from .canonical import CanonicalFormReport, canonicalize, checklist
from .glsl import gl_to_sl
from .positive import positive_factorization
from .standard import LabeledEquivalence, lift_pair, standardize_pair

__all__ = ["Certificate", "Distinguished", "Inconclusive", "decide_equivalence", "steps_to_moves",
           "CanonicalFormReport", "canonicalize", "checklist", "gl_to_sl", "positive_factorization",
           "LabeledEquivalence", "lift_pair", "standardize_pair"]
