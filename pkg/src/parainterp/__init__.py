"""Fock-space Gram matrices for interpolations between para-Bose and para-Fermi statistics."""

from .errors import ParaInterpError, ResourceLimitError, ValidationError, VerificationError
from .params import INFINITE, DeformationSpec, Family, green_q, make_preset
from .gram import GramBasis, GramMatrix, Permutation, build_gram, gram_entry, inversion_pairs
from .oracle import Word, parse_word, vev_a_word, vev_b_word

__all__ = [
    "INFINITE",
    "DeformationSpec",
    "Family",
    "GramBasis",
    "GramMatrix",
    "ParaInterpError",
    "Permutation",
    "ResourceLimitError",
    "ValidationError",
    "VerificationError",
    "Word",
    "build_gram",
    "gram_entry",
    "green_q",
    "inversion_pairs",
    "make_preset",
    "parse_word",
    "vev_a_word",
    "vev_b_word",
]

__version__ = "0.1.0"
