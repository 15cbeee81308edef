"""Exact polynomial algebra over Q: polynomials, orders, Groebner bases."""

from .groebner import (
    Ideal,
    buchberger,
    canonical_order,
    eliminate,
    ideal_equal,
    intersect,
    is_groebner,
    normal_form,
    spoly,
    working_order,
)
from .orders import MonomialOrder, block, degrevlex, lex
from .polynomial import QQ, BigRational, MultiPoly, UniverseMismatch, parse_poly, ring
from .roots import rational_roots

__all__ = [
    "BigRational",
    "Ideal",
    "MonomialOrder",
    "MultiPoly",
    "QQ",
    "UniverseMismatch",
    "block",
    "buchberger",
    "canonical_order",
    "degrevlex",
    "eliminate",
    "ideal_equal",
    "intersect",
    "is_groebner",
    "lex",
    "normal_form",
    "parse_poly",
    "rational_roots",
    "ring",
    "spoly",
    "working_order",
]
