"""Rational roots of univariate polynomials."""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd, isqrt, lcm

from .polynomial import MultiPoly

# Cap on numerator/denominator divisor pairs tried per deflation step.
MAX_CANDIDATES = 10**6


def _divisors(n: int) -> list[int]:
    n = abs(n)
    small, large = [], []
    for d in range(1, isqrt(n) + 1):
        if n % d == 0:
            small.append(d)
            if d != n // d:
                large.append(n // d)
    return small + large[::-1]


def _horner(coeffs: list[int], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _deflate(coeffs: list, r: Fraction) -> list:
    """Quotient of division by (x - r); coefficients low-to-high."""
    n = len(coeffs) - 1
    out = [Fraction(0)] * n
    acc = Fraction(0)
    for i in range(n, 0, -1):
        acc = acc * r + coeffs[i]
        out[i - 1] = acc
    return out


def _integerize(coeffs: list) -> list[int]:
    den = reduce(lcm, (Fraction(c).denominator for c in coeffs), 1)
    ints = [int(Fraction(c) * den) for c in coeffs]
    g = reduce(gcd, ints, 0) or 1
    return [c // g for c in ints]


def univariate_coeffs(p: MultiPoly) -> list[Fraction]:
    """Coefficients low-to-high of a polynomial in at most one variable."""
    used = p.used_vars()
    if len(used) > 1:
        raise ValueError(f"not univariate: {p}")
    if not used:
        return [p.constant_value()]
    i = p.vars.index(next(iter(used)))
    deg = max(e[i] for e in p.terms)
    out = [Fraction(0)] * (deg + 1)
    for e, c in p.terms.items():
        out[e[i]] = c
    return out


def rational_roots_of(coeffs: list) -> tuple[list[tuple[Fraction, int]], list[Fraction]]:
    """Rational roots with multiplicity and the rootless cofactor (low-to-high)."""
    coeffs = [Fraction(c) for c in coeffs]
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    if not any(coeffs):
        raise ValueError("zero polynomial has no finite root set")
    roots: dict[Fraction, int] = {}
    k = 0
    while len(coeffs) > 1 and coeffs[0] == 0:
        coeffs.pop(0)
        k += 1
    if k:
        roots[Fraction(0)] = k
    while len(coeffs) > 1:
        ints = _integerize(coeffs)
        ps, qs = _divisors(ints[0]), _divisors(ints[-1])
        if len(ps) * len(qs) > MAX_CANDIDATES:
            break
        found = None
        for q in qs:
            for p in ps:
                for cand in (Fraction(p, q), Fraction(-p, q)):
                    if _horner(ints, cand) == 0:
                        found = cand
                        break
                if found is not None:
                    break
            if found is not None:
                break
        if found is None:
            break
        roots[found] = roots.get(found, 0) + 1
        coeffs = _deflate(coeffs, found)
    lead = coeffs[-1]
    cofactor = [c / lead for c in coeffs]
    return sorted(roots.items()), cofactor


def rational_roots(p: MultiPoly) -> tuple[list[tuple[Fraction, int]], MultiPoly]:
    """Rational roots of ``p`` with multiplicities, plus the non-splitting cofactor.

    The cofactor is monic, shares ``p``'s universe, and is the constant 1 when
    ``p`` splits over Q.
    """
    if not p:
        raise ValueError("zero polynomial")
    used = p.used_vars()
    roots, cof = rational_roots_of(univariate_coeffs(p))
    if not used:
        return roots, MultiPoly.const(1, p.vars)
    x = MultiPoly.var(next(iter(used)), p.vars)
    cofactor = MultiPoly.zero(p.vars)
    for i, c in enumerate(cof):
        cofactor = cofactor + c * x**i
    return roots, cofactor
