"""Ideals, multivariate division and Buchberger's algorithm over Q."""

from __future__ import annotations

from typing import Iterable, Sequence

from .orders import MonomialOrder, block, degrevlex, lex
from .packed import PackedRing
from .polynomial import MultiPoly, UniverseMismatch


class Ideal:
    """Finitely generated ideal with a monomial order.

    ``reduced`` is true iff ``generators`` is the reduced Groebner basis of the
    ideal under ``order``.
    """

    __slots__ = ("vars", "generators", "order", "reduced")

    def __init__(self, vars: Sequence[str], generators: Iterable[MultiPoly] = (),
                 order: MonomialOrder | None = None, reduced: bool = False):
        self.vars = tuple(vars)
        gens = []
        for g in generators:
            if g.vars != self.vars:
                raise UniverseMismatch(f"generator over {g.vars}, ideal over {self.vars}")
            if g:
                gens.append(g)
        self.generators = tuple(gens)
        self.order = order or degrevlex(*self.vars)
        self.reduced = reduced

    def groebner(self) -> "Ideal":
        return self if self.reduced else buchberger(self.generators, self.order, self.vars)

    def with_order(self, order: MonomialOrder) -> "Ideal":
        if self.reduced and order == self.order:
            return self
        return buchberger(self.generators, order, self.vars)

    def embed(self, vars: Sequence[str]) -> "Ideal":
        """Same generators over a larger universe."""
        return Ideal(vars, [g.embed(vars) for g in self.generators])

    def canonical(self) -> "Ideal":
        return self.with_order(canonical_order(self.vars))

    def is_zero(self) -> bool:
        return not self.generators

    def is_unit(self) -> bool:
        gb = self.groebner()
        return len(gb.generators) == 1 and gb.generators[0].is_constant()

    def __contains__(self, p: MultiPoly) -> bool:
        if not p:
            return True
        gb = self.groebner()
        if not gb.generators:
            return False
        return not normal_form(p, gb.generators, gb.order)

    def contains_ideal(self, other: "Ideal") -> bool:
        return all(g in self for g in other.generators)

    def __len__(self):
        return len(self.generators)

    def __iter__(self):
        return iter(self.generators)

    def __eq__(self, other):
        if not isinstance(other, Ideal):
            return NotImplemented
        return ideal_equal(self, other)

    __hash__ = None

    def __repr__(self):
        gens = ", ".join(g.format(self.order) for g in self.generators)
        return f"Ideal<{gens}> over {self.vars} ({self.order})"


def normal_form(p: MultiPoly, G: Sequence[MultiPoly], order: MonomialOrder) -> MultiPoly:
    """Remainder of ``p`` on full division by ``G`` (in the given order of ``G``)."""
    for g in G:
        if g.vars != p.vars:
            raise UniverseMismatch(f"{g.vars} vs {p.vars}")
        if not g:
            raise ValueError("zero polynomial in divisor list")
    ring = PackedRing(order, p.vars)
    basis = [ring.divisor(ring.pack(g.terms)) for g in G]
    return MultiPoly._raw(p.vars, ring.unpack(ring.reduce(ring.pack(p.terms), basis)))


def spoly(f: MultiPoly, g: MultiPoly, order: MonomialOrder) -> MultiPoly:
    ring = PackedRing(order, f.vars)
    lf, tf = ring.monic(ring.pack(f.terms))
    lg, tg = ring.monic(ring.pack(g.terms))
    return MultiPoly._raw(f.vars, ring.unpack(ring.spoly(lf, tf, lg, tg)))


def buchberger(gens: Sequence[MultiPoly], order: MonomialOrder,
               vars: Sequence[str] | None = None) -> Ideal:
    """Reduced Groebner basis of the ideal generated by ``gens``."""
    gens = [g for g in gens if g]
    if vars is None:
        if not gens:
            raise ValueError("universe needed for an empty generator list")
        vars = gens[0].vars
    vars = tuple(vars)
    for g in gens:
        if g.vars != vars:
            raise UniverseMismatch(f"{g.vars} vs {vars}")
    ring = PackedRing(order, vars)
    basis = ring.groebner([ring.pack(g.terms) for g in gens]) if gens else []
    return Ideal(vars, [MultiPoly._raw(vars, ring.unpack(t)) for t in basis], order,
                 reduced=True)


def is_groebner(G: Sequence[MultiPoly], order: MonomialOrder) -> bool:
    """Buchberger's criterion: every S-polynomial reduces to zero."""
    G = [g for g in G if g]
    for i in range(len(G)):
        for j in range(i + 1, len(G)):
            if normal_form(spoly(G[i], G[j], order), G, order):
                return False
    return True


def _solve_linear_kills(gens: list[MultiPoly], kill: list[str]) -> list[MultiPoly]:
    """Substitute away kill variables that some generator defines linearly.

    If ``g = c*v + h`` with ``c`` a nonzero constant and ``h`` free of ``v``,
    then eliminating ``v`` from the ideal equals substituting ``v = -h/c`` in
    the other generators; no Groebner basis is needed for that variable.
    """
    gens = [g for g in gens if g]
    pending = set(kill)
    while pending:
        found = None
        for g in sorted(gens, key=lambda g: len(g.terms)):
            for v in sorted(pending & g.used_vars(), key=kill.index):
                i = g.vars.index(v)
                hits = [(e, c) for e, c in g.terms.items() if e[i]]
                e, c = hits[0]
                if len(hits) == 1 and e[i] == 1 and sum(e) == 1:
                    found = (g, v, -(g - MultiPoly.var(v, g.vars) * c) * (1 / c))
                    break
            if found:
                break
        if not found:
            break
        g, v, image = found
        pending.discard(v)
        gens = [x.subs({v: image}) if v in x.used_vars() else x for x in gens if x is not g]
        gens = [x for x in gens if x]
    return gens


def _sorted_vars(vars: Iterable[str]) -> list[str]:
    return sorted(vars, key=lambda v: (not v.endswith("_0"), v))


def canonical_order(vars: Iterable[str]) -> MonomialOrder:
    """Pure lex with initial-value variables (suffix ``_0``) above all others,
    alphabetical within each group."""
    return lex(*_sorted_vars(vars))


def working_order(vars: Iterable[str]) -> MonomialOrder:
    """Degrevlex with each program variable directly followed by its initial
    value; intermediate bases stay much smaller than under lex."""
    vars = list(vars)
    seq: list[str] = []
    for v in sorted(v for v in vars if not v.endswith("_0")):
        seq.append(v)
        if v + "_0" in vars:
            seq.append(v + "_0")
    seq += sorted(v for v in vars if v not in seq)
    return degrevlex(*seq)


def eliminate(I: Ideal, kill: Iterable[str], order: MonomialOrder | None = None) -> Ideal:
    """Reduced basis of ``I`` intersected with the ring without ``kill``.

    The result is reduced with respect to ``order`` on the remaining
    variables (default: :func:`working_order`).
    """
    kill = [v for v in I.vars if v in set(kill)]
    rest_universe = tuple(v for v in I.vars if v not in kill)
    target = order or working_order(rest_universe)
    if not kill:
        return I.with_order(target)
    gens = _solve_linear_kills(list(I.generators), kill)
    if not any(g.mentions(kill) for g in gens):
        return buchberger([g.embed(rest_universe) for g in gens], target, rest_universe)
    if target.kind == "lex":
        elim = lex(*kill, *target.vars)
    elif target.kind == "degrevlex":
        elim = block(kill, target.vars)
    else:
        raise ValueError("elimination target must be lex or degrevlex")
    gb = buchberger(gens, elim, I.vars)
    keep = [g.embed(rest_universe) for g in gb.generators if not g.mentions(kill)]
    return Ideal(rest_universe, keep, target, reduced=True)


def _fresh(base: str, taken: Iterable[str]) -> str:
    taken = set(taken)
    name, k = base, 0
    while name in taken:
        k += 1
        name = f"{base}{k}"
    return name


def intersect(I: Ideal, J: Ideal, order: MonomialOrder | None = None) -> Ideal:
    """I ∩ J by eliminating t from t*I + (1 - t)*J."""
    if I.vars != J.vars:
        raise UniverseMismatch(f"{I.vars} vs {J.vars}")
    if I.is_zero() or J.is_zero():
        return Ideal(I.vars, (), order or working_order(I.vars), reduced=True)
    t = _fresh("__t", I.vars)
    univ = (t,) + I.vars
    tv = MultiPoly.var(t, univ)
    gens = [tv * g.embed(univ) for g in I.generators]
    gens += [(1 - tv) * g.embed(univ) for g in J.generators]
    return eliminate(Ideal(univ, gens), [t], order)


def ideal_equal(I: Ideal, J: Ideal) -> bool:
    """Equality via reduced Groebner bases under one fixed order.

    Reduced bases are unique per order, so any shared order decides
    equality; an order both sides are already reduced in is reused.
    """
    if I.vars != J.vars:
        raise UniverseMismatch(f"{I.vars} vs {J.vars}")
    if I.reduced and J.reduced and I.order == J.order:
        order = I.order
    elif I.reduced:
        order = I.order
    elif J.reduced:
        order = J.order
    else:
        order = working_order(I.vars)
    return I.with_order(order).generators == J.with_order(order).generators
