"""Packed-monomial kernel for division and Buchberger's algorithm.

Every supported order compares monomials by a vector of nonnegative linear
forms in the exponents (lex: the exponents; degrevlex: total degree followed
by partial sums).  Packing those fields into one integer gives a key that is
additive under multiplication and whose integer order is the monomial order.
Divisibility uses a second packing of the raw exponents with guard bits.
"""

from __future__ import annotations

import heapq
from fractions import Fraction
from typing import Sequence

from .orders import Exponent, MonomialOrder

try:  # GMP rationals make the inner loops roughly ten times faster
    from gmpy2 import mpq as coef
except ImportError:  # pragma: no cover
    coef = Fraction

BITS = 32
MASK = (1 << BITS) - 1


def _degrevlex_fields(perm: Sequence[int], n: int) -> list[list[int]]:
    # (deg, S_{k-1}, ..., S_1) with S_j the sum of the first j exponents
    fields = [[1 if i in perm else 0 for i in range(n)]]
    for k in range(len(perm) - 1, 0, -1):
        row = [0] * n
        for i in perm[:k]:
            row[i] = 1
        fields.append(row)
    return fields


class PackedRing:
    def __init__(self, order: MonomialOrder, universe: Sequence[str]):
        if set(universe) != set(order.vars):
            raise ValueError(
                f"order variables {order.vars} do not match universe {tuple(universe)}")
        self.n = n = len(universe)
        pos = {v: i for i, v in enumerate(universe)}
        perm = [pos[v] for v in order.vars]
        if order.kind == "lex":
            head, rest = perm, []
        elif order.kind == "degrevlex":
            head, rest = [], perm
        else:
            head, rest = perm[: order.nelim], perm[order.nelim:]
        fields = [[1 if i == p else 0 for i in range(n)] for p in head]
        if rest:
            fields += _degrevlex_fields(rest, n)
        self.head, self.rest = head, rest
        self.kind = order.kind
        self.nf = nf = len(fields)
        self.weights = [sum(row[i] << (BITS * (nf - 1 - f)) for f, row in enumerate(fields))
                        for i in range(n)]
        self.xweights = [1 << (BITS * i) for i in range(n)]
        self.guard = sum(1 << (BITS * i + BITS - 1) for i in range(n))
        self._xcache: dict[int, int] = {}

    # monomials -----------------------------------------------------------------
    def enc(self, e: Exponent) -> int:
        return sum(k * w for k, w in zip(e, self.weights) if k)

    def dec(self, o: int) -> Exponent:
        nf = self.nf
        vals = [(o >> (BITS * (nf - 1 - f))) & MASK for f in range(nf)]
        e = [0] * self.n
        for f, p in enumerate(self.head):
            e[p] = vals[f]
        if self.rest:
            tail = vals[len(self.head):]
            # tail = [deg, S_{k-1}, ..., S_1]
            sums = [0] + tail[:0:-1] + [tail[0]]
            for j, p in enumerate(self.rest):
                e[p] = sums[j + 1] - sums[j]
        return tuple(e)

    def xenc(self, e: Exponent) -> int:
        return sum(k * w for k, w in zip(e, self.xweights) if k)

    def expo(self, o: int) -> int:
        x = self._xcache.get(o)
        if x is None:
            x = self._xcache[o] = self.xenc(self.dec(o))
        return x

    def divides(self, xa: int, xb: int) -> bool:
        g = self.guard
        return ((xb | g) - xa) & g == g

    # polynomials ---------------------------------------------------------------
    def pack(self, terms) -> dict[int, object]:
        return {self.enc(e): coef(c.numerator, c.denominator) for e, c in terms.items()}

    def unpack(self, f) -> dict[Exponent, Fraction]:
        return {self.dec(o): Fraction(int(c.numerator), int(c.denominator))
                for o, c in f.items()}

    def monic(self, f: dict) -> tuple[int, dict]:
        lm = max(f)
        c = f[lm]
        if c == 1:
            return lm, f
        inv = 1 / c
        return lm, {o: x * inv for o, x in f.items()}

    def divisor(self, f: dict) -> tuple[int, int, list]:
        """Monic ``f`` prepared for reduction: (lm, packed exponent, tail items)."""
        lm, f = self.monic(f)
        return lm, self.expo(lm), [(o, c) for o, c in f.items() if o != lm]

    def reduce(self, f: dict, basis: Sequence[tuple[int, int, list]]) -> dict:
        """Full reduction of ``f`` by monic divisors."""
        f = dict(f)
        rem = {}
        heap = [-o for o in f]
        heapq.heapify(heap)
        g_ = self.guard
        expo = self.expo
        pop, push = heapq.heappop, heapq.heappush
        while heap:
            o = -pop(heap)
            c = f.pop(o, None)
            if c is None:
                continue
            xo = expo(o) | g_
            for lo, lx, tail in basis:
                if (xo - lx) & g_ == g_:
                    q = o - lo
                    for go, gc in tail:
                        mm = go + q
                        old = f.get(mm)
                        if old is None:
                            f[mm] = -c * gc
                            push(heap, -mm)
                        else:
                            s = old - c * gc
                            if s:
                                f[mm] = s
                            else:
                                del f[mm]
                    break
            else:
                rem[o] = c
        return rem

    def lcm(self, a: int, b: int) -> int:
        return self.enc(tuple(max(x, y) for x, y in zip(self.dec(a), self.dec(b))))

    def coprime(self, a: int, b: int) -> bool:
        return not any(x and y for x, y in zip(self.dec(a), self.dec(b)))

    def deg(self, o: int) -> int:
        return sum(self.dec(o))

    def spoly(self, la: int, fa: dict, lb: int, fb: dict) -> dict:
        L = self.lcm(la, lb)
        qa, qb = L - la, L - lb
        out = {o + qa: c for o, c in fa.items() if o != la}
        for o, c in fb.items():
            if o == lb:
                continue
            mm = o + qb
            s = out.get(mm, 0) - c
            if s:
                out[mm] = s
            else:
                out.pop(mm, None)
        return out

    # Buchberger -----------------------------------------------------------------
    def groebner(self, polys: list[dict]) -> list[dict]:
        """Reduced Groebner basis (monic, descending leading terms).

        Gebauer-Moeller pair update; pairs are chosen by the sugar strategy,
        or by smallest lcm under lex.
        """
        lms: list[int] = []
        lmx: list[int] = []
        elems: list[dict] = []
        divs: list[tuple] = []
        sugar: list[int] = []
        active: list[int] = []
        pairs: list[tuple] = []  # (sugar, lcm, i, j, packed exponent of lcm)
        divides = self.divides
        # sugar only pays off for degree-compatible orders
        skip = 1 if self.kind == "lex" else 0

        def update(h: int):
            nonlocal active, pairs
            lh, xh = lms[h], lmx[h]
            lcms = {g: self.lcm(lh, lms[g]) for g in active}
            xl = {g: self.expo(lcms[g]) for g in active}
            cand = list(active)
            kept: list[int] = []
            while cand:
                g1 = cand.pop(0)
                if self.coprime(lh, lms[g1]) or not any(
                        divides(xl[g2], xl[g1]) for g2 in cand + kept):
                    kept.append(g1)
            new_pairs = []
            for g in kept:
                if self.coprime(lh, lms[g]):
                    continue
                L = lcms[g]
                dl = self.deg(L)
                sug = max(sugar[g] + dl - self.deg(lms[g]), sugar[h] + dl - self.deg(lh))
                new_pairs.append((sug, L, g, h, xl[g]))
            pairs = [p for p in pairs
                     if not (divides(xh, p[4])
                             and self.lcm(lms[p[2]], lh) != p[1]
                             and self.lcm(lms[p[3]], lh) != p[1])]
            pairs.extend(new_pairs)
            active = [g for g in active if not divides(xh, lmx[g])]
            active.append(h)

        def add(f: dict, sug: int) -> bool:
            lm, f = self.monic(f)
            lms.append(lm)
            lmx.append(self.expo(lm))
            elems.append(f)
            divs.append((lm, lmx[-1], [(o, c) for o, c in f.items() if o != lm]))
            sugar.append(max(sug, self.deg(lm)))
            update(len(elems) - 1)
            return lm == 0

        for f in sorted(polys, key=max):
            h = self.reduce(f, [divs[k] for k in active])
            if h and add(h, max(self.deg(o) for o in f)):
                return [{0: coef(1)}]

        while pairs:
            best = min(range(len(pairs)), key=lambda i: pairs[i][skip:4])
            sug, _, i, j, _ = pairs.pop(best)
            s = self.spoly(lms[i], elems[i], lms[j], elems[j])
            if not s:
                continue
            h = self.reduce(s, [divs[k] for k in active])
            if h and add(h, sug):
                return [{0: coef(1)}]

        minimal = [k for k in active
                   if not any(k2 != k and divides(lmx[k2], lmx[k]) for k2 in active)]
        out = []
        for k in minimal:
            others = [divs[k2] for k2 in minimal if k2 != k]
            out.append(self.monic(self.reduce(elems[k], others))[1])
        out.sort(key=max, reverse=True)
        return out
