"""Sparse multivariate polynomials over Q.

A :class:`MultiPoly` maps exponent tuples to nonzero rational coefficients.
Exponent positions refer to the polynomial's variable universe ``vars``;
arithmetic between polynomials over different universes is refused.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Iterable, Mapping, Sequence

from .orders import Exponent, MonomialOrder, degrevlex

BigRational = Fraction


class UniverseMismatch(ValueError):
    """Raised when combining polynomials over different variable universes."""


def QQ(x, den=None) -> Fraction:
    if den is None:
        return x if isinstance(x, Fraction) else Fraction(x)
    return Fraction(x, den)


def _add_exp(a: Exponent, b: Exponent) -> Exponent:
    return tuple([x + y for x, y in zip(a, b)])


class MultiPoly:
    __slots__ = ("vars", "terms", "_hash")

    def __init__(self, vars: Sequence[str], terms: Mapping[Exponent, object] | None = None):
        self.vars = tuple(vars)
        clean = {}
        if terms:
            n = len(self.vars)
            for e, c in terms.items():
                if len(e) != n:
                    raise UniverseMismatch(f"exponent {e} does not fit universe {self.vars}")
                if c:
                    clean[tuple(e)] = QQ(c)
        self.terms: dict[Exponent, Fraction] = clean
        self._hash = None

    @classmethod
    def _raw(cls, vars: tuple[str, ...], terms: dict) -> "MultiPoly":
        p = cls.__new__(cls)
        p.vars = vars
        p.terms = terms
        p._hash = None
        return p

    # construction ---------------------------------------------------------
    @classmethod
    def zero(cls, vars: Sequence[str]) -> "MultiPoly":
        return cls._raw(tuple(vars), {})

    @classmethod
    def const(cls, c, vars: Sequence[str]) -> "MultiPoly":
        vars = tuple(vars)
        c = QQ(c)
        return cls._raw(vars, {(0,) * len(vars): c} if c else {})

    @classmethod
    def var(cls, name: str, vars: Sequence[str]) -> "MultiPoly":
        vars = tuple(vars)
        e = [0] * len(vars)
        e[vars.index(name)] = 1
        return cls._raw(vars, {tuple(e): Fraction(1)})

    @classmethod
    def monomial(cls, powers: Mapping[str, int], vars: Sequence[str], coeff=1) -> "MultiPoly":
        vars = tuple(vars)
        e = [0] * len(vars)
        for name, k in powers.items():
            e[vars.index(name)] += k
        return cls(vars, {tuple(e): coeff})

    # basic queries --------------------------------------------------------
    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and not any(next(iter(self.terms))))

    def constant_value(self) -> Fraction:
        return self.terms.get((0,) * len(self.vars), Fraction(0))

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def degree(self, name: str) -> int:
        i = self.vars.index(name)
        return max((e[i] for e in self.terms), default=-1)

    def used_vars(self) -> set[str]:
        used = set()
        for e in self.terms:
            for v, k in zip(self.vars, e):
                if k:
                    used.add(v)
        return used

    def mentions(self, names: Iterable[str]) -> bool:
        idx = [self.vars.index(v) for v in names if v in self.vars]
        return any(e[i] for e in self.terms for i in idx)

    def __eq__(self, other):
        if isinstance(other, MultiPoly):
            return self.vars == other.vars and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.is_constant() and self.constant_value() == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.vars, frozenset(self.terms.items())))
        return self._hash

    # arithmetic -----------------------------------------------------------
    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            if other.vars != self.vars:
                raise UniverseMismatch(f"{self.vars} vs {other.vars}")
            return other
        if isinstance(other, (int, Fraction)):
            return MultiPoly.const(other, self.vars)
        raise TypeError(f"cannot combine MultiPoly with {type(other).__name__}")

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return MultiPoly._raw(self.vars, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly._raw(self.vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return MultiPoly.zero(self.vars)
            return MultiPoly._raw(self.vars, {e: c * other for e, c in self.terms.items()})
        other = self._coerce(other)
        out: dict[Exponent, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = _add_exp(e1, e2)
                s = out.get(e, 0) + c1 * c2
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        return MultiPoly._raw(self.vars, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (1 / QQ(other))
        return NotImplemented

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        result = MultiPoly.const(1, self.vars)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # transformations ------------------------------------------------------
    def embed(self, vars: Sequence[str]) -> "MultiPoly":
        """Re-express over a universe containing every used variable."""
        vars = tuple(vars)
        if vars == self.vars:
            return self
        pos = {v: i for i, v in enumerate(vars)}
        idx = []
        for i, v in enumerate(self.vars):
            if v in pos:
                idx.append((i, pos[v]))
            elif any(e[i] for e in self.terms):
                raise UniverseMismatch(f"variable {v} not in target universe")
        out = {}
        n = len(vars)
        for e, c in self.terms.items():
            ne = [0] * n
            for i, j in idx:
                ne[j] = e[i]
            out[tuple(ne)] = c
        return MultiPoly._raw(vars, out)

    def rename(self, mapping: Mapping[str, str]) -> "MultiPoly":
        return MultiPoly._raw(tuple(mapping.get(v, v) for v in self.vars), self.terms)

    def subs(self, values: Mapping[str, "MultiPoly"], vars: Sequence[str] | None = None) -> "MultiPoly":
        """Substitute polynomials (over ``vars``) for variables.

        Variables not in ``values`` are kept and must exist in ``vars``.
        """
        vars = tuple(vars) if vars is not None else self.vars
        images = []
        for v in self.vars:
            if v in values:
                img = values[v]
                if isinstance(img, (int, Fraction)):
                    img = MultiPoly.const(img, vars)
                images.append(img)
            elif v in vars:
                images.append(MultiPoly.var(v, vars))
            else:
                images.append(None)
        result = MultiPoly.zero(vars)
        cache: dict[tuple[int, int], MultiPoly] = {}
        for e, c in self.terms.items():
            term = MultiPoly.const(c, vars)
            for i, k in enumerate(e):
                if not k:
                    continue
                if images[i] is None:
                    raise UniverseMismatch(f"no image for {self.vars[i]}")
                pw = cache.get((i, k))
                if pw is None:
                    pw = cache[(i, k)] = images[i] ** k
                term = term * pw
            result = result + term
        return result

    def evaluate(self, values: Mapping[str, object]) -> Fraction:
        total = Fraction(0)
        vals = [QQ(values[v]) if v in values else None for v in self.vars]
        for e, c in self.terms.items():
            t = c
            for i, k in enumerate(e):
                if k:
                    if vals[i] is None:
                        raise KeyError(self.vars[i])
                    t *= vals[i] ** k
            total += t
        return total

    def coefficients_in(self, name: str) -> dict[int, "MultiPoly"]:
        """Split into powers of ``name``; coefficients keep the same universe."""
        i = self.vars.index(name)
        out: dict[int, dict] = {}
        for e, c in self.terms.items():
            k = e[i]
            ne = e[:i] + (0,) + e[i + 1:]
            out.setdefault(k, {})[ne] = c
        return {k: MultiPoly._raw(self.vars, t) for k, t in out.items()}

    # order-dependent queries -----------------------------------------------
    def sorted_terms(self, order: MonomialOrder | None = None) -> list[tuple[Exponent, Fraction]]:
        key = (order or degrevlex(*self.vars)).key(self.vars)
        return sorted(self.terms.items(), key=lambda t: key(t[0]), reverse=True)

    def leading_term(self, order: MonomialOrder) -> tuple[Exponent, Fraction]:
        key = order.key(self.vars)
        e = max(self.terms, key=key)
        return e, self.terms[e]

    def monic(self, order: MonomialOrder) -> "MultiPoly":
        if not self.terms:
            return self
        return self * (1 / self.leading_term(order)[1])

    def primitive(self, order: MonomialOrder | None = None) -> "MultiPoly":
        """Integer coefficients with content 1 and positive leading coefficient."""
        if not self.terms:
            return self
        den = reduce(lcm, (c.denominator for c in self.terms.values()), 1)
        nums = [int(c * den) for c in self.terms.values()]
        g = reduce(gcd, nums, 0)
        scale = Fraction(den, g)
        order = order or degrevlex(*self.vars)
        if self.leading_term(order)[1] < 0:
            scale = -scale
        return self * scale

    # printing ----------------------------------------------------------------
    def format(self, order: MonomialOrder | None = None, names: Mapping[str, str] | None = None) -> str:
        if not self.terms:
            return "0"
        names = names or {}
        parts = []
        for e, c in self.sorted_terms(order):
            mono = "*".join(
                (names.get(v, v) if k == 1 else f"{names.get(v, v)}^{k}")
                for v, k in zip(self.vars, e)
                if k
            )
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if not mono:
                body = str(a)
            elif a == 1:
                body = mono
            else:
                body = f"{a}*{mono}"
            parts.append((sign, body))
        first_sign, first = parts[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            out += sign + body
        return out

    def __str__(self):
        return self.format()

    def __repr__(self):
        return f"MultiPoly({self.format()!r}, vars={self.vars})"


def ring(names: str | Sequence[str]) -> tuple[MultiPoly, ...]:
    """Variables of a fresh universe, e.g. ``x, y = ring("x y")``."""
    if isinstance(names, str):
        names = names.replace(",", " ").split()
    vars = tuple(names)
    return tuple(MultiPoly.var(v, vars) for v in vars)


_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d+)?)|([A-Za-z_][A-Za-z0-9_]*)|(.))")


def parse_poly(text: str, vars: Sequence[str] | None = None) -> MultiPoly:
    """Read a polynomial written with ``+ - * / ^`` and parentheses.

    Division is only allowed by constants.  Without ``vars`` the universe is
    the identifiers in order of first appearance.
    """
    toks = [m.groups() for m in _TOKEN.finditer(text) if m.group().strip()]
    if vars is None:
        seen: dict[str, None] = {}
        for _, ident, _ in toks:
            if ident:
                seen.setdefault(ident, None)
        vars = tuple(seen)
    vars = tuple(vars)
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else (None, None, None)

    def take(op=None):
        nonlocal pos
        t = peek()
        if op is not None and t[2] != op:
            raise ValueError(f"expected {op!r} in polynomial {text!r}")
        pos += 1
        return t

    def expr():
        acc = term()
        while peek()[2] in ("+", "-"):
            op = take()[2]
            acc = acc + term() if op == "+" else acc - term()
        return acc

    def term():
        acc = factor()
        while peek()[2] in ("*", "/"):
            op = take()[2]
            rhs = factor()
            if op == "*":
                acc = acc * rhs
            elif rhs.is_constant() and rhs:
                acc = acc * (1 / rhs.constant_value())
            else:
                raise ValueError(f"division by a non-constant in {text!r}")
        return acc

    def factor():
        if peek()[2] == "-":
            take()
            return -factor()
        if peek()[2] == "+":
            take()
            return factor()
        base = atom()
        if peek()[2] == "^":
            take()
            num = take()[0]
            if num is None or "." in num:
                raise ValueError(f"bad exponent in {text!r}")
            base = base ** int(num)
        return base

    def atom():
        num, ident, op = take()
        if num is not None:
            return MultiPoly.const(Fraction(num), vars)
        if ident is not None:
            if ident not in vars:
                raise ValueError(f"unknown variable {ident!r} in {text!r}")
            return MultiPoly.var(ident, vars)
        if op == "(":
            e = expr()
            take(")")
            return e
        raise ValueError(f"unexpected {op!r} in polynomial {text!r}")

    result = expr()
    if pos != len(toks):
        raise ValueError(f"trailing input in polynomial {text!r}")
    return result
