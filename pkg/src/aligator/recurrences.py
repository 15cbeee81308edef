"""Per-path recurrence extraction.

A straight-line path ``x = e1; y = e2; ...`` is composed into one
simultaneous step ``v(n+1) = f_v(v_1(n), ..., v_m(n))``.  Each composed
update must be affine with constant coefficients, or a pure scaling
``v(n+1) = rho(n) * v(n)`` by a rational function of the loop counter.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence, Union

from .errors import UnsupportedUpdate
from .frontend import BinOp, Expr, Neg, Num, PathSystem, Pow, Var, is_counter_name
from .poly import MultiPoly
from .poly.roots import rational_roots


@dataclass(frozen=True)
class Affine:
    coeffs: Mapping[str, Fraction]
    constant: Fraction = Fraction(0)

    def reads(self) -> set[str]:
        return {v for v, c in self.coeffs.items() if c}

    def apply(self, values: Mapping[str, object]):
        acc = self.constant
        for v, c in self.coeffs.items():
            acc = acc + c * values[v]
        return acc


@dataclass(frozen=True)
class RationalScale:
    """``v(n+1) = num(n)/den(n) * v(n)``; num and den are over ``(counter,)``."""

    num: MultiPoly
    den: MultiPoly

    def ratio_at(self, n: int) -> Fraction:
        c = self.num.vars[0]
        return self.num.evaluate({c: n}) / self.den.evaluate({c: n})

    def reads(self) -> set[str]:
        return set()


Update = Union[Affine, RationalScale]


@dataclass(frozen=True)
class RecurrenceSystem:
    counter: str
    order: tuple[str, ...]
    updates: Mapping[str, Update] = field(hash=False)

    @property
    def variables(self) -> tuple[str, ...]:
        return self.order

    def step(self, values: Mapping[str, object], n: int) -> dict:
        """Values at n+1 from values at n (works for rationals or polynomials)."""
        out = {}
        for v in self.order:
            u = self.updates[v]
            if isinstance(u, Affine):
                out[v] = u.apply(values)
            else:
                out[v] = values[v] * u.ratio_at(n)
        return out

    def iterate(self, values: Mapping[str, object], steps: int) -> list[dict]:
        states = [dict(values)]
        for n in range(steps):
            states.append(self.step(states[-1], n))
        return states

    def format(self) -> list[str]:
        n = self.counter
        lines = []
        for v in self.order:
            u = self.updates[v]
            lhs = f"{v}({n}+1)"
            if isinstance(u, RationalScale):
                lines.append(f"{lhs} = ({u.num.format()})/({u.den.format()})*{v}({n})")
                continue
            parts = []
            ordered = [v] + [w for w in self.order if w != v]
            for w in ordered:
                c = u.coeffs.get(w, 0)
                if c:
                    parts.append((c, f"{w}({n})"))
            if u.constant:
                parts.append((u.constant, None))
            lines.append(f"{lhs} = {_format_linear(parts)}")
        return lines

    def __str__(self):
        return "[" + ", ".join(self.format()) + "]"


def _format_linear(parts) -> str:
    if not parts:
        return "0"
    out = []
    for i, (c, atom) in enumerate(parts):
        mag = abs(c)
        if atom is None:
            body = str(mag)
        elif mag == 1:
            body = atom
        else:
            body = f"{mag}*{atom}"
        if i == 0:
            out.append(("-" if c < 0 else "") + body)
        else:
            out.append((" - " if c < 0 else " + ") + body)
    return "".join(out)


# --- symbolic composition -------------------------------------------------------


class _Rat:
    """Numerator polynomial over program variables and counter, divided by a
    polynomial in the counter alone."""

    __slots__ = ("num", "den")

    def __init__(self, num: MultiPoly, den: MultiPoly):
        if den.is_constant():
            num = num * (1 / den.constant_value())
            den = MultiPoly.const(1, den.vars)
        self.num, self.den = num, den

    def __add__(self, o):
        if self.den == o.den:
            return _Rat(self.num + o.num, self.den)
        return _Rat(self.num * o.den + o.num * self.den, self.den * o.den)

    def __neg__(self):
        return _Rat(-self.num, self.den)

    def __sub__(self, o):
        return self + (-o)

    def __mul__(self, o):
        return _Rat(self.num * o.num, self.den * o.den)

    def __truediv__(self, o):
        return _Rat(self.num * o.den, self.den * o.num)


def _compose_expr(e: Expr, state: Mapping[str, _Rat], universe, counter: str) -> _Rat:
    one = MultiPoly.const(1, universe)
    if isinstance(e, Num):
        return _Rat(MultiPoly.const(e.value, universe), one)
    if isinstance(e, Var):
        if is_counter_name(e.name):
            return _Rat(MultiPoly.var(counter, universe), one)
        return state[e.name]
    if isinstance(e, Neg):
        return -_compose_expr(e.operand, state, universe, counter)
    if isinstance(e, Pow):
        base = _compose_expr(e.base, state, universe, counter)
        out = _Rat(one, one)
        for _ in range(e.exponent):
            out = out * base
        return out
    a = _compose_expr(e.left, state, universe, counter)
    b = _compose_expr(e.right, state, universe, counter)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    if b.num.mentions([v for v in universe if v != counter]):
        raise UnsupportedUpdate("?", "division by an expression in program variables")
    if not b.num:
        raise UnsupportedUpdate("?", "division by zero")
    return a / b


def _classify(v: str, r: _Rat, variables: Sequence[str], counter: str) -> Update:
    num = r.num
    prog = [w for w in variables]
    if num.total_degree() > 1 and any(
        sum(k for w, k in zip(num.vars, e) if w != counter) > 1 for e in num.terms
    ):
        raise UnsupportedUpdate(v, "update is nonlinear in the program variables")
    has_counter = num.mentions([counter]) or not r.den.is_constant()
    if not has_counter:
        coeffs = {}
        for w in prog:
            e = tuple(1 if x == w else 0 for x in num.vars)
            c = num.terms.get(e)
            if c:
                coeffs[w] = c
        return Affine(coeffs, num.constant_value())
    # v(n+1) = rho(n) * v(n) with nothing else
    i = num.vars.index(v)
    ci = num.vars.index(counter)
    scale = {}
    for e, c in num.terms.items():
        if e[i] != 1 or any(k for j, k in enumerate(e) if j not in (i, ci)):
            raise UnsupportedUpdate(
                v, "counter-dependent update is not a pure scaling of the variable itself")
        scale[(e[ci],)] = c
    den_terms = {(e[ci],): c for e, c in r.den.terms.items()}
    rho_num = MultiPoly((counter,), scale)
    rho_den = MultiPoly((counter,), den_terms)
    roots, _ = rational_roots(rho_den)
    bad = [x for x, _ in roots if x.denominator == 1 and x >= 0]
    if bad:
        raise UnsupportedUpdate(v, f"scaling factor has a pole at counter value {bad[0]}")
    return RationalScale(rho_num, rho_den)


def extract_recurrences(path, variables: Sequence[str], index: int) -> RecurrenceSystem:
    """Compose a straight-line path into a simultaneous recurrence system.

    Later assignments read the values produced by earlier ones; variables not
    assigned on the path keep their value.
    """
    counter = f"n{index}"
    variables = tuple(variables)
    universe = variables + (counter,)
    one = MultiPoly.const(1, universe)
    state = {v: _Rat(MultiPoly.var(v, universe), one) for v in variables}
    assigned: list[str] = []
    for var, rhs in path:
        try:
            state[var] = _compose_expr(rhs, state, universe, counter)
        except UnsupportedUpdate as exc:
            raise UnsupportedUpdate(var, exc.message.split(": ", 1)[-1]) from None
        if var in assigned:
            assigned.remove(var)
        assigned.append(var)
    order = tuple(assigned) + tuple(v for v in variables if v not in assigned)
    updates = {v: _classify(v, state[v], variables, counter) for v in order}
    return RecurrenceSystem(counter, order, updates)


def extract_loop(ps: PathSystem) -> list[RecurrenceSystem]:
    """Recurrence systems of all paths, counters ``n1, n2, ...`` by path index."""
    if len(ps.paths) > 1 and ps.uses_counter:
        raise UnsupportedUpdate(
            "<loop>", "loop-counter references are only supported in single-path loops")
    return [extract_recurrences(p, ps.variables, i + 1) for i, p in enumerate(ps.paths)]
