"""Closed forms of recurrence systems as exponential polynomials.

Every solved sequence has the shape ``sum_i q_i(n) * theta_i**n`` with rational
bases ``theta_i`` and polynomials ``q_i`` whose coefficients are polynomials
in the initial values.  A characteristic root 0 makes the closed form valid
only from some index on; :attr:`ExpPoly.start` records that index.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Mapping, Sequence

from .errors import AnalysisError, IrrationalRoots, NonTelescoping
from .frontend import initial_name
from .poly import MultiPoly
from .poly.roots import rational_roots_of
from .recurrences import Affine, RationalScale, RecurrenceSystem

MAX_TELESCOPING_DEGREE = 4


class ExpPoly:
    """Exponential polynomial in ``counter`` over parameters ``params``.

    ``terms`` maps each base to a polynomial over ``(counter, *params)``.
    """

    __slots__ = ("counter", "params", "terms", "start")

    def __init__(self, counter: str, params: Sequence[str],
                 terms: Mapping[Fraction, MultiPoly] | None = None, start: int = 0):
        self.counter = counter
        self.params = tuple(params)
        self.start = start
        clean = {}
        for base, q in (terms or {}).items():
            base = Fraction(base)
            if base == 0:
                raise ValueError("exponential base must be nonzero")
            if q.vars != self.universe:
                q = q.embed(self.universe)
            if q:
                clean[base] = clean[base] + q if base in clean else q
        self.terms = {b: q for b, q in clean.items() if q}

    @property
    def universe(self) -> tuple[str, ...]:
        return (self.counter,) + self.params

    def _like(self, terms, start=None) -> "ExpPoly":
        return ExpPoly(self.counter, self.params, terms, self.start if start is None else start)

    @classmethod
    def constant(cls, counter: str, params: Sequence[str], value) -> "ExpPoly":
        u = (counter,) + tuple(params)
        if isinstance(value, MultiPoly):
            return cls(counter, params, {Fraction(1): value.embed(u)})
        return cls(counter, params, {Fraction(1): MultiPoly.const(value, u)})

    @classmethod
    def zero(cls, counter: str, params: Sequence[str]) -> "ExpPoly":
        return cls(counter, params)

    def __bool__(self):
        return bool(self.terms)

    def bases(self) -> list[Fraction]:
        return sorted(self.terms)

    def degree(self, base) -> int:
        q = self.terms.get(Fraction(base))
        return -1 if q is None else q.degree(self.counter)

    def __add__(self, other: "ExpPoly") -> "ExpPoly":
        terms = dict(self.terms)
        for b, q in other.terms.items():
            terms[b] = terms[b] + q if b in terms else q
        return self._like(terms, max(self.start, other.start))

    def __neg__(self):
        return self._like({b: -q for b, q in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "ExpPoly":
        """Multiply by a rational or by a polynomial over the same universe."""
        if isinstance(c, MultiPoly):
            c = c.embed(self.universe)
        return self._like({b: q * c for b, q in self.terms.items()})

    def shift(self, s: int) -> "ExpPoly":
        """The sequence ``n -> self(n + s)``."""
        if s == 0:
            return self
        n = MultiPoly.var(self.counter, self.universe)
        terms = {}
        for b, q in self.terms.items():
            terms[b] = q.subs({self.counter: n + s}) * (b ** s)
        return self._like(terms, max(self.start - s, 0))

    def value_at(self, n: int) -> MultiPoly:
        """Symbolic value at an integer index, as a polynomial over ``params``."""
        total = MultiPoly.zero(self.params)
        for b, q in self.terms.items():
            total = total + q.subs({self.counter: MultiPoly.const(n, self.params)},
                                   self.params) * (b ** n)
        return total

    def evaluate(self, n: int, values: Mapping[str, object]) -> Fraction:
        env = dict(values)
        env[self.counter] = n
        return sum((q.evaluate(env) * b ** n for b, q in self.terms.items()), Fraction(0))

    def __eq__(self, other):
        if not isinstance(other, ExpPoly):
            return NotImplemented
        return (self.counter, self.params, self.start, self.terms) == (
            other.counter, other.params, other.start, other.terms)

    __hash__ = None

    def __repr__(self):
        return f"ExpPoly({format_exppoly(self)!r}, start={self.start})"


# --- linear algebra helpers ---------------------------------------------------


def _solve_linear(rows: list[list[Fraction]], rhs: list):
    """Gauss-Jordan over Q with right-hand sides in any Q-vector space.

    Returns the unique solution, or None if inconsistent.  Free columns (if
    any) are set to zero.
    """
    m = [list(r) for r in rows]
    b = list(rhs)
    ncols = len(m[0]) if m else 0
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        b[r], b[piv] = b[piv], b[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        b[r] = b[r] * inv
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
                b[i] = b[i] - b[r] * f
        pivots.append(c)
        r += 1
    for i in range(r, len(m)):
        if b[i]:
            return None
    zero = b[0] * 0 if b else Fraction(0)
    sol = [zero] * ncols
    for i, c in enumerate(pivots):
        sol[c] = b[i]
    return sol


def _charpoly(A: list[list[Fraction]]) -> list[Fraction]:
    """Characteristic polynomial det(x I - A), coefficients low-to-high."""
    d = len(A)
    c = [Fraction(0)] * (d + 1)
    c[d] = Fraction(1)
    M = [[Fraction(0)] * d for _ in range(d)]
    for k in range(1, d + 1):
        # M_k = A M_{k-1} + c_{d-k+1} I
        AM = [[sum(A[i][l] * M[l][j] for l in range(d)) for j in range(d)] for i in range(d)]
        for i in range(d):
            AM[i][i] += c[d - k + 1]
        M = AM
        AMk = [[sum(A[i][l] * M[l][j] for l in range(d)) for j in range(d)] for i in range(d)]
        c[d - k] = -sum(AMk[i][i] for i in range(d)) / k
    return c


def _poly_from_coeffs(coeffs: Sequence, counter: str, universe) -> MultiPoly:
    n = MultiPoly.var(counter, universe)
    out = MultiPoly.zero(universe)
    for j, c in enumerate(coeffs):
        if c:
            out = out + (n ** j) * c
    return out


# --- C-finite solving ----------------------------------------------------------


def solve_cfinite(a: Sequence, inhom: ExpPoly, initial: Sequence[MultiPoly],
                  variable: str = "?") -> ExpPoly:
    """Solve ``y(n+d) = sum_k a[k] y(n+k) + inhom(n)`` with ``y(k) = initial[k]``.

    ``initial`` entries are polynomials over the parameters (or the full
    universe of ``inhom``) without the counter.
    """
    counter, params = inhom.counter, inhom.params
    U = inhom.universe
    if inhom.start:
        raise ValueError("inhomogeneity must hold from index 0")
    d = len(a)
    if len(initial) != d:
        raise ValueError(f"expected {d} initial values, got {len(initial)}")
    initial = [MultiPoly.const(x, U) if not isinstance(x, MultiPoly) else x.embed(U)
               for x in initial]
    chi = [-Fraction(x) for x in a] + [Fraction(1)]
    roots, cof = rational_roots_of(chi)
    if len(cof) > 1:
        raise IrrationalRoots(
            variable, "characteristic polynomial does not split over the rationals")
    mult = dict(roots)
    mu = mult.pop(Fraction(0), 0)
    if mu:
        z = solve_cfinite([-x for x in chi[mu:-1]], inhom, initial[mu:], variable)
        y = z.shift(-mu)
        y.start = z.start + mu
        return y
    chi_d = len(chi) - 1
    forcing = {b: q.coefficients_in(counter) for b, q in inhom.terms.items()}
    bases = sorted(set(mult) | set(forcing))
    columns = []
    for b in bases:
        m = mult.get(b, 0)
        top = m + max(forcing[b]) if b in forcing else m - 1
        columns += [(b, j) for j in range(top + 1)]
    rows, rhs = [], []
    zero = MultiPoly.zero(U)
    for b in sorted(forcing):
        e = max(forcing[b])
        for i in range(e + 1):
            row = []
            for (bb, j) in columns:
                if bb != b or j < i:
                    row.append(Fraction(0))
                    continue
                row.append(sum(
                    (chi[k] * b ** k * comb(j, i) * k ** (j - i) for k in range(chi_d + 1)),
                    Fraction(0)))
            rows.append(row)
            rhs.append(forcing[b].get(i, zero))
    for t in range(chi_d):
        rows.append([Fraction(t) ** j * b ** t for (b, j) in columns])
        rhs.append(initial[t])
    if not columns:
        return ExpPoly(counter, params)
    sol = _solve_linear(rows, rhs)
    if sol is None:
        raise AnalysisError(f"{variable}: inconsistent closed-form system")
    n = MultiPoly.var(counter, U)
    terms: dict[Fraction, MultiPoly] = {}
    for (b, j), x in zip(columns, sol):
        if x:
            terms[b] = terms.get(b, zero) + x * n ** j
    return ExpPoly(counter, params, terms)


def sum_exp_poly(e: ExpPoly) -> ExpPoly:
    """Indefinite sum ``S(n) = sum_{k<n} e(k)``; requires ``e.start == 0``."""
    if e.start:
        raise ValueError("summand must hold from index 0")
    U = e.universe
    zero = MultiPoly.zero(U)
    n = MultiPoly.var(e.counter, U)
    out: dict[Fraction, MultiPoly] = {}
    for b, q in e.terms.items():
        qc = q.coefficients_in(e.counter)
        D = max(qc)
        if b == 1:
            # S(n) = sum_{j=1}^{D+1} s_j n^j with S(n+1) - S(n) = q(n)
            cols = list(range(1, D + 2))
            rows = [[Fraction(comb(j, i)) if j > i else Fraction(0) for j in cols]
                    for i in range(D + 1)]
            sol = _solve_linear(rows, [qc.get(i, zero) for i in range(D + 1)])
            S = sum((x * n ** j for j, x in zip(cols, sol)), zero)
            out[Fraction(1)] = out.get(Fraction(1), zero) + S
        else:
            # r(n+1) b - r(n) = q(n), deg r = D; then S = r(n) b^n - r(0)
            cols = list(range(D + 1))
            rows = [[(b * comb(j, i) if j > i else (b - 1) if j == i else Fraction(0))
                     for j in cols] for i in range(D + 1)]
            sol = _solve_linear(rows, [qc.get(i, zero) for i in range(D + 1)])
            r = sum((x * n ** j for j, x in zip(cols, sol)), zero)
            out[b] = out.get(b, zero) + r
            out[Fraction(1)] = out.get(Fraction(1), zero) - sol[0]
    return ExpPoly(e.counter, e.params, out)


# --- rational scaling ----------------------------------------------------------------


def _ucoeffs(p: MultiPoly) -> list[Fraction]:
    deg = max((e[0] for e in p.terms), default=0)
    out = [Fraction(0)] * (deg + 1)
    for e, c in p.terms.items():
        out[e[0]] = c
    return out


def _trim(c: list) -> list:
    c = list(c)
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return c


def _udivmod(a: list, b: list) -> tuple[list, list]:
    a, b = _trim(a), _trim(b)
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    r = list(a)
    while len(r) >= len(b) and any(r):
        f = r[-1] / b[-1]
        k = len(r) - len(b)
        q[k] = f
        for i, c in enumerate(b):
            r[i + k] -= f * c
        r.pop()
        r = _trim(r) if r else [Fraction(0)]
        if len(r) < len(b):
            break
    return q, r


def _ugcd(a: list, b: list) -> list:
    a, b = _trim(a), _trim(b)
    while any(b):
        _, r = _udivmod(a, b)
        a, b = b, _trim(r)
    return [c / a[-1] for c in a]


def _shifted(u: list, s: int) -> list:
    """Coefficients of u(n + s)."""
    out = [Fraction(0)] * len(u)
    for j, c in enumerate(u):
        for i in range(j + 1):
            out[i] += c * comb(j, i) * Fraction(s) ** (j - i)
    return out


def _umul(a: list, b: list) -> list:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def solve_rational_scale(variable: str, num: MultiPoly, den: MultiPoly, counter: str,
                         params: Sequence[str]) -> ExpPoly:
    """Closed form of ``v(n+1) = num(n)/den(n) * v(n)``, ``v(0) = v_0``.

    Succeeds when the ratio telescopes as ``c * u(n+1)/u(n)`` for a polynomial
    ``u`` of degree at most :data:`MAX_TELESCOPING_DEGREE`.
    """
    P, Q = _trim(_ucoeffs(num)), _trim(_ucoeffs(den))
    if not any(P):
        raise NonTelescoping(variable, "scaling factor is identically zero")
    roots, _ = rational_roots_of(Q)
    bad = [r for r, _ in roots if r.denominator == 1 and r >= 0]
    if bad:
        raise NonTelescoping(variable, f"scaling factor has a pole at counter value {bad[0]}")
    g = _ugcd(P, Q)
    P, Q = _udivmod(P, g)[0], _udivmod(Q, g)[0]
    P, Q = _trim(P), _trim(Q)
    if len(P) != len(Q):
        raise NonTelescoping(variable, "numerator and denominator degrees differ")
    c = P[-1] / Q[-1]
    P = [x / P[-1] for x in P]
    Q = [x / Q[-1] for x in Q]
    u = None
    for k in range(MAX_TELESCOPING_DEGREE + 1):
        # monic u of degree k with u(n+1) Q(n) - u(n) P(n) = 0
        size = k + len(Q)
        cols = []
        for j in range(k + 1):
            basis = [Fraction(0)] * j + [Fraction(1)]
            diff = [x - y for x, y in zip(
                _umul(_shifted(basis, 1), Q) + [Fraction(0)] * size,
                _umul(basis, P) + [Fraction(0)] * size)]
            cols.append(diff[:size])
        rows = [[cols[j][i] for j in range(k)] for i in range(size)]
        rhs = [-cols[k][i] for i in range(size)]
        if k == 0:
            if not any(rhs):
                u = [Fraction(1)]
                break
            continue
        sol = _solve_linear(rows, rhs)
        if sol is not None:
            u = sol + [Fraction(1)]
            break
    if u is None or u[0] == 0:
        raise NonTelescoping(
            variable, f"scaling factor does not telescope with a polynomial of degree "
                      f"<= {MAX_TELESCOPING_DEGREE}")
    U = (counter,) + tuple(params)
    v0 = MultiPoly.var(initial_name(variable), U)
    q = _poly_from_coeffs([x / u[0] for x in u], counter, U) * v0
    return ExpPoly(counter, params, {c: q})


# --- systems ---------------------------------------------------------------------


def dependency_blocks(sys: RecurrenceSystem) -> list[list[str]]:
    """Strongly connected components of the read graph, dependencies first.

    Components are layered by dependency depth; within a layer they follow the
    system's variable order.
    """
    order = list(sys.order)
    pos = {v: i for i, v in enumerate(order)}
    reads = {v: sorted(sys.updates[v].reads() - {v}, key=pos.get) for v in order}

    index: dict[str, int] = {}
    low: dict[str, int] = {}
    stack: list[str] = []
    on_stack: set[str] = set()
    comps: list[list[str]] = []
    counter = [0]

    def visit(v):
        index[v] = low[v] = counter[0]
        counter[0] += 1
        stack.append(v)
        on_stack.add(v)
        for w in reads[v]:
            if w not in index:
                visit(w)
                low[v] = min(low[v], low[w])
            elif w in on_stack:
                low[v] = min(low[v], index[w])
        if low[v] == index[v]:
            comp = []
            while True:
                w = stack.pop()
                on_stack.discard(w)
                comp.append(w)
                if w == v:
                    break
            comps.append(sorted(comp, key=pos.get))

    for v in order:
        if v not in index:
            visit(v)

    comp_of = {v: i for i, c in enumerate(comps) for v in c}
    level: dict[int, int] = {}

    def depth(i):
        if i not in level:
            deps = {comp_of[w] for v in comps[i] for w in reads[v]} - {i}
            level[i] = 1 + max((depth(j) for j in deps), default=-1)
        return level[i]

    return sorted(comps, key=lambda c: (depth(comp_of[c[0]]), pos[c[0]]))


@dataclass
class ClosedFormSystem:
    counter: str
    params: tuple[str, ...]
    forms: dict[str, ExpPoly]
    start: int = 0
    prefix: tuple = ()

    @property
    def bases(self) -> list[Fraction]:
        return sorted({b for f in self.forms.values() for b in f.terms if b != 1})

    def evaluate(self, n: int, values: Mapping[str, object]) -> dict[str, Fraction]:
        if n < self.start:
            return {v: p.evaluate(values) for v, p in self.prefix[n].items()}
        return {v: f.evaluate(n, values) for v, f in self.forms.items()}

    def format(self) -> list[str]:
        return [f"{v}({self.counter}) = {format_exppoly(f)}" for v, f in self.forms.items()]

    def __str__(self):
        return "[" + ", ".join(self.format()) + "]"


def _unroll(sys: RecurrenceSystem, params: Sequence[str], steps: int) -> list[dict]:
    states = [{v: MultiPoly.var(initial_name(v), params) for v in sys.order}]
    for n in range(steps):
        nxt = sys.step(states[-1], n)
        states.append({v: x if isinstance(x, MultiPoly) else MultiPoly.const(x, params)
                       for v, x in nxt.items()})
    return states


def solve_block(sys: RecurrenceSystem, block: Sequence[str], solved: Mapping[str, ExpPoly],
                params: Sequence[str], states: Sequence[Mapping[str, MultiPoly]] | None = None
                ) -> dict[str, ExpPoly]:
    """Closed forms for one mutually dependent block of affine updates.

    Each variable satisfies the scalar recurrence given by the block matrix's
    characteristic polynomial, with the forcing terms of already solved
    variables folded in.
    """
    counter = sys.counter
    params = tuple(params)
    d = len(block)
    inside = set(block)
    A = [[Fraction(sys.updates[v].coeffs.get(w, 0)) for w in block] for v in block]
    forcing = []
    s = 0
    for v in block:
        upd = sys.updates[v]
        f = ExpPoly.constant(counter, params, upd.constant)
        for w, c in upd.coeffs.items():
            if w not in inside and c:
                f = f + solved[w].scale(c)
                s = max(s, solved[w].start)
        forcing.append(f)
    if s:
        forcing = [f.shift(s) for f in forcing]
        for f in forcing:
            f.start = 0
    if states is None or len(states) < s + d:
        states = _unroll(sys, params, s + d)
    chi = _charpoly(A)
    # g(n) = sum_k chi_k sum_{j<k} (A^{k-1-j} b)(n + j)
    powers = [[[Fraction(int(i == j)) for j in range(d)] for i in range(d)]]
    for _ in range(d):
        P = powers[-1]
        powers.append([[sum(A[i][l] * P[l][j] for l in range(d)) for j in range(d)]
                       for i in range(d)])
    zero = ExpPoly.zero(counter, params)
    shifted = [[f.shift(j) for f in forcing] for j in range(d)]
    out = {}
    for i, v in enumerate(block):
        g = zero
        for k in range(1, d + 1):
            if not chi[k]:
                continue
            for j in range(k):
                M = powers[k - 1 - j]
                for l in range(d):
                    if M[i][l]:
                        g = g + shifted[j][l].scale(chi[k] * M[i][l])
        inits = [states[s + t][v] for t in range(d)]
        y = solve_cfinite([-c for c in chi[:d]], g, inits, v)
        if s:
            start = y.start + s
            y = y.shift(-s)
            y.start = start
        out[v] = y
    return out


def closed_forms(sys: RecurrenceSystem, variables: Sequence[str] | None = None
                 ) -> ClosedFormSystem:
    """Solve every variable of ``sys``; ``variables`` fixes the parameter order."""
    variables = tuple(variables or sys.order)
    params = tuple(initial_name(v) for v in variables)
    blocks = dependency_blocks(sys)
    states = _unroll(sys, params, len(sys.order) + 1)
    forms: dict[str, ExpPoly] = {}
    errors: list[AnalysisError] = []
    failed: set[str] = set()
    for block in blocks:
        needs = {w for v in block for w in sys.updates[v].reads()} - set(block)
        if needs & failed:
            failed.update(block)
            continue
        try:
            if len(block) == 1 and isinstance(sys.updates[block[0]], RationalScale):
                u = sys.updates[block[0]]
                forms[block[0]] = solve_rational_scale(
                    block[0], u.num, u.den, sys.counter, params)
            else:
                forms.update(solve_block(sys, block, forms, params, states))
        except AnalysisError as exc:
            errors.append(exc)
            failed.update(block)
    if errors:
        first = errors[0]
        first.details["diagnostics"] = [e.as_diagnostic() for e in errors]
        raise first
    start = max((f.start for f in forms.values()), default=0)
    if len(states) < start:
        states = _unroll(sys, params, start)
    prefix = tuple({v: states[k][v] for v in forms} for k in range(start))
    return ClosedFormSystem(sys.counter, params, forms, start, prefix)


# --- rendering --------------------------------------------------------------------


def _param_names(params) -> dict[str, str]:
    return {p: f"{p[:-2]}(0)" if p.endswith("_0") else p for p in params}


def _format_base(b: Fraction, counter: str) -> str:
    if b.denominator == 1 and b > 0:
        return f"{b}^{counter}"
    return f"({b})^{counter}"


def format_exppoly(e: ExpPoly) -> str:
    """Render like ``-n1^2-n1*(v(0)-1)+r(0)``."""
    names = _param_names(e.params)
    pieces: list[tuple[bool, str]] = []  # (negative, body)
    bases = sorted((b for b in e.terms if b != 1), key=lambda b: (-abs(b), -b))
    if 1 in e.terms:
        bases.append(Fraction(1))
    for b in bases:
        q = e.terms[b]
        for k, coeff in sorted(q.coefficients_in(e.counter).items(), reverse=True):
            coeff = coeff.embed(e.params) if coeff.vars != e.params else coeff
            factors = []
            if k:
                factors.append(e.counter if k == 1 else f"{e.counter}^{k}")
            if b != 1:
                factors.append(_format_base(b, e.counter))
            if not factors:
                for ex, c in coeff.sorted_terms():
                    single = MultiPoly._raw(coeff.vars, {ex: abs(c)})
                    pieces.append((c < 0, single.format(names=names)))
                continue
            head = "*".join(factors)
            if len(coeff.terms) == 1:
                (ex, c), = coeff.terms.items()
                mono = MultiPoly._raw(coeff.vars, {ex: Fraction(1)})
                parts = [] if abs(c) == 1 else [str(abs(c))]
                parts.append(head)
                if any(ex):
                    parts.append(mono.format(names=names))
                pieces.append((c < 0, "*".join(parts)))
            else:
                lead = coeff.sorted_terms()[0][1]
                inner = coeff if lead > 0 else -coeff
                pieces.append((lead < 0, f"{head}*({inner.format(names=names)})"))
    if not pieces:
        return "0"
    out = ("-" if pieces[0][0] else "") + pieces[0][1]
    for neg, body in pieces[1:]:
        out += ("-" if neg else "+") + body
    return out
