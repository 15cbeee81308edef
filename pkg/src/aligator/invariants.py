"""Invariant ideals from closed forms.

Per path, the closed forms ``v = F_v(n, theta^n, V_0)`` are turned into
polynomial generators by replacing each ``theta_i^n`` with a fresh ``t_i``;
the counter and the ``t_i`` are then eliminated.  Multi-path loops combine the
per-path ideals by relational composition and intersection until the ideal
stops changing.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from math import lcm
from typing import Callable, Sequence

from .errors import NonTermination
from .frontend import initial_name
from .poly import (Ideal, MultiPoly, block, canonical_order, degrevlex, eliminate, ideal_equal,
                   intersect, working_order)
from .solve import ClosedFormSystem

log = logging.getLogger(__name__)

MAX_ROUNDS = 50


# --- multiplicative relations ----------------------------------------------------


def _factor(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    n = abs(n)
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def integer_kernel(rows: Sequence[Sequence[int]], ncols: int) -> list[list[int]]:
    """Basis of {x in Z^ncols : M x = 0} by unimodular column operations."""
    r = len(rows)
    # one working row per column of M: (column entries | identity row)
    work = [[rows[i][j] for i in range(r)] + [int(k == j) for k in range(ncols)]
            for j in range(ncols)]
    top = 0
    for p in range(r):
        while True:
            nz = [i for i in range(top, ncols) if work[i][p]]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(work[i][p]))
            work[top], work[piv] = work[piv], work[top]
            done = True
            for i in range(top + 1, ncols):
                if work[i][p]:
                    q = work[i][p] // work[top][p]
                    work[i] = [a - q * b for a, b in zip(work[i], work[top])]
                    if work[i][p]:
                        done = False
            if done:
                top += 1
                break
    kernel = [row[r:] for row in work[top:]]
    return _size_reduce(kernel)


def _size_reduce(vectors: list[list[int]]) -> list[list[int]]:
    """Cheap pairwise reduction so binomials stay low-degree."""
    vs = [list(v) for v in vectors]
    norm = lambda v: sum(x * x for x in v)
    changed = True
    while changed:
        changed = False
        for i in range(len(vs)):
            for j in range(len(vs)):
                if i == j or not any(vs[j]):
                    continue
                q = round(Fraction(sum(a * b for a, b in zip(vs[i], vs[j])), norm(vs[j])))
                if q:
                    cand = [a - q * b for a, b in zip(vs[i], vs[j])]
                    if norm(cand) < norm(vs[i]):
                        vs[i] = cand
                        changed = True
    for v in vs:
        first = next((x for x in v if x), 0)
        if first < 0:
            v[:] = [-x for x in v]
    return vs


@dataclass
class BaseSequenceEnv:
    """Fresh variables ``t_i`` standing for ``theta_i^n`` and their relations."""

    bases: tuple[Fraction, ...]
    vars: tuple[str, ...]
    lattice: list[list[int]] = field(default_factory=list)
    relations: Ideal | None = None

    def binomial(self, e: Sequence[int]) -> MultiPoly:
        pos = tuple(max(x, 0) for x in e)
        neg = tuple(max(-x, 0) for x in e)
        return MultiPoly(self.vars, {pos: 1}) - MultiPoly(self.vars, {neg: 1})


def base_relations(bases: Sequence, names: Sequence[str] | None = None) -> BaseSequenceEnv:
    """All polynomial relations among the sequences ``theta_i^n``.

    Exponent vectors over the primes (plus a sign row with a slack column
    forcing an even number of negative factors) give an integer matrix whose
    kernel is the lattice of multiplicative relations.  The binomial ideal of
    a lattice basis is saturated by the product of all ``t_i``.
    """
    bases = tuple(Fraction(b) for b in bases)
    if any(b == 0 or b == 1 for b in bases) or len(set(bases)) != len(bases):
        raise ValueError("bases must be pairwise distinct and different from 0 and 1")
    names = tuple(names) if names else tuple(f"t{i + 1}" for i in range(len(bases)))
    k = len(bases)
    if not k:
        return BaseSequenceEnv((), (), [], Ideal((), ()))
    fac = []
    for b in bases:
        f = _factor(b.numerator)
        for p, e in _factor(b.denominator).items():
            f[p] = f.get(p, 0) - e
        fac.append(f)
    primes = sorted({p for f in fac for p in f})
    rows = [[f.get(p, 0) for f in fac] + [0] for p in primes]
    rows.append([int(b < 0) for b in bases] + [-2])
    kernel = [v[:k] for v in integer_kernel(rows, k + 1)]
    kernel = [v for v in kernel if any(v)]
    env = BaseSequenceEnv(bases, names, kernel)
    if not kernel:
        env.relations = Ideal(names, (), degrevlex(*names), reduced=True)
        return env
    w = "__w"
    U = (w,) + names
    gens = [env.binomial(e).embed(U) for e in kernel]
    prod = reduce(lambda a, b: a * b, (MultiPoly.var(t, U) for t in names))
    gens.append(MultiPoly.var(w, U) * prod - 1)
    env.relations = eliminate(Ideal(U, gens, block([w], names)), [w])
    return env


# --- per-path ideals --------------------------------------------------------------


def _clear_denominators(p: MultiPoly) -> MultiPoly:
    den = reduce(lcm, (c.denominator for c in p.terms.values()), 1)
    return p * den if den != 1 else p


def identity_ideal(variables: Sequence[str]) -> Ideal:
    V0 = [initial_name(v) for v in variables]
    U = tuple(V0) + tuple(variables)
    return Ideal(U, [MultiPoly.var(v, U) - MultiPoly.var(initial_name(v), U)
                     for v in variables]).canonical()


@dataclass
class PathIdeal:
    """Relations over V_0 and V along one path.

    ``parametric`` keeps the counter and the ``t_i`` (with ``prod t_i``
    invertible) uneliminated.  Composing through it instead of ``ideal``
    cannot pass through degenerate middle states where every ``t_i`` vanishes.
    """

    ideal: Ideal
    index: int
    parametric: Ideal | None = None


def path_ideal(cfs: ClosedFormSystem, variables: Sequence[str], index: int = 1) -> PathIdeal:
    """Polynomial relations between V_0 and V valid after any number of path
    iterations.

    Closed forms that only hold from ``n = start`` on are patched with
    indicator variables ``d_j = [n == j]`` for the first states, so a single
    elimination covers every n >= 0.
    """
    variables = tuple(variables)
    V0 = tuple(initial_name(v) for v in variables)
    env = base_relations(cfs.bases)
    deltas = tuple(f"__d{j}" for j in range(cfs.start))
    inv = ("__w",) if env.vars else ()
    kill = (cfs.counter,) + env.vars + deltas + inv
    U = kill + V0 + variables
    n = MultiPoly.var(cfs.counter, U)
    tvar = {b: MultiPoly.var(t, U) for b, t in zip(env.bases, env.vars)}
    dvar = [MultiPoly.var(d, U) for d in deltas]
    gens = []
    for v in variables:
        form = cfs.forms[v]
        F = MultiPoly.zero(U)
        for b, q in form.terms.items():
            q = q.embed(U)
            F = F + (q if b == 1 else q * tvar[b])
        for j, d in enumerate(dvar):
            F = F + d * (cfs.prefix[j][v] - form.value_at(j)).embed(U)
        gens.append(_clear_denominators(MultiPoly.var(v, U) - F))
    if env.relations is not None:
        gens += [g.embed(U) for g in env.relations.generators]
    if inv:
        gens.append(reduce(lambda a, b: a * b, tvar.values(), MultiPoly.var(inv[0], U)) - 1)
    for j, d in enumerate(dvar):
        gens.append(d * d - d)
        gens.append(d * (n - j))
        gens += [d * (t - b ** j) for b, t in tvar.items()]
        gens += [d * e for e in dvar[j + 1:]]
    full = Ideal(U, gens, block(kill, V0 + variables))
    return PathIdeal(eliminate(full, kill, canonical_order(V0 + variables)), index, full)


# --- composition and fixed point ---------------------------------------------------


def compose(I: Ideal, J: Ideal, variables: Sequence[str], tag: int = 1) -> Ideal:
    """Relations of running I's transition, then J's.

    I(V_0, W) + J(W, V) with fresh middle variables W, then W eliminated.
    Variables of I or J outside V_0 and V (counters, base sequences) are
    existential and eliminated too.
    """
    variables = tuple(variables)
    V0 = tuple(initial_name(v) for v in variables)
    W = tuple(f"{v}__m{tag}" for v in variables)
    core = set(V0) | set(variables)
    left = {v: w for v, w in zip(variables, W)}
    right = {v0: w for v0, w in zip(V0, W)}
    left.update({x: f"{x}__a{tag}" for x in I.vars if x not in core})
    right.update({x: f"{x}__b{tag}" for x in J.vars if x not in core})
    extra = tuple(left[x] for x in I.vars if x not in core) + \
        tuple(right[x] for x in J.vars if x not in core)
    U = W + extra + V0 + variables
    gens = [g.rename(left).embed(U) for g in I.generators]
    gens += [g.rename(right).embed(U) for g in J.generators]
    kill = W + extra
    return eliminate(Ideal(U, gens), kill)


def _holds_initially(P: Ideal, variables: Sequence[str]) -> bool:
    """True iff every generator vanishes when V = V_0, i.e. P ⊆ identity."""
    at_start = {v: MultiPoly.var(initial_name(v), P.vars) for v in variables}
    return all(not g.subs(at_start) for g in P.generators)


def invariant_ideal(paths: Sequence[Ideal], variables: Sequence[str],
                    max_rounds: int = MAX_ROUNDS,
                    on_round: Callable[[int, Ideal], None] | None = None) -> Ideal:
    """Fixed point of ``A -> A ∩ compose(A, P_1) ∩ ... ∩ compose(A, P_k)``
    seeded with the identity relation; returned in canonical reduced form.

    Rounds run in the working order; only the result is converted.
    """
    if not paths:
        raise ValueError("at least one path ideal required")
    ident = identity_ideal(variables)
    if len(paths) == 1:
        only = paths[0].ideal if isinstance(paths[0], PathIdeal) else paths[0]
        if _holds_initially(only, variables):
            result = only.canonical()
        else:
            result = intersect(ident, only, canonical_order(only.vars))
        if on_round:
            on_round(1, result)
        return result
    paths = [(p.parametric or p.ideal) if isinstance(p, PathIdeal) else p for p in paths]
    A = ident.with_order(working_order(ident.vars))
    for rnd in range(1, max_rounds + 1):
        nxt = A
        for P in paths:
            nxt = intersect(nxt, compose(A, P, variables, rnd))
        log.debug("round %d: %d generators", rnd, len(nxt.generators))
        if on_round:
            on_round(rnd, nxt)
        if ideal_equal(nxt, A):
            return nxt.canonical()
        A = nxt
    raise NonTermination(f"invariant ideal did not stabilise within {max_rounds} rounds")
