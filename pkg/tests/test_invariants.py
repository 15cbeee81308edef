import random
from fractions import Fraction
from itertools import combinations, product

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from aligator.frontend import execute, flatten, initial_name, parse
from aligator.invariants import (
    base_relations,
    compose,
    identity_ideal,
    invariant_ideal,
    path_ideal,
)
from aligator.poly import (Ideal, MultiPoly, buchberger, ideal_equal, intersect, parse_poly,
                           working_order)
from aligator.recurrences import extract_loop
from aligator.solve import closed_forms

from conftest import SQUARES, SQUARES_INVARIANT

F = Fraction


def _path_ideals(src):
    ps = flatten(parse(src))
    cfs = [closed_forms(s, ps.variables) for s in extract_loop(ps)]
    return ps, [path_ideal(c, ps.variables, i + 1) for i, c in enumerate(cfs)]


def _vanishes(ideal, state):
    env = dict(state)
    return all(g.evaluate(env) == 0 for g in ideal.generators)


# --- multiplicative relations ------------------------------------------------------


@pytest.mark.parametrize("bases, lattice", [
    ([2, 4], [[2, -1]]),
    ([2, 3], []),
    ([2, 3, 6], [[1, 1, -1]]),
    ([-1, -2, 2], [[1, -1, 1], [1, 1, -1]]),
])
def test_base_relation_examples(bases, lattice):
    assert base_relations(bases).lattice == lattice


def test_base_relation_ideal():
    env = base_relations([2, 4])
    t1, t2 = (MultiPoly.var(t, env.vars) for t in env.vars)
    assert ideal_equal(env.relations, Ideal(env.vars, [t1**2 - t2]))
    # -1 alone: t^2 = 1
    env = base_relations([-1])
    (t,) = (MultiPoly.var(x, env.vars) for x in env.vars)
    assert ideal_equal(env.relations, Ideal(env.vars, [t**2 - 1]))


def _in_lattice(e, basis):
    """Integer membership of e in the row span of an independent basis."""
    if not any(e):
        return True
    if not basis:
        return False
    rows = [list(map(F, b)) for b in basis]
    k = len(rows)
    # solve c * rows = e by elimination on the augmented transpose
    M = [[rows[i][j] for i in range(k)] + [F(e[j])] for j in range(len(e))]
    piv = []
    r = 0
    for c in range(k):
        p = next((i for i in range(r, len(M)) if M[i][c]), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        M[r] = [x / M[r][c] for x in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c]:
                M[i] = [x - M[i][c] * y for x, y in zip(M[i], M[r])]
        piv.append(c)
        r += 1
    if any(M[i][-1] for i in range(r, len(M))):
        return False
    return all(M[i][-1].denominator == 1 for i in range(r))


def _relations_brute(bases, box):
    out = []
    for e in product(range(-box, box + 1), repeat=len(bases)):
        val = F(1)
        for b, x in zip(bases, e):
            val *= F(b) ** x
        out.append((e, val == 1))
    return out


GRID = [F(-1), F(2), F(-2), F(3), F(1, 2), F(4), F(6), F(2, 3), F(-3), F(9), F(1, 3), F(-4)]


def test_base_relations_complete_on_grid():
    """Every pair and triple from the grid, exponents up to 3 in absolute value:
    the lattice holds exactly the true multiplicative relations."""
    for k in (1, 2, 3):
        for bases in combinations(GRID, k):
            env = base_relations(bases)
            for e in env.lattice:
                assert _relations_brute_one(bases, e)
            for e, holds in _relations_brute(bases, 3):
                assert _in_lattice(e, env.lattice) == holds, (bases, e)


def _relations_brute_one(bases, e):
    val = F(1)
    for b, x in zip(bases, e):
        val *= F(b) ** x
    return val == 1


@settings(max_examples=30, deadline=None)
@given(st.lists(st.sampled_from(GRID), min_size=2, max_size=3, unique=True))
def test_relation_ideal_matches_lattice(bases):
    env = base_relations(bases)
    for e, holds in _relations_brute(bases, 2):
        assert (env.binomial(e) in env.relations) == holds


# --- path ideals ---------------------------------------------------------------------


def test_squares_path_ideal():
    ps, (p1, p2) = _path_ideals(SQUARES)
    U = p1.ideal.vars
    want = [parse_poly("4*r-4*r_0+v^2-v_0^2-2*v+2*v_0", U), parse_poly("u-u_0", U)]
    assert ideal_equal(p1.ideal, Ideal(U, want))


def test_identity_path_ideal():
    _, (p,) = _path_ideals("while true x = x end")
    assert ideal_equal(p.ideal, identity_ideal(["x"]))


def test_doubling_has_no_relation():
    _, (p,) = _path_ideals("while true x = 2*x end")
    assert p.ideal.is_zero()


@pytest.mark.parametrize("src", [
    "while true tmp = x; x = y; y = tmp end",
    "while true x = y; y = x + 0*y end",
    "while true a = b; b = c; c = 4*a + 1 end",
])
def test_indicator_prefix_is_sound(src):
    """Path ideals with closed forms that start late still hold at n = 0."""
    ps, (p,) = _path_ideals(src)
    rng = random.Random(7)
    for _ in range(10):
        state = {v: F(rng.randint(-9, 9)) for v in ps.variables}
        init = {initial_name(v): x for v, x in state.items()}
        cur = dict(state)
        for n in range(8):
            assert _vanishes(p.ideal, {**init, **cur}), (n, cur)
            cur = execute(parse(src), cur, lambda: True, n)


# --- composition ------------------------------------------------------------------


def test_compose_with_identity():
    ps, (p1, _) = _path_ideals(SQUARES)
    ident = identity_ideal(ps.variables)
    assert ideal_equal(compose(ident, p1.ideal, ps.variables), p1.ideal)
    assert ideal_equal(compose(p1.ideal, ident, ps.variables), p1.ideal)


def test_compose_increment_twice():
    ps, (p,) = _path_ideals("while true x = x + 1; y = y + 1 end")
    twice = compose(p.ideal, p.ideal, ps.variables)
    assert ideal_equal(twice, p.ideal)


def test_squares_composition_holds_the_invariant():
    ps, (p1, p2) = _path_ideals(SQUARES)
    both = compose(p1.ideal, p2.ideal, ps.variables)
    g = parse_poly(SQUARES_INVARIANT, both.vars)
    assert g in both


VARS = ("x", "y")
U = ("x_0", "y_0", "x", "y")


@st.composite
def transition_ideals(draw):
    gens = []
    for _ in range(draw(st.integers(1, 2))):
        terms = {}
        for _ in range(draw(st.integers(1, 3))):
            e = tuple(draw(st.integers(0, 1)) for _ in U)
            terms[e] = draw(st.integers(-3, 3).filter(bool))
        p = MultiPoly(U, terms)
        if p:
            gens.append(p)
    return Ideal(U, gens or [MultiPoly.var("x", U) - MultiPoly.var("x_0", U)])


@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(transition_ideals())
def test_identity_is_neutral(J):
    ident = identity_ideal(VARS)
    J = buchberger(J.generators, working_order(U), U)
    assert ideal_equal(compose(ident, J, VARS), J)


# --- fixed point ---------------------------------------------------------------------


def test_squares_invariant_ideal():
    ps, pids = _path_ideals(SQUARES)
    ideal = invariant_ideal(pids, ps.variables)
    assert ideal_equal(ideal, Ideal(ideal.vars, [parse_poly(SQUARES_INVARIANT, ideal.vars)]))


def test_rounds_descend_and_stabilise():
    ps, pids = _path_ideals(SQUARES)
    seen = []
    ideal = invariant_ideal(pids, ps.variables, on_round=lambda k, A: seen.append(A))
    assert len(seen) >= 2
    prev = identity_ideal(ps.variables)
    for A in seen:
        assert all(g.embed(prev.vars) in prev for g in A.generators)
        prev = A
    assert ideal_equal(seen[-1], seen[-2]) and ideal_equal(seen[-1], ideal)
    # one more round changes nothing
    nxt = ideal
    for p in pids:
        nxt = intersect(nxt, compose(ideal, p.parametric, ps.variables, 99))
    assert ideal_equal(nxt, ideal)

MULTI = [
    SQUARES,
    "while true if true x = x + 1; s = s + x else x = x - 1; s = s - x - 1 end end",
    "while true if true a = a + b; b = b + 1 else b = b + 1; a = a + b - 1 end end",
    "while true if true x = x + 2; y = y + 1 else x = x - 2; y = y - 1 end end",
]


@pytest.mark.parametrize("src", MULTI)
def test_invariants_hold_on_interleavings(src):
    ps, pids = _path_ideals(src)
    ideal = invariant_ideal(pids, ps.variables)
    ast = parse(src)
    rng = random.Random(11)
    for _ in range(50):
        state = {v: F(rng.randint(-9, 9), rng.randint(1, 5)) for v in ps.variables}
        init = {initial_name(v): x for v, x in state.items()}
        cur = dict(state)
        for n in range(12):
            assert _vanishes(ideal, {**init, **cur})
            cur = execute(ast, cur, lambda: rng.random() < 0.5, n)
