from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aligator.errors import UnsupportedUpdate
from aligator.frontend import Assign, BinOp, LoopAst, Num, Var, eval_expr, flatten, parse
from aligator.recurrences import Affine, RationalScale, extract_loop, extract_recurrences


def _path(src):
    ps = flatten(parse(src))
    return ps, ps.paths[0]


def test_squares_path_one():
    ps = flatten(parse("while true if true r = r - v; v = v + 2 else r = r + u; u = u + 2 end end"))
    sys1, sys2 = extract_loop(ps)
    assert sys1.counter == "n1" and sys2.counter == "n2"
    assert sys1.format() == ["r(n1+1) = r(n1) - v(n1)", "v(n1+1) = v(n1) + 2", "u(n1+1) = u(n1)"]
    assert sys2.format() == ["r(n2+1) = r(n2) + u(n2)", "u(n2+1) = u(n2) + 2", "v(n2+1) = v(n2)"]


def test_later_assignment_reads_updated_value():
    ps, path = _path("while true v = v + 2; r = r - v end")
    sys = extract_recurrences(path, ps.variables, 1)
    assert sys.updates["r"] == Affine({"r": Fraction(1), "v": Fraction(-1)}, Fraction(-2))
    # three concrete steps against direct interpretation
    state = {"v": Fraction(3), "r": Fraction(-7, 2)}
    expect = dict(state)
    for _ in range(3):
        for var, rhs in path:
            expect[var] = eval_expr(rhs, expect)
    assert sys.iterate(state, 3)[-1] == expect


def test_identity_update():
    ps, path = _path("while true x = x end")
    sys = extract_recurrences(path, ps.variables, 1)
    assert sys.updates["x"] == Affine({"x": Fraction(1)})


def test_temporary_is_substituted_away():
    ps, path = _path("while true tmp = x; x = y; y = tmp end")
    sys = extract_recurrences(path, ps.variables, 1)
    assert sys.updates["y"] == Affine({"x": Fraction(1)})
    assert sys.updates["x"] == Affine({"y": Fraction(1)})


def test_product_of_variables_rejected():
    ps, path = _path("while true x = v*x end")
    with pytest.raises(UnsupportedUpdate) as info:
        extract_recurrences(path, ps.variables, 1)
    assert info.value.variable == "x"


def test_mixed_scale_and_shift_rejected():
    ps, path = _path("while true x = (n1 + 1)*x + 1 end")
    with pytest.raises(UnsupportedUpdate):
        extract_recurrences(path, ps.variables, 1)


def test_counter_scaling_is_rational_scale():
    ps, path = _path("while true x = (n1 + 2)/(n1 + 1)*x end")
    upd = extract_recurrences(path, ps.variables, 1).updates["x"]
    assert isinstance(upd, RationalScale)
    assert upd.ratio_at(0) == 2 and upd.ratio_at(3) == Fraction(5, 4)


def test_counter_rejected_in_multi_path_loop():
    ps = flatten(parse("while true if true x = (n1 + 2)/(n1 + 1)*x else x = x end end"))
    with pytest.raises(UnsupportedUpdate):
        extract_loop(ps)


def test_counter_names_unique():
    ps = flatten(parse("while true if true x = x + 1 else if true y = y end end end"))
    counters = [s.counter for s in extract_loop(ps)]
    assert len(set(counters)) == len(counters) == 3


# --- semantic fidelity -----------------------------------------------------------------

NAMES = ["a", "b", "c"]


@st.composite
def affine_exprs(draw):
    """Affine expression with small rational coefficients, as an AST."""
    expr = Num(Fraction(draw(st.integers(-3, 3)), draw(st.integers(1, 3))))
    for name in draw(st.lists(st.sampled_from(NAMES), max_size=3)):
        coef = Num(Fraction(draw(st.integers(-3, 3)), draw(st.integers(1, 2))))
        expr = BinOp("+", expr, BinOp("*", coef, Var(name)))
    return expr


paths = st.lists(st.builds(Assign, st.sampled_from(NAMES), affine_exprs()), min_size=1,
                 max_size=5)


@settings(max_examples=100, deadline=None)
@given(paths, st.lists(st.builds(Fraction, st.integers(-9, 9), st.integers(1, 9)),
                       min_size=3, max_size=3), st.integers(0, 20))
def test_iteration_matches_execution(body, values, k):
    ast = LoopAst(tuple(body))
    ps = flatten(ast)
    (sys,) = extract_loop(ps)
    state = dict(zip(NAMES, values))
    state = {v: state[v] for v in ps.variables}
    direct = dict(state)
    for _ in range(k):
        for var, rhs in ps.paths[0]:
            direct[var] = eval_expr(rhs, direct)
    assert sys.iterate(state, k)[-1] == direct
