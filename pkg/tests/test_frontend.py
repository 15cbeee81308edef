from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aligator.errors import LoopSyntaxError, ReservedIdentifier, UnsupportedConstruct
from aligator.frontend import (
    Assign,
    BinOp,
    If,
    LoopAst,
    Neg,
    Num,
    Var,
    branch_count,
    eval_expr,
    execute,
    expr_vars,
    flatten,
    format_loop,
    parse,
)


def test_squares_parses(squares):
    ast = parse(squares)
    assert len(ast.body) == 1
    (branch,) = ast.body
    assert isinstance(branch, If)
    assert [a.var for a in branch.then_body] == ["r", "v"]
    assert [a.var for a in branch.else_body] == ["r", "u"]
    assert branch.then_body[0].rhs == BinOp("-", Var("r"), Var("v"))


def test_identity_assignment():
    assert parse("while true x = x end") == LoopAst((Assign("x", Var("x")),))


def test_multiplicative_branches():
    ast = parse("while true if true x = 2*x else x = x/3 end end")
    (branch,) = ast.body
    assert branch.then_body == (Assign("x", BinOp("*", Num(Fraction(2)), Var("x"))),)
    assert branch.else_body == (Assign("x", BinOp("/", Var("x"), Num(Fraction(3)))),)


def test_guards_are_discarded():
    a = parse("while x < 10 && y != 0\n if x + 1 >= y\n x = x + 1\n else\n y = y - 1\n end\nend")
    b = parse("while true\n if true\n x = x + 1\n else\n y = y - 1\n end\nend")
    assert a == b


def test_semicolon_and_newline_terminate():
    assert parse("while true\nx = x + 1\ny = y\nend") == parse("while true x = x + 1; y = y end")


def test_if_without_else_is_skip():
    ps = flatten(parse("while true if true x = x + 1 end end"))
    assert ps.paths == ((("x", BinOp("+", Var("x"), Num(Fraction(1)))),), ())


def test_elseif_chain_flattens_to_three_paths():
    src = "while true if x < 0 x = x + 1 elseif x < 5 x = x + 2 else x = x + 3 end end"
    assert len(flatten(parse(src)).paths) == 3


@pytest.mark.parametrize("source, error, code", [
    ("while true x = x/y end", UnsupportedConstruct, "DivisionByVariable"),
    ("while true while true x = 1 end end", UnsupportedConstruct, "NestedWhile"),
    ("while true x = f(x) end", UnsupportedConstruct, "FunctionCall"),
    ("while true x = a[1] end", UnsupportedConstruct, "ArrayAccess"),
    ("while true x = 1 end\nwhile true y = 1 end", UnsupportedConstruct, "MultipleLoops"),
    ("while true x_0 = 1 end", ReservedIdentifier, "ReservedIdentifier"),
    ("while true n1 = 1 end", ReservedIdentifier, "ReservedIdentifier"),
    ("while true t1 = 2 end", ReservedIdentifier, "ReservedIdentifier"),
    ("while true a__m1 = 1 end", ReservedIdentifier, "ReservedIdentifier"),
    ("while true x = = 1 end", LoopSyntaxError, "SyntaxError"),
    ("while true x = 1", LoopSyntaxError, "SyntaxError"),
    ("x = 1", LoopSyntaxError, "SyntaxError"),
])
def test_rejected_inputs(source, error, code):
    with pytest.raises(error) as info:
        parse(source)
    assert info.value.code == code


def test_syntax_error_position():
    with pytest.raises(LoopSyntaxError) as info:
        parse("while true\n  x = * 2\nend")
    assert (info.value.line, info.value.col) == (2, 7)


def test_unsupported_exit_codes():
    with pytest.raises(UnsupportedConstruct) as info:
        parse("while true while true x = 1 end end")
    assert info.value.exit_code == 2
    with pytest.raises(LoopSyntaxError) as info:
        parse("while")
    assert info.value.exit_code == 1


def test_squares_flatten(squares):
    ps = flatten(parse(squares))
    assert ps.variables == ("r", "v", "u")
    assert [[a for a, _ in p] for p in ps.paths] == [["r", "v"], ["r", "u"]]


# --- generated loops ---------------------------------------------------------------

NAMES = ["x", "y", "z", "acc"]

exprs = st.recursive(
    st.one_of(st.sampled_from(NAMES).map(Var),
              st.builds(Fraction, st.integers(0, 9), st.integers(1, 4)).map(Num)),
    lambda inner: st.one_of(
        st.builds(BinOp, st.sampled_from("+-*"), inner, inner),
        st.builds(BinOp, st.just("/"), inner,
                  st.integers(1, 9).map(lambda k: Num(Fraction(k)))),
        st.builds(Neg, inner),
    ),
    max_leaves=6,
)

assigns = st.builds(Assign, st.sampled_from(NAMES), exprs)

stmts = st.recursive(
    assigns,
    lambda inner: st.builds(If, st.lists(inner, max_size=3).map(tuple),
                            st.lists(inner, max_size=3).map(tuple)),
    max_leaves=6,
)

loops = st.lists(stmts, min_size=1, max_size=4).map(lambda b: LoopAst(tuple(b)))


@given(loops)
def test_print_parse_round_trip(ast):
    once = parse(format_loop(ast))
    assert parse(format_loop(once)) == once


@given(loops)
def test_path_count_is_product_of_branches(ast):
    ps = flatten(ast)
    assert len(ps.paths) == branch_count(ast.body)
    expected = 1
    for s in ast.body:
        if isinstance(s, If):
            expected *= branch_count(s.then_body) + branch_count(s.else_body)
    assert len(ps.paths) == expected


@given(loops)
def test_every_variable_is_listed(ast):
    ps = flatten(ast)
    for path in ps.paths:
        for var, rhs in path:
            assert var in ps.variables
            assert set(expr_vars(rhs)) <= set(ps.variables)


@settings(max_examples=50)
@given(loops, st.lists(st.booleans(), min_size=64, max_size=64),
       st.lists(st.integers(-5, 5), min_size=4, max_size=4))
def test_paths_match_execution(ast, choices, values):
    """Running the AST with a branch sequence equals running the matching path."""
    ps = flatten(ast)
    state = dict(zip(NAMES, map(Fraction, values)))
    picks = iter(choices)
    direct = execute(ast, state, lambda: next(picks))
    matching = [p for p in ps.paths if _run_path(p, state) == direct]
    assert matching


def _run_path(path, state):
    state = dict(state)
    for var, rhs in path:
        state[var] = eval_expr(rhs, state)
    return state
