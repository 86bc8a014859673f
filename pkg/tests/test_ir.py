"""Three-address IR: evaluation, serialization, folding, normalization."""

import pytest

from selectc.errors import FormatError, UnboundVariableError
from selectc.field import FIELD_PRIME, Op
from selectc.ir import (
    Assign,
    Combine,
    Program,
    SimpleExpression,
    canonical_key,
    count_expressions,
    dead_code_eliminate,
    eval_env,
    eval_plain,
    fold_combines,
    live_statement_indices,
    normalize,
    parse_program,
    render_program,
    strip_const_values,
)

P = FIELD_PRIME


def prog(statements, inputs=("x", "y"), consts=None):
    return Program(
        inputs=list(inputs),
        statements=statements,
        consts=dict(consts or {}),
        prime=P,
    )


def test_eval_plain_straight_line():
    p = prog(
        [
            Assign("t0", SimpleExpression(Op.MUL, "x", "x")),
            Assign("t1", SimpleExpression(Op.ADD, "t0", "y")),
        ]
    )
    assert eval_plain(p, {"x": 3, "y": 4}) == 13


def test_output_is_last_target():
    p = prog([Assign("a", SimpleExpression(Op.ADD, "x", "y")),
              Assign("b", SimpleExpression(Op.SUB, "x", "y"))])
    assert p.output == "b"


def test_consts_preload_environment():
    p = prog([Assign("r", SimpleExpression(Op.MUL, "x", "k"))],
             inputs=["x"], consts={"k": 7})
    assert eval_plain(p, {"x": 6}) == 42


def test_missing_input_raises():
    p = prog([Assign("r", SimpleExpression(Op.ADD, "x", "y"))])
    with pytest.raises(UnboundVariableError):
        eval_plain(p, {"x": 1})


def test_combine_is_selector_weighted_sum():
    p = prog(
        [
            Assign("o0", SimpleExpression(Op.ADD, "x", "y")),
            Assign("o1", SimpleExpression(Op.MUL, "x", "y")),
            Combine("c", (("s0", "o0"), ("s1", "o1"))),
        ]
    )
    env = {"x": 3, "y": 5}
    assert eval_plain(p, env, selectors={"s0": 1, "s1": 0}) == 8
    assert eval_plain(p, env, selectors={"s0": 0, "s1": 1}) == 15
    # non-one-hot weights still evaluate; the sum is plain arithmetic
    assert eval_plain(p, env, selectors={"s0": 1, "s1": 1}) == 23


def test_combine_missing_selector_raises():
    p = prog(
        [
            Assign("o0", SimpleExpression(Op.ADD, "x", "y")),
            Assign("o1", SimpleExpression(Op.MUL, "x", "y")),
            Combine("c", (("s0", "o0"), ("s1", "o1"))),
        ]
    )
    with pytest.raises(UnboundVariableError):
        eval_plain(p, {"x": 1, "y": 2}, selectors={"s0": 1})


def test_combine_rejects_degenerate_shapes():
    with pytest.raises(ValueError):
        Combine("c", (("s0", "o0"),))
    with pytest.raises(ValueError):
        Combine("c", (("s0", "o0"), ("s0", "o1")))


def test_eval_env_returns_all_targets():
    p = prog([Assign("a", SimpleExpression(Op.ADD, "x", "y")),
              Assign("b", SimpleExpression(Op.MUL, "a", "a"))])
    env = eval_env(p, {"x": 1, "y": 2})
    assert env["a"] == 3 and env["b"] == 9


def test_count_expressions():
    assert count_expressions(6, 6) == 216
    assert count_expressions(3, 4, arity=2) == 36
    with pytest.raises(ValueError):
        count_expressions(0, 4)


def test_render_parse_round_trip():
    p = prog(
        [
            Assign("t0", SimpleExpression(Op.DIV, "x", "k0")),
            Combine("c", (("s0", "t0"), ("s1", "x"))),
        ],
        inputs=["x"],
        consts={"k0": -2 % P},
    )
    assert parse_program(render_program(p)) == p


def test_render_uses_signed_const_values():
    p = prog([Assign("r", SimpleExpression(Op.ADD, "x", "k"))],
             inputs=["x"], consts={"k": -9999 % P})
    assert "const k = -9999" in render_program(p)


def test_parse_rejects_garbage():
    with pytest.raises(FormatError):
        parse_program("prime 7\ninput x\nr := BOGUS x x\n")
    with pytest.raises(FormatError):
        parse_program("prime 7\ninput x\nr ADD x x\n")


def test_parse_defaults_field_prime():
    p = parse_program("input x\nr := ADD x x\n")
    assert p.prime == P


def test_parse_ignores_comments_and_blanks():
    text = "# header\nprime 7\n\ninput x\n# body\nr := ADD x x\n"
    p = parse_program(text)
    assert p.prime == 7 and p.inputs == ["x"]


def test_live_statement_indices_drops_dead_code():
    p = prog(
        [
            Assign("dead", SimpleExpression(Op.MUL, "x", "x")),
            Assign("a", SimpleExpression(Op.ADD, "x", "y")),
            Assign("r", SimpleExpression(Op.MUL, "a", "a")),
        ]
    )
    assert live_statement_indices(p) == [1, 2]


def test_dead_code_eliminate_keeps_semantics():
    p = prog(
        [
            Assign("junk", SimpleExpression(Op.SUB, "x", "y")),
            Assign("r", SimpleExpression(Op.ADD, "x", "y")),
        ]
    )
    d = dead_code_eliminate(p)
    assert len(d.statements) == 1
    assert eval_plain(d, {"x": 2, "y": 3}) == eval_plain(p, {"x": 2, "y": 3})


def test_fold_combines_picks_one_option():
    p = prog(
        [
            Assign("o0", SimpleExpression(Op.ADD, "x", "y")),
            Assign("o1", SimpleExpression(Op.MUL, "x", "y")),
            Combine("c", (("s0", "o0"), ("s1", "o1"))),
        ]
    )
    f = fold_combines(p, {2: 1})
    f = dead_code_eliminate(f)
    assert [st.expr.op for st in f.statements] == [Op.MUL]
    assert eval_plain(f, {"x": 3, "y": 5}) == 15


def test_fold_inlines_single_use_option_targets():
    # after folding, the chosen option lands in the combine target
    p = prog(
        [
            Assign("o0", SimpleExpression(Op.ADD, "x", "y")),
            Assign("o1", SimpleExpression(Op.MUL, "x", "y")),
            Combine("c", (("s0", "o0"), ("s1", "o1"))),
            Assign("r", SimpleExpression(Op.SUB, "c", "x")),
        ]
    )
    f = dead_code_eliminate(fold_combines(p, {2: 0}))
    assert f.statements[0].target == "c"
    assert eval_plain(f, {"x": 3, "y": 5}) == 5


def test_fold_shared_source_substitutes_instead():
    # option source also feeds another statement, so it must survive
    p = prog(
        [
            Assign("o0", SimpleExpression(Op.ADD, "x", "y")),
            Assign("keep", SimpleExpression(Op.MUL, "o0", "o0")),
            Combine("c", (("s0", "o0"), ("s1", "keep"))),
            Assign("r", SimpleExpression(Op.ADD, "c", "keep")),
        ]
    )
    f = dead_code_eliminate(fold_combines(p, {2: 0}))
    want = (3 + 5) + (3 + 5) ** 2
    assert eval_plain(f, {"x": 3, "y": 5}) == want


def test_normalize_renames_temporaries():
    a = prog([Assign("weird", SimpleExpression(Op.ADD, "x", "y")),
              Assign("q", SimpleExpression(Op.MUL, "weird", "weird"))])
    b = prog([Assign("t0", SimpleExpression(Op.ADD, "x", "y")),
              Assign("t1", SimpleExpression(Op.MUL, "t0", "t0"))])
    assert normalize(a) == normalize(b)


def test_normalize_drops_unused_consts():
    p = prog([Assign("r", SimpleExpression(Op.ADD, "x", "y"))],
             consts={"k": 5})
    assert normalize(p).consts == {}


def test_canonical_key_distinguishes_const_values():
    a = prog([Assign("r", SimpleExpression(Op.ADD, "x", "k"))],
             inputs=["x"], consts={"k": 1})
    b = prog([Assign("r", SimpleExpression(Op.ADD, "x", "k"))],
             inputs=["x"], consts={"k": 2})
    assert canonical_key(a) != canonical_key(b)
    assert canonical_key(a, False) == canonical_key(b, False)


def test_canonical_key_ignores_temp_names():
    a = prog([Assign("foo", SimpleExpression(Op.ADD, "x", "y"))])
    b = prog([Assign("bar", SimpleExpression(Op.ADD, "x", "y"))])
    assert canonical_key(a) == canonical_key(b)


def test_strip_const_values_moves_consts_to_inputs():
    p = prog([Assign("r", SimpleExpression(Op.ADD, "x", "k"))],
             inputs=["x"], consts={"k": 3})
    s = strip_const_values(p)
    assert s.consts == {} and set(s.inputs) == {"x", "k"}
