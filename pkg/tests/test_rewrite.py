"""Uniformization rewrites: style-normalizing, semantics-preserving."""

import pytest

from selectc.errors import ConfigError
from selectc.field import FIELD_PRIME, Op
from selectc.ir import Assign, Program, SimpleExpression, eval_plain
from selectc.rewrite import BUILTIN_RULES, PatStmt, RewriteRule, uniformize, verify_rule

P = FIELD_PRIME


def le_pred_program():
    # c := x <= i - 1, the verbose spelling of x < i
    return Program(
        inputs=["x", "i"],
        statements=[
            Assign("j", SimpleExpression(Op.SUB, "i", "k1")),
            Assign("c", SimpleExpression(Op.LE, "x", "j")),
        ],
        consts={"k1": 1},
        prime=P,
    )


def not_eq_program():
    return Program(
        inputs=["a", "b"],
        statements=[
            Assign("e", SimpleExpression(Op.EQ, "a", "b")),
            Assign("d", SimpleExpression(Op.SUB, "k1", "e")),
        ],
        consts={"k1": 1},
        prime=P,
    )


def test_le_pred_rewrites_to_lt():
    q = uniformize(le_pred_program())
    (st,) = q.statements
    assert st.expr == SimpleExpression(Op.LT, "x", "i")


def test_not_eq_rewrites_to_neq():
    q = uniformize(not_eq_program())
    (st,) = q.statements
    assert st.expr == SimpleExpression(Op.NEQ, "a", "b")


@pytest.mark.parametrize("make", [le_pred_program, not_eq_program])
def test_rewrite_preserves_semantics(make):
    p = make()
    q = uniformize(p)
    for vals in ((0, 0), (1, 2), (5, 5), (-3 % P, 2), (7, -7 % P)):
        env = dict(zip(p.inputs, vals))
        assert eval_plain(p, env) == eval_plain(q, env)


def test_uniformize_is_idempotent():
    q = uniformize(le_pred_program())
    assert uniformize(q) == q


def test_untouched_program_returned_as_is():
    p = Program(
        inputs=["x"],
        statements=[Assign("r", SimpleExpression(Op.MUL, "x", "x"))],
        consts={},
        prime=P,
    )
    assert uniformize(p) is p


def test_no_rewrite_when_intermediate_still_used():
    # j feeds another statement, so the window cannot be collapsed
    p = Program(
        inputs=["x", "i"],
        statements=[
            Assign("j", SimpleExpression(Op.SUB, "i", "k1")),
            Assign("c", SimpleExpression(Op.LE, "x", "j")),
            Assign("r", SimpleExpression(Op.ADD, "c", "j")),
        ],
        consts={"k1": 1},
        prime=P,
    )
    assert uniformize(p) is p


def test_no_rewrite_when_intermediate_is_output():
    p = Program(
        inputs=["a", "b"],
        statements=[
            Assign("e", SimpleExpression(Op.EQ, "a", "b")),
            Assign("d", SimpleExpression(Op.SUB, "k1", "e")),
            Assign("r", SimpleExpression(Op.ADD, "e", "e")),
        ],
        consts={"k1": 1},
        prime=P,
    )
    # window (e, d) would eliminate e, which the output chain still reads
    q = uniformize(p)
    assert q.statements[0].expr.op is Op.EQ


def test_const_pattern_requires_matching_value():
    p = le_pred_program()
    p = Program(p.inputs, p.statements, {"k1": 2}, p.prime)
    assert uniformize(p) is p


def test_bad_rule_rejected_by_verification():
    bogus = RewriteRule(
        "add-to-mul",
        pattern=(PatStmt("$r", Op.ADD, "$x", "$y"),),
        replacement=(PatStmt("$r", Op.MUL, "$x", "$y"),),
    )
    with pytest.raises(ConfigError):
        verify_rule(bogus)


def test_rule_shape_validation():
    with pytest.raises(ConfigError):
        RewriteRule(
            "grows",
            pattern=(PatStmt("$r", Op.ADD, "$x", "$y"),),
            replacement=(
                PatStmt("$t", Op.ADD, "$x", "$y"),
                PatStmt("$r", Op.ADD, "$t", "$y"),
            ),
        )
    with pytest.raises(ConfigError):
        RewriteRule(
            "unbound-operand",
            pattern=(PatStmt("$r", Op.ADD, "$x", "$y"),),
            replacement=(PatStmt("$r", Op.ADD, "$x", "$z"),),
        )


def test_builtin_rules_verify():
    for rule in BUILTIN_RULES:
        verify_rule(rule)
