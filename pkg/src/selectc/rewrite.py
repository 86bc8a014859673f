"""Semantics-preserving rewrite rules over three-address programs.

Uniformization rewrites rare statement shapes into the common form for
the same computation, shrinking the signal a pattern-matching attacker
can read from statement style. Rules are plain data: a window of
statement patterns and its replacement, with '$name' metavariables for
variables and bare integers for operands that must be const variables
holding that value.

The two built-in rules fold the classic comparison and negation
variants into one shape each:

    $j := SUB $i <1> ; $c := LE $x $j   ->   $c := LT $x $i
    $e := EQ $a $b  ; $d := SUB <1> $e  ->   $d := NEQ $a $b

Every rule is checked for input/output agreement on sampled inputs the
first time it is applied. Matches never fire when an eliminated
intermediate is still used elsewhere or is the program output, so a
rewrite can only replace statements whose effect it fully reproduces.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .errors import ConfigError
from .field import FIELD_PRIME, Op, signed
from .ir import Assign, Program, SimpleExpression, eval_env, statement_operands
from .rng import derive_seed

_VERIFY_SAMPLES = 200


@dataclass(frozen=True)
class PatStmt:
    """One statement pattern: metavariable target, op, two operands.

    Operands are '$name' metavariables or plain ints that match const
    variables bound to that (signed) value.
    """

    target: str
    op: Op
    in1: str | int
    in2: str | int


@dataclass(frozen=True)
class RewriteRule:
    name: str
    pattern: tuple[PatStmt, ...]
    replacement: tuple[PatStmt, ...]

    def __post_init__(self) -> None:
        if not self.pattern or not self.replacement:
            raise ConfigError(f"rule {self.name}: pattern and replacement must be non-empty")
        if len(self.replacement) > len(self.pattern):
            raise ConfigError(f"rule {self.name}: replacement may not grow the program")
        pat_targets = {p.target for p in self.pattern}
        pat_operands = {o for p in self.pattern for o in (p.in1, p.in2)}
        kept = {r.target for r in self.replacement}
        for p in self.pattern + self.replacement:
            if not (isinstance(p.target, str) and p.target.startswith("$")):
                raise ConfigError(f"rule {self.name}: targets must be metavariables")
        for r in self.replacement:
            if r.target not in pat_targets:
                raise ConfigError(f"rule {self.name}: replacement target {r.target} unbound")
            for o in (r.in1, r.in2):
                if isinstance(o, str):
                    if o not in (pat_operands | pat_targets) - (pat_targets - kept):
                        raise ConfigError(f"rule {self.name}: operand {o} unbound or eliminated")
                elif o not in pat_operands:
                    raise ConfigError(f"rule {self.name}: const {o} does not occur in pattern")
        if self.replacement[-1].target != self.pattern[-1].target:
            raise ConfigError(f"rule {self.name}: rewrite must preserve the final target")

    def eliminated_targets(self) -> set[str]:
        kept = {r.target for r in self.replacement}
        return {p.target for p in self.pattern if p.target not in kept}


def _rule_as_programs(rule: RewriteRule, prime: int) -> tuple[Program, Program, str]:
    """Instantiate pattern and replacement as standalone programs."""
    operand_vars: list[str] = []
    const_values: list[int] = []
    targets = {p.target for p in rule.pattern}
    for p in rule.pattern:
        for o in (p.in1, p.in2):
            if isinstance(o, int):
                if o not in const_values:
                    const_values.append(o)
            elif o not in targets and o not in operand_vars:
                operand_vars.append(o)

    def var_name(metavar: str) -> str:
        return "v_" + metavar.lstrip("$")

    consts = {f"kc{i}": val % prime for i, val in enumerate(const_values)}
    const_var = {val: name for name, val in zip(consts, const_values)}

    def operand(o: str | int) -> str:
        return const_var[o % prime] if isinstance(o, int) else var_name(o)

    def build(stmts: tuple[PatStmt, ...]) -> Program:
        body = [
            Assign(var_name(p.target), SimpleExpression(p.op, operand(p.in1), operand(p.in2)))
            for p in stmts
        ]
        return Program(
            inputs=[var_name(v) for v in operand_vars],
            statements=body,
            consts=dict(consts),
            prime=prime,
        )

    out = var_name(rule.replacement[-1].target)
    return build(rule.pattern), build(rule.replacement), out


_verified: set[tuple[int, int]] = set()


def verify_rule(rule: RewriteRule, prime: int = FIELD_PRIME) -> None:
    """Check pattern and replacement agree on sampled inputs; raise if not."""
    cache_key = (hash(rule), prime)
    if cache_key in _verified:
        return
    pat_prog, rep_prog, out = _rule_as_programs(rule, prime)
    rng = random.Random(derive_seed(0, f"rule-check:{rule.name}"))
    for trial in range(_VERIFY_SAMPLES):
        if trial % 2 == 0:
            inputs = {v: rng.randrange(prime) for v in pat_prog.inputs}
        else:
            inputs = {v: rng.randint(-6, 6) % prime for v in pat_prog.inputs}
        got = eval_env(pat_prog, inputs)[out]
        want = eval_env(rep_prog, inputs)[out]
        if got != want:
            raise ConfigError(
                f"rule {rule.name} is not semantics-preserving: "
                f"inputs {inputs} give {got} vs {want}"
            )
    _verified.add(cache_key)


def _match_window(
    program: Program, start: int, rule: RewriteRule
) -> tuple[dict[str, str], dict[int, str]] | None:
    binding: dict[str, str] = {}
    const_binding: dict[int, str] = {}

    def match_operand(pat: str | int, var: str) -> bool:
        if isinstance(pat, int):
            if var not in program.consts:
                return False
            if signed(program.consts[var], program.prime) != pat:
                return False
            if const_binding.setdefault(pat, var) != var:
                return False
            return True
        if binding.setdefault(pat, var) != var:
            return False
        return True

    for offset, pat in enumerate(rule.pattern):
        st = program.statements[start + offset]
        if not isinstance(st, Assign) or st.expr.op is not pat.op:
            return None
        if not match_operand(pat.target, st.target):
            return None
        if not match_operand(pat.in1, st.expr.in1):
            return None
        if not match_operand(pat.in2, st.expr.in2):
            return None

    eliminated = {binding[m] for m in rule.eliminated_targets()}
    if eliminated:
        if program.statements and program.output in eliminated:
            return None
        window = range(start, start + len(rule.pattern))
        for i, st in enumerate(program.statements):
            if i in window:
                continue
            if eliminated & set(statement_operands(st)):
                return None
    return binding, const_binding


def _instantiate(rule: RewriteRule, binding: dict[str, str], const_binding: dict[int, str]) -> list[Assign]:
    def operand(o: str | int) -> str:
        return const_binding[o] if isinstance(o, int) else binding[o]

    return [
        Assign(binding[r.target], SimpleExpression(r.op, operand(r.in1), operand(r.in2)))
        for r in rule.replacement
    ]


BUILTIN_RULES: tuple[RewriteRule, ...] = (
    RewriteRule(
        "le-pred-to-lt",
        pattern=(
            PatStmt("$j", Op.SUB, "$i", 1),
            PatStmt("$c", Op.LE, "$x", "$j"),
        ),
        replacement=(PatStmt("$c", Op.LT, "$x", "$i"),),
    ),
    RewriteRule(
        "not-eq-to-neq",
        pattern=(
            PatStmt("$e", Op.EQ, "$a", "$b"),
            PatStmt("$d", Op.SUB, 1, "$e"),
        ),
        replacement=(PatStmt("$d", Op.NEQ, "$a", "$b"),),
    ),
)


def uniformize(
    program: Program,
    rules: tuple[RewriteRule, ...] = BUILTIN_RULES,
    verify: bool = True,
) -> Program:
    """Apply rewrite rules to a fixpoint.

    Scanning restarts after every applied rewrite, so the result is
    stable: running uniformize on its own output changes nothing. A
    program no rule matches is returned as-is.
    """
    if verify:
        for rule in rules:
            verify_rule(rule, program.prime)
    current = program
    changed_any = False
    passes = 0
    max_passes = len(program.statements) + 10
    while True:
        changed = False
        stmts = list(current.statements)
        i = 0
        while i < len(stmts):
            for rule in rules:
                if i + len(rule.pattern) > len(stmts):
                    continue
                probe = Program(
                    inputs=current.inputs,
                    statements=stmts,
                    consts=current.consts,
                    prime=current.prime,
                )
                m = _match_window(probe, i, rule)
                if m is None:
                    continue
                stmts[i : i + len(rule.pattern)] = _instantiate(rule, *m)
                changed = True
                break
            else:
                i += 1
        if changed:
            current = Program(
                inputs=list(current.inputs),
                statements=stmts,
                consts=dict(current.consts),
                prime=current.prime,
            )
            changed_any = True
        passes += 1
        if not changed:
            break
        if passes > max_passes:
            raise ConfigError("rewrite rules did not reach a fixpoint")
    return current if changed_any else program
