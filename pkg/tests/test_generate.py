"""Random program generators used by the differential and attack tests."""

import random

from selectc.field import FIELD_PRIME
from selectc.generate import (
    random_inputs,
    random_linear_program,
    random_surface_program,
)
from selectc.ir import Assign, eval_plain
from selectc.lower import lower
from selectc.surface import parse_surface, render_surface


def test_linear_program_shape():
    p = random_linear_program(random.Random(1), n_statements=5, n_inputs=3, n_consts=2)
    assert len(p.statements) == 5
    assert len(p.inputs) == 3
    assert len(p.consts) == 2
    targets = [st.target for st in p.statements]
    assert len(set(targets)) == len(targets)
    assert all(isinstance(st, Assign) for st in p.statements)


def test_linear_program_is_deterministic():
    a = random_linear_program(random.Random(42), n_statements=4)
    b = random_linear_program(random.Random(42), n_statements=4)
    assert a == b


def test_linear_program_evaluates():
    rng = random.Random(9)
    p = random_linear_program(rng, n_statements=6)
    env = random_inputs(p, rng)
    assert 0 <= eval_plain(p, env) < FIELD_PRIME


def test_random_inputs_cover_exactly_the_inputs():
    rng = random.Random(3)
    p = random_linear_program(rng, n_statements=3, n_inputs=4)
    env = random_inputs(p, rng)
    assert set(env) == set(p.inputs)


def test_small_inputs_stay_small_signed():
    rng = random.Random(5)
    p = random_linear_program(rng, n_statements=3, n_inputs=4)
    for _ in range(20):
        for v in random_inputs(p, rng, small=True).values():
            s = v if v <= FIELD_PRIME // 2 else v - FIELD_PRIME
            assert -8 <= s <= 8


def test_surface_programs_parse_and_lower():
    gen = random.Random(1234)
    sizes = []
    for _ in range(40):
        sp = random_surface_program(gen, max_statements=8)
        reparsed = parse_surface(render_surface(sp))
        assert reparsed.statements == sp.statements
        p = lower(sp)
        sizes.append(len(p.statements))
        assert p.statements, "generated program lowers to nothing"
    # the generator should exercise branches and loops, not just chains
    assert max(sizes) > 10


def test_surface_generator_is_deterministic():
    a = random_surface_program(random.Random(77))
    b = random_surface_program(random.Random(77))
    assert render_surface(a) == render_surface(b)
