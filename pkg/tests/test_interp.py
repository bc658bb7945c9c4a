import random

import pytest

from dapip.datagen import GenConfig, sample_program
from dapip.dsl import Concat, parse_program
from dapip.failure import FAILURE, Failure
from dapip.interp import ExamplePair, apply_all, consistent, evaluate

NAME_ABBREV = ("(Concat (GetFirstChar (arg inp)) (ConstStr DOT) (ConstStr SPACE) "
               "(GetLastWord (arg inp)))")
CITY_STATE = ("(Concat (GetCityName (arg inp)) (ConstStr COMMASPACE) "
              "(GetStateFromCity (arg (GetCityName (arg inp)))))")

NAME_ROWS = [
    ExamplePair("John S. Henry", "J. Henry"),
    ExamplePair("Mike Stanley", "M. Stanley"),
    ExamplePair("Bernie John Smith", "B. Smith"),
    ExamplePair("Martha S Johnson", "M. Johnson"),
]
ADDRESS_ROWS = [
    ExamplePair("500 Mem Dr., Cambridge, 02139", "Cambridge, MA"),
    ExamplePair("22 NE Street, Redmond, USA", "Redmond, WA"),
    ExamplePair("Seattle, 98002", "Seattle, WA"),
    ExamplePair("21 Peace Ave., Kirkland, 98034", "Kirkland, WA"),
]


def test_name_abbreviation_rows():
    p = parse_program(NAME_ABBREV)
    assert evaluate(p, "Mike Stanley") == "M. Stanley"
    assert consistent(p, NAME_ROWS)


def test_city_state_rows():
    p = parse_program(CITY_STATE)
    assert evaluate(p, "500 Mem Dr., Cambridge, 02139") == "Cambridge, MA"
    assert consistent(p, ADDRESS_ROWS)


def test_identity_program():
    p = parse_program("(Concat inp)")
    for s in ("", "x", "John S. Henry"):
        if s:
            assert evaluate(p, s) == s
    assert not consistent(p, NAME_ROWS)


def test_lowercase_email_prefix():
    p = parse_program("(Concat (ToLowercase (arg (GetFirstWord (arg inp)))) (ConstStr AT))")
    assert evaluate(p, "Logan Smith") == "logan@"


def test_code_bracket_rows():
    p = parse_program("(Concat (GetStartToEndOfFirstNumber (arg (ToUppercase (arg inp)))) "
                      "(ConstStr RBRACKET))")
    rows = [("[CPT-00350", "[CPT-00350]"), ("[CPT-11523]", "[CPT-11523]"),
            ("[CPT-23412]", "[CPT-23412]"), ("[CPT-23412", "[CPT-23412]"),
            ("[CPT-2422]", "[CPT-2422]")]
    assert consistent(p, [ExamplePair(a, b) for a, b in rows])


def test_failure_propagates():
    p = parse_program("(Concat (GetFirstNumber (arg inp)) (ConstStr DOT))")
    assert evaluate(p, "no digits") is FAILURE
    assert not consistent(p, [ExamplePair("no digits", ".")])


def test_apply_all_order_and_failures():
    p = parse_program(NAME_ABBREV)
    outs = apply_all(p, ["Bernie John Smith", "Martha S Johnson"])
    assert outs == ["B. Smith", "M. Johnson"]
    p2 = parse_program("(Concat (GetFirstNumber (arg inp)))")
    outs2 = apply_all(p2, ["a 1", "none", "2"])
    assert outs2[0] == "1" and outs2[2] == "2"
    assert isinstance(outs2[1], Failure)
    assert apply_all(p2, []) == []


def test_consistent_requires_examples():
    with pytest.raises(ValueError):
        consistent(parse_program("(Concat inp)"), [])


def test_example_input_must_be_nonempty():
    with pytest.raises(ValueError):
        ExamplePair("", "out")


def test_compositionality():
    rng = random.Random(2)
    cfg = GenConfig(max_size=6, seed=0)
    for _ in range(100):
        p = sample_program(rng, cfg)
        if len(p.children) < 2:
            continue
        s = "Ab 12 cd, EF. 345 x"
        whole = evaluate(p, s)
        parts = [evaluate(Concat((c,)), s) for c in p.children]
        if any(isinstance(x, Failure) for x in parts):
            assert whole is FAILURE
        else:
            assert whole == "".join(parts)


def test_substitutivity():
    base = parse_program("(Concat (GetFirstWord (arg inp)) (ConstStr DOT))")
    swapped = parse_program("(Concat (GetFirstWord (arg (GetIdentity (arg inp)))) (ConstStr DOT))")
    for s in ("alpha beta", "x", "A1 b2"):
        assert evaluate(base, s) == evaluate(swapped, s)
