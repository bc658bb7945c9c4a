import random

import pytest

from dapip.failure import FAILURE
from dapip.tokens import TokenClass, ascii_lower, ascii_propercase, ascii_upper, match_token, spans


def test_number_first_forward():
    assert match_token(TokenClass.NUMBER, 1, False, "1-452-789-4567") == (0, 1)


def test_number_first_from_end():
    s = "a1b22c"
    span = match_token(TokenClass.NUMBER, 1, True, s)
    assert s[span[0]:span[1]] == "22"


def test_caps_word_absent():
    assert match_token(TokenClass.CAPS_WORD, 1, False, "lower case only") is FAILURE


def test_k_must_be_positive():
    with pytest.raises(ValueError):
        match_token(TokenClass.WORD, 0, False, "abc")


def test_caps_word_needs_two_letters():
    assert spans(TokenClass.CAPS_WORD, "A BC DEF") == [(2, 4), (5, 8)]


def test_propercase_word():
    assert spans(TokenClass.PROPERCASE_WORD, "Hello WORLD there Ok") == [(0, 5), (18, 20)]


def test_ws_tokens_split_on_whitespace():
    s = "John S. Henry"
    got = [s[a:b] for a, b in spans(TokenClass.WS_TOKEN, s)]
    assert got == ["John", "S.", "Henry"]


def test_word_is_alnum_run():
    s = "ab1,cd"
    got = [s[a:b] for a, b in spans(TokenClass.WORD, s)]
    assert got == ["ab1", "cd"]


def test_forward_and_backward_orders_agree():
    rng = random.Random(0)
    alphabet = "aB3 ,.x9Z"
    for _ in range(200):
        s = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 20)))
        for cls in TokenClass:
            occ = spans(cls, s)
            fwd = [match_token(cls, k, False, s) for k in range(1, len(occ) + 1)]
            bwd = [match_token(cls, k, True, s) for k in range(1, len(occ) + 1)]
            assert fwd == occ
            assert bwd == occ[::-1]


def test_ascii_case_helpers_pass_non_ascii_through():
    assert ascii_lower("AbC9é") == "abc9é"
    assert ascii_upper("AbC9é") == "ABC9é"
    assert ascii_propercase("john o. SMITH-jones") == "John O. Smith-Jones"
