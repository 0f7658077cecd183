import random

import pytest

from sl2free.enumeration import BallSpec, ball_array
from sl2free.exact_arith import DomainError
from sl2free.mat2 import IDENTITY, Mat2, inverse, mul
from sl2free.relations import (
    Letter,
    NotFoundUpTo,
    evaluate,
    find_relation,
    format_word,
    inverse_word,
    is_reduced,
    parse_word,
    prefix_tree_levels,
    reduced_words,
    walk_words,
    words_count,
    words_of_length,
)

R = Mat2(0, -1, 1, -1)
S = Mat2(0, -1, 1, 0)
A1 = Mat2(5, 1, 4, 1)
A2 = Mat2(12, -5, 5, -2)


def test_word_count_examples():
    assert sum(1 for _ in reduced_words(2, 1)) == 4
    assert sum(1 for _ in reduced_words(2, 2)) == 16
    assert [format_word(w, 1) for w in reduced_words(1, 3)] == [
        "a", "a⁻¹", "a a", "a⁻¹ a⁻¹", "a a a", "a⁻¹ a⁻¹ a⁻¹",
    ]


@pytest.mark.parametrize("s", [1, 2, 3])
def test_word_counts(s):
    for n in range(1, 9):
        words = list(words_of_length(s, n))
        assert len(words) == len(set(words)) == words_count(s, n) == 2 * s * (2 * s - 1) ** (n - 1)
        assert all(is_reduced(w) for w in words)


def test_evaluate_examples():
    assert evaluate((), [R]) == IDENTITY
    assert evaluate(parse_word("a a a"), [R]) == IDENTITY
    assert evaluate(parse_word("a b"), [A1, inverse(A1)]) == IDENTITY


def test_prefix_tree_matches_naive():
    rng = random.Random(3)
    tup = [A1, A2, Mat2(2, 1, 1, 1)]
    levels = prefix_tree_levels(tup, 6)
    flat = [item for lvl in levels[1:] for item in lvl]
    for w, M in rng.sample(flat, 1000):
        P = IDENTITY
        for x in w:
            P = mul(P, tup[x.gen - 1] if x.sign > 0 else inverse(tup[x.gen - 1]))
        assert P == M
    walked = list(walk_words(tup, 6))
    assert walked == flat


def test_find_relation_examples():
    w = find_relation([S], 6)
    assert w.found and format_word(w.word, 1) == "a a a a"
    w = find_relation([R], 3)
    assert w.found and format_word(w.word, 1) == "a a a" and w.product == IDENTITY
    res = find_relation([A1, A2], 10)
    assert isinstance(res, NotFoundUpTo) and res.L == 10
    assert res.checked_words == sum(words_count(2, n) for n in range(1, 11))


def test_duplicates_give_length_two_witness():
    w = find_relation([A1, A2, A1], 12)
    assert w.found and w.length == 2
    assert w.word == (Letter(1, 1), Letter(3, -1))
    assert format_word(w.word, 3) == "a1 a3⁻¹"


def test_mitm_matches_bfs():
    pool = [Mat2(*map(int, r)) for r in ball_array(BallSpec(3))]
    rng = random.Random(0)
    for _ in range(300):
        tup = rng.sample(pool, rng.choice([1, 2, 2, 3]))
        L = rng.randint(1, 6 if len(tup) < 3 else 5)
        a = find_relation(tup, L)
        b = find_relation(tup, L, method="bfs")
        assert a == b
        if a.found:
            assert evaluate(a.word, tup) == IDENTITY and is_reduced(a.word)


def test_witness_is_first_in_order():
    tup = [S, R]
    w = find_relation(tup, 6)
    # shortest first, then lexicographic with a < a^-1 < b < b^-1
    assert w.length == 3 and format_word(w.word, 2) == "a2 a2 a2"
    assert find_relation([S, Mat2(1, 1, 0, 1)], 6).word == parse_word("a1 a1 a1 a1")


def test_parse_format_round_trip():
    for w in reduced_words(3, 3):
        assert parse_word(format_word(w, 3)) == w
        assert inverse_word(inverse_word(w)) == w
    assert parse_word("a^-1 b'") == (Letter(1, -1), Letter(2, -1))
    with pytest.raises(DomainError):
        parse_word("x1")


def test_bad_arguments():
    with pytest.raises(DomainError):
        find_relation([], 4)
    with pytest.raises(DomainError):
        find_relation([A1], 0)
    with pytest.raises(DomainError):
        evaluate((Letter(2, 1),), [A1])
