import random
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from conjsec.words import (
    Letter,
    Word,
    WordError,
    commutator,
    concat,
    conjugate,
    cyclic_reduce,
    format_word,
    free_reduce,
    invert,
    parse_word,
    random_reduced_word,
    reduced_words,
    substitute,
)

R = 3  # a, b, c = g1, g2, g3


def w(*ints, n=R):
    return Word.from_ints(ints, n)


def words(n=R, max_size=24):
    letter = st.integers(1, n).flatmap(lambda i: st.sampled_from([i, -i]))
    return st.lists(letter, max_size=max_size).map(lambda xs: Word.from_ints(xs, n))


def naive_reduce(ints):
    """Repeated single passes until nothing cancels."""
    xs = list(ints)
    while True:
        for i in range(len(xs) - 1):
            if xs[i] == -xs[i + 1]:
                del xs[i:i + 2]
                break
        else:
            return tuple(xs)


def test_free_reduce_examples():
    assert free_reduce(w(1, -1)) == Word.identity(R)
    assert free_reduce(w(1, 2, -2, 1)) == w(1, 1)


def test_free_reduce_matches_fixpoint_oracle():
    rng = random.Random(11)
    for _ in range(50):
        ints = [rng.choice([1, -1, 2, -2]) for _ in range(200)]
        assert free_reduce(Word.from_ints(ints, 2)).to_ints() == naive_reduce(ints)


def test_invert_examples():
    assert invert(w(1, -2)) == w(2, -1)
    assert invert(Word.identity(R)) == Word.identity(R)


def test_conjugate_examples():
    assert conjugate(w(1), w(2)) == w(2, 1, -2)
    a = w(1, 2, -2, 3)
    assert conjugate(a, Word.identity(R)) == free_reduce(a)


def test_cyclic_reduce_examples():
    assert cyclic_reduce(w(2, 1, -2)) == (w(1), w(2))
    assert cyclic_reduce(w(1, 2)) == (w(1, 2), Word.identity(R))
    assert cyclic_reduce(w(3, 2, 1, -2, -3)) == (w(1), w(3, 2))


def test_substitute_examples():
    u, v = w(1, 3), w(2, 2)
    assert substitute(w(1, -2, n=2), (u, v)) == free_reduce(concat(u, invert(v)))
    assert substitute(Word.identity(2), (u, v)) == Word.identity(R)


def test_substitute_respects_conjugation():
    rng = random.Random(5)
    bs = tuple(random_reduced_word(rng, 4, R) for _ in range(3))
    for _ in range(40):
        x = random_reduced_word(rng, rng.randint(0, 6), 3)
        y = random_reduced_word(rng, rng.randint(0, 6), R)
        images = tuple(conjugate(b, y) for b in bs)
        assert substitute(x, images) == conjugate(substitute(x, bs), y)


def test_commutator_is_xyXY():
    x, y = w(1), w(2)
    assert commutator(x, y) == w(1, 2, -1, -2)


@given(words())
def test_free_reduce_idempotent_and_shrinking(u):
    r = free_reduce(u)
    assert free_reduce(r) == r
    assert len(r) <= len(u)
    ints = r.to_ints()
    assert all(ints[i] != -ints[i + 1] for i in range(len(ints) - 1))


@given(words())
def test_invert_involution(u):
    assert invert(invert(u)) == u


@given(words(), words(), words())
def test_group_axioms(u, v, x):
    assert free_reduce(concat(concat(u, v), x)) == free_reduce(concat(u, concat(v, x)))
    assert free_reduce(concat(u, invert(u))) == Word.identity(R)


@given(words(), words(), words())
def test_conjugation_is_an_action(a, x, y):
    assert conjugate(a, concat(x, y)) == conjugate(conjugate(a, y), x)
    assert conjugate(conjugate(a, x), invert(x)) == free_reduce(a)


@given(words())
def test_cyclic_reduce_round_trip(u):
    core, c = cyclic_reduce(u)
    assert conjugate(core, c) == free_reduce(u)
    ints = core.to_ints()
    assert len(ints) < 2 or ints[0] != -ints[-1]


@given(words())
def test_text_format_round_trip(u):
    assert parse_word(format_word(u), R) == u


def test_parse_word_is_strict():
    assert parse_word("", 2) == Word.identity(2)
    assert parse_word("g1 g2^-1 g1", 2) == Word.from_ints([1, -2, 1], 2)
    for bad in ("g0", "g3", "x1", "g1^-2", "g1^2", "g1,g2", "G1"):
        with pytest.raises(WordError):
            parse_word(bad, 2)


def test_letter_rendering():
    assert str(Letter(2, -1)) == "g2^-1"
    assert format_word(w(1, -3)) == "g1 g3^-1"


def test_reduced_word_counts():
    # 2r (2r-1)^(n-1) reduced words of length n
    for n in range(5):
        expected = 1 if n == 0 else 4 * 3 ** (n - 1)
        ws = list(reduced_words(2, n))
        assert len(ws) == len(set(ws)) == expected
        assert all(free_reduce(u) == u and len(u) == n for u in ws)


@settings(max_examples=30)
@given(st.integers(0, 2**32), st.integers(0, 30))
def test_random_reduced_word_is_reduced_with_exact_length(seed, n):
    u = random_reduced_word(random.Random(seed), n, R)
    assert len(u) == n and free_reduce(u) == u


def test_random_reduced_word_uniform_on_length_two():
    # 12 reduced length-2 words in rank 2; chi-square with 11 dof, 0.001 critical 31.26
    rng = random.Random(3)
    draws = 24000
    counts = Counter(random_reduced_word(rng, 2, 2).to_ints() for _ in range(draws))
    assert len(counts) == 12
    chi2 = sum((c - draws / 12) ** 2 / (draws / 12) for c in counts.values())
    assert chi2 < 31.26


def test_mixed_alphabets_rejected():
    with pytest.raises(WordError):
        concat(w(1, n=2), w(1, n=3))
