from hypothesis import given, strategies as st

from growthlab import words as W

letter = st.sampled_from([1, -1, 2, -2, 3, -3])
raw = st.lists(letter, max_size=12)


def test_free_reduction_examples():
    ab, Bc = W.parse_word("ab"), W.parse_word("b^-1c")
    assert W.multiply(ab, Bc) == W.parse_word("ac")
    w = W.parse_word("abA")
    assert W.multiply(w, W.invert(w)) == W.IDENTITY
    # a b a^-1 . a b, reduced by hand: a b b
    assert W.multiply(W.parse_word("aba^-1"), ab) == (1, 2, 2)


def test_parse_forms_agree():
    assert W.parse_word("bab^-1") == W.parse_word("baB") == (2, 1, -2)
    assert W.parse_word("a^3") == (1, 1, 1)
    assert W.parse_word("1") == ()
    assert W.format_word((1, -2)) == "aB"


@given(raw, raw)
def test_multiply_matches_naive_reduction(x, y):
    a, b = W.reduce_word(x), W.reduce_word(y)
    assert W.multiply(a, b) == W.reduce_word(a + b)
    assert W.is_reduced(W.multiply(a, b))


@given(raw, raw, raw)
def test_associative(x, y, z):
    a, b, c = (W.reduce_word(t) for t in (x, y, z))
    assert W.multiply(W.multiply(a, b), c) == W.multiply(a, W.multiply(b, c))


@given(raw)
def test_inverse(x):
    a = W.reduce_word(x)
    assert W.multiply(a, W.invert(a)) == ()
    assert W.multiply(W.invert(a), a) == ()


def test_reduced_words_counts():
    for n in range(6):
        ws = list(W.reduced_words(2, n))
        assert len(ws) == (1 if n == 0 else 4 * 3 ** (n - 1))
        assert len(set(ws)) == len(ws)
        assert all(W.is_reduced(w) and len(w) == n for w in ws)
