from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from growthlab import words as W
from growthlab.errors import DomainError
from growthlab.metric import (
    all_geodesics,
    estimate_delta,
    four_point_defect,
    gromov_product,
    lies_on_geodesic,
    quadruple_defect,
    shadow_contains,
)
from growthlab.models import parse_model


def l1(p, q):
    return abs(p[0] - q[0]) + abs(p[1] - q[1])


free_word = st.lists(st.sampled_from([1, -1, 2, -2]), max_size=7).map(W.reduce_word)
grid_pt = st.tuples(st.integers(-6, 6), st.integers(-6, 6))


def test_gromov_product_examples(f2, z2):
    assert gromov_product(f2, W.parse_word("ab"), W.parse_word("ac"), ()) == 1
    x = W.parse_word("abA")
    assert gromov_product(f2, x, x, x) == 0
    assert gromov_product(z2, (4, 0), (0, 4), (0, 0)) == 0
    # direct arithmetic: d(x,y) = 8 so (8 + ... ) cancels exactly
    assert gromov_product(z2, (4, 0), (0, 4), (0, 0)) == Fraction(l1((4, 0), (0, 0)) + l1((0, 4), (0, 0)) - 8, 2)


@given(free_word, free_word, free_word)
def test_gromov_symmetry_and_bounds_tree(x, y, z):
    f2 = parse_model("free:2")
    g = gromov_product(f2, x, y, z)
    assert g == gromov_product(f2, y, x, z)
    assert 0 <= g <= min(f2.distance(x, z), f2.distance(y, z))
    # on a tree, (x|y)_o is the common prefix length
    assert gromov_product(f2, x, y, ()) == W.common_prefix_length(x, y)


@given(grid_pt, grid_pt, grid_pt)
def test_gromov_symmetry_and_bounds_grid(x, y, z):
    z2 = parse_model("abelian:2")
    g = gromov_product(z2, x, y, z)
    assert g == gromov_product(z2, y, x, z)
    assert 0 <= g <= min(l1(x, z), l1(y, z))
    assert 2 * g == l1(x, z) + l1(y, z) - l1(x, y)


@given(free_word, free_word, free_word, free_word)
def test_tree_defect_zero(x, y, z, t):
    f2 = parse_model("free:2")
    assert four_point_defect(f2, x, y, z, t) == 0
    assert quadruple_defect(f2, (x, y, z, t)) == 0


def test_degenerate_quadruple(z2):
    assert four_point_defect(z2, (1, 2), (3, -1), (1, 2), (0, 0)) == 0


@pytest.mark.parametrize("n", range(2, 9))
def test_grid_corner_defect_linear(z2, n):
    x, y, z, t = (0, 0), (n, 0), (n, n), (0, n)
    # hand evaluation with l1 distances: (x|y)_t = n, (y|z)_t = n, (x|z)_t = 0
    xy = Fraction(l1(x, t) + l1(y, t) - l1(x, y), 2)
    yz = Fraction(l1(y, t) + l1(z, t) - l1(y, z), 2)
    xz = Fraction(l1(x, t) + l1(z, t) - l1(x, z), 2)
    assert four_point_defect(z2, x, y, z, t) == min(xy, yz) - xz == n


def test_estimate_delta(f2, z2, lamplighter):
    assert estimate_delta(f2, 5, 500, seed=3).lower_bound == 0
    assert estimate_delta(z2, 12, 4000, seed=1).lower_bound >= 2
    a = estimate_delta(z2, 6, 300, seed=11)
    assert a == estimate_delta(z2, 6, 300, seed=11)
    ll = [estimate_delta(lamplighter, 8, 10_000, seed=s).lower_bound for s in (1, 2)]
    assert all(v > 0 for v in ll)
    with pytest.raises(DomainError):
        estimate_delta(f2, 3, 0)


def test_shadow_examples(f2, z2):
    y = W.parse_word("abab")
    assert shadow_contains(f2, (), W.parse_word("ab"), 0, y)
    assert not shadow_contains(f2, (), W.parse_word("aB"), 0, y)
    assert shadow_contains(z2, (0, 0), (0, 0), 0, (5, -2))
    assert shadow_contains(z2, (0, 0), (1, 2), 0, (3, 3))
    assert lies_on_geodesic(z2, (0, 0), (1, 2), (3, 3))


@given(free_word, free_word)
def test_tree_shadow_is_prefix(x, y):
    f2 = parse_model("free:2")
    assert shadow_contains(f2, (), x, 0, y) == (y[: len(x)] == x)


@pytest.mark.parametrize("r", [0, 1, 2])
def test_shadow_vs_all_geodesics(z2, r):
    # brute force over every geodesic on the grid ball of radius 5 (61 vertices)
    o = (0, 0)
    ball = z2.ball(5)
    centers = [(1, 2), (2, -1), (0, 3), (-2, -2)]
    for c in centers:
        near = {p for p in ball if l1(p, c) <= r}
        for y in ball:
            brute = any(any(v in near for v in path) for path in all_geodesics(z2, o, y))
            assert shadow_contains(z2, o, c, r, y) == brute
