import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from growthlab import words as W
from growthlab.boundary import (
    ConformalDensity,
    Cylinder,
    FlowVector,
    TestFunction as OrbitTest,
    _foot_weight,
    act,
    beta_cocycle,
    birkhoff_integral,
    bm_band_mass,
    bm_band_monte_carlo,
    busemann,
    cylinder_measure,
    first_return_experiment,
    flow,
    flow_time_of,
    gromov_boundary,
    gromov_boundary_at,
    hopf_ratio_experiment,
    kappa,
    measure_at,
    parse_test_function,
    periodic_point,
    project,
    random_flow_vector,
    random_point,
    same_point,
    sample_bm_pair,
    shadow_lemma_check,
    shadow_measure,
    translate,
    visual_distance,
)
from growthlab.errors import DomainError, NeedsMorePrefix, UsageError
from growthlab.models import parse_subgroup

D2 = ConformalDensity(2)
Q = 3

word = st.lists(st.sampled_from([1, -1, 2, -2]), max_size=6).map(W.reduce_word)
nonempty = st.lists(st.sampled_from([1, -1, 2, -2]), min_size=1, max_size=8).map(W.reduce_word).filter(bool)
seeds = st.integers(0, 2**31 - 1)


def dist(x, y):
    return len(W.multiply(W.invert(tuple(x)), tuple(y)))


def test_cylinder_examples():
    assert cylinder_measure(D2, (1,)) == Fraction(1, 4)
    assert cylinder_measure(D2, (1, 2)) == Fraction(1, 12)
    # equivariance for gamma = a, w = b: nu_{a o}(a [b]) = nu_o([b])
    assert measure_at(D2, (1,), (1, 2)) == cylinder_measure(D2, (2,))
    with pytest.raises(DomainError):
        Cylinder(())


@pytest.mark.parametrize("rank", [2, 3])
def test_normalization(rank):
    d = ConformalDensity(rank)
    for n in range(1, 7):
        assert sum(cylinder_measure(d, w) for w in W.reduced_words(rank, n)) == 1


def _translated_measure(x, w):
    # nu_x([w]) = nu_o(x^-1 [w]), refining [w] until each piece maps to a cylinder
    depth = max(len(w), len(x) + 1)
    total = Fraction(0)
    for u in W.reduced_words(2, depth):
        if u[: len(w)] == w:
            total += cylinder_measure(D2, W.multiply(W.invert(x), u))
    return total


BALL3 = [w for n in range(4) for w in W.reduced_words(2, n)]


@pytest.mark.parametrize("x", BALL3)
def test_conformality_short_cylinders(x):
    for n in range(1, 5):
        for w in W.reduced_words(2, n):
            got = measure_at(D2, x, w)
            assert got == _translated_measure(x, w)
            c = W.common_prefix_length(x, w)
            if c < len(w):
                # Busemann value is constant on [w]
                assert got == cylinder_measure(D2, w) * Fraction(Q) ** (2 * c - len(x))


@settings(max_examples=200)
@given(st.sampled_from(BALL3), nonempty)
def test_conformality_up_to_8(x, w):
    got = measure_at(D2, x, w)
    c = W.common_prefix_length(x, w)
    if c < len(w):
        assert got == cylinder_measure(D2, w) * Fraction(Q) ** (2 * c - len(x))
    else:
        assert got == _translated_measure(x, w)


@settings(max_examples=100)
@given(word, seeds, seeds)
def test_bm_weight_invariance(g, s1, s2):
    eta, xi = random_point(2, s1), random_point(2, s2)
    if same_point(eta, xi):
        return
    c = gromov_boundary(eta, xi)
    assert gromov_boundary_at(translate(g, eta), translate(g, xi), g) == c


def test_visual_distance():
    a, B = periodic_point(2, (1,)), periodic_point(2, (-2,))
    assert visual_distance(a, B) == 1.0
    x = random_point(2, 1, prefix=(1, 2, 1))
    y = random_point(2, 2, prefix=(1, 2, 2))
    assert visual_distance(x, y, a0=0.7) == pytest.approx(math.exp(-2 * 0.7))
    with pytest.raises(NeedsMorePrefix):
        gromov_boundary(periodic_point(2, (1,)), periodic_point(2, (1,)), max_depth=64)


@given(seeds, seeds, seeds)
def test_ultrametric(s1, s2, s3):
    x, y, z = (random_point(2, s) for s in (s1, s2, s3))
    if same_point(x, y) or same_point(y, z) or same_point(x, z):
        return
    assert visual_distance(x, z) <= max(visual_distance(x, y), visual_distance(y, z))


def test_busemann_examples():
    a_inf, a_minf = periodic_point(2, (1,)), periodic_point(2, (-1,))
    assert busemann(a_inf, (-1,), ()) == 1
    assert beta_cocycle((1,), a_inf) == 1
    assert kappa((1,), a_minf, a_inf) == 1


@settings(max_examples=150)
@given(word, word, seeds)
def test_cocycle(g1, g2, s):
    xi = random_point(2, s)
    lhs = beta_cocycle(W.multiply(g2, g1), xi)
    assert lhs == beta_cocycle(g2, translate(g1, xi)) + beta_cocycle(g1, xi)


def _same_vector(v, w):
    return same_point(v.eta, w.eta) and same_point(v.xi, w.xi) and v.t == w.t


@settings(max_examples=150)
@given(word, word, seeds)
def test_group_law_and_commutation(g1, g2, s):
    v = random_flow_vector(2, s)
    assert _same_vector(act(g1, act(g2, v)), act(W.multiply(g1, g2), v))
    t = Fraction(s % 7, 3)
    assert _same_vector(act(g1, flow(v, t)), flow(act(g1, v), t))


@settings(max_examples=150)
@given(seeds, st.fractions(-12, 12, max_denominator=8))
def test_distance_relation(s, t):
    v = random_flow_vector(2, s, t=t)
    c = gromov_boundary(v.eta, v.xi)
    assert project(v).distance_to_origin() == c + abs(t)


@settings(max_examples=100)
@given(seeds, st.integers(-10, 10), st.integers(-10, 10))
def test_projection_traces_geodesic(s, a, b):
    v = random_flow_vector(2, s)
    p, q = project(flow(v, a)), project(flow(v, b))
    assert dist(p.base, q.base) == abs(a - b)
    # time normalization (1/2)[b_xi(o, x) - b_eta(o, x)] = t at integer times
    assert flow_time_of(v, p.base) == v.t + a


def test_projection_example():
    eta = random_point(2, 3, prefix=(-2,))
    xi = random_point(2, 4, prefix=(1,))
    v = FlowVector(eta, xi, 0)
    assert project(v).base == ()
    assert project(flow(v, Fraction(5, 2))).distance_to_origin() == Fraction(5, 2)
    with pytest.raises(DomainError):
        FlowVector(periodic_point(2, (1,)), periodic_point(2, (1,)), 0)


# -- shadows ----------------------------------------------------------------------------
def _shadow_brute(x, r):
    # rays through depth |x| + r: deeper vertices are farther than r from x
    depth = len(x) + r
    if depth == 0:
        return Fraction(1)
    total = Fraction(0)
    for u in W.reduced_words(2, depth):
        if any(dist(u[:k], x) <= r for k in range(depth + 1)):
            total += cylinder_measure(D2, u)
    return total


@pytest.mark.parametrize("r", [0, 1, 2, 3])
def test_shadow_vs_bruteforce(r):
    for n in range(0, 5):
        for x in W.reduced_words(2, n):
            assert shadow_measure(D2, x, r) == _shadow_brute(x, r)


def test_shadow_lemma_check():
    rep0 = shadow_lemma_check(D2, 0, range(2, 11))
    for row in rep0.rows:
        assert row["min_ratio"] == row["max_ratio"] == "3/4"
    assert shadow_measure(D2, (), 0) == 1
    rep2 = shadow_lemma_check(D2, 2, range(2, 11))
    assert rep2.C < 20


# -- Bowen-Margulis ---------------------------------------------------------------------
def test_bm_pairs():
    distinct = 0
    for s in range(10_000):
        eta, xi, w = sample_bm_pair(D2, s, depth=4)
        if eta.letters(1) != xi.letters(1):
            distinct += 1
            assert w == 1.0
    assert abs(distinct / 10_000 - 0.75) <= 0.02


def test_bm_band():
    exact = bm_band_mass(D2, 1, 2)
    # P(c=1) = 1/4 * 2/3, P(c=2) = 1/12 * 2/3, weights 9 and 81
    assert exact == Fraction(1, 6) * 9 + Fraction(1, 18) * 81 == 6
    mean, se = bm_band_monte_carlo(D2, 1, 2, 10_000, seed=5)
    assert abs(mean - float(exact)) <= 3 * se


# -- conservativity and Hopf ratios -------------------------------------------------------
def test_first_return():
    st_all = first_return_experiment(D2, 0, 1000, 50, seed=1)
    assert st_all.fraction == 1.0
    triv = first_return_experiment(D2, 0, 200, 50, seed=1, subgroup=parse_subgroup("trivial", 2))
    assert triv.fraction == 0.0
    with pytest.raises(DomainError):
        first_return_experiment(D2, 0, 0, 50)


def _foot_brute(f, back, ahead, Dmax):
    total = 1.0 if (f.future is None or ahead in f.future) else 0.0
    for D in range(1, Dmax + 1):
        for y in W.reduced_words(2, D):
            if y[0] in (back, ahead):
                continue
            if f.future is None or -y[-1] in f.future:
                total += math.exp(-f.a * D)
    return total


@pytest.mark.parametrize("future", [None, frozenset({1}), frozenset({2, -2})])
def test_foot_weight_dp(future):
    f = OrbitTest(2.5, future)
    for back in W.letters(2):
        for ahead in W.letters(2):
            if back == ahead:
                continue
            assert _foot_weight(f, 2, back, ahead, 7) == pytest.approx(_foot_brute(f, back, ahead, 7), rel=1e-13)


@pytest.mark.parametrize("future", [None, frozenset({1})])
def test_birkhoff_vs_orbit_sum(future):
    # direct sum over group elements of f(x^-1 eta, x^-1 xi) times the time window
    f = OrbitTest(5.0, future)
    v = FlowVector(random_point(2, 11, prefix=(1,)), random_point(2, 12, prefix=(2,)), Fraction(1, 2))
    T = 2.0
    fast = birkhoff_integral(D2, f, v, T)
    t0 = float(v.t)
    slow = 0.0
    for n in range(9):
        for x in W.reduced_words(2, n):
            xe, xx = translate(W.invert(x), v.eta), translate(W.invert(x), v.xi)
            if f.future is not None and xx.letters(1)[0] not in f.future:
                continue
            D = gromov_boundary(xe, xx)
            tau = float(flow_time_of(v, x)) - t0
            lo, hi = -tau, T - tau
            # int_lo^hi (a/2) e^{-a|s|} ds
            F = lambda s: 0.5 * math.copysign(1 - math.exp(-f.a * abs(s)), s)  # noqa: E731
            slow += math.exp(-f.a * D) * (F(hi) - F(lo))
    assert fast == pytest.approx(slow, rel=1e-9)


def test_hopf_identical_and_domain():
    st_ = hopf_ratio_experiment("a=2.5", "a=2.5", [20.0, 50.0], 8, seed=3)
    assert all(r == 1.0 for row in st_.ratios for r in row)
    assert st_.dispersion == [0.0, 0.0]
    with pytest.raises(DomainError):
        parse_test_function("a=2.0", D2)
    with pytest.raises(UsageError):
        parse_test_function("b=3", D2)
