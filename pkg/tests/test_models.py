import itertools
import math
from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from growthlab import words as W
from growthlab.errors import DomainError, UnsupportedError, UsageError
from growthlab.growth import sphere_counts
from growthlab.models import (
    CosetGraph,
    HoroconePoint,
    LamplighterElement,
    coset_graph,
    horocone_distance,
    horocone_orbit_weight,
    lamplighter_length,
    parse_model,
    parse_subgroup,
    stallings_automaton,
)
from growthlab.models.lamplighter import mask_to_lamps


def test_sphere_small_cases(f2, lamplighter):
    assert len(f2.sphere(2)) == 12
    assert f2.sphere(0) == [f2.basepoint]
    assert lamplighter.sphere(0) == [lamplighter.basepoint]
    assert sphere_counts(parse_model("free:1"), 3).counts == [1, 2, 2, 2]


def _lamplighter_bfs(radius):
    # independent BFS over (lamps, position) pairs, lamps as frozensets
    start = (frozenset(), 0)
    dist = {start: 0}
    queue = deque([start])
    while queue:
        lamps, pos = v = queue.popleft()
        if dist[v] == radius:
            continue
        for w in ((lamps ^ {pos}, pos), (lamps, pos + 1), (lamps, pos - 1)):
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def test_lamplighter_sphere_dual_oracle(lamplighter):
    dist = _lamplighter_bfs(3)
    want = {v for v, d in dist.items() if d == 3}
    got = {(mask_to_lamps(m), p) for m, p in lamplighter.sphere(3)}
    assert got == want


def test_lamplighter_parry_exhaustive(lamplighter):
    # every position-0 element of length <= 12: BFS distance equals the loop formula
    dist = _lamplighter_bfs(12)
    checked = 0
    for (lamps, pos), d in dist.items():
        if pos == 0:
            assert lamplighter_length(LamplighterElement(lamps)) == d
            checked += 1
    assert checked > 100
    # and every configuration with formula value <= 12 was reached
    for lo in range(-6, 1):
        for hi in range(0, 7):
            span = [i for i in range(lo, hi + 1)]
            for k in range(len(span) + 1):
                for S in itertools.combinations(span, k):
                    L = lamplighter_length(LamplighterElement(frozenset(S)))
                    if L <= 12:
                        assert dist.get((frozenset(S), 0)) == L


def test_lamplighter_length_examples():
    assert lamplighter_length(LamplighterElement(frozenset({0}))) == 1
    assert lamplighter_length(LamplighterElement(frozenset({1, -1}))) == 6
    assert lamplighter_length(LamplighterElement(frozenset())) == 0
    with pytest.raises(UnsupportedError):
        lamplighter_length(LamplighterElement(frozenset({2}), position=1))


def test_stallings_examples():
    A = stallings_automaton([W.parse_word("a")], 2)
    assert A.n_vertices == 1
    assert A.contains(W.parse_word("a^3")) and not A.contains(W.parse_word("b"))
    B = stallings_automaton([W.parse_word("a"), W.parse_word("bab^-1")], 2)
    assert not B.contains(W.parse_word("ab"))
    C = stallings_automaton([W.parse_word(t) for t in ("a^2", "b", "aba^-1")], 2)
    assert C.is_complete() and C.n_vertices == 2 and C.index() == 2
    with pytest.raises(UnsupportedError):
        coset_graph(parse_model("lamplighter"), A, 2)


def _naive_subgroup_ball(gens, length):
    # all reduced products of generators (and inverses) with reduced length <= length
    alphabet = [g for g in gens] + [W.invert(g) for g in gens]
    found = {()}
    frontier = {()}
    # products may pass through longer intermediate words; allow one generator of slack
    bound = length + max(len(g) for g in gens)
    while frontier:
        nxt = set()
        for w in frontier:
            for g in alphabet:
                u = W.multiply(w, g)
                if len(u) <= bound and u not in found:
                    found.add(u)
                    nxt.add(u)
        frontier = nxt
    return {w for w in found if len(w) <= length}


gen_word = st.lists(st.sampled_from([1, -1, 2, -2]), min_size=1, max_size=3).map(W.reduce_word).filter(bool)


@settings(max_examples=25)
@given(st.lists(gen_word, min_size=1, max_size=3))
def test_stallings_membership_vs_enumeration(gens):
    A = stallings_automaton(gens, 2)
    assert A.is_deterministic()
    naive = _naive_subgroup_ball(gens, 8)
    for n in range(9):
        for w in W.reduced_words(2, n):
            if w in naive:
                assert A.contains(w)
    # the converse only over lengths where the naive closure is exhaustive
    for n in range(6):
        for w in W.reduced_words(2, n):
            if A.contains(w):
                assert w in naive


@pytest.mark.parametrize("spec,index", [
    ("whole", 1),
    ("a^2, b, aba^-1", 2),
    ("kernel:a=1;b=1;mod=2", 2),
    ("kernel:a=1;b=0;mod=3", 3),
    ("a^2, b^2, ab", 2),
])
def test_finite_index_vertex_count(spec, index):
    sub = parse_subgroup(spec, 2)
    g = CosetGraph(sub, 2, 10)
    assert g.is_finite_complete()
    assert g.n_vertices == index


def test_coset_graph_shapes():
    whole = CosetGraph(parse_subgroup("whole", 2), 2, 5)
    assert whole.n_vertices == 1
    triv = CosetGraph(parse_subgroup("trivial", 2), 2, 4)
    assert triv.n_vertices == 1 + 4 + 12 + 36 + 108
    comm = CosetGraph(parse_subgroup("commutator", 2), 2, 6)
    # l1 ball of Z^2: 2r^2 + 2r + 1
    assert comm.n_vertices == 2 * 36 + 12 + 1
    assert comm.undirected_symmetric()
    # depth equals minimal representative length
    for i, c in enumerate(comm.cosets):
        assert comm.dist[i] == sum(abs(t) for t in c)


def test_horocone_examples(f2):
    z1 = parse_model("free:1")
    o = z1.basepoint
    assert horocone_distance(z1, HoroconePoint(o, 0.0), HoroconePoint(o, 2.5)) == pytest.approx(2.5)
    d = horocone_distance(z1, HoroconePoint((), 0.0), HoroconePoint((1,), 0.0))
    assert d == pytest.approx(math.acosh(1.5), abs=1e-12)
    assert horocone_orbit_weight(0) == 1.0
    for k in range(1, 40):
        assert horocone_orbit_weight(k) == pytest.approx(0.25 * (math.sqrt(k * k + 4) - k) ** 2, rel=1e-9)
    with pytest.raises(DomainError):
        horocone_distance(z1, HoroconePoint(o, -1.0), HoroconePoint(o, 0.0))


def test_horocone_triangle_inequality():
    z1 = parse_model("free:1")
    rng = np.random.default_rng(7)
    for _ in range(10_000):
        pts = [HoroconePoint((1,) * int(b) if b >= 0 else (-1,) * int(-b), float(h))
               for b, h in zip(rng.integers(-30, 31, 3), rng.uniform(0, 6, 3))]
        x, y, z = pts
        assert horocone_distance(z1, x, z) <= horocone_distance(z1, x, y) + horocone_distance(z1, y, z) + 1e-9


def test_bad_specs_suggest():
    with pytest.raises(UsageError) as exc:
        parse_model("fre:2")
    assert exc.value.suggestions
    with pytest.raises(UsageError):
        parse_subgroup("a, b^x", 2)
