import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from growthlab.errors import DomainError, UsageError
from growthlab.growth import (
    CONVERGING,
    DIVERGING,
    abelian_sphere_count,
    critical_exponent_scan,
    estimate_growth,
    patterson_weight,
    poincare_horocone,
    poincare_partial,
    sequence_counts,
    sphere_counts,
    zeta_V_closed_form,
    zeta_V_singularity,
)
from growthlab.models import parse_model

LN3 = math.log(3)


def test_free_sphere_counts(f2):
    assert sphere_counts(f2, 4).counts == [1, 4, 12, 36, 108]
    c = sphere_counts(f2, 12)
    # regular tree recurrence, independent of the model's closed form
    want = [1, 4]
    while len(want) < 13:
        want.append(3 * want[-1])
    assert c.counts == want
    assert c.balls[-1] == sum(want)


def test_free_growth_window(f2):
    est = estimate_growth(sphere_counts(f2, 12), (6, 12))
    assert est.exponent == pytest.approx(LN3, abs=1e-6)
    assert est.base == pytest.approx(math.exp(est.exponent), rel=1e-15)
    z = estimate_growth(sphere_counts(parse_model("free:1"), 20), (10, 20))
    assert z.exponent == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(UsageError):
        estimate_growth(sphere_counts(f2, 5), (3, 4))


@given(st.integers(2, 9), st.integers(1, 7), st.integers(12, 30))
def test_geometric_counts_recovered(b, c, R):
    counts = sequence_counts([1] + [c * b ** (n - 1) for n in range(1, R + 1)])
    for method in ("regression", "log-ratio"):
        est = estimate_growth(counts, (R // 2, R), method=method)
        assert abs(est.exponent - math.log(b)) <= 1e-9


def test_free_poincare_values(f2):
    c = sphere_counts(f2, 60)
    ev = poincare_partial(c, LN3 + 0.1, 60)
    # finite geometric sum, evaluated independently
    r = math.exp(-0.1)
    exact = 1 + (4 / 3) * r * (1 - r**60) / (1 - r)
    assert ev.total == pytest.approx(exact, rel=1e-13)
    assert ev.verdict == CONVERGING
    limit = 1 + (4 / 3) * r / (1 - r)
    assert limit == pytest.approx(13.678, abs=5e-4)
    div = poincare_partial(c, LN3)
    inc = np.diff(div.partial_sums)
    assert np.allclose(inc, 4 / 3, rtol=1e-12)
    assert div.verdict == DIVERGING


F2_COUNTS = sphere_counts(parse_model("free:2"), 25)


@given(st.floats(0.2, 2.0), st.floats(0.01, 0.5))
def test_poincare_monotone(s, ds):
    c = F2_COUNTS
    a = poincare_partial(c, s)
    b = poincare_partial(c, s + ds)
    assert all(x <= y for x, y in zip(a.partial_sums, a.partial_sums[1:]))
    # R = 0 holds only the identity term, equal for every s
    assert all(y < x for x, y in zip(a.partial_sums[1:], b.partial_sums[1:]))


def test_horocone_flip_d1():
    evs = [poincare_horocone(abelian_sphere_count(1), s, 4000) for s in np.arange(0.1, 1.6001, 0.05)]
    scan = critical_exponent_scan(evs)
    assert 0.4 < scan["last_diverging"] < scan["first_converging"] < 0.6


def test_abelian_sphere_closed_form(z2):
    f = abelian_sphere_count(2)
    assert [f(k) for k in range(8)] == [len(z2.sphere(k)) for k in range(8)]


def test_patterson_constant_for_divergent(f2):
    w = patterson_weight(sphere_counts(f2, 20), LN3)
    assert w.constant and w(17.0) == 1.0


def test_patterson_forces_divergence():
    R = 400
    counts = sequence_counts([1] + [round(math.exp(n) / n**2) for n in range(1, R + 1)])
    plain = poincare_partial(counts, 1.0)
    assert plain.verdict != DIVERGING and plain.total < 3
    w = patterson_weight(counts, 1.0)
    assert not w.constant and all(s > 0 for s in w.slopes)
    assert w.check_slowly_increasing()
    ev = poincare_partial(counts, 1.0, weight=w)
    assert ev.partial_sums[-1] > 1e3
    assert all(x <= y for x, y in zip(ev.partial_sums, ev.partial_sums[1:]))
    with pytest.raises(DomainError):
        patterson_weight(counts, 0.5)


@given(st.floats(0.5, 3.0), st.integers(60, 250))
def test_patterson_slowly_increasing(h, R):
    counts = sequence_counts([1] + [max(1, round(math.exp(h * n) / n**2)) for n in range(1, R + 1)])
    w = patterson_weight(counts, h)
    assert w.check_slowly_increasing()
    # the schedule decreases toward zero
    assert all(a >= b for a, b in zip(w.slopes, w.slopes[1:]))


def test_zeta_closed_form_and_root():
    cs = zeta_V_closed_form(10)
    assert cs[0] == 1 and cs[1] == 1
    assert all(isinstance(c, Fraction) for c in cs)
    z = zeta_V_singularity()
    assert 1 - z * z - z**3 == pytest.approx(0.0, abs=1e-14)
    plastic = 1 / z
    assert plastic**3 - plastic - 1 == pytest.approx(0.0, abs=1e-12)
