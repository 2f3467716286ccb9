"""Boundary of the regular tree of a free group.

Everything here is exact: the Patterson-Sullivan density of F_k is the
uniform measure on infinite reduced words, Busemann functions are integers,
and the geodesic flow projects to honest tree points.  Boundary points are
lazy letter streams; random ones draw from seeded generators so experiments
are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import words as W
from .errors import DomainError, NeedsMorePrefix, ResourceExhausted, UsageError

MAX_DEPTH = 4096


# -- cylinders and the density ---------------------------------------------------
@dataclass(frozen=True)
class Cylinder:
    word: tuple

    def __post_init__(self):
        if not self.word:
            raise DomainError("cylinder word must be nonempty")
        if not W.is_reduced(self.word):
            raise DomainError(f"cylinder word {self.word!r} is not reduced")

    def contains(self, xi: "BoundaryPoint") -> bool:
        return xi.letters(len(self.word)) == self.word


@dataclass(frozen=True)
class ConformalDensity:
    rank: int = 2

    def __post_init__(self):
        if self.rank < 2:
            raise DomainError("boundary machinery needs rank >= 2")

    @property
    def q(self) -> int:
        return 2 * self.rank - 1

    @property
    def h(self) -> float:
        return math.log(self.q)


def cylinder_measure(density: ConformalDensity, w) -> Fraction:
    """nu_o([w]) = 1 / (2k (2k-1)^(|w|-1))."""
    c = Cylinder(tuple(w))
    return Fraction(1, 2 * density.rank * density.q ** (len(c.word) - 1))


def tree_busemann_cylinder(x, u) -> int:
    """b_xi(x, o) for every xi in [u], valid when |u| > |x|."""
    c = W.common_prefix_length(x, u)
    return len(x) - 2 * c


def measure_at(density: ConformalDensity, x, w) -> Fraction:
    """nu_x([w]) by exact conformality, d nu_x / d nu_o = q^(-b_xi(x, o)).

    [w] is refined to cylinders longer than x, on each of which the Busemann
    value is constant.
    """
    x = tuple(x)
    w = Cylinder(tuple(w)).word
    q = density.q
    depth = max(len(w), len(x) + 1)
    total = Fraction(0)
    for tail in _extensions(w, depth - len(w), density.rank):
        u = w + tail
        total += cylinder_measure(density, u) * Fraction(q) ** (-tree_busemann_cylinder(x, u))
    return total


def _extensions(w, extra: int, rank: int):
    if extra == 0:
        yield ()
        return
    for x in W.letters(rank):
        if x != -w[-1]:
            for rest in _extensions(w + (x,), extra - 1, rank):
                yield (x,) + rest


# -- boundary points -------------------------------------------------------------
class BoundaryPoint:
    """An infinite reduced word, materialized on demand.

    ``source(n)`` must return the first n letters; a point without a source
    is a bare prefix and asking past it raises NeedsMorePrefix.
    """

    def __init__(self, rank: int, prefix=(), source: Callable[[int], tuple] | None = None,
                 label: str = ""):
        prefix = tuple(prefix)
        self._cache = ()
        if not W.is_reduced(prefix):
            raise DomainError("boundary prefix must be reduced")
        self.rank = rank
        self._cache = prefix
        self._source = source
        self.label = label

    def letters(self, n: int) -> tuple:
        if n > len(self._cache):
            if self._source is None:
                raise NeedsMorePrefix(
                    f"boundary point known to depth {len(self._cache)}, need {n}",
                    achieved=len(self._cache),
                )
            self._cache = self._source(n)
        return self._cache[:n]

    def __repr__(self) -> str:
        return f"BoundaryPoint({W.format_word(self._cache[:12])}...{self.label})"


def random_point(rank: int, rng: np.random.Generator | int, prefix=()) -> BoundaryPoint:
    """PS-distributed continuation of ``prefix``: each next letter is uniform
    among the non-backtracking ones (the first among all 2k)."""
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    alphabet = W.letters(rank)
    state = list(prefix)

    def source(n):
        while len(state) < n:
            choices = [x for x in alphabet if not state or x != -state[-1]]
            state.append(choices[int(gen.integers(len(choices)))])
        return tuple(state)

    return BoundaryPoint(rank, prefix, source, label=" random")


def periodic_point(rank: int, period, prefix=()) -> BoundaryPoint:
    """prefix followed by period repeated forever, e.g. a^infinity."""
    period, prefix = tuple(period), tuple(prefix)
    if not period or not W.is_reduced(period + period):
        raise DomainError("period must be nonempty and cyclically reduced")
    if prefix and not W.is_reduced(prefix + period[:1]):
        raise DomainError("prefix and period must join without cancellation")

    def source(n):
        out = list(prefix)
        while len(out) < n:
            out.extend(period)
        return tuple(out[:n])

    return BoundaryPoint(rank, source(len(prefix)), source, label=" periodic")


def translate(gamma, xi: BoundaryPoint) -> BoundaryPoint:
    """gamma . xi: reduce gamma followed by xi (at most |gamma| letters cancel)."""
    gamma = tuple(gamma)

    def source(n):
        return W.multiply(gamma, xi.letters(n + len(gamma)))[:n]

    return BoundaryPoint(xi.rank, (), source, label=f" {W.format_word(gamma)}.")


def same_point(x: BoundaryPoint, y: BoundaryPoint, depth: int = 64) -> bool:
    """Agreement on the first ``depth`` letters (the best a finite test can do)."""
    return x.letters(depth) == y.letters(depth)


# -- Gromov products, visual metric, Busemann --------------------------------------
def gromov_boundary(eta: BoundaryPoint, xi: BoundaryPoint, max_depth: int = MAX_DEPTH) -> int:
    """(eta|xi)_o = length of the common prefix."""
    n = 8
    while True:
        a, b = eta.letters(n), xi.letters(n)
        c = W.common_prefix_length(a, b)
        if c < n:
            return c
        if n >= max_depth:
            raise NeedsMorePrefix(f"points agree to depth {max_depth}", achieved=max_depth)
        n = min(2 * n, max_depth)


def gromov_boundary_at(eta: BoundaryPoint, xi: BoundaryPoint, x) -> int:
    """(eta|xi)_x = distance from x to the eta-xi geodesic."""
    x = tuple(x)
    g = W.invert(x)
    return gromov_boundary(translate(g, eta), translate(g, xi))


def visual_distance(x: BoundaryPoint, y: BoundaryPoint, a0: float = 1.0,
                    max_depth: int = MAX_DEPTH) -> float:
    if a0 <= 0:
        raise DomainError("visual parameter a0 must be positive")
    return math.exp(-a0 * gromov_boundary(x, y, max_depth))


def busemann(xi: BoundaryPoint, x, y) -> int:
    """b_xi(x, y) = lim d(x, xi_n) - d(y, xi_n)."""
    x, y = tuple(x), tuple(y)
    n = max(len(x), len(y)) + 1
    ray = xi.letters(n)
    cx = W.common_prefix_length(x, ray)
    cy = W.common_prefix_length(y, ray)
    return (len(x) - 2 * cx) - (len(y) - 2 * cy)


def beta_cocycle(gamma, xi: BoundaryPoint) -> int:
    """beta(gamma, xi) = b_xi(gamma^-1 o, o)."""
    return busemann(xi, W.invert(tuple(gamma)), ())


def kappa(gamma, eta: BoundaryPoint, xi: BoundaryPoint) -> Fraction:
    return Fraction(beta_cocycle(gamma, xi) - beta_cocycle(gamma, eta), 2)


# -- Bowen-Margulis pairs ----------------------------------------------------------
def _streams(seed: int, count: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def sample_bm_pair(density: ConformalDensity, seed: int, depth: int = 16):
    """(eta, xi) ~ nu_o x nu_o and the weight e^{2h (eta|xi)_o} = q^{2 (eta|xi)_o}."""
    if depth < 1:
        raise DomainError("depth must be at least 1")
    g1, g2 = _streams(seed, 2)
    eta = random_point(density.rank, g1)
    xi = random_point(density.rank, g2)
    eta.letters(depth)
    xi.letters(depth)
    c = gromov_boundary(eta, xi)
    return eta, xi, float(density.q ** (2 * c))


def bm_band_mass(density: ConformalDensity, lo: int, hi: int) -> Fraction:
    """Exact BM mass of {lo <= (eta|xi)_o <= hi}.

    P((eta|xi) = 0) = 1 - 1/(2k) and P(= m) = (1/2k) q^{-(m-1)} (1 - 1/q).
    """
    if lo < 0 or hi < lo:
        raise DomainError("band needs 0 <= lo <= hi")
    k2, q = 2 * density.rank, density.q
    total = Fraction(0)
    for m in range(lo, hi + 1):
        p = Fraction(k2 - 1, k2) if m == 0 else Fraction(1, k2) * Fraction(1, q ** (m - 1)) * Fraction(q - 1, q)
        total += p * q ** (2 * m)
    return total


def bm_band_monte_carlo(density: ConformalDensity, lo: int, hi: int, samples: int, seed: int):
    """Monte-Carlo estimate of the band mass with its standard error."""
    vals = np.empty(samples)
    for i, s in enumerate(np.random.SeedSequence(seed).generate_state(samples)):
        eta, xi, w = sample_bm_pair(density, int(s), depth=hi + 1)
        c = gromov_boundary(eta, xi)
        vals[i] = w if lo <= c <= hi else 0.0
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(samples))


# -- geodesic flow -------------------------------------------------------------------
@dataclass(frozen=True)
class TreePoint:
    """A point of the geometric tree: ``offset`` in [0,1) along the edge base -> toward."""

    base: tuple
    toward: tuple | None = None
    offset: Fraction | float = 0

    def distance_to_origin(self):
        if not self.offset:
            return len(self.base)
        step = 1 if len(self.toward) > len(self.base) else -1
        return len(self.base) + step * self.offset


@dataclass
class FlowVector:
    eta: BoundaryPoint
    xi: BoundaryPoint
    t: Fraction | float = 0

    def __post_init__(self):
        try:
            gromov_boundary(self.eta, self.xi)
        except NeedsMorePrefix:
            raise DomainError("degenerate flow vector: past and future coincide") from None


def flow(v: FlowVector, t) -> FlowVector:
    return FlowVector(v.eta, v.xi, v.t + t)


def act(gamma, v: FlowVector) -> FlowVector:
    """gamma v = (gamma eta, gamma xi, t + kappa_gamma(eta, xi))."""
    gamma = tuple(gamma)
    return FlowVector(translate(gamma, v.eta), translate(gamma, v.xi), v.t + kappa(gamma, v.eta, v.xi))


def _geodesic_vertex(v: FlowVector, m: int) -> tuple:
    c = gromov_boundary(v.eta, v.xi)
    if m >= 0:
        return v.xi.letters(c + m)
    return v.eta.letters(c - m)


def project(v: FlowVector) -> TreePoint:
    """The point at signed distance t from the confluence, toward xi for t > 0.

    With this choice (1/2)[b_xi(o, x) - b_eta(o, x)] = t.
    """
    t = v.t
    m = math.floor(t)
    frac = t - m
    base = _geodesic_vertex(v, m)
    if not frac:
        return TreePoint(base)
    nxt = _geodesic_vertex(v, m + 1)
    if len(nxt) > len(base):
        return TreePoint(base, nxt, frac)
    # moving toward the confluence from the eta side: express from the far end
    return TreePoint(nxt, base, 1 - frac)


def flow_time_of(v: FlowVector, x) -> Fraction:
    """(1/2)[b_xi(o, x) - b_eta(o, x)] for a vertex x."""
    return Fraction(busemann(v.xi, (), x) - busemann(v.eta, (), x), 2)


def random_flow_vector(rank: int, seed: int, t=None) -> FlowVector:
    g1, g2, g3 = _streams(seed, 3)
    eta = random_point(rank, g1)
    xi = random_point(rank, g2)
    if t is None:
        t = Fraction(int(g3.integers(-8, 9)))
    return FlowVector(eta, xi, t)


def random_group_element(rank: int, rng: np.random.Generator, n: int) -> tuple:
    """Uniform element of the sphere of radius n."""
    out: list[int] = []
    alphabet = W.letters(rank)
    while len(out) < n:
        choices = [x for x in alphabet if not out or x != -out[-1]]
        out.append(choices[int(rng.integers(len(choices)))])
    return tuple(out)


# -- shadow lemma ------------------------------------------------------------------
def shadow_cylinders(x, r: int, rank: int) -> list[tuple]:
    """O_o(x, r) as a disjoint union of cylinders (empty word = whole boundary).

    A ray from o meets B(x, r) iff it passes the first vertex of [o, x]
    within r of x; off-path vertices only recede.  So on a tree the shadow
    is the single cylinder of x truncated by r letters.
    """
    x = tuple(x)
    return [x[: max(len(x) - r, 0)]]


def shadow_measure(density: ConformalDensity, x, r: int) -> Fraction:
    if r < 0:
        raise DomainError("shadow radius must be nonnegative")
    k2, q = 2 * density.rank, density.q
    cyl = shadow_cylinders(x, r, density.rank)
    if any(not u for u in cyl):
        return Fraction(1)
    # common denominator 2k q^(L-1) for the deepest cylinder
    L = max(len(u) for u in cyl)
    num = sum(q ** (L - len(u)) for u in cyl)
    return Fraction(num, k2 * q ** (L - 1))


@dataclass
class ShadowReport:
    r: int
    rows: list
    C: float
    upper_factor: float

    def to_dict(self) -> dict:
        return {"r": self.r, "empirical_C": self.C, "upper_factor": self.upper_factor,
                "rows": self.rows}


def shadow_lemma_check(density: ConformalDensity, r: int, n_range: Sequence[int],
                       max_per_sphere: int | None = None, seed: int = 0) -> ShadowReport:
    """Exact nu_o(O_o(g o, r)) q^{|g|} for g on the requested spheres.

    Every element is visited unless ``max_per_sphere`` caps it, in which case
    a seeded sample is taken.  C is the smallest constant with all ratios in
    [1/C, C q^{2r}].
    """
    q = density.q
    rng = np.random.default_rng(seed)
    rows, lo_all, hi_all = [], math.inf, 0.0
    for n in n_range:
        size = 2 * density.rank * q ** (n - 1) if n else 1
        if max_per_sphere is None or size <= max_per_sphere:
            elems = W.reduced_words(density.rank, n)
        else:
            elems = (random_group_element(density.rank, rng, n) for _ in range(max_per_sphere))
        lo, hi, count = None, None, 0
        for g in elems:
            ratio = shadow_measure(density, g, r) * q**n
            lo = ratio if lo is None or ratio < lo else lo
            hi = ratio if hi is None or ratio > hi else hi
            count += 1
        rows.append({"n": n, "elements": count, "min_ratio": str(lo), "max_ratio": str(hi),
                     "min_ratio_float": float(lo), "max_ratio_float": float(hi)})
        lo_all = min(lo_all, float(lo))
        hi_all = max(hi_all, float(hi))
    upper = float(q ** (2 * r))
    C = max(1.0, 1.0 / lo_all, hi_all / upper)
    return ShadowReport(r, rows, C, upper)


# -- conservativity and the Hopf ratio -----------------------------------------------
def _branches(rank: int, p: tuple, blocked: set, depth: int):
    """Layers of vertices at distance 1..depth from p leaving through letters not in ``blocked``."""
    layer = [(a,) for a in W.letters(rank) if a not in blocked]
    for d in range(1, depth + 1):
        yield d, [W.multiply(p, y) for y in layer]
        layer = [y + (a,) for y in layer for a in W.letters(rank) if a != -y[-1]]


@dataclass
class FirstReturnStats:
    samples: int
    returned: int
    horizon: int
    rho: int
    times: list

    @property
    def fraction(self) -> float:
        return self.returned / self.samples if self.samples else 0.0

    def to_dict(self) -> dict:
        ts = [t for t in self.times if t is not None]
        hist: dict[str, int] = {}
        for t in ts:
            hist[str(t)] = hist.get(str(t), 0) + 1
        return {"samples": self.samples, "returned": self.returned, "fraction": self.fraction,
                "horizon": self.horizon, "section_rho": self.rho,
                "mean_return_time": (float(np.mean([float(t) for t in ts])) if ts else None),
                "histogram": hist}


def _returns_at(v: FlowVector, m: int, rho: int, member) -> bool:
    """Some orbit point x = g o with g in the subgroup has foot at geodesic
    vertex m and (eta|xi)_x <= rho."""
    p = _geodesic_vertex(v, m)
    if member(p):
        return True
    if rho == 0:
        return False
    prev = _geodesic_vertex(v, m - 1)
    nxt = _geodesic_vertex(v, m + 1)
    blocked = {W.multiply(W.invert(p), prev)[0], W.multiply(W.invert(p), nxt)[0]}
    for _, layer in _branches(v.xi.rank, p, blocked, rho):
        if any(member(x) for x in layer):
            return True
    return False


def first_return_experiment(density: ConformalDensity, r: int, samples: int, horizon: int,
                            seed: int = 0, subgroup=None, eps: int = 1) -> FirstReturnStats:
    """First time s >= 1 at which phi_s v enters Gamma'.B(rho), rho = 2r + eps.

    B(rho) = {(eta, xi) : (eta|xi)_o <= rho} x [0, 1].  The orbit is tracked
    along the geodesic: phi_s v lies in g B(rho) exactly when the foot of g o
    sits at flow time in [s - 1, s] and g o is within rho of the line.
    """
    if r < 0 or horizon < 1 or samples < 1:
        raise DomainError("need r >= 0, horizon >= 1, samples >= 1")
    rho = 2 * r + eps
    member = (lambda w: True) if subgroup is None else subgroup.contains
    times = []
    returned = 0
    for s in np.random.SeedSequence(seed).generate_state(samples):
        v = random_flow_vector(density.rank, int(s), t=Fraction(0))
        hit = None
        # feet of geodesic vertices sit at integer flow times m - t
        for m in range(1, horizon + 1):
            if _returns_at(v, m, rho, member):
                hit = m
                break
        times.append(hit)
        returned += hit is not None
    return FirstReturnStats(samples, returned, horizon, rho, times)


def _theta_window(a: float, tau: float, T: float) -> float:
    """int_0^T (a/2) e^{-a |s - tau|} ds in closed form."""
    def F(x):  # antiderivative of (a/2) e^{-a|x|}
        return 0.5 * (1 - math.exp(-a * x)) if x >= 0 else -0.5 * (1 - math.exp(a * x))
    return F(T - tau) - F(-tau)


@dataclass(frozen=True)
class TestFunction:
    """f(eta, xi) = e^{-a (eta|xi)_o} 1[xi_1 in future]; ``future`` None means no constraint."""

    a: float
    future: frozenset | None = None

    def describe(self) -> str:
        fut = "" if self.future is None else ",future=" + "".join(
            W.format_word((x,)) for x in sorted(self.future))
        return f"a={self.a}{fut}"


def parse_test_function(spec, density: ConformalDensity) -> TestFunction:
    """``a=2.5`` or ``a=2.5,future=aB``; a must exceed 2h."""
    text = str(spec).strip()
    a, future = None, None
    for part in text.split(","):
        key, _, val = part.partition("=")
        key, val = key.strip(), val.strip()
        if not val:
            key, val = "a", key
        if key == "a":
            try:
                a = float(val)
            except ValueError:
                raise UsageError(f"bad test-function parameter {part!r}") from None
        elif key == "future":
            future = frozenset(W.parse_word(ch, density.rank)[0] for ch in val if not ch.isspace())
            if not future:
                raise UsageError("future letter set must be nonempty")
        else:
            raise UsageError(f"unknown test-function key {key!r}", ["a", "future"])
    if a is None:
        raise UsageError(f"test function needs a=<number>, got {spec!r}")
    if a <= 2 * density.h:
        raise DomainError(f"test-function parameter a={a} must exceed 2h = {2 * density.h:.4f}")
    return TestFunction(a, future)


def _foot_weight(f: TestFunction, rank: int, back: int, ahead: int, Dmax: int) -> float:
    """Sum of f over orbit points whose foot is a geodesic vertex p.

    ``back``/``ahead`` are the letters from p toward eta and xi.  A point
    x = p y (y leaving p off the line) sees xi first through -y_last; x = p
    sees it through ``ahead``.
    """
    def ok(letter):
        return f.future is None or letter in f.future

    alphabet = W.letters(rank)
    total = 1.0 if ok(ahead) else 0.0
    counts = {x: (0 if x in (back, ahead) else 1) for x in alphabet}
    for D in range(1, Dmax + 1):
        good = sum(c for x, c in counts.items() if ok(-x))
        total += good * math.exp(-f.a * D)
        counts = {y: sum(c for x, c in counts.items() if x != -y) for y in alphabet}
    return total


def birkhoff_integral(density: ConformalDensity, f: TestFunction, v: FlowVector, T: float,
                      tail_tol: float = 1e-13) -> float:
    """int_0^T hat f_theta(phi_s v) ds, hat f summed over the whole orbit.

    An orbit point x at distance D from the line, foot at flow time tau,
    contributes f(x^-1 eta, x^-1 xi) int_0^T theta(s - tau) ds with
    theta = (a/2) e^{-a|t|}.  Branch depth and foot range are cut where the
    geometric tails fall below ``tail_tol``.
    """
    q = density.q
    ratio = q * math.exp(-f.a)
    if ratio >= 1:
        raise DomainError("orbit sum diverges for this a")
    Dmax = max(1, math.ceil(math.log(tail_tol * (1 - ratio)) / math.log(ratio)))
    M = math.ceil(-math.log(tail_tol) / f.a) + 1
    if Dmax > 10_000 or T + 2 * M > 10**6:
        raise ResourceExhausted("orbit-sum truncation infeasible", achieved=0)
    t0 = float(v.t)
    cache: dict = {}
    total = 0.0
    for m in range(math.floor(t0 - M), math.ceil(t0 + T + M) + 1):
        p = _geodesic_vertex(v, m)
        pinv = W.invert(p)
        back = W.multiply(pinv, _geodesic_vertex(v, m - 1))[0]
        ahead = W.multiply(pinv, _geodesic_vertex(v, m + 1))[0]
        key = (back, ahead)
        if key not in cache:
            cache[key] = _foot_weight(f, density.rank, back, ahead, Dmax)
        total += cache[key] * _theta_window(f.a, m - t0, T)
    return total


@dataclass
class HopfStats:
    T_list: list
    ratios: list
    dispersion: list
    f: str
    g: str
    note: str = ("internal-consistency check: numerator and denominator come from "
                 "the same exact orbit summation")

    def to_dict(self) -> dict:
        return {"f": self.f, "g": self.g, "T": self.T_list, "dispersion": self.dispersion,
                "mean_ratio": [float(np.mean(r)) for r in self.ratios], "note": self.note}


def hopf_ratio_experiment(f_spec, g_spec, T_list: Sequence[float], samples: int, seed: int = 0,
                          rank: int = 2) -> HopfStats:
    """Ratio of Birkhoff integrals of hat f and hat g along sampled vectors.

    Each sample draws (eta, xi) from nu_o x nu_o and a uniform time in [0, 1);
    dispersion at each T is sd/mean of the ratios over samples.
    """
    density = ConformalDensity(rank)
    f = parse_test_function(f_spec, density)
    g = parse_test_function(g_spec, density)
    if samples < 2:
        raise DomainError("need at least two samples for a dispersion")
    vecs = []
    for s in np.random.SeedSequence(seed).generate_state(samples):
        gen = np.random.default_rng(int(s))
        vecs.append(random_flow_vector(rank, int(gen.integers(2**31)), t=float(gen.random())))
    ratios, disp = [], []
    for T in T_list:
        row = []
        for v in vecs:
            den = birkhoff_integral(density, g, v, T)
            if den <= 0:
                raise DomainError("g integrates to zero along a sampled orbit")
            row.append(birkhoff_integral(density, f, v, T) / den)
        ratios.append(row)
        arr = np.asarray(row)
        disp.append(float(arr.std(ddof=1) / arr.mean()))
    return HopfStats(list(T_list), ratios, disp, f.describe(), g.describe())
