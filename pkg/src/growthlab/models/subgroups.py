"""Subgroups of free groups and their right coset actions.

Every subgroup type exposes the same small coset interface used by
:class:`~growthlab.models.cosets.CosetGraph`:

``base_coset()``          the coset of the identity,
``coset_act(c, x)``       the coset c.x for a signed letter x,
``coset_of(word)``        the coset of an arbitrary reduced word,
``contains(word)``        subgroup membership.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .. import words as W
from ..errors import UnsupportedError, UsageError


class _UnionFind:
    def __init__(self):
        self.parent: list[int] = []

    def add(self) -> int:
        self.parent.append(len(self.parent))
        return len(self.parent) - 1

    def find(self, v: int) -> int:
        p = self.parent
        while p[v] != v:
            p[v] = p[p[v]]
            v = p[v]
        return v


@dataclass
class StallingsAutomaton:
    """Folded labelled graph of a finitely generated subgroup of F_rank.

    ``edges[v][x] = w`` means an x-labelled edge v -> w (and the x^-1 edge
    w -> v is stored too).  Vertex 0 is the basepoint.
    """

    rank: int
    generators: list
    edges: list = field(default_factory=list)

    @property
    def n_vertices(self) -> int:
        return len(self.edges)

    def read(self, w):
        """Follow w from the basepoint as far as possible: (vertex, unread suffix)."""
        v = 0
        for i, x in enumerate(w):
            nxt = self.edges[v].get(x)
            if nxt is None:
                return v, tuple(w[i:])
            v = nxt
        return v, ()

    def contains(self, w) -> bool:
        v, rest = self.read(W.reduce_word(w))
        return v == 0 and not rest

    def is_deterministic(self) -> bool:
        # dict keys make out-labels unique; check the inverse edges agree
        for v, out in enumerate(self.edges):
            for x, w in out.items():
                if self.edges[w].get(-x) != v:
                    return False
        return True

    def is_complete(self) -> bool:
        return all(len(out) == 2 * self.rank for out in self.edges)

    def index(self) -> int | None:
        """Index of the subgroup when finite (complete automaton), else None."""
        return self.n_vertices if self.is_complete() else None

    # -- coset interface -------------------------------------------------
    # a coset is (v, u): vertex v of the core reached by reading a
    # representative, then u, the reduced remainder, walking into the tree
    # hanging off v
    def base_coset(self):
        return (0, ())

    def coset_act(self, c, x):
        v, u = c
        if u:
            if u[-1] == -x:
                return (v, u[:-1])
            return (v, u + (x,))
        nxt = self.edges[v].get(x)
        if nxt is not None:
            return (nxt, ())
        return (v, (x,))

    def coset_of(self, w):
        return self.read(W.reduce_word(w))

    def is_trivial(self) -> bool:
        return self.n_vertices == 1 and not self.edges[0]

    def describe(self) -> str:
        return ", ".join(W.format_word(g) for g in self.generators) or "trivial"


def stallings_automaton(gens, rank: int) -> StallingsAutomaton:
    """Build the petal graph of ``gens`` and fold it down to the core graph
    (the basepoint is kept even when it has degree 1)."""
    uf = _UnionFind()
    base = uf.add()
    # edges stored with positive labels only: (v, x, w) means v --x--> w
    edges: set[tuple[int, int, int]] = set()
    for g in gens:
        g = W.reduce_word(g)
        if any(abs(x) > rank or x == 0 for x in g):
            raise UsageError(f"generator {W.format_word(g)} uses letters beyond rank {rank}")
        v = base
        for i, x in enumerate(g):
            w = base if i == len(g) - 1 else uf.add()
            edges.add((v, x, w) if x > 0 else (w, -x, v))
            v = w

    # fold until every (vertex, signed label) has a single target
    while True:
        edges = {(uf.find(v), x, uf.find(w)) for v, x, w in edges}
        seen: dict[tuple[int, int], int] = {}
        merged = False
        for v, x, w in sorted(edges):
            for key, tgt in (((v, x), w), ((w, -x), v)):
                prev = seen.get(key)
                if prev is None:
                    seen[key] = tgt
                elif uf.find(prev) != uf.find(tgt):
                    a, b = sorted((uf.find(prev), uf.find(tgt)))
                    uf.parent[b] = a  # base has the smallest id, so it survives
                    merged = True
        if not merged:
            break

    out: dict[int, dict[int, int]] = {uf.find(base): {}}
    for v, x, w in edges:
        out.setdefault(v, {})[x] = w
        out.setdefault(w, {})[-x] = v

    # BFS renumbering from the basepoint
    root = uf.find(base)
    order, index = [root], {root: 0}
    for v in order:
        for x in W.letters(rank):
            w = out[v].get(x)
            if w is not None and w not in index:
                index[w] = len(order)
                order.append(w)
    table = [{x: index[w] for x, w in out[v].items()} for v in order]
    aut = _trim(StallingsAutomaton(rank, [W.reduce_word(g) for g in gens], table))
    if not aut.is_deterministic():
        raise AssertionError("folding produced a non-deterministic automaton")
    return aut


def _trim(aut: StallingsAutomaton) -> StallingsAutomaton:
    """Remove hanging non-base vertices of degree 1 (core graph)."""
    edges = [dict(e) for e in aut.edges]
    alive = [True] * len(edges)
    changed = True
    while changed:
        changed = False
        for v in range(1, len(edges)):
            if alive[v] and len(edges[v]) == 1:
                (x, w), = edges[v].items()
                del edges[w][-x]
                edges[v] = {}
                alive[v] = False
                changed = True
    keep = [v for v in range(len(edges)) if alive[v]]
    renum = {v: i for i, v in enumerate(keep)}
    new_edges = [{x: renum[w] for x, w in edges[v].items()} for v in keep]
    return StallingsAutomaton(aut.rank, aut.generators, new_edges)


@dataclass
class KernelSubgroup:
    """Kernel of a homomorphism F_rank -> Z^m x Z/n_1 x ... (abelian target).

    ``images[i]`` is the image of generator i+1; ``moduli[j] == 0`` means a Z
    factor.  Cosets are the image vectors themselves.
    """

    rank: int
    images: list
    moduli: tuple
    name: str = "kernel"

    def __post_init__(self):
        if len(self.images) != self.rank:
            raise UsageError(f"need {self.rank} generator images, got {len(self.images)}")
        dim = len(self.moduli)
        for img in self.images:
            if len(img) != dim:
                raise UsageError("every image must have one coordinate per factor")

    def _norm(self, v):
        return tuple(a % m if m else a for a, m in zip(v, self.moduli))

    def base_coset(self):
        return (0,) * len(self.moduli)

    def coset_act(self, c, x):
        img = self.images[abs(x) - 1]
        sgn = 1 if x > 0 else -1
        return self._norm(tuple(a + sgn * b for a, b in zip(c, img)))

    def coset_of(self, w):
        c = self.base_coset()
        for x in w:
            c = self.coset_act(c, x)
        return c

    def contains(self, w) -> bool:
        return self.coset_of(w) == self.base_coset()

    def index(self) -> int | None:
        if any(m == 0 for m in self.moduli):
            # infinite unless every image has zero Z-part
            if all(img[j] == 0 for img in self.images for j, m in enumerate(self.moduli) if m == 0):
                pass
            else:
                return None
        size = 1
        seen = {self.base_coset()}
        todo = [self.base_coset()]
        while todo:
            c = todo.pop()
            for x in W.letters(self.rank):
                d = self.coset_act(c, x)
                if d not in seen:
                    seen.add(d)
                    todo.append(d)
        size = len(seen)
        return size

    def is_trivial(self) -> bool:
        return False

    def describe(self) -> str:
        return self.name


@dataclass
class FreeQuotientSubgroup:
    """Normal closure of a set of basis letters: F_rank -> F(remaining letters).

    Cosets are reduced words in the surviving letters.
    """

    rank: int
    killed: frozenset

    def base_coset(self):
        return ()

    def coset_act(self, c, x):
        if abs(x) in self.killed:
            return c
        return W.multiply(c, (x,))

    def coset_of(self, w):
        c = ()
        for x in w:
            c = self.coset_act(c, x)
        return c

    def contains(self, w) -> bool:
        return self.coset_of(w) == ()

    def index(self):
        return 1 if len(self.killed) == self.rank else None

    def is_trivial(self) -> bool:
        return not self.killed

    def describe(self) -> str:
        return "normal:" + "".join(W.letter_name(x) for x in sorted(self.killed))


def commutator_subgroup(rank: int) -> KernelSubgroup:
    images = [tuple(1 if j == i else 0 for j in range(rank)) for i in range(rank)]
    return KernelSubgroup(rank, images, (0,) * rank, name="commutator")


SUBGROUP_KEYWORDS = ("trivial", "whole", "commutator", "normal:<letters>",
                     "kernel:<a=..;b=..;mod=..>", "<comma-separated generators>")


def parse_subgroup(text: str, rank: int):
    """Parse a subgroup spec: ``trivial``, ``whole``, ``commutator``,
    ``normal:a``, ``kernel:a=1;b=0;mod=2`` or a generator list ``"a, bab^-1"``."""
    s = text.strip().strip('"').strip("'")
    if s.startswith("subgroup:"):
        s = s[len("subgroup:"):].strip().strip('"').strip("'")
    if s in ("trivial", "1", ""):
        return stallings_automaton([], rank)
    if s == "whole":
        return stallings_automaton([(i,) for i in range(1, rank + 1)], rank)
    if s == "commutator":
        return commutator_subgroup(rank)
    if s.startswith("normal:"):
        killed = frozenset(abs(x) for x in W.parse_word(s[len("normal:"):], rank))
        if not killed:
            raise UsageError("normal:<letters> needs at least one basis letter")
        return FreeQuotientSubgroup(rank, killed)
    if s.startswith("kernel:"):
        return _parse_kernel(s[len("kernel:"):], rank)
    try:
        gens = [W.parse_word(part, rank) for part in s.split(",")]
    except UsageError as exc:
        raise UsageError(f"unknown subgroup spec {text!r}: {exc}", SUBGROUP_KEYWORDS) from None
    return stallings_automaton(gens, rank)


def _parse_kernel(body: str, rank: int) -> KernelSubgroup:
    fields = {}
    for part in body.split(";"):
        if not part.strip():
            continue
        if "=" not in part:
            raise UsageError(f"kernel field {part!r} must be key=values")
        k, v = part.split("=", 1)
        fields[k.strip()] = [int(t) for t in v.split(",") if t.strip()]
    moduli = tuple(fields.pop("mod", []))
    images = []
    for i in range(1, rank + 1):
        name = W.letter_name(i)
        if name not in fields:
            raise UsageError(f"kernel spec is missing the image of {name}")
        images.append(tuple(fields.pop(name)))
    if fields:
        raise UsageError(f"unknown kernel fields {sorted(fields)}")
    if not moduli:
        moduli = (0,) * len(images[0])
    return KernelSubgroup(rank, images, moduli, name="kernel:" + body)


def require_free_base(model) -> int:
    from .free import FreeGroup

    if not isinstance(model, FreeGroup):
        raise UnsupportedError(
            f"subgroups and coset graphs are only supported over free groups, not {model.spec()}"
        )
    return model.rank
