"""Group models and the spec strings that name them on the command line."""

from __future__ import annotations

import difflib

from ..errors import UsageError
from .abelian import FreeAbelian
from .base import DEFAULT_MAX_VERTICES, CayleyModel, GraphModel
from .cosets import CosetGraph, coset_graph
from .free import FreeGroup
from .horoball import (
    CombinatorialHoroball,
    HoroconePoint,
    horocone_distance,
    horocone_orbit_weight,
)
from .lamplighter import Lamplighter, LamplighterElement, lamplighter_length
from .presentation import FinitePresentationBall, parse_rules
from .subgroups import (
    FreeQuotientSubgroup,
    KernelSubgroup,
    StallingsAutomaton,
    commutator_subgroup,
    parse_subgroup,
    stallings_automaton,
)

MODEL_FORMS = (
    "free:<rank>",
    "abelian:<dim>",
    "lamplighter",
    "horoball:<base>,depth=<n>",
    "fp:<rank>:<lhs>><rhs>;...",
)

__all__ = [
    "CayleyModel",
    "CombinatorialHoroball",
    "CosetGraph",
    "FinitePresentationBall",
    "FreeAbelian",
    "FreeGroup",
    "FreeQuotientSubgroup",
    "GraphModel",
    "HoroconePoint",
    "KernelSubgroup",
    "Lamplighter",
    "LamplighterElement",
    "StallingsAutomaton",
    "commutator_subgroup",
    "coset_graph",
    "horocone_distance",
    "horocone_orbit_weight",
    "lamplighter_length",
    "parse_compact_set",
    "parse_model",
    "parse_subgroup",
    "stallings_automaton",
]


def _int(text: str, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise UsageError(f"{what} must be an integer, got {text!r}") from None


def parse_model(spec: str, max_vertices: int = DEFAULT_MAX_VERTICES) -> GraphModel:
    """Build a model from ``free:2``, ``lamplighter``, ``horoball:free:1,depth=8``..."""
    s = spec.strip()
    head, _, rest = s.partition(":")
    if head == "free":
        return FreeGroup(_int(rest, "free group rank"), max_vertices)
    if head == "abelian":
        return FreeAbelian(_int(rest, "abelian rank"), max_vertices)
    if s == "lamplighter":
        return Lamplighter(max_vertices)
    if head == "horoball":
        base_spec, _, opts = rest.rpartition(",")
        if not base_spec or not opts.startswith("depth="):
            raise UsageError(f"horoball spec must look like horoball:<base>,depth=<n>, got {spec!r}")
        base = parse_model(base_spec, max_vertices)
        if not isinstance(base, CayleyModel):
            raise UsageError("horoball base must be a Cayley graph model")
        return CombinatorialHoroball(base, _int(opts[len("depth="):], "depth"), max_vertices)
    if head == "fp":
        rank_text, _, rules = rest.partition(":")
        rank = _int(rank_text, "presentation rank")
        return FinitePresentationBall(
            rank, parse_rules(rules.replace(";", ","), rank), max_vertices=max_vertices, label=s
        )
    heads = ["free:2", "abelian:2", "lamplighter", "horoball:free:1,depth=8", "fp:2:"]
    raise UsageError(
        f"unknown model spec {spec!r}; accepted forms: {', '.join(MODEL_FORMS)}",
        difflib.get_close_matches(s, heads, n=3, cutoff=0.4),
    )


def parse_compact_set(spec: str, model: GraphModel) -> list:
    """``ball:r`` (ball of radius r around the basepoint) or ``point`` / ``o``.

    For horoball models ``ring:r`` is the depth-0 part of the ball of radius r.
    """
    s = spec.strip()
    if s in ("o", "point", "ball:0"):
        return [model.basepoint]
    kind, _, arg = s.partition(":")
    if kind == "ball":
        return model.ball(_int(arg, "ball radius"))
    if kind == "ring":
        if not isinstance(model, CombinatorialHoroball):
            raise UsageError("ring:<r> only applies to horoball models")
        return [p for p in model.ball(_int(arg, "ring radius")) if p[1] == 0]
    raise UsageError(
        f"unknown compact set {spec!r}; use ball:<r>, ring:<r> or o",
        difflib.get_close_matches(s, ["ball:1", "ball:2", "ring:1", "o"], n=2, cutoff=0.3),
    )
