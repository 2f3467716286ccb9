"""The lamplighter group Z_2 wr Z with generators a (toggle the lamp under the
lighter) and t (move the lighter one step right).

Points are pairs ``(mask, position)``: bit ``zz(i)`` of ``mask`` is the lamp at
index i, with the zigzag code zz(i) = 2i for i >= 0 and -2i - 1 for i < 0.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import UnsupportedError
from .base import DEFAULT_MAX_VERTICES, CayleyModel


def _zz(i: int) -> int:
    return 2 * i if i >= 0 else -2 * i - 1


def _unzz(b: int) -> int:
    return b // 2 if b % 2 == 0 else -(b + 1) // 2


def lamps_to_mask(lamps) -> int:
    m = 0
    for i in lamps:
        m ^= 1 << _zz(i)
    return m


def mask_to_lamps(mask: int) -> frozenset[int]:
    out = []
    b = 0
    while mask:
        if mask & 1:
            out.append(_unzz(b))
        mask >>= 1
        b += 1
    return frozenset(out)


@dataclass(frozen=True)
class LamplighterElement:
    lamps: frozenset
    position: int = 0

    def point(self) -> tuple[int, int]:
        return lamps_to_mask(self.lamps), self.position

    @classmethod
    def from_point(cls, p) -> "LamplighterElement":
        return cls(mask_to_lamps(p[0]), p[1])


def lamplighter_length(v: LamplighterElement) -> int:
    """Word length of a pure lamp configuration (lighter back at 0).

    Shortest closed walk from 0 covering every lit index, plus one toggle per
    lit lamp.
    """
    if v.position != 0:
        raise UnsupportedError(
            "closed-form length only covers position-0 elements; use BFS lengths"
        )
    if not v.lamps:
        return 0
    hi = max(max(v.lamps), 0)
    lo = min(min(v.lamps), 0)
    return 2 * (hi - lo) + len(v.lamps)


class Lamplighter(CayleyModel):
    kind = "lamplighter"

    def __init__(self, max_vertices: int = DEFAULT_MAX_VERTICES):
        super().__init__((0, 0), max_vertices)
        self.generators = [(1, 0), (0, 1), (0, -1)]  # a, t, t^-1

    def spec(self) -> str:
        return "lamplighter"

    def neighbors(self, x):
        m, p = x
        return [(m ^ (1 << _zz(p)), p), (m, p + 1), (m, p - 1)]

    def multiply(self, x, y):
        # (v, m)(w, n) = (v + shift_m w, m + n)
        shifted = lamps_to_mask(i + x[1] for i in mask_to_lamps(y[0]))
        return x[0] ^ shifted, x[1] + y[1]

    def invert(self, x):
        # (v, m)^-1 = (shift_{-m} v, -m)
        return lamps_to_mask(i - x[1] for i in mask_to_lamps(x[0])), -x[1]

    def lamp_subgroup_sphere(self, n: int) -> list:
        """Elements of the lamp subgroup V (position 0) at distance n."""
        return [x for x in self.sphere(n) if x[1] == 0]
