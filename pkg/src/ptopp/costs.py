"""Path cost families over sorted passage-width vectors.

A path's traversed widths are kept as a fixed-length ascending vector padded
with an upper bound ``bar`` (the map diagonal).  MPW takes the negated
narrowest width, GPW a geometrically weighted sum, and both are compared
lexicographically with path length as the tie breaker.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from functools import total_ordering
from typing import Iterable, Sequence

from .errors import NonPositiveWidth, UnboundedWeight
from .geom import polyline_length

KINDS = ("shortest", "mpw", "gpw", "maxclr", "lensum")
CPW_MODES = ("relabel", "penalty")
LEN_TOL = 1e-9
DEFAULT_RATIO = 100.0
DEFAULT_Q = 3
DEFAULT_PENALTY = 1e6

__all__ = [
    "CostSpec",
    "CostValue",
    "SortedWidths",
    "apply_cpw",
    "insert_width",
    "path_cost",
    "polyline_length",
    "tradeoff_cost",
    "validate_weights",
]


@dataclass(frozen=True)
class SortedWidths:
    entries: tuple[float, ...]

    @classmethod
    def initial(cls, q: int, bar: float) -> "SortedWidths":
        return cls((float(bar),) * q)

    @property
    def q(self) -> int:
        return len(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, k: int) -> float:
        return self.entries[k]

    def insert(self, w: float) -> "SortedWidths":
        return insert_width(self, w)

    def extend(self, ws: Iterable[float]) -> "SortedWidths":
        e = list(self.entries)
        q = len(e)
        for w in ws:
            if w < e[-1]:
                bisect.insort(e, float(w))
                e.pop()
        if len(e) != q:
            raise AssertionError("sorted width vector changed length")
        return SortedWidths(tuple(e))

    def lex_ge(self, other: "SortedWidths") -> bool:
        return self.entries >= other.entries


def insert_width(sw: SortedWidths, w: float) -> SortedWidths:
    """``sorted(entries + [w])[:q]``."""
    if not math.isfinite(w):
        raise ValueError("width must be finite")
    e = list(sw.entries)
    if w >= e[-1]:
        return sw
    bisect.insort(e, float(w))
    e.pop()
    return SortedWidths(tuple(e))


@total_ordering
@dataclass(frozen=True, eq=False)
class CostValue:
    """Lexicographic (primary, len) cost; exact on primary, 1e-9 on len."""

    primary: float
    len: float

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CostValue):
            return NotImplemented
        return self.primary == other.primary and abs(self.len - other.len) <= LEN_TOL

    def __lt__(self, other: "CostValue") -> bool:
        if self.primary != other.primary:
            return self.primary < other.primary
        return self.len < other.len - LEN_TOL

    __hash__ = None  # type: ignore[assignment]

    def to_list(self) -> list[float]:
        return [self.primary, self.len]


@dataclass(frozen=True)
class CostSpec:
    kind: str = "gpw"
    q: int = DEFAULT_Q
    ratio: float = DEFAULT_RATIO
    cpw_eps: float | None = None
    cpw_mode: str = "relabel"
    penalty: float = DEFAULT_PENALTY
    lensum_weight: float = 1.0
    weights: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown cost kind {self.kind!r}")
        if self.cpw_mode not in CPW_MODES:
            raise ValueError(f"unknown cpw mode {self.cpw_mode!r}")
        if self.q < 1:
            raise ValueError("q must be at least 1")
        if self.cpw_eps is not None and self.cpw_eps <= 0:
            raise NonPositiveWidth("cpw threshold must be positive")
        object.__setattr__(self, "weights", gpw_weights(self.dim, self.ratio) if self.kind == "gpw" else (1.0,))

    @property
    def dim(self) -> int:
        """Length of the sorted width vector the cost needs."""
        if self.kind == "mpw":
            return 1
        if self.kind in ("gpw", "lensum"):
            return self.q
        return 1

    @property
    def uses_widths(self) -> bool:
        return self.kind in ("mpw", "gpw", "lensum")

    @property
    def counts_narrow(self) -> bool:
        return self.cpw_eps is not None and self.cpw_mode == "penalty"

    @property
    def relabels(self) -> bool:
        return self.cpw_eps is not None and self.cpw_mode == "relabel"

    def label(self) -> str:
        name = {"gpw": f"{self.q}-gpw"}.get(self.kind, self.kind)
        if self.cpw_eps is not None:
            name += f"+cpw({self.cpw_mode},{self.cpw_eps:g})"
        return name


def gpw_weights(q: int, ratio: float) -> tuple[float, ...]:
    """Geometric weights ``ratio**(q-1-i)``; the narrowest entry weighs most."""
    if ratio <= 0 or not math.isfinite(ratio):
        raise UnboundedWeight("ratio must be positive and finite")
    try:
        w = tuple(float(ratio) ** (q - 1 - i) for i in range(q))
    except OverflowError:
        raise UnboundedWeight(f"ratio {ratio} ** {q - 1} overflows") from None
    if not all(math.isfinite(v) for v in w):
        raise UnboundedWeight(f"ratio {ratio} ** {q - 1} overflows")
    return w


def path_cost(spec: CostSpec, sw: SortedWidths, length: float, clearance: float = math.inf,
              narrow: int = 0) -> CostValue:
    k = spec.kind
    if k == "shortest":
        primary = length + narrow * spec.penalty if spec.counts_narrow else length
    elif k == "mpw":
        primary = -sw.entries[0]
    elif k == "gpw":
        primary = -math.fsum(w * p for w, p in zip(spec.weights, sw.entries))
    elif k == "maxclr":
        primary = -clearance
    else:
        primary = length - spec.lensum_weight * math.fsum(sw.entries)
    if not math.isfinite(primary) and k != "maxclr":
        raise UnboundedWeight("cost overflowed")
    return CostValue(primary, length)


def apply_cpw(spec: CostSpec, w: float) -> float:
    if w <= 0:
        raise NonPositiveWidth(f"width {w} is not positive")
    if spec.relabels and w <= spec.cpw_eps:
        return -1.0 / w
    return w


def is_narrow(spec: CostSpec, w: float) -> bool:
    return spec.cpw_eps is not None and w <= spec.cpw_eps


def validate_weights(q: int, ratio: float, widths: Iterable[float]) -> bool:
    """Whether geometric weights of ``ratio`` make GPW order lexicographic.

    Requires ``ratio > max_gap / min_gap + q - 2`` where the gaps range over
    differences of distinct widths.
    """
    ws = sorted(set(float(w) for w in widths))
    if q <= 1 or len(ws) < 2:
        return True
    min_gap = min(b - a for a, b in zip(ws, ws[1:]))
    max_gap = ws[-1] - ws[0]
    return ratio > max_gap / min_gap + q - 2


def valid_ratio(q: int, widths: Iterable[float]) -> float:
    """Smallest integer ratio that passes ``validate_weights`` (at least 2)."""
    ws = sorted(set(float(w) for w in widths))
    if len(ws) < 2:
        return 2.0
    min_gap = min(b - a for a, b in zip(ws, ws[1:]))
    bound = (ws[-1] - ws[0]) / min_gap + q - 2
    return float(max(2, math.floor(bound) + 1))


def tradeoff_cost(length: float, fp: float, weight: float) -> float:
    """The non-compatible trade-off ``len - weight * f_p``."""
    return length - weight * fp


def replay_widths(spec: CostSpec, bar: float, widths: Sequence[float]) -> SortedWidths:
    return SortedWidths.initial(spec.dim, bar).extend(apply_cpw(spec, w) if spec.relabels else w for w in widths)
