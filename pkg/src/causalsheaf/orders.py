"""Finite causal preorders and their lowerset lattices.

A :class:`CausalOrder` stores, for every event ``j``, the bitmask of events
``i`` with ``i <= j`` (its causal past, including itself).  Closure is taken
eagerly at construction, so relation queries are constant time.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

__all__ = [
    "CausalOrder",
    "make_order",
    "discrete_order",
    "total_order",
    "indiscrete_order",
    "classify_pair",
    "is_definite",
    "lowersets",
    "order_leq",
    "order_join",
    "order_meet",
    "enumerate_orders",
    "MAX_ENUMERATION_EVENTS",
]

MAX_ENUMERATION_EVENTS = 4

PRECEDES = "precedes"
SUCCEEDS = "succeeds"
UNRELATED = "unrelated"
INDEFINITE = "indefinite"
EQUAL = "equal"


def _bits(mask: int) -> Iterable[int]:
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


@dataclass(frozen=True)
class CausalOrder:
    """A preorder on named events; ``past[j]`` is the bitmask of ``{i : i <= j}``."""

    events: tuple[str, ...]
    past: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.events)

    def index(self, event: str | int) -> int:
        if isinstance(event, int):
            if not 0 <= event < self.n:
                raise KeyError(f"unknown event id {event}")
            return event
        try:
            return self.events.index(event)
        except ValueError:
            raise KeyError(f"unknown event {event!r}") from None

    def leq(self, a: str | int, b: str | int) -> bool:
        return bool(self.past[self.index(b)] >> self.index(a) & 1)

    def pairs(self) -> list[tuple[int, int]]:
        """Non-reflexive pairs ``(i, j)`` with ``i <= j``."""
        return [(i, j) for j in range(self.n) for i in _bits(self.past[j]) if i != j]

    def downset(self, event: str | int) -> int:
        return self.past[self.index(event)]

    def equivalence_classes(self) -> list[tuple[int, ...]]:
        """Classes of mutually related events, in order of first member."""
        seen = 0
        classes = []
        for j in range(self.n):
            if seen >> j & 1:
                continue
            cls = tuple(i for i in range(self.n) if self.leq(i, j) and self.leq(j, i))
            for i in cls:
                seen |= 1 << i
            classes.append(cls)
        return classes

    def __str__(self) -> str:
        rel = ", ".join(f"{self.events[i]}<={self.events[j]}" for i, j in self.pairs())
        return f"CausalOrder({', '.join(self.events)}; {rel})"


def _close(n: int, past: list[int]) -> tuple[int, ...]:
    past = [p | (1 << j) for j, p in enumerate(past)]
    changed = True
    while changed:
        changed = False
        for j in range(n):
            acc = past[j]
            for i in _bits(past[j]):
                acc |= past[i]
            if acc != past[j]:
                past[j] = acc
                changed = True
    return tuple(past)


def make_order(events: Sequence[str], pairs: Iterable[tuple[str | int, str | int]] = ()) -> CausalOrder:
    """Reflexive-transitive closure of ``pairs`` (``(a, b)`` meaning ``a <= b``)."""
    events = tuple(events)
    if len(set(events)) != len(events):
        raise ValueError("event names must be unique")
    proto = CausalOrder(events, tuple(1 << j for j in range(len(events))))
    past = list(proto.past)
    for a, b in pairs:
        past[proto.index(b)] |= 1 << proto.index(a)
    return CausalOrder(events, _close(len(events), past))


def discrete_order(events: Sequence[str]) -> CausalOrder:
    return make_order(events)


def total_order(events: Sequence[str]) -> CausalOrder:
    return make_order(events, zip(events, events[1:]))


def indiscrete_order(events: Sequence[str]) -> CausalOrder:
    return make_order(events, itertools.permutations(events, 2))


def classify_pair(order: CausalOrder, a: str | int, b: str | int) -> str:
    i, j = order.index(a), order.index(b)
    if i == j:
        return EQUAL
    le, ge = order.leq(i, j), order.leq(j, i)
    if le and ge:
        return INDEFINITE
    if le:
        return PRECEDES
    if ge:
        return SUCCEEDS
    return UNRELATED


def is_definite(order: CausalOrder) -> bool:
    return all(len(c) == 1 for c in order.equivalence_classes())


def lowersets(order: CausalOrder) -> list[frozenset[str]]:
    """All lowersets (including the empty one), sorted by size then names."""
    masks = [m for m in range(1 << order.n) if all(order.past[j] & ~m == 0 for j in _bits(m))]
    sets = [frozenset(order.events[i] for i in _bits(m)) for m in masks]
    return sorted(sets, key=lambda s: (len(s), sorted(order.index(e) for e in s)))


def _check_same_events(a: CausalOrder, b: CausalOrder) -> None:
    if a.events != b.events:
        raise ValueError("orders are defined on different event sets")


def order_leq(a: CausalOrder, b: CausalOrder) -> bool:
    """``a <= b`` iff every relation of ``a`` also holds in ``b``."""
    _check_same_events(a, b)
    return all(pa & ~pb == 0 for pa, pb in zip(a.past, b.past))


def order_join(a: CausalOrder, b: CausalOrder) -> CausalOrder:
    _check_same_events(a, b)
    return CausalOrder(a.events, _close(a.n, [pa | pb for pa, pb in zip(a.past, b.past)]))


def order_meet(a: CausalOrder, b: CausalOrder) -> CausalOrder:
    _check_same_events(a, b)
    # intersection of two preorders is already a preorder
    return CausalOrder(a.events, tuple(pa & pb for pa, pb in zip(a.past, b.past)))


def enumerate_orders(events: Sequence[str], bound: int = MAX_ENUMERATION_EVENTS) -> list[CausalOrder]:
    """All labeled preorders on ``events``, sorted by their relation bitmasks."""
    events = tuple(events)
    n = len(events)
    if n > bound:
        raise ValueError(f"{n} events exceeds enumeration bound {bound}")
    off = [(i, j) for i in range(n) for j in range(n) if i != j]
    found = set()
    for choice in range(1 << len(off)):
        past = [1 << j for j in range(n)]
        for b, (i, j) in enumerate(off):
            if choice >> b & 1:
                past[j] |= 1 << i
        found.add(_close(n, past))
    return [CausalOrder(events, p) for p in sorted(found)]
