"""Input histories and spaces of input histories.

A history is stored as a tuple indexed by event position, with ``UNDEF`` (-1)
marking events outside its domain.  The order on histories is extension:
``h <= k`` when ``k`` agrees with ``h`` wherever ``h`` is defined.
"""

from __future__ import annotations

import itertools
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple, Sequence

from .orders import CausalOrder

__all__ = [
    "UNDEF",
    "History",
    "HistorySpace",
    "SpaceViolation",
    "dom",
    "leq",
    "lt",
    "compatible",
    "join",
    "restrict",
    "remove_event",
    "ext_closure",
    "history_key",
    "induced_space",
    "space_leq",
    "parallel_compose",
    "sequential_compose",
    "conditional_sequential_compose",
    "single_event_space",
    "enumerate_causal_completions",
    "MAX_COMPLETION_EXT",
]

UNDEF = -1
History = tuple  # tuple[int, ...] with UNDEF holes
MAX_COMPLETION_EXT = 4096


def dom(h: History) -> int:
    """Domain of ``h`` as a bitmask over event positions."""
    m = 0
    for i, v in enumerate(h):
        if v != UNDEF:
            m |= 1 << i
    return m


def leq(h: History, k: History) -> bool:
    return all(a == UNDEF or a == b for a, b in zip(h, k))


def lt(h: History, k: History) -> bool:
    return h != k and leq(h, k)


def compatible(h: History, k: History) -> bool:
    return all(a == UNDEF or b == UNDEF or a == b for a, b in zip(h, k))


def join(h: History, k: History) -> History:
    if not compatible(h, k):
        raise ValueError(f"histories {h} and {k} are incompatible")
    return tuple(b if a == UNDEF else a for a, b in zip(h, k))


def restrict(h: History, mask: int) -> History:
    return tuple(v if mask >> i & 1 else UNDEF for i, v in enumerate(h))


def remove_event(h: History, i: int) -> History:
    return h[:i] + (UNDEF,) + h[i + 1:]


def history_key(h: History) -> tuple:
    """Sort key: domain size, then domain positions, then values."""
    d = [i for i, v in enumerate(h) if v != UNDEF]
    return (len(d), d, [h[i] for i in d])


def ext_closure(histories: Iterable[History]) -> frozenset:
    """Closure of a set of histories under joins of compatible pairs."""
    base = list(set(histories))
    closed = set(base)
    frontier = list(base)
    while frontier:
        fresh = []
        for a in frontier:
            for b in base:
                if compatible(a, b):
                    j = join(a, b)
                    if j not in closed:
                        closed.add(j)
                        fresh.append(j)
        frontier = fresh
    return frozenset(closed)


def _join_irreducibles(ext: Iterable[History]) -> list[History]:
    ext = list(ext)
    out = []
    for h in ext:
        below = [k for k in ext if lt(k, h)]
        acc = tuple([UNDEF] * len(h))
        for k in below:
            acc = join(acc, k)
        if acc != h:
            out.append(h)
    return out


class SpaceViolation(NamedTuple):
    """``history`` is the join of the strictly smaller ``left`` and ``right``."""

    history: History
    left: History
    right: History


class HistorySpace:
    """A finite space of input histories over named events.

    ``inputs[i]`` is the size of the input set of event ``i``; inputs are the
    integers ``0 .. inputs[i]-1``.
    """

    def __init__(self, events: Sequence[str], inputs: Sequence[int] | Mapping[str, int], histories: Iterable):
        self.events = tuple(events)
        if len(set(self.events)) != len(self.events):
            raise ValueError("event names must be unique")
        if isinstance(inputs, Mapping):
            inputs = [inputs[e] for e in self.events]
        self.inputs = tuple(int(x) for x in inputs)
        if len(self.inputs) != len(self.events) or min(self.inputs, default=1) < 1:
            raise ValueError("every event needs a nonempty input set")
        hs = {self.as_history(h) for h in histories}
        if any(dom(h) == 0 for h in hs):
            raise ValueError("histories must have nonempty domain")
        self.histories = tuple(sorted(hs, key=history_key))
        self._subspaces: dict[frozenset, HistorySpace] = {}

    # -- construction helpers -------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.events)

    def event_index(self, event: str | int) -> int:
        if isinstance(event, int):
            return event
        return self.events.index(event)

    def as_history(self, h) -> History:
        if isinstance(h, Mapping):
            out = [UNDEF] * self.n
            for e, v in h.items():
                try:
                    out[self.events.index(e)] = int(v)
                except ValueError:
                    raise KeyError(f"unknown event {e!r}") from None
            h = tuple(out)
        h = tuple(int(v) for v in h)
        if len(h) != self.n:
            raise ValueError(f"history {h} has wrong width")
        for i, v in enumerate(h):
            if v != UNDEF and not 0 <= v < self.inputs[i]:
                raise ValueError(f"input {v} out of range at event {self.events[i]}")
        return h

    def fmt(self, h: History) -> str:
        return "{" + ",".join(f"{e}:{v}" for e, v in zip(self.events, h) if v != UNDEF) + "}"

    def as_dict(self, h: History) -> dict[str, int]:
        return {e: v for e, v in zip(self.events, h) if v != UNDEF}

    def label(self, h: History) -> str:
        """Compact row label, ``_`` marking events outside the domain."""
        return "".join("_" if v == UNDEF else str(v) for v in h)

    def parse_label(self, s: str) -> History:
        if len(s) != self.n:
            raise ValueError(f"label {s!r} does not have {self.n} characters")
        return self.as_history(tuple(UNDEF if c == "_" else int(c) for c in s))

    @property
    def key(self) -> tuple:
        return (self.events, self.inputs, self.histories)

    def __eq__(self, other) -> bool:
        return isinstance(other, HistorySpace) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __len__(self) -> int:
        return len(self.histories)

    def __iter__(self):
        return iter(self.histories)

    def __contains__(self, h) -> bool:
        return h in self.index

    def __repr__(self) -> str:
        return f"HistorySpace({len(self.histories)} histories on {','.join(self.events)})"

    # -- cached structure -----------------------------------------------------
    @cached_property
    def index(self) -> dict[History, int]:
        return {h: i for i, h in enumerate(self.histories)}

    @cached_property
    def ext(self) -> tuple[History, ...]:
        return tuple(sorted(ext_closure(self.histories), key=history_key))

    @cached_property
    def ext_set(self) -> frozenset:
        return frozenset(self.ext)

    @cached_property
    def max_ext(self) -> tuple[History, ...]:
        return tuple(k for k in self.ext if not any(lt(k, k2) for k2 in self.ext))

    @cached_property
    def max_histories(self) -> tuple[History, ...]:
        return tuple(h for h in self.histories if not any(lt(h, h2) for h2 in self.histories))

    @cached_property
    def strictly_below(self) -> dict[History, tuple[History, ...]]:
        return {h: tuple(g for g in self.histories if lt(g, h)) for h in self.histories}

    @cached_property
    def _tips(self) -> dict[History, tuple[int, ...]]:
        out = {}
        for h in self.histories:
            covered = 0
            for g in self.strictly_below[h]:
                covered |= dom(g)
            rest = dom(h) & ~covered
            out[h] = tuple(i for i in range(self.n) if rest >> i & 1)
        return out

    def tips(self, h) -> frozenset[str]:
        h = self.as_history(h)
        if h not in self.index:
            raise KeyError(f"{self.fmt(h)} is not a history of this space")
        return frozenset(self.events[i] for i in self._tips[h])

    def tip_indices(self, h: History) -> tuple[int, ...]:
        return self._tips[h]

    def ext_tip_indices(self, k: History) -> tuple[int, ...]:
        """Tips of an extended history: its domain minus that of members strictly below."""
        if k in self._tips:
            return self._tips[k]
        covered = 0
        for g in self.histories:
            if lt(g, k):
                covered |= dom(g)
        rest = dom(k) & ~covered
        return tuple(i for i in range(self.n) if rest >> i & 1)

    def tip_histories(self, event: str | int) -> tuple[History, ...]:
        i = self.event_index(event)
        return tuple(h for h in self.histories if i in self._tips[h])

    @cached_property
    def classes(self) -> tuple[tuple[int, tuple[History, ...]], ...]:
        """Tip-constraint classes as ``(event position, members)`` pairs.

        Members of a class are tip histories of the event linked by the
        transitive closure of "share an upper bound in the extension".
        """
        out = []
        for i in range(self.n):
            members = [h for h in self.histories if i in self._tips[h]]
            parent = list(range(len(members)))

            def find(x):
                while parent[x] != x:
                    parent[x] = parent[parent[x]]
                    x = parent[x]
                return x

            for a, b in itertools.combinations(range(len(members)), 2):
                # compatible histories always have their join in the extension
                if compatible(members[a], members[b]):
                    parent[find(a)] = find(b)
            groups: dict[int, list[History]] = {}
            for a, h in enumerate(members):
                groups.setdefault(find(a), []).append(h)
            for g in sorted(groups.values(), key=lambda ms: history_key(ms[0])):
                out.append((i, tuple(g)))
        return tuple(out)

    @cached_property
    def class_of(self) -> dict[tuple[History, int], int]:
        return {(h, i): c for c, (i, members) in enumerate(self.classes) for h in members}

    @cached_property
    def ext_class(self) -> dict[tuple[History, int], int]:
        """For ``k`` in the extension and ``i`` in its domain, the class read at ``(k, i)``."""
        out = {}
        for k in self.ext:
            for h in self.histories:
                if leq(h, k):
                    for i in self._tips[h]:
                        out[(k, i)] = self.class_of[(h, i)]
        return out

    def constraint_classes(self) -> dict[str, list[tuple[History, ...]]]:
        out: dict[str, list] = {e: [] for e in self.events}
        for i, members in self.classes:
            out[self.events[i]].append(members)
        return out

    # -- predicates -------------------------------------------------------------
    def violations(self) -> list[SpaceViolation]:
        """Members that are joins of two strictly smaller extended histories."""
        out = []
        for h in self.histories:
            below = [k for k in self.ext if lt(k, h)]
            found = None
            for a, b in itertools.combinations(below, 2):
                if compatible(a, b) and join(a, b) == h:
                    found = SpaceViolation(h, a, b)
                    break
            if found:
                out.append(found)
        return out

    def is_valid(self) -> bool:
        return not self.violations()

    @cached_property
    def is_tight(self) -> bool:
        return all(len(members) == 1 for _, members in self.classes)

    @cached_property
    def is_causally_complete(self) -> bool:
        return all(len(t) == 1 for t in self._tips.values())

    @cached_property
    def has_free_choice(self) -> bool:
        total = set(itertools.product(*(range(s) for s in self.inputs)))
        return set(self.max_ext) == total

    # -- lowersets ----------------------------------------------------------------
    def is_lowerset(self, hs: Iterable[History]) -> bool:
        hs = set(hs)
        return hs <= set(self.histories) and all(set(self.strictly_below[h]) <= hs for h in hs)

    def downset(self, k: History) -> frozenset:
        """Histories of the space lying below ``k`` (``k`` need not be a member)."""
        return frozenset(h for h in self.histories if leq(h, k))

    def subspace(self, hs: Iterable[History]) -> "HistorySpace":
        key = frozenset(hs)
        sub = self._subspaces.get(key)
        if sub is None:
            if not self.is_lowerset(key):
                raise ValueError("not a lowerset of the space")
            sub = HistorySpace(self.events, self.inputs, key)
            self._subspaces[key] = sub
        return sub

    def with_event_order(self, events: Sequence[str]) -> "HistorySpace":
        events = tuple(events)
        if sorted(events) != sorted(self.events):
            raise ValueError("event reordering must be a permutation")
        perm = [self.events.index(e) for e in events]
        return HistorySpace(events, [self.inputs[p] for p in perm],
                            (tuple(h[p] for p in perm) for h in self.histories))


def lowerset_subspace(space: HistorySpace, hs: Iterable) -> HistorySpace:
    return space.subspace(space.as_history(h) for h in hs)


__all__.append("lowerset_subspace")


def induced_space(order: CausalOrder, inputs: Sequence[int] | Mapping[str, int] | int) -> HistorySpace:
    """Histories are all input assignments on the causal past of each event."""
    if isinstance(inputs, int):
        inputs = [inputs] * order.n
    elif isinstance(inputs, Mapping):
        inputs = [inputs[e] for e in order.events]
    hs = []
    for mask in sorted(set(order.past)):
        idx = [i for i in range(order.n) if mask >> i & 1]
        for vals in itertools.product(*(range(inputs[i]) for i in idx)):
            h = [UNDEF] * order.n
            for i, v in zip(idx, vals):
                h[i] = v
            hs.append(tuple(h))
    return HistorySpace(order.events, inputs, hs)


def single_event_space(event: str, size: int) -> HistorySpace:
    return HistorySpace((event,), (size,), [(v,) for v in range(size)])


def space_leq(a: HistorySpace, b: HistorySpace) -> bool:
    """``a <= b`` iff the extension of ``a`` contains that of ``b``."""
    if a.events != b.events or a.inputs != b.inputs:
        raise ValueError("spaces must share events and inputs")
    return a.ext_set >= b.ext_set


def _merge(a: HistorySpace, b: HistorySpace) -> tuple[tuple[str, ...], tuple[int, ...], callable, callable]:
    if set(a.events) & set(b.events):
        raise ValueError("composed spaces must have disjoint events")
    events = a.events + b.events
    inputs = a.inputs + b.inputs
    pad_a = lambda h: tuple(h) + (UNDEF,) * b.n
    pad_b = lambda h: (UNDEF,) * a.n + tuple(h)
    return events, inputs, pad_a, pad_b


def parallel_compose(a: HistorySpace, b: HistorySpace) -> HistorySpace:
    events, inputs, pad_a, pad_b = _merge(a, b)
    return HistorySpace(events, inputs, [pad_a(h) for h in a] + [pad_b(h) for h in b])


def conditional_sequential_compose(first: HistorySpace, branches: Mapping[History, HistorySpace]) -> HistorySpace:
    """``first`` followed, below each maximal extended history ``k``, by ``branches[k]``."""
    if set(branches) != set(first.max_ext):
        raise ValueError("need exactly one branch per maximal extended history")
    spaces = list(branches.values())
    ref = spaces[0]
    if any(s.events != ref.events or s.inputs != ref.inputs for s in spaces):
        raise ValueError("branches must share events and inputs")
    events, inputs, pad_a, pad_b = _merge(first, ref)
    hs = [pad_a(h) for h in first]
    for k, sp in branches.items():
        hs.extend(join(pad_a(k), pad_b(h)) for h in sp)
    return HistorySpace(events, inputs, hs)


def sequential_compose(first: HistorySpace, second: HistorySpace) -> HistorySpace:
    return conditional_sequential_compose(first, {k: second for k in first.max_ext})


def _space_from_ext(events, inputs, ext) -> HistorySpace:
    return HistorySpace(events, inputs, _join_irreducibles(ext))


def enumerate_causal_completions(space: HistorySpace, bound: int = MAX_COMPLETION_EXT) -> list[HistorySpace]:
    """Causally complete spaces below ``space`` that are maximal among such.

    Search: pick the first history with several tips, drop one tip from its
    domain, close under joins, recurse.  Results keep the maximal extended
    histories of ``space`` and are filtered to those with inclusion-minimal
    extension.
    """
    if len(space.ext) > bound:
        raise ValueError(f"extension of size {len(space.ext)} exceeds bound {bound}")
    target_max = set(space.max_ext)
    seen: set[frozenset] = set()
    complete: list[frozenset] = []

    def visit(ext: frozenset) -> None:
        if ext in seen:
            return
        seen.add(ext)
        sp = _space_from_ext(space.events, space.inputs, ext)
        if set(sp.max_ext) != target_max:
            return
        multi = [h for h in sp.histories if len(sp.tip_indices(h)) > 1]
        if not multi:
            complete.append(ext)
            return
        h = multi[0]
        for i in sp.tip_indices(h):
            visit(ext_closure(ext | {remove_event(h, i)}))

    visit(space.ext_set)
    minimal = [e for e in complete if not any(o < e for o in complete)]
    spaces = [_space_from_ext(space.events, space.inputs, e) for e in minimal]
    return sorted(spaces, key=lambda s: [history_key(h) for h in s.histories])
