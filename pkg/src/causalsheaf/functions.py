"""Causal functions, their extensions, and separability.

A causal function picks one output per tip-constraint class of its space,
so it is stored as a tuple of outputs aligned with ``space.classes``.
Outputs at event ``i`` are the integers ``0 .. outputs[i]-1``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence

from .histories import (
    UNDEF,
    History,
    HistorySpace,
    compatible,
    dom,
    enumerate_causal_completions,
    history_key,
    join,
    leq,
    remove_event,
)

__all__ = [
    "CausalFunction",
    "ExtendedFunction",
    "InseparabilityWitness",
    "normalize_outputs",
    "count_causal_functions",
    "enumerate_causal_functions",
    "function_from_outputs",
    "extend",
    "is_consistent",
    "satisfies_gluing",
    "is_continuous",
    "prime",
    "restrict_function",
    "arises_from",
    "to_joint_io",
    "from_joint_io",
    "joint_io_is_causal",
    "find_inseparability_witness",
    "is_inseparability_witness",
    "is_separable",
    "is_separable_bruteforce",
    "separable_keys",
    "count_separable",
    "factor_parallel",
    "compose_parallel",
    "factor_conditional",
    "compose_conditional",
    "factor_sequential",
    "compose_sequential",
]


def normalize_outputs(space: HistorySpace, outputs) -> tuple[int, ...]:
    if isinstance(outputs, int):
        return (outputs,) * space.n
    if isinstance(outputs, Mapping):
        return tuple(int(outputs[e]) for e in space.events)
    outputs = tuple(int(o) for o in outputs)
    if len(outputs) != space.n or min(outputs, default=1) < 1:
        raise ValueError("need one nonempty output set per event")
    return outputs


@dataclass(frozen=True)
class CausalFunction:
    space: HistorySpace
    outputs: tuple[int, ...]
    values: tuple[int, ...]

    def __post_init__(self):
        if len(self.values) != len(self.space.classes):
            raise ValueError("one value per tip-constraint class is required")
        for v, (i, _) in zip(self.values, self.space.classes):
            if not 0 <= v < self.outputs[i]:
                raise ValueError(f"output {v} out of range at event {self.space.events[i]}")

    def __call__(self, h) -> dict[str, int]:
        """Outputs at the tip events of a history of the space."""
        h = self.space.as_history(h)
        return {self.space.events[i]: self.values[self.space.class_of[(h, i)]] for i in self.space.tip_indices(h)}

    def value(self, h: History, i: int) -> int:
        return self.values[self.space.class_of[(h, i)]]

    def table(self) -> dict[tuple[History, int], int]:
        """Outputs at every (history, tip event) pair."""
        return {(h, i): self.values[c] for (h, i), c in self.space.class_of.items()}


class ExtendedFunction(NamedTuple):
    """Outputs on every extended history, ``UNDEF`` outside its domain."""

    space: HistorySpace
    outputs: tuple[int, ...]
    table: dict

    def __call__(self, k) -> History:
        return self.table[self.space.as_history(k)]


class InseparabilityWitness(NamedTuple):
    k: History
    k_prime: dict  # event position -> extended history
    xi: dict  # event position -> event position


def count_causal_functions(space: HistorySpace, outputs) -> int:
    outputs = normalize_outputs(space, outputs)
    return math.prod(outputs[i] for i, _ in space.classes)


def enumerate_causal_functions(space: HistorySpace, outputs) -> Iterator[CausalFunction]:
    outputs = normalize_outputs(space, outputs)
    ranges = [range(outputs[i]) for i, _ in space.classes]
    for vals in itertools.product(*ranges):
        yield CausalFunction(space, outputs, vals)


def function_from_outputs(space: HistorySpace, outputs, k: History, out: History) -> CausalFunction:
    """The causal function on ``space`` whose extension at ``k`` is ``out``.

    Only meaningful when ``space`` is the downset of ``k``, where functions
    and output assignments on ``dom(k)`` correspond one to one.
    """
    outputs = normalize_outputs(space, outputs)
    vals = []
    for i, members in space.classes:
        if not all(leq(h, k) for h in members):
            raise ValueError("space is not the downset of k")
        vals.append(out[i])
    return CausalFunction(space, outputs, tuple(vals))


def extend(f: CausalFunction) -> ExtendedFunction:
    sp = f.space
    table = {}
    for k in sp.ext:
        out = [UNDEF] * sp.n
        for i in range(sp.n):
            if k[i] != UNDEF:
                out[i] = f.values[sp.ext_class[(k, i)]]
        table[k] = tuple(out)
    return ExtendedFunction(sp, f.outputs, table)


def is_consistent(F: ExtendedFunction) -> bool:
    """``k' <= k`` implies ``F(k') <= F(k)``."""
    ext = F.space.ext
    return all(leq(F.table[a], F.table[b]) for a in ext for b in ext if leq(a, b))


def satisfies_gluing(F: ExtendedFunction) -> bool:
    """``F`` respects compatible joins and domains."""
    ext = F.space.ext
    if any(dom(F.table[k]) != dom(k) for k in ext):
        return False
    for a, b in itertools.combinations(ext, 2):
        if compatible(a, b):
            fa, fb = F.table[a], F.table[b]
            if not compatible(fa, fb) or join(fa, fb) != F.table[join(a, b)]:
                return False
    return True


def is_continuous(F: ExtendedFunction) -> bool:
    """Preimages of principal downsets of output histories are lowersets."""
    ext = F.space.ext
    below = {k: [a for a in ext if leq(a, k)] for k in ext}
    for k in ext:
        target = F.table[k]
        pre = {a for a in ext if leq(F.table[a], target)}
        if any(b not in pre for a in pre for b in below[a]):
            return False
    return True


def prime(F: ExtendedFunction) -> CausalFunction:
    sp = F.space
    vals = []
    for i, members in sp.classes:
        seen = {F.table[h][i] for h in members}
        if len(seen) != 1:
            raise ValueError("extended function is not consistent")
        vals.append(seen.pop())
    return CausalFunction(sp, F.outputs, tuple(vals))


def restrict_function(f: CausalFunction, hs: Iterable) -> CausalFunction:
    sp = f.space
    sub = sp.subspace(sp.as_history(h) for h in hs)
    vals = tuple(f.values[sp.class_of[(members[0], i)]] for i, members in sub.classes)
    return CausalFunction(sub, f.outputs, vals)


def arises_from(f: CausalFunction, g: CausalFunction) -> bool:
    """``f`` arises from ``g`` on a space below that of ``f``."""
    if not f.space.ext_set <= g.space.ext_set:
        return False
    Fg = extend(g).table
    Ff = extend(f).table
    return all(Fg[k] == v for k, v in Ff.items())


def to_joint_io(f: CausalFunction) -> dict[History, History]:
    if not f.space.has_free_choice:
        raise ValueError("joint IO functions need the free-choice condition")
    F = extend(f).table
    return {k: F[k] for k in f.space.max_ext}


def _joint_class_values(space: HistorySpace, F: Mapping[History, History]) -> list[set]:
    vals = []
    for i, members in space.classes:
        seen = set()
        for h in members:
            for k, out in F.items():
                if leq(h, k):
                    seen.add(out[i])
        vals.append(seen)
    return vals


def joint_io_is_causal(F: Mapping, space: HistorySpace) -> bool:
    F = {space.as_history(k): tuple(v) for k, v in F.items()}
    if set(F) != set(space.max_ext):
        return False
    return all(len(s) == 1 for s in _joint_class_values(space, F))


def from_joint_io(F: Mapping, space: HistorySpace, outputs) -> CausalFunction:
    F = {space.as_history(k): tuple(v) for k, v in F.items()}
    if not joint_io_is_causal(F, space):
        raise ValueError("joint IO function is not causal for this space")
    vals = tuple(next(iter(s)) for s in _joint_class_values(space, F))
    return CausalFunction(space, normalize_outputs(space, outputs), vals)


# -- separability -----------------------------------------------------------------

def _ext_order(space: HistorySpace) -> list[History]:
    return sorted(space.ext, key=history_key)


_PLANS: dict = {}


def _witness_plan(space: HistorySpace, literal: bool):
    """Per extended history ``k``: its domain and, per removable event, the candidates ``k'``."""
    key = (space.key, literal)
    plan = _PLANS.get(key)
    if plan is None:
        order = _ext_order(space)
        plan = []
        for k in order:
            d = tuple(i for i in range(space.n) if k[i] != UNDEF)
            if len(d) < 2:
                continue
            events = d if literal else space.ext_tip_indices(k)
            if not events:
                continue
            per = [(w, [k2 for k2 in order if leq(remove_event(k, w), k2)]) for w in events]
            plan.append((k, d, per))
        _PLANS[key] = plan
    return plan


def find_inseparability_witness(f: CausalFunction, literal: bool = False) -> InseparabilityWitness | None:
    """First witness by domain size then lexicographic ``k``; ``None`` if there is none.

    The removed event ranges over the tips of ``k`` (domain minus the domains
    of members strictly below it).  ``literal=True`` ranges over the whole
    domain instead, which misses some inseparable functions.
    """
    F = extend(f).table
    for k, d, per in _witness_plan(f.space, literal):
        Fk = F[k]
        k_prime, xi = {}, {}
        for w, cands in per:
            hit = None
            for k2 in cands:
                Fk2 = F[k2]
                for x in d:
                    if x != w and Fk[x] != Fk2[x]:
                        hit = (k2, x)
                        break
                if hit:
                    break
            if hit is None:
                break
            k_prime[w], xi[w] = hit
        else:
            return InseparabilityWitness(k, k_prime, xi)
    return None


def is_inseparability_witness(f: CausalFunction, w: InseparabilityWitness, literal: bool = False) -> bool:
    sp = f.space
    F = extend(f).table
    d = [i for i in range(sp.n) if w.k[i] != UNDEF]
    if w.k not in sp.ext_set or len(d) < 2:
        return False
    events = set(d) if literal else set(sp.ext_tip_indices(w.k))
    if not events or set(w.k_prime) != events or set(w.xi) != events:
        return False
    for i in events:
        k2, x = w.k_prime[i], w.xi[i]
        if k2 not in sp.ext_set or not leq(remove_event(w.k, i), k2):
            return False
        if x == i or x not in d or F[w.k][x] == F[k2][x]:
            return False
    return True


def is_separable(f: CausalFunction) -> bool:
    return find_inseparability_witness(f) is None


def _class_map(space: HistorySpace, completion: HistorySpace) -> list[int]:
    """For each class of ``space``, the class of ``completion`` read there."""
    return [completion.ext_class[(members[0], i)] for i, members in space.classes]


def separable_keys(space: HistorySpace, outputs, completions: Sequence[HistorySpace] | None = None) -> set:
    """Value tuples of the causal functions arising from some causal completion."""
    outputs = normalize_outputs(space, outputs)
    if completions is None:
        completions = enumerate_causal_completions(space)
    keys = set()
    for comp in completions:
        cmap = _class_map(space, comp)
        getter = (lambda vals, cmap=cmap: tuple(vals[c] for c in cmap))
        ranges = [range(outputs[i]) for i, _ in comp.classes]
        keys.update(map(getter, itertools.product(*ranges)))
    return keys


def count_separable(space: HistorySpace, outputs) -> int:
    return len(separable_keys(space, outputs))


def is_separable_bruteforce(f: CausalFunction, completions: Sequence[HistorySpace] | None = None) -> bool:
    if completions is None:
        completions = enumerate_causal_completions(f.space)
    F = extend(f).table
    for comp in completions:
        # the completion's function is forced on every class read on Ext(f) ...
        forced: dict[int, int] = {}
        ok = True
        for k, out in F.items():
            for i, v in enumerate(out):
                if v != UNDEF and forced.setdefault(comp.ext_class[(k, i)], v) != v:
                    ok = False
        if ok:
            # ... and any completion of the remaining classes reproduces f
            g = CausalFunction(comp, f.outputs, tuple(forced.get(c, 0) for c in range(len(comp.classes))))
            if arises_from(f, g):
                return True
    return False


# -- factorisation ----------------------------------------------------------------

def _split_events(space: HistorySpace, events: Sequence[str]) -> int:
    return sum(1 << space.events.index(e) for e in events)


def _project(space: HistorySpace, part: HistorySpace, h: History) -> History:
    return tuple(h[space.events.index(e)] for e in part.events)


def factor_parallel(f: CausalFunction, left: HistorySpace, right: HistorySpace) -> tuple[CausalFunction, CausalFunction]:
    sp = f.space
    parts = []
    for part in (left, right):
        vals = []
        for i, members in part.classes:
            h = members[0]
            full = tuple(h[part.events.index(e)] if e in part.events else UNDEF for e in sp.events)
            vals.append(f.value(full, sp.events.index(part.events[i])))
        parts.append(CausalFunction(part, tuple(f.outputs[sp.events.index(e)] for e in part.events), tuple(vals)))
    return parts[0], parts[1]


def compose_parallel(space: HistorySpace, f1: CausalFunction, f2: CausalFunction) -> CausalFunction:
    outputs = [0] * space.n
    table = {}
    for g in (f1, f2):
        for (h, i), v in g.table().items():
            full = tuple(h[g.space.events.index(e)] if e in g.space.events else UNDEF for e in space.events)
            j = space.events.index(g.space.events[i])
            table[(full, j)] = v
            outputs[j] = g.outputs[i]
    return _from_table(space, tuple(outputs), table)


def _from_table(space: HistorySpace, outputs, table) -> CausalFunction:
    vals = []
    for i, members in space.classes:
        seen = {table[(h, i)] for h in members}
        if len(seen) != 1:
            raise ValueError("assignment is not constant on a tip-constraint class")
        vals.append(seen.pop())
    return CausalFunction(space, outputs, tuple(vals))


def factor_conditional(f: CausalFunction, first: HistorySpace, branches: Mapping[History, HistorySpace]):
    """Split ``f`` on ``first ~> branches`` into ``(f0, {k: f_k})``."""
    ref = next(iter(branches.values()))
    embed_first = lambda h: tuple(h) + (UNDEF,) * ref.n
    embed_second = lambda h: (UNDEF,) * first.n + tuple(h)
    out_first = f.outputs[:first.n]
    out_second = f.outputs[first.n:]
    f0 = CausalFunction(first, out_first, tuple(
        f.value(embed_first(members[0]), i) for i, members in first.classes))
    fam = {}
    for k, br in branches.items():
        vals = []
        for i, members in br.classes:
            full = join(embed_first(k), embed_second(members[0]))
            vals.append(f.value(full, first.n + i))
        fam[k] = CausalFunction(br, out_second, tuple(vals))
    return f0, fam


def compose_conditional(space: HistorySpace, f0: CausalFunction, family: Mapping[History, CausalFunction]) -> CausalFunction:
    n0 = f0.space.n
    ref = next(iter(family.values()))
    table = {}
    for (h, i), v in f0.table().items():
        table[(tuple(h) + (UNDEF,) * ref.space.n, i)] = v
    for k, g in family.items():
        for (h, i), v in g.table().items():
            table[(join(tuple(k) + (UNDEF,) * ref.space.n, (UNDEF,) * n0 + tuple(h)), n0 + i)] = v
    return _from_table(space, f0.outputs + ref.outputs, table)


def factor_sequential(f: CausalFunction, first: HistorySpace, second: HistorySpace):
    return factor_conditional(f, first, {k: second for k in first.max_ext})


def compose_sequential(space: HistorySpace, f0: CausalFunction, family: Mapping[History, CausalFunction]) -> CausalFunction:
    return compose_conditional(space, f0, family)
