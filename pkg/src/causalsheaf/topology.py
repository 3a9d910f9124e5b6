"""Lowerset topology on a space of input histories, covers and gluing."""

from __future__ import annotations

from typing import Iterable, Mapping, NamedTuple, Sequence

from .functions import CausalFunction, restrict_function
from .histories import History, HistorySpace, history_key, leq

__all__ = [
    "Cover",
    "SolipsisticWitness",
    "space_lowersets",
    "canonical_cover",
    "is_cover",
    "standard_cover",
    "classical_cover",
    "solipsistic_cover",
    "enumerate_covers",
    "count_covers",
    "refines",
    "cover_hierarchy",
    "is_compatible_family",
    "glue_compatible_family",
    "restrict_family_to_cover",
    "find_solipsistic_witnesses",
    "find_solipsistic_witness",
    "is_solipsistic_witness",
    "is_sheaf",
    "MAX_COVER_LOWERSETS",
]

MAX_COVER_LOWERSETS = 64

Lowerset = frozenset
Cover = tuple  # tuple of lowersets in canonical order


def _lowerset_key(space: HistorySpace, hs: Iterable[History]) -> tuple:
    return (len(hs), sorted(space.index[h] for h in hs))


def space_lowersets(space: HistorySpace, include_empty: bool = False) -> list[frozenset]:
    """All lowersets of the space, by size then member positions."""
    order = space.histories  # sorted by domain size, hence a linear extension
    below = [[space.index[g] for g in space.strictly_below[h]] for h in order]
    masks = []

    def walk(i: int, mask: int) -> None:
        if i == len(order):
            masks.append(mask)
            return
        walk(i + 1, mask)
        if all(mask >> j & 1 for j in below[i]):
            walk(i + 1, mask | 1 << i)

    walk(0, 0)
    out = [frozenset(order[j] for j in range(len(order)) if m >> j & 1) for m in masks]
    if not include_empty:
        out = [s for s in out if s]
    return sorted(out, key=lambda s: _lowerset_key(space, s))


def canonical_cover(space: HistorySpace, opens: Iterable[Iterable[History]]) -> Cover:
    uniq = {frozenset(u) for u in opens}
    return tuple(sorted(uniq, key=lambda s: _lowerset_key(space, s)))


def is_cover(space: HistorySpace, opens: Iterable[Iterable[History]]) -> bool:
    opens = [frozenset(u) for u in opens]
    if any(not u or not space.is_lowerset(u) for u in opens):
        return False
    if any(a < b for a in opens for b in opens):
        return False
    return frozenset().union(*opens) == frozenset(space.histories)


def standard_cover(space: HistorySpace) -> Cover:
    return canonical_cover(space, (space.downset(k) for k in space.max_ext))


def classical_cover(space: HistorySpace) -> Cover:
    return canonical_cover(space, [space.histories])


def solipsistic_cover(space: HistorySpace) -> Cover:
    return canonical_cover(space, (space.downset(h) for h in space.max_histories))


def enumerate_covers(
    space: HistorySpace, bound: int = MAX_COVER_LOWERSETS, require_maximal: bool = False
) -> list[Cover]:
    """Antichains of nonempty lowersets whose union is the whole space.

    With ``require_maximal`` every open set must also contain at least one
    maximal history of the space; lowersets made only of non-maximal
    histories are then never used.
    """
    lsets = space_lowersets(space)
    if require_maximal:
        tops = frozenset(space.max_histories)
        lsets = [u for u in lsets if u & tops]
    if len(lsets) > bound:
        raise ValueError(f"{len(lsets)} lowersets exceed the cover enumeration bound {bound}")
    masks = [sum(1 << space.index[h] for h in s) for s in lsets]
    full = (1 << len(space)) - 1
    suffix = [0] * (len(masks) + 1)
    for i in range(len(masks) - 1, -1, -1):
        suffix[i] = suffix[i + 1] | masks[i]
    found: list[list[int]] = []

    def walk(i: int, chosen: list[int], union: int) -> None:
        if union | suffix[i] != full:
            return
        if i == len(masks):
            found.append(list(chosen))
            return
        m = masks[i]
        if all(m & c != c and m & c != m for c in (masks[j] for j in chosen)):
            chosen.append(i)
            walk(i + 1, chosen, union | m)
            chosen.pop()
        walk(i + 1, chosen, union)

    walk(0, [], 0)
    covers = {canonical_cover(space, (lsets[j] for j in c)) for c in found}
    return sorted(covers, key=lambda c: (len(c), [_lowerset_key(space, u) for u in c]))


def count_covers(space: HistorySpace, bound: int = MAX_COVER_LOWERSETS, require_maximal: bool = False) -> int:
    return len(enumerate_covers(space, bound, require_maximal))


def refines(finer: Iterable[frozenset], coarser: Iterable[frozenset]) -> bool:
    coarser = list(coarser)
    return all(any(v <= u for u in coarser) for v in finer)


def cover_hierarchy(covers: Sequence[Cover]) -> list[tuple[int, int]]:
    """Covering pairs ``(i, j)`` of the refinement order: ``covers[i]`` refines ``covers[j]``."""
    n = len(covers)
    rel = [[i != j and refines(covers[i], covers[j]) for j in range(n)] for i in range(n)]
    edges = []
    for i in range(n):
        for j in range(n):
            if rel[i][j] and not any(rel[i][m] and rel[m][j] for m in range(n)):
                edges.append((i, j))
    return edges


# -- gluing -------------------------------------------------------------------

def is_compatible_family(family: Mapping[frozenset, CausalFunction]) -> bool:
    items = list(family.items())
    for a, (u, f) in enumerate(items):
        for v, g in items[a + 1:]:
            common = u & v
            if common and restrict_function(f, common).values != restrict_function(g, common).values:
                return False
    return True


def glue_compatible_family(space: HistorySpace, family: Mapping[frozenset, CausalFunction]) -> CausalFunction | None:
    """The compatible join of the family if it is causal on the union, else ``None``."""
    if not is_compatible_family(family):
        raise ValueError("family is not compatible")
    table: dict[tuple[History, int], int] = {}
    outputs = None
    for f in family.values():
        outputs = f.outputs
        table.update(f.table())
    union = frozenset().union(*family)
    sub = space.subspace(union)
    vals = []
    for i, members in sub.classes:
        seen = {table[(h, i)] for h in members}
        if len(seen) != 1:
            return None
        vals.append(seen.pop())
    return CausalFunction(sub, outputs, tuple(vals))


def restrict_family_to_cover(family: Mapping[frozenset, CausalFunction], target: Iterable[frozenset]) -> dict:
    out = {}
    for v in target:
        sources = [u for u in family if v <= u]
        if not sources:
            raise ValueError("target cover does not refine the family's cover")
        out[frozenset(v)] = restrict_function(family[sources[0]], v)
    return out


# -- solipsistic witnesses ------------------------------------------------------

class SolipsisticWitness(NamedTuple):
    k: History
    event: int
    h: History
    h_prime: History


def is_solipsistic_witness(space: HistorySpace, w: SolipsisticWitness) -> bool:
    k, i, h, h2 = w
    if k not in space.ext_set or k[i] < 0 or h == h2:
        return False
    if space.class_of.get((h, i)) is None or space.class_of.get((h, i)) != space.class_of.get((h2, i)):
        return False
    if not (leq(h, k) and leq(h2, k)):
        return False
    return not any(leq(h, g) and leq(h2, g) and leq(g, k) for g in space.histories)


def find_solipsistic_witnesses(space: HistorySpace) -> list[SolipsisticWitness]:
    """All witnesses, ordered by ``k`` then event then the pair."""
    out = []
    for k in space.ext:
        for i, members in space.classes:
            below = [h for h in members if leq(h, k)]
            for a, h in enumerate(below):
                for h2 in below[a + 1:]:
                    if not any(leq(h, g) and leq(h2, g) and leq(g, k) for g in space.histories):
                        out.append(SolipsisticWitness(k, i, h, h2))
    out.sort(key=lambda w: (history_key(w.k), w.event, history_key(w.h), history_key(w.h_prime)))
    return out


def find_solipsistic_witness(space: HistorySpace) -> SolipsisticWitness | None:
    ws = find_solipsistic_witnesses(space)
    return ws[0] if ws else None


def is_sheaf(space: HistorySpace) -> bool:
    return not find_solipsistic_witnesses(space)
