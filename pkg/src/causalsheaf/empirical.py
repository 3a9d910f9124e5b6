"""Exact-rational distributions over causal functions and empirical models on covers.

A :class:`CausalDistribution` lives on a lowerset of a history space and
weighs causal functions on that lowerset; functions are keyed by their value
tuples (aligned with the classes of the lowerset subspace).  An
:class:`EmpiricalModel` is a family of such distributions indexed by the
open sets of a cover.

Rows of a model are addressed by extended histories: a component on the
downset of ``k`` is a distribution over output assignments on ``dom(k)``.
Components on lowersets that are not principal downsets are addressed by the
maximal extended histories of the lowerset, listed in order.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence

import numpy as np

from .functions import (
    CausalFunction,
    count_causal_functions,
    enumerate_causal_functions,
    extend,
    normalize_outputs,
    separable_keys,
)
from .histories import UNDEF, History, HistorySpace, dom, history_key, leq
from .lp import find_feasible, maximize
from .topology import (
    SolipsisticWitness,
    canonical_cover,
    glue_compatible_family,
    is_cover,
    is_solipsistic_witness,
    refines,
    solipsistic_cover,
    standard_cover,
)

__all__ = [
    "CausalDistribution",
    "EmpiricalModel",
    "FractionResult",
    "MAX_GLOBAL_FUNCTIONS",
    "to_fraction",
    "class_map",
    "restrict_key",
    "marginalize",
    "validate_model",
    "is_valid_model",
    "row_histories",
    "function_from_row",
    "row_of_function",
    "model_from_rows",
    "model_from_table",
    "model_rows",
    "lift_model",
    "classical_model",
    "restrict_model",
    "noncontextual_fraction",
    "contextual_fraction",
    "is_noncontextual",
    "separable_noncontextual_fraction",
    "fraction_on_space",
    "check_certificate",
    "localize_switch_model",
    "switch_structure",
    "random_standard_model",
    "solipsistic_extension_exists",
    "displays_solipsistic_contextuality",
    "witness_model",
    "deterministic_model",
    "is_deterministic",
    "is_globally_deterministic",
]

MAX_GLOBAL_FUNCTIONS = 1 << 18

Key = tuple  # values tuple of a causal function


def to_fraction(v) -> Fraction:
    """Exact rational from an int, Fraction, or decimal/fraction string."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        raise TypeError("floats are not accepted; pass a string such as '0.933'")
    return Fraction(v)


# -- distributions ------------------------------------------------------------

@dataclass(frozen=True)
class CausalDistribution:
    """Weights on causal functions over the lowerset subspace ``space``.

    Zero weights are dropped.  Normalization is not enforced here so that
    :func:`validate_model` can report it; negative weights are rejected.
    """

    space: HistorySpace
    outputs: tuple[int, ...]
    weights: Mapping[Key, Fraction] = field(hash=False)

    def __post_init__(self):
        clean = {}
        n_classes = len(self.space.classes)
        for key, w in self.weights.items():
            w = to_fraction(w)
            if w < 0:
                raise ValueError("distribution weights must be nonnegative")
            key = tuple(key)
            if len(key) != n_classes:
                raise ValueError("weight key does not match the classes of the lowerset")
            if w:
                clean[key] = clean.get(key, Fraction(0)) + w
        object.__setattr__(self, "weights", clean)

    @property
    def lowerset(self) -> frozenset:
        return frozenset(self.space.histories)

    @property
    def total(self) -> Fraction:
        return sum(self.weights.values(), Fraction(0))

    def function(self, key: Key) -> CausalFunction:
        return CausalFunction(self.space, self.outputs, tuple(key))

    def items(self) -> Iterator[tuple[CausalFunction, Fraction]]:
        for key in sorted(self.weights):
            yield self.function(key), self.weights[key]

    def prob(self, f: CausalFunction | Key) -> Fraction:
        key = f.values if isinstance(f, CausalFunction) else tuple(f)
        return self.weights.get(key, Fraction(0))

    @property
    def is_delta(self) -> bool:
        return len(self.weights) == 1 and self.total == 1

    @classmethod
    def delta(cls, f: CausalFunction) -> "CausalDistribution":
        return cls(f.space, f.outputs, {f.values: Fraction(1)})

    @classmethod
    def uniform(cls, space: HistorySpace, outputs) -> "CausalDistribution":
        outputs = normalize_outputs(space, outputs)
        w = Fraction(1, count_causal_functions(space, outputs))
        return cls(space, outputs, {f.values: w for f in enumerate_causal_functions(space, outputs)})

    @classmethod
    def from_functions(cls, weights: Mapping[CausalFunction, object]) -> "CausalDistribution":
        fs = list(weights)
        if not fs:
            raise ValueError("need at least one function")
        return cls(fs[0].space, fs[0].outputs, {f.values: to_fraction(w) for f, w in weights.items()})


def class_map(space: HistorySpace, sub: HistorySpace) -> list[int]:
    """Class index in ``space`` of each class of the lowerset subspace ``sub``."""
    return [space.class_of[(members[0], i)] for i, members in sub.classes]


def restrict_key(key: Key, cmap: Sequence[int]) -> Key:
    return tuple(key[c] for c in cmap)


def marginalize(d: CausalDistribution, target: Iterable[History]) -> CausalDistribution:
    """Pushforward of ``d`` along restriction to the lowerset ``target``."""
    sub = d.space.subspace(target)
    cmap = class_map(d.space, sub)
    out: dict[Key, Fraction] = {}
    for key, w in d.weights.items():
        r = restrict_key(key, cmap)
        out[r] = out.get(r, Fraction(0)) + w
    return CausalDistribution(sub, d.outputs, out)


# -- models ---------------------------------------------------------------------

@dataclass(frozen=True)
class EmpiricalModel:
    """One distribution per open set of a cover of ``space``."""

    space: HistorySpace
    outputs: tuple[int, ...]
    components: Mapping[frozenset, CausalDistribution] = field(hash=False)

    def __post_init__(self):
        comps = {frozenset(u): d for u, d in self.components.items()}
        if not is_cover(self.space, comps):
            raise ValueError("component lowersets do not form a cover of the space")
        for u, d in comps.items():
            if d.lowerset != u or d.space.events != self.space.events:
                raise ValueError("component does not live on its lowerset")
            if d.outputs != self.outputs:
                raise ValueError("component output sizes differ from the model's")
        object.__setattr__(self, "components", comps)

    @property
    def cover(self) -> tuple[frozenset, ...]:
        return canonical_cover(self.space, self.components)

    def __getitem__(self, u: Iterable[History]) -> CausalDistribution:
        return self.components[frozenset(u)]

    def component_at(self, k) -> CausalDistribution:
        """Component on the downset of the extended history ``k``."""
        return self.components[self.space.downset(self.space.as_history(k))]


def validate_model(e: EmpiricalModel) -> list[str]:
    """Normalization and pairwise marginal agreement problems; empty when valid."""
    problems = []
    sp = e.space
    for u in e.cover:
        total = e.components[u].total
        if total != 1:
            problems.append(f"normalization: component on {_lowerset_label(sp, u)} has mass {total}")
    cover = e.cover
    for a, u in enumerate(cover):
        for v in cover[a + 1:]:
            common = u & v
            if not common:
                continue
            mu = marginalize(e.components[u], common).weights
            mv = marginalize(e.components[v], common).weights
            if mu != mv:
                problems.append(
                    f"compatibility: {_lowerset_label(sp, u)} and {_lowerset_label(sp, v)} disagree on their overlap"
                )
    return problems


def is_valid_model(e: EmpiricalModel) -> bool:
    return not validate_model(e)


def _lowerset_label(space: HistorySpace, u: Iterable[History]) -> str:
    return "{" + ", ".join(space.fmt(h) for h in sorted(u, key=history_key)) + "}"


# -- row addressing -------------------------------------------------------------

def row_histories(space: HistorySpace, u: Iterable[History]) -> tuple[History, ...]:
    """Maximal extended histories of the lowerset ``u``, in history order."""
    sub = space.subspace(u)
    return tuple(sorted(sub.max_ext, key=history_key))


def function_from_row(sub: HistorySpace, outputs, ks: Sequence[History], outs: Sequence[History]) -> CausalFunction:
    """The causal function on ``sub`` whose extension takes value ``outs[j]`` at ``ks[j]``."""
    outputs = normalize_outputs(sub, outputs)
    for k, o in zip(ks, outs):
        if dom(k) != dom(o):
            raise ValueError("output assignment must cover exactly the domain of its history")
    vals = []
    for i, members in sub.classes:
        seen = {o[i] for k, o in zip(ks, outs) for h in members if leq(h, k)}
        if len(seen) != 1:
            raise ValueError("row outputs do not define a causal function on the lowerset")
        vals.append(seen.pop())
    f = CausalFunction(sub, outputs, tuple(vals))
    F = extend(f).table
    if any(F[k] != tuple(o) for k, o in zip(ks, outs)):
        raise ValueError("row outputs are not the extension of a causal function")
    return f


def row_of_function(f: CausalFunction, ks: Sequence[History] | None = None) -> tuple[History, ...]:
    ks = row_histories(f.space, f.space.histories) if ks is None else ks
    F = extend(f).table
    return tuple(F[k] for k in ks)


def _parse_history_label(space: HistorySpace, label) -> History:
    if isinstance(label, str) and not label.startswith("{"):
        return space.parse_label(label)
    if isinstance(label, str):
        body = label.strip("{}")
        pairs = [p.split(":") for p in body.split(",") if p]
        return space.as_history({e.strip(): int(v) for e, v in pairs})
    return space.as_history(label)


def _parse_row_label(space: HistorySpace, label) -> tuple[History, ...]:
    if isinstance(label, str) and "," in label and not label.startswith("{"):
        return tuple(_parse_history_label(space, part) for part in label.split(","))
    if isinstance(label, (list, tuple)) and label and not isinstance(label[0], int):
        return tuple(_parse_history_label(space, part) for part in label)
    return (_parse_history_label(space, label),)


def _parse_output_label(space: HistorySpace, ks: Sequence[History], label) -> tuple[History, ...]:
    parts = label.split(",") if isinstance(label, str) else list(label)
    if isinstance(label, str) and len(ks) == 1:
        parts = [label]
    if len(parts) != len(ks):
        raise ValueError(f"output label {label!r} needs one assignment per row history")
    outs = []
    for k, part in zip(ks, parts):
        if isinstance(part, str):
            if len(part) != space.n:
                raise ValueError(f"output label {part!r} does not have {space.n} characters")
            o = tuple(UNDEF if c == "_" else int(c) for c in part)
        else:
            o = tuple(part)
        if dom(o) != dom(k):
            raise ValueError(f"output label {part!r} does not match the domain of its row")
        outs.append(o)
    return tuple(outs)


def _lowerset_of_row(space: HistorySpace, ks: Sequence[History]) -> frozenset:
    return frozenset(h for h in space.histories if any(leq(h, k) for k in ks))


def model_from_rows(space: HistorySpace, outputs, rows: Mapping) -> EmpiricalModel:
    """Model whose component on the lowerset below each row's histories is given by that row.

    Row keys are history labels (``"1_1"``, ``"{A:1,C:1}"``, or tuples), or
    comma-separated lists of them for non-principal lowersets.  Entry keys
    are output labels over the same domains, values exact rationals.
    """
    outputs = normalize_outputs(space, outputs)
    comps: dict[frozenset, CausalDistribution] = {}
    for label, entries in rows.items():
        ks = _parse_row_label(space, label)
        if any(k not in space.ext_set for k in ks):
            raise ValueError(f"row {label!r} is not an extended history of the space")
        u = _lowerset_of_row(space, ks)
        sub = space.subspace(u)
        if set(ks) != set(sub.max_ext):
            raise ValueError(f"row {label!r} must list the maximal extended histories of its lowerset")
        order = sorted(range(len(ks)), key=lambda j: history_key(ks[j]))
        weights: dict[Key, Fraction] = {}
        for olabel, p in entries.items():
            outs = _parse_output_label(space, ks, olabel)
            f = function_from_row(sub, outputs, [ks[j] for j in order], [outs[j] for j in order])
            weights[f.values] = weights.get(f.values, Fraction(0)) + to_fraction(p)
        if u in comps:
            raise ValueError(f"duplicate row for lowerset {_lowerset_label(space, u)}")
        comps[u] = CausalDistribution(sub, outputs, weights)
    return EmpiricalModel(space, outputs, comps)


def model_from_table(space: HistorySpace, outputs, rows: Mapping, check: bool = True) -> EmpiricalModel:
    """Standard-cover model from a conditional table with one row per total input assignment."""
    if not space.has_free_choice:
        raise ValueError("tables need a space satisfying the free-choice condition")
    outputs = normalize_outputs(space, outputs)
    parsed = {}
    for label, entries in rows.items():
        k = _parse_history_label(space, label)
        if dom(k) != (1 << space.n) - 1:
            raise ValueError(f"row {label!r} is not a total input assignment")
        parsed[k] = entries
        if check:
            total = sum((to_fraction(p) for p in entries.values()), Fraction(0))
            if total != 1:
                raise ValueError(f"row {label!r} sums to {total}, not 1")
    if set(parsed) != set(space.max_ext):
        raise ValueError("need exactly one row per maximal extended history")
    return model_from_rows(space, outputs, parsed)


def model_rows(e: EmpiricalModel) -> dict[str, dict[str, Fraction]]:
    """Row-label to output-label table, inverse of :func:`model_from_rows`."""
    sp = e.space
    out = {}
    for u in e.cover:
        d = e.components[u]
        ks = row_histories(sp, u)
        row = {}
        for f, w in d.items():
            row[",".join(sp.label(o) for o in row_of_function(f, ks))] = w
        out[",".join(sp.label(k) for k in ks)] = dict(sorted(row.items()))
    return out


def lift_model(e: EmpiricalModel, target: HistorySpace) -> EmpiricalModel | None:
    """Re-express a standard-cover model on ``target``, or ``None`` if it does not lift.

    ``target`` must share events, inputs and maximal extended histories with
    the model's space; the joint output rows are read back as causal
    functions of ``target`` and the result must pass validation.
    """
    sp = e.space
    if target.events != sp.events or target.inputs != sp.inputs or set(target.max_ext) != set(sp.max_ext):
        raise ValueError("target must share events, inputs and maximal extended histories")
    if e.cover != standard_cover(sp):
        raise ValueError("only standard-cover models can be lifted")
    rows = {k: {o: w for o, w in row.items()} for k, row in _standard_rows(e).items()}
    try:
        lifted = model_from_rows(target, e.outputs, {k: {(o,): w for o, w in r.items()} for k, r in rows.items()})
    except ValueError:
        return None
    return lifted if is_valid_model(lifted) else None


def classical_model(d: CausalDistribution) -> EmpiricalModel:
    return EmpiricalModel(d.space, d.outputs, {d.lowerset: d})


def restrict_model(e: EmpiricalModel, cover: Iterable[Iterable[History]]) -> EmpiricalModel:
    """Restriction of ``e`` to a finer cover."""
    cover = canonical_cover(e.space, cover)
    if not refines(cover, e.cover):
        raise ValueError("target cover is not finer than the model's cover")
    comps = {}
    for v in cover:
        src = next(u for u in e.cover if v <= u)
        comps[v] = marginalize(e.components[src], v)
    return EmpiricalModel(e.space, e.outputs, comps)


# -- fractions --------------------------------------------------------------------

class FractionResult(NamedTuple):
    value: Fraction
    decomposition: dict  # CausalFunction -> Fraction


def _radices(space: HistorySpace, outputs: Sequence[int]) -> list[int]:
    return [outputs[i] for i, _ in space.classes]


def _all_keys(space: HistorySpace, outputs: Sequence[int], bound: int) -> np.ndarray:
    radices = _radices(space, outputs)
    total = math.prod(radices)
    if total > bound:
        raise ValueError(f"{total} global causal functions exceed the bound {bound}")
    codes = np.arange(total, dtype=np.int64)
    cols = []
    for r in reversed(radices):
        cols.append(codes % r)
        codes //= r
    return np.stack(cols[::-1], axis=1) if cols else np.zeros((1, 0), dtype=np.int64)


def _supported_keys(e: EmpiricalModel, bound: int) -> np.ndarray:
    """Global keys whose every restriction lies in the support of its component."""
    sp = e.space
    ncls = len(sp.classes)
    comps = []
    for u in e.cover:
        d = e.components[u]
        comps.append((class_map(sp, d.space), list(d.weights)))
    touching: list[list[int]] = [[] for _ in range(ncls)]
    for c, (cmap, _) in enumerate(comps):
        for cls in cmap:
            touching[cls].append(c)
    found: list[tuple[int, ...]] = []
    key = [0] * ncls

    def walk(cls: int, cands: list[list[Key]]) -> None:
        if cls == ncls:
            found.append(tuple(key))
            if len(found) > bound:
                raise ValueError(f"more than {bound} supported global functions")
            return
        for v in range(e.outputs[sp.classes[cls][0]]):
            key[cls] = v
            nxt = list(cands)
            for c in touching[cls]:
                pos = comps[c][0].index(cls)
                nxt[c] = [s for s in cands[c] if s[pos] == v]
                if not nxt[c]:
                    break
            else:
                walk(cls + 1, nxt)

    walk(0, [supp for _, supp in comps])
    return np.array(found, dtype=np.int64).reshape(len(found), ncls)


def _global_keys(e: EmpiricalModel, bound: int) -> np.ndarray:
    if math.prod(_radices(e.space, e.outputs)) <= bound:
        return _all_keys(e.space, e.outputs, bound)
    return _supported_keys(e, bound)


def _encode(keys: np.ndarray, radices: Sequence[int]) -> np.ndarray:
    code = np.zeros(len(keys), dtype=np.int64)
    for j, r in enumerate(radices):
        code = code * r + keys[:, j]
    return code


def _fraction_lp(e: EmpiricalModel, keys: np.ndarray) -> FractionResult:
    sp, outputs = e.space, e.outputs
    alive = np.ones(len(keys), dtype=bool)
    row_ids: list[np.ndarray] = []
    rhs: list[Fraction] = []
    for u in e.cover:
        d = e.components[u]
        cmap = class_map(sp, d.space)
        radices = _radices(d.space, outputs)
        codes = _encode(keys[:, cmap], radices) if cmap else np.zeros(len(keys), dtype=np.int64)
        weight_codes = {}
        for key, w in d.weights.items():
            c = 0
            for v, r in zip(key, radices):
                c = c * r + v
            weight_codes[c] = w
        present = np.fromiter(weight_codes, dtype=np.int64, count=len(weight_codes))
        # functions whose restriction has zero weight cannot carry mass
        alive &= np.isin(codes, present)
        base = len(rhs)
        order = sorted(weight_codes)
        rhs.extend(weight_codes[c] for c in order)
        row_ids.append(_vector_lookup(codes, order, base))
    cols_idx = np.flatnonzero(alive)
    if len(cols_idx) == 0:
        return FractionResult(Fraction(0), {})
    rows = np.stack([r[cols_idx] for r in row_ids], axis=1)
    columns = [{int(r): 1 for r in row} for row in rows]
    res = maximize([1] * len(columns), columns, rhs)
    decomposition = {}
    for j, w in sorted(res.x.items()):
        key = tuple(int(v) for v in keys[cols_idx[j]])
        decomposition[CausalFunction(sp, outputs, key)] = w
    return FractionResult(res.value, decomposition)


def _vector_lookup(codes: np.ndarray, order: Sequence[int], base: int) -> np.ndarray:
    arr = np.array(order, dtype=np.int64)
    pos = np.searchsorted(arr, codes)
    pos = np.clip(pos, 0, len(arr) - 1)
    hit = arr[pos] == codes
    return np.where(hit, pos + base, -1)


def noncontextual_fraction(e: EmpiricalModel, bound: int = MAX_GLOBAL_FUNCTIONS) -> FractionResult:
    """Largest total weight of global causal functions whose restrictions stay below ``e``."""
    return _fraction_lp(e, _global_keys(e, bound))


def contextual_fraction(e: EmpiricalModel, bound: int = MAX_GLOBAL_FUNCTIONS) -> Fraction:
    return 1 - noncontextual_fraction(e, bound).value


def is_noncontextual(e: EmpiricalModel, bound: int = MAX_GLOBAL_FUNCTIONS) -> bool:
    return noncontextual_fraction(e, bound).value == 1


def separable_noncontextual_fraction(e: EmpiricalModel, bound: int = MAX_GLOBAL_FUNCTIONS) -> FractionResult:
    """As :func:`noncontextual_fraction`, with only separable global functions allowed."""
    keys = sorted(separable_keys(e.space, e.outputs))
    if len(keys) > bound:
        raise ValueError(f"{len(keys)} separable functions exceed the bound {bound}")
    arr = np.array(keys, dtype=np.int64).reshape(len(keys), len(e.space.classes))
    return _fraction_lp(e, arr)


def fraction_on_space(e: EmpiricalModel, target: HistorySpace, bound: int = MAX_GLOBAL_FUNCTIONS) -> FractionResult:
    """Largest weight of a mixture of global causal functions on ``target`` lying below ``e``.

    Both models are compared row by row on the shared maximal extended
    histories, so ``e`` need not lift to ``target``.  The decomposition is
    keyed by causal functions on ``target``.
    """
    if set(target.max_ext) != set(e.space.max_ext) or target.events != e.space.events:
        raise ValueError("target must share events and maximal extended histories")
    if count_causal_functions(target, e.outputs) > bound:
        raise ValueError(f"global functions on the target exceed the bound {bound}")
    rows = _standard_rows(e)
    index: dict[tuple[History, History], int] = {}
    rhs: list[Fraction] = []
    for k in sorted(rows, key=history_key):
        for o in sorted(rows[k], key=history_key):
            index[(k, o)] = len(rhs)
            rhs.append(rows[k][o])
    funcs, columns = [], []
    for g in enumerate_causal_functions(target, e.outputs):
        F = extend(g).table
        col = [index.get((k, F[k])) for k in rows]
        if None not in col:
            funcs.append(g)
            columns.append({r: 1 for r in col})
    if not columns:
        return FractionResult(Fraction(0), {})
    res = maximize([1] * len(columns), columns, rhs)
    return FractionResult(res.value, {funcs[j]: w for j, w in sorted(res.x.items())})


def check_certificate(e: EmpiricalModel, result: FractionResult) -> bool:
    """Weights are nonnegative, sum to the value, and re-marginalize to at most ``e``."""
    if any(w < 0 for w in result.decomposition.values()):
        return False
    if sum(result.decomposition.values(), Fraction(0)) != result.value:
        return False
    if not result.decomposition:
        return result.value == 0
    for u in e.cover:
        d = e.components[u]
        cmap = class_map(e.space, d.space)
        acc: dict[Key, Fraction] = {}
        for g, w in result.decomposition.items():
            r = restrict_key(g.values, cmap)
            acc[r] = acc.get(r, Fraction(0)) + w
        if any(w > d.prob(k) for k, w in acc.items()):
            return False
    return True


# -- causal switch spaces -----------------------------------------------------------

class SwitchNode(NamedTuple):
    prefix: History  # all-undefined at the root
    event: int  # event receiving its input at this node
    children: dict  # input value -> SwitchNode or None at leaves


def switch_structure(space: HistorySpace) -> SwitchNode:
    """Decompose ``space`` as a tree of single-event conditional steps.

    Raises ``ValueError`` when the space is not a causal switch space.
    """
    hs = set(space.histories)

    def build(prefix: History) -> SwitchNode | None:
        above = [h for h in hs if leq(prefix, h) and h != prefix]
        if not above:
            return None
        size = bin(dom(prefix)).count("1")
        nxt = [h for h in above if bin(dom(h)).count("1") == size + 1]
        events = {(dom(h) & ~dom(prefix)).bit_length() - 1 for h in nxt}
        if len(events) != 1:
            raise ValueError("space is not of switch form: next event is not unique")
        i = events.pop()
        if {h[i] for h in nxt} != set(range(space.inputs[i])) or len(nxt) != space.inputs[i]:
            raise ValueError("space is not of switch form: an input is missing at a step")
        if any(not any(leq(c, h) for c in nxt) for h in above):
            raise ValueError("space is not of switch form: history skips a step")
        return SwitchNode(prefix, i, {h[i]: build(h) for h in sorted(nxt, key=history_key)})

    root = build((UNDEF,) * space.n)
    if root is None:
        raise ValueError("empty space")
    return root


def _standard_rows(e: EmpiricalModel) -> dict[History, dict[History, Fraction]]:
    rows = {}
    for k in e.space.max_ext:
        d = e.component_at(k)
        row: dict[History, Fraction] = {}
        for f, w in d.items():
            o = extend(f).table[k]
            row[o] = row.get(o, Fraction(0)) + w
        rows[k] = row
    return rows


Segments = list  # list of (Fraction length, dict history -> output)


def _localize(node: SwitchNode, rows: dict, outputs: Sequence[int], coupling: str) -> Segments:
    if node is None:
        return [(Fraction(1), {})]
    i = node.event
    branches = []
    for v, child in node.children.items():
        h = tuple(v if j == i else x for j, x in enumerate(node.prefix))
        ks = [k for k in rows if leq(h, k)]
        ref = rows[ks[0]]
        p = [sum((w for o, w in ref.items() if o[i] == oi), Fraction(0)) for oi in range(outputs[i])]
        for k in ks[1:]:
            q = [sum((w for o, w in rows[k].items() if o[i] == oi), Fraction(0)) for oi in range(outputs[i])]
            if q != p:
                raise ValueError("model signals into an earlier event; it is not a standard model")
        segs = []
        for oi, pi in enumerate(p):
            if not pi:
                continue
            cond = {k: {o: w / pi for o, w in rows[k].items() if o[i] == oi} for k in ks}
            for length, assign in _localize(child, cond, outputs, coupling):
                segs.append((pi * length, {h: oi, **assign}))
        branches.append(segs)
    return _couple(branches, coupling)


def _couple(branches: list[Segments], coupling: str) -> Segments:
    if coupling == "independent":
        out = []
        for combo in itertools.product(*branches):
            w = math.prod((s[0] for s in combo), start=Fraction(1))
            merged = {}
            for _, a in combo:
                merged.update(a)
            out.append((w, merged))
        return out
    if coupling != "comonotone":
        raise ValueError("coupling must be 'comonotone' or 'independent'")
    # common refinement of the branch quantile segments on [0, 1)
    pos = [0] * len(branches)
    left = [b[0][0] for b in branches]
    out = []
    while True:
        step = min(left)
        merged = {}
        for b, p in zip(branches, pos):
            merged.update(b[p][1])
        out.append((step, merged))
        done = False
        for j, b in enumerate(branches):
            left[j] -= step
            if left[j] == 0:
                pos[j] += 1
                if pos[j] == len(b):
                    done = True
                else:
                    left[j] = b[pos[j]][0]
        if done:
            return out


def localize_switch_model(e: EmpiricalModel, coupling: str = "comonotone") -> CausalDistribution:
    """Classical distribution on a causal switch space restricting to the standard model ``e``.

    Follows the recursive conditioning on the first event.  ``coupling``
    chooses how the per-input branches are combined: ``"independent"`` takes
    their product, ``"comonotone"`` aligns their quantile segments, which
    keeps the support small.  Both restrict exactly to ``e``.
    """
    sp = e.space
    if set(e.cover) != set(standard_cover(sp)):
        raise ValueError("localization needs a model on the standard cover")
    root = switch_structure(sp)
    segs = _localize(root, _standard_rows(e), e.outputs, coupling)
    weights: dict[Key, Fraction] = {}
    for w, assign in segs:
        key = tuple(assign[members[0]] for _, members in sp.classes)
        weights[key] = weights.get(key, Fraction(0)) + w
    return CausalDistribution(sp, e.outputs, weights)


def random_standard_model(
    space: HistorySpace, outputs, rng: random.Random, denominator: int = 12
) -> EmpiricalModel:
    """Random standard model on a causal switch space, built event by event.

    Each conditional output distribution is drawn independently with weights
    in multiples of ``1/denominator``, so every standard model with such
    conditionals can occur.
    """
    outputs = normalize_outputs(space, outputs)
    root = switch_structure(space)

    def draw(size: int) -> list[Fraction]:
        cuts = sorted(rng.randint(0, denominator) for _ in range(size - 1))
        bounds = [0, *cuts, denominator]
        return [Fraction(b - a, denominator) for a, b in zip(bounds, bounds[1:])]

    rows: dict[History, dict[History, Fraction]] = {}

    def walk(node: SwitchNode | None, inp: History, out: History, p: Fraction) -> None:
        if node is None:
            row = rows.setdefault(inp, {})
            row[out] = row.get(out, Fraction(0)) + p
            return
        i = node.event
        for v, child in node.children.items():
            probs = draw(outputs[i])
            h_in = tuple(v if j == i else x for j, x in enumerate(inp))
            # a fresh draw per (input history, output history) keeps conditionals arbitrary
            for oi, q in enumerate(probs):
                if q:
                    walk(child, h_in, tuple(oi if j == i else x for j, x in enumerate(out)), p * q)

    walk(root, (UNDEF,) * space.n, (UNDEF,) * space.n, Fraction(1))
    return model_from_rows(space, outputs, {k: {space.label(o): w for o, w in rows[k].items()} for k in rows})


# -- solipsistic contextuality -----------------------------------------------------------

def solipsistic_extension_exists(e: EmpiricalModel) -> bool:
    """Whether some standard-cover model restricts to ``e`` (exact feasibility LP)."""
    sp, outputs = e.space, e.outputs
    std = standard_cover(sp)
    if not refines(e.cover, std):
        raise ValueError("the model's cover must refine the standard cover")
    var_keys: list[tuple[int, Key]] = []
    offsets = []
    funcs = []
    for a, u in enumerate(std):
        sub = sp.subspace(u)
        fs = [f.values for f in enumerate_causal_functions(sub, outputs)]
        offsets.append(len(var_keys))
        funcs.append((sub, fs))
        var_keys.extend((a, key) for key in fs)
    columns: list[dict[int, int]] = [dict() for _ in var_keys]
    rhs: list[Fraction] = []

    def add_row(entries: Iterable[tuple[int, int]], value: Fraction) -> None:
        r = len(rhs)
        rhs.append(value)
        for j, c in entries:
            columns[j][r] = columns[j].get(r, 0) + c

    for a in range(len(std)):
        add_row(((offsets[a] + j, 1) for j in range(len(funcs[a][1]))), Fraction(1))
    for a, b in itertools.combinations(range(len(std)), 2):
        common = std[a] & std[b]
        if not common:
            continue
        groups: dict[Key, list[tuple[int, int]]] = {}
        for side, sign in ((a, 1), (b, -1)):
            sub, fs = funcs[side]
            cmap = class_map(sub, sub.subspace(common))
            for j, key in enumerate(fs):
                groups.setdefault(restrict_key(key, cmap), []).append((offsets[side] + j, sign))
        for entries in groups.values():
            add_row(entries, Fraction(0))
    for v in e.cover:
        a = next(x for x, u in enumerate(std) if v <= u)
        sub, fs = funcs[a]
        cmap = class_map(sub, sub.subspace(v))
        groups = {}
        for j, key in enumerate(fs):
            groups.setdefault(restrict_key(key, cmap), []).append((offsets[a] + j, 1))
        d = e.components[v]
        if any(k not in groups for k in d.weights):
            return False
        for key, entries in groups.items():
            add_row(entries, d.prob(key))
    return find_feasible(columns, rhs).status == "optimal"


def displays_solipsistic_contextuality(e: EmpiricalModel) -> bool:
    return not solipsistic_extension_exists(e)


def witness_model(space: HistorySpace, w: SolipsisticWitness, outputs=2) -> EmpiricalModel:
    """Deterministic fully solipsistic model built from a solipsistic witness.

    On each maximal history's downset every output is ``0`` except the
    output read by ``w.h`` at the witness event, which is ``1``.
    """
    outputs = normalize_outputs(space, outputs)
    if not is_solipsistic_witness(space, w):
        raise ValueError("not a solipsistic contextuality witness for this space")
    if outputs[w.event] < 2:
        raise ValueError("the witness event needs at least two outputs")
    comps = {}
    for u in solipsistic_cover(space):
        sub = space.subspace(u)
        vals = []
        for i, members in sub.classes:
            vals.append(1 if i == w.event and w.h in members else 0)
        comps[u] = CausalDistribution.delta(CausalFunction(sub, outputs, tuple(vals)))
    return EmpiricalModel(space, outputs, comps)


# -- deterministic models -------------------------------------------------------------------

def deterministic_model(space: HistorySpace, family: Mapping[Iterable[History], CausalFunction]) -> EmpiricalModel:
    """Delta components from a compatible family of causal functions on a cover."""
    fam = {frozenset(u): f for u, f in family.items()}
    fs = list(fam.values())
    if not fs:
        raise ValueError("empty family")
    for u, f in fam.items():
        if frozenset(f.space.histories) != u:
            raise ValueError("family member does not live on its lowerset")
    model = EmpiricalModel(space, fs[0].outputs, {u: CausalDistribution.delta(f) for u, f in fam.items()})
    if validate_model(model):
        raise ValueError("family is not compatible")
    return model


def is_deterministic(e: EmpiricalModel) -> bool:
    return all(d.is_delta for d in e.components.values())


def is_globally_deterministic(e: EmpiricalModel) -> bool:
    """Deterministic, and the delta family glues to a causal function on the whole space."""
    if not is_deterministic(e) or validate_model(e):
        return False
    family = {u: next(iter(d.items()))[0] for u, d in e.components.items()}
    return glue_compatible_family(e.space, family) is not None
