"""JSON, CSV and DOT serialization.

JSON layouts
------------
Order::

    {"events": ["A", "B", "C"], "pairs": [["A", "B"], ["A", "C"]]}

Space, either explicit or induced by an order::

    {"events": ["A", "B"], "inputs": [2, 2], "histories": ["{A:0}", "{A:0,B:1}"]}
    {"order": {...}, "inputs": 2}

Function::

    {"space": {...}, "outputs": [2, 2], "assignments": [["{A:0}", "A", 1], ...]}

one entry per tip class, naming a representative history, its tip event and
the output there.

Model::

    {"space": {...}, "outputs": 2, "cover": "standard" | [["{A:0}", ...], ...],
     "rows": {"00": {"01": "1/2", "10": "1/2"}, ...}}

Row and output labels follow :func:`causalsheaf.empirical.model_rows`.
Probabilities are written as reduced fraction strings.
"""

from __future__ import annotations

import csv
import io as _io
import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .empirical import EmpiricalModel, model_from_rows, model_rows, to_fraction
from .functions import CausalFunction, normalize_outputs
from .histories import HistorySpace, history_key, induced_space, leq
from .orders import CausalOrder, make_order
from .topology import canonical_cover, standard_cover

__all__ = [
    "FormatError",
    "format_fraction",
    "parse_history",
    "order_to_json",
    "order_from_json",
    "space_to_json",
    "space_from_json",
    "function_to_json",
    "function_from_json",
    "model_to_json",
    "model_from_json",
    "dumps",
    "load_json",
    "model_to_csv",
    "order_to_dot",
    "space_to_dot",
    "cover_hierarchy_to_dot",
]


class FormatError(ValueError):
    """Malformed serialized input."""


def format_fraction(x: Fraction, decimals: int = 6) -> str:
    """``"1/2 (0.5)"``; integers print bare."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x} ({round(float(x), decimals)})"


def _require(obj: Mapping, key: str) -> Any:
    if not isinstance(obj, Mapping) or key not in obj:
        raise FormatError(f"missing field {key!r}")
    return obj[key]


def parse_history(space_events: Sequence[str], text: str) -> dict[str, int]:
    text = text.strip()
    if not (text.startswith("{") and text.endswith("}")):
        raise FormatError(f"history {text!r} must look like {{A:0,B:1}}")
    out = {}
    for part in filter(None, (p.strip() for p in text[1:-1].split(","))):
        try:
            e, v = part.split(":")
            out[e.strip()] = int(v)
        except ValueError:
            raise FormatError(f"bad history entry {part!r}") from None
        if e.strip() not in space_events:
            raise FormatError(f"unknown event {e.strip()!r}")
    return out


# -- orders -----------------------------------------------------------------

def order_to_json(order: CausalOrder) -> dict:
    return {
        "events": list(order.events),
        "pairs": [[order.events[i], order.events[j]] for i, j in order.pairs()],
    }


def order_from_json(obj: Mapping) -> CausalOrder:
    events = _require(obj, "events")
    pairs = obj.get("pairs", [])
    try:
        return make_order(list(events), [tuple(p) for p in pairs])
    except (KeyError, ValueError, TypeError) as exc:
        raise FormatError(f"bad order: {exc}") from None


# -- spaces -----------------------------------------------------------------

def space_to_json(space: HistorySpace) -> dict:
    return {
        "events": list(space.events),
        "inputs": list(space.inputs),
        "histories": [space.fmt(h) for h in space.histories],
    }


def space_from_json(obj: Mapping) -> HistorySpace:
    if isinstance(obj, Mapping) and "order" in obj:
        order = order_from_json(obj["order"])
        inputs = obj.get("inputs", 2)
        try:
            return induced_space(order, inputs)
        except (KeyError, ValueError, TypeError) as exc:
            raise FormatError(f"bad inputs: {exc}") from None
    events = list(_require(obj, "events"))
    inputs = _require(obj, "inputs")
    if isinstance(inputs, int):
        inputs = [inputs] * len(events)
    hs = []
    for h in _require(obj, "histories"):
        hs.append(parse_history(events, h) if isinstance(h, str) else h)
    try:
        return HistorySpace(events, inputs, hs)
    except (KeyError, ValueError, TypeError) as exc:
        raise FormatError(f"bad space: {exc}") from None


# -- functions --------------------------------------------------------------

def function_to_json(f: CausalFunction) -> dict:
    sp = f.space
    rows = []
    for (i, members), v in zip(sp.classes, f.values):
        rows.append([sp.fmt(members[0]), sp.events[i], v])
    return {"space": space_to_json(sp), "outputs": list(f.outputs), "assignments": rows}


def function_from_json(obj: Mapping, space: HistorySpace | None = None) -> CausalFunction:
    sp = space if space is not None else space_from_json(_require(obj, "space"))
    outputs = normalize_outputs(sp, _require(obj, "outputs"))
    given: dict[int, int] = {}
    for entry in _require(obj, "assignments"):
        try:
            text, event, value = entry
            h = sp.as_history(parse_history(sp.events, text))
            cls = sp.class_of[(h, sp.event_index(event))]
        except (KeyError, ValueError, TypeError):
            raise FormatError(f"bad assignment {entry!r}") from None
        if given.setdefault(cls, int(value)) != int(value):
            raise FormatError(f"conflicting outputs for the class of {entry!r}")
    if len(given) != len(sp.classes):
        raise FormatError("every tip class needs an output")
    try:
        return CausalFunction(sp, outputs, tuple(given[c] for c in range(len(sp.classes))))
    except ValueError as exc:
        raise FormatError(str(exc)) from None


# -- models -----------------------------------------------------------------

def _plain_outputs(outputs: Sequence[int]) -> int | list[int]:
    return outputs[0] if len(set(outputs)) == 1 else list(outputs)


def model_to_json(e: EmpiricalModel) -> dict:
    sp = e.space
    if e.cover == standard_cover(sp):
        cover: str | list = "standard"
    else:
        cover = [[sp.fmt(h) for h in sorted(u, key=history_key)] for u in e.cover]
    rows = {r: {o: str(p) for o, p in entries.items()} for r, entries in model_rows(e).items()}
    return {"space": space_to_json(sp), "outputs": _plain_outputs(e.outputs), "cover": cover, "rows": rows}


def model_from_json(obj: Mapping, space: HistorySpace | None = None) -> EmpiricalModel:
    sp = space if space is not None else space_from_json(_require(obj, "space"))
    rows = _require(obj, "rows")
    if not isinstance(rows, Mapping):
        raise FormatError("rows must be an object")
    try:
        parsed = {r: {o: to_fraction(p) for o, p in entries.items()} for r, entries in rows.items()}
        e = model_from_rows(sp, _require(obj, "outputs"), parsed)
    except (KeyError, ValueError, TypeError) as exc:
        raise FormatError(f"bad model: {exc}") from None
    cover = obj.get("cover", "standard")
    if cover == "standard":
        expected = standard_cover(sp)
    else:
        expected = canonical_cover(sp, ([sp.as_history(parse_history(sp.events, h)) for h in u] for u in cover))
    if e.cover != expected:
        raise FormatError("rows do not match the declared cover")
    return e


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=False)


def load_json(path: str | Path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: {exc}") from None


# -- CSV --------------------------------------------------------------------

def model_to_csv(e: EmpiricalModel) -> str:
    """Wide table: one line per row label, one column per output label seen anywhere."""
    rows = model_rows(e)
    columns = sorted({o for entries in rows.values() for o in entries})
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["".join(e.space.events), *columns])
    for r, entries in rows.items():
        w.writerow([r, *(str(entries.get(c, 0)) for c in columns)])
    return buf.getvalue()


# -- DOT --------------------------------------------------------------------

def _quote(s: str) -> str:
    return '"' + s.replace('"', r"\"") + '"'


def _hasse(n: int, less: Any) -> list[tuple[int, int]]:
    return [
        (i, j)
        for i in range(n)
        for j in range(n)
        if less(i, j) and not any(less(i, m) and less(m, j) for m in range(n))
    ]


def order_to_dot(order: CausalOrder) -> str:
    """Hasse diagram of the quotient order; equivalent events share a node."""
    classes = order.equivalence_classes()
    names = ["".join(order.events[i] for i in c) for c in classes]
    edges = _hasse(len(classes), lambda a, b: a != b and order.leq(classes[a][0], classes[b][0]))
    lines = ["digraph order {", "  rankdir=BT;"]
    lines += [f"  {_quote(n)};" for n in names]
    lines += [f"  {_quote(names[a])} -> {_quote(names[b])};" for a, b in edges]
    lines.append("}")
    return "\n".join(lines) + "\n"


def space_to_dot(space: HistorySpace, extended: bool = False) -> str:
    """Hasse diagram of the histories (or of the extended histories) under extension."""
    hs = list(space.ext if extended else space.histories)
    names = [space.fmt(h) for h in hs]
    edges = _hasse(len(hs), lambda a, b: a != b and leq(hs[a], hs[b]))
    lines = ["digraph space {", "  rankdir=BT;", "  node [shape=box];"]
    for h, name in zip(hs, names):
        extra = "" if h in space.index else ", style=dashed"
        lines.append(f"  {_quote(name)} [label={_quote(name)}{extra}];")
    lines += [f"  {_quote(names[a])} -> {_quote(names[b])};" for a, b in edges]
    lines.append("}")
    return "\n".join(lines) + "\n"


def cover_hierarchy_to_dot(space: HistorySpace, covers: Sequence[Iterable[frozenset]], edges: Iterable[tuple[int, int]]) -> str:
    """Refinement diagram; node ``c<i>`` is ``covers[i]``, arrows point from finer to coarser."""
    lines = ["digraph covers {", "  rankdir=BT;", "  node [shape=box, fontsize=9];"]
    for i, cover in enumerate(covers):
        parts = []
        for u in cover:
            tops = [h for h in u if not any(h != g and leq(h, g) for g in u)]
            parts.append(" ".join(space.fmt(h) for h in sorted(tops, key=history_key)))
        label = f"#{i}\\n" + "\\n".join(parts)
        lines.append(f"  c{i} [label={_quote(label)}];")
    lines += [f"  c{a} -> c{b};" for a, b in edges]
    lines.append("}")
    return "\n".join(lines) + "\n"
