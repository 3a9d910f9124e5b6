"""Command-line entry point: ``causalsheaf <verb> ...``.

Exit codes: 0 success, 1 semantic failure (invalid space or model, failed
claim), 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import itertools
import random
import sys
from pathlib import Path
from typing import Sequence

from . import empirical as emp
from . import functions as fn
from . import io
from . import orders as od
from . import scenarios as sc
from . import topology as top
from .histories import HistorySpace, induced_space

OK, FAIL, USAGE = 0, 1, 2

DEFAULT_SEED = 20221013


class UsageError(Exception):
    pass


def _yn(b: bool) -> str:
    return "yes" if b else "no"


def _write(path: str, text: str) -> None:
    Path(path).write_text(text)
    print(f"wrote {path}")


def _load_space(args) -> HistorySpace:
    if args.builtin:
        try:
            return sc.builtin_space(args.builtin)
        except KeyError as exc:
            raise UsageError(exc.args[0]) from None
    if not args.source:
        raise UsageError("give a space file or --builtin NAME")
    obj = io.load_json(args.source)
    if isinstance(obj, dict) and "space" in obj and "rows" in obj:
        obj = obj["space"]
    return io.space_from_json(obj)


def _load_model(args) -> emp.EmpiricalModel:
    if args.builtin:
        try:
            return sc.scenario(args.builtin).model
        except KeyError as exc:
            raise UsageError(exc.args[0]) from None
    if not args.source:
        raise UsageError("give a model file or --builtin NAME")
    return io.model_from_json(io.load_json(args.source))


def _outputs(space: HistorySpace, value: str | None):
    if value is None:
        return 2
    parts = [int(v) for v in value.split(",")]
    return parts[0] if len(parts) == 1 else parts


# -- verbs -------------------------------------------------------------------

def cmd_space(args) -> int:
    space = _load_space(args)
    status = OK
    if args.validate:
        bad = space.violations()
        if bad:
            for v in bad:
                print(f"not join-prime: {space.fmt(v.history)} = {space.fmt(v.left)} v {space.fmt(v.right)}")
            status = FAIL
        else:
            print("valid")
    if args.describe or not (args.validate or args.dot):
        print(
            f"histories={len(space)} ext={len(space.ext)} tight={_yn(space.is_tight)} "
            f"complete={_yn(space.is_causally_complete)} free_choice={_yn(space.has_free_choice)}"
        )
        for event, classes in space.constraint_classes().items():
            shown = ["{" + " ".join(space.fmt(h) for h in members) + "}" for members in classes]
            print(f"  {event}: {len(classes)} tip classes {' '.join(shown)}")
    if args.dot:
        _write(args.dot, io.space_to_dot(space, extended=args.ext))
    return status


def cmd_functions(args) -> int:
    space = _load_space(args)
    outputs = _outputs(space, args.outputs)
    if args.separable_count:
        print(fn.count_separable(space, outputs))
    elif args.list is not None:
        for f in itertools.islice(fn.enumerate_causal_functions(space, outputs), args.list):
            print(" ".join(f"{space.fmt(members[0])}->{space.events[i]}:{v}" for (i, members), v in zip(space.classes, f.values)))
    else:
        print(fn.count_causal_functions(space, outputs))
    return OK


def cmd_covers(args) -> int:
    space = _load_space(args)
    covers = top.enumerate_covers(space, require_maximal=args.require_maximal)
    if args.list:
        for i, cover in enumerate(covers):
            parts = [" ".join(space.fmt(h) for h in sorted(u, key=lambda h: space.index[h])) for u in cover]
            print(f"#{i}: " + " | ".join(parts))
    if args.hierarchy_dot:
        _write(args.hierarchy_dot, io.cover_hierarchy_to_dot(space, covers, top.cover_hierarchy(covers)))
    if args.count or not (args.list or args.hierarchy_dot):
        print(len(covers))
    return OK


def cmd_model(args) -> int:
    if args.random:
        space = sc.builtin_space(args.random) if not Path(args.random).exists() else io.space_from_json(io.load_json(args.random))
        e = emp.random_standard_model(space, _outputs(space, args.outputs), random.Random(args.seed))
        print(io.dumps(io.model_to_json(e)))
        return OK
    e = _load_model(args)
    status = OK
    acted = False
    if args.validate:
        acted = True
        problems = emp.validate_model(e)
        for p in problems:
            print(p)
        print("valid" if not problems else "invalid")
        status = FAIL if problems else status
    if args.fraction:
        acted = True
        r = emp.noncontextual_fraction(e)
        print(f"noncontextual={r.value} contextual={1 - r.value}")
    if args.separable_fraction:
        acted = True
        r = emp.separable_noncontextual_fraction(e)
        print(f"separable_noncontextual={r.value}")
    if args.solipsistic_check:
        acted = True
        if emp.solipsistic_extension_exists(e):
            print("standard extension exists")
        else:
            print("no standard extension")
    if args.localize:
        acted = True
        d = emp.localize_switch_model(e, args.coupling)
        for f, w in d.items():
            rows = emp.row_of_function(f)
            print(f"{io.format_fraction(w)}  " + ",".join(e.space.label(o) for o in rows))
    if args.csv:
        acted = True
        print(io.model_to_csv(e), end="")
    if args.json or not acted:
        print(io.dumps(io.model_to_json(e)))
    return status


def cmd_scenario(args) -> int:
    if args.list or not args.name:
        for name in sc.SCENARIO_NAMES:
            print(name)
        return OK
    try:
        s = sc.scenario(args.name)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    print(f"{s.name}: {len(s.space)} histories, {len(s.model.cover)} contexts")
    status = OK
    for claim, want in s.expected.items():
        got = sc.evaluate(s, claim)
        mark = "ok" if got == want else "MISMATCH"
        status = status if got == want else FAIL
        print(f"  {claim} = {got} [{mark}]")
    if args.csv:
        print(io.model_to_csv(s.model), end="")
    return status


def _parse_relations(events: str, text: str | None) -> od.CausalOrder:
    pairs = []
    for part in filter(None, (p.strip() for p in (text or "").split(","))):
        chain = [x.strip() for x in part.split("<")]
        if len(chain) < 2 or any(not x for x in chain):
            raise UsageError(f"bad relation {part!r}; write A<B or A<B<C")
        pairs.extend(zip(chain, chain[1:]))
    try:
        return od.make_order(list(events), pairs)
    except (KeyError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def cmd_orders(args) -> int:
    if args.count or args.list:
        orders = od.enumerate_orders(list(args.events))
        if args.list:
            for o in orders:
                print(o)
        if args.count:
            print(len(orders))
        return OK
    order = io.order_from_json(io.load_json(args.source)) if args.source else _parse_relations(args.events, args.relations)
    print(order)
    if args.classify:
        a, b = args.classify
        print(f"{a} {od.classify_pair(order, a, b)} {b}")
    if args.lowersets:
        for s in od.lowersets(order):
            print("{" + ",".join(sorted(s, key=order.events.index)) + "}")
    if args.dot:
        _write(args.dot, io.order_to_dot(order))
    if args.space:
        space = induced_space(order, args.inputs)
        print(io.dumps(io.space_to_json(space)))
    return OK


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="causalsheaf", description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed for randomized commands")
    sub = p.add_subparsers(dest="verb", required=True)

    def source(q, what: str) -> None:
        q.add_argument("source", nargs="?", help=f"{what} JSON file")
        q.add_argument("--builtin", metavar="NAME", help=f"builtin {what} name")

    q = sub.add_parser("space", help="inspect a space of input histories")
    source(q, "space")
    q.add_argument("--validate", action="store_true")
    q.add_argument("--describe", action="store_true")
    q.add_argument("--dot", metavar="OUT")
    q.add_argument("--ext", action="store_true", help="draw extended histories in DOT output")
    q.set_defaults(run=cmd_space)

    q = sub.add_parser("functions", help="count or list causal functions")
    source(q, "space")
    q.add_argument("--outputs", help="output set size, or comma-separated sizes per event")
    g = q.add_mutually_exclusive_group()
    g.add_argument("--count", action="store_true")
    g.add_argument("--list", type=int, metavar="LIMIT")
    g.add_argument("--separable-count", action="store_true")
    q.set_defaults(run=cmd_functions)

    q = sub.add_parser("covers", help="enumerate covers of a space")
    source(q, "space")
    q.add_argument("--count", action="store_true")
    q.add_argument("--list", action="store_true")
    q.add_argument("--hierarchy-dot", metavar="OUT")
    q.add_argument("--require-maximal", action="store_true", help="only open sets containing a maximal history")
    q.set_defaults(run=cmd_covers)

    q = sub.add_parser("model", help="validate and analyse an empirical model")
    source(q, "model")
    q.add_argument("--validate", action="store_true")
    q.add_argument("--fraction", action="store_true")
    q.add_argument("--separable-fraction", action="store_true")
    q.add_argument("--solipsistic-check", action="store_true")
    q.add_argument("--localize", action="store_true")
    q.add_argument("--coupling", choices=["comonotone", "independent"], default="comonotone")
    q.add_argument("--csv", action="store_true")
    q.add_argument("--json", action="store_true")
    q.add_argument("--random", metavar="SPACE", help="print a random standard model on a builtin space or space file")
    q.add_argument("--outputs")
    q.set_defaults(run=cmd_model)

    q = sub.add_parser("scenario", help="load a worked scenario and check its claims")
    q.add_argument("name", nargs="?")
    q.add_argument("--list", action="store_true")
    q.add_argument("--csv", action="store_true")
    q.set_defaults(run=cmd_scenario)

    q = sub.add_parser("orders", help="causal orders on a few events")
    q.add_argument("source", nargs="?", help="order JSON file")
    q.add_argument("--events", default="ABC")
    q.add_argument("--relations", help="comma-separated chains such as A<B,C<B")
    q.add_argument("--count", action="store_true", help="count all preorders on the events")
    q.add_argument("--list", action="store_true")
    q.add_argument("--classify", nargs=2, metavar=("A", "B"))
    q.add_argument("--lowersets", action="store_true")
    q.add_argument("--dot", metavar="OUT")
    q.add_argument("--space", action="store_true", help="print the induced space as JSON")
    q.add_argument("--inputs", type=int, default=2)
    q.set_defaults(run=cmd_orders)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.run(args)
    except (UsageError, io.FormatError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FAIL


if __name__ == "__main__":
    sys.exit(main())
