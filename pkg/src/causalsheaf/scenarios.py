"""Built-in spaces and worked empirical scenarios, loaded from packaged JSON.

Each :class:`Scenario` carries an ``expected`` map of named claims.  Claim
names are looked up in :data:`QUANTITIES`; a name may carry an argument
after a colon, e.g. ``"fraction_on:discrete3"`` or
``"parity_sum:011,101,110"`` (row labels separated by commas, or by
semicolons when the labels contain commas themselves).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Any, Callable

from .empirical import (
    CausalDistribution,
    EmpiricalModel,
    classical_model,
    fraction_on_space,
    is_deterministic,
    is_valid_model,
    lift_model,
    localize_switch_model,
    model_from_rows,
    model_rows,
    noncontextual_fraction,
    separable_noncontextual_fraction,
    restrict_model,
    solipsistic_extension_exists,
    to_fraction,
    witness_model,
)
from .functions import CausalFunction, find_inseparability_witness
from .histories import HistorySpace
from .io import model_from_json, space_from_json
from .topology import find_solipsistic_witnesses, glue_compatible_family, is_sheaf, standard_cover

__all__ = [
    "Scenario",
    "SCENARIO_NAMES",
    "QUANTITIES",
    "builtin_space",
    "builtin_space_names",
    "scenario",
    "evaluate",
    "check_expected",
    "fork_lift_targets",
    "parity_sum",
]


def _load(name: str) -> dict:
    return json.loads(resources.files(__package__).joinpath("data", name).read_text())


@lru_cache(maxsize=None)
def _space_data() -> dict:
    return _load("spaces.json")


@lru_cache(maxsize=None)
def _scenario_data() -> dict:
    return _load("scenarios.json")


SCENARIO_NAMES = (
    "causal_fork",
    "classical_switch",
    "causal_cross",
    "leggett_garg",
    "bfw",
    "contextual_triangle",
    "theta3_nonsheaf",
    "theta17_witness",
    "cswap_inseparable",
)


def builtin_space_names() -> list[str]:
    return sorted(_space_data())


@lru_cache(maxsize=None)
def builtin_space(name: str) -> HistorySpace:
    data = _space_data()
    if name not in data:
        raise KeyError(f"unknown builtin space {name!r}; choose from {', '.join(sorted(data))}")
    return space_from_json(data[name])


@dataclass(frozen=True)
class Scenario:
    name: str
    space: HistorySpace
    model: EmpiricalModel
    expected: dict[str, Any] = field(default_factory=dict)
    functions: dict[str, tuple[Fraction, CausalFunction]] = field(default_factory=dict)


@lru_cache(maxsize=None)
def scenario(name: str) -> Scenario:
    data = _scenario_data()
    if name not in data:
        raise KeyError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIO_NAMES)}")
    entry = data[name]
    space = builtin_space(entry["space"])
    if "witness" in entry:
        w = find_solipsistic_witnesses(space)[entry["witness"]]
        model = witness_model(space, w, entry["outputs"])
    else:
        model = model_from_json(entry, space)
    if not is_valid_model(model):
        raise ValueError(f"scenario {name!r} does not validate on its space")
    expected = {k: (to_fraction(v) if isinstance(v, str) else v) for k, v in entry["expected"].items()}
    functions = {
        fname: (to_fraction(item["weight"]), _global_function(space, entry["outputs"], item["rows"]))
        for fname, item in entry.get("functions", {}).items()
    }
    return Scenario(name, space, model, expected, functions)


def _global_function(space: HistorySpace, outputs, rows: dict) -> CausalFunction:
    """Glue a deterministic table into one causal function on the whole space."""
    e = model_from_rows(space, outputs, rows)
    if not is_deterministic(e):
        raise ValueError("function tables must be deterministic")
    family = {u: next(iter(d.items()))[0] for u, d in e.components.items()}
    f = glue_compatible_family(space, family)
    if f is None:
        raise ValueError("deterministic table does not glue to a causal function")
    return f


def _is_mixture(s: Scenario) -> bool:
    if not s.functions:
        return False
    d = CausalDistribution.from_functions({f: w for w, f in s.functions.values()})
    return restrict_model(classical_model(d), s.model.cover).components == s.model.components


def fork_lift_targets() -> dict[str, HistorySpace]:
    """Spaces below the fork space to which the fork model lifts.

    Two are induced by orders in which C precedes only one of A, B; the
    other two are non-tight spaces with exactly the causal functions of the
    discrete space, one below each of those.
    """
    return {n: builtin_space(n) for n in ("fork_a_cb", "fork_b_ca", "fork_class2_a", "fork_class2_b")}


def parity_sum(e: EmpiricalModel, rows: list[str]) -> Fraction:
    """Sum over the given rows of the expected value of ``(-1)`` to the xor of all outputs."""
    table = model_rows(e)
    total = Fraction(0)
    for r in rows:
        for out, p in table[r].items():
            bits = sum(int(c) for c in out if c.isdigit())
            total += p if bits % 2 == 0 else -p
    return total


def _split_rows(arg: str) -> list[str]:
    return arg.split(";") if ";" in arg else arg.split(",")


QUANTITIES: dict[str, Callable[[Scenario, str], Any]] = {
    "valid": lambda s, _: is_valid_model(s.model),
    "standard_cover": lambda s, _: s.model.cover == standard_cover(s.space),
    "causally_complete": lambda s, _: s.space.is_causally_complete,
    "is_sheaf": lambda s, _: is_sheaf(s.space),
    "deterministic": lambda s, _: is_deterministic(s.model),
    "noncontextual_fraction": lambda s, _: noncontextual_fraction(s.model).value,
    "separable_noncontextual_fraction": lambda s, _: separable_noncontextual_fraction(s.model).value,
    "fraction_on": lambda s, arg: fraction_on_space(s.model, builtin_space(arg)).value,
    "lifts_to": lambda s, arg: lift_model(s.model, builtin_space(arg)) is not None,
    "parity_sum": lambda s, arg: parity_sum(s.model, _split_rows(arg)),
    "localized_functions": lambda s, _: len(localize_switch_model(s.model).weights),
    "is_mixture": lambda s, _: _is_mixture(s),
    "witnessed_functions": lambda s, _: sum(find_inseparability_witness(f) is not None for _, f in s.functions.values()),
    "solipsistic_witnesses": lambda s, _: len(find_solipsistic_witnesses(s.space)),
    "solipsistic_extension": lambda s, _: solipsistic_extension_exists(s.model),
}


def evaluate(s: Scenario, claim: str) -> Any:
    name, _, arg = claim.partition(":")
    if name not in QUANTITIES:
        raise KeyError(f"unknown claim {claim!r}")
    return QUANTITIES[name](s, arg)


def check_expected(s: Scenario) -> dict[str, tuple[Any, Any]]:
    """Claims whose computed value differs from the expected one, as ``claim -> (expected, got)``."""
    bad = {}
    for claim, want in s.expected.items():
        got = evaluate(s, claim)
        if got != want:
            bad[claim] = (want, got)
    return bad
