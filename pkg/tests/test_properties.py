"""Structural properties checked exhaustively or on seeded random samples."""

import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from causalsheaf import (
    CausalDistribution,
    ExtendedFunction,
    builtin_space,
    builtin_space_names,
    compose_conditional,
    compose_sequential,
    count_causal_functions,
    enumerate_causal_functions,
    enumerate_orders,
    extend,
    factor_conditional,
    factor_sequential,
    induced_space,
    is_consistent,
    is_continuous,
    lowersets,
    make_order,
    marginalize,
    order_join,
    order_leq,
    order_meet,
    parallel_compose,
    prime,
    sequential_compose,
    single_event_space,
)

SEED = 20221013


def small_spaces():
    return [n for n in builtin_space_names() if count_causal_functions(builtin_space(n), 2) <= 2**10]


@pytest.mark.parametrize("name", small_spaces())
def test_extend_prime_exhaustive(name):
    sp = builtin_space(name)
    seen = set()
    for f in enumerate_causal_functions(sp, 2):
        F = extend(f)
        assert prime(F) == f
        seen.add(tuple(sorted(F.table.items())))
    assert len(seen) == count_causal_functions(sp, 2)


def _random_function(sp, rng):
    fs = enumerate_causal_functions(sp, 2)
    return next(itertools.islice(fs, rng.randrange(count_causal_functions(sp, 2)), None))


def _random_extended(sp, rng, flip):
    base = extend(_random_function(sp, rng))
    table = dict(base.table)
    for k in rng.sample(sorted(table), min(flip, len(table))):
        table[k] = tuple(v if v == -1 else rng.randrange(2) for v in table[k])
    return ExtendedFunction(sp, base.outputs, table)


def test_consistent_iff_continuous_on_random_maps():
    rng = random.Random(SEED)
    names = ["theta3", "theta7", "theta17", "theta33", "fork", "total2", "ternary"]
    agree_true = agree_false = 0
    for _ in range(1000):
        sp = builtin_space(rng.choice(names))
        F = _random_extended(sp, rng, rng.randrange(4))
        c = is_consistent(F)
        assert c == is_continuous(F)
        agree_true += c
        agree_false += not c
    # both branches of the equivalence are exercised
    assert agree_true > 50 and agree_false > 50


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 5), min_size=256, max_size=256))
def test_marginalization_functorial(weights):
    sp = builtin_space("theta33")
    fs = list(enumerate_causal_functions(sp, 2))
    d = CausalDistribution(sp, (2, 2, 2), {f.values: w for f, w in zip(fs, weights)})
    u = frozenset(h for h in sp.histories if h[2] == -1)
    v = frozenset(h for h in u if h[1] == -1)
    assert marginalize(marginalize(d, u), v) == marginalize(d, v)
    assert marginalize(d, v).total == d.total == sum(weights)


def test_marginal_of_point_mass_is_point_mass():
    sp = builtin_space("fork")
    u = frozenset(h for h in sp.histories if h[0] == -1)
    for f in itertools.islice(enumerate_causal_functions(sp, 2), 0, 128, 7):
        m = marginalize(CausalDistribution.delta(f), u)
        assert list(m.weights.values()) == [Fraction(1)]


def test_fork_factorization_is_bijective():
    c = single_event_space("C", 2)
    ab = parallel_compose(single_event_space("A", 2), single_event_space("B", 2))
    sp = sequential_compose(c, ab)
    fork = builtin_space("fork")
    named = lambda space: {frozenset(space.as_dict(h).items()) for h in space.histories}
    assert named(sp) == named(fork)
    pieces = set()
    for f in enumerate_causal_functions(sp, 2):
        f0, fam = factor_sequential(f, c, ab)
        assert compose_sequential(sp, f0, fam) == f
        pieces.add((f0.values, tuple(fam[k].values for k in sorted(fam))))
    assert len(pieces) == count_causal_functions(sp, 2) == 2**10


def test_switch_factorization_count():
    a = single_event_space("A", 2)
    bc = induced_space(make_order("BC", [("B", "C"), ("C", "B")]), 2)
    sp = builtin_space("switch3")
    branches = {k: bc for k in a.max_ext}
    rng = random.Random(SEED)
    fs = list(enumerate_causal_functions(bc, 2))
    for _ in range(300):
        f0 = next(itertools.islice(enumerate_causal_functions(a, 2), rng.randrange(4), None))
        fam = {k: rng.choice(fs) for k in branches}
        f = compose_conditional(sp, f0, fam)
        g0, gfam = factor_conditional(f, a, branches)
        assert g0 == f0 and gfam == fam
    assert count_causal_functions(a, 2) * len(fs) ** 2 == count_causal_functions(sp, 2) == 262144


def test_lowerset_contravariance_exhaustive():
    orders = enumerate_orders(list("ABC"))
    assert len(orders) == 29
    lsets = {o: set(lowersets(o)) for o in orders}
    for a, b in itertools.product(orders, repeat=2):
        assert order_leq(a, b) == (lsets[b] <= lsets[a])
        assert lsets[order_join(a, b)] == lsets[a] & lsets[b]
        assert lsets[order_meet(a, b)] >= lsets[a] | lsets[b]
