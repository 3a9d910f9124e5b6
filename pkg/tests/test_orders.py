import itertools

import pytest

from causalsheaf import (
    classify_pair,
    discrete_order,
    enumerate_orders,
    indiscrete_order,
    is_definite,
    lowersets,
    make_order,
    order_join,
    order_leq,
    order_meet,
    total_order,
)


def brute_preorders(n):
    """Reflexive transitive relations on n points, by filtering all relations."""
    off = [(i, j) for i in range(n) for j in range(n) if i != j]
    found = 0
    for bits in range(1 << len(off)):
        rel = {p for b, p in enumerate(off) if bits >> b & 1}
        if all((i, k) in rel for (i, j) in rel for (j2, k) in rel if j == j2 and i != k):
            found += 1
    return found


@pytest.mark.parametrize("n, expected", [(1, 1), (2, 4), (3, 29)])
def test_preorder_counts_match_filtering(n, expected):
    events = "ABC"[:n]
    assert len(enumerate_orders(events)) == expected == brute_preorders(n)


def test_closure_is_transitive():
    o = make_order("ABC", [("A", "B"), ("B", "C")])
    assert o.leq("A", "C") and not o.leq("C", "A")


def test_classify_pairs():
    o = make_order("ABCD", [("A", "B"), ("C", "D"), ("D", "C")])
    assert classify_pair(o, "A", "B") == "precedes"
    assert classify_pair(o, "B", "A") == "succeeds"
    assert classify_pair(o, "A", "C") == "unrelated"
    assert classify_pair(o, "C", "D") == "indefinite"
    assert classify_pair(o, "A", "A") == "equal"
    assert not is_definite(o) and is_definite(total_order("ABCD"))


def test_lowersets_of_extremes():
    assert len(lowersets(discrete_order("ABC"))) == 8
    assert len(lowersets(total_order("ABC"))) == 4
    assert len(lowersets(indiscrete_order("ABC"))) == 2


def test_lowersets_brute_force():
    for o in enumerate_orders("ABC"):
        brute = set()
        for r in range(4):
            for s in itertools.combinations("ABC", r):
                if all(not o.leq(x, y) or x in s for y in s for x in "ABC"):
                    brute.add(frozenset(s))
        assert set(lowersets(o)) == brute


def test_join_meet_are_bounds():
    orders = enumerate_orders("ABC")
    for a, b in itertools.product(orders, repeat=2):
        j, m = order_join(a, b), order_meet(a, b)
        assert order_leq(a, j) and order_leq(b, j)
        assert order_leq(m, a) and order_leq(m, b)
        ups = [c for c in orders if order_leq(a, c) and order_leq(b, c)]
        assert all(order_leq(j, c) for c in ups)


def test_unknown_event_rejected():
    with pytest.raises(KeyError):
        make_order("AB", [("A", "Z")])
    with pytest.raises(ValueError):
        make_order("AA")
