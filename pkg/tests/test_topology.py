import itertools

import pytest

from oracles import naive_cover_count, naive_lowersets

from causalsheaf import (
    CausalFunction,
    builtin_space,
    canonical_cover,
    classical_cover,
    count_covers,
    cover_hierarchy,
    enumerate_causal_functions,
    enumerate_covers,
    find_solipsistic_witnesses,
    glue_compatible_family,
    is_compatible_family,
    is_cover,
    is_sheaf,
    is_solipsistic_witness,
    refines,
    restrict_function,
    solipsistic_cover,
    space_lowersets,
    standard_cover,
)


@pytest.mark.parametrize("name", ["ternary", "ns2", "middle", "total2", "theta3", "fork"])
def test_lowersets_match_subset_search(name):
    sp = builtin_space(name)
    assert set(space_lowersets(sp)) == set(naive_lowersets(sp.histories))


# [DERIVED] 89 and 384 from the subset-search oracle
@pytest.mark.parametrize("name, expected", [("ternary", 9), ("ns2", 114), ("middle", 89), ("total2", 384)])
def test_cover_counts_match_oracle(name, expected):
    sp = builtin_space(name)
    assert count_covers(sp) == naive_cover_count(sp.histories) == expected


@pytest.mark.parametrize("name, expected", [("ternary", 9), ("ns2", 114), ("middle", 80), ("total2", 380)])
def test_cover_counts_requiring_maximal_histories(name, expected):
    assert count_covers(builtin_space(name), require_maximal=True) == expected


@pytest.mark.parametrize("name", ["ternary", "ns2", "middle", "total2"])
@pytest.mark.parametrize("require_maximal", [False, True])
def test_cover_hierarchy_bounds(name, require_maximal):
    sp = builtin_space(name)
    covers = enumerate_covers(sp, require_maximal=require_maximal)
    assert all(is_cover(sp, c) for c in covers)
    sol, cls = solipsistic_cover(sp), classical_cover(sp)
    assert sol in covers and cls in covers
    assert all(refines(sol, c) and refines(c, cls) for c in covers)
    edges = cover_hierarchy(covers)
    # the Hasse diagram generates the whole refinement order
    reach = {i: {i} for i in range(len(covers))}
    for _ in covers:
        for a, b in edges:
            reach[a] |= reach[b]
    for i, j in itertools.product(range(len(covers)), repeat=2):
        assert (j in reach[i]) == refines(covers[i], covers[j])


def test_standard_cover_of_fork():
    sp = builtin_space("fork")
    cov = standard_cover(sp)
    assert len(cov) == 8 and all(len(u) == 3 for u in cov)


def test_cover_rejects_non_antichain():
    sp = builtin_space("ternary")
    a, b = (0,), (1,)
    assert not is_cover(sp, [{a}, {a, b}, {(2,)}])
    assert is_cover(sp, canonical_cover(sp, [{a, b}, {(2,)}]))


@pytest.mark.parametrize("name", ["theta33", "theta101", "fork", "total3", "switch3"])
def test_sheaf_spaces(name):
    assert is_sheaf(builtin_space(name))


@pytest.mark.parametrize("name", ["theta3", "theta17"])
def test_non_sheaf_spaces(name):
    sp = builtin_space(name)
    assert not is_sheaf(sp)
    assert all(is_solipsistic_witness(sp, w) for w in find_solipsistic_witnesses(sp))


def test_theta17_single_witness():
    sp = builtin_space("theta17")
    (w,) = find_solipsistic_witnesses(sp)
    assert sp.as_dict(w.k) == {"A": 1, "B": 1, "C": 1}
    assert sp.events[w.event] == "C"


def test_theta3_pair_has_no_gluing():
    sp = builtin_space("theta3")
    h = sp.as_history({"A": 0, "B": 0})
    h2 = sp.as_history({"B": 0, "C": 0})
    lam, lam2 = sp.downset(h), sp.downset(h2)
    assert not lam & lam2
    sub, sub2 = sp.subspace(lam), sp.subspace(lam2)
    f = CausalFunction(sub, (2, 2, 2), tuple(1 if sp.events[i] == "B" else 0 for i, _ in sub.classes))
    g = CausalFunction(sub2, (2, 2, 2), tuple(0 for _ in sub2.classes))
    family = {lam: f, lam2: g}
    assert is_compatible_family(family)
    assert glue_compatible_family(sp, family) is None


def brute_gluing_fails(sp):
    """Some compatible pair on two principal downsets has no causal extension to their union."""
    downs = [sp.downset(h) for h in sp.histories]
    for u, v in itertools.combinations(downs, 2):
        union = u | v
        glued = list(enumerate_causal_functions(sp.subspace(union), 2))
        restricted = {(restrict_function(g, u).values, restrict_function(g, v).values) for g in glued}
        for f in enumerate_causal_functions(sp.subspace(u), 2):
            for g in enumerate_causal_functions(sp.subspace(v), 2):
                common = u & v
                if common and restrict_function(f, common) != restrict_function(g, common):
                    continue
                if (f.values, g.values) not in restricted:
                    return True
    return False


@pytest.mark.parametrize("name", ["theta3", "theta17", "theta33", "fork"])
def test_sheaf_matches_brute_gluing(name):
    sp = builtin_space(name)
    assert is_sheaf(sp) == (not brute_gluing_fails(sp))
