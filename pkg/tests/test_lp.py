import random
from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import linprog

from causalsheaf.lp import find_feasible, maximize


def as_columns(A):
    return [{r: A[r][j] for r in range(len(A)) if A[r][j]} for j in range(len(A[0]))]


def test_textbook_problem():
    res = maximize([1, 1], as_columns([[1, 2], [3, 1]]), [4, 6])
    assert res.status == "optimal"
    assert res.value == Fraction(14, 5)
    assert res.x == {0: Fraction(8, 5), 1: Fraction(6, 5)}


def test_duals_certify_optimum():
    A = [[1, 2], [3, 1]]
    b = [4, 6]
    res = maximize([1, 1], as_columns(A), b)
    y = res.duals
    assert all(v >= 0 for v in y)
    assert sum(yi * bi for yi, bi in zip(y, b)) == res.value
    for j in range(2):
        assert sum(y[r] * A[r][j] for r in range(2)) >= 1


def test_unbounded():
    assert maximize([1], [{0: -1}], [1]).status == "unbounded"


def test_negative_rhs_rejected():
    with pytest.raises(ValueError):
        maximize([1], [{0: 1}], [-1])


def test_feasibility():
    ok = find_feasible([{0: 1, 1: 1}, {0: 1}], [1, Fraction(1, 3)])
    assert ok.status == "optimal" and ok.x == {0: Fraction(1, 3), 1: Fraction(2, 3)}
    bad = find_feasible([{0: 1}, {0: 1}], [-1])
    assert bad.status == "infeasible"


def test_degenerate_cycling_example():
    # classic cycling instance; Bland fallback must terminate at the optimum
    A = [
        [Fraction(1, 4), -8, -1, 9],
        [Fraction(1, 2), -12, Fraction(-1, 2), 3],
        [0, 0, 1, 0],
    ]
    res = maximize([Fraction(3, 4), -20, Fraction(1, 2), -6], as_columns(A), [0, 0, 1], method="simplex")
    assert res.value == Fraction(5, 4)


@pytest.mark.parametrize("seed", range(20))
def test_random_packing_lps_match_float_solver(seed):
    rng = random.Random(seed)
    m, n = rng.randint(2, 8), rng.randint(2, 12)
    A = [[rng.randint(0, 4) for _ in range(n)] for _ in range(m)]
    for j in range(n):
        A[rng.randrange(m)][j] += 1  # keep the problem bounded
    b = [rng.randint(1, 10) for _ in range(m)]
    c = [rng.randint(-2, 5) for _ in range(n)]
    # the default route consults the same float solver, so pin the exact one
    res = maximize(c, as_columns(A), b, method="simplex")
    ref = linprog(-np.array(c, float), A_ub=np.array(A, float), b_ub=np.array(b, float), bounds=(0, None), method="highs")
    assert res.status == "optimal"
    assert float(res.value) == pytest.approx(-ref.fun, abs=1e-9)
    # primal feasibility, exactly
    for r in range(m):
        assert sum(A[r][j] * res.x.get(j, 0) for j in range(n)) <= b[r]


@pytest.mark.parametrize("seed", range(10))
def test_certified_route_matches_simplex(seed):
    rng = random.Random(100 + seed)
    m, n = rng.randint(3, 9), rng.randint(3, 15)
    A = [[rng.randint(0, 3) for _ in range(n)] for _ in range(m)]
    for j in range(n):
        A[rng.randrange(m)][j] += 1
    b = [Fraction(rng.randint(1, 30), rng.choice([1, 2, 3, 7])) for _ in range(m)]
    c = [rng.randint(-1, 4) for _ in range(n)]
    auto = maximize(c, as_columns(A), b)
    exact = maximize(c, as_columns(A), b, method="simplex")
    assert auto.value == exact.value
    # whichever route answered, the duals certify it exactly
    assert sum(y * bi for y, bi in zip(auto.duals, b)) == auto.value
    for j in range(n):
        assert sum(auto.duals[r] * A[r][j] for r in range(m)) >= c[j]


def test_simplex_method_flag():
    res = maximize([1, 1], as_columns([[1, 2], [3, 1]]), [4, 6], method="simplex")
    assert res.value == Fraction(14, 5) and res.pivots > 0
    with pytest.raises(ValueError):
        maximize([1], [{0: 1}], [1], method="float")
