"""Exact linear programming over the rationals.

Revised simplex on ``A x (<= | =) b``, ``x >= 0`` with ``b >= 0``.  The basis
inverse is kept as sparse rows of :class:`fractions.Fraction`; floating point
is only used to rank entering candidates, and every pivot decision and the
final optimality test are exact.  Degenerate streaks switch pricing to
Bland's rule, which rules out cycling.

:func:`maximize` first tries a floating-point solve whose primal and dual
solutions are rounded to nearby rationals and accepted only if they pass an
exact feasibility and duality-gap check; otherwise the exact simplex runs.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Mapping, NamedTuple, Sequence

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

__all__ = ["LPResult", "maximize", "find_feasible", "SparseColumn"]

SparseColumn = Mapping[int, int | Fraction]

_BLAND_AFTER = 25
_SCREEN = 64
_TOL = 1e-9


class LPResult(NamedTuple):
    status: str  # "optimal", "infeasible" or "unbounded"
    value: Fraction
    x: dict[int, Fraction]  # nonzero structural variables
    duals: tuple[Fraction, ...]
    pivots: int


def _as_fraction(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


class _Simplex:
    def __init__(self, columns: Sequence[SparseColumn], b: Sequence, cost: Sequence, extra_cost: Sequence):
        self.m = m = len(b)
        self.n = n = len(columns)
        self.cols = [tuple((int(r), _as_fraction(v)) for r, v in col.items() if v) for col in columns]
        rows, idx, data = [], [], []
        for j, col in enumerate(self.cols):
            for r, v in col:
                rows.append(r)
                idx.append(j)
                data.append(float(v))
        self.A = sparse.csc_matrix((data, (rows, idx)), shape=(m, n))
        self.A_int = None
        if all(v.denominator == 1 for col in self.cols for _, v in col):
            self.A_int = sparse.csc_matrix(([int(v) for v in data], (rows, idx)), shape=(m, n), dtype=np.int64)
        self.max_col_weight = max((sum(abs(int(v)) for _, v in col) for col in self.cols), default=0)
        self.cost = [_as_fraction(c) for c in cost] + [_as_fraction(c) for c in extra_cost]
        self.cost_f = np.array([float(c) for c in self.cost[:n]])
        self.basis = list(range(n, n + m))
        self.binv: list[dict[int, Fraction]] = [{r: Fraction(1)} for r in range(m)]
        self.xb = [_as_fraction(v) for v in b]
        self.pivots = 0
        self.allowed = np.ones(n + m, dtype=bool)

    def column(self, j: int) -> tuple[tuple[int, Fraction], ...]:
        if j >= self.n:
            return ((j - self.n, Fraction(1)),)
        return self.cols[j]

    def duals(self) -> list[Fraction]:
        y = [Fraction(0)] * self.m
        for r, j in enumerate(self.basis):
            c = self.cost[j]
            if c:
                for s, v in self.binv[r].items():
                    y[s] += c * v
        return y

    def reduced_cost(self, j: int, y: Sequence[Fraction]) -> Fraction:
        return self.cost[j] - sum((y[r] * v for r, v in self.column(j)), Fraction(0))

    def _exact_reduced_costs(self, y: Sequence[Fraction]) -> list[int]:
        """Indices of all columns with positive exact reduced cost."""
        if self.A_int is None:
            return [j for j in range(self.n + self.m) if self.allowed[j] and self.reduced_cost(j, y) > 0]
        den = 1
        for v in list(y) + self.cost:
            den = den * v.denominator // math.gcd(den, v.denominator)
        yi = [v.numerator * (den // v.denominator) for v in y]
        ci = [v.numerator * (den // v.denominator) for v in self.cost]
        bound = max(map(abs, yi + ci), default=0) * (self.max_col_weight + 1)
        if bound < 2**62:
            rc = np.array(ci[: self.n], dtype=np.int64) - self.A_int.T @ np.array(yi, dtype=np.int64)
            rc = np.concatenate([rc, np.array(ci[self.n:], dtype=np.int64) - np.array(yi, dtype=np.int64)])
            return [int(j) for j in np.flatnonzero((rc > 0) & self.allowed)]
        out = []
        for j in range(self.n + self.m):
            if self.allowed[j] and ci[j] - sum(yi[r] * int(v) for r, v in self.column(j)) > 0:
                out.append(j)
        return out

    def choose_entering(self, y: Sequence[Fraction], bland: bool) -> int | None:
        if bland:
            found = self._exact_reduced_costs(y)
            return min(found) if found else None
        yf = np.array([float(v) for v in y])
        rc = np.empty(self.n + self.m)
        rc[: self.n] = self.cost_f - self.A.T @ yf
        rc[self.n:] = np.array([float(c) for c in self.cost[self.n:]]) - yf
        rc[~self.allowed] = -np.inf
        order = np.argsort(-rc, kind="stable")[:_SCREEN]
        for j in order:
            if rc[j] <= _TOL:
                break
            if self.reduced_cost(int(j), y) > 0:
                return int(j)
        # screening can miss columns; optimality is only declared after an exact sweep
        found = self._exact_reduced_costs(y)
        return min(found) if found else None

    def pivot(self, j: int) -> bool | None:
        """Pivot column ``j`` in; ``None`` when unbounded, else whether the step was degenerate."""
        col = self.column(j)
        d = []
        for r in range(self.m):
            row = self.binv[r]
            d.append(sum((row.get(s, 0) * v for s, v in col), Fraction(0)))
        best = None
        for r, dr in enumerate(d):
            if dr > 0:
                ratio = self.xb[r] / dr
                key = (ratio, self.basis[r])
                if best is None or key < best[0]:
                    best = (key, r)
        if best is None:
            return None
        (ratio, _), p = best
        dp = d[p]
        prow = {s: v / dp for s, v in self.binv[p].items()}
        self.binv[p] = prow
        xp = self.xb[p] / dp
        self.xb[p] = xp
        for r, dr in enumerate(d):
            if r == p or not dr:
                continue
            row = self.binv[r]
            for s, v in prow.items():
                nv = row.get(s, 0) - dr * v
                if nv:
                    row[s] = nv
                else:
                    row.pop(s, None)
            self.xb[r] -= dr * xp
        self.basis[p] = j
        self.pivots += 1
        return ratio == 0

    def run(self, max_pivots: int) -> str:
        streak = 0
        while True:
            if self.pivots >= max_pivots:
                raise RuntimeError(f"simplex exceeded {max_pivots} pivots")
            y = self.duals()
            j = self.choose_entering(y, streak >= _BLAND_AFTER)
            if j is None:
                return "optimal"
            degenerate = self.pivot(j)
            if degenerate is None:
                return "unbounded"
            streak = streak + 1 if degenerate else 0

    def objective(self) -> Fraction:
        return sum((self.cost[j] * x for j, x in zip(self.basis, self.xb)), Fraction(0))

    def solution(self) -> dict[int, Fraction]:
        return {j: x for j, x in zip(self.basis, self.xb) if j < self.n and x}


def _rationalize(v: float, limit: int) -> Fraction:
    return Fraction(float(v)).limit_denominator(limit)


def _scaled(values: Sequence[Fraction]) -> tuple[int, list[int]]:
    den = 1
    for v in values:
        den = den * v.denominator // math.gcd(den, v.denominator)
    return den, [v.numerator * (den // v.denominator) for v in values]


def _certified(c: Sequence[Fraction], columns: Sequence[SparseColumn], b: Sequence[Fraction], limit: int) -> LPResult | None:
    """Optimal solution from a float solve, or ``None`` unless it is exactly certified."""
    m, n = len(b), len(columns)
    if m == 0 or n == 0:
        return None
    lengths = np.fromiter((len(col) for col in columns), dtype=np.int64, count=n)
    rows = np.fromiter((r for col in columns for r in col), dtype=np.int64, count=int(lengths.sum()))
    data = np.fromiter((float(v) for col in columns for v in col.values()), dtype=float, count=len(rows))
    indptr = np.concatenate([[0], np.cumsum(lengths)])
    A = sparse.csr_matrix(sparse.csc_matrix((data, rows, indptr), shape=(m, n)))
    res = linprog(-np.array([float(v) for v in c]), A_ub=A, b_ub=np.array([float(v) for v in b]),
                  bounds=(0, None), method="highs")
    if res.status != 0:
        return None
    x = {int(j): q for j in np.flatnonzero(res.x > 1e-12) if (q := _rationalize(res.x[j], limit)) > 0}
    y = [max(Fraction(0), _rationalize(-v, limit)) for v in res.ineqlin.marginals]
    load = [Fraction(0)] * m
    for j, xj in x.items():
        for r, v in columns[j].items():
            load[r] += v * xj
    if any(lo > bi for lo, bi in zip(load, b)):
        return None
    # dual feasibility with integer arithmetic: den * (A^T y - c) >= 0
    den, yi = _scaled(y + [_as_fraction(v) for v in c])
    ci = yi[m:]
    yi = yi[:m]
    for j, col in enumerate(columns):
        if sum(yi[r] * v for r, v in col.items()) < ci[j]:
            return None
    value = sum((_as_fraction(c[j]) * xj for j, xj in x.items()), Fraction(0))
    if value != sum((yr * br for yr, br in zip(y, b)), Fraction(0)):
        return None
    return LPResult("optimal", value, x, tuple(y), 0)


def maximize(
    c: Sequence,
    columns: Sequence[SparseColumn],
    b: Sequence,
    max_pivots: int = 100_000,
    method: str = "auto",
    limit: int = 10**7,
) -> LPResult:
    """Maximize ``c.x`` subject to ``A x <= b``, ``x >= 0``; requires ``b >= 0``.

    ``columns[j]`` maps row index to the coefficient of variable ``j``.
    ``method="auto"`` tries the certified float route before the exact
    simplex; ``"simplex"`` skips it.  ``limit`` caps the denominators tried
    when rounding the float solution.
    """
    b = [_as_fraction(v) for v in b]
    if any(v < 0 for v in b):
        raise ValueError("right-hand side must be nonnegative")
    if len(c) != len(columns):
        raise ValueError("one cost per column is required")
    if method not in ("auto", "simplex"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto":
        found = _certified([_as_fraction(v) for v in c], columns, b, limit)
        if found is not None:
            return found
    lp = _Simplex(columns, b, c, [0] * len(b))
    status = lp.run(max_pivots)
    if status == "unbounded":
        return LPResult(status, Fraction(0), {}, (), lp.pivots)
    return LPResult(status, lp.objective(), lp.solution(), tuple(lp.duals()), lp.pivots)


def find_feasible(columns: Sequence[SparseColumn], b: Sequence, max_pivots: int = 100_000) -> LPResult:
    """A nonnegative solution of ``A x = b`` by phase-one simplex, if one exists."""
    b = [_as_fraction(v) for v in b]
    flip = [v < 0 for v in b]
    if any(flip):
        b = [-v if f else v for v, f in zip(b, flip)]
        columns = [{r: (-v if flip[r] else v) for r, v in col.items()} for col in columns]
    lp = _Simplex(columns, b, [0] * len(columns), [-1] * len(b))
    lp.run(max_pivots)
    value = lp.objective()
    status = "optimal" if value == 0 else "infeasible"
    return LPResult(status, value, lp.solution() if value == 0 else {}, tuple(lp.duals()), lp.pivots)
