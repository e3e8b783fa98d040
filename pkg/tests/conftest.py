"""Shared fixtures and independent oracles for the test suite."""

from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction

import pytest

from nswlp import Instance, make_instance


# ---------------------------------------------------------------------------
# independent oracles (deliberately naive)


def ef1_by_quantifiers(values, bundles) -> bool:
    """Direct quantifier expansion of the EF1 definition."""
    vals = [Fraction(v) for v in values]
    sets = [list(b) for b in bundles]

    def v(b):
        return sum((vals[j] for j in b), Fraction(0))

    for i, b_i in enumerate(sets):
        for k, b_k in enumerate(sets):
            if i == k or not b_k:
                continue
            ok = any(v([x for x in b_k if x != j]) <= v(b_i) for j in b_k)
            if not ok:
                return False
    return True


def all_subsets(m):
    for r in range(m + 1):
        yield from itertools.combinations(range(m), r)


def exhaustive_dual_violation(instance: Instance, alpha, beta):
    """First (agent, bundle) violating sum(alpha[S]) + beta_i < w_i ln v_i(S)."""
    for i, agent in enumerate(instance.agents):
        w = float(agent.weight)
        for items in all_subsets(instance.num_items):
            if not items:
                continue
            v = instance.bundle_value(i, items)
            if v <= 0:
                continue
            lhs = sum(alpha[j] for j in items) + beta[i]
            if lhs < w * math.log(float(v)):
                return i, items
    return None


def cover_by_enumeration(units, costs, target):
    """Min-cost subset with unit sum >= target, by full enumeration."""
    best = None
    n = len(units)
    for items in all_subsets(n):
        if sum(units[j] for j in items) >= target:
            c = sum(costs[j] for j in items)
            if best is None or c < best[0]:
                best = (c, items)
    return best


def solve_square_exact(rows, rhs):
    """Fraction Gaussian elimination; None when singular."""
    n = len(rows)
    a = [list(r) + [b] for r, b in zip(rows, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return None
        a[col], a[piv] = a[piv], a[col]
        inv = Fraction(1) / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [a[r][n] for r in range(n)]


def lp_optimum_by_vertex_enumeration(lp):
    """Enumerate candidate vertices of {rows senses rhs, x >= 0}.

    Returns (status, best objective) with status 'optimal' or 'infeasible'.
    Only sound for bounded feasible regions.
    """
    nv = len(lp.objective)
    constraints = []  # (coeffs, rhs, sense)
    for row, s, b in zip(lp.rows, lp.senses, lp.rhs):
        constraints.append((list(row), b, s))
    for j in range(nv):
        unit = [Fraction(1) if k == j else Fraction(0) for k in range(nv)]
        constraints.append((unit, Fraction(0), ">="))
    best = None
    feasible = False
    for chosen in itertools.combinations(range(len(constraints)), nv):
        rows = [constraints[c][0] for c in chosen]
        rhs = [constraints[c][1] for c in chosen]
        x = solve_square_exact(rows, rhs)
        if x is None:
            continue
        ok = True
        for coeffs, b, sense in constraints:
            lhs = sum(c * v for c, v in zip(coeffs, x))
            if sense == "<=" and lhs > b:
                ok = False
            elif sense == ">=" and lhs < b:
                ok = False
            elif sense == "=" and lhs != b:
                ok = False
            if not ok:
                break
        if not ok:
            continue
        feasible = True
        obj = sum(c * float(v) for c, v in zip(lp.objective, x))
        if best is None or obj > best:
            best = obj
    if not feasible:
        return "infeasible", None
    return "optimal", best


def random_feasible_marginals(rng: random.Random, n: int, m: int, denom: int = 12):
    """Random rational x with column sums at most one."""
    x = [[Fraction(0)] * m for _ in range(n)]
    for j in range(m):
        while True:
            draws = [rng.randint(0, denom) for _ in range(n)]
            if sum(draws) <= denom:
                break
        for i in range(n):
            x[i][j] = Fraction(draws[i], denom)
    return x


def random_column_solution(rng: random.Random, instance: Instance, parts: int = 3):
    """Feasible bundle masses built as a mixture of onto assignments.

    Requires at least as many items as agents so every bundle is nonempty.
    """
    from nswlp.configlp import Column, ColumnSolution

    n, m = instance.num_agents, instance.num_items
    assert m >= n, "mixture construction needs one item per agent"
    denom = 24
    cuts = sorted(rng.randint(0, denom) for _ in range(parts - 1))
    lams = [
        Fraction(b - a, denom)
        for a, b in zip([0] + cuts, cuts + [denom])
    ]
    mass: dict[tuple[int, tuple[int, ...]], Fraction] = {}
    for lam in lams:
        if lam == 0:
            continue
        # onto assignment: each agent appears, so bundles are nonempty
        owner = list(range(n)) + [rng.randrange(n) for _ in range(m - n)]
        rng.shuffle(owner)
        for i in range(n):
            items = tuple(j for j in range(m) if owner[j] == i)
            key = (i, items)
            mass[key] = mass.get(key, Fraction(0)) + lam
    columns = []
    masses = []
    lp_value = 0.0
    for (i, items), y in sorted(mass.items()):
        v = instance.bundle_value(i, items)
        columns.append(Column(agent=i, items=items, value=v))
        masses.append(y)
        lp_value += float(y) * float(instance.agents[i].weight) * math.log(float(v))
    return ColumnSolution(columns=tuple(columns), mass=tuple(masses), lp_value=lp_value)


@pytest.fixture
def rng():
    return random.Random(987654321)


def positive_instance(rng: random.Random, n: int, m: int, vmax: int = 9) -> Instance:
    """Random instance with all values at least 1 (handy for rounding tests)."""
    from nswlp.gen import random_weights

    weights = random_weights(n, rng)
    values = [[rng.randint(1, vmax) for _ in range(m)] for _ in range(n)]
    return make_instance(weights, values)
