"""Exact reference solvers: brute force, positivity check, one-item baseline.

These exist to certify the approximation pipeline at desk scale, not to
scale themselves.
"""

from __future__ import annotations

import math
from itertools import product

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import Allocation, Infeasible, Instance, TooLarge, log_nsw

BRUTE_FORCE_GUARD = 10_000_000


def brute_force_opt(instance: Instance) -> tuple[Allocation, float]:
    """Exhaustive optimum over all n^m total assignments.

    Leaving items unassigned is never better (values are nonnegative), so
    total assignments suffice.  Guarded by n^m <= 1e7.
    """
    n, m = instance.num_agents, instance.num_items
    if n**m > BRUTE_FORCE_GUARD:
        raise TooLarge(f"{n}^{m} assignments exceed the brute-force guard")
    vals = [[float(v) for v in a.values] for a in instance.agents]
    weights = [float(a.weight) for a in instance.agents]
    scales = [float(s) for s in instance.scales]
    positive = [w > 0 for w in weights]
    best_lw = -math.inf
    best: tuple[int, ...] | None = None
    for assign in product(range(n), repeat=m):
        sums = [0.0] * n
        for j, i in enumerate(assign):
            sums[i] += vals[i][j]
        lw = 0.0
        for i in range(n):
            if not positive[i]:
                continue
            if sums[i] == 0.0:
                lw = -math.inf
                break
            lw += weights[i] * math.log(scales[i] * sums[i])
        if best is None or lw > best_lw:
            best_lw = lw
            best = assign
    assert best is not None
    return Allocation(owner=tuple(best)), best_lw


def _augment(i, adjacency, match_of_item, visited):
    for j in adjacency[i]:
        if j in visited:
            continue
        visited.add(j)
        if match_of_item.get(j) is None or _augment(
            match_of_item[j], adjacency, match_of_item, visited
        ):
            match_of_item[j] = i
            return True
    return False


def positivity_check(instance: Instance) -> bool:
    """True iff the positive-weight agents can be matched to distinct items
    they value positively (so some allocation has positive welfare)."""
    rows = [i for i, a in enumerate(instance.agents) if a.weight > 0]
    adjacency = {
        i: [j for j in range(instance.num_items) if instance.agents[i].values[j] > 0]
        for i in rows
    }
    match_of_item: dict[int, int] = {}
    for i in rows:
        if not _augment(i, adjacency, match_of_item, set()):
            return False
    return True


def assignment_baseline(instance: Instance) -> tuple[Allocation, float]:
    """Best one-item-per-agent assignment maximizing sum(w_i ln v_ij).

    Only positive-weight agents are matched, on edges with v_ij > 0.  The
    resulting log welfare b brackets the configuration LP optimum within an
    additive ln(m).
    """
    n, m = instance.num_agents, instance.num_items
    rows = [i for i in range(n) if instance.agents[i].weight > 0]
    if len(rows) > m:
        raise Infeasible("more positive-weight agents than items")
    finite = [
        abs(float(instance.agents[i].weight) * math.log(float(v)))
        for i in rows
        for v in instance.agents[i].values
        if v > 0
    ]
    big = (max(finite, default=0.0) + 1.0) * (len(rows) + 1)
    cost = np.full((len(rows), m), -big)
    for r, i in enumerate(rows):
        w = float(instance.agents[i].weight)
        for j, v in enumerate(instance.agents[i].values):
            if v > 0:
                cost[r, j] = w * math.log(float(v))
    row_ind, col_ind = linear_sum_assignment(cost, maximize=True)
    owner: list[int | None] = [None] * m
    for r, j in zip(row_ind, col_ind):
        if cost[r, j] == -big:
            raise Infeasible("no positive-value matching saturates all agents")
        owner[j] = rows[r]
    alloc = Allocation(owner=tuple(owner))
    return alloc, log_nsw(instance, alloc)
