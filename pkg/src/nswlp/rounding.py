"""Round a fractional configuration-LP solution to an integral allocation.

Per agent, the fractional items are sliced into unit-mass groups in
non-increasing value order; the group-item fractional matching is then
split exactly into a convex combination of partial matchings (dummy-padded
Birkhoff-von-Neumann extraction in rational arithmetic), and the best
matching's allocation is returned.  Groups of full mass are matched in
every extracted matching, which is what makes the per-agent bundles
envy-free up to one item across the combination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .core import (
    Allocation,
    DecompositionFailure,
    EmptyAgent,
    Instance,
    log_nsw,
)
from .configlp import ColumnSolution

_ZERO = Fraction(0)
_ONE = Fraction(1)

Group = dict[int, Fraction]
GroupSet = dict[int, list[Group]]
Marginals = list[list[Fraction]]  # x[i][j] = fraction of item j held by agent i
Matching = dict[tuple[int, int], int]  # (agent, group index) -> item


@dataclass(frozen=True)
class MatchingCombination:
    """Convex combination of partial group-item matchings with exact
    rational weights summing to one.

    ``padded_edges`` counts the positive entries of the doubly stochastic
    matrix the decomposition ran on; the number of matchings never exceeds
    it by more than one.
    """

    matchings: tuple[Matching, ...]
    weights: tuple[Fraction, ...]
    padded_edges: int


def marginals(y: ColumnSolution, n: int, m: int) -> list[list[Fraction]]:
    """x[i][j] = total mass of columns of agent i containing item j."""
    x = [[_ZERO] * m for _ in range(n)]
    for col, mass in zip(y.columns, y.mass):
        row = x[col.agent]
        for j in col.items:
            row[j] += mass
    return x


def item_order(instance: Instance, i: int) -> list[int]:
    """Items sorted by non-increasing v_ij, ties by smaller index."""
    vals = instance.agents[i].values
    return sorted(range(instance.num_items), key=lambda j: (-vals[j], j))


def build_groups(
    instance: Instance, x: list[list[Fraction]], i: int
) -> list[Group]:
    """Slice agent i's fractional items into unit-mass groups.

    Sweeps the items in value order, filling each group to mass exactly 1
    and splitting an item's fraction across the boundary when needed; the
    last group keeps the fractional remainder.
    """
    total = sum(x[i], _ZERO)
    if total == 0:
        raise EmptyAgent(f"agent {i} has no fractional mass")
    groups: list[Group] = []
    current: Group = {}
    room = _ONE
    for j in item_order(instance, i):
        rest = x[i][j]
        while rest > 0:
            take = min(rest, room)
            if take > 0:
                current[j] = current.get(j, _ZERO) + take
                room -= take
                rest -= take
            if room == 0:
                groups.append(current)
                current = {}
                room = _ONE
    if current:
        groups.append(current)
    return groups


def _perfect_matching(rows: list, adjacency: dict) -> Optional[dict]:
    match_of_col: dict = {}

    def augment(r, visited):
        for c in adjacency[r]:
            if c in visited:
                continue
            visited.add(c)
            if c not in match_of_col or augment(match_of_col[c], visited):
                match_of_col[c] = r
                return True
        return False

    for r in rows:
        if not augment(r, set()):
            return None
    return {r: c for c, r in match_of_col.items()}


def decompose(groups: GroupSet, x: list[list[Fraction]]) -> MatchingCombination:
    """Split the group-item fractional matching into integral matchings.

    The bipartite mass matrix is padded to a doubly stochastic square: a
    dummy item per deficient group, a dummy group per deficient item, and a
    northwest-corner filler block between the dummies.  Perfect matchings on
    the positive support are extracted with the minimum edge mass as weight
    until nothing remains; dummy vertices are stripped from the output.
    """
    m = len(x[0]) if x else 0
    edges: dict = {}
    row_keys: list = []
    for i in sorted(groups):
        for t, g in enumerate(groups[i]):
            rk = ("g", i, t)
            row_keys.append(rk)
            edges[rk] = {("i", j): frac for j, frac in sorted(g.items())}
    col_sum = {j: _ZERO for j in range(m)}
    for rk in row_keys:
        for (_, j), frac in edges[rk].items():
            col_sum[j] += frac
    for j, s in col_sum.items():
        if s > 1:
            raise DecompositionFailure(f"item {j} carries mass {s} > 1")
    col_keys = [("i", j) for j in range(m)]
    # Dummy item per deficient group.
    for rk in row_keys:
        mass = sum(edges[rk].values(), _ZERO)
        if mass > 1:
            raise DecompositionFailure(f"group {rk} carries mass {mass} > 1")
        if mass < 1:
            ck = ("di", rk)
            col_keys.append(ck)
            edges[rk][ck] = _ONE - mass
    # Dummy group per deficient item.
    col_deficit: dict = {}
    row_deficit: dict = {}
    for j in range(m):
        if col_sum[j] < 1:
            rk = ("dg", j)
            row_keys.append(rk)
            edges[rk] = {("i", j): _ONE - col_sum[j]}
            row_deficit[rk] = col_sum[j]
    for ck in col_keys:
        if ck[0] == "di":
            col_deficit[ck] = _ONE - edges[ck[1]][ck]
    # Square off with fully deficient padding rows/columns.
    while len(row_keys) < len(col_keys):
        rk = ("pr", len(row_keys))
        row_keys.append(rk)
        edges[rk] = {}
        row_deficit[rk] = _ONE
    while len(col_keys) < len(row_keys):
        ck = ("pc", len(col_keys))
        col_keys.append(ck)
        col_deficit[ck] = _ONE
    # Northwest-corner transportation fill over the deficits.
    drows = [rk for rk in row_keys if row_deficit.get(rk, _ZERO) > 0]
    dcols = [ck for ck in col_keys if col_deficit.get(ck, _ZERO) > 0]
    if sum((row_deficit[r] for r in drows), _ZERO) != sum(
        (col_deficit[c] for c in dcols), _ZERO
    ):
        raise DecompositionFailure("padding deficits do not balance")
    ri = ci = 0
    while ri < len(drows) and ci < len(dcols):
        r, c = drows[ri], dcols[ci]
        take = min(row_deficit[r], col_deficit[c])
        if take > 0:
            edges[r][c] = edges[r].get(c, _ZERO) + take
            row_deficit[r] -= take
            col_deficit[c] -= take
        if row_deficit[r] == 0:
            ri += 1
        if ci < len(dcols) and col_deficit[c] == 0:
            ci += 1
    # Birkhoff-von-Neumann extraction on the padded square matrix.
    padded_edges = sum(len(edges[rk]) for rk in row_keys)
    matchings: list[Matching] = []
    weights: list[Fraction] = []
    remaining = _ONE
    while any(edges[rk] for rk in row_keys):
        adjacency = {rk: sorted(edges[rk]) for rk in row_keys}
        pm = _perfect_matching(row_keys, adjacency)
        if pm is None:
            raise DecompositionFailure("no perfect matching in positive support")
        lam = min(edges[rk][pm[rk]] for rk in row_keys)
        real: Matching = {}
        for rk, ck in pm.items():
            if rk[0] == "g" and ck[0] == "i":
                real[(rk[1], rk[2])] = ck[1]
        matchings.append(real)
        weights.append(lam)
        remaining -= lam
        for rk, ck in pm.items():
            left = edges[rk][ck] - lam
            if left == 0:
                del edges[rk][ck]
            else:
                edges[rk][ck] = left
    if remaining != 0 or sum(weights, _ZERO) != 1:
        raise DecompositionFailure("extracted weights do not sum to 1")
    return MatchingCombination(
        matchings=tuple(matchings),
        weights=tuple(weights),
        padded_edges=padded_edges,
    )


def allocation_from_matching(matching: Matching, num_items: int) -> Allocation:
    """Items matched to an agent's group go to that agent; rest unassigned."""
    owner: list[Optional[int]] = [None] * num_items
    for (i, _), j in matching.items():
        if owner[j] is not None:
            raise ValueError(f"item {j} matched twice")
        owner[j] = i
    return Allocation(owner=tuple(owner))


def round_combination(instance: Instance, y: ColumnSolution) -> MatchingCombination:
    """Groups plus decomposition for a feasible column solution."""
    n, m = instance.num_agents, instance.num_items
    x = marginals(y, n, m)
    groups: GroupSet = {}
    for i in range(n):
        if sum(x[i], _ZERO) > 0:
            groups[i] = build_groups(instance, x, i)
    return decompose(groups, x)


def round_best(instance: Instance, y: ColumnSolution) -> Allocation:
    """Best allocation among the matchings of the convex combination.

    The weighted average of the matchings' log welfare already sits within
    1/e of the LP objective, so the argmax does too.
    """
    comb = round_combination(instance, y)
    best_alloc: Optional[Allocation] = None
    best_lw = -math.inf
    for matching in comb.matchings:
        alloc = allocation_from_matching(matching, instance.num_items)
        lw = log_nsw(instance, alloc)
        if best_alloc is None or lw > best_lw:
            best_alloc = alloc
            best_lw = lw
    assert best_alloc is not None
    return best_alloc
