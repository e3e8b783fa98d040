"""Configuration LP solver for weighted Nash social welfare.

The LP has one variable y[i,S] per agent/bundle pair, so it is solved
through its dual: a central-cut ellipsoid method asks a knapsack-cover
separation oracle for violated bundle constraints, and the bundles behind
the cuts become the columns of a small restricted primal.  A one-item
assignment baseline brackets the optimum within ln(m), which yields the
grid of objective guesses the ellipsoid runs against.

All bundle data stays rational; the ellipsoid and the objective work in
doubles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import (
    Infeasible,
    Instance,
    NumericalCollapse,
    TooLarge,
    scale_values,
    validate,
)
from .lpsolve import LinearProgram, LpSolution, solve_lp
from .reference import assignment_baseline

_ZERO = Fraction(0)
_ONE = Fraction(1)

_FINITE_CHECK_PERIOD = 64


@dataclass(frozen=True)
class Column:
    """One agent/bundle pair; ``value`` is the bundle value in the value
    space of the instance the solution refers to (always positive)."""

    agent: int
    items: tuple[int, ...]
    value: Fraction


@dataclass(frozen=True)
class ColumnSolution:
    """Sparse LP solution: positive masses on columns, plus the objective
    sum(w_i * y[i,S] * ln v_i(S)) evaluated in original value space."""

    columns: tuple[Column, ...]
    mass: tuple[Fraction, ...]
    lp_value: float


@dataclass(frozen=True)
class DualPoint:
    """Candidate dual: one alpha per item (meant nonnegative) and one beta
    per agent."""

    alpha: tuple[float, ...]
    beta: tuple[float, ...]


@dataclass(frozen=True)
class EllipsoidRun:
    """Trace of one feasibility run: objective guess, bundle constraints
    used as cuts, iteration count, and why the run stopped.

    'volume' and 'flat' both certify that no feasible dual point remains in
    the ellipsoid: the former by volume exhaustion, the latter because the
    support interval along a violated constraint's normal no longer reaches
    the feasible side.
    """

    o: float
    columns: tuple[tuple[int, tuple[int, ...]], ...]
    iterations: int
    reason: str  # 'volume' | 'flat' | 'feasible-center' | 'iteration-cap'


# ---------------------------------------------------------------------------
# knapsack cover


def knapsack_cover(
    unit_values: Sequence[int],
    costs: Sequence[float],
    target: int,
) -> Optional[list[int]]:
    """Min-cost item set whose unit values sum to at least ``target``.

    Exact DP over (item prefix, covered units capped at target).  Returns
    the chosen item indices, or None when even all items fall short.
    """
    z = [int(t) for t in unit_values]
    if target <= 0:
        return []
    if sum(z) < target:
        return None
    inf = math.inf
    layer = [0.0] + [inf] * target
    layers = [layer]
    parents: list[list[int]] = []
    for zk, ck in zip(z, costs):
        prev = layers[-1]
        cur = list(prev)
        par = [-1] * (target + 1)
        for t in range(target + 1):
            if prev[t] == inf:
                continue
            t2 = min(t + zk, target)
            cand = prev[t] + ck
            if cand < cur[t2]:
                cur[t2] = cand
                par[t2] = t
        layers.append(cur)
        parents.append(par)
    chosen = []
    t = target
    for k in range(len(z) - 1, -1, -1):
        if layers[k + 1][t] == layers[k][t]:
            continue
        chosen.append(k)
        t = parents[k][t]
    chosen.reverse()
    return chosen


# ---------------------------------------------------------------------------
# separation oracle

_EPS_RANGE_MSG = "epsilon must be in (0, 1]"


class _Guess:
    """Precomputed DP data for one (agent, top-value) guess."""

    __slots__ = ("items", "z", "vals_f", "zcap")

    def __init__(self, items, z, vals_f, zcap):
        self.items = items
        self.z = z
        self.vals_f = vals_f
        self.zcap = zcap


class _AgentPlan:
    __slots__ = ("agent", "w_f", "order", "prefix_ln", "guesses", "values")

    def __init__(self, agent, w_f, order, prefix_ln, guesses, values):
        self.agent = agent
        self.w_f = w_f
        self.order = order          # positive items, by value desc then index
        self.prefix_ln = prefix_ln  # ln of exact prefix values
        self.guesses = guesses
        self.values = values        # Fractions, for exact re-evaluation


def _build_plans(instance: Instance, epsilon: float) -> list[_AgentPlan]:
    if not (0.0 < epsilon <= 1.0):
        raise ValueError(_EPS_RANGE_MSG)
    m = instance.num_items
    eps_frac = Fraction(str(epsilon))
    plans = []
    for i, agent in enumerate(instance.agents):
        for v in agent.values:
            if v != 0 and v < 1:
                raise ValueError("instance must be scaled: values 0 or >= 1")
        pos = sorted(
            (j for j in range(m) if agent.values[j] > 0),
            key=lambda j: (-agent.values[j], j),
        )
        if not pos:
            plans.append(_AgentPlan(i, float(agent.weight), None, None, [], agent.values))
            continue
        prefix = []
        run = _ZERO
        for j in pos:
            run += agent.values[j]
            prefix.append(math.log(float(run)))
        order = np.asarray(pos, dtype=np.int64)
        prefix_ln = np.asarray(prefix)
        guesses = []
        seen_values = set()
        for start, jstar in enumerate(pos):
            vstar = agent.values[jstar]
            if vstar in seen_values:
                continue
            seen_values.add(vstar)
            unit = eps_frac * vstar / (2 * m)
            sub = pos[start:]
            z = np.asarray([int(agent.values[j] / unit) for j in sub], dtype=np.int64)
            guesses.append(
                _Guess(
                    items=np.asarray(sub, dtype=np.int64),
                    z=z,
                    vals_f=np.asarray([float(agent.values[j]) for j in sub]),
                    zcap=int(z.sum()),
                )
            )
        plans.append(
            _AgentPlan(i, float(agent.weight), order, prefix_ln, guesses, agent.values)
        )
    return plans


def _sweep(z: np.ndarray, costs: np.ndarray, vals: np.ndarray, zcap: int):
    """All-targets min-cost cover DP over exact unit sums.

    Returns (cost, val, choice): for every exact unit sum t, the cheapest
    selection reaching t, its true (unrounded) value, and the per-item
    update bits used to reconstruct a selection.
    """
    cost = np.full(zcap + 1, np.inf)
    cost[0] = 0.0
    val = np.zeros(zcap + 1)
    choice = np.zeros((len(z), zcap + 1), dtype=bool)
    for k in range(len(z)):
        zk = int(z[k])
        if zk == 0:
            continue
        cand = cost[: zcap + 1 - zk] + costs[k]
        cur = cost[zk:]
        better = cand < cur
        if not better.any():
            continue
        cost[zk:] = np.where(better, cand, cur)
        val[zk:] = np.where(better, val[: zcap + 1 - zk] + vals[k], val[zk:])
        choice[k, zk:] = better
    return cost, val, choice


def _reconstruct(z: np.ndarray, choice: np.ndarray, t: int) -> list[int]:
    picked = []
    for k in range(len(z) - 1, -1, -1):
        if choice[k, t]:
            picked.append(k)
            t -= int(z[k])
    if t != 0:
        raise RuntimeError("cover DP backtrack failed")
    picked.reverse()
    return picked


def _verify_cut(plan: _AgentPlan, item_ids, alpha, beta_i, ln_slack) -> bool:
    lhs = float(alpha[item_ids].sum()) + beta_i
    total = sum((plan.values[j] for j in item_ids), _ZERO)
    if total <= 0:
        return False
    rhs = plan.w_f * (ln_slack + math.log(float(total)))
    return lhs < rhs


def _oracle_query(
    plans: list[_AgentPlan],
    alpha: np.ndarray,
    beta: np.ndarray,
    ln_slack: float,
) -> Optional[tuple[int, tuple[int, ...]]]:
    # Cheap screen: bundles that are value-sorted prefixes catch almost all
    # violations far from feasibility.
    best_margin = 0.0
    best: Optional[tuple[int, np.ndarray]] = None
    for plan in plans:
        if plan.order is None:
            continue
        lhs = np.cumsum(alpha[plan.order]) + beta[plan.agent]
        margins = plan.w_f * (ln_slack + plan.prefix_ln) - lhs
        k = int(np.argmax(margins))
        if margins[k] > best_margin:
            best_margin = float(margins[k])
            best = (plan.agent, plan.order[: k + 1])
    if best is not None:
        plan = plans[best[0]]
        ids = best[1]
        if _verify_cut(plan, ids, alpha, float(beta[plan.agent]), ln_slack):
            return plan.agent, tuple(int(j) for j in sorted(ids))
    # Full sweep over (agent, top-value) guesses; exact within the rounding.
    for plan in plans:
        beta_i = float(beta[plan.agent])
        for guess in plan.guesses:
            cost, val, choice = _sweep(guess.z, alpha[guess.items], guess.vals_f, guess.zcap)
            with np.errstate(divide="ignore", invalid="ignore"):
                rhs = plan.w_f * (ln_slack + np.log(val))
                margin = rhs - (cost + beta_i)
            margin[~(np.isfinite(cost) & (val > 0))] = -np.inf
            t = int(np.argmax(margin))
            if margin[t] <= 0.0:
                continue
            picked = _reconstruct(guess.z, choice, t)
            ids = guess.items[picked]
            if _verify_cut(plan, ids, alpha, beta_i, ln_slack):
                return plan.agent, tuple(int(j) for j in sorted(ids))
    return None


def separation_oracle(
    scaled: Instance, epsilon: float, dual: DualPoint
) -> Optional[tuple[int, tuple[int, ...]]]:
    """Find (i, S') with sum(alpha[S']) + beta_i < w_i ln((1+eps/2) v_i(S')).

    Guesses the agent and the top item value of a violating bundle, rounds
    the remaining values down to multiples of eps*v*/(2m), and solves the
    min-cost cover problem for every reachable rounded total; every returned
    pair is re-checked against the inequality before being reported.
    Returns None when no guess produces a qualifying pair.
    """
    plans = _build_plans(scaled, epsilon)
    alpha = np.asarray(dual.alpha, dtype=float)
    beta = np.asarray(dual.beta, dtype=float)
    if alpha.shape != (scaled.num_items,) or beta.shape != (scaled.num_agents,):
        raise ValueError("dual point has wrong dimensions")
    return _oracle_query(plans, alpha, beta, math.log1p(epsilon / 2.0))


# ---------------------------------------------------------------------------
# ellipsoid feasibility runs


def _log_unit_ball_volume(d: int) -> float:
    return (d / 2.0) * math.log(math.pi) - math.lgamma(d / 2.0 + 1.0)


def ellipsoid_run(
    scaled: Instance,
    o: float,
    epsilon: float,
    *,
    _plans: Optional[list[_AgentPlan]] = None,
    _box_scale: float = 1.0,
) -> EllipsoidRun:
    """Central-cut ellipsoid over the dual in dimension n + m.

    At each center: negative alpha coordinates are cut first, then the
    objective constraint sum(alpha) + sum(beta) <= o, then a violated bundle
    constraint from the oracle, which is recorded as a column.  The run ends
    when the oracle finds nothing (feasible-center), when the ellipsoid
    volume drops below that of the termination cuboid, or at the analytic
    iteration cap.
    """
    plans = _plans if _plans is not None else _build_plans(scaled, epsilon)
    n, m = scaled.num_agents, scaled.num_items
    d = n + m
    ln_slack = math.log1p(epsilon / 2.0)
    vmax = max(float(max(a.values)) for a in scaled.agents)
    vmax = max(vmax, 1.0)
    # Box from the dual bound ln(m vmax^2), with headroom.
    span = (math.log(m * vmax * vmax) + 1.0) * _box_scale
    center = np.concatenate([np.full(m, span / 2.0), np.zeros(n)])
    semiaxes = np.concatenate(
        [np.full(m, span / 2.0), np.full(n, span)]
    ) * math.sqrt(d)
    # The ellipsoid matrix is kept in factored form E = L L^T: the cut norm
    # g^T E g becomes a sum of squares, which cannot cancel to a negative
    # value the way the explicit symmetric update does on face-hugging runs.
    L = np.diag(semiaxes)
    lnvol = _log_unit_ball_volume(d) + float(np.log(semiaxes).sum())
    target = d * math.log(epsilon / (16.0 * d))
    # Exact per-cut volume drop of the central-cut update.
    step = 0.5 * (d * math.log(d * d / (d * d - 1.0)) + math.log((d - 1.0) / (d + 1.0)))
    cap = max(1, math.ceil(2.0 * d * d * max(lnvol - target, 1.0)))
    sigma_sqrt = math.sqrt(d * d / (d * d - 1.0))
    shrink = 1.0 - math.sqrt((d - 1.0) / (d + 1.0))
    collected: list[tuple[int, tuple[int, ...]]] = []
    seen: set[tuple[int, tuple[int, ...]]] = set()
    reason = "iteration-cap"
    iterations = 0
    obj_slack = epsilon / 16.0
    while True:
        if lnvol < target:
            reason = "volume"
            break
        if iterations >= cap:
            reason = "iteration-cap"
            break
        alpha = center[:m]
        beta = center[m:]
        jmin = int(np.argmin(alpha))
        g = np.zeros(d)
        # ``margin``: how far the constraint's feasible side sits from the
        # center, measured against the cut normal.  If the ellipsoid's
        # support radius along the normal is smaller, no feasible dual point
        # is left inside and the run is certified the same way volume
        # exhaustion certifies it.
        if alpha[jmin] < 0.0:
            g[jmin] = -1.0
            margin = -float(alpha[jmin])
        elif center.sum() > o:
            g[:] = 1.0
            margin = float(center.sum()) - (o - obj_slack)
        else:
            res = _oracle_query(plans, alpha, beta, ln_slack)
            if res is None:
                reason = "feasible-center"
                break
            i, items = res
            key = (i, items)
            if key not in seen:
                seen.add(key)
                collected.append(key)
            for j in items:
                g[j] = -1.0
            g[m + i] = -1.0
            value = sum(
                (scaled.agents[i].values[j] for j in items), Fraction(0)
            )
            rhs = float(scaled.agents[i].weight) * (
                ln_slack + math.log(float(value))
            )
            margin = rhs - (float(alpha[list(items)].sum()) + float(beta[i]))
        u = L.T @ g
        q = float(u @ u)
        if not math.isfinite(q) or q <= 0.0:
            raise NumericalCollapse("cut norm lost positivity")
        norm = math.sqrt(q)
        if norm < margin:
            reason = "flat"
            break
        b = L @ (u / norm)
        center = center - b / (d + 1.0)
        # L' = sqrt(sigma) (L - shrink * b (u/|u|)^T) keeps E positive
        # definite by construction.
        L = sigma_sqrt * (L - shrink * np.outer(b, u / norm))
        lnvol += step
        iterations += 1
        if iterations % _FINITE_CHECK_PERIOD == 0 and not np.all(np.isfinite(L)):
            raise NumericalCollapse("ellipsoid factor has non-finite entries")
    return EllipsoidRun(
        o=o, columns=tuple(collected), iterations=iterations, reason=reason
    )


# ---------------------------------------------------------------------------
# primal side


def _build_conf_lp(
    instance: Instance,
    cols: list[tuple[int, tuple[int, ...]]],
    ln_shift: float,
) -> tuple[LinearProgram, list[Fraction]]:
    n, m = instance.num_agents, instance.num_items
    agents_in = sorted({i for i, _ in cols})
    values = [instance.bundle_value(i, items) for i, items in cols]
    objective = tuple(
        float(instance.agents[i].weight) * (ln_shift + math.log(float(v)))
        for (i, _), v in zip(cols, values)
    )
    rows = []
    senses = []
    rhs = []
    for i in agents_in:
        rows.append(tuple(_ONE if c[0] == i else _ZERO for c in cols))
        senses.append("=")
        rhs.append(_ONE)
    item_sets = [frozenset(c[1]) for c in cols]
    for j in range(m):
        rows.append(tuple(_ONE if j in s else _ZERO for s in item_sets))
        senses.append("<=")
        rhs.append(_ONE)
    lp = LinearProgram(
        objective=objective,
        rows=tuple(rows),
        senses=tuple(senses),
        rhs=tuple(rhs),
    )
    return lp, values


def _column_solution(
    instance: Instance,
    cols: list[tuple[int, tuple[int, ...]]],
    values: list[Fraction],
    sol: LpSolution,
) -> ColumnSolution:
    columns = []
    mass = []
    lp_value = 0.0
    assert sol.values is not None
    for (i, items), v, y in zip(cols, values, sol.values):
        if y == 0:
            continue
        columns.append(Column(agent=i, items=items, value=v))
        mass.append(y)
        lp_value += (
            float(y)
            * float(instance.agents[i].weight)
            * math.log(float(instance.scales[i] * v))
        )
    return ColumnSolution(columns=tuple(columns), mass=tuple(mass), lp_value=lp_value)


def _augment_columns(
    instance: Instance, columns: Iterable[tuple[int, Sequence[int]]]
) -> list[tuple[int, tuple[int, ...]]]:
    pool: dict[tuple[int, tuple[int, ...]], None] = {}
    for i, items in columns:
        key = (i, tuple(sorted(items)))
        if not key[1]:
            raise ValueError("empty column")
        if instance.bundle_value(i, key[1]) <= 0:
            raise ValueError("zero-value column")
        pool.setdefault(key)
    for i, agent in enumerate(instance.agents):
        best_j = None
        best_v = _ZERO
        for j, v in enumerate(agent.values):
            if v > best_v:
                best_v = v
                best_j = j
        if best_j is not None:
            pool.setdefault((i, (best_j,)))
    return sorted(pool)


def solve_restricted_primal(
    scaled: Instance,
    columns: Iterable[tuple[int, Sequence[int]]],
    o: float,
    epsilon: float,
) -> ColumnSolution:
    """Solve the configuration LP restricted to the given columns.

    The objective prices each bundle at w_i * ln((1+eps/2) v_i(S)), the
    values inflated the same way the oracle's cut constraints were; the
    reported lp_value is recomputed without the inflation.  Every agent with
    a positive item gets its best singleton added, so the per-agent mass
    constraint is always satisfiable.
    """
    del o  # recorded by the caller; the LP itself does not need the guess
    if not (0.0 < epsilon <= 1.0):
        raise ValueError(_EPS_RANGE_MSG)
    cols = _augment_columns(scaled, columns)
    if not cols:
        raise Infeasible("no columns: no agent values any item")
    lp, values = _build_conf_lp(scaled, cols, math.log1p(epsilon / 2.0))
    sol = solve_lp(lp)
    if sol.status != "optimal":
        raise Infeasible(f"restricted configuration LP is {sol.status}")
    return _column_solution(scaled, cols, values, sol)


FULL_ENUM_MAX_ITEMS = 12


def full_enumeration_lp(instance: Instance) -> ColumnSolution:
    """Configuration LP solved exactly over every nonzero-value column.

    Test oracle; column count is n * 2^m, guarded at m <= 12.
    """
    validate(instance)
    n, m = instance.num_agents, instance.num_items
    if m > FULL_ENUM_MAX_ITEMS:
        raise TooLarge(f"m = {m} exceeds the full-enumeration guard")
    cols: list[tuple[int, tuple[int, ...]]] = []
    col_values: list[Fraction] = []
    for i in range(n):
        agent = instance.agents[i]
        if agent.weight == 0:
            continue
        sums = [_ZERO] * (1 << m)
        for mask in range(1, 1 << m):
            low = mask & (-mask)
            sums[mask] = sums[mask ^ low] + agent.values[low.bit_length() - 1]
            if sums[mask] > 0:
                cols.append(
                    (i, tuple(j for j in range(m) if mask >> j & 1))
                )
                col_values.append(sums[mask])
    if not cols:
        raise Infeasible("no agent with positive weight values any item")
    covered = {i for i, _ in cols}
    for i in range(n):
        if instance.agents[i].weight > 0 and i not in covered:
            raise Infeasible(f"agent {i} has positive weight but no positive value")
    lp, values = _build_conf_lp(instance, cols, 0.0)
    sol = solve_lp(lp)
    if sol.status != "optimal":
        raise Infeasible(f"full configuration LP is {sol.status}")
    return _column_solution(instance, cols, values, sol)


# ---------------------------------------------------------------------------
# top-level solve


def solve_configuration_lp(instance: Instance, epsilon: float) -> ColumnSolution:
    """Solve the configuration LP within an additive gap of ln(1+epsilon).

    Values are scaled so each agent's minimum positive value is 1, a
    one-item assignment gives the baseline b with b <= lp <= b + ln(m), and
    ellipsoid feasibility runs over a grid of objective guesses collect the
    columns of a restricted primal.  The guesses are probed by bisection on
    the run outcome: a feasible center at o certifies lp is essentially
    below o, a volume exhaustion at o certifies the collected columns carry
    value essentially o, so the top of the sandwich is found with
    O(log(log(m)/eps)) runs.  All probed columns are pooled into one final
    restricted primal, whose value can only beat the per-run bound.
    """
    if not (0.0 < epsilon <= 1.0):
        raise ValueError(_EPS_RANGE_MSG)
    validate(instance)
    # Headroom for the grid/oracle split; large epsilon gains nothing.
    eps_run = min(epsilon, 0.25)
    scaled = scale_values(instance)
    active = [i for i in range(instance.num_agents) if instance.agents[i].weight > 0]
    work = Instance(
        num_items=instance.num_items,
        agents=tuple(scaled.agents[i] for i in active),
    )
    base_alloc, b = assignment_baseline(work)
    pool: dict[tuple[int, tuple[int, ...]], None] = {}
    for j, owner in enumerate(base_alloc.owner):
        if owner is not None:
            pool.setdefault((owner, (j,)))
    plans = _build_plans(work, eps_run)
    m = instance.num_items
    step = eps_run / 4.0
    top = max(0, math.ceil(math.log(m) / step)) if m > 1 else 0

    def probe(k: int) -> str:
        last_exc: Optional[NumericalCollapse] = None
        for box in (1.0, 2.0):
            try:
                run = ellipsoid_run(
                    work, b + k * step, eps_run, _plans=plans, _box_scale=box
                )
            except NumericalCollapse as exc:
                last_exc = exc
                continue
            for key in run.columns:
                pool.setdefault(key)
            return run.reason
        assert last_exc is not None
        raise last_exc

    if probe(top) != "feasible-center" or top == 0:
        pass  # volume at the top certifies the pool immediately
    elif probe(0) == "feasible-center":
        pass  # lp sits at the baseline; its singletons are in the pool
    else:
        lo, hi = 0, top
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if probe(mid) == "feasible-center":
                hi = mid
            else:
                lo = mid
    work_sol = solve_restricted_primal(work, list(pool), b, eps_run)
    # Map agents back and restate the value in original space.
    columns = []
    mass = []
    lp_value = 0.0
    for col, y in zip(work_sol.columns, work_sol.mass):
        i = active[col.agent]
        v = instance.bundle_value(i, col.items)
        columns.append(Column(agent=i, items=col.items, value=v))
        mass.append(y)
        lp_value += (
            float(y)
            * float(instance.agents[i].weight)
            * math.log(float(instance.scales[i] * v))
        )
    return ColumnSolution(columns=tuple(columns), mass=tuple(mass), lp_value=lp_value)
