"""Problem model for weighted Nash social welfare with additive values.

An instance holds n agents with weights summing to one and per-item
nonnegative values; all numeric data is kept as exact rationals so that the
LP and rounding stages can work without tolerances.  Only logarithms are
evaluated in double precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

RationalLike = Union[int, str, float, Fraction]


class InvalidInstance(ValueError):
    """Instance data violates a structural invariant."""


class WeightSumError(InvalidInstance):
    """Agent weights do not sum to exactly 1."""


class NegativeValue(InvalidInstance):
    """A value or weight is negative."""


class EmptyInstance(InvalidInstance):
    """No agents or no items."""


class OverlappingBundles(ValueError):
    """Bundles passed to an EF1 check share an item."""


class TooLarge(ValueError):
    """Input exceeds the guard of an exhaustive routine."""


class Infeasible(RuntimeError):
    """No allocation with positive welfare exists (or an LP had no solution)."""


class NumericalCollapse(RuntimeError):
    """The ellipsoid matrix lost positive definiteness in double precision."""


class DecompositionFailure(RuntimeError):
    """No perfect matching in the support of a doubly stochastic matrix."""


class EmptyAgent(ValueError):
    """Agent has zero fractional mass, so no groups can be built."""


def as_fraction(x: RationalLike) -> Fraction:
    """Coerce ints, 'p/q' / decimal strings, floats and Fractions to Fraction.

    Floats are read through their decimal repr, so 0.1 becomes 1/10.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a rational value")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(str(x))
    raise TypeError(f"cannot interpret {x!r} as a rational")


@dataclass(frozen=True)
class Agent:
    """One agent: weight in [0, 1] and one value per item."""

    weight: Fraction
    values: tuple[Fraction, ...]


@dataclass(frozen=True)
class Instance:
    """A weighted Nash social welfare instance.

    ``scales`` holds per-agent value-space divisors introduced by
    :func:`scale_values`; stored values times the scale factor recover the
    original value space.  Defaults to all ones.
    """

    num_items: int
    agents: tuple[Agent, ...]
    scales: tuple[Fraction, ...] = ()

    def __post_init__(self):
        if not self.scales:
            object.__setattr__(
                self, "scales", tuple(Fraction(1) for _ in self.agents)
            )

    @property
    def num_agents(self) -> int:
        return len(self.agents)

    def value(self, i: int, j: int) -> Fraction:
        return self.agents[i].values[j]

    def bundle_value(self, i: int, items: Iterable[int]) -> Fraction:
        """Additive value of a bundle for agent i, in stored value space."""
        vals = self.agents[i].values
        return sum((vals[j] for j in items), Fraction(0))


@dataclass(frozen=True)
class Allocation:
    """Item ownership; entry j is an agent index or None for unassigned."""

    owner: tuple[Optional[int], ...]

    def bundles(self, num_agents: int) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(num_agents)]
        for j, i in enumerate(self.owner):
            if i is not None:
                out[i].append(j)
        return out


def make_instance(
    weights: Sequence[RationalLike],
    values: Sequence[Sequence[RationalLike]],
    scales: Optional[Sequence[RationalLike]] = None,
) -> Instance:
    """Convenience constructor coercing all entries to Fractions."""
    if len(values) != len(weights):
        raise InvalidInstance("one value row per agent required")
    if not values:
        raise EmptyInstance("no agents")
    m = len(values[0])
    agents = tuple(
        Agent(as_fraction(w), tuple(as_fraction(v) for v in row))
        for w, row in zip(weights, values)
    )
    sc = tuple(as_fraction(s) for s in scales) if scales is not None else ()
    return Instance(num_items=m, agents=agents, scales=sc)


def validate(instance: Instance) -> None:
    """Raise unless all Instance invariants hold."""
    if instance.num_agents < 1:
        raise EmptyInstance("instance has no agents")
    if instance.num_items < 1:
        raise EmptyInstance("instance has no items")
    total = Fraction(0)
    for idx, agent in enumerate(instance.agents):
        if agent.weight < 0:
            raise NegativeValue(f"agent {idx} has negative weight")
        if len(agent.values) != instance.num_items:
            raise InvalidInstance(
                f"agent {idx} has {len(agent.values)} values, "
                f"expected {instance.num_items}"
            )
        for j, v in enumerate(agent.values):
            if v < 0:
                raise NegativeValue(f"value of agent {idx} for item {j} is negative")
        total += agent.weight
    if total != 1:
        raise WeightSumError(f"weights sum to {total}, expected 1")
    if len(instance.scales) != instance.num_agents:
        raise InvalidInstance("one scale factor per agent required")
    for idx, s in enumerate(instance.scales):
        if s <= 0:
            raise InvalidInstance(f"scale factor of agent {idx} is not positive")


def _check_owner(instance: Instance, alloc: Allocation) -> None:
    if len(alloc.owner) != instance.num_items:
        raise ValueError("allocation length differs from number of items")
    for j, i in enumerate(alloc.owner):
        if i is not None and not (0 <= i < instance.num_agents):
            raise ValueError(f"item {j} assigned to unknown agent {i}")


def log_nsw(instance: Instance, alloc: Allocation) -> float:
    """Weighted log welfare sum(w_i * ln v_i(bundle_i)) in original value space.

    Agents with zero weight contribute nothing regardless of bundle; a
    positive-weight agent with a worthless bundle makes the result -inf.
    """
    _check_owner(instance, alloc)
    sums = [Fraction(0)] * instance.num_agents
    for j, i in enumerate(alloc.owner):
        if i is not None:
            sums[i] += instance.agents[i].values[j]
    total = 0.0
    for i, agent in enumerate(instance.agents):
        if agent.weight == 0:
            continue
        val = instance.scales[i] * sums[i]
        if val == 0:
            return -math.inf
        total += float(agent.weight) * math.log(float(val))
    return total


def nsw(instance: Instance, alloc: Allocation) -> float:
    """Weighted geometric-mean welfare, exp of log_nsw (0 at -inf)."""
    lw = log_nsw(instance, alloc)
    if lw == -math.inf:
        return 0.0
    try:
        return math.exp(lw)
    except OverflowError:
        return math.inf


def scale_values(instance: Instance) -> Instance:
    """Divide each agent's values by its minimum positive value.

    The divisor is recorded in ``scales`` so welfare reports stay in the
    original value space.  Afterwards every value is 0 or >= 1.
    """
    new_agents = []
    new_scales = []
    for agent, old_scale in zip(instance.agents, instance.scales):
        positive = [v for v in agent.values if v > 0]
        if not positive:
            new_agents.append(agent)
            new_scales.append(old_scale)
            continue
        s = min(positive)
        new_agents.append(
            Agent(agent.weight, tuple(v / s for v in agent.values))
        )
        new_scales.append(old_scale * s)
    return Instance(
        num_items=instance.num_items,
        agents=tuple(new_agents),
        scales=tuple(new_scales),
    )


def check_ef1(
    values: Sequence[RationalLike],
    bundles: Sequence[Iterable[int]],
    require_disjoint: bool = True,
) -> bool:
    """Envy-freeness up to one item under a single additive valuation.

    True iff for every ordered pair (i, i') with bundle i' nonempty,
    v(bundle i') minus its most valuable item is at most v(bundle i).

    ``require_disjoint=False`` skips the overlap check so the test can be
    applied to bundles drawn from alternative allocations of the same items.
    """
    vals = [as_fraction(v) for v in values]
    sets = [list(b) for b in bundles]
    if require_disjoint:
        seen: set[int] = set()
        for b in sets:
            for j in b:
                if j in seen:
                    raise OverlappingBundles(f"item {j} appears in two bundles")
                seen.add(j)
    totals = [sum((vals[j] for j in b), Fraction(0)) for b in sets]
    reduced = []
    for b, tot in zip(sets, totals):
        if b:
            reduced.append(tot - max(vals[j] for j in b))
        else:
            reduced.append(None)
    for k, red in enumerate(reduced):
        if red is None:
            continue
        for i, tot in enumerate(totals):
            if i == k:
                continue
            if red > tot:
                return False
    return True
