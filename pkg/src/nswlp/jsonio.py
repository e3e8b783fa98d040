"""JSON readers and writers for instances and allocations.

Instance files look like::

    {"num_items": 3,
     "agents": [{"weight": "1/2", "values": ["3", "0.5", "0"]}, ...]}

Weights and values accept either 'p/q' or decimal notation; serialization
emits the canonical 'p/q' form.  Allocation files are
``{"owner": [agentIndex-or-null, ...]}``.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

from .core import Allocation, Instance, InvalidInstance, as_fraction, make_instance


def parse_rational(x: Any) -> Fraction:
    try:
        return as_fraction(x)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise InvalidInstance(f"bad rational {x!r}: {exc}") from exc


def rational_str(q: Fraction) -> str:
    return str(q)


def instance_to_obj(instance: Instance) -> dict:
    obj: dict = {
        "num_items": instance.num_items,
        "agents": [
            {
                "weight": rational_str(a.weight),
                "values": [rational_str(v) for v in a.values],
            }
            for a in instance.agents
        ],
    }
    if any(s != 1 for s in instance.scales):
        obj["scales"] = [rational_str(s) for s in instance.scales]
    return obj


def instance_from_obj(obj: Any) -> Instance:
    if not isinstance(obj, dict):
        raise InvalidInstance("instance JSON must be an object")
    try:
        m = obj["num_items"]
        agents = obj["agents"]
    except (KeyError, TypeError) as exc:
        raise InvalidInstance(f"missing field: {exc}") from exc
    if not isinstance(m, int):
        raise InvalidInstance("num_items must be an integer")
    if not isinstance(agents, list) or not agents:
        raise InvalidInstance("agents must be a nonempty list")
    weights = []
    values = []
    for k, a in enumerate(agents):
        try:
            weights.append(parse_rational(a["weight"]))
            row = [parse_rational(v) for v in a["values"]]
        except (KeyError, TypeError) as exc:
            raise InvalidInstance(f"agent {k}: {exc}") from exc
        if len(row) != m:
            raise InvalidInstance(
                f"agent {k} has {len(row)} values, expected {m}"
            )
        values.append(row)
    scales = None
    if "scales" in obj:
        scales = [parse_rational(s) for s in obj["scales"]]
    return make_instance(weights, values, scales)


def allocation_to_obj(alloc: Allocation) -> dict:
    return {"owner": [i for i in alloc.owner]}


def allocation_from_obj(obj: Any) -> Allocation:
    if not isinstance(obj, dict) or "owner" not in obj:
        raise InvalidInstance("allocation JSON must be an object with 'owner'")
    owner = obj["owner"]
    if not isinstance(owner, list):
        raise InvalidInstance("'owner' must be a list")
    out = []
    for j, x in enumerate(owner):
        if x is None:
            out.append(None)
        elif isinstance(x, int) and not isinstance(x, bool):
            out.append(x)
        else:
            raise InvalidInstance(f"owner[{j}] must be an agent index or null")
    return Allocation(owner=tuple(out))


def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=2) + "\n"


def load_instance(path: str) -> Instance:
    with open(path, "r", encoding="utf-8") as fh:
        return instance_from_obj(json.load(fh))


def save_instance(path: str, instance: Instance) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(instance_to_obj(instance)))


def load_allocation(path: str) -> Allocation:
    with open(path, "r", encoding="utf-8") as fh:
        return allocation_from_obj(json.load(fh))


def save_allocation(path: str, alloc: Allocation) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(allocation_to_obj(alloc)))
