"""Command-line surface: solve, exact, verify, gen, bench.

Exit codes: 0 success, 2 invalid input or guard violation, 3 no allocation
with positive welfare exists, 4 numerical collapse in the ellipsoid.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import io
import json
import math
import random
import sys
import time
from typing import Optional

from . import jsonio
from .configlp import ColumnSolution, solve_configuration_lp
from .core import (
    Allocation,
    Instance,
    InvalidInstance,
    NumericalCollapse,
    TooLarge,
    log_nsw,
    nsw,
    validate,
)
from .gen import random_instance
from .reference import BRUTE_FORCE_GUARD, brute_force_opt, positivity_check
from .rounding import allocation_from_matching, round_combination

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NO_POSITIVE = 3
EXIT_COLLAPSE = 4


def _load_instance(path: str) -> Instance:
    try:
        inst = jsonio.load_instance(path)
        validate(inst)
        return inst
    except json.JSONDecodeError as exc:
        raise InvalidInstance(
            f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    except OSError as exc:
        raise InvalidInstance(f"{path}: {exc}") from exc


def _write_json(path: Optional[str], obj: dict) -> None:
    text = jsonio.dumps(obj)
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _gift_leftovers(instance: Instance, alloc: Allocation) -> Allocation:
    """Hand each unassigned item to a positive-weight agent valuing it most."""
    positive = [i for i in range(instance.num_agents) if instance.agents[i].weight > 0]
    owner = list(alloc.owner)
    for j, cur in enumerate(owner):
        if cur is not None:
            continue
        best = max(positive, key=lambda i: (instance.agents[i].values[j], -i))
        owner[j] = best
    return Allocation(owner=tuple(owner))


def solve_pipeline(
    instance: Instance,
    epsilon: float,
    mode: str = "deterministic",
    seed: int = 0,
    gift: bool = False,
) -> tuple[Allocation, ColumnSolution, int]:
    """Full solve: configuration LP at epsilon/4, then rounding.

    Returns (allocation, lp solution, number of matchings in the
    combination).  ``mode='sample'`` draws one matching with its convex
    weight instead of taking the best.
    """
    colsol = solve_configuration_lp(instance, epsilon / 4.0)
    comb = round_combination(instance, colsol)
    allocs = [
        allocation_from_matching(mat, instance.num_items) for mat in comb.matchings
    ]
    if mode == "sample":
        rng = random.Random(seed)
        u = rng.random()
        acc = 0.0
        pick = allocs[-1]
        for alloc, lam in zip(allocs, comb.weights):
            acc += float(lam)
            if u < acc:
                pick = alloc
                break
        chosen = pick
    else:
        chosen = max(allocs, key=lambda a: (log_nsw(instance, a),))
        # max() keeps the first argmax, so the choice is deterministic.
    if gift:
        chosen = _gift_leftovers(instance, chosen)
    return chosen, colsol, len(comb.matchings)


def _report(
    instance: Instance,
    alloc: Allocation,
    colsol: Optional[ColumnSolution],
    epsilon: float,
    matchings: int,
    runtime_ms: int,
) -> dict:
    lw = log_nsw(instance, alloc)
    value = nsw(instance, alloc)
    lp_value = colsol.lp_value if colsol is not None else None
    report = {
        "nsw": value,
        "log_nsw": None if lw == -math.inf else lw,
        "lp_value": lp_value,
        "epsilon": epsilon,
        "matchings": matchings,
        "runtime_ms": runtime_ms,
    }
    if lp_value is not None and value > 0:
        report["lp_ratio"] = math.exp(lp_value) / value
    return report


def cmd_solve(args) -> int:
    try:
        inst = _load_instance(args.instance)
    except InvalidInstance as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if not positivity_check(inst):
        alloc = Allocation(owner=(None,) * inst.num_items)
        _write_json(args.output, jsonio.allocation_to_obj(alloc))
        _write_json(args.report, _report(inst, alloc, None, args.epsilon, 0, 0))
        print("no allocation with positive welfare exists", file=sys.stderr)
        return EXIT_NO_POSITIVE
    t0 = time.monotonic()
    try:
        alloc, colsol, nmatch = solve_pipeline(
            inst, args.epsilon, mode=args.mode, seed=args.seed, gift=args.gift_leftovers
        )
    except NumericalCollapse as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COLLAPSE
    runtime_ms = int((time.monotonic() - t0) * 1000) if args.timings else 0
    _write_json(args.output, jsonio.allocation_to_obj(alloc))
    _write_json(args.report, _report(inst, alloc, colsol, args.epsilon, nmatch, runtime_ms))
    return EXIT_OK


def cmd_exact(args) -> int:
    try:
        inst = _load_instance(args.instance)
        alloc, lw = brute_force_opt(inst)
    except (InvalidInstance, TooLarge) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    _write_json(args.output, jsonio.allocation_to_obj(alloc))
    _write_json(
        args.report,
        {
            "nsw": nsw(inst, alloc),
            "log_nsw": None if lw == -math.inf else lw,
        },
    )
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        inst = _load_instance(args.instance)
        alloc = jsonio.load_allocation(args.allocation)
        value = nsw(inst, alloc)
        lw = log_nsw(inst, alloc)
    except (InvalidInstance, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    out = {"nsw": value, "log_nsw": None if lw == -math.inf else lw}
    if inst.num_agents**inst.num_items <= min(args.guard, BRUTE_FORCE_GUARD):
        _, opt_lw = brute_force_opt(inst)
        opt = 0.0 if opt_lw == -math.inf else math.exp(opt_lw)
        out["opt_nsw"] = opt
        out["ratio"] = opt / value if value > 0 else (1.0 if opt == 0 else math.inf)
    _write_json(args.output, out)
    return EXIT_OK


def cmd_gen(args) -> int:
    rng = random.Random(args.seed)
    try:
        inst = random_instance(
            args.agents,
            args.items,
            rng,
            dist=args.dist,
            vmax=args.vmax,
            weight_kind=args.weights,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    _write_json(args.output, jsonio.instance_to_obj(inst))
    return EXIT_OK


def _bench_one(task):
    path, epsilon = task
    inst = jsonio.load_instance(path)
    validate(inst)
    row = {"instance": path, "opt": "", "lp": "", "alg": "", "ratio": "", "runtime_ms": ""}
    t0 = time.monotonic()
    if not positivity_check(inst):
        row["alg"] = "0.0"
        row["lp"] = "0.0"
        row["opt"] = "0.0"
        row["ratio"] = "1.0"
        row["runtime_ms"] = str(int((time.monotonic() - t0) * 1000))
        return row
    alloc, colsol, _ = solve_pipeline(inst, epsilon)
    row["runtime_ms"] = str(int((time.monotonic() - t0) * 1000))
    alg = nsw(inst, alloc)
    row["alg"] = repr(alg)
    row["lp"] = repr(math.exp(colsol.lp_value))
    if inst.num_agents**inst.num_items <= BRUTE_FORCE_GUARD:
        _, opt_lw = brute_force_opt(inst)
        opt = 0.0 if opt_lw == -math.inf else math.exp(opt_lw)
        row["opt"] = repr(opt)
        if alg > 0:
            row["ratio"] = repr(opt / alg)
    return row


def cmd_bench(args) -> int:
    import glob
    import os

    paths = sorted(glob.glob(os.path.join(args.directory, "*.json")))
    if not paths:
        print(f"error: no instance files in {args.directory}", file=sys.stderr)
        return EXIT_INPUT
    tasks = [(p, args.epsilon) for p in paths]
    try:
        if args.jobs > 1:
            with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
                rows = list(pool.map(_bench_one, tasks))
        else:
            rows = [_bench_one(t) for t in tasks]
    except (InvalidInstance, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    buf = io.StringIO()
    writer = csv.DictWriter(
        buf, fieldnames=["instance", "opt", "lp", "alg", "ratio", "runtime_ms"]
    )
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    if args.output is None or args.output == "-":
        sys.stdout.write(buf.getvalue())
    else:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(buf.getvalue())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="nswlp",
        description="Weighted Nash social welfare solver (configuration LP + rounding).",
    )
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="approximate solve via the configuration LP")
    ps.add_argument("instance")
    ps.add_argument("-o", "--output", default=None, help="allocation JSON (default stdout)")
    ps.add_argument("--report", default=None, help="report JSON (default stdout)")
    ps.add_argument("--epsilon", type=float, default=0.1)
    ps.add_argument("--gift-leftovers", action="store_true")
    ps.add_argument("--mode", choices=["deterministic", "sample"], default="deterministic")
    ps.add_argument("--seed", type=int, default=0, help="used only by --mode sample")
    ps.add_argument("--timings", action="store_true", help="measure runtime_ms (breaks byte determinism)")
    ps.set_defaults(func=cmd_solve)

    pe = sub.add_parser("exact", help="exhaustive optimum (guarded)")
    pe.add_argument("instance")
    pe.add_argument("-o", "--output", default=None)
    pe.add_argument("--report", default=None)
    pe.set_defaults(func=cmd_exact)

    pv = sub.add_parser("verify", help="recompute welfare of an allocation file")
    pv.add_argument("instance")
    pv.add_argument("allocation")
    pv.add_argument("-o", "--output", default=None)
    pv.add_argument("--guard", type=int, default=BRUTE_FORCE_GUARD)
    pv.set_defaults(func=cmd_verify)

    pg = sub.add_parser("gen", help="generate a random instance")
    pg.add_argument("--agents", type=int, required=True)
    pg.add_argument("--items", type=int, required=True)
    pg.add_argument("--dist", choices=["uniform", "zipf"], default="uniform")
    pg.add_argument("--vmax", type=int, default=10)
    pg.add_argument("--weights", choices=["uniform", "dirichlet"], default="uniform")
    pg.add_argument("--seed", type=int, default=0)
    pg.add_argument("-o", "--output", default=None)
    pg.set_defaults(func=cmd_gen)

    pb = sub.add_parser("bench", help="solve every instance in a directory, emit CSV")
    pb.add_argument("directory")
    pb.add_argument("--epsilon", type=float, default=0.1)
    pb.add_argument("--jobs", type=int, default=1)
    pb.add_argument("-o", "--output", default=None)
    pb.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
