"""Command-line interface: gen, solve, partition, enum, verify, experiment,
exact-pn.  JSON goes to stdout, diagnostics to stderr; exit codes: 0 success
(solve: solvable), 1 usage error, 2 input/validation error, 3 solve on an
unsolvable instance, 4 budget exhausted."""
from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

from . import __version__
from . import engine
from .derive import alpha, cycle_stats, max_stable_matching
from .enumeration import (DEFAULT_BUDGET, enum_all_partitions,
                          enum_reduced_partitions, enum_stable_matchings,
                          collect_cycles_and_pairs, SolutionSets)
from .errors import BudgetExceeded, RoommatesError, Unsolvable
from .experiments import (CSV_HEADER, ExperimentConfig, STAT_GROUPS,
                          exact_pn, run_experiment)
from .generators import CULTURES, Culture, generate
from .model import (Instance, is_stable_matching, is_stable_partition,
                    matching_from_json, matching_to_json, parse_instance,
                    partition_from_json, partition_to_json, serialize_instance)

FORMAT_VERSION = 1

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_UNSOLVABLE = 3
EXIT_BUDGET = 4


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="roommates", description=__doc__)
    p.add_argument("--version", action="store_true", help="print toolkit and format versions")
    sub = p.add_subparsers(dest="command")

    g = sub.add_parser("gen", help="generate an instance from a statistical culture")
    g.add_argument("--culture", required=True, choices=CULTURES)
    g.add_argument("--n", required=True, type=int)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--trial", type=int, default=0)
    g.add_argument("--phi", type=float, default=0.5)
    g.add_argument("--out", help="output path (default: stdout)")

    s = sub.add_parser("solve", help="print a stable matching or UNSOLVABLE")
    s.add_argument("instance")

    q = sub.add_parser("partition", help="print a stable partition")
    q.add_argument("instance")
    q.add_argument("--stats", action="store_true", help="also print cycle statistics")

    e = sub.add_parser("enum", help="enumerate solution sets")
    e.add_argument("instance")
    e.add_argument("--kind", required=True, choices=("matchings", "reduced", "all", "cycles"))
    e.add_argument("--budget", type=int, default=DEFAULT_BUDGET)

    v = sub.add_parser("verify", help="verify a matching or partition JSON against an instance")
    v.add_argument("instance")
    v.add_argument("candidate")

    x = sub.add_parser("experiment", help="run a Monte Carlo experiment to CSV")
    x.add_argument("--config", help="key=value config file")
    x.add_argument("--cultures", help="comma-separated culture tags")
    x.add_argument("--sizes", help="comma-separated instance sizes")
    x.add_argument("--trials", type=int)
    x.add_argument("--seed", type=int)
    x.add_argument("--stats", help=f"comma-separated from {','.join(STAT_GROUPS)} or 'all'")
    x.add_argument("--budget", type=int)
    x.add_argument("--threads", type=int)
    x.add_argument("--enum-ceiling", type=int, dest="enum_ceiling")
    x.add_argument("--phi", type=float)
    x.add_argument("--timing", action="store_true", default=None)
    x.add_argument("--out", help="CSV output path")

    n = sub.add_parser("exact-pn", help="exact solvability probability for n <= 5")
    n.add_argument("--n", required=True, type=int)
    return p


def _read_instance(path: str) -> Instance:
    with open(path, encoding="utf-8") as f:
        return parse_instance(f.read())


def _cmd_gen(args) -> int:
    culture = Culture(args.culture, args.phi)
    inst = generate(culture, args.n, args.seed, args.trial)
    text = serialize_instance(inst)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_solve(args) -> int:
    inst = _read_instance(args.instance)
    m = engine.solve(inst)
    if m is None:
        print("UNSOLVABLE")
        return EXIT_UNSOLVABLE
    print(matching_to_json(m))
    return EXIT_OK


def _cmd_partition(args) -> int:
    inst = _read_instance(args.instance)
    p = engine.stable_partition(inst)
    print(partition_to_json(p))
    if args.stats:
        cs = cycle_stats(p)
        a = alpha(inst, p)
        print(json.dumps({
            "q": cs.q,
            "odd_lengths": list(cs.odd_lengths),
            "n_odd": cs.n_odd,
            "alpha": str(a.alpha),
        }))
    return EXIT_OK


def _cmd_enum(args) -> int:
    inst = _read_instance(args.instance)
    part = engine.stable_partition(inst)
    solvable = not any(c.length >= 3 for c in part.odd_cycles())
    exhausted = False
    try:
        if args.kind == "matchings":
            sols = sorted(enum_stable_matchings(inst, args.budget, partition=part),
                          key=lambda m: m.key())
            payload = [json.loads(matching_to_json(m)) for m in sols]
        elif args.kind == "reduced":
            sols = sorted(enum_reduced_partitions(inst, args.budget, partition=part),
                          key=lambda p: p.key())
            payload = [json.loads(partition_to_json(p)) for p in sols]
        elif args.kind == "all":
            res = enum_all_partitions(inst, args.budget, partition=part)
            exhausted = res.budget_exhausted
            sols = sorted(res.partitions, key=lambda p: p.key())
            payload = [json.loads(partition_to_json(p)) for p in sols]
        else:
            res = enum_all_partitions(inst, args.budget, partition=part)
            exhausted = res.budget_exhausted
            sets = SolutionSets(all_partitions=res.partitions)
            collect_cycles_and_pairs(sets)
            sols = sorted(sets.stable_cycles, key=lambda c: c.agents)
            payload = [[a + 1 for a in c.agents] for c in sols]
    except Unsolvable as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSOLVABLE
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    print(json.dumps(payload))
    print(json.dumps({"count": len(payload), "budget_exhausted": exhausted}))
    return EXIT_BUDGET if exhausted else EXIT_OK


def _cmd_verify(args) -> int:
    inst = _read_instance(args.instance)
    with open(args.candidate, encoding="utf-8") as f:
        text = f.read()
    obj = json.loads(text)
    if "pairs" in obj:
        m = matching_from_json(text, inst.n)
        stable = is_stable_matching(inst, m)
    elif "cycles" in obj:
        p = partition_from_json(text, inst.n)
        stable = is_stable_partition(inst, p)
    else:
        print("error: candidate JSON has neither 'pairs' nor 'cycles'", file=sys.stderr)
        return EXIT_INPUT
    print("STABLE" if stable else "UNSTABLE")
    return EXIT_OK


def _parse_config_file(path: str) -> dict:
    out = {}
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise RoommatesError(f"{path}:{lineno}: expected key=value")
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out


def _cmd_experiment(args) -> int:
    cfg = _parse_config_file(args.config) if args.config else {}

    def pick(flag, key, cast, default):
        if flag is not None:
            return flag
        if key in cfg:
            return cast(cfg[key])
        return default

    cultures = pick(args.cultures, "cultures", str, None)
    sizes = pick(args.sizes, "sizes", str, None)
    if not cultures or not sizes:
        raise _UsageError("experiment needs --cultures and --sizes (or a config file)")
    phi = pick(args.phi, "phi", float, 0.5)
    stats = pick(args.stats, "stats", str, "solvability,oddcycles,alpha")
    config = ExperimentConfig(
        cultures=tuple(Culture(tag.strip(), phi) for tag in cultures.split(",")),
        sizes=tuple(int(s) for s in sizes.split(",")),
        trials=pick(args.trials, "trials", int, 10000),
        seed=pick(args.seed, "seed", int, 0),
        stats=frozenset(s.strip() for s in stats.split(",")),
        budget=pick(args.budget, "budget", int, DEFAULT_BUDGET),
        threads=pick(args.threads, "threads", int, 1),
        enum_ceiling=pick(args.enum_ceiling, "enum_ceiling", int, 64),
        out=pick(args.out, "out", str, None),
        timing=bool(pick(args.timing, "timing", lambda v: v.lower() in ("1", "true", "yes"), False)),
    )
    records = run_experiment(config)
    if not config.out:
        print(CSV_HEADER)
        for rec in records:
            print(rec.csv_row())
    return EXIT_OK


def _cmd_exact_pn(args) -> int:
    p = exact_pn(args.n)
    total = math.factorial(args.n - 1) ** args.n
    print(f"{p * total}/{total} = {float(p):.4f}")
    return EXIT_OK


_COMMANDS = {
    "gen": _cmd_gen,
    "solve": _cmd_solve,
    "partition": _cmd_partition,
    "enum": _cmd_enum,
    "verify": _cmd_verify,
    "experiment": _cmd_experiment,
    "exact-pn": _cmd_exact_pn,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.version:
            print(f"roommates {__version__} (format {FORMAT_VERSION})")
            return EXIT_OK
        if not args.command:
            raise _UsageError("missing subcommand")
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (RoommatesError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def entry():
    raise SystemExit(main())
