"""Seeded Monte Carlo harness, exact small-n solvability, curve fits, CSV.

Determinism: per-trial seeds derive from (master, culture, n, trial), cell
aggregates are exact integer/Fraction sums combined in fixed chunk order, so
a config produces byte-identical CSV at any worker count.  The wall-clock
column is NA unless timing is explicitly enabled, since measured times can
never be reproducible.
"""
from __future__ import annotations

import itertools
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from . import engine
from .derive import alpha, cycle_stats
from .enumeration import (DEFAULT_BUDGET, collect_cycles_and_pairs,
                          enum_all_partitions, enum_reduced_partitions,
                          enum_stable_matchings, SolutionSets)
from .errors import BudgetExceeded, TooLargeForExact, TooSmall
from .generators import Culture, generate
from .model import Instance, build_instance

__all__ = [
    "CSV_HEADER", "STAT_GROUPS", "ExperimentConfig", "ExperimentRecord",
    "TrialStats", "FitResult", "compute_trial", "run_experiment",
    "alpha_sweep", "exact_pn", "fit_power_law", "fit_sqrt_log",
]

CSV_HEADER = ("culture,n,trials,seed,solvable,p_hat,avg_P,avg_RP,avg_M,"
              "avg_SC,avg_RSC,avg_SP,avg_nodd,avg_odd_len,avg_odd_cnt,"
              "c1,c3,c5,c7,c9,c11,c13plus,alpha_hat,timeouts,ms")

STAT_GROUPS = ("solvability", "partitions", "cycles", "oddcycles", "alpha")

# odd-length histogram columns; longer cycles fold into the 13+ bucket
_LENGTH_BUCKETS = (1, 3, 5, 7, 9, 11)

_CHUNK = 256


@dataclass(frozen=True)
class ExperimentConfig:
    cultures: tuple[Culture, ...]
    sizes: tuple[int, ...]
    trials: int = 10000
    seed: int = 0
    stats: frozenset = frozenset({"solvability", "oddcycles", "alpha"})
    budget: int = DEFAULT_BUDGET
    threads: int = 1
    enum_ceiling: int = 64
    out: str | None = None
    timing: bool = False

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if any(n < 2 for n in self.sizes):
            raise ValueError("sizes must be >= 2")
        unknown = set(self.stats) - set(STAT_GROUPS) - {"all"}
        if unknown:
            raise ValueError(f"unknown stats {sorted(unknown)}; choose from {STAT_GROUPS}")

    def stat_set(self) -> frozenset:
        if "all" in self.stats:
            return frozenset(STAT_GROUPS)
        return frozenset(self.stats)


@dataclass(frozen=True)
class TrialStats:
    """Per-trial statistics; enumeration counts are None when not computed."""
    solvable: bool
    q: int
    odd_lengths: tuple[int, ...]
    alpha: Fraction
    n_p: int | None = None
    n_rp: int | None = None
    n_m: int | None = None
    n_sc: int | None = None
    n_rsc: int | None = None
    n_sp: int | None = None
    timeout: bool = False


def compute_trial(culture: Culture, n: int, seed: int, trial: int,
                  enum_counts: bool = False, budget: int = DEFAULT_BUDGET) -> TrialStats:
    """One trial from its derived seed; the audit hook for any cell entry."""
    inst = generate(culture, n, seed, trial)
    part = engine.stable_partition(inst)
    cs = cycle_stats(part)
    a = alpha(inst, part).alpha
    solvable = not any(length >= 3 for length in cs.odd_lengths)
    # unsolvable instances carry at least two odd cycles (even n) or one (odd)
    assert solvable or cs.q >= (2 if n % 2 == 0 else 1)
    if not enum_counts:
        return TrialStats(solvable, cs.q, cs.odd_lengths, a)
    try:
        res = enum_all_partitions(inst, budget, partition=part)
        if res.budget_exhausted:
            raise BudgetExceeded("partition enumeration budget exhausted")
        rp = enum_reduced_partitions(inst, budget, partition=part)
        m = enum_stable_matchings(inst, budget, partition=part) if solvable else None
    except BudgetExceeded:
        return TrialStats(solvable, cs.q, cs.odd_lengths, a, timeout=True)
    sets = collect_cycles_and_pairs(SolutionSets(
        matchings=m, reduced_partitions=rp, all_partitions=res.partitions))
    return TrialStats(
        solvable, cs.q, cs.odd_lengths, a,
        n_p=len(sets.all_partitions),
        n_rp=len(sets.reduced_partitions),
        n_m=len(sets.matchings) if m is not None else None,
        n_sc=len(sets.stable_cycles),
        n_rsc=len(sets.reduced_stable_cycles),
        n_sp=len(sets.stable_pairs) if m is not None else None,
    )


@dataclass
class _CellAggregate:
    trials: int = 0
    timeouts: int = 0
    solvable: int = 0
    sum_alpha: Fraction = Fraction(0)
    unsolvable: int = 0
    sum_nodd: int = 0
    sum_q: int = 0
    length_counts: dict = field(default_factory=dict)
    sum_p: int = 0
    sum_rp: int = 0
    sum_m: int = 0
    sum_sc: int = 0
    sum_rsc: int = 0
    sum_sp: int = 0
    solvable_enum: int = 0          # solvable non-timeout trials (for avg_M/avg_SP)

    def add(self, t: TrialStats):
        self.trials += 1
        if t.timeout:
            self.timeouts += 1
            return
        self.solvable += t.solvable
        self.sum_alpha += t.alpha
        if not t.solvable:
            self.unsolvable += 1
            self.sum_nodd += sum(t.odd_lengths)
            self.sum_q += t.q
            for length in t.odd_lengths:
                key = length if length <= _LENGTH_BUCKETS[-1] else -1
                self.length_counts[key] = self.length_counts.get(key, 0) + 1
        if t.n_p is not None:
            self.sum_p += t.n_p
            self.sum_rp += t.n_rp
            self.sum_sc += t.n_sc
            self.sum_rsc += t.n_rsc
            if t.n_m is not None:
                self.solvable_enum += 1
                self.sum_m += t.n_m
                self.sum_sp += t.n_sp

    def merge(self, other: "_CellAggregate"):
        self.trials += other.trials
        self.timeouts += other.timeouts
        self.solvable += other.solvable
        self.sum_alpha += other.sum_alpha
        self.unsolvable += other.unsolvable
        self.sum_nodd += other.sum_nodd
        self.sum_q += other.sum_q
        for k, v in other.length_counts.items():
            self.length_counts[k] = self.length_counts.get(k, 0) + v
        self.sum_p += other.sum_p
        self.sum_rp += other.sum_rp
        self.sum_m += other.sum_m
        self.sum_sc += other.sum_sc
        self.sum_rsc += other.sum_rsc
        self.sum_sp += other.sum_sp
        self.solvable_enum += other.solvable_enum


@dataclass(frozen=True)
class ExperimentRecord:
    """One aggregated (culture, n) row of the CSV."""
    culture: str
    n: int
    trials: int
    seed: int
    stats: frozenset
    agg: _CellAggregate
    ms: int | None = None

    def _fmt(self, value) -> str:
        if value is None:
            return "NA"
        if isinstance(value, (int, np.integer)):
            return str(int(value))
        return f"{float(value):.6f}"

    def values(self) -> dict:
        g = self.agg
        valid = g.trials - g.timeouts
        want = self.stats
        out = {
            "culture": self.culture, "n": self.n, "trials": self.trials,
            "seed": self.seed, "timeouts": g.timeouts,
            "solvable": g.solvable if "solvability" in want else None,
            "p_hat": Fraction(g.solvable, valid) if "solvability" in want and valid else None,
            "avg_P": None, "avg_RP": None, "avg_M": None,
            "avg_SC": None, "avg_RSC": None, "avg_SP": None,
            "avg_nodd": None, "avg_odd_len": None, "avg_odd_cnt": None,
            "alpha_hat": None, "ms": self.ms,
        }
        for b in _LENGTH_BUCKETS:
            out[f"c{b}"] = None
        out["c13plus"] = None
        if "partitions" in want and valid:
            out["avg_P"] = Fraction(g.sum_p, valid)
            out["avg_RP"] = Fraction(g.sum_rp, valid)
            out["avg_M"] = Fraction(g.sum_m, g.solvable_enum) if g.solvable_enum else None
        if "cycles" in want and valid:
            out["avg_SC"] = Fraction(g.sum_sc, valid)
            out["avg_RSC"] = Fraction(g.sum_rsc, valid)
            out["avg_SP"] = Fraction(g.sum_sp, g.solvable_enum) if g.solvable_enum else None
        if "oddcycles" in want and g.unsolvable:
            out["avg_nodd"] = Fraction(g.sum_nodd, g.unsolvable)
            out["avg_odd_cnt"] = Fraction(g.sum_q, g.unsolvable)
            out["avg_odd_len"] = Fraction(g.sum_nodd, g.sum_q) if g.sum_q else None
            for b in _LENGTH_BUCKETS:
                out[f"c{b}"] = Fraction(g.length_counts.get(b, 0), g.unsolvable)
            out["c13plus"] = Fraction(g.length_counts.get(-1, 0), g.unsolvable)
        if "alpha" in want and valid:
            out["alpha_hat"] = Fraction(g.sum_alpha, valid)
        return out

    def csv_row(self) -> str:
        v = self.values()
        cols = CSV_HEADER.split(",")
        parts = []
        for col in cols:
            x = v[col]
            if col in ("culture",):
                parts.append(str(x))
            elif col in ("n", "trials", "seed", "solvable", "timeouts", "ms"):
                parts.append(self._fmt(x) if not isinstance(x, str) else x)
            else:
                parts.append(self._fmt(x))
        return ",".join(parts)


def _chunk_task(args):
    culture, n, seed, start, stop, enum_counts, budget = args
    agg = _CellAggregate()
    for trial in range(start, stop):
        agg.add(compute_trial(culture, n, seed, trial, enum_counts, budget))
    return agg


def _resolve_threads(threads: int | None) -> int:
    # SR_THREADS overrides whatever the config or CLI asked for
    env = os.environ.get("SR_THREADS", "")
    if env:
        return max(1, int(env))
    return max(1, threads if threads else 1)


def run_experiment(config: ExperimentConfig) -> list[ExperimentRecord]:
    """Run every (culture, n) cell; write CSV when config.out is set.

    Symmetric cells with odd n have no defined generator and are skipped
    with a note on stderr, mirroring their absence from the result tables.
    """
    stats = config.stat_set()
    threads = _resolve_threads(config.threads)
    records = []
    cells = []
    for culture in config.cultures:
        for n in config.sizes:
            if culture.tag == "symmetric" and n % 2 == 1:
                print(f"note: skipping unsupported cell ({culture.tag}, n={n})",
                      file=sys.stderr)
                continue
            cells.append((culture, n))
    cell_tasks = []
    for culture, n in cells:
        enum_counts = bool({"partitions", "cycles"} & stats) and n <= config.enum_ceiling
        if {"partitions", "cycles"} & stats and n > config.enum_ceiling:
            print(f"note: enumeration stats disabled for n={n} "
                  f"(> ceiling {config.enum_ceiling})", file=sys.stderr)
        # smaller chunks when few trials, so large-n cells still parallelize;
        # aggregation is exact, so chunk boundaries never affect the result
        chunk = max(1, min(_CHUNK, math.ceil(config.trials / (threads * 8))))
        tasks = [(culture, n, config.seed, start, min(start + chunk, config.trials),
                  enum_counts, config.budget)
                 for start in range(0, config.trials, chunk)]
        cell_tasks.append(((culture, n), tasks))

    def run_tasks(tasks):
        if threads > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                return list(pool.map(_chunk_task, tasks, chunksize=1))
        return [_chunk_task(t) for t in tasks]

    by_cell = {}
    cell_ms = {}
    if config.timing:
        # cells run one at a time so each row reports its own wall clock
        for key, tasks in cell_tasks:
            t0 = time.monotonic()
            partials = run_tasks(tasks)
            cell_ms[key] = int((time.monotonic() - t0) * 1000)
            agg = by_cell.setdefault(key, _CellAggregate())
            for part in partials:
                agg.merge(part)
    else:
        flat = [t for _, tasks in cell_tasks for t in tasks]
        partials = run_tasks(flat)
        for task, part in zip(flat, partials):
            key = (task[0], task[1])
            agg = by_cell.setdefault(key, _CellAggregate())
            agg.merge(part)
    for culture, n in cells:
        agg = by_cell[(culture, n)]
        records.append(ExperimentRecord(culture.tag, n, config.trials,
                                        config.seed, stats, agg,
                                        cell_ms.get((culture, n))))
    if config.out:
        with open(config.out, "w", encoding="utf-8") as f:
            f.write(CSV_HEADER + "\n")
            for rec in records:
                f.write(rec.csv_row() + "\n")
    return records


def alpha_sweep(config: ExperimentConfig) -> list[ExperimentRecord]:
    """run_experiment restricted to solvability and alpha statistics."""
    return run_experiment(replace(config, stats=frozenset({"solvability", "alpha"})))


# ---------------------------------------------------------------------------
# exact P_n by exhaustive profile enumeration

def exact_pn(n: int) -> Fraction:
    """Exact solvable fraction over all ((n-1)!)^n preference profiles."""
    if n < 2:
        raise TooSmall(f"need at least 2 agents, got {n}")
    if n > 5:
        raise TooLargeForExact("exact enumeration supports n <= 5")
    if engine.kernel is not None:
        solvable, total = engine.kernel.count_solvable_profiles(n)
        return Fraction(solvable, total)
    from ._engine_py import stable_partition_raw
    others = [[j for j in range(n) if j != i] for i in range(n)]
    row_choices = [list(itertools.permutations(o)) for o in others]
    rank = [[n] * n for _ in range(n)]
    solvable = 0
    total = 0
    for profile in itertools.product(*row_choices):
        total += 1
        for i, row in enumerate(profile):
            ri = rank[i]
            for k, a in enumerate(row):
                ri[a] = k + 1
        succ = stable_partition_raw(n, profile, rank)
        seen = [False] * n
        ok = True
        for s in range(n):
            if seen[s]:
                continue
            length = 0
            a = s
            while not seen[a]:
                seen[a] = True
                a = succ[a]
                length += 1
            if length >= 3 and length % 2 == 1:
                ok = False
                break
        solvable += ok
    return Fraction(solvable, total)


# ---------------------------------------------------------------------------
# curve fits

@dataclass(frozen=True)
class FitResult:
    model: str
    params: dict
    residual: float


def _fit_points(points):
    pts = [(float(x), float(y)) for x, y in points]
    from .errors import DegenerateInput
    if len(pts) < 3:
        raise DegenerateInput("need at least 3 points")
    if any(x <= 0 or y <= 0 for x, y in pts):
        raise DegenerateInput("points must be positive")
    xs = np.array([x for x, _ in pts])
    ys = np.array([y for _, y in pts])
    return xs, ys


def fit_power_law(points) -> FitResult:
    """Least squares for y = a * x^b on (ln x, ln y)."""
    xs, ys = _fit_points(points)
    lx, ly = np.log(xs), np.log(ys)
    coeffs = np.polyfit(lx, ly, 1)
    b, ln_a = float(coeffs[0]), float(coeffs[1])
    resid = ly - (ln_a + b * lx)
    return FitResult("power-law", {"a": float(np.exp(ln_a)), "b": b},
                     float(np.sqrt(np.mean(resid * resid))))


def fit_sqrt_log(points) -> FitResult:
    """One-parameter least squares for y = c * sqrt(x / ln x)."""
    xs, ys = _fit_points(points)
    from .errors import DegenerateInput
    if np.any(xs < 2):
        raise DegenerateInput("sqrt-log model needs x >= 2")
    g = np.sqrt(xs / np.log(xs))
    c = float(np.dot(ys, g) / np.dot(g, g))
    resid = ys - c * g
    return FitResult("sqrt-log", {"c": c},
                     float(np.sqrt(np.mean(resid * resid))))
