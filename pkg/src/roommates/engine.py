"""Stable-partition engine: backend selection, verification, solving.

The compiled kernel is used when available; set ROOMMATES_PURE=1 to force
the pure-Python backend.  Both produce identical partitions.
"""
from __future__ import annotations

import os

import numpy as np

from . import _engine_py
from .errors import NotEvenCycle, VerificationFailed
from .model import (Cycle, Instance, Matching, Partition, is_stable_matching,
                    is_stable_partition)

__all__ = [
    "stable_partition", "is_solvable", "solve", "even_cycle_decompositions",
    "EngineState", "add_agent", "backend_name", "kernel",
]

if os.environ.get("ROOMMATES_PURE", "") not in ("", "0"):
    kernel = None
else:
    try:
        from . import _kernel as kernel
    except ImportError:
        kernel = None


def backend_name() -> str:
    return "compiled" if kernel is not None else "pure"


def _raw_partition(n: int, prefs, rank):
    if kernel is not None:
        return kernel.stable_partition_raw(n, prefs, rank)
    if isinstance(prefs, np.ndarray):
        prefs = prefs.tolist()
        rank = rank.tolist()
    return _engine_py.stable_partition_raw(n, prefs, rank)


def stable_partition(inst: Instance, verify: bool = True) -> Partition:
    """A stable partition of the instance; deterministic, always reduced.

    The output is re-checked against the T1/T2 verifier unless verify=False;
    a failure is an engine bug, never a property of the instance.
    """
    succ = _raw_partition(inst.n, inst.prefs, inst.rank)
    p = Partition(np.asarray(succ, dtype=np.int32))
    if verify and not is_stable_partition(inst, p):
        raise VerificationFailed(f"engine produced an unstable partition for n={inst.n}")
    return p


def is_solvable(inst: Instance) -> bool:
    """True iff no odd cycle of length >= 3 exists in a stable partition."""
    p = stable_partition(inst)
    return not any(c.length >= 3 for c in p.odd_cycles())


def _even_cycle_pairs(agents: tuple[int, ...], offset: int) -> list[tuple[int, int]]:
    k = len(agents)
    return [(agents[(2 * i + offset) % k], agents[(2 * i + 1 + offset) % k])
            for i in range(k // 2)]


def solve(inst: Instance, partition: Partition | None = None) -> Matching | None:
    """A stable matching if the instance is solvable, else None.

    Even cycles decompose into adjacent pairs aligned with the canonical
    rotation; the at-most-one 1-cycle agent stays unmatched.
    """
    p = partition if partition is not None else stable_partition(inst)
    pairs = []
    for c in p.cycles:
        if c.length == 1:
            continue
        if c.length % 2 == 1:
            return None
        pairs.extend(_even_cycle_pairs(c.agents, 0))
    m = Matching.from_pairs(inst.n, pairs)
    if not is_stable_matching(inst, m):
        raise VerificationFailed("solve built an unstable matching from a stable partition")
    return m


def even_cycle_decompositions(inst: Instance, cycle: Cycle,
                              partition: Partition | None = None):
    """The two adjacent-pair decompositions of an even cycle of length >= 4.

    When the partition the cycle came from is supplied, each decomposition is
    verified stable as a substitution for the cycle.
    """
    if cycle.length < 4 or cycle.length % 2 == 1:
        raise NotEvenCycle(f"need an even cycle of length >= 4, got length {cycle.length}")
    decomps = [_even_cycle_pairs(cycle.agents, 0), _even_cycle_pairs(cycle.agents, 1)]
    if partition is not None:
        for pairs in decomps:
            succ = partition.succ.copy()
            for i, j in pairs:
                succ[i] = j
                succ[j] = i
            if not is_stable_partition(inst, Partition(succ)):
                raise VerificationFailed("even-cycle decomposition is not stable")
    return decomps


class EngineState:
    """Quiescent snapshot of the incremental engine over the first k agents.

    add_agent recomputes the prefix partition from scratch (the informative
    proposal loop is an implementation detail the contract never observes, so
    states are always quiescent: no proposer, no head, and cursor[i] is the
    position of i's successor in its restricted preference list).
    """

    def __init__(self, instance: Instance, processed: int = 0,
                 succ: np.ndarray | None = None):
        self.instance = instance
        self.processed = processed
        self.succ = succ if succ is not None else np.empty(0, dtype=np.int32)
        self.proposer = None
        self.head = None

    @property
    def pred(self) -> np.ndarray:
        pred = np.empty(self.processed, dtype=np.int32)
        pred[self.succ] = np.arange(self.processed, dtype=np.int32)
        return pred

    @property
    def cursor(self) -> list[int]:
        out = []
        for i in range(self.processed):
            row = self.instance.prefs[i]
            s = self.succ[i]
            out.append(sum(1 for v in row if v < self.processed and
                           self.instance.rank[i, v] < self.instance.rank[i, s]))
        return out

    def partition(self) -> Partition:
        if self.processed != self.instance.n:
            raise ValueError("partition() requires all agents processed")
        return Partition(self.succ.copy())


def _prefix_instance(inst: Instance, k: int):
    rows = [[int(v) for v in inst.prefs[i] if v < k] for i in range(k)]
    rank = [[0] * k for _ in range(k)]
    for i in range(k):
        rank[i][i] = k
        for pos, j in enumerate(rows[i]):
            rank[i][j] = pos + 1
    return rows, rank


def add_agent(state: EngineState, instance: Instance | None = None,
              debug: bool = False) -> EngineState:
    """New quiescent state with the next agent inserted.

    In debug mode the resulting prefix partition is re-verified; failure
    signals an engine bug, never a legal outcome.
    """
    inst = instance if instance is not None else state.instance
    k = state.processed + 1
    if k > inst.n:
        raise ValueError("all agents already processed")
    rows, rank = _prefix_instance(inst, k)
    succ = _engine_py.stable_partition_raw(k, rows, rank)
    if debug:
        for i in range(k):
            s = succ[i]
            p = succ.index(i)
            if rank[i][s] > rank[i][p]:
                raise VerificationFailed(f"prefix T1 violated at agent {i} (k={k})")
        for i in range(k):
            bi = rank[i][succ.index(i)]
            for j in range(i + 1, k):
                if rank[i][j] < bi and rank[j][i] < rank[j][succ.index(j)]:
                    raise VerificationFailed(f"prefix T2 violated at ({i},{j}) (k={k})")
    return EngineState(inst, k, np.asarray(succ, dtype=np.int32))
