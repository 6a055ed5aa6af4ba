"""Solution concepts derived from a stable partition: reduced partitions,
maximum stable matchings, half-matchings, cycle statistics and alpha."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .engine import _even_cycle_pairs
from .errors import VerificationFailed
from .model import Instance, Matching, Partition, is_stable_partition

__all__ = [
    "CycleStats", "AlphaRatio", "HalfMatching",
    "reduce_partition", "max_stable_matching", "half_matching",
    "cycle_stats", "alpha", "has_matched_blocking_pair",
]


@dataclass(frozen=True)
class CycleStats:
    """Odd-cycle profile of a stable partition."""
    q: int                               # number of odd cycles (1-cycles included)
    odd_lengths: tuple[int, ...]         # sorted
    n_odd: int                           # agents in odd cycles
    has_fixed_point: bool
    per_length_counts: dict[int, int] = field(hash=False)


@dataclass(frozen=True)
class AlphaRatio:
    max_stable_size: int
    max_matching_size: int
    alpha: Fraction


@dataclass(frozen=True)
class HalfMatching:
    """Half-integral assignment induced by a stable partition: weight 1 on
    transpositions, 1/2 towards predecessor and successor on longer cycles.
    A fixed point carries a degenerate self-weight, reported separately."""
    weights: dict[tuple[int, int], float] = field(hash=False)
    self_weight: dict[int, float] = field(hash=False)

    def agent_total(self, i: int) -> float:
        total = self.self_weight.get(i, 0.0)
        for (a, b), w in self.weights.items():
            if i in (a, b):
                total += w
        return total


def reduce_partition(inst: Instance, p: Partition) -> Partition:
    """Replace every even cycle of length >= 4 by a stable transposition
    decomposition (canonical alignment first, the other on verification
    failure).  Idempotent; odd cycles pass through untouched."""
    succ = p.succ.copy()
    changed = False
    for c in p.cycles:
        if c.length >= 4 and c.length % 2 == 0:
            changed = True
            for i, j in _even_cycle_pairs(c.agents, 0):
                succ[i] = j
                succ[j] = i
    if not changed:
        return p
    out = Partition(succ)
    if is_stable_partition(inst, out):
        return out
    # retry per cycle with the alternate alignment
    succ = p.succ.copy()
    for c in p.cycles:
        if c.length >= 4 and c.length % 2 == 0:
            for offset in (0, 1):
                trial = succ.copy()
                for i, j in _even_cycle_pairs(c.agents, offset):
                    trial[i] = j
                    trial[j] = i
                probe = p.succ.copy()
                for i, j in _even_cycle_pairs(c.agents, offset):
                    probe[i] = j
                    probe[j] = i
                if is_stable_partition(inst, Partition(probe)):
                    succ = trial
                    break
            else:
                raise VerificationFailed("no stable decomposition for an even cycle")
    out = Partition(succ)
    if not is_stable_partition(inst, out):
        raise VerificationFailed("reduced partition failed verification")
    return out


def max_stable_matching(inst: Instance, p: Partition) -> Matching:
    """Maximum stable matching from a stable partition: drop the minimum-id
    agent of every odd cycle of length >= 3, pair the remainder along the
    cycle, decompose even cycles, leave 1-cycles unmatched.  Size (n - q)/2;
    no two matched agents form a blocking pair."""
    pairs = []
    for c in p.cycles:
        if c.length == 1:
            continue
        if c.length % 2 == 0:
            pairs.extend(_even_cycle_pairs(c.agents, 0))
        else:
            rest = c.agents[1:]          # canonical form puts the min id first
            pairs.extend((rest[2 * i], rest[2 * i + 1]) for i in range(len(rest) // 2))
    m = Matching.from_pairs(inst.n, pairs)
    if has_matched_blocking_pair(inst, m):
        raise VerificationFailed("maximum stable matching has a matched-matched blocker")
    return m


def has_matched_blocking_pair(inst: Instance, m: Matching) -> bool:
    """Blocking-pair scan restricted to pairs of agents that both have a
    partner (the stability notion for maximum stable matchings)."""
    n = inst.n
    partner = m.partner
    idx = np.arange(n)
    matched = partner >= 0
    cur = np.where(matched, inst.rank[idx, np.abs(partner)], 0)
    better = (inst.rank < cur[:, None]) & matched[None, :] & matched[:, None]
    return bool(np.any(better & better.T))


def half_matching(p: Partition) -> HalfMatching:
    weights: dict[tuple[int, int], float] = {}
    self_weight: dict[int, float] = {}
    for c in p.cycles:
        if c.length == 1:
            self_weight[c.agents[0]] = 1.0
        elif c.length == 2:
            weights[c.agents] = 1.0
        else:
            for i, a in enumerate(c.agents):
                b = c.agents[(i + 1) % c.length]
                weights[(min(a, b), max(a, b))] = 0.5
    return HalfMatching(weights, self_weight)


def cycle_stats(p: Partition) -> CycleStats:
    odd = sorted(c.length for c in p.cycles if c.length % 2 == 1)
    counts: dict[int, int] = {}
    for length in odd:
        counts[length] = counts.get(length, 0) + 1
    return CycleStats(
        q=len(odd),
        odd_lengths=tuple(odd),
        n_odd=sum(odd),
        has_fixed_point=bool(odd and odd[0] == 1),
        per_length_counts=counts,
    )


def alpha(inst: Instance, p: Partition) -> AlphaRatio:
    """Ratio of the maximum-stable-matching size to floor(n/2)."""
    q = sum(1 for c in p.cycles if c.length % 2 == 1)
    max_stable = (inst.n - q) // 2
    return AlphaRatio(max_stable, inst.n // 2, Fraction(max_stable, inst.n // 2))
