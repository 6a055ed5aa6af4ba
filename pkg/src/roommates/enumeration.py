"""Enumeration of stable matchings, reduced and all stable partitions, and
the distinct cycles/pairs they contain, with brute-force oracles at small n.

The enumerators fix the invariant odd cycles (identical in every stable
partition) and backtrack over the remaining agents: transposition sets for
matchings and reduced partitions, even-cycle structures of any length for
the full partition set.  Branching follows the lowest unassigned agent with
candidates in its preference order, pruning on pairwise T2 violations as
soon as both predecessors are known and on T1 at cycle closure; surviving
leaves are re-verified before being collected.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import engine
from .errors import BudgetExceeded, TooLargeForOracle, Unsolvable
from .model import Cycle, Instance, Matching, Partition

__all__ = [
    "DEFAULT_BUDGET", "EnumResult", "SolutionSets",
    "brute_all_matchings", "brute_all_partitions",
    "enum_stable_matchings", "enum_reduced_partitions", "enum_all_partitions",
    "collect_cycles_and_pairs", "solution_sets",
]

DEFAULT_BUDGET = 10 ** 8

BRUTE_MATCHING_LIMIT = 12
BRUTE_PARTITION_LIMIT = 8


@dataclass
class EnumResult:
    """Full stable-partition set, possibly partial if the budget ran out."""
    partitions: set[Partition]
    nodes: int
    budget_exhausted: bool


@dataclass
class SolutionSets:
    """Solution family of one instance.  Fields are None when undefined
    (matchings of an unsolvable instance) or not computed."""
    matchings: set[Matching] | None = None
    reduced_partitions: set[Partition] | None = None
    all_partitions: set[Partition] | None = None
    stable_cycles: set[Cycle] | None = None
    reduced_stable_cycles: set[Cycle] | None = None
    stable_pairs: set[tuple[int, int]] | None = None
    budget_exhausted: bool = False


# ---------------------------------------------------------------------------
# brute-force oracles

def _perfectish_matchings(agents, may_skip_one):
    """All pair lists matching everyone, or all but one if may_skip_one."""
    if not agents:
        yield []
        return
    x = agents[0]
    rest = agents[1:]
    if may_skip_one:
        yield from _perfectish_matchings(rest, False)
    for k, y in enumerate(rest):
        others = rest[:k] + rest[k + 1:]
        for tail in _perfectish_matchings(others, may_skip_one):
            yield [(x, y)] + tail


def brute_all_matchings(inst: Instance) -> set[Matching]:
    """Every stable matching, by checking all perfect (n even) or
    one-unmatched (n odd) matchings; n <= 12."""
    n = inst.n
    if n > BRUTE_MATCHING_LIMIT:
        raise TooLargeForOracle(f"brute matching oracle is limited to n <= {BRUTE_MATCHING_LIMIT}")
    rank = inst.rank.tolist()
    out = set()
    for pairs in _perfectish_matchings(list(range(n)), n % 2 == 1):
        partner = [-1] * n
        for i, j in pairs:
            partner[i] = j
            partner[j] = i
        if _stable_matching_small(n, rank, partner):
            out.add(Matching.from_pairs(n, pairs))
    return out


def _stable_matching_small(n, rank, partner):
    for i in range(n):
        ri = rank[i]
        bi = ri[partner[i]] if partner[i] >= 0 else n + 1
        for j in range(i + 1, n):
            if ri[j] < bi:
                pj = partner[j]
                if pj < 0 or rank[j][i] < rank[j][pj]:
                    return False
    return True


def brute_all_partitions(inst: Instance) -> set[Partition]:
    """Every stable partition, by checking all n! permutations; n <= 8."""
    n = inst.n
    if n > BRUTE_PARTITION_LIMIT:
        raise TooLargeForOracle(f"brute partition oracle is limited to n <= {BRUTE_PARTITION_LIMIT}")
    if engine.kernel is not None:
        return {Partition(s) for s in engine.kernel.brute_stable_partitions(n, inst.rank)}
    rank = inst.rank.tolist()
    out = set()
    for perm in itertools.permutations(range(n)):
        if _stable_partition_small(n, rank, perm):
            out.add(Partition(np.array(perm, dtype=np.int32)))
    return out


def _stable_partition_small(n, rank, succ):
    pred = [0] * n
    for i in range(n):
        pred[succ[i]] = i
    for i in range(n):
        if rank[i][succ[i]] > rank[i][pred[i]]:
            return False
    for i in range(n):
        bi = rank[i][pred[i]]
        ri = rank[i]
        for j in range(i + 1, n):
            if ri[j] < bi and rank[j][i] < rank[j][pred[j]]:
                return False
    return True


# ---------------------------------------------------------------------------
# backtracking over the invariant odd cycles

def _odd_cycle_base(inst, partition):
    """Fixed successor map, predecessor ranks for the invariant odd cycles,
    remaining free agents, and the phase-1 candidate filter."""
    from ._engine_py import phase1_bottoms
    n = inst.n
    succ = [-1] * n
    predrank = [0] * n                      # 0 = predecessor unknown
    rank = inst.rank.tolist()
    for c in partition.cycles:
        if c.length % 2 == 1:
            for i, a in enumerate(c.agents):
                b = c.agents[(i + 1) % c.length]
                succ[a] = b
                predrank[b] = rank[b][a]
    free = [i for i in range(n) if succ[i] < 0]
    bot1 = phase1_bottoms(n, inst.prefs.tolist(), rank)
    return succ, predrank, rank, free, bot1


def _enum_transpositions(inst, base_succ, base_predrank, rank, free, budget, bot1):
    """All stable completions of the fixed part by transpositions on free.

    Branch-and-propagate over a windowed pair table.  Propagation is a
    proposal round (holds improve, shrinking windows; a deleted pair is in no
    stable completion of the subspace).  Branching either forces or forbids
    the first pair of the lowest agent whose window is not a singleton;
    forcing (x, y) also caps the window of every agent x or y prefers to its
    partner, since stability makes such agents end up strictly better than x
    (resp. y).  Every leaf is re-verified.  Returns (successor lists, nodes,
    exhausted).
    """
    n = inst.n
    prefs = inst.prefs.tolist()
    if not free:
        ok = _stable_partition_small(n, rank, base_succ)
        return ([list(base_succ)] if ok else []), 0, False
    row_len = n - 1
    free_sorted = sorted(free)

    top0 = [1] * n
    bot0 = list(bot1)
    alive0 = [False] * n
    for a in free:
        alive0[a] = True
    # T2 against the fixed part: anything at or below the best fixed agent
    # that would return z's affection can never be z's partner
    for z in free:
        rz = rank[z]
        m = bot0[z]
        for o in range(n):
            if not alive0[o] and base_predrank[o] > 0 and \
                    rank[o][z] < base_predrank[o] and rz[o] - 1 < m:
                m = rz[o] - 1
        bot0[z] = m

    out = []
    nodes = 0
    exhausted = False

    def cap_better_than(anchor, worst_rank, bot, alive):
        # every agent the anchor prefers to its forced partner must get
        # someone strictly better than the anchor
        r_anchor = rank[anchor]
        for z in prefs[anchor]:
            if r_anchor[z] >= worst_rank:
                break
            if alive[z] and rank[z][anchor] - 1 < bot[z]:
                bot[z] = rank[z][anchor] - 1

    def propagate(top, bot, alive):
        """Proposal round; returns (eng, hold) or None on wipeout."""
        nonlocal nodes, exhausted
        hold = [-1] * n
        eng = [-1] * n
        fcur = [0] * n
        stack = [a for a in reversed(free_sorted) if alive[a]]
        while stack:
            x = stack.pop()
            nodes += 1
            if budget is not None and nodes > budget:
                exhausted = True
                return None
            rx = rank[x]
            row = prefs[x]
            c = fcur[x]
            y = -1
            while c < row_len:
                cand = row[c]
                r = rx[cand]
                if r > bot[x]:
                    c = row_len               # preference order: rest is below
                    break
                if r >= top[x] and alive[cand] and \
                        top[cand] <= rank[cand][x] <= bot[cand]:
                    y = cand
                    break
                c += 1
            fcur[x] = c
            if y < 0:
                return None
            old = hold[y]
            hold[y] = x
            bot[y] = rank[y][x]
            eng[x] = y
            if old >= 0:
                eng[old] = -1
                stack.append(old)
        return eng, hold

    states = [(top0, bot0, alive0, [])]
    while states:
        top, bot, alive, pairs = states.pop()
        got = propagate(top, bot, alive)
        if exhausted:
            break
        if got is None:
            continue
        eng, hold = got
        branch_x = -1
        for x in free_sorted:
            if alive[x] and eng[x] != hold[x]:
                branch_x = x
                break
        if branch_x < 0:
            succ = list(base_succ)
            for x, y in pairs:
                succ[x], succ[y] = y, x
            for x in free_sorted:
                if alive[x]:
                    succ[x] = eng[x]
            if _stable_partition_small(n, rank, succ):
                out.append(succ)
            continue
        y = eng[branch_x]
        # forbid (x, y); explored after the forced branch
        top_f = list(top)
        top_f[branch_x] = rank[branch_x][y] + 1
        states.append((top_f, list(bot), alive, pairs))
        # force (x, y): marry them off and cap their rejected suitors
        bot_p = list(bot)
        alive_p = list(alive)
        alive_p[branch_x] = alive_p[y] = False
        cap_better_than(branch_x, rank[branch_x][y], bot_p, alive_p)
        cap_better_than(y, rank[y][branch_x], bot_p, alive_p)
        states.append((list(top), bot_p, alive_p, pairs + [(branch_x, y)]))
    return out, nodes, exhausted


def _alternating_cycles(partner_a, partner_b, agents):
    """Cycles of the symmetric difference of two perfect matchings on the
    same agent set, each as the alternating walk order."""
    seen = set()
    cycles = []
    for start in agents:
        if start in seen or partner_a[start] == partner_b[start]:
            continue
        cyc = []
        x = start
        use_a = True
        while x not in seen:
            seen.add(x)
            cyc.append(x)
            x = partner_a[x] if use_a else partner_b[x]
            use_a = not use_a
        cycles.append(cyc)
    return cycles


def _directed_candidates(rank, cycles):
    """Both orientations of each undirected even cycle, min-rotated, kept
    when internally T1-consistent (successor strictly above predecessor)."""
    out = set()
    for cyc in cycles:
        for orient in (cyc, cyc[::-1]):
            k = len(orient)
            m = orient.index(min(orient))
            rot = tuple(orient[(m + i) % k] for i in range(k))
            ok = True
            for i, a in enumerate(rot):
                s = rot[(i + 1) % k]
                p = rot[(i - 1) % k]
                if rank[a][s] > rank[a][p]:
                    ok = False
                    break
            if ok:
                out.add(rot)
    return sorted(out)


def _compose_all_partitions(inst, base_succ, base_predrank, rank, free, budget, bot1):
    """All stable partitions: reduced completions plus every way of gluing
    disjoint candidate long cycles (alternating cycles between two reduced
    partitions; complete because decomposing an even cycle only tightens the
    predecessors T2 compares against, so both adjacent transposition sets of
    any even cycle of a stable partition are themselves stable)."""
    reduced, nodes, exhausted = _enum_transpositions(
        inst, base_succ, base_predrank, rank, free, budget, bot1)
    out = list(reduced)
    if exhausted:
        return out, nodes, True
    free_set = sorted(free)
    partners = []
    for s in reduced:
        partners.append({a: s[a] for a in free_set})
    candidates = set()
    for i in range(len(partners)):
        for j in range(i + 1, len(partners)):
            nodes += 1
            if budget is not None and nodes > budget:
                return out, nodes, True
            for cyc in _alternating_cycles(partners[i], partners[j], free_set):
                candidates.update(_directed_candidates(rank, [cyc]))
    cand = [(frozenset(c), c) for c in sorted(candidates)]

    def glue(idx, chosen_agents, succ2, predrank2, free2):
        nonlocal nodes, exhausted
        if exhausted:
            return
        if idx == len(cand):
            if chosen_agents:
                sols, used, ex = _enum_transpositions(
                    inst, succ2, predrank2, rank, free2,
                    None if budget is None else budget - nodes, bot1)
                nodes += used
                out.extend(sols)
                if ex:
                    exhausted = True
            return
        agents, cyc = cand[idx]
        glue(idx + 1, chosen_agents, succ2, predrank2, free2)
        if exhausted or agents & chosen_agents:
            return
        succ3 = list(succ2)
        predrank3 = list(predrank2)
        k = len(cyc)
        for i, a in enumerate(cyc):
            succ3[a] = cyc[(i + 1) % k]
            predrank3[cyc[(i + 1) % k]] = rank[cyc[(i + 1) % k]][a]
        glue(idx + 1, chosen_agents | agents, succ3, predrank3,
             [a for a in free2 if a not in agents])

    glue(0, frozenset(), list(base_succ), list(base_predrank), free_set)
    return out, nodes, exhausted


def _as_matching(n, succ):
    pairs = [(i, succ[i]) for i in range(n) if i < succ[i]]
    return Matching.from_pairs(n, pairs)


def enum_stable_matchings(inst: Instance, budget: int | None = None,
                          partition: Partition | None = None) -> set[Matching]:
    """Exactly the stable matchings of a solvable instance."""
    part = partition if partition is not None else engine.stable_partition(inst)
    if any(c.length >= 3 for c in part.odd_cycles()):
        raise Unsolvable("instance admits no stable matching")
    base_succ, base_predrank, rank, free, bot1 = _odd_cycle_base(inst, part)
    sols, nodes, exhausted = _enum_transpositions(
        inst, base_succ, base_predrank, rank, free, budget, bot1)
    if exhausted:
        raise BudgetExceeded(f"matching enumeration exceeded {budget} nodes")
    return {_as_matching(inst.n, s) for s in sols}


def enum_reduced_partitions(inst: Instance, budget: int | None = None,
                            partition: Partition | None = None) -> set[Partition]:
    """Exactly the reduced stable partitions: invariant odd cycles plus every
    stable transposition completion."""
    part = partition if partition is not None else engine.stable_partition(inst)
    base_succ, base_predrank, rank, free, bot1 = _odd_cycle_base(inst, part)
    sols, nodes, exhausted = _enum_transpositions(
        inst, base_succ, base_predrank, rank, free, budget, bot1)
    if exhausted:
        raise BudgetExceeded(f"reduced-partition enumeration exceeded {budget} nodes")
    return {Partition(np.array(s, dtype=np.int32)) for s in sols}


def enum_all_partitions(inst: Instance, budget: int | None = DEFAULT_BUDGET,
                        partition: Partition | None = None) -> EnumResult:
    """All stable partitions; a partial set flagged budget_exhausted when the
    node budget runs out."""
    part = partition if partition is not None else engine.stable_partition(inst)
    base_succ, base_predrank, rank, free, bot1 = _odd_cycle_base(inst, part)
    sols, nodes, exhausted = _compose_all_partitions(
        inst, base_succ, base_predrank, rank, free, budget, bot1)
    parts = {Partition(np.array(s, dtype=np.int32)) for s in sols}
    return EnumResult(parts, nodes, exhausted)


def collect_cycles_and_pairs(sets: SolutionSets) -> SolutionSets:
    """Fill the distinct-cycle and distinct-pair fields from the populated
    enumerations.  Stable pairs include the fixed point of a solvable odd
    instance as a self-pair."""
    if sets.all_partitions is not None:
        sets.stable_cycles = {c for p in sets.all_partitions for c in p.cycles}
    if sets.reduced_partitions is not None:
        sets.reduced_stable_cycles = {c for p in sets.reduced_partitions for c in p.cycles}
    if sets.matchings is not None:
        pairs = {pair for m in sets.matchings for pair in m.pairs()}
        for m in sets.matchings:
            for k in m.unmatched():
                pairs.add((k, k))
        sets.stable_pairs = pairs
    return sets


def solution_sets(inst: Instance, budget: int | None = DEFAULT_BUDGET) -> SolutionSets:
    """All enumerations plus the derived cycle/pair sets for one instance."""
    part = engine.stable_partition(inst)
    solvable = not any(c.length >= 3 for c in part.odd_cycles())
    res = enum_all_partitions(inst, budget, partition=part)
    sets = SolutionSets(
        matchings=enum_stable_matchings(inst, budget, partition=part) if solvable else None,
        reduced_partitions=enum_reduced_partitions(inst, budget, partition=part),
        all_partitions=res.partitions,
        budget_exhausted=res.budget_exhausted,
    )
    return collect_cycles_and_pairs(sets)
