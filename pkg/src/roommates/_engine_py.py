"""Pure-Python kernel computing a stable partition in two phases.

Phase 1 is a proposal round: each agent proposes down its list; a target
always accepts its best proposer so far, and the displaced proposer moves
on.  A pair {x, y} is considered deleted as soon as either side holds a
proposer it strictly prefers to the other, so list reduction never needs
explicit bookkeeping: a pair is present iff both sides rank each other at
or above their current hold, and holds only improve, which keeps all scan
cursors monotone.

Phase 2 repeatedly exposes a rotation (walk p -> hold[second(p)] until it
cycles) on the reduced table.  A rotation equal to its own dual is an odd
party: its agents form an invariant odd cycle of the partition and are
frozen out of the table.  Any other rotation is eliminated the standard
way, which advances every member's hold by at least one rank, so the
phase terminates after O(n^2) total work.

What remains are mutually engaged pairs (the transpositions), at most one
agent rejected by everybody (the fixed point), and the frozen odd cycles.

The compiled kernel in _kernel.pyx mirrors this module statement for
statement; both backends must produce identical successor arrays.
"""
from __future__ import annotations

__all__ = ["stable_partition_raw", "phase1_bottoms", "EngineError"]


class EngineError(Exception):
    """Internal invariant broke; indicates an engine bug, never a legal outcome."""


def phase1_bottoms(n, prefs, rank):
    """Rank of each agent's held proposer after the proposal phase alone.

    A pair is deleted by the proposal phase iff either side ranks the other
    below this bottom; no deleted pair occurs in any stable partition, which
    makes the table a sound candidate filter for enumeration.
    """
    row_len = n - 1
    hold = [-1] * n
    bot = [n + 1] * n
    eng = [-1] * n
    fcur = [0] * n
    stack = list(range(n - 1, -1, -1))
    while stack:
        x = stack.pop()
        rank_x = rank[x]
        row = prefs[x]
        c = fcur[x]
        bx = bot[x]
        while c < row_len:
            y = row[c]
            if rank_x[y] <= bx and rank[y][x] <= bot[y]:
                break
            c += 1
        fcur[x] = c
        if c == row_len:
            continue
        y = row[c]
        old = hold[y]
        hold[y] = x
        bot[y] = rank[y][x]
        eng[x] = y
        if old >= 0:
            eng[old] = -1
            stack.append(old)
    return bot


def stable_partition_raw(n, prefs, rank):
    """Successor array of a stable partition of the given instance.

    prefs/rank are indexable row tables (lists of lists or 2-d int arrays).
    Output is deterministic for a given instance.
    """
    row_len = n - 1
    hold = [-1] * n          # best proposer held; doubles as the list bottom
    bot = [n + 1] * n        # rank of hold, n+1 while nothing is held
    eng = [-1] * n           # engagement target; equals first-on-list when set
    fcur = [0] * n           # first() scan position
    scur = [0] * n           # second() scan position
    frozen = bytearray(n)
    succ = [-1] * n

    def first(x):
        rank_x = rank[x]
        row = prefs[x]
        c = fcur[x]
        bx = bot[x]
        while c < row_len:
            y = row[c]
            # skips are permanent: holds only improve and frozen stays frozen
            if not frozen[y] and rank_x[y] <= bx and rank[y][x] <= bot[y]:
                break
            c += 1
        fcur[x] = c
        return row[c] if c < row_len else -1

    def second(x):
        if first(x) < 0:
            return -1
        rank_x = rank[x]
        row = prefs[x]
        c = max(scur[x], fcur[x] + 1)
        bx = bot[x]
        while c < row_len:
            y = row[c]
            if not frozen[y] and rank_x[y] <= bx and rank[y][x] <= bot[y]:
                break
            c += 1
        scur[x] = c
        return row[c] if c < row_len else -1

    # phase 1: proposals, agent 0 first
    stack = list(range(n - 1, -1, -1))
    while stack:
        x = stack.pop()
        y = first(x)
        if y < 0:
            continue                # rejected by everyone still acceptable
        old = hold[y]
        hold[y] = x
        bot[y] = rank[y][x]
        eng[x] = y
        if old >= 0:
            eng[old] = -1
            stack.append(old)

    # every held agent is engaged and vice versa once proposing settles
    for x in range(n):
        if (eng[x] < 0) != (hold[x] < 0):
            raise EngineError("phase 1 left engagement and hold out of step")

    # phase 2: rotation eliminations and odd-party freezes
    walk = []                       # stack of rotation-walk agents
    pos = [-1] * n                  # position in walk, -1 if absent
    scan = 0
    while True:
        if not walk:
            while scan < n and (frozen[scan] or eng[scan] < 0
                                or second(scan) < 0):
                scan += 1
            if scan == n:
                break
            walk.append(scan)
            pos[scan] = 0
        p = walk[-1]
        if frozen[p] or second(p) < 0:
            pos[p] = -1
            walk.pop()
            continue
        nx = hold[second(p)]
        if pos[nx] < 0:
            pos[nx] = len(walk)
            walk.append(nx)
            continue
        xs = walk[pos[nx]:]
        ys = [eng[x] for x in xs]
        r = len(xs)
        dual = {(ys[(i + 1) % r], xs[i]) for i in range(r)}
        if dual == {(xs[i], ys[i]) for i in range(r)}:
            # self-dual rotation: xs is an odd party, an invariant odd cycle
            if r % 2 == 0:
                raise EngineError("even self-dual rotation")
            for x, y in zip(xs, ys):
                succ[x] = y
                frozen[x] = 1
        else:
            for i in range(r):
                y_next = ys[(i + 1) % r]
                if rank[y_next][xs[i]] >= bot[y_next]:
                    raise EngineError("rotation elimination did not improve a hold")
                hold[y_next] = xs[i]
                bot[y_next] = rank[y_next][xs[i]]
                eng[xs[i]] = y_next
        for x in xs:
            pos[x] = -1
        del walk[len(walk) - r:]

    # assemble: frozen odd cycles, mutual pairs, at most one fixed point
    fixed = -1
    for x in range(n):
        if frozen[x]:
            continue
        y = eng[x]
        if y < 0:
            if fixed >= 0:
                raise EngineError("two agents rejected by everybody")
            fixed = x
            succ[x] = x
        else:
            if eng[y] != x:
                raise EngineError("engagement not mutual at settlement")
            succ[x] = y
    return succ
