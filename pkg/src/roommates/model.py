"""Instance, matching and partition model with stability predicates and file formats.

Agent ids are 0-based in memory and 1-based in the text/JSON formats.
"""
from __future__ import annotations

import json

import numpy as np

from .errors import BadLength, ParseError, RowNotPermutation, TooSmall

__all__ = [
    "Instance", "Matching", "Partition", "Cycle",
    "build_instance", "is_blocking_pair", "is_stable_matching",
    "is_stable_partition", "cycles_of",
    "parse_instance", "serialize_instance",
    "matching_from_json", "matching_to_json",
    "partition_from_json", "partition_to_json",
]


class Instance:
    """n agents with complete strict preference lists and an O(1) rank table.

    prefs[i] lists the other n-1 agents in strict preference order, best first.
    rank[i][j] is the 1-based position of j in i's list; rank[i][i] holds the
    sentinel n, which makes self rank below every real agent (the convention
    used by the stability predicates for 1-cycles).
    """

    __slots__ = ("n", "prefs", "rank")

    def __init__(self, n: int, prefs: np.ndarray, rank: np.ndarray):
        self.n = n
        self.prefs = prefs
        self.rank = rank
        prefs.flags.writeable = False
        rank.flags.writeable = False

    def __eq__(self, other):
        return (isinstance(other, Instance) and self.n == other.n
                and np.array_equal(self.prefs, other.prefs))

    def __hash__(self):
        return hash((self.n, self.prefs.tobytes()))

    def __repr__(self):
        return f"Instance(n={self.n})"


def build_instance(n: int, pref_rows) -> Instance:
    """Validate preference rows and build an Instance with its rank table."""
    if n < 2:
        raise TooSmall(f"need at least 2 agents, got {n}")
    prefs = np.asarray(pref_rows, dtype=np.int32)
    if prefs.ndim != 2 or prefs.shape[0] != n or prefs.shape[1] != n - 1:
        # ragged input lands here too (object dtype or wrong shape)
        if prefs.ndim == 2 and prefs.shape[0] == n:
            raise BadLength(f"rows must have length {n - 1}, got {prefs.shape[1]}")
        raise BadLength(f"expected {n} rows of length {n - 1}")
    rank = instance_rank_table(n, prefs)
    return Instance(n, prefs, rank)


def instance_rank_table(n: int, prefs: np.ndarray) -> np.ndarray:
    """Rank table for validated rows; raises RowNotPermutation on bad rows."""
    if prefs.size and (prefs.min() < 0 or prefs.max() >= n):
        bad = int(np.argmax((prefs < 0).any(axis=1) | (prefs >= n).any(axis=1)))
        raise RowNotPermutation(f"row {bad}: agent id out of range")
    rank = np.full((n, n), n, dtype=np.int32)
    rows = np.repeat(np.arange(n, dtype=np.int32), n - 1)
    rank[rows, prefs.ravel()] = np.tile(np.arange(1, n, dtype=np.int32), n)
    # each row must cover every other agent exactly once and never itself
    diag = np.arange(n)
    if np.any(rank[diag, diag] != n):
        bad = int(np.argmax(rank[diag, diag] != n))
        raise RowNotPermutation(f"row {bad}: contains self")
    if int((rank < n).sum()) != n * (n - 1):
        counts = (rank < n).sum(axis=1)
        bad = int(np.argmax(counts != n - 1))
        raise RowNotPermutation(f"row {bad}: misses or duplicates an agent")
    return rank


class Matching:
    """Symmetric partner assignment; partner[i] == -1 means i is unmatched."""

    __slots__ = ("n", "partner")

    def __init__(self, n: int, partner: np.ndarray):
        partner = np.asarray(partner, dtype=np.int32)
        if partner.shape != (n,):
            raise BadLength(f"partner array must have length {n}")
        matched = partner >= 0
        idx = np.arange(n)
        if np.any(partner[idx] == idx):
            raise RowNotPermutation("agent matched to itself")
        if np.any(partner[partner[matched]] != idx[matched]):
            raise RowNotPermutation("partner assignment is not symmetric")
        self.n = n
        self.partner = partner
        partner.flags.writeable = False

    @classmethod
    def from_pairs(cls, n: int, pairs) -> "Matching":
        partner = np.full(n, -1, dtype=np.int32)
        for i, j in pairs:
            partner[i] = j
            partner[j] = i
        return cls(n, partner)

    def pairs(self) -> list[tuple[int, int]]:
        out = []
        for i, j in enumerate(self.partner):
            if j > i:
                out.append((i, int(j)))
        return out

    def unmatched(self) -> list[int]:
        return [i for i, j in enumerate(self.partner) if j < 0]

    def size(self) -> int:
        return int((self.partner >= 0).sum()) // 2

    def key(self):
        return tuple(self.pairs())

    def __eq__(self, other):
        return isinstance(other, Matching) and np.array_equal(self.partner, other.partner)

    def __hash__(self):
        return hash((self.n, self.partner.tobytes()))

    def __repr__(self):
        return f"Matching({self.pairs()}, unmatched={self.unmatched()})"


class Cycle:
    """One cycle of a partition in canonical form (minimum agent first)."""

    __slots__ = ("agents", "length", "parity", "reduced")

    def __init__(self, agents: tuple[int, ...]):
        self.agents = agents
        self.length = len(agents)
        self.parity = "odd" if self.length % 2 else "even"
        self.reduced = self.length == 2 or self.length % 2 == 1

    def key(self):
        return self.agents

    def __eq__(self, other):
        return isinstance(other, Cycle) and self.agents == other.agents

    def __hash__(self):
        return hash(self.agents)

    def __repr__(self):
        return f"Cycle{self.agents}"


class Partition:
    """Permutation of the agents, stored as a successor map."""

    __slots__ = ("n", "succ", "_pred", "_cycles")

    def __init__(self, succ):
        succ = np.asarray(succ, dtype=np.int32)
        n = succ.shape[0]
        counts = np.bincount(succ, minlength=n)
        if succ.min() < 0 or succ.max() >= n or np.any(counts != 1):
            raise RowNotPermutation("succ is not a permutation")
        self.n = n
        self.succ = succ
        self._pred = None
        self._cycles = None
        succ.flags.writeable = False

    @property
    def pred(self) -> np.ndarray:
        if self._pred is None:
            pred = np.empty(self.n, dtype=np.int32)
            pred[self.succ] = np.arange(self.n, dtype=np.int32)
            pred.flags.writeable = False
            self._pred = pred
        return self._pred

    @property
    def cycles(self) -> list[Cycle]:
        if self._cycles is None:
            self._cycles = [Cycle(c) for c in cycles_of(self.succ)]
        return self._cycles

    @classmethod
    def from_cycles(cls, n: int, cycles) -> "Partition":
        succ = np.full(n, -1, dtype=np.int32)
        for cyc in cycles:
            for a, b in zip(cyc, cyc[1:]):
                succ[a] = b
            succ[cyc[-1]] = cyc[0]
        if np.any(succ < 0):
            raise RowNotPermutation("cycles do not cover every agent")
        return cls(succ)

    @classmethod
    def from_matching(cls, m: Matching) -> "Partition":
        """Read a matching as transpositions; unmatched agents become 1-cycles."""
        succ = m.partner.copy()
        un = succ < 0
        succ[un] = np.arange(m.n, dtype=np.int32)[un]
        return cls(succ)

    def key(self):
        return tuple(c.agents for c in self.cycles)

    def odd_cycles(self) -> list[Cycle]:
        return [c for c in self.cycles if c.length % 2 == 1]

    def is_reduced(self) -> bool:
        return all(c.reduced for c in self.cycles)

    def __eq__(self, other):
        return isinstance(other, Partition) and np.array_equal(self.succ, other.succ)

    def __hash__(self):
        return hash(self.succ.tobytes())

    def __repr__(self):
        return f"Partition{self.key()}"


def cycles_of(succ) -> list[tuple[int, ...]]:
    """Canonical cycle decomposition: min agent first, cycles sorted by minimum."""
    succ = np.asarray(succ)
    n = len(succ)
    seen = np.zeros(n, dtype=bool)
    out = []
    for start in range(n):
        if seen[start]:
            continue
        cyc = [start]
        seen[start] = True
        a = int(succ[start])
        while a != start:
            cyc.append(a)
            seen[a] = True
            a = int(succ[a])
        out.append(tuple(cyc))
    return out


def is_blocking_pair(inst: Instance, m: Matching, i: int, j: int) -> bool:
    """True iff i and j each prefer the other to their assignment (or are unmatched)."""
    if i == j:
        raise ValueError("blocking pair needs two distinct agents")
    pi, pj = int(m.partner[i]), int(m.partner[j])
    ok_i = pi < 0 or inst.rank[i, j] < inst.rank[i, pi]
    ok_j = pj < 0 or inst.rank[j, i] < inst.rank[j, pj]
    return bool(ok_i and ok_j)


def is_stable_matching(inst: Instance, m: Matching) -> bool:
    """O(n^2) scan of all pairs for blockers."""
    n = inst.n
    partner = m.partner
    # rank of current partner; unmatched agents accept anyone (sentinel n+1,
    # which would light up the rank table's self sentinel, hence the mask)
    idx = np.arange(n)
    cur = np.where(partner >= 0, inst.rank[idx, np.abs(partner)], n + 1)
    better = inst.rank < cur[:, None]
    np.fill_diagonal(better, False)
    return not bool(np.any(better & better.T))


def is_stable_partition(inst: Instance, p: Partition) -> bool:
    """T1 and T2 check, O(n^2).

    Self is ranked worst via the rank sentinel, so a 1-cycle satisfies T1
    vacuously and loses every T2 comparison, as required.
    """
    n = inst.n
    idx = np.arange(n)
    rs = inst.rank[idx, p.succ]
    rp = inst.rank[idx, p.pred]
    if bool(np.any(rs > rp)):
        return False
    better = inst.rank < rp[:, None]
    return not bool(np.any(better & better.T))


# ---------------------------------------------------------------------------
# Text format: line 1 holds n, then one preference row per agent, 1-based ids.
# Lines starting with '#' are ignored.

def parse_instance(text: str) -> Instance:
    rows = []
    n = None
    lineno_of = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if n is None:
            try:
                n = int(line)
            except ValueError:
                raise ParseError("expected agent count", lineno) from None
            if n < 2:
                raise TooSmall(f"line {lineno}: need at least 2 agents, got {n}")
            continue
        try:
            row = [int(tok) for tok in line.split()]
        except ValueError:
            raise ParseError("expected whitespace-separated integer ids", lineno) from None
        rows.append(row)
        lineno_of.append(lineno)
    if n is None:
        raise ParseError("empty input", 1)
    if len(rows) != n:
        raise ParseError(f"expected {n} preference rows, got {len(rows)}",
                         lineno_of[-1] if lineno_of else 1)
    for k, row in enumerate(rows):
        if len(row) != n - 1:
            raise ParseError(f"expected {n - 1} ids, got {len(row)}", lineno_of[k])
        if any(v < 1 or v > n for v in row):
            raise ParseError(f"agent ids must be in 1..{n}", lineno_of[k])
    zero_based = [[v - 1 for v in row] for row in rows]
    return build_instance(n, zero_based)


def serialize_instance(inst: Instance) -> str:
    lines = [str(inst.n)]
    for row in inst.prefs:
        lines.append(" ".join(str(int(v) + 1) for v in row))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# JSON forms, 1-based ids.

def matching_to_json(m: Matching) -> str:
    return json.dumps({
        "n": m.n,
        "pairs": [[i + 1, j + 1] for i, j in m.pairs()],
        "unmatched": [k + 1 for k in m.unmatched()],
    })


def matching_from_json(text: str, n: int | None = None) -> Matching:
    obj = json.loads(text)
    m_n = int(obj["n"])
    if n is not None and m_n != n:
        raise ParseError(f"matching is for n={m_n}, instance has n={n}")
    pairs = [(int(i) - 1, int(j) - 1) for i, j in obj.get("pairs", [])]
    return Matching.from_pairs(m_n, pairs)


def partition_to_json(p: Partition) -> str:
    return json.dumps({
        "n": p.n,
        "cycles": [[a + 1 for a in c.agents] for c in p.cycles],
    })


def partition_from_json(text: str, n: int | None = None) -> Partition:
    obj = json.loads(text)
    p_n = int(obj["n"])
    if n is not None and p_n != n:
        raise ParseError(f"partition is for n={p_n}, instance has n={n}")
    cycles = [[int(a) - 1 for a in c] for c in obj["cycles"]]
    return Partition.from_cycles(p_n, cycles)
