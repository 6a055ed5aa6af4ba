"""Seeded instance generators for the seven statistical cultures.

Reproducibility contract: one trial is generated from a PCG64 stream seeded
by mixing (master seed, culture tag, n, trial index) through a splitmix64
finalizer, so trials can run in any order on any number of workers.  Each
generator documents the order in which it consumes the stream; given a fixed
numpy version the output is bit-identical across platforms and backends.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import engine
from .errors import OddNotSupported, RoommatesError, TooSmall
from .model import Instance, build_instance

__all__ = [
    "CULTURES", "Culture", "generate", "trial_seed", "rng_for",
    "gen_ic", "gen_2ic", "gen_symmetric", "gen_asymmetric",
    "gen_euclidean", "gen_attributes", "gen_mallows_euclidean",
    "euclidean_instance", "attributes_instance", "asymmetric_cyclic",
    "rim_perturb",
]

CULTURES = ("ic", "2ic", "symmetric", "asymmetric", "euclidean",
            "attributes", "mallows-euclidean")

_CULTURE_CODE = {tag: i + 1 for i, tag in enumerate(CULTURES)}


@dataclass(frozen=True)
class Culture:
    """A statistical culture; phi is the Mallows dispersion (2-d spatial
    cultures are fixed at dimension 2)."""
    tag: str
    phi: float = 0.5

    def __post_init__(self):
        if self.tag not in CULTURES:
            raise RoommatesError(f"unknown culture {self.tag!r} (one of {', '.join(CULTURES)})")
        if not 0.0 < self.phi <= 1.0:
            raise RoommatesError(f"phi must be in (0, 1], got {self.phi}")


def _mix64(z: int) -> int:
    # splitmix64 finalizer
    z = (z + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return z ^ (z >> 31)


def trial_seed(master: int, tag: str, n: int, trial: int) -> int:
    s = _mix64(master & 0xFFFFFFFFFFFFFFFF)
    s = _mix64(s ^ _CULTURE_CODE[tag])
    s = _mix64(s ^ n)
    return _mix64(s ^ trial)


def rng_for(master: int, tag: str, n: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(trial_seed(master, tag, n, trial)))


def _require(n: int):
    if n < 2:
        raise TooSmall(f"need at least 2 agents, got {n}")


def gen_ic(n: int, rng: np.random.Generator) -> Instance:
    """Impartial culture: each row an independent uniform permutation.

    Stream use: one permuted() call over an (n, n-1) index matrix.
    """
    _require(n)
    base = np.broadcast_to(np.arange(n - 1, dtype=np.int32), (n, n - 1))
    perms = rng.permuted(base, axis=1)
    prefs = perms + (perms >= np.arange(n, dtype=np.int32)[:, None])
    return build_instance(n, prefs)


def gen_2ic(n: int, rng: np.random.Generator) -> Instance:
    """Two groups (sizes ceil(n/2) and floor(n/2)); own group first, both
    parts in uniform random order.  Stream: per agent in id order, one
    permutation() of the own group minus self, then one of the other group.
    """
    _require(n)
    split = (n + 1) // 2
    group_a = np.arange(split, dtype=np.int32)
    group_b = np.arange(split, n, dtype=np.int32)
    rows = np.empty((n, n - 1), dtype=np.int32)
    for i in range(n):
        own, other = (group_a, group_b) if i < split else (group_b, group_a)
        mine = own[own != i]
        rows[i, :len(mine)] = rng.permutation(mine)
        rows[i, len(mine):] = rng.permutation(other)
    return build_instance(n, rows)


def gen_symmetric(n: int, rng: np.random.Generator) -> Instance:
    """Fully agreeing ranks: rank[i][j] == rank[j][i], built from the
    round-robin 1-factorization of K_n (circle method) with uniformly
    permuted round labels and agent relabeling.  Stream: permutation(n-1)
    for round labels, then permutation(n) for the relabeling.  Even n only.
    """
    _require(n)
    if n % 2:
        raise OddNotSupported("symmetric preferences require an even number of agents")
    m = n - 1
    round_rank = rng.permutation(m).astype(np.int32)   # round label -> rank-1
    label = rng.permutation(n).astype(np.int32)        # agent -> circle label
    li = label[:, None].astype(np.int64)
    lj = label[None, :].astype(np.int64)
    # non-pivot pair (a, b) meets in round (a+b)/2 mod m; n/2 inverts 2 mod m
    rounds = (li + lj) * (n // 2) % m
    rounds = np.where(li == m, lj, np.where(lj == m, li, rounds))
    np.fill_diagonal(rounds, 0)      # self entries become the rank sentinel below
    rank = round_rank[rounds].astype(np.int32) + 1
    np.fill_diagonal(rank, n)
    prefs = np.argsort(rank, axis=1, kind="stable")[:, :n - 1].astype(np.int32)
    return build_instance(n, prefs)


def asymmetric_cyclic(n: int) -> Instance:
    """The identity-labeled asymmetric profile: rank[i][j] = (j - i) mod n."""
    _require(n)
    idx = np.arange(n, dtype=np.int64)
    rank = (idx[None, :] - idx[:, None]) % n
    np.fill_diagonal(rank, n)
    prefs = np.argsort(rank, axis=1, kind="stable")[:, :n - 1].astype(np.int32)
    return build_instance(n, prefs)


def gen_asymmetric(n: int, rng: np.random.Generator) -> Instance:
    """Fully disagreeing ranks: rank[i][j] = k implies rank[j][i] = n - k.
    Cyclic profile rank[i][j] = (j - i) mod n under a uniform random
    relabeling.  Stream: one permutation(n).
    """
    _require(n)
    label = rng.permutation(n).astype(np.int64)
    rank = (label[None, :] - label[:, None]) % n
    np.fill_diagonal(rank, n)
    prefs = np.argsort(rank, axis=1, kind="stable")[:, :n - 1].astype(np.int32)
    return build_instance(n, prefs)


def _rank_by_score(score: np.ndarray) -> np.ndarray:
    """Rows sorted by ascending score; exact ties broken by ascending id."""
    n = score.shape[0]
    np.fill_diagonal(score, np.inf)
    return np.argsort(score, axis=1, kind="stable")[:, :n - 1].astype(np.int32)


def euclidean_instance(points: np.ndarray) -> Instance:
    """Preferences by increasing Euclidean distance from given 2-d points."""
    n = len(points)
    _require(n)
    dx = points[:, 0][:, None] - points[:, 0][None, :]
    dy = points[:, 1][:, None] - points[:, 1][None, :]
    return build_instance(n, _rank_by_score(dx * dx + dy * dy))


def gen_euclidean(n: int, rng: np.random.Generator) -> Instance:
    """Uniform points on the unit square.  Stream: one random((n, 2))."""
    _require(n)
    return euclidean_instance(rng.random((n, 2)))


def attributes_instance(points: np.ndarray, weights: np.ndarray) -> Instance:
    """Preferences by per-agent weighted squared distance (same order as the
    weighted Euclidean distance of the model)."""
    n = len(points)
    _require(n)
    dx = points[:, 0][:, None] - points[:, 0][None, :]
    dy = points[:, 1][:, None] - points[:, 1][None, :]
    score = weights[:, 0][:, None] * dx * dx + weights[:, 1][:, None] * dy * dy
    return build_instance(n, _rank_by_score(score))


def gen_attributes(n: int, rng: np.random.Generator) -> Instance:
    """Random positions and random per-agent dimension weights, all uniform
    on [0,1].  Stream: random((n, 2)) positions, then random((n, 2)) weights.
    """
    _require(n)
    points = rng.random((n, 2))
    weights = rng.random((n, 2))
    return attributes_instance(points, weights)


def rim_perturb(ref, phi: float, uniforms) -> list[int]:
    """Mallows repeated insertion: item t of the reference row (1-based) goes
    to position p in [1, t] with probability phi^(t-p) normalized.

    The arithmetic mirrors the compiled kernel exactly (running Z and weight
    products) so both backends place items identically.
    """
    m = len(ref)
    if m == 0:
        return []
    if engine.kernel is not None:
        return engine.kernel.rim_insert(ref, phi, uniforms).tolist()
    out = [int(ref[0])]
    z = 1.0
    for t in range(2, m + 1):
        z = z * phi + 1.0
        target = uniforms[t - 2] * z
        c = 0.0
        pw = 1.0
        d = 0
        while d < t - 1:
            c += pw
            if target < c:
                break
            pw *= phi
            d += 1
        out.insert(t - 1 - d, int(ref[t - 1]))
    return out


def gen_mallows_euclidean(n: int, rng: np.random.Generator,
                          phi: float = 0.5) -> Instance:
    """Euclidean instance whose rows are then independently Mallows-perturbed
    with the agent's own list as reference.  Stream: random((n, 2)) points,
    then one random((n, n-2)) matrix of insertion uniforms.
    """
    _require(n)
    base = euclidean_instance(rng.random((n, 2)))
    uniforms = rng.random((n, max(n - 2, 0)))
    rows = [rim_perturb(base.prefs[i], phi, uniforms[i]) for i in range(n)]
    return build_instance(n, rows)


_GEN = {
    "ic": gen_ic,
    "2ic": gen_2ic,
    "symmetric": gen_symmetric,
    "asymmetric": gen_asymmetric,
    "euclidean": gen_euclidean,
    "attributes": gen_attributes,
}


def generate(culture: Culture | str, n: int, seed: int, trial: int = 0) -> Instance:
    """One seeded instance of the given culture (see module reproducibility
    contract)."""
    if isinstance(culture, str):
        culture = Culture(culture)
    rng = rng_for(seed, culture.tag, n, trial)
    if culture.tag == "mallows-euclidean":
        return gen_mallows_euclidean(n, rng, culture.phi)
    return _GEN[culture.tag](n, rng)
