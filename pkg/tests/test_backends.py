import subprocess
import sys

import numpy as np
import pytest

from roommates import engine, generate
from roommates._engine_py import stable_partition_raw as pure_partition
from roommates.generators import rim_perturb

needs_kernel = pytest.mark.skipif(engine.kernel is None,
                                  reason="compiled kernel not built")


@needs_kernel
def test_partition_backends_agree():
    for t in range(120):
        tag = ("ic", "2ic", "attributes", "mallows-euclidean")[t % 4]
        n = 2 + (t * 7) % 60
        inst = generate(tag, n, 1000 + t, t)
        fast = engine.kernel.stable_partition_raw(inst.n, inst.prefs, inst.rank)
        slow = pure_partition(inst.n, inst.prefs.tolist(), inst.rank.tolist())
        assert list(fast) == list(slow), (tag, n, t)


@needs_kernel
def test_brute_partitions_backends_agree():
    from roommates.enumeration import _stable_partition_small
    import itertools
    for t in range(25):
        inst = generate("ic", 6, 55, t)
        fast = {tuple(int(v) for v in s)
                for s in engine.kernel.brute_stable_partitions(6, inst.rank)}
        rank = inst.rank.tolist()
        slow = {p for p in itertools.permutations(range(6))
                if _stable_partition_small(6, rank, p)}
        assert fast == slow


@needs_kernel
def test_rim_backends_agree():
    rng = np.random.default_rng(8)
    for m in (1, 2, 3, 7, 20):
        ref = list(rng.permutation(m))
        for phi in (0.1, 0.5, 1.0):
            u = rng.random(max(m - 1, 0))
            fast = list(engine.kernel.rim_insert(np.array(ref, dtype=np.int32), phi, u))
            # pure path (mirrors the kernel arithmetic)
            import roommates.generators as g
            saved = engine.kernel
            try:
                engine.kernel = None
                slow = rim_perturb(ref, phi, u)
            finally:
                engine.kernel = saved
            assert fast == slow


def test_pure_backend_env(tmp_path):
    # ROOMMATES_PURE forces the fallback; partitions must be unchanged
    code = (
        "import os, roommates\n"
        "inst = roommates.generate('ic', 23, 5, 1)\n"
        "print(roommates.backend_name())\n"
        "print(roommates.stable_partition(inst).key())\n"
    )
    env_pure = {"ROOMMATES_PURE": "1", "PATH": "/usr/bin:/bin"}
    import os
    env_pure.update({k: v for k, v in os.environ.items() if k not in env_pure})
    pure = subprocess.run([sys.executable, "-c", code], capture_output=True,
                          text=True, env=env_pure)
    assert pure.stdout.splitlines()[0] == "pure"
    env = {k: v for k, v in os.environ.items() if k != "ROOMMATES_PURE"}
    fast = subprocess.run([sys.executable, "-c", code], capture_output=True,
                          text=True, env=env)
    assert pure.stdout.splitlines()[1] == fast.stdout.splitlines()[1]
