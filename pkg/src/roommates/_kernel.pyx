# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels for the hot loops.

stable_partition_raw mirrors roommates._engine_py statement for statement
(see that module for the algorithm); both backends must produce identical
successor arrays.  The other entry points are brute-force permutation
checking, exhaustive profile counting for exact solvability probabilities,
and the Mallows repeated-insertion sampler.
"""

import numpy as np

from roommates._engine_py import EngineError


cdef inline int _first(int x, int row_len, const int[:, ::1] prefs,
                       const int[:, ::1] rank, int[::1] fcur, int[::1] bot,
                       signed char[::1] frozen) noexcept nogil:
    cdef int c = fcur[x]
    cdef int bx = bot[x]
    cdef int y
    while c < row_len:
        y = prefs[x, c]
        if frozen[y] == 0 and rank[x, y] <= bx and rank[y, x] <= bot[y]:
            break
        c += 1
    fcur[x] = c
    if c < row_len:
        return prefs[x, c]
    return -1


cdef inline int _second(int x, int row_len, const int[:, ::1] prefs,
                        const int[:, ::1] rank, int[::1] fcur, int[::1] scur,
                        int[::1] bot, signed char[::1] frozen) noexcept nogil:
    if _first(x, row_len, prefs, rank, fcur, bot, frozen) < 0:
        return -1
    cdef int c = scur[x]
    if c < fcur[x] + 1:
        c = fcur[x] + 1
    cdef int bx = bot[x]
    cdef int y
    while c < row_len:
        y = prefs[x, c]
        if frozen[y] == 0 and rank[x, y] <= bx and rank[y, x] <= bot[y]:
            break
        c += 1
    scur[x] = c
    if c < row_len:
        return prefs[x, c]
    return -1


cdef int _partition_into(int n, const int[:, ::1] prefs, const int[:, ::1] rank,
                         int[::1] hold, int[::1] bot, int[::1] eng,
                         int[::1] fcur, int[::1] scur, signed char[::1] frozen,
                         int[::1] succ, int[::1] stack, int[::1] walk,
                         int[::1] pos, int[::1] xs, int[::1] ys) noexcept nogil:
    """Two-phase engine into preallocated buffers; returns 0, or <0 on a
    broken invariant (-1 .. -4, mapped to messages by the caller)."""
    cdef int row_len = n - 1
    cdef int i, x, y, old, top, p, q, nx, r, walk_len, scan, fixed, ok, j
    for i in range(n):
        hold[i] = -1
        bot[i] = n + 1
        eng[i] = -1
        fcur[i] = 0
        scur[i] = 0
        frozen[i] = 0
        succ[i] = -1
        pos[i] = -1

    # phase 1: proposals, agent 0 first
    top = 0
    for i in range(n - 1, -1, -1):
        stack[top] = i
        top += 1
    while top > 0:
        top -= 1
        x = stack[top]
        y = _first(x, row_len, prefs, rank, fcur, bot, frozen)
        if y < 0:
            continue
        old = hold[y]
        hold[y] = x
        bot[y] = rank[y, x]
        eng[x] = y
        if old >= 0:
            eng[old] = -1
            stack[top] = old
            top += 1

    for x in range(n):
        if (eng[x] < 0) != (hold[x] < 0):
            return -1

    # phase 2: rotation eliminations and odd-party freezes
    walk_len = 0
    scan = 0
    while True:
        if walk_len == 0:
            while scan < n and (frozen[scan] != 0 or eng[scan] < 0 or
                                _second(scan, row_len, prefs, rank, fcur, scur,
                                        bot, frozen) < 0):
                scan += 1
            if scan == n:
                break
            walk[0] = scan
            pos[scan] = 0
            walk_len = 1
        p = walk[walk_len - 1]
        if frozen[p] != 0 or _second(p, row_len, prefs, rank, fcur, scur,
                                     bot, frozen) < 0:
            pos[p] = -1
            walk_len -= 1
            continue
        q = prefs[p, scur[p]]
        nx = hold[q]
        if pos[nx] < 0:
            pos[nx] = walk_len
            walk[walk_len] = nx
            walk_len += 1
            continue
        r = walk_len - pos[nx]
        for i in range(r):
            xs[i] = walk[pos[nx] + i]
            ys[i] = eng[xs[i]]
        # self-dual test: {(ys[i+1], xs[i])} == {(xs[i], ys[i])} as pair sets
        ok = 1
        for i in range(r):
            y = ys[(i + 1) % r]
            x = xs[i]
            # look for the pair (y, x) among the rotation pairs
            j = 0
            while j < r:
                if xs[j] == y and ys[j] == x:
                    break
                j += 1
            if j == r:
                ok = 0
                break
        if ok == 1:
            if r % 2 == 0:
                return -2
            for i in range(r):
                succ[xs[i]] = ys[i]
                frozen[xs[i]] = 1
        else:
            for i in range(r):
                y = ys[(i + 1) % r]
                x = xs[i]
                if rank[y, x] >= bot[y]:
                    return -3
                hold[y] = x
                bot[y] = rank[y, x]
                eng[x] = y
        for i in range(r):
            pos[xs[i]] = -1
        walk_len -= r

    # assemble: frozen odd cycles, mutual pairs, at most one fixed point
    fixed = -1
    for x in range(n):
        if frozen[x] != 0:
            continue
        y = eng[x]
        if y < 0:
            if fixed >= 0:
                return -4
            fixed = x
            succ[x] = x
        else:
            if eng[y] != x:
                return -4
            succ[x] = y
    return 0


_ENGINE_FAULTS = {
    -1: "phase 1 left engagement and hold out of step",
    -2: "even self-dual rotation",
    -3: "rotation elimination did not improve a hold",
    -4: "settlement not mutual or two agents rejected by everybody",
}


def stable_partition_raw(int n, prefs_in, rank_in):
    """Successor array of a stable partition; compiled twin of _engine_py."""
    cdef const int[:, ::1] prefs = np.ascontiguousarray(prefs_in, dtype=np.int32)
    cdef const int[:, ::1] rank = np.ascontiguousarray(rank_in, dtype=np.int32)
    buf = np.empty((11, n), dtype=np.int32)
    cdef int[:, ::1] b = buf
    frozen_arr = np.zeros(n, dtype=np.int8)
    cdef signed char[::1] frozen = frozen_arr
    cdef int rc
    with nogil:
        rc = _partition_into(n, prefs, rank, b[0], b[1], b[2], b[3], b[4],
                             frozen, b[5], b[6], b[7], b[8], b[9], b[10])
    if rc < 0:
        raise EngineError(_ENGINE_FAULTS[rc])
    return np.asarray(b[5]).copy()


cdef inline int _check_partition(int n, const int[:, ::1] rank, int[::1] succ,
                                 int[::1] pred) noexcept nogil:
    """1 iff succ satisfies T1 and T2 (self ranked via the rank sentinel)."""
    cdef int i, j, bi
    for i in range(n):
        pred[succ[i]] = i
    for i in range(n):
        if rank[i, succ[i]] > rank[i, pred[i]]:
            return 0
    for i in range(n):
        bi = rank[i, pred[i]]
        for j in range(i + 1, n):
            if rank[i, j] < bi and rank[j, i] < rank[j, pred[j]]:
                return 0
    return 1


def check_partition(int n, rank_in, succ_in):
    cdef const int[:, ::1] rank = np.ascontiguousarray(rank_in, dtype=np.int32)
    cdef int[::1] succ = np.ascontiguousarray(succ_in, dtype=np.int32)
    pred_arr = np.empty(n, dtype=np.int32)
    cdef int[::1] pred = pred_arr
    return bool(_check_partition(n, rank, succ, pred))


def brute_stable_partitions(int n, rank_in):
    """All permutations passing T1/T2, in lexicographic order (n <= 8)."""
    cdef const int[:, ::1] rank = np.ascontiguousarray(rank_in, dtype=np.int32)
    perm_arr = np.arange(n, dtype=np.int32)
    pred_arr = np.empty(n, dtype=np.int32)
    cdef int[::1] perm = perm_arr
    cdef int[::1] pred = pred_arr
    cdef int i, j, k, tmp
    out = []
    while True:
        if _check_partition(n, rank, perm, pred):
            out.append(perm_arr.copy())
        # next lexicographic permutation
        i = n - 2
        while i >= 0 and perm[i] >= perm[i + 1]:
            i -= 1
        if i < 0:
            return out
        j = n - 1
        while perm[j] <= perm[i]:
            j -= 1
        tmp = perm[i]; perm[i] = perm[j]; perm[j] = tmp
        k = 1
        while i + k < n - k:
            tmp = perm[i + k]; perm[i + k] = perm[n - k]; perm[n - k] = tmp
            k += 1


def count_solvable_profiles(int n):
    """Exhaustively count solvable preference profiles ((n-1)!^n of them)."""
    import itertools
    others = [[j for j in range(n) if j != i] for i in range(n)]
    tables = [np.array(list(itertools.permutations(o)), dtype=np.int32)
              for o in others]
    cdef const int[:, ::1] perms0 = tables[0]   # same shape for every agent
    cdef int nperm = perms0.shape[0]
    cdef int row_len = n - 1

    all_perms = np.stack(tables)                # (n, nperm, n-1)
    cdef const int[:, :, ::1] perms = all_perms

    prefs_arr = np.empty((n, row_len), dtype=np.int32)
    rank_arr = np.full((n, n), n, dtype=np.int32)
    cdef int[:, ::1] prefs = prefs_arr
    cdef int[:, ::1] rank = rank_arr
    buf = np.empty((11, n), dtype=np.int32)
    cdef int[:, ::1] b = buf
    frozen_arr = np.zeros(n, dtype=np.int8)
    cdef signed char[::1] frozen = frozen_arr
    pred_arr = np.empty(n, dtype=np.int32)
    cdef int[::1] pred = pred_arr
    digit_arr = np.zeros(n, dtype=np.int64)
    cdef long long[::1] digit = digit_arr

    cdef long long total = 1
    cdef int i, k, a, rc, solvable_flag, start, l
    for i in range(n):
        total *= nperm
    cdef long long solvable = 0
    cdef long long t
    cdef int[::1] succ = b[5]

    with nogil:
        for i in range(n):
            for k in range(row_len):
                a = perms[i, 0, k]
                prefs[i, k] = a
                rank[i, a] = k + 1
        t = 0
        while True:
            t += 1
            rc = _partition_into(n, prefs, rank, b[0], b[1], b[2], b[3], b[4],
                                 frozen, b[5], b[6], b[7], b[8], b[9], b[10])
            if rc < 0:
                break
            if _check_partition(n, rank, succ, pred) == 0:
                rc = -5
                break
            # solvable iff no odd cycle of length >= 3
            solvable_flag = 1
            for i in range(n):
                pred[i] = 0
            for start in range(n):
                if pred[start] != 0:
                    continue
                l = 0
                i = start
                while pred[i] == 0:
                    pred[i] = 1
                    i = succ[i]
                    l += 1
                if l >= 3 and l % 2 == 1:
                    solvable_flag = 0
                    break
            solvable += solvable_flag
            if t == total:
                break
            # odometer step: advance agent 0's row, carry upward
            i = 0
            while True:
                digit[i] += 1
                if digit[i] < nperm:
                    break
                digit[i] = 0
                i += 1
            while i >= 0:
                for k in range(row_len):
                    a = perms[i, digit[i], k]
                    prefs[i, k] = a
                    rank[i, a] = k + 1
                i -= 1

    if rc < 0:
        if rc == -5:
            raise EngineError("profile enumeration produced an unstable partition")
        raise EngineError(_ENGINE_FAULTS[rc])
    return int(solvable), int(total)


def rim_insert(ref_in, double phi, u_in):
    """Mallows repeated insertion: perturb the reference row using the given
    uniforms (one per item after the first).  Mirrors the pure fallback."""
    cdef const int[::1] ref = np.ascontiguousarray(ref_in, dtype=np.int32)
    cdef const double[::1] u = np.ascontiguousarray(u_in, dtype=np.float64)
    cdef int m = ref.shape[0]
    out_arr = np.empty(m, dtype=np.int32)
    cdef int[::1] out = out_arr
    cdef int t, d, p0, k
    cdef double z, target, c, pw
    if m == 0:
        return out_arr
    out[0] = ref[0]
    z = 1.0
    for t in range(2, m + 1):
        z = z * phi + 1.0
        target = u[t - 2] * z
        c = 0.0
        pw = 1.0
        d = 0
        while d < t - 1:
            c += pw
            if target < c:
                break
            pw *= phi
            d += 1
        p0 = t - 1 - d
        k = t - 1
        while k > p0:
            out[k] = out[k - 1]
            k -= 1
        out[p0] = ref[t - 1]
    return out_arr
