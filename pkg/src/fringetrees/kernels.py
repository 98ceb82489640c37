"""Hot numeric kernels.

Every kernel has a loop form (compiled with numba when it is installed) and,
where the loop vectorizes sensibly, a pure-numpy form. The public names at the
bottom of the module dispatch on :data:`fringetrees._accel.USE_NUMBA`; both raw
variants stay importable so the benchmark and the equivalence tests can run
them side by side.

All kernels take DFS degree sequences as 1-d ``int64`` arrays.
"""
import math

import numpy as np

from ._accel import HAVE_NUMBA, USE_NUMBA, njit

# ---------------------------------------------------------------------------
# fringe sizes


def _fringe_sizes_loop(d):
    n = d.shape[0]
    sizes = np.empty(n, np.int64)
    stack = np.empty(n, np.int64)
    top = 0
    for j in range(n - 1, -1, -1):
        k = d[j]
        if k > top:
            raise ValueError("not a depth-first degree sequence")
        s = 1
        for _ in range(k):
            top -= 1
            s += stack[top]
        stack[top] = s
        top += 1
        sizes[j] = s
    if top != 1:
        raise ValueError("not a depth-first degree sequence")
    return sizes


def _fringe_sizes_np(d):
    # The fringe at j ends at the first k >= j where the walk sum(d_i - 1)
    # drops one below its value before j; find it by searchsorted on
    # (walk value, position) keys.
    n = d.shape[0]
    walk = np.zeros(n + 1, np.int64)
    np.cumsum(d - 1, out=walk[1:])
    if walk[n] != -1 or (n > 1 and walk[1:n].min() < 0):
        raise ValueError("not a depth-first degree sequence")
    lo = -1
    stride = n + 2
    pos = np.arange(1, n + 1, dtype=np.int64)
    keys = np.sort((walk[1:] - lo) * stride + pos)
    query = (walk[:-1] - 1 - lo) * stride + pos
    hit = keys[np.searchsorted(keys, query)]
    return hit % stride - (pos - 1)


# ---------------------------------------------------------------------------
# cycle lemma rotation


def _rotation_start_loop(d):
    n = d.shape[0]
    walk = 0
    best = 1
    arg = 0
    for i in range(n):
        walk += d[i] - 1
        if walk < best:
            best = walk
            arg = i
    return (arg + 1) % n


def _rotation_start_np(d):
    walk = np.cumsum(d - 1)
    return (int(np.argmin(walk)) + 1) % d.shape[0]


# ---------------------------------------------------------------------------
# window matching; fringes of equal size are disjoint, so the total work over
# all candidate windows is O(n)


def _count_tree_windows_loop(d, sizes, target):
    m = target.shape[0]
    total = 0
    for j in range(d.shape[0]):
        if sizes[j] != m:
            continue
        ok = True
        for i in range(m):
            if d[j + i] != target[i]:
                ok = False
                break
        if ok:
            total += 1
    return total


def _count_tree_windows_np(d, sizes, target):
    m = target.shape[0]
    cands = np.flatnonzero(sizes == m)
    if cands.size == 0:
        return 0
    windows = d[cands[:, None] + np.arange(m)]
    return int(np.all(windows == target, axis=1).sum())


def _count_statistic_windows_loop(d, sizes, degs, cnts, total_size):
    maxdeg = 0
    for i in range(degs.shape[0]):
        if degs[i] > maxdeg:
            maxdeg = degs[i]
    want = np.zeros(maxdeg + 1, np.int64)
    for i in range(degs.shape[0]):
        want[degs[i]] = cnts[i]
    have = np.zeros(maxdeg + 1, np.int64)
    total = 0
    for j in range(d.shape[0]):
        if sizes[j] != total_size:
            continue
        have[:] = 0
        ok = True
        for i in range(total_size):
            x = d[j + i]
            if x > maxdeg:
                ok = False
                break
            have[x] += 1
            if have[x] > want[x]:
                ok = False
                break
        if ok:
            total += 1
    return total


def _count_statistic_windows_np(d, sizes, degs, cnts, total_size):
    cands = np.flatnonzero(sizes == total_size)
    if cands.size == 0:
        return 0
    ok = np.ones(cands.size, dtype=bool)
    for deg, cnt in zip(degs, cnts):
        prefix = np.zeros(d.shape[0] + 1, np.int64)
        np.cumsum(d == deg, out=prefix[1:])
        ok &= (prefix[cands + total_size] - prefix[cands]) == cnt
    return int(ok.sum())


# ---------------------------------------------------------------------------
# law of a sum drawn without replacement (float path; the rational path lives
# in the oracle). Values are shifted to be >= 0 and grouped; the last group is
# forced to fill the remaining draws.

_PRUNE = 1e-22


def _make_swor_dp(log_comb):
    def swor_dp(vals, counts, m, logfact):
        return _swor_dp_body(log_comb, vals, counts, m, logfact)

    return swor_dp


def _log_comb(logfact, a, b):
    return logfact[a] - logfact[b] - logfact[a - b]


def _swor_dp_body(_log_comb, vals, counts, m, logfact):
    ngroups = vals.shape[0]
    vmax = 0
    for g in range(ngroups):
        if vals[g] > vmax:
            vmax = vals[g]
    width = m * vmax + 1
    cur = np.zeros((m + 1, width))
    cur[0, 0] = 1.0
    jtop = 0
    stop = np.zeros(m + 1, np.int64)  # highest reachable sum per draw count
    n_old = 0
    for g in range(ngroups - 1):
        v = vals[g]
        c = counts[g]
        nxt = np.zeros((m + 1, width))
        nstop = np.zeros(m + 1, np.int64)
        ht = np.empty(m + 1)
        for j in range(jtop + 1):
            tmax = min(c, m - j)
            lbase = _log_comb(logfact, n_old, j)
            best = -np.inf
            for t in range(tmax + 1):
                lv = lbase + _log_comb(logfact, c, t) - _log_comb(logfact, n_old + c, j + t)
                ht[t] = lv
                if lv > best:
                    best = lv
            cut = best + math.log(_PRUNE)
            for t in range(tmax + 1):
                if ht[t] < cut:
                    continue
                h = math.exp(ht[t])
                jj = j + t
                off = v * t
                for s in range(stop[j] + 1):
                    w = cur[j, s]
                    if w != 0.0:
                        nxt[jj, s + off] += w * h
                if stop[j] + off > nstop[jj]:
                    nstop[jj] = stop[j] + off
        cur = nxt
        stop = nstop
        n_old += c
        jtop = min(m, jtop + c)
    v = vals[ngroups - 1]
    c = counts[ngroups - 1]
    out = np.zeros(width)
    lnorm = _log_comb(logfact, n_old + c, m)
    for j in range(jtop + 1):
        t = m - j
        if t > c or j > n_old:
            continue
        h = math.exp(_log_comb(logfact, n_old, j) + _log_comb(logfact, c, t) - lnorm)
        off = v * t
        for s in range(stop[j] + 1):
            w = cur[j, s]
            if w != 0.0:
                out[s + off] += w * h
    return out


def _swor_dp_np(vals, counts, m, logfact):
    vmax = int(vals.max())
    width = m * vmax + 1
    cur = np.zeros((m + 1, width))
    cur[0, 0] = 1.0
    stop = np.zeros(m + 1, np.int64)
    jtop = 0
    n_old = 0

    def lcomb(a, b):
        return logfact[a] - logfact[b] - logfact[a - b]

    for v, c in zip(vals[:-1].tolist(), counts[:-1].tolist()):
        nxt = np.zeros_like(cur)
        nstop = np.zeros_like(stop)
        for j in range(jtop + 1):
            tmax = min(c, m - j)
            t = np.arange(tmax + 1)
            lv = lcomb(n_old, j) + lcomb(c, t) - lcomb(n_old + c, j + t)
            keep = lv >= lv.max() + math.log(_PRUNE)
            row = cur[j, : stop[j] + 1]
            for tt, h in zip(t[keep].tolist(), np.exp(lv[keep]).tolist()):
                off = v * tt
                nxt[j + tt, off : off + row.size] += row * h
                nstop[j + tt] = max(nstop[j + tt], stop[j] + off)
        cur, stop = nxt, nstop
        n_old += c
        jtop = min(m, jtop + c)
    v, c = int(vals[-1]), int(counts[-1])
    out = np.zeros(width)
    lnorm = lcomb(n_old + c, m)
    for j in range(jtop + 1):
        t = m - j
        if t > c or j > n_old:
            continue
        h = math.exp(lcomb(n_old, j) + lcomb(c, t) - lnorm)
        row = cur[j, : stop[j] + 1]
        out[v * t : v * t + row.size] += row * h
    return out


# ---------------------------------------------------------------------------
# the four-step coupling that realizes "base given a match at window k"


def _couple_core_loop(base, target, k, marked, order, out):
    n = base.shape[0]
    m = target.shape[0]
    in_window = np.zeros(n, np.bool_)
    storage = np.empty(m, np.int64)
    nstore = 0
    for i in range(m):
        p = (k + i) % n
        in_window[p] = True
        if not marked[p]:
            storage[nstore] = base[p]
            nstore += 1
    for p in range(n):
        out[p] = base[p]
    for i in range(m):
        out[(k + i) % n] = target[i]
    idx = 0
    for p in range(n):
        if marked[p] and not in_window[p]:
            out[p] = storage[order[idx]]
            idx += 1
    return nstore


def _make_couple_batch(core):
    def couple_batch(bases, target, k, need, mark_keys, order_keys):
        return _couple_batch_body(core, bases, target, k, need, mark_keys, order_keys)

    return couple_batch


def _couple_batch_body(core, bases, target, k, need, mark_keys, order_keys):
    reps, n = bases.shape
    m = target.shape[0]
    out = np.empty_like(bases)
    marked = np.zeros(n, np.bool_)
    idx = np.empty(n, np.int64)
    for r in range(reps):
        base = bases[r]
        marked[:] = False
        for deg in range(need.shape[0]):
            if need[deg] == 0:
                continue
            cnt = 0
            for p in range(n):
                if base[p] == deg:
                    idx[cnt] = p
                    cnt += 1
            keys = np.empty(cnt)
            for q in range(cnt):
                keys[q] = mark_keys[r, idx[q]]
            chosen = np.argsort(keys)[: need[deg]]
            for q in chosen:
                marked[idx[q]] = True
        nfree = 0
        for i in range(m):
            if not marked[(k + i) % n]:
                nfree += 1
        order = np.argsort(order_keys[r, :nfree])
        core(base, target, k, marked, order, out[r])
    return out


# ---------------------------------------------------------------------------
# dispatch

_swor_dp_loop = _make_swor_dp(_log_comb)
_couple_batch_loop = _make_couple_batch(_couple_core_loop)

if HAVE_NUMBA:
    fringe_sizes_numba = njit(_fringe_sizes_loop)
    rotation_start_numba = njit(_rotation_start_loop)
    count_tree_windows_numba = njit(_count_tree_windows_loop)
    count_statistic_windows_numba = njit(_count_statistic_windows_loop)
    _swor_dp_body_numba = njit(_swor_dp_body)
    _log_comb_numba = njit(_log_comb)
    couple_core_numba = njit(_couple_core_loop)
    _couple_batch_body_numba = njit(_couple_batch_body)

    @njit(cache=False)
    def swor_dp_numba(vals, counts, m, logfact):
        return _swor_dp_body_numba(_log_comb_numba, vals, counts, m, logfact)

    @njit(cache=False)
    def couple_batch_numba(bases, target, k, need, mark_keys, order_keys):
        return _couple_batch_body_numba(
            couple_core_numba, bases, target, k, need, mark_keys, order_keys
        )


if USE_NUMBA:
    fringe_sizes = fringe_sizes_numba
    rotation_start = rotation_start_numba
    count_tree_windows = count_tree_windows_numba
    count_statistic_windows = count_statistic_windows_numba
    swor_dp = swor_dp_numba
    couple_core = couple_core_numba
    couple_batch = couple_batch_numba
else:
    fringe_sizes = _fringe_sizes_np
    rotation_start = _rotation_start_np
    count_tree_windows = _count_tree_windows_np
    count_statistic_windows = _count_statistic_windows_np
    swor_dp = _swor_dp_np
    couple_core = _couple_core_loop
    couple_batch = _couple_batch_loop

NUMPY_KERNELS = {
    "fringe_sizes": _fringe_sizes_np,
    "rotation_start": _rotation_start_np,
    "count_tree_windows": _count_tree_windows_np,
    "count_statistic_windows": _count_statistic_windows_np,
    "swor_dp": _swor_dp_np,
    "couple_batch": _couple_batch_loop,
}
NUMBA_KERNELS = (
    {
        "fringe_sizes": fringe_sizes_numba,
        "rotation_start": rotation_start_numba,
        "count_tree_windows": count_tree_windows_numba,
        "count_statistic_windows": count_statistic_windows_numba,
        "swor_dp": swor_dp_numba,
        "couple_batch": couple_batch_numba,
    }
    if HAVE_NUMBA
    else {}
)


def log_factorials(n):
    """Table of ``ln k!`` for ``k = 0..n``."""
    from scipy.special import gammaln

    return gammaln(np.arange(n + 1, dtype=np.float64) + 1.0)
