"""Random constructions: uniform trees with a fixed degree statistic, sums
drawn without replacement, size-conditioned Galton-Watson trees, the
window coupling used for Poisson approximation, and the fringe-resampling
exchangeable pair.

All randomness flows through an explicit :class:`RandomStream`.
"""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import (
    AttemptsExhausted,
    CountOutOfRange,
    FringeError,
    IncompatibleSize,
    InfeasibleTarget,
)
from .treecore import PlaneTree, cycle_rotate

# support sizes up to this use count-level rejection; larger supports draw iid
COUNT_REJECTION_MAX_SUPPORT = 64


class RandomStream:
    """Reproducible random source keyed by ``(master_seed, stream_index)``.

    Distinct keys give independent streams (numpy ``SeedSequence`` spawn
    keys); equal keys replay the same sequence. ``child(j)`` derives a further
    independent stream, e.g. for auxiliary noise inside one replicate.
    """

    __slots__ = ("master_seed", "stream_index", "path", "generator")

    def __init__(self, master_seed, stream_index=0, path=()):
        self.master_seed = int(master_seed)
        self.stream_index = int(stream_index)
        self.path = tuple(int(x) for x in path)
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_index, *self.path))
        self.generator = np.random.Generator(np.random.PCG64(seq))

    def child(self, j):
        return RandomStream(self.master_seed, self.stream_index, self.path + (j,))

    def __repr__(self):
        return f"RandomStream({self.master_seed}, {self.stream_index}, path={self.path})"


def _gen(rng):
    if isinstance(rng, RandomStream):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError("expected a RandomStream or numpy Generator")


# ---------------------------------------------------------------------------
# uniform trees


def sample_uniform_bridge(bn, rng):
    """Uniform arrangement of the degree multiset of ``bn``."""
    return _gen(rng).permutation(bn.multiset())


def sample_uniform_tree(bn, rng):
    """Exact uniform sample from the trees with statistic ``bn``."""
    return PlaneTree(cycle_rotate(sample_uniform_bridge(bn, rng)), validate=False)


def sample_uniform_batch(bn, reps, rng):
    """``reps`` independent uniform trees as rows of an int64 array."""
    gen = _gen(rng)
    base = np.broadcast_to(bn.multiset(), (reps, bn.size))
    rows = gen.permuted(base, axis=1)
    return rotate_rows(rows)


def rotate_rows(rows):
    """Cycle-rotate every row of a 2-d array of bridges."""
    n = rows.shape[1]
    walk = np.cumsum(rows - 1, axis=1)
    start = (np.argmin(walk, axis=1) + 1) % n
    idx = (start[:, None] + np.arange(n)) % n
    return np.take_along_axis(rows, idx, axis=1)


# ---------------------------------------------------------------------------
# sums without replacement


def sample_swor_sum(d, m, rng):
    """Sum of ``m`` entries of ``d`` chosen uniformly without replacement."""
    d = np.asarray(d, dtype=np.int64)
    if not 0 <= m <= d.size:
        raise CountOutOfRange(f"cannot draw {m} from {d.size} items")
    if m == 0:
        return 0
    return int(_gen(rng).choice(d, size=m, replace=False).sum())


# ---------------------------------------------------------------------------
# conditioned Galton-Watson trees


def check_gw_size(p, n):
    """Raise :class:`IncompatibleSize` if no tree of size ``n`` has positive probability."""
    if n < 1:
        raise IncompatibleSize("size must be at least 1")
    if p.prob(0) == 0:
        raise IncompatibleSize("offspring law gives no leaves, so no finite tree exists")
    if np.isinf(p.span):
        if n != 1:
            raise IncompatibleSize("offspring law is a point mass at 0; only size 1 exists")
    elif (n - 1) % p.span:
        raise IncompatibleSize(f"size {n} is not 1 mod the span {p.span}")


def sample_gw_sequence(p, n, rng, max_attempts=1_000_000, method="auto"):
    """Degree sequence (already rotated) of a GW tree conditioned on size ``n``.

    The law is that of ``n`` iid offspring draws conditioned to sum to
    ``n - 1``, then cycle-rotated. ``method="iid"`` draws the ``n`` values
    directly; ``method="counts"`` draws their multinomial count vector,
    rejects on the same event, and arranges the accepted multiset uniformly,
    which is the same law at a fraction of the cost when the support is small.
    """
    check_gw_size(p, n)
    gen = _gen(rng)
    if n == 1:
        return np.zeros(1, dtype=np.int64)
    support = p.support
    if method == "auto":
        method = "counts" if support.size <= COUNT_REJECTION_MAX_SUPPORT else "iid"
    if method == "counts":
        for _ in range(max_attempts):
            counts = gen.multinomial(n, p.probs)
            if int(counts @ support) == n - 1:
                return cycle_rotate(gen.permutation(np.repeat(support, counts)))
    elif method == "iid":
        cdf = np.cumsum(p.probs)
        cdf[-1] = 1.0
        for _ in range(max_attempts):
            draw = support[np.searchsorted(cdf, gen.random(n), side="right")]
            if int(draw.sum()) == n - 1:
                return cycle_rotate(draw)
    else:
        raise FringeError(f"unknown method {method!r}")
    raise AttemptsExhausted(f"no sample of size {n} after {max_attempts} attempts")


def sample_conditioned_gw(p, n, rng, max_attempts=1_000_000, method="auto"):
    """Galton-Watson tree with offspring law ``p`` conditioned to have ``n`` vertices."""
    return PlaneTree(sample_gw_sequence(p, n, rng, max_attempts, method), validate=False)


# ---------------------------------------------------------------------------
# exchangeable pair


def exchangeable_pair_step(host, target, rng):
    """Pick a uniform vertex; if its fringe has statistic ``target``, replace
    the fringe by an independent uniform tree with that statistic."""
    gen = _gen(rng)
    v = int(gen.integers(host.size))
    size = int(host.fringe_sizes[v])
    if size != target.size:
        return host
    window = host.degrees[v : v + size]
    counts = np.bincount(window, minlength=target.max_degree + 1)
    if counts.size > target.max_degree + 1:
        return host
    for deg, mult in target.items:
        if counts[deg] != mult:
            return host
    fresh = sample_uniform_tree(target, gen).degrees
    out = host.degrees.copy()
    out[v : v + size] = fresh
    return PlaneTree(out, validate=False)


# ---------------------------------------------------------------------------
# window coupling


@dataclass(frozen=True)
class CoupledPair:
    """A uniform arrangement ``base`` and ``coupled``, whose law is that of
    ``base`` given that the window starting at ``anchor`` reads the target.
    ``marked`` lists the positions chosen in the marking step."""

    base: np.ndarray
    coupled: np.ndarray
    anchor: int
    marked: tuple


def _check_feasible(bn, t):
    for deg, mult in t.statistic.items:
        if mult > bn[deg]:
            raise InfeasibleTarget(f"target needs {mult} vertices of degree {deg}, have {bn[deg]}")


def stein_coupled_pair(bn, t, k, rng):
    """Couple a uniform arrangement of ``bn`` with one conditioned on a match at ``k``.

    Steps: mark, for each degree ``i``, ``n_t(i)`` uniformly chosen positions
    holding ``i``; take the window ``k .. k+|t|-1`` (cyclic, 0-based) out;
    write the target's sequence into the window using the marked degrees;
    put the unmarked window degrees back into the vacated marked positions in
    uniform random order.
    """
    _check_feasible(bn, t)
    n = bn.size
    if not 0 <= k < n:
        raise FringeError(f"anchor {k} outside 0..{n - 1}")
    gen = _gen(rng)
    base = gen.permutation(bn.multiset())
    marked = np.zeros(n, dtype=bool)
    for deg, mult in t.statistic.items:
        pos = np.flatnonzero(base == deg)
        marked[gen.choice(pos, size=mult, replace=False)] = True
    window = (k + np.arange(t.size)) % n
    nfree = int(np.count_nonzero(~marked[window]))
    order = gen.permutation(nfree)
    coupled = np.empty_like(base)
    kernels.couple_core(base, t.degrees, k, marked, order, coupled)
    return CoupledPair(base, coupled, k, tuple(np.flatnonzero(marked).tolist()))


def stein_coupled_batch(bn, t, k, reps, rng):
    """``reps`` independent coupled arrangements (rows), via the batch kernel."""
    _check_feasible(bn, t)
    gen = _gen(rng)
    n = bn.size
    bases = gen.permuted(np.broadcast_to(bn.multiset(), (reps, n)), axis=1)
    need = np.zeros(bn.max_degree + 1, dtype=np.int64)
    for deg, mult in t.statistic.items:
        need[deg] = mult
    mark_keys = gen.random((reps, n))
    order_keys = gen.random((reps, t.size))
    return kernels.couple_batch(bases, t.degrees.copy(), k, need, mark_keys, order_keys)
