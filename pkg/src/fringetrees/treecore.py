"""Plane trees as depth-first degree sequences, degree statistics, and the
linear-time fringe-subtree counters.

A plane tree with ``n`` vertices is stored as its depth-first (preorder)
sequence of out-degrees ``d``. A length-``n`` sequence encodes a tree iff its
entries sum to ``n - 1`` and every proper prefix of length ``k`` sums to at
least ``k``. The fringe subtree at vertex ``j`` occupies the contiguous window
``d[j:j + size_j]``, so fringe counting reduces to window matching.
"""
import math
from fractions import Fraction

import numpy as np

from . import kernels
from .errors import (
    EmptyInput,
    FringeError,
    IdentityViolation,
    InvalidEncoding,
    NotABridge,
)


def _as_degree_array(d):
    arr = np.asarray(d, dtype=np.int64)
    if arr.ndim != 1:
        raise InvalidEncoding("a degree sequence must be one-dimensional")
    if arr.size == 0:
        raise EmptyInput("empty degree sequence")
    if arr.min() < 0:
        raise InvalidEncoding("degrees must be nonnegative")
    return arr


class DegreeStatistic:
    """Multiset of out-degrees satisfying ``sum n(i) = 1 + sum i*n(i)``.

    Only nonzero multiplicities are stored, sorted by degree, so equality and
    hashing are structural. Indexing returns the multiplicity (0 if absent).
    """

    __slots__ = ("_items", "_size", "_hash")

    def __init__(self, counts):
        if hasattr(counts, "items"):
            counts = counts.items()
        items = []
        for deg, mult in counts:
            deg, mult = int(deg), int(mult)
            if deg < 0:
                raise FringeError(f"negative degree {deg}")
            if mult < 0:
                raise FringeError(f"negative multiplicity for degree {deg}")
            if mult:
                items.append((deg, mult))
        if not items:
            raise EmptyInput("degree statistic has no vertices")
        items.sort()
        degs = [d for d, _ in items]
        if len(set(degs)) != len(degs):
            raise FringeError("duplicate degree in statistic")
        size = sum(m for _, m in items)
        edges = sum(d * m for d, m in items)
        if size != 1 + edges:
            raise IdentityViolation(
                f"sum of multiplicities {size} != 1 + sum of degrees {1 + edges}"
            )
        self._items = tuple(items)
        self._size = size
        self._hash = hash(self._items)

    @classmethod
    def parse(cls, text):
        """Parse the ``"deg:count,deg:count"`` encoding."""
        pairs = []
        for part in text.replace(" ", "").split(","):
            if not part:
                continue
            try:
                deg, mult = part.split(":")
                pairs.append((int(deg), int(mult)))
            except ValueError as exc:
                raise FringeError(f"cannot parse statistic component {part!r}") from exc
        return cls(pairs)

    @classmethod
    def of_sequence(cls, d):
        arr = _as_degree_array(d)
        counts = np.bincount(arr)
        return cls((i, int(c)) for i, c in enumerate(counts) if c)

    @property
    def size(self):
        return self._size

    @property
    def items(self):
        """Tuple of ``(degree, multiplicity)`` pairs with positive multiplicity."""
        return self._items

    @property
    def support(self):
        """The degrees present, ascending."""
        return tuple(d for d, _ in self._items)

    @property
    def max_degree(self):
        return self._items[-1][0]

    def __getitem__(self, deg):
        for d, m in self._items:
            if d == deg:
                return m
        return 0

    def as_dict(self):
        return dict(self._items)

    def multiset(self):
        """All degrees as an ascending int64 array of length ``size``."""
        degs = np.array([d for d, _ in self._items], dtype=np.int64)
        mults = np.array([m for _, m in self._items], dtype=np.int64)
        return np.repeat(degs, mults)

    def __eq__(self, other):
        return isinstance(other, DegreeStatistic) and self._items == other._items

    def __hash__(self):
        return self._hash

    def __str__(self):
        return ",".join(f"{d}:{m}" for d, m in self._items)

    def __repr__(self):
        return f"DegreeStatistic({str(self)!r})"


def validate_degree_statistic(counts):
    """Build a :class:`DegreeStatistic`, raising if the tree identity fails."""
    return DegreeStatistic(counts)


def count_trees(bn):
    """Number of plane trees with statistic ``bn``: ``|n|! / (|n| * prod n(i)!)``."""
    num = math.factorial(bn.size)
    den = bn.size
    for _, m in bn.items:
        den *= math.factorial(m)
    q, r = divmod(num, den)
    assert r == 0
    return q


def is_valid_degree_sequence(d):
    """True iff ``d`` is the depth-first degree sequence of a plane tree."""
    arr = np.asarray(d, dtype=np.int64)
    if arr.ndim != 1 or arr.size == 0 or arr.min() < 0:
        return False
    walk = np.cumsum(arr - 1)
    return bool(walk[-1] == -1 and (arr.size == 1 or walk[:-1].min() >= 0))


def cycle_rotate(d):
    """Return the unique cyclic shift of the bridge ``d`` that encodes a tree."""
    arr = _as_degree_array(d)
    if int(arr.sum()) != arr.size - 1:
        raise NotABridge(f"degrees sum to {int(arr.sum())}, expected {arr.size - 1}")
    start = kernels.rotation_start(arr)
    out = np.roll(arr, -start)
    if not is_valid_degree_sequence(out):  # pragma: no cover - cycle lemma
        raise AssertionError("rotation failed to produce a tree encoding")
    return out


class PlaneTree:
    """Rooted plane tree held as its depth-first degree sequence.

    Two trees are equal iff their degree sequences are equal. The sequence is
    a read-only int64 array; statistic, fringe sizes and adjacency are derived
    lazily and cached.
    """

    __slots__ = ("_d", "_hash", "_stat", "_sizes")

    def __init__(self, degrees, *, validate=True):
        arr = _as_degree_array(degrees)
        if validate and not is_valid_degree_sequence(arr):
            raise InvalidEncoding(f"not a depth-first degree sequence: {_fmt(arr)}")
        arr = arr.copy()
        arr.flags.writeable = False
        self._d = arr
        self._hash = None
        self._stat = None
        self._sizes = None

    @classmethod
    def parse(cls, text):
        try:
            vals = [int(x) for x in text.replace(" ", "").split(",") if x]
        except ValueError as exc:
            raise InvalidEncoding(f"cannot parse tree {text!r}") from exc
        return cls(vals)

    @property
    def degrees(self):
        return self._d

    @property
    def size(self):
        return int(self._d.size)

    def __len__(self):
        return self.size

    @property
    def statistic(self):
        if self._stat is None:
            self._stat = DegreeStatistic.of_sequence(self._d)
        return self._stat

    @property
    def fringe_sizes(self):
        """Size of the fringe subtree at each vertex, in depth-first order."""
        if self._sizes is None:
            sizes = kernels.fringe_sizes(self._d)
            sizes.flags.writeable = False
            self._sizes = sizes
        return self._sizes

    def parents(self):
        """Parent index per vertex (-1 for the root)."""
        n = self.size
        parent = np.full(n, -1, dtype=np.int64)
        remaining = self._d.copy()
        stack = []
        for j in range(n):
            if stack:
                p = stack[-1]
                parent[j] = p
                remaining[p] -= 1
                if remaining[p] == 0:
                    stack.pop()
            if self._d[j] > 0:
                stack.append(j)
        return parent

    def children(self):
        """List of child-index lists, in plane order."""
        kids = [[] for _ in range(self.size)]
        for j, p in enumerate(self.parents().tolist()):
            if p >= 0:
                kids[p].append(j)
        return kids

    def __eq__(self, other):
        return isinstance(other, PlaneTree) and np.array_equal(self._d, other._d)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._d.tobytes())
        return self._hash

    def __str__(self):
        return _fmt(self._d)

    def __repr__(self):
        text = _fmt(self._d) if self.size <= 40 else _fmt(self._d[:40]) + ",..."
        return f"PlaneTree({text!r})"


def _fmt(arr):
    return ",".join(str(int(x)) for x in arr)


def tree_from_degree_sequence(d):
    return PlaneTree(d)


def degree_sequence_of_tree(t):
    return t.degrees


def canonical_tree(bm):
    """Deterministic representative of the class of ``bm``: degrees descending.

    Descending order maximizes every prefix sum, so it encodes a tree whenever
    any arrangement does.
    """
    return PlaneTree(bm.multiset()[::-1].copy(), validate=False)


LEAF = PlaneTree([0])


def fringe_count_tree(host, target):
    """Number of vertices of ``host`` whose fringe subtree equals ``target``."""
    if target.size > host.size:
        return 0
    return int(kernels.count_tree_windows(host.degrees, host.fringe_sizes, target.degrees))


def fringe_count_statistic(host, bm):
    """Number of fringe subtrees of ``host`` with degree statistic ``bm``."""
    if bm.size > host.size:
        return 0
    degs = np.array(bm.support, dtype=np.int64)
    cnts = np.array([m for _, m in bm.items], dtype=np.int64)
    return int(
        kernels.count_statistic_windows(host.degrees, host.fringe_sizes, degs, cnts, bm.size)
    )


def fringe_count_size(host, m):
    """Number of fringe subtrees of ``host`` with exactly ``m`` vertices."""
    if m < 1:
        raise FringeError("fringe size must be at least 1")
    return int(np.count_nonzero(host.fringe_sizes == m))


def fringe_size_histogram(host):
    """``hist[m]`` = number of fringe subtrees of size ``m``."""
    return np.bincount(host.fringe_sizes, minlength=host.size + 1)


def fringe_decomposition(host):
    """``(vertex, fringe size, fringe statistic)`` for every vertex, in DFS order."""
    d = host.degrees
    out = []
    for j, s in enumerate(host.fringe_sizes.tolist()):
        out.append((j, s, DegreeStatistic.of_sequence(d[j : j + s])))
    return out


class DegreeDistribution:
    """Probability law on the nonnegative integers.

    Built either from exact rationals (``Fraction`` weights, mean and variance
    exact) or from floats. Zero-probability points are dropped. ``span`` is
    the gcd of support differences, ``math.inf`` for a point mass.
    """

    __slots__ = ("support", "probs", "weights", "mean", "variance", "span")

    def __init__(self, pmf, *, tol=1e-9):
        if hasattr(pmf, "items"):
            pmf = pmf.items()
        pairs = sorted((int(k), v) for k, v in pmf if v != 0)
        if not pairs:
            raise EmptyInput("distribution has empty support")
        if pairs[0][0] < 0:
            raise FringeError("support must be nonnegative")
        if any(v < 0 for _, v in pairs):
            raise FringeError("negative probability")
        exact = all(isinstance(v, (int, Fraction)) for _, v in pairs)
        self.support = np.array([k for k, _ in pairs], dtype=np.int64)
        if exact:
            self.weights = tuple(Fraction(v) for _, v in pairs)
            if sum(self.weights) != 1:
                raise FringeError(f"probabilities sum to {sum(self.weights)}, not 1")
            self.mean = sum(k * w for k, w in zip(self.support.tolist(), self.weights))
            self.variance = sum(
                (k - self.mean) ** 2 * w for k, w in zip(self.support.tolist(), self.weights)
            )
            self.probs = np.array([float(w) for w in self.weights])
        else:
            self.weights = None
            self.probs = np.array([float(v) for _, v in pairs])
            total = math.fsum(self.probs)
            if abs(total - 1.0) > tol:
                raise FringeError(f"probabilities sum to {total}, not 1")
            self.probs = self.probs / total
            k = self.support.astype(np.float64)
            self.mean = math.fsum(k * self.probs)
            self.variance = math.fsum((k - self.mean) ** 2 * self.probs)
        self.span = _span(self.support)

    @classmethod
    def from_arrays(cls, support, probs, *, tol=1e-9):
        """Float law from parallel arrays, without building a Python mapping."""
        support = np.asarray(support, dtype=np.int64)
        probs = np.asarray(probs, dtype=np.float64)
        if support.shape != probs.shape or support.ndim != 1:
            raise FringeError("support and probabilities must be matching 1-d arrays")
        keep = probs != 0
        support, probs = support[keep], probs[keep]
        if support.size == 0:
            raise EmptyInput("distribution has empty support")
        if support.min() < 0 or probs.min() < 0:
            raise FringeError("support and probabilities must be nonnegative")
        order = np.argsort(support, kind="stable")
        support, probs = support[order], probs[order]
        if np.any(np.diff(support) == 0):
            raise FringeError("repeated support point")
        total = math.fsum(probs)
        if abs(total - 1.0) > tol:
            raise FringeError(f"probabilities sum to {total}, not 1")
        self = cls.__new__(cls)
        self.support = support
        self.probs = probs / total
        self.weights = None
        k = support.astype(np.float64)
        self.mean = math.fsum(k * self.probs)
        self.variance = math.fsum((k - self.mean) ** 2 * self.probs)
        self.span = _span(support)
        return self

    @property
    def is_rational(self):
        return self.weights is not None

    @property
    def pmf(self):
        vals = self.weights if self.weights is not None else self.probs.tolist()
        return dict(zip(self.support.tolist(), vals))

    def prob(self, i):
        """Probability of ``i`` (exact when the law is rational)."""
        idx = np.searchsorted(self.support, i)
        if idx < self.support.size and self.support[idx] == i:
            return self.weights[idx] if self.weights is not None else float(self.probs[idx])
        return Fraction(0) if self.weights is not None else 0.0

    @property
    def second_moment(self):
        return self.variance + self.mean**2

    def __repr__(self):
        if self.support.size <= 8:
            return f"DegreeDistribution({self.pmf!r})"
        return f"DegreeDistribution(<{self.support.size} points>, mean={float(self.mean):.6g})"


def _span(support):
    if support.size == 1:
        return math.inf
    base = int(support[0])
    return int(np.gcd.reduce(support[1:] - base))


def span_of(dist):
    """gcd of support differences; ``math.inf`` for a point mass."""
    return dist.span


def empirical_distribution(bn):
    """Law of the out-degree of a uniform vertex: ``p_i = n(i)/|n|`` exactly."""
    return DegreeDistribution({d: Fraction(m, bn.size) for d, m in bn.items})
