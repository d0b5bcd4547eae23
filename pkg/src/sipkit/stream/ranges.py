"""Geometric range spaces with canonical cost-sorted enumeration.

Every space enumerates its ranges as a bijection [0, |R|) <-> ranges,
sorted non-decreasing by cost (squared radius for balls, squared width for
slabs, radius for metric ball unions), ties broken by lexicographic
parameter order.  Costs are exact: integers where possible, Fractions for
slab widths, so ordering is deterministic and float-free.

The derived stream of a point stream inserts, for each input point, one +1
update at the index of every range containing it; the frequency of a range
in the derived stream is then exactly the number of input points it covers.
"""

from __future__ import annotations

from bisect import bisect_left
from fractions import Fraction
from itertools import combinations, combinations_with_replacement
from math import gcd
from typing import Iterable, Iterator, Sequence

from .model import GridUniverse, MetricSpace, StreamUpdate, sq_dist

# Composite spaces (k-fold unions) are fully materialized; refuse absurd sizes.
_COMPOSITE_LIMIT = 2_000_000


class BallRange(tuple):
    """((c_1, ..., c_d), r2): points at squared distance <= r2 from the center."""

    __slots__ = ()

    def __new__(cls, center: tuple[int, ...], r2: int):
        return super().__new__(cls, (tuple(center), r2))

    center = property(lambda self: self[0])
    r2 = property(lambda self: self[1])


class SlabRange(tuple):
    """(normal, o1, o2): points x with o1 <= <normal, x> <= o2.

    The normal is a gcd-reduced integer vector whose first nonzero
    coordinate is positive; squared width is (o2-o1)^2 / |normal|^2.
    """

    __slots__ = ()

    def __new__(cls, normal: tuple[int, ...], o1: int, o2: int):
        if o1 > o2:
            raise ValueError("slab offsets out of order")
        return super().__new__(cls, (tuple(normal), o1, o2))

    normal = property(lambda self: self[0])
    o1 = property(lambda self: self[1])
    o2 = property(lambda self: self[2])

    def width2(self) -> Fraction:
        gap = self[2] - self[1]
        return Fraction(gap * gap, sum(w * w for w in self[0]))


class MetricBallUnion(tuple):
    """((c_1, ..., c_k), r): union of k same-radius balls in a finite metric."""

    __slots__ = ()

    def __new__(cls, centers: tuple[int, ...], r: int):
        return super().__new__(cls, (tuple(sorted(centers)), r))

    centers = property(lambda self: self[0])
    r = property(lambda self: self[1])


def primitive_normals(m: int, d: int) -> list[tuple[int, ...]]:
    """Slab normals on [m]^d: gcd-reduced integer vectors with entries in
    [-(m-1), m-1], first nonzero coordinate positive.  These are exactly the
    directions orthogonal to hyperplanes spanned by grid points.
    """
    if d == 1:
        return [(1,)]
    span = m - 1
    out = []

    def rec(prefix: list[int], started: bool):
        if len(prefix) == d:
            vec = tuple(prefix)
            if started and gcd(*[abs(c) for c in vec]) == 1:
                out.append(vec)
            return
        lo = 0 if not started else -span
        for c in range(lo, span + 1):
            rec(prefix + [c], started or c > 0)

    rec([], False)
    return sorted(out)


class RangeSpace:
    """Base class: a finite family of ranges with canonical enumeration."""

    kind = "abstract"

    @property
    def size(self) -> int:
        raise NotImplementedError

    def ranges(self) -> Iterator:
        """Yield ranges in canonical (cost-sorted) order."""
        raise NotImplementedError

    def cost(self, rng) -> object:
        raise NotImplementedError

    def contains(self, rng, point) -> bool:
        raise NotImplementedError

    def range_at(self, index: int):
        raise NotImplementedError

    def index_of(self, rng) -> int:
        raise NotImplementedError

    def indices_containing(self, point) -> Iterator[int]:
        """Indices of all ranges containing the point (any order)."""
        for i, rng in enumerate(self.ranges()):
            if self.contains(rng, point):
                yield i


class BallSpace(RangeSpace):
    """All balls with grid centers and grid-representable squared radii.

    Index layout: index = rank(r2) * m^d + encode(center); since encode is
    lexicographic this is exactly (cost, parameters-lex) order.
    """

    kind = "balls"

    def __init__(self, m: int, d: int):
        self.grid = GridUniverse(m, d)
        self.m, self.d = m, d
        span = m - 1
        vals = {0}
        deltas = [()]
        for _ in range(d):
            deltas = [t + (x,) for t in deltas for x in range(span + 1)]
        for t in deltas:
            vals.add(sum(x * x for x in t))
        self.radii2 = sorted(vals)
        self._rank = {r2: i for i, r2 in enumerate(self.radii2)}

    @property
    def size(self) -> int:
        return len(self.radii2) * self.grid.u

    def ranges(self) -> Iterator[BallRange]:
        for r2 in self.radii2:
            for c in self.grid.points():
                yield BallRange(c, r2)

    def cost(self, rng: BallRange) -> int:
        return rng.r2

    def contains(self, rng: BallRange, point: Sequence[int]) -> bool:
        return sq_dist(rng.center, point) <= rng.r2

    def range_at(self, index: int) -> BallRange:
        rank, cidx = divmod(index, self.grid.u)
        return BallRange(self.grid.decode(cidx), self.radii2[rank])

    def index_of(self, rng: BallRange) -> int:
        return self._rank[rng.r2] * self.grid.u + self.grid.encode(rng.center)

    def covering_ball(self, center: Sequence[int], min_r2) -> BallRange:
        """Smallest representable ball at `center` with squared radius >= min_r2,
        capped at the maximal radius (which covers the whole grid)."""
        i = bisect_left(self.radii2, min_r2)
        r2 = self.radii2[min(i, len(self.radii2) - 1)]
        return BallRange(tuple(center), r2)

    def indices_containing(self, point: Sequence[int]) -> Iterator[int]:
        u = self.grid.u
        n_radii = len(self.radii2)
        for cidx, c in enumerate(self.grid.points()):
            lo = self._rank[sq_dist(c, point)]
            for rank in range(lo, n_radii):
                yield rank * u + cidx


class SlabSpace(RangeSpace):
    """Single slabs on [m]^d whose two hyperplanes each pass through a grid
    point, in every grid-determined direction.  |R| = O(m^(d^2+d)).
    """

    kind = "slabs"

    def __init__(self, m: int, d: int):
        self.grid = GridUniverse(m, d)
        self.m, self.d = m, d
        self.normals = primitive_normals(m, d)
        self._offsets: dict[tuple[int, ...], list[int]] = {}
        for w in self.normals:
            vals = set()
            for pt in self.grid.points():
                vals.add(sum(a * x for a, x in zip(w, pt)))
            self._offsets[w] = sorted(vals)
        entries = []
        for w in self.normals:
            n2 = sum(c * c for c in w)
            offs = self._offsets[w]
            for i, o1 in enumerate(offs):
                for o2 in offs[i:]:
                    gap = o2 - o1
                    entries.append((Fraction(gap * gap, n2), w, o1, o2))
        entries.sort()
        self._ranges = [SlabRange(w, o1, o2) for _, w, o1, o2 in entries]
        self._index = {r: i for i, r in enumerate(self._ranges)}

    @property
    def size(self) -> int:
        return len(self._ranges)

    def ranges(self) -> Iterator[SlabRange]:
        return iter(self._ranges)

    def offsets(self, normal: tuple[int, ...]) -> list[int]:
        return self._offsets[normal]

    def cost(self, rng: SlabRange) -> Fraction:
        return rng.width2()

    def contains(self, rng: SlabRange, point: Sequence[int]) -> bool:
        o = sum(a * x for a, x in zip(rng.normal, point))
        return rng.o1 <= o <= rng.o2

    def range_at(self, index: int) -> SlabRange:
        return self._ranges[index]

    def index_of(self, rng: SlabRange) -> int:
        return self._index[rng]

    def indices_containing(self, point: Sequence[int]) -> Iterator[int]:
        index = self._index
        for w in self.normals:
            o = sum(a * x for a, x in zip(w, point))
            offs = self._offsets[w]
            hi_start = bisect_left(offs, o)
            lo_end = hi_start + (1 if hi_start < len(offs) and offs[hi_start] == o else 0)
            uppers = offs[hi_start:]
            for o1 in offs[:lo_end]:
                for o2 in uppers:
                    yield index[SlabRange(w, o1, o2)]


class UnionSpace(RangeSpace):
    """k-fold unions of an atomic space's ranges (k-slabs, k-ball unions).

    Ranges are multisets of k atoms; a point is covered when any member
    covers it; cost is the maximum member cost.  Materialized, so only
    desk-scale parameter choices are accepted.
    """

    def __init__(self, atoms: RangeSpace, k: int):
        if k < 1:
            raise ValueError("k must be >= 1")
        self.atoms = atoms
        self.k = k
        self.kind = "k-slab-unions" if atoms.kind == "slabs" else "k-ball-unions"
        n = atoms.size
        total = 1
        for i in range(k):
            total = total * (n + i) // (i + 1)
        if total > _COMPOSITE_LIMIT:
            raise ValueError(f"union space with {total} ranges exceeds desk scale")
        atom_list = list(atoms.ranges())
        costs = [atoms.cost(a) for a in atom_list]
        keyed = []
        for combo in combinations_with_replacement(range(n), k):
            keyed.append((costs[combo[-1]], combo))
        keyed.sort()
        self._ranges = [tuple(atom_list[i] for i in combo) for _, combo in keyed]
        self._index = {r: i for i, r in enumerate(self._ranges)}

    @property
    def size(self) -> int:
        return len(self._ranges)

    def ranges(self) -> Iterator[tuple]:
        return iter(self._ranges)

    def cost(self, rng: tuple):
        return max(self.atoms.cost(a) for a in rng)

    def contains(self, rng: tuple, point) -> bool:
        return any(self.atoms.contains(a, point) for a in rng)

    def range_at(self, index: int) -> tuple:
        return self._ranges[index]

    def index_of(self, rng: tuple) -> int:
        key = tuple(sorted(rng, key=self.atoms.index_of))
        return self._index[key]

    def indices_containing(self, point) -> Iterator[int]:
        contains = self.atoms.contains
        for i, rng in enumerate(self._ranges):
            if any(contains(a, point) for a in rng):
                yield i


class MetricUnionSpace(RangeSpace):
    """Unions of k same-radius balls in a finite metric space; the radius
    ranges over realized distance values.  |R| <= m^(k+2).
    """

    kind = "metric-k-ball-unions"

    def __init__(self, metric: MetricSpace, k: int):
        if not 1 <= k <= metric.m:
            raise ValueError("need 1 <= k <= m")
        self.metric = metric
        self.k = k
        self.radii = metric.distance_values()
        self._radius_rank = {r: i for i, r in enumerate(self.radii)}
        self._combos = list(combinations(range(metric.m), k))
        self._combo_rank = {c: i for i, c in enumerate(self._combos)}

    @property
    def size(self) -> int:
        return len(self.radii) * len(self._combos)

    def ranges(self) -> Iterator[MetricBallUnion]:
        for r in self.radii:
            for centers in self._combos:
                yield MetricBallUnion(centers, r)

    def cost(self, rng: MetricBallUnion) -> int:
        return rng.r

    def contains(self, rng: MetricBallUnion, point: int) -> bool:
        d = self.metric.dist[point]
        return any(d[c] <= rng.r for c in rng.centers)

    def range_at(self, index: int) -> MetricBallUnion:
        rank, cidx = divmod(index, len(self._combos))
        return MetricBallUnion(self._combos[cidx], self.radii[rank])

    def index_of(self, rng: MetricBallUnion) -> int:
        return self._radius_rank[rng.r] * len(self._combos) + self._combo_rank[rng.centers]

    def indices_containing(self, point: int) -> Iterator[int]:
        ncombos = len(self._combos)
        nradii = len(self.radii)
        dp = self.metric.dist[point]
        for cidx, centers in enumerate(self._combos):
            lo = self._radius_rank[min(dp[c] for c in centers)]
            for rank in range(lo, nradii):
                yield rank * ncombos + cidx


def cost_to_index(rs: RangeSpace, w) -> int:
    """Smallest index i with cost(range_i) == w, else -1.

    Walks the canonical enumeration one range at a time; since the order is
    cost-sorted the walk stops at the first cost exceeding w.
    """
    for i, rng in enumerate(rs.ranges()):
        c = rs.cost(rng)
        if c == w:
            return i
        if c > w:
            return -1
    return -1


def derive_range_stream(points: Iterable, rs: RangeSpace) -> Iterator[StreamUpdate]:
    """Derived stream over [0, |R|): one +1 update per (point, containing range)."""
    for p in points:
        for idx in rs.indices_containing(p):
            yield StreamUpdate(idx, 1)


def derive_range_stream_naive(points: Iterable, rs: RangeSpace) -> Iterator[StreamUpdate]:
    """Membership-scan reference for testing the fast per-kind paths."""
    pts = list(points)
    for p in pts:
        for i, rng in enumerate(rs.ranges()):
            if rs.contains(rng, p):
                yield StreamUpdate(i, 1)
