"""Geometric streaming interactive proofs: minimum enclosing ball (exact),
width (exact), metric k-center (2-approximation), and k-slab feasibility.

Each protocol follows the same shape: the verifier observes the point
stream once, maintaining evaluation states for one RangeCount over a
derived stream (per-point +1 updates at every containing range) and for a
handful of PointQuery states over the raw point universe; the prover then
sends a claim with a sparse witness, the verifier checks the witness with
exact integer/rational arithmetic, confirms feasibility through RangeCount
(does the claimed region cover all n points?), and confirms witness
membership through PointQuery.

All distances are compared through exact squared integers; ball radii are
stored squared (integer rationals), so no tolerance appears anywhere.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

from .extension import MleEvalState
from .field import PrimeField
from .pq_rc import (
    StreamObserver,
    point_query_prover_steps,
    point_query_verifier_steps,
    range_count_prover_steps,
    range_count_verifier_steps,
)
from .stream.model import GridUniverse, MetricSpace, frequencies, sq_dist
from .stream.ranges import (
    BallRange,
    BallSpace,
    MetricBallUnion,
    MetricUnionSpace,
    RangeSpace,
    SlabRange,
    SlabSpace,
    UnionSpace,
    derive_range_stream,
)
from .transport import CLAIM, ProverSession, Session, run_in_process

log = logging.getLogger(__name__)


class WitnessError(RuntimeError):
    """An honest prover failed to build a witness the covering lemmas
    promise; surfaced rather than silently repaired."""


# ---------------------------------------------------------------------------
# Exact minimum enclosing balls (integer points, d <= 3)
# ---------------------------------------------------------------------------

def _solve_rational(mat: list[list[int]], rhs: list[int]) -> list[Fraction] | None:
    """Gaussian elimination over Fractions; None when singular."""
    n = len(mat)
    a = [[Fraction(x) for x in row] + [Fraction(rhs[i])] for i, row in enumerate(mat)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            return None
        a[col], a[pivot] = a[pivot], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [a[r][n] for r in range(n)]


def circumcenter(points: list[tuple[int, ...]]) -> tuple[Fraction, ...] | None:
    """Center equidistant from all points, inside their affine hull.

    This is the center of the smallest ball having every given point on its
    boundary; None when the points are affinely dependent."""
    if len(points) == 1:
        return tuple(Fraction(x) for x in points[0])
    p0 = points[0]
    diffs = [[q[i] - p0[i] for i in range(len(p0))] for q in points[1:]]
    # 2 (p_i - p0) . (x - p0) = |p_i - p0|^2, with x - p0 in span(diffs)
    j = len(diffs)
    gram = [[2 * sum(diffs[a][t] * diffs[b][t] for t in range(len(p0)))
             for b in range(j)] for a in range(j)]
    rhs = [sum(x * x for x in diffs[a]) for a in range(j)]
    ts = _solve_rational(gram, rhs)
    if ts is None:
        return None
    return tuple(p0[i] + sum(ts[a] * diffs[a][i] for a in range(j))
                 for i in range(len(p0)))


def _sq_dist_frac(c: tuple[Fraction, ...], p: tuple[int, ...]) -> Fraction:
    return sum((ci - pi) ** 2 for ci, pi in zip(c, p))


@dataclass
class ExactBall:
    center: tuple[Fraction, ...]
    r2: Fraction
    boundary: list[tuple[int, ...]]  # input points at exactly r2


def exact_meb(points: list[tuple[int, ...]]) -> ExactBall:
    """Exact MEB by iterating over boundary subsets: the optimal center is
    the circumcenter of some <= d+1 input points, so minimizing the covering
    radius over all such candidates is exact.  Rational arithmetic
    throughout; intended for desk-scale n."""
    pts = sorted(set(map(tuple, points)))
    if not pts:
        raise ValueError("MEB of an empty point set")
    d = len(pts[0])
    best: tuple[Fraction, tuple[Fraction, ...]] | None = None
    for size in range(1, min(len(pts), d + 1) + 1):
        for subset in combinations(pts, size):
            c = circumcenter(list(subset))
            if c is None:
                continue
            r2 = max(_sq_dist_frac(c, p) for p in pts)
            if best is None or r2 < best[0]:
                best = (r2, c)
    r2, c = best
    boundary = [p for p in pts if _sq_dist_frac(c, p) == r2]
    return ExactBall(center=c, r2=r2, boundary=boundary)


def meb_witness(points: list[tuple[int, ...]]) -> tuple[ExactBall, list[tuple[int, ...]]]:
    """The MEB plus a witness subset T with MEB(T) == MEB(points); the
    covering lemma guarantees |T| <= d+2 among boundary points."""
    ball = exact_meb(points)
    d = len(ball.boundary[0])
    boundary = ball.boundary
    if len(boundary) > 12:
        raise WitnessError(f"{len(boundary)} cocircular boundary points; witness "
                           "search is capped at 12")
    for size in range(1, min(len(boundary), d + 2) + 1):
        for subset in combinations(boundary, size):
            sub = exact_meb(list(subset))
            if sub.center == ball.center and sub.r2 == ball.r2:
                return ball, list(subset)
    raise WitnessError("no boundary subset of size <= d+2 spans the MEB")


def round_to_grid(center: tuple[Fraction, ...]) -> tuple[int, ...]:
    """Nearest grid vertex, halves rounding up."""
    return tuple((2 * c + 1).__floor__() // 2 if isinstance(c, Fraction)
                 else c for c in center)


# ---------------------------------------------------------------------------
# Derived-stream observation
# ---------------------------------------------------------------------------

def _chi_prefix(t: int, r: list[int], weights, p: int) -> int:
    """sum over idx in [0, t) of chi_idx(r), indices over len(r) bits."""
    v = len(r)
    if t >= 1 << v:
        return 1
    total = 0
    running = 1
    for k in range(v):
        w0, w1 = weights[k]
        if (t >> (v - 1 - k)) & 1:
            total = (total + running * w0) % p
            running = running * w1 % p
        else:
            running = running * w0 % p
    return total


def fold_ball_derived(state: MleEvalState, space: BallSpace, point) -> None:
    """Fold every (containing ball, +1) update of one point into an MLE
    state in O(m^d * log) time instead of per-update.

    Canonical ball indices are rank * m^d + center; when m^d is a power of
    two the indicator factorizes as chi_rank(r_hi) * chi_center(r_lo), so
    the per-center contribution is a suffix sum over radius ranks computed
    by binary prefix decomposition.  Exactly equal to the per-update fold.
    """
    u = space.grid.u
    b = u.bit_length() - 1
    if 1 << b != u:
        for idx in space.indices_containing(point):
            state.update(idx, 1)
        return
    p = state.field.p
    v_hi = state.v - b
    w_hi = state._weights[:v_hi]
    r_hi = state.r[:v_hi]
    n_radii = len(space.radii2)
    full = _chi_prefix(n_radii, r_hi, w_hi, p)
    # chi over all centers, in center-index order; building low bit first
    # leaves each later (higher) bit in the table's high position
    chis = [1]
    for w0, w1 in reversed(state._weights[v_hi:]):
        chis = [c * w0 % p for c in chis] + [c * w1 % p for c in chis]
    acc = 0
    rank_of = space._rank
    prefix_cache: dict[int, int] = {}
    for cidx, c in enumerate(space.grid.points()):
        lo = rank_of[sq_dist(c, point)]
        pre = prefix_cache.get(lo)
        if pre is None:
            pre = _chi_prefix(lo, r_hi, w_hi, p)
            prefix_cache[lo] = pre
        acc = (acc + (full - pre) * chis[cidx]) % p
    state.acc = (state.acc + acc) % p


class GeometryObserver:
    """One streaming pass: a derived-stream state for RangeCount plus
    parallel point-universe states for the witness PointQueries."""

    def __init__(self, field: PrimeField, rs: RangeSpace, point_universe: int,
                 n_queries: int, rng: random.Random):
        self.rs = rs
        self.rc = StreamObserver(field, rs.size, 1, rng)
        self.pq = StreamObserver(field, point_universe, n_queries, rng)
        self.n_points = 0

    def observe_point(self, point, point_index: int) -> None:
        self.n_points += 1
        self.pq.update(point_index, 1)
        state = self.rc.states[0]
        if isinstance(self.rs, BallSpace):
            fold_ball_derived(state, self.rs, point)
        else:
            for idx in self.rs.indices_containing(point):
                state.update(idx, 1)

    def state_size_elements(self) -> int:
        return self.rc.state_size_elements() + self.pq.state_size_elements()


@lru_cache(maxsize=8)
def ball_space(m: int, d: int) -> BallSpace:
    return BallSpace(m, d)


@lru_cache(maxsize=8)
def slab_space(m: int, d: int) -> SlabSpace:
    return SlabSpace(m, d)


# ---------------------------------------------------------------------------
# Claims and their wire form
# ---------------------------------------------------------------------------

def _fmt_pt(p) -> str:
    return ",".join(str(x) for x in p)


def _fmt_pts(pts) -> str:
    return ";".join(_fmt_pt(p) for p in pts) if pts else "-"


def _parse_pt(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(","))


def _parse_pts(text: str) -> list[tuple[int, ...]]:
    return [] if text == "-" else [_parse_pt(t) for t in text.split(";")]


@dataclass
class MebClaim:
    c_star: tuple[int, ...]       # rounded center
    r2: Fraction                  # exact squared radius of the claimed MEB
    witness: list[tuple[int, ...]]

    def to_text(self) -> str:
        return (f"meb c={_fmt_pt(self.c_star)} r2={self.r2.numerator}/"
                f"{self.r2.denominator} T={_fmt_pts(self.witness)}")

    @classmethod
    def from_text(cls, text: str) -> MebClaim:
        fields = dict(tok.split("=", 1) for tok in text.split()[1:])
        num, den = fields["r2"].split("/")
        return cls(c_star=_parse_pt(fields["c"]),
                   r2=Fraction(int(num), int(den)),
                   witness=_parse_pts(fields["T"]))


@dataclass
class WidthClaim:
    normal: tuple[int, ...]
    o1: int
    o2: int
    on_h1: list[tuple[int, ...]]
    on_h2: list[tuple[int, ...]]

    def slab(self) -> SlabRange:
        return SlabRange(self.normal, self.o1, self.o2)

    def width2(self) -> Fraction:
        return self.slab().width2()

    def to_text(self) -> str:
        return (f"width w={_fmt_pt(self.normal)} o1={self.o1} o2={self.o2} "
                f"T1={_fmt_pts(self.on_h1)} T2={_fmt_pts(self.on_h2)}")

    @classmethod
    def from_text(cls, text: str) -> WidthClaim:
        fields = dict(tok.split("=", 1) for tok in text.split()[1:])
        return cls(normal=_parse_pt(fields["w"]), o1=int(fields["o1"]),
                   o2=int(fields["o2"]), on_h1=_parse_pts(fields["T1"]),
                   on_h2=_parse_pts(fields["T2"]))


@dataclass
class KCenterClaim:
    centers: tuple[int, ...]   # k distinct ids in the metric space
    r_star: int                # claimed 2-approximate cost
    witness: tuple[int, ...]   # stream points pairwise >= r_star apart

    def to_text(self) -> str:
        return (f"kcenter r={self.r_star} C={_fmt_pt(self.centers)} "
                f"W={_fmt_pt(self.witness)}")

    @classmethod
    def from_text(cls, text: str) -> KCenterClaim:
        fields = dict(tok.split("=", 1) for tok in text.split()[1:])
        return cls(centers=_parse_pt(fields["C"]), r_star=int(fields["r"]),
                   witness=_parse_pt(fields["W"]))


@dataclass
class KSlabClaim:
    slabs: tuple[SlabRange, ...]

    def to_text(self) -> str:
        body = "|".join(f"{_fmt_pt(s.normal)}:{s.o1}:{s.o2}" for s in self.slabs)
        return f"kslab S={body}"

    @classmethod
    def from_text(cls, text: str) -> KSlabClaim:
        fields = dict(tok.split("=", 1) for tok in text.split()[1:])
        slabs = []
        for part in fields["S"].split("|"):
            w, o1, o2 = part.split(":")
            slabs.append(SlabRange(_parse_pt(w), int(o1), int(o2)))
        return cls(slabs=tuple(slabs))


@dataclass
class GeometryResult:
    accepted: bool
    reason: str | None
    claim: object | None


# ---------------------------------------------------------------------------
# Minimum enclosing ball
# ---------------------------------------------------------------------------

def meb_prove(points: list[tuple[int, ...]]) -> MebClaim:
    ball, witness = meb_witness(points)
    return MebClaim(c_star=round_to_grid(ball.center), r2=ball.r2, witness=witness)


def feasibility_ball(space: BallSpace, c_star: tuple[int, ...], r2: Fraction) -> BallRange:
    """Ball of the protocol's feasibility step: center c_star, squared radius
    the smallest representable value >= (r + 1)^2, capped at the maximal
    radius.  g >= (r+1)^2 = r^2 + 2r + 1 iff g >= r^2 + 1 and
    (g - r^2 - 1)^2 >= 4 r^2, checked in exact rationals."""
    def ok(g: int) -> bool:
        slack = g - r2 - 1
        return slack >= 0 and slack * slack >= 4 * r2

    radii = space.radii2
    lo, hi = 0, len(radii) - 1
    if not ok(radii[hi]):
        return BallRange(tuple(c_star), radii[hi])
    while lo < hi:
        mid = (lo + hi) // 2
        if ok(radii[mid]):
            hi = mid
        else:
            lo = mid + 1
    return BallRange(tuple(c_star), radii[lo])


def _meb_structural(claim: MebClaim, d: int, m: int) -> str | None:
    if not claim.witness:
        return "empty witness"
    if len(claim.witness) > d + 2:
        return "witness too large"
    if len(set(claim.witness)) != len(claim.witness):
        return "duplicate witness points"
    for p in claim.witness:
        if len(p) != d or not all(0 <= x < m for x in p):
            return "witness point outside grid"
    if len(claim.c_star) != d or not all(0 <= x < m for x in claim.c_star):
        return "center outside grid"
    ball = exact_meb(claim.witness)
    if round_to_grid(ball.center) != tuple(claim.c_star):
        return "center inconsistent with witness"
    if ball.r2 != claim.r2:
        return "radius inconsistent with witness"
    return None


def meb_verifier_steps(session: Session, observer: GeometryObserver,
                       grid: GridUniverse, field: PrimeField) -> GeometryResult:
    space: BallSpace = observer.rs
    session.meter.report.stream_passes = 1
    session.observe_state(observer.state_size_elements())
    claim = MebClaim.from_text(session.recv(CLAIM).payload.decode())
    why = _meb_structural(claim, grid.d, grid.m)
    if why is not None:
        return GeometryResult(accepted=False, reason=why, claim=claim)
    ball = feasibility_ball(space, claim.c_star, claim.r2)
    rc = range_count_verifier_steps(session, observer.rc.states[0],
                                    space.index_of(ball), observer.n_points,
                                    field, extra_state=observer.pq.state_size_elements())
    if not rc.verified:
        return GeometryResult(accepted=False, reason=f"feasibility: {rc.reason}",
                              claim=claim)
    for t, pt in enumerate(claim.witness):
        res = point_query_verifier_steps(session, observer.pq.states[t],
                                         grid.encode(pt), field)
        if not res.accepted or res.value % field.p == 0 or res.value > field.p // 2:
            return GeometryResult(accepted=False,
                                  reason=f"witness point {pt} not in stream", claim=claim)
    return GeometryResult(accepted=True, reason=None, claim=claim)


def meb_prover_steps(psession: ProverSession, points: list[tuple[int, ...]],
                     grid: GridUniverse, space: BallSpace, field: PrimeField,
                     claim: MebClaim) -> None:
    psession.send(CLAIM, claim.to_text().encode())
    derived = frequencies(derive_range_stream(points, space), space.size)
    point_freq = frequencies(((grid.encode(p), 1) for p in points), grid.u)
    ball = feasibility_ball(space, claim.c_star, claim.r2)
    range_count_prover_steps(psession, derived.vector, space.index_of(ball), field)
    for pt in claim.witness:
        point_query_prover_steps(psession, point_freq.vector, grid.encode(pt), field)


def run_meb(points: list[tuple[int, ...]], m: int, seed: int,
            field: PrimeField | None = None, claim: MebClaim | None = None,
            recorder=None) -> tuple[GeometryResult, Session]:
    """In-process MEB verification; a tampered `claim` may be injected while
    the prover still answers sub-queries honestly."""
    field = field or PrimeField()
    d = len(points[0])
    grid = GridUniverse(m, d)
    space = ball_space(m, d)
    if claim is None:
        claim = meb_prove(points)

    def prover_fn(psession: ProverSession) -> None:
        meb_prover_steps(psession, points, grid, space, field, claim)

    def verifier_fn(session: Session) -> GeometryResult:
        rng = random.Random(seed)
        observer = GeometryObserver(field, space, grid.u, d + 2, rng)
        for p in points:
            observer.observe_point(p, grid.encode(p))
        return meb_verifier_steps(session, observer, grid, field)

    return run_in_process(verifier_fn, prover_fn, recorder=recorder)


# ---------------------------------------------------------------------------
# Width
# ---------------------------------------------------------------------------

def width_prove(points: list[tuple[int, ...]], space: SlabSpace) -> WidthClaim:
    """Minimal-width covering slab from the canonical enumeration plus a
    (d+1)-point incidence witness; degenerate (width-0) inputs get however
    many distinct points exist, up to d+1."""
    pts = list(map(tuple, points))
    d = space.d
    best = None
    for w in space.normals:
        vals = [sum(a * x for a, x in zip(w, p)) for p in pts]
        o1, o2 = min(vals), max(vals)
        gap = o2 - o1
        key = (Fraction(gap * gap, sum(c * c for c in w)), w, o1)
        if best is None or key < best[0]:
            best = (key, w, o1, o2, vals)
    _, w, o1, o2, vals = best
    t1_all = sorted({p for p, val in zip(pts, vals) if val == o1})
    t2_all = sorted({p for p, val in zip(pts, vals) if val == o2})
    if o1 == o2:
        distinct = sorted(set(pts))[:d + 1]
        rank = _affine_rank(distinct)
        log.info("degenerate width-0 input: witness relaxed to %d points "
                 "(affine rank %d)", len(distinct), rank)
        return WidthClaim(normal=w, o1=o1, o2=o2,
                          on_h1=distinct[:1], on_h2=distinct[1:])
    t2_all = [p for p in t2_all if p not in t1_all]
    for k in range(min(len(t1_all), d), 0, -1):
        kp = d + 1 - k
        if 1 <= kp <= len(t2_all):
            return WidthClaim(normal=w, o1=o1, o2=o2,
                              on_h1=t1_all[:k], on_h2=t2_all[:kp])
    raise WitnessError(
        f"optimal slab touches only {len(t1_all)}+{len(t2_all)} points; "
        "input violates the general-position assumption")


def _affine_rank(pts: list[tuple[int, ...]]) -> int:
    if len(pts) <= 1:
        return 0
    base = pts[0]
    rows = [[Fraction(p[i] - base[i]) for i in range(len(base))] for p in pts[1:]]
    rank = 0
    for col in range(len(base)):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        inv = 1 / rows[rank][col]
        rows[rank] = [x * inv for x in rows[rank]]
        for r in range(len(rows)):
            if r != rank and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[rank])]
        rank += 1
    return rank


def _width_structural(claim: WidthClaim, space: SlabSpace) -> str | None:
    d = space.d
    slab = claim.slab()
    try:
        space.index_of(slab)
    except KeyError:
        return "slab not in range space"
    witness = claim.on_h1 + claim.on_h2
    if not claim.on_h1:
        return "no points claimed on h1"
    if len(set(witness)) != len(witness):
        return "duplicate witness points"
    for p in witness:
        if len(p) != d or not all(0 <= x < space.m for x in p):
            return "witness point outside grid"
    for p in claim.on_h1:
        if sum(a * x for a, x in zip(claim.normal, p)) != claim.o1:
            return f"point {p} not on h1"
    for p in claim.on_h2:
        if sum(a * x for a, x in zip(claim.normal, p)) != claim.o2:
            return f"point {p} not on h2"
    if claim.o1 != claim.o2:
        if len(witness) != d + 1 or not claim.on_h2:
            return "witness must split d+1 points across both hyperplanes"
    else:
        if len(witness) > d + 1:
            return "degenerate witness too large"
        log.info("width-0 claim: k+k' = %d relaxed below d+1", len(witness))
    return None


def width_verifier_steps(session: Session, observer: GeometryObserver,
                         grid: GridUniverse, field: PrimeField) -> GeometryResult:
    space: SlabSpace = observer.rs
    session.meter.report.stream_passes = 1
    session.observe_state(observer.state_size_elements())
    claim = WidthClaim.from_text(session.recv(CLAIM).payload.decode())
    why = _width_structural(claim, space)
    if why is not None:
        return GeometryResult(accepted=False, reason=why, claim=claim)
    for t, pt in enumerate(claim.on_h1 + claim.on_h2):
        res = point_query_verifier_steps(session, observer.pq.states[t],
                                         grid.encode(pt), field)
        if not res.accepted or res.value % field.p == 0 or res.value > field.p // 2:
            return GeometryResult(accepted=False,
                                  reason=f"witness point {pt} not in stream", claim=claim)
    rc = range_count_verifier_steps(session, observer.rc.states[0],
                                    space.index_of(claim.slab()), observer.n_points,
                                    field, extra_state=observer.pq.state_size_elements())
    if not rc.verified:
        return GeometryResult(accepted=False, reason=f"coverage: {rc.reason}",
                              claim=claim)
    return GeometryResult(accepted=True, reason=None, claim=claim)


def width_prover_steps(psession: ProverSession, points, grid: GridUniverse,
                       space: SlabSpace, field: PrimeField, claim: WidthClaim) -> None:
    psession.send(CLAIM, claim.to_text().encode())
    point_freq = frequencies(((grid.encode(p), 1) for p in points), grid.u)
    for pt in claim.on_h1 + claim.on_h2:
        point_query_prover_steps(psession, point_freq.vector, grid.encode(pt), field)
    derived = frequencies(derive_range_stream(points, space), space.size)
    range_count_prover_steps(psession, derived.vector,
                             space.index_of(claim.slab()), field)


def run_width(points: list[tuple[int, ...]], m: int, seed: int,
              field: PrimeField | None = None, claim: WidthClaim | None = None,
              recorder=None) -> tuple[GeometryResult, Session]:
    field = field or PrimeField()
    d = len(points[0])
    grid = GridUniverse(m, d)
    space = slab_space(m, d)
    if claim is None:
        claim = width_prove(points, space)

    def prover_fn(psession: ProverSession) -> None:
        width_prover_steps(psession, points, grid, space, field, claim)

    def verifier_fn(session: Session) -> GeometryResult:
        rng = random.Random(seed)
        observer = GeometryObserver(field, space, grid.u, d + 1, rng)
        for p in points:
            observer.observe_point(p, grid.encode(p))
        return width_verifier_steps(session, observer, grid, field)

    return run_in_process(verifier_fn, prover_fn, recorder=recorder)


# ---------------------------------------------------------------------------
# Metric k-center, 2-approximation
# ---------------------------------------------------------------------------

def gonzalez(metric: MetricSpace, points: list[int], k: int) -> KCenterClaim:
    """Farthest-first traversal with lowest-index tie-breaking; the witness
    is the k centers plus the farthest remaining point, pairwise >= r*."""
    distinct = sorted(set(points))
    if len(distinct) <= k:
        centers = list(distinct)
        pad = (x for x in range(metric.m) if x not in set(centers))
        while len(centers) < k:
            centers.append(next(pad))
        return KCenterClaim(centers=tuple(sorted(centers)), r_star=0,
                            witness=tuple(distinct))
    dist = metric.dist
    centers = [distinct[0]]
    best = {p: dist[p][centers[0]] for p in distinct}
    while len(centers) < k:
        far = max(((d, -p) for p, d in best.items()))
        nxt = -far[1]
        centers.append(nxt)
        for p in distinct:
            dp = dist[p][nxt]
            if dp < best[p]:
                best[p] = dp
    far = max(((d, -p) for p, d in best.items()))
    r_star, last = far[0], -far[1]
    witness = tuple(centers + [last])
    assert min(dist[a][b] for a, b in combinations(witness, 2)) >= r_star
    return KCenterClaim(centers=tuple(sorted(centers)), r_star=r_star, witness=witness)


def _kcenter_structural(claim: KCenterClaim, metric: MetricSpace, k: int) -> str | None:
    if len(set(claim.centers)) != k:
        return f"need {k} distinct centers"
    if any(not 0 <= c < metric.m for c in claim.centers + claim.witness):
        return "id outside metric space"
    if claim.r_star < 0:
        return "negative radius"
    if claim.r_star > 0 and len(set(claim.witness)) != k + 1:
        return "witness must hold k+1 distinct points"
    for a, b in combinations(set(claim.witness), 2):
        if metric.dist[a][b] < claim.r_star:
            return f"witness pair ({a},{b}) closer than r*"
    return None


def kcenter_verifier_steps(session: Session, observer: GeometryObserver,
                           metric: MetricSpace, k: int,
                           field: PrimeField) -> GeometryResult:
    space: MetricUnionSpace = observer.rs
    session.meter.report.stream_passes = 1
    session.observe_state(observer.state_size_elements())
    claim = KCenterClaim.from_text(session.recv(CLAIM).payload.decode())
    why = _kcenter_structural(claim, metric, k)
    if why is not None:
        return GeometryResult(accepted=False, reason=why, claim=claim)
    union = MetricBallUnion(claim.centers, claim.r_star)
    try:
        sigma = space.index_of(union)
    except KeyError:
        return GeometryResult(accepted=False, reason="no such range", claim=claim)
    rc = range_count_verifier_steps(session, observer.rc.states[0], sigma,
                                    observer.n_points, field,
                                    extra_state=observer.pq.state_size_elements())
    if not rc.verified:
        return GeometryResult(accepted=False, reason=f"coverage: {rc.reason}",
                              claim=claim)
    for t, pt in enumerate(claim.witness):
        res = point_query_verifier_steps(session, observer.pq.states[t], pt, field)
        if not res.accepted or res.value % field.p == 0 or res.value > field.p // 2:
            return GeometryResult(accepted=False,
                                  reason=f"witness point {pt} not in stream", claim=claim)
    return GeometryResult(accepted=True, reason=None, claim=claim)


def kcenter_prover_steps(psession: ProverSession, points: list[int],
                         space: MetricUnionSpace, field: PrimeField,
                         claim: KCenterClaim) -> None:
    psession.send(CLAIM, claim.to_text().encode())
    union = MetricBallUnion(claim.centers, claim.r_star)
    try:
        sigma = space.index_of(union)
    except KeyError:
        return  # verifier rejects structurally; nothing to answer
    derived = frequencies(derive_range_stream(points, space), space.size)
    range_count_prover_steps(psession, derived.vector, sigma, field)
    point_freq = frequencies(((p, 1) for p in points), space.metric.m)
    for pt in claim.witness:
        point_query_prover_steps(psession, point_freq.vector, pt, field)


def run_kcenter(metric: MetricSpace, points: list[int], k: int, seed: int,
                field: PrimeField | None = None, claim: KCenterClaim | None = None,
                recorder=None) -> tuple[GeometryResult, Session]:
    field = field or PrimeField()
    space = MetricUnionSpace(metric, k)
    if claim is None:
        claim = gonzalez(metric, points, k)

    def prover_fn(psession: ProverSession) -> None:
        kcenter_prover_steps(psession, points, space, field, claim)

    def verifier_fn(session: Session) -> GeometryResult:
        rng = random.Random(seed)
        observer = GeometryObserver(field, space, metric.m, k + 1, rng)
        for p in points:
            observer.observe_point(p, p)
        return kcenter_verifier_steps(session, observer, metric, k, field)

    return run_in_process(verifier_fn, prover_fn, recorder=recorder)


# ---------------------------------------------------------------------------
# k-slab feasibility (optimality is out of contract)
# ---------------------------------------------------------------------------

def kslab_space(m: int, d: int, k: int) -> RangeSpace:
    base = slab_space(m, d)
    return base if k == 1 else UnionSpace(base, k)


def kslab_prove(points, space: RangeSpace) -> KSlabClaim:
    """First feasible range in canonical order, i.e. the minimum-cost
    feasible k-slab; exhaustive, which is fine at desk scale."""
    pts = list(map(tuple, points))
    for rng in space.ranges():
        if all(space.contains(rng, p) for p in pts):
            slabs = (rng,) if isinstance(rng, SlabRange) else tuple(rng)
            return KSlabClaim(slabs=slabs)
    raise WitnessError("no covering k-slab exists in the range space")


def kslab_verifier_steps(session: Session, observer: GeometryObserver,
                         k: int, field: PrimeField) -> GeometryResult:
    space = observer.rs
    session.meter.report.stream_passes = 1
    session.observe_state(observer.state_size_elements())
    claim = KSlabClaim.from_text(session.recv(CLAIM).payload.decode())
    if len(claim.slabs) != k:
        return GeometryResult(accepted=False, reason=f"need exactly {k} slabs",
                              claim=claim)
    target = claim.slabs[0] if k == 1 else tuple(claim.slabs)
    try:
        sigma = space.index_of(target)
    except KeyError:
        return GeometryResult(accepted=False, reason="slab not in range space",
                              claim=claim)
    rc = range_count_verifier_steps(session, observer.rc.states[0], sigma,
                                    observer.n_points, field)
    if not rc.verified:
        return GeometryResult(accepted=False, reason=f"coverage: {rc.reason}",
                              claim=claim)
    return GeometryResult(accepted=True, reason=None, claim=claim)


def kslab_prover_steps(psession: ProverSession, points, space: RangeSpace,
                       field: PrimeField, claim: KSlabClaim) -> None:
    psession.send(CLAIM, claim.to_text().encode())
    target = claim.slabs[0] if len(claim.slabs) == 1 else tuple(claim.slabs)
    try:
        sigma = space.index_of(target)
    except KeyError:
        return
    derived = frequencies(derive_range_stream(points, space), space.size)
    range_count_prover_steps(psession, derived.vector, sigma, field)


def run_kslab(points: list[tuple[int, ...]], m: int, k: int, seed: int,
              field: PrimeField | None = None, claim: KSlabClaim | None = None,
              recorder=None) -> tuple[GeometryResult, Session]:
    field = field or PrimeField()
    d = len(points[0])
    grid = GridUniverse(m, d)
    space = kslab_space(m, d, k)
    if claim is None:
        claim = kslab_prove(points, space)

    def prover_fn(psession: ProverSession) -> None:
        kslab_prover_steps(psession, points, space, field, claim)

    def verifier_fn(session: Session) -> GeometryResult:
        rng = random.Random(seed)
        observer = GeometryObserver(field, space, grid.u, 1, rng)
        for p in points:
            observer.observe_point(p, grid.encode(p))
        return kslab_verifier_steps(session, observer, k, field)

    return run_in_process(verifier_fn, prover_fn, recorder=recorder)
