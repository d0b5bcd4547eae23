"""Deterministic test-data generators: random update streams, grid point
sets, finite metrics, and the almost-orthogonal adversarial point set.

The almost-orthogonal generator draws t = floor(exp(eps^2 * d / 4)) random
sign vectors (entries +-1/sqrt(d)) and rejection-resamples the whole batch
until every pair satisfies |<u_i, u_j>| <= eps.  A Bernstein bound makes
the per-batch success probability positive, so the loop terminates; all
pair checks use exact integer dot products (|sum x_i y_i| <= eps * d),
never floats.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .model import MetricSpace, StreamUpdate


def random_updates(u: int, n: int, seed: int, negatives: bool = True) -> list[StreamUpdate]:
    """n uniform updates; roughly one in eight is a deletion when allowed."""
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        idx = rng.randrange(u)
        delta = -1 if negatives and rng.randrange(8) == 0 else 1
        out.append(StreamUpdate(idx, delta))
    return out


def random_grid_points(m: int, d: int, n: int, seed: int,
                       distinct: bool = False) -> list[tuple[int, ...]]:
    rng = random.Random(seed)
    if distinct and n > m**d:
        raise ValueError("cannot draw that many distinct grid points")
    out: list[tuple[int, ...]] = []
    seen = set()
    while len(out) < n:
        p = tuple(rng.randrange(m) for _ in range(d))
        if distinct:
            if p in seen:
                continue
            seen.add(p)
        out.append(p)
    return out


def random_metric(m: int, seed: int, spread: int = 4) -> MetricSpace:
    """Random integer metric via an L1 embedding of m distinct planar points
    (L1 distances between integer points satisfy the triangle inequality
    exactly, so no repair step is needed)."""
    rng = random.Random(seed)
    side = spread * m
    pts: list[tuple[int, int]] = []
    seen = set()
    while len(pts) < m:
        p = (rng.randrange(side), rng.randrange(side))
        if p in seen:
            continue
        seen.add(p)
        pts.append(p)
    dist = [[abs(a[0] - b[0]) + abs(a[1] - b[1]) for b in pts] for a in pts]
    return MetricSpace(dist, check=False)


@dataclass
class AlmostOrthogonalBatch:
    """t sign vectors (scale 1/sqrt(d) implied) with all pairwise exact
    |<u_i, u_j>| <= eps; `batches` counts how many draws were needed."""

    d: int
    eps: Fraction
    vectors: list[tuple[int, ...]]  # entries +1/-1
    batches: int

    @property
    def t(self) -> int:
        return len(self.vectors)


def _pairwise_ok(masks: list[int], d: int, bound_num: int, bound_den: int) -> bool:
    # <u_i, u_j> * d = d - 2 * popcount(mask_i XOR mask_j); compare
    # |dot_scaled| <= eps * d exactly:  |dot_scaled| * den <= num * d ... the
    # bound arrives pre-multiplied, see caller.
    for i in range(len(masks)):
        mi = masks[i]
        for j in range(i + 1, len(masks)):
            dot = d - 2 * ((mi ^ masks[j]).bit_count())
            if abs(dot) * bound_den > bound_num:
                return False
    return True


def generate_almost_orthogonal(d: int, eps, seed: int,
                               max_batches: int = 10_000) -> AlmostOrthogonalBatch:
    if d < 1:
        raise ValueError("dimension must be >= 1")
    eps = Fraction(str(eps)) if isinstance(eps, float) else Fraction(eps)
    if not 0 < eps <= 1:
        raise ValueError("need 0 < eps <= 1")
    t = int(math.floor(math.exp(float(eps) ** 2 * d / 4)))
    t = max(t, 1)
    rng = random.Random(seed)
    bound = eps * d  # exact rational; |dot| <= bound  <=>  |dot| * den <= num
    for batch in range(1, max_batches + 1):
        masks = [rng.getrandbits(d) for _ in range(t)]
        if _pairwise_ok(masks, d, bound.numerator, bound.denominator):
            vectors = [tuple(1 if (mk >> i) & 1 else -1 for i in range(d)) for mk in masks]
            return AlmostOrthogonalBatch(d=d, eps=eps, vectors=vectors, batches=batch)
    raise RuntimeError(f"no valid batch of {t} vectors after {max_batches} attempts")


def ortho_text(batch: AlmostOrthogonalBatch) -> str:
    lines = [f"ortho d={batch.d} t={batch.t} eps={batch.eps}"]
    lines += [" ".join(f"{x:+d}" for x in vec) for vec in batch.vectors]
    return "\n".join(lines) + "\n"
