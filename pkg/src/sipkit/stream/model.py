"""Data-stream model: universe updates, grid and metric universes, file
ingestion, and exact frequency aggregation.

A stream is a sequence of (index, delta) updates over a universe of size u;
the frequency vector a has a_i = sum of deltas for index i.  Geometric
streams insert grid points (one +1 per line); metric streams insert point
ids of a finite metric space given by an explicit distance matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Sequence


class StreamUpdate(NamedTuple):
    index: int
    delta: int


class StreamFormatError(ValueError):
    """Malformed stream file; message carries the offending line number."""


class GridUniverse:
    """The discretized universe [m]^d with an exact point<->index bijection.

    encode((x_1, ..., x_d)) = x_1 * m^(d-1) + ... + x_d, so index order
    equals lexicographic point order.
    """

    __slots__ = ("m", "d", "u")

    def __init__(self, m: int, d: int):
        if m < 1 or d < 1:
            raise ValueError("grid needs m >= 1 and d >= 1")
        self.m = m
        self.d = d
        self.u = m**d

    def encode(self, point: Sequence[int]) -> int:
        if len(point) != self.d:
            raise ValueError(f"point has {len(point)} coordinates, expected {self.d}")
        idx = 0
        for x in point:
            if not 0 <= x < self.m:
                raise ValueError(f"coordinate {x} outside [0, {self.m})")
            idx = idx * self.m + x
        return idx

    def decode(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.u:
            raise ValueError(f"index {index} outside universe of size {self.u}")
        coords = []
        for _ in range(self.d):
            coords.append(index % self.m)
            index //= self.m
        return tuple(reversed(coords))

    def points(self) -> Iterator[tuple[int, ...]]:
        for i in range(self.u):
            yield self.decode(i)


def sq_dist(p: Sequence[int], q: Sequence[int]) -> int:
    return sum((a - b) ** 2 for a, b in zip(p, q))


class MetricSpace:
    """Finite metric space on m points with an integer distance matrix."""

    __slots__ = ("m", "dist")

    def __init__(self, dist: list[list[int]], check: bool = True):
        m = len(dist)
        self.m = m
        self.dist = dist
        if check:
            for i in range(m):
                if len(dist[i]) != m:
                    raise ValueError("distance matrix is not square")
                if dist[i][i] != 0:
                    raise ValueError(f"nonzero self-distance at {i}")
                for j in range(m):
                    if dist[i][j] != dist[j][i]:
                        raise ValueError(f"asymmetric distances at ({i}, {j})")
                    if dist[i][j] < 0:
                        raise ValueError(f"negative distance at ({i}, {j})")
            for i in range(m):
                di = dist[i]
                for j in range(m):
                    dij = di[j]
                    for k in range(m):
                        if dij > di[k] + dist[k][j]:
                            raise ValueError(
                                f"triangle inequality fails: d({i},{j}) > d({i},{k})+d({k},{j})")

    def d(self, i: int, j: int) -> int:
        return self.dist[i][j]

    def distance_values(self) -> list[int]:
        """Sorted distinct values {d(x, y)}; includes 0."""
        vals = {0}
        for i in range(self.m):
            for j in range(i + 1, self.m):
                vals.add(self.dist[i][j])
        return sorted(vals)

    def to_text(self) -> str:
        lines = [f"m={self.m}"]
        lines += [" ".join(str(v) for v in row) for row in self.dist]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> MetricSpace:
        lines = [ln.strip() for ln in text.splitlines()
                 if ln.strip() and not ln.strip().startswith("#")]
        if not lines or not lines[0].startswith("m="):
            raise StreamFormatError("metric file must start with 'm=<int>'")
        m = int(lines[0][2:])
        if len(lines) != m + 1:
            raise StreamFormatError(f"expected {m} matrix rows, got {len(lines) - 1}")
        dist = [[int(v) for v in ln.split()] for ln in lines[1:]]
        return cls(dist)


@dataclass
class ParsedStream:
    """Result of parsing a stream file: the declared universe plus updates."""

    u: int
    updates: list[StreamUpdate]
    grid: GridUniverse | None = None
    metric_path: str | None = None
    points: list[tuple[int, ...]] | None = None  # set for grid point streams


def parse_stream(lines: Iterable[str]) -> ParsedStream:
    """One-pass parse of the text stream format.

    Header is one of:  u=<int>  |  grid m=<int> d=<int>  |  metric file=<path>
    Under a `u=` or `metric` header each body line is `<index> <delta>`
    (bare `<index>` means +1); under a `grid` header each body line is
    `<x_1> ... <x_d>`, one insertion per line.  `#` starts a comment.
    """
    it = iter(enumerate(lines, start=1))
    header = None
    for lineno, raw in it:
        stripped = raw.split("#", 1)[0].strip()
        if stripped:
            header = (lineno, stripped)
            break
    if header is None:
        raise StreamFormatError("empty stream: missing header line")

    lineno, head = header
    grid = None
    metric_path = None
    points: list[tuple[int, ...]] | None = None
    if head.startswith("u="):
        try:
            u = int(head[2:])
        except ValueError:
            raise StreamFormatError(f"line {lineno}: bad universe size {head!r}") from None
    elif head.startswith("grid "):
        params = _parse_kv(head[5:], lineno)
        grid = GridUniverse(int(params["m"]), int(params["d"]))
        u = grid.u
        points = []
    elif head.startswith("metric "):
        params = _parse_kv(head[7:], lineno)
        metric_path = params["file"]
        u = -1  # resolved by the caller from the metric file
    else:
        raise StreamFormatError(f"line {lineno}: unrecognized header {head!r}")

    updates: list[StreamUpdate] = []
    for lineno, raw in it:
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        fields = stripped.split()
        if grid is not None:
            if len(fields) != grid.d:
                raise StreamFormatError(
                    f"line {lineno}: expected {grid.d} coordinates, got {len(fields)}")
            try:
                pt = tuple(int(f) for f in fields)
                idx = grid.encode(pt)
            except ValueError as e:
                raise StreamFormatError(f"line {lineno}: {e}") from None
            points.append(pt)
            updates.append(StreamUpdate(idx, 1))
            continue
        if len(fields) == 1:
            fields = [fields[0], "+1"]
        if len(fields) != 2:
            raise StreamFormatError(f"line {lineno}: expected '<index> <delta>'")
        try:
            idx, delta = int(fields[0]), int(fields[1])
        except ValueError:
            raise StreamFormatError(f"line {lineno}: non-integer update {stripped!r}") from None
        if u >= 0 and not 0 <= idx < u:
            raise StreamFormatError(f"line {lineno}: index {idx} outside universe of size {u}")
        updates.append(StreamUpdate(idx, delta))
    return ParsedStream(u=u, updates=updates, grid=grid,
                        metric_path=metric_path, points=points)


def parse_stream_file(path: str) -> ParsedStream:
    with open(path, encoding="utf-8") as fh:
        parsed = parse_stream(fh)
    if parsed.metric_path is not None:
        import os

        mp = parsed.metric_path
        if not os.path.isabs(mp):
            mp = os.path.join(os.path.dirname(os.path.abspath(path)), mp)
        with open(mp, encoding="utf-8") as fh:
            metric = MetricSpace.from_text(fh.read())
        parsed.u = metric.m
        for upd in parsed.updates:
            if not 0 <= upd.index < metric.m:
                raise StreamFormatError(
                    f"update index {upd.index} outside metric space of size {metric.m}")
    return parsed


def _parse_kv(text: str, lineno: int) -> dict[str, str]:
    out = {}
    for tok in text.split():
        if "=" not in tok:
            raise StreamFormatError(f"line {lineno}: expected key=value, got {tok!r}")
        k, v = tok.split("=", 1)
        out[k] = v
    return out


class FrequencyOracle:
    """Explicit frequency vector; prover/oracle side only.

    The space-bounded verifier never holds one of these.
    """

    __slots__ = ("u", "vector")

    def __init__(self, u: int, vector: list[int] | None = None):
        self.u = u
        self.vector = vector if vector is not None else [0] * u

    def __getitem__(self, i: int) -> int:
        return self.vector[i]

    def add(self, index: int, delta: int) -> None:
        self.vector[index] += delta


def frequencies(updates: Iterable[StreamUpdate], u: int) -> FrequencyOracle:
    oracle = FrequencyOracle(u)
    vec = oracle.vector
    for index, delta in updates:
        if not 0 <= index < u:
            raise ValueError(f"index {index} outside universe of size {u}")
        vec[index] += delta
    return oracle


def points_stream_text(m: int, d: int, points: Sequence[Sequence[int]]) -> str:
    lines = [f"grid m={m} d={d}"]
    lines += [" ".join(str(x) for x in p) for p in points]
    return "\n".join(lines) + "\n"


def updates_stream_text(u: int, updates: Sequence[StreamUpdate]) -> str:
    lines = [f"u={u}"]
    lines += [f"{i} {d:+d}" for i, d in updates]
    return "\n".join(lines) + "\n"
