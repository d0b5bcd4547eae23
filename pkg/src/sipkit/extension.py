"""Polynomial machinery: univariate polynomials, multilinear extensions of
frequency vectors with streaming evaluation, and bivariate grid extensions.

The multilinear extension of a length-2^v vector a is the unique polynomial
of degree <= 1 per variable agreeing with a on the boolean hypercube:

    ahat(x) = sum_i a_i * chi_i(x),   chi_i(x) = prod_k (x_k if i_k else 1-x_k)

Index bits are taken most-significant-first: universe index i maps to the
boolean vector (i_1, ..., i_v) with i_1 the high bit.  Because ahat(r) is
linear in a, a verifier holding a random point r can fold stream updates
(i, delta) into an accumulator one at a time, keeping only v+1 field
elements (MleEvalState).

The grid extension treats a length-n vector as an [h] x [v] grid (cell
(x, y) holds entry y*h + x) and interpolates each column with the
degree-(h-1) Lagrange basis on nodes 0..h-1 (GridLdeState).
"""

from __future__ import annotations

import random
from .field import PrimeField


class UnivariatePoly:
    """Coefficient vector over a prime field, lowest degree first.

    Trailing zero coefficients are trimmed, so degree == len(coeffs) - 1
    (the zero polynomial has coeffs == [] and degree -1).
    """

    __slots__ = ("coeffs", "field")

    def __init__(self, coeffs: list[int], field: PrimeField):
        cs = [c % field.p for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = cs
        self.field = field

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def eval(self, x: int) -> int:
        """Horner evaluation at a canonical residue."""
        p = self.field.p
        acc = 0
        for c in reversed(self.coeffs):
            acc = (acc * x + c) % p
        return acc

    def padded(self, length: int) -> list[int]:
        """Wire form: coefficients zero-padded to the declared length."""
        if len(self.coeffs) > length:
            raise ValueError(f"degree {self.degree} exceeds padded length {length}")
        return self.coeffs + [0] * (length - len(self.coeffs))

    def __add__(self, other: UnivariatePoly) -> UnivariatePoly:
        if self.field.p != other.field.p:
            raise ValueError("field mismatch")
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + [0] * (n - len(self.coeffs))
        b = other.coeffs + [0] * (n - len(other.coeffs))
        return UnivariatePoly([x + y for x, y in zip(a, b)], self.field)

    def __mul__(self, other: UnivariatePoly) -> UnivariatePoly:
        if self.field.p != other.field.p:
            raise ValueError("field mismatch")
        if not self.coeffs or not other.coeffs:
            return UnivariatePoly([], self.field)
        p = self.field.p
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = (out[i + j] + a * b) % p
        return UnivariatePoly(out, self.field)

    def scale(self, c: int) -> UnivariatePoly:
        return UnivariatePoly([c * a for a in self.coeffs], self.field)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, UnivariatePoly):
            return self.coeffs == other.coeffs and self.field.p == other.field.p
        return NotImplemented

    def __repr__(self) -> str:
        return f"UnivariatePoly({self.coeffs}, mod {self.field.p})"


def lagrange_interpolate(points: list[tuple[int, int]], field: PrimeField) -> UnivariatePoly:
    """Unique polynomial of degree < len(points) through the given (node, value) pairs."""
    nodes = [x % field.p for x, _ in points]
    if len(set(nodes)) != len(nodes):
        raise ValueError("duplicate interpolation node")
    p = field.p
    result = UnivariatePoly([], field)
    for i, (xi, yi) in enumerate(points):
        xi %= p
        basis = UnivariatePoly([1], field)
        denom = 1
        for j, (xj, _) in enumerate(points):
            if j == i:
                continue
            xj %= p
            basis = basis * UnivariatePoly([-xj, 1], field)
            denom = denom * (xi - xj) % p
        result = result + basis.scale(yi % p * field.inv(denom) % p)
    return result


def interpolate_on_nodes(values: list[int], field: PrimeField) -> UnivariatePoly:
    """Interpolate through ((0, values[0]), ..., (h-1, values[h-1])) in O(h^2).

    Builds P(X) = prod_t (X - t) once, then each Lagrange basis numerator by
    synthetic division P / (X - x); useful where the generic interpolator's
    cubic cost would hurt (matrix-protocol provers).
    """
    h = len(values)
    if h == 0:
        return UnivariatePoly([], field)
    p = field.p
    # P(X) = prod (X - t), low-first, degree h
    full = [1]
    for t in range(h):
        nxt = [0] * (len(full) + 1)
        for i, c in enumerate(full):
            nxt[i + 1] = (nxt[i + 1] + c) % p
            nxt[i] = (nxt[i] - t * c) % p
        full = nxt
    fact = [1] * h
    for i in range(1, h):
        fact[i] = fact[i - 1] * i % p
    out = [0] * h
    for x, val in enumerate(values):
        if val % p == 0:
            continue
        denom = fact[x] * fact[h - 1 - x] % p
        if (h - 1 - x) % 2:
            denom = p - denom
        scale = val % p * field.inv(denom) % p
        # synthetic division: full / (X - x), quotient degree h-1
        q = [0] * h
        carry = full[h]
        for t in range(h - 1, -1, -1):
            q[t] = carry
            carry = (full[t] + x * carry) % p
        for t in range(h):
            out[t] = (out[t] + scale * q[t]) % p
    return UnivariatePoly(out, field)


def bits_of(index: int, v: int) -> list[int]:
    """Boolean vector of an index, most significant bit first."""
    return [(index >> (v - 1 - k)) & 1 for k in range(v)]


def chi_eval(i_bits: list[int], x: list[int], field: PrimeField) -> int:
    """chi_i(x) = prod_k (x_k if i_k else 1 - x_k); the multilinear indicator of i."""
    if len(i_bits) != len(x):
        raise ValueError(f"length mismatch: {len(i_bits)} bits vs {len(x)} coordinates")
    p = field.p
    acc = 1
    for b, xk in zip(i_bits, x):
        acc = acc * (xk if b else (1 - xk) % p) % p
    return acc


def pad_to_pow2(u: int) -> tuple[int, int]:
    """(v, 2^v) with 2^v the smallest power of two >= max(u, 2)."""
    v = max(1, (u - 1).bit_length())
    return v, 1 << v


class MleEvalState:
    """Streaming evaluation of ahat(r): fold updates (i, delta) into
    acc += delta * chi_i(r).  State is exactly v+1 field elements (r, acc);
    the fold is linear, so update order never matters.
    """

    __slots__ = ("field", "v", "r", "acc", "_weights")

    def __init__(self, field: PrimeField, r: list[int]):
        self.field = field
        self.v = len(r)
        self.r = list(r)
        self.acc = 0
        # per-bit (chi_0(r_k), chi_1(r_k)) pairs; derived from r, not extra state
        p = field.p
        self._weights = [((1 - rk) % p, rk) for rk in r]

    @classmethod
    def fresh(cls, field: PrimeField, v: int, rng: random.Random) -> MleEvalState:
        return cls(field, [field.sample_int(rng) for _ in range(v)])

    def update(self, index: int, delta: int) -> None:
        if index >= 1 << self.v:
            raise ValueError(f"index {index} out of range for 2^{self.v} universe")
        p = self.field.p
        w = delta % p
        shift = self.v - 1
        for k, pair in enumerate(self._weights):
            w = w * pair[(index >> (shift - k)) & 1] % p
        self.acc = (self.acc + w) % p

    def update_many(self, updates) -> None:
        for index, delta in updates:
            self.update(index, delta)

    def state_size_elements(self) -> int:
        return self.v + 1


def mle_full_eval(a: list[int], x: list[int], field: PrimeField) -> int:
    """Offline evaluation of the multilinear extension of a at x.

    |a| must be 2^len(x).  Used as the prover-side / test-oracle route;
    agrees with any MleEvalState fold over a stream producing a.
    """
    v = len(x)
    if len(a) != 1 << v:
        raise ValueError(f"table length {len(a)} != 2^{v}")
    p = field.p
    # fold one variable at a time: O(2^v) total
    table = [ai % p for ai in a]
    for xk in x:
        half = len(table) // 2
        table = [(table[i] + xk * (table[half + i] - table[i])) % p for i in range(half)]
    return table[0]


class LagrangeBasis:
    """Degree-(h-1) Lagrange basis on nodes 0..h-1 embedded in the field.

    basis_at(r, x) returns L_x(r).  Denominators depend only on (h, p) and
    are cached; the numerator prod_{t != x} (r - t) is formed from the full
    product with one modular inversion per call, so callers keep O(1)
    randomness-derived state per evaluation point.
    """

    __slots__ = ("h", "field", "_inv_denoms")

    def __init__(self, h: int, field: PrimeField):
        if h < 1:
            raise ValueError("grid dimension h must be >= 1")
        if h >= field.p:
            raise ValueError(f"nodes 0..{h - 1} do not embed in GF({field.p})")
        self.h = h
        self.field = field
        p = field.p
        denoms = []
        fact = [1] * h
        for i in range(1, h):
            fact[i] = fact[i - 1] * i % p
        for x in range(h):
            d = fact[x] * fact[h - 1 - x] % p
            if (h - 1 - x) % 2:
                d = p - d
            denoms.append(d)
        self._inv_denoms = [field.inv(d) for d in denoms]

    def full_product(self, r: int) -> int:
        """prod_{t in [h]} (r - t); zero iff r is a node."""
        p = self.field.p
        acc = 1
        for t in range(self.h):
            acc = acc * (r - t) % p
        return acc

    def basis_at(self, r: int, x: int, full: int | None = None) -> int:
        p = self.field.p
        if r < self.h:
            return 1 if r == x else 0
        if full is None:
            full = self.full_product(r)
        return full * self.field.inv((r - x) % p) % p * self._inv_denoms[x] % p

    def all_at(self, r: int) -> list[int]:
        full = self.full_product(r)
        return [self.basis_at(r, x, full) for x in range(self.h)]


class GridLdeState:
    """Streaming row of grid-extension evaluations for the matrix protocol.

    For a length-n vector gridded as [h] x [v], after folding all updates
    row[y] = atilde(r, y): the value at (r, y) of the unique polynomial of
    degree < h in X and < v in Y agreeing with the vector on the grid.
    Entry index ell maps to cell (x, y) = (ell % h, ell // h).
    """

    __slots__ = ("field", "h", "v", "r", "row", "_basis", "_full")

    def __init__(self, field: PrimeField, h: int, v: int, r: int):
        self.field = field
        self.h = h
        self.v = v
        self.r = r % field.p
        self.row = [0] * v
        self._basis = LagrangeBasis(h, field)
        self._full = self._basis.full_product(self.r)

    def update(self, index: int, delta: int) -> None:
        if index >= self.h * self.v:
            raise ValueError(f"index {index} out of range for {self.h}x{self.v} grid")
        x, y = index % self.h, index // self.h
        self.update_cell(x, y, delta)

    def update_cell(self, x: int, y: int, delta: int) -> None:
        p = self.field.p
        w = self._basis.basis_at(self.r, x, self._full)
        self.row[y] = (self.row[y] + delta * w) % p

    def state_size_elements(self) -> int:
        # r, the running full product, and the v-row
        return self.v + 2
