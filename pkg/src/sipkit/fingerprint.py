"""Reed-Solomon fingerprints for streaming vector equality.

A fingerprint of a vector a in Z^u at a random point r is acc = sum_i a_i r^i,
folded update-by-update: the state is two field elements (r, acc) plus the
declared length.  Equal vectors always fingerprint equal (the fold is linear
and order-independent); unequal vectors collide with probability at most
(u-1)/|F| over the choice of r (a nonzero polynomial of degree < u has fewer
than u roots).

To push the collision rate below 1/u^2 choose |F| >= u^3; the default
2^61 - 1 modulus covers every desk-scale universe.  Entries exceeding a
declared magnitude promise are reduced mod p without error: the promise is
the caller's contract.
"""

from __future__ import annotations

import random
from .field import PrimeField


def field_large_enough(u: int, field: PrimeField) -> bool:
    """True when (u-1)/|F| <= 1/u^2, the bound behind the 1 - 1/u^2 guarantee."""
    return field.p >= u * u * (u - 1)


class Fingerprint:
    __slots__ = ("field", "u", "r", "acc")

    def __init__(self, field: PrimeField, u: int, r: int):
        self.field = field
        self.u = u
        self.r = r % field.p
        self.acc = 0

    @classmethod
    def fresh(cls, field: PrimeField, u: int, rng: random.Random) -> Fingerprint:
        return cls(field, u, field.sample_int(rng))

    def update(self, index: int, delta: int) -> None:
        if not 0 <= index < self.u:
            raise ValueError(f"index {index} out of range for length-{self.u} vector")
        p = self.field.p
        self.acc = (self.acc + delta * pow(self.r, index, p)) % p

    def update_many(self, updates) -> None:
        for index, delta in updates:
            self.update(index, delta)

    def merge(self, other: Fingerprint) -> Fingerprint:
        """Combine fingerprints of disjoint sub-streams (fold linearity)."""
        self._check_compatible(other)
        merged = Fingerprint(self.field, self.u, self.r)
        merged.acc = self.field.add(self.acc, other.acc)
        return merged

    def _check_compatible(self, other: Fingerprint) -> None:
        if self.field.p != other.field.p:
            raise ValueError("fingerprints from different fields")
        if self.r != other.r:
            raise ValueError("fingerprints at different evaluation points")
        if self.u != other.u:
            raise ValueError("fingerprints of different vector lengths")

    def equal(self, other: Fingerprint) -> bool:
        self._check_compatible(other)
        return self.acc == other.acc

    def state_size_elements(self) -> int:
        return 2
