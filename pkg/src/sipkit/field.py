"""Prime-field arithmetic underlying every protocol in the toolkit.

All protocol algebra happens in GF(p) for a prime p that fits in 64 bits.
The default modulus is the Mersenne prime 2^61 - 1: big enough that every
desk-scale soundness bound (Schwartz-Zippel collision rates, sum-check
round errors, matrix fingerprint errors) is astronomically small, and small
enough that Python's ints never leave the fast fixed-size path.

Two layers are provided:

  PrimeField    — the field itself; int-in/int-out arithmetic helpers used
                  by the hot loops (streaming folds, table binding).
  FieldElement  — a thin wrapper with operator overloading for code where
                  readability beats raw speed.  Elements of different
                  fields never mix; mixing raises FieldMismatchError.

Elements serialize as 8-byte little-endian unsigned integers of the
canonical representative.
"""

from __future__ import annotations

import random
import struct

MERSENNE_61 = (1 << 61) - 1  # default modulus, 2305843009213693951

_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


class FieldMismatchError(ValueError):
    """Raised when elements of two different prime fields are combined."""


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for all 64-bit integers."""
    if n < 2:
        return False
    for p in _MR_WITNESSES:
        if n % p == 0:
            return n == p
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class PrimeField:
    """GF(p) for prime p >= 3 fitting in 64 bits."""

    __slots__ = ("p",)

    def __init__(self, modulus: int = MERSENNE_61):
        if modulus < 3:
            raise ValueError(f"modulus must be >= 3, got {modulus}")
        if modulus >= 1 << 64:
            raise ValueError("modulus must fit in 64 bits")
        if not is_prime(modulus):
            raise ValueError(f"modulus {modulus} is not prime")
        self.p = modulus

    # int-level arithmetic; inputs and outputs are canonical representatives

    def add(self, a: int, b: int) -> int:
        s = a + b
        return s - self.p if s >= self.p else s

    def sub(self, a: int, b: int) -> int:
        s = a - b
        return s + self.p if s < 0 else s

    def mul(self, a: int, b: int) -> int:
        return a * b % self.p

    def neg(self, a: int) -> int:
        return self.p - a if a else 0

    def inv(self, a: int) -> int:
        """Multiplicative inverse via Fermat: a^(p-2) mod p."""
        if a % self.p == 0:
            raise ZeroDivisionError("non-invertible: zero has no inverse")
        return pow(a, self.p - 2, self.p)

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            return pow(self.inv(a), -e, self.p)
        return pow(a, e, self.p)

    def reduce(self, a: int) -> int:
        """Map any integer (including negatives) to its canonical residue."""
        return a % self.p

    def elem(self, value: int) -> FieldElement:
        return FieldElement(value % self.p, self)

    def zero(self) -> FieldElement:
        return FieldElement(0, self)

    def one(self) -> FieldElement:
        return FieldElement(1, self)

    def sample_int(self, rng: random.Random) -> int:
        """Uniform residue in [0, p); deterministic given the rng seed."""
        return rng.randrange(self.p)

    def sample(self, rng: random.Random) -> FieldElement:
        return FieldElement(self.sample_int(rng), self)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self) -> int:
        return hash(("PrimeField", self.p))

    def __repr__(self) -> str:
        return f"PrimeField({self.p})"


class FieldElement:
    """A canonical residue paired with its field.

    Operations check field agreement; the invariant 0 <= value < p holds
    for every element this class ever constructs.
    """

    __slots__ = ("value", "field")

    def __init__(self, value: int, field: PrimeField):
        if not 0 <= value < field.p:
            raise ValueError(f"value {value} not canonical for modulus {field.p}")
        self.value = value
        self.field = field

    def _check(self, other: FieldElement) -> None:
        if self.field.p != other.field.p:
            raise FieldMismatchError(
                f"cannot mix GF({self.field.p}) and GF({other.field.p})")

    def __add__(self, other: FieldElement) -> FieldElement:
        self._check(other)
        return FieldElement(self.field.add(self.value, other.value), self.field)

    def __sub__(self, other: FieldElement) -> FieldElement:
        self._check(other)
        return FieldElement(self.field.sub(self.value, other.value), self.field)

    def __mul__(self, other: FieldElement) -> FieldElement:
        self._check(other)
        return FieldElement(self.value * other.value % self.field.p, self.field)

    def __neg__(self) -> FieldElement:
        return FieldElement(self.field.neg(self.value), self.field)

    def __pow__(self, e: int) -> FieldElement:
        return FieldElement(self.field.pow(self.value, e), self.field)

    def inverse(self) -> FieldElement:
        return FieldElement(self.field.inv(self.value), self.field)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, FieldElement):
            return self.value == other.value and self.field.p == other.field.p
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.value, self.field.p))

    def __repr__(self) -> str:
        return f"{self.value} (mod {self.field.p})"

    def to_bytes(self) -> bytes:
        return struct.pack("<Q", self.value)

    @classmethod
    def from_bytes(cls, data: bytes, field: PrimeField) -> FieldElement:
        (v,) = struct.unpack("<Q", data)
        if v >= field.p:
            raise ValueError(f"serialized value {v} out of range for modulus {field.p}")
        return cls(v, field)


def arith(op: str, a: FieldElement, b: FieldElement) -> FieldElement:
    """Named-op entry point: op in {'add', 'sub', 'mul'}."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


def encode_elements(values: list[int]) -> bytes:
    """Pack canonical residues as consecutive 8-byte little-endian words."""
    return struct.pack(f"<{len(values)}Q", *values)


def decode_elements(data: bytes, field: PrimeField) -> list[int]:
    if len(data) % 8:
        raise ValueError(f"element payload length {len(data)} not a multiple of 8")
    values = list(struct.unpack(f"<{len(data) // 8}Q", data))
    for v in values:
        if v >= field.p:
            raise ValueError(f"serialized value {v} out of range for modulus {field.p}")
    return values
