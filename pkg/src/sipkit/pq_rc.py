"""PointQuery and RangeCount streaming interactive proofs.

PointQuery: after observing a stream of updates, the verifier learns one
coordinate a_q of the frequency vector, for a q chosen only after the
stream has passed.  Realized as a sum-check over g(x) = ahat(x) * chi_q(x),
whose boolean-cube sum is exactly a_q: log2(u) rounds, degree 2 per
variable, verifier oracle ahat(r) * chi_q(r) with ahat(r) folded during
stream observation.

RangeCount: the verifier counts stream points inside one geometric range
sigma by running PointQuery at index(sigma) over the derived stream (one
+1 per point per containing range) and comparing against the claimed
count.

Several queries can be answered after a single pass by keeping parallel
evaluation states, one per anticipated query, each with its own random
point (and hence its own sum-check challenges).
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .extension import MleEvalState, bits_of, chi_eval, pad_to_pow2
from .field import PrimeField
from .stream.model import StreamUpdate, frequencies
from .stream.ranges import RangeSpace, derive_range_stream
from .sumcheck import (
    DenseTable,
    ProductIndicatorProver,
    SumcheckInstance,
    SumcheckResult,
    SumcheckVerifier,
    prover_steps,
    verifier_steps,
)
from .transport import ProverSession, Session, run_in_process


def check_field_policy(field: PrimeField, u: int, delta_bound: int) -> None:
    """Field-size policy |F| >= u * Delta^2 for a declared magnitude bound."""
    if field.p < u * delta_bound * delta_bound:
        raise ValueError(
            f"field size {field.p} below policy u*Delta^2 = {u * delta_bound**2}")


class StreamObserver:
    """Parallel streaming evaluation states over one universe: state i backs
    the i-th query answered after the pass.  All states fold every update;
    each holds its own random point."""

    def __init__(self, field: PrimeField, u: int, num_queries: int,
                 rng: random.Random, delta_bound: int | None = None):
        if delta_bound is not None:
            check_field_policy(field, u, delta_bound)
        self.field = field
        self.u = u
        self.v, self.u_padded = pad_to_pow2(u)
        self.states = [MleEvalState.fresh(field, self.v, rng)
                       for _ in range(num_queries)]

    def update(self, index: int, delta: int) -> None:
        if not 0 <= index < self.u:
            raise ValueError(f"index {index} outside universe of size {self.u}")
        for s in self.states:
            s.update(index, delta)

    def update_many(self, updates) -> None:
        for index, delta in updates:
            self.update(index, delta)

    def state_size_elements(self) -> int:
        return sum(s.state_size_elements() for s in self.states)


@dataclass
class PointQueryResult:
    value: int | None
    accepted: bool
    reason: str | None


def point_query_verifier_steps(session: Session, state: MleEvalState, q: int,
                               field: PrimeField, extra_state: int = 0) -> PointQueryResult:
    """Run the query-q sum-check against one observed evaluation state."""
    v = state.v
    if not 0 <= q < 1 << v:
        raise ValueError(f"query {q} outside padded universe 2^{v}")
    instance = SumcheckInstance(field, v, [2] * v)
    verifier = SumcheckVerifier(instance, rng=random.Random(0), challenges=state.r)
    q_bits = bits_of(q, v)

    def oracle(challenges: list[int]) -> int:
        return state.acc * chi_eval(q_bits, challenges, field) % field.p

    res = verifier_steps(session, verifier, oracle,
                         extra_state=extra_state + state.state_size_elements())
    return PointQueryResult(value=res.claimed_sum if res.accepted else None,
                            accepted=res.accepted, reason=res.reason)


def point_query_prover_steps(psession: ProverSession, table: list[int], q: int,
                             field: PrimeField) -> None:
    """Honest prover: answer the query from the explicit frequency table."""
    v, u_pad = pad_to_pow2(len(table))
    padded = [a % field.p for a in table] + [0] * (u_pad - len(table))
    prover = ProductIndicatorProver(DenseTable(padded, field), q, v, field)
    prover_steps(psession, prover, v, field, send_claim=True)


def point_query(updates: list[StreamUpdate], u: int, q: int, field: PrimeField,
                seed: int, delta_bound: int | None = None,
                prover_factory=None) -> PointQueryResult:
    """One-shot in-process PointQuery: observe, then query q.

    `prover_factory(table) -> prover_fn(ProverSession)` substitutes a
    dishonest prover in soundness experiments."""
    rng = random.Random(seed)
    observer = StreamObserver(field, u, 1, rng, delta_bound=delta_bound)
    observer.update_many(updates)
    freq = frequencies(updates, u)

    if prover_factory is None:
        def prover_fn(psession: ProverSession) -> None:
            point_query_prover_steps(psession, freq.vector, q, field)
    else:
        prover_fn = prover_factory(freq.vector)

    def verifier_fn(session: Session) -> PointQueryResult:
        session.meter.report.stream_passes = 1
        return point_query_verifier_steps(session, observer.states[0], q, field)

    result, _session = run_in_process(verifier_fn, prover_fn)
    # canonicalize small negative frequencies back to signed integers
    if result.accepted and result.value is not None:
        result = PointQueryResult(value=_signed(result.value, field),
                                  accepted=True, reason=None)
    return result


def _signed(value: int, field: PrimeField) -> int:
    """Map a residue to the signed integer of least magnitude."""
    return value - field.p if value > field.p // 2 else value


@dataclass
class RangeCountResult:
    verified: bool
    count: int | None
    reason: str | None

    @property
    def accepted(self) -> bool:
        return self.verified


def range_count_verifier_steps(session: Session, derived_state: MleEvalState,
                               sigma_index: int, claimed_k: int,
                               field: PrimeField, extra_state: int = 0) -> RangeCountResult:
    res = point_query_verifier_steps(session, derived_state, sigma_index, field,
                                     extra_state=extra_state)
    if not res.accepted:
        return RangeCountResult(verified=False, count=None, reason=res.reason)
    ok = res.value == claimed_k % field.p
    return RangeCountResult(verified=ok, count=_signed(res.value, field),
                            reason=None if ok else "count mismatch")


def range_count_prover_steps(psession: ProverSession, derived_freq: list[int],
                             sigma_index: int, field: PrimeField) -> None:
    point_query_prover_steps(psession, derived_freq, sigma_index, field)


def range_count(points, rs: RangeSpace, sigma, claimed_k: int,
                field: PrimeField, seed: int) -> RangeCountResult:
    """One-shot in-process RangeCount for range sigma over a point stream."""
    pts = list(points)
    sigma_index = rs.index_of(sigma)
    rng = random.Random(seed)
    observer = StreamObserver(field, rs.size, 1, rng)
    observer.update_many(derive_range_stream(pts, rs))
    derived_freq = frequencies(derive_range_stream(pts, rs), rs.size)

    def prover_fn(psession: ProverSession) -> None:
        range_count_prover_steps(psession, derived_freq.vector, sigma_index, field)

    def verifier_fn(session: Session) -> RangeCountResult:
        session.meter.report.stream_passes = 1
        return range_count_verifier_steps(session, observer.states[0],
                                          sigma_index, claimed_k, field)

    result, _session = run_in_process(verifier_fn, prover_fn)
    return result
