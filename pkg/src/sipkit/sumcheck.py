"""The sum-check protocol: generic prover and verifier state machines, the
channel driver, and the streaming frequency-statistic instantiation.

The claim is H = sum over the boolean cube {0,1}^v of a v-variate
polynomial g.  In round j the prover sends the univariate

    g_j(X) = sum over boolean suffixes of g(r_1, ..., r_{j-1}, X, suffix)

and the verifier checks the degree bound, checks g_{j-1}(r_{j-1}) =
g_j(0) + g_j(1) (round 1 checks H instead), and answers with a random
challenge r_j.  After round v the verifier accepts iff g_v(r_v) equals its
own oracle evaluation of g at (r_1, ..., r_v).  Perfect completeness;
soundness error at most sum_j deg_j(g) / |F|.

The verifier draws all its challenges before interaction starts.  That is
what makes the streaming instantiation work: for frequency statistics
F(a) = sum_i h(a_i), the protocol runs on g = h(ahat) where ahat is the
multilinear extension of the frequency vector, and the verifier's final
oracle value h(ahat(r)) is computable with one streaming pass *before* the
prover has seen any r_j.  Messages travel as coefficient vectors
zero-padded to deg_j+1, which makes the degree check syntactic and the
communication count exact: sum_j (deg_j + 1) elements from the prover plus
v challenges back.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from . import transport
from .extension import (
    MleEvalState,
    UnivariatePoly,
    bits_of,
    chi_eval,
    lagrange_interpolate,
    mle_full_eval,
    pad_to_pow2,
)
from .field import PrimeField, encode_elements, decode_elements
from .stream.model import StreamUpdate, frequencies
from .transport import (
    CHALLENGE,
    POLY,
    VALUE,
    ProverSession,
    Session,
)


class SumcheckReject(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass
class SumcheckInstance:
    field: PrimeField
    v: int
    degree_bounds: list[int]

    def __post_init__(self):
        if len(self.degree_bounds) != self.v:
            raise ValueError("need one degree bound per variable")


class DenseTable:
    """Evaluations of a multilinear polynomial on {0,1}^k, bindable one
    variable at a time (most significant bit first)."""

    __slots__ = ("values", "p")

    def __init__(self, values: list[int], field: PrimeField):
        n = len(values)
        if n & (n - 1) or n == 0:
            raise ValueError("table length must be a power of two")
        self.p = field.p
        self.values = [v % self.p for v in values]

    def bind(self, r: int) -> None:
        half = len(self.values) // 2
        p = self.p
        vals = self.values
        self.values = [(vals[i] + r * (vals[half + i] - vals[i])) % p for i in range(half)]

    def at_bound(self, t: int, suffix: int) -> int:
        """Value at (t, suffix-bits) after hypothetically binding the first
        remaining variable to t."""
        half = len(self.values) // 2
        lo, hi = self.values[suffix], self.values[half + suffix]
        if t == 0:
            return lo
        if t == 1:
            return hi
        return (lo + t * (hi - lo)) % self.p


class ComposedProver:
    """Honest prover for g = h(ahat): a univariate statistic composed with a
    multilinear table.  deg_j(g) = deg(h) for every variable; each round
    polynomial is found by brute-force summation over the remaining cube at
    deg+1 sample points followed by interpolation."""

    def __init__(self, table: DenseTable, h: UnivariatePoly, field: PrimeField):
        self.table = table
        self.h = h
        self.field = field
        self.bound = max(h.degree, 0)

    def degree_bounds(self, v: int) -> list[int]:
        return [self.bound] * v

    def claimed_sum(self) -> int:
        p = self.field.p
        return sum(self.h.eval(x) for x in self.table.values) % p

    def round_polynomial(self) -> UnivariatePoly:
        half = len(self.table.values) // 2
        heval = self.h.eval
        points = []
        for t in range(self.bound + 1):
            s = 0
            for suffix in range(half):
                s += heval(self.table.at_bound(t, suffix))
            points.append((t, s % self.field.p))
        return lagrange_interpolate(points, self.field)

    def bind(self, r: int) -> None:
        self.table.bind(r)


class ProductIndicatorProver:
    """Honest prover for g(x) = ahat(x) * chi_q(x), the point-query form.

    The indicator factor stays a scaled indicator under binding, so each
    round polynomial needs only three evaluations of the bound table at the
    boolean suffix of q.  deg_j(g) = 2 for every variable."""

    def __init__(self, table: DenseTable, q: int, v: int, field: PrimeField):
        self.table = table
        self.field = field
        self.q_bits = bits_of(q, v)
        self.pos = 0
        self.scale = 1
        self.bound = 2

    def degree_bounds(self, v: int) -> list[int]:
        return [2] * v

    def claimed_sum(self) -> int:
        # sum over the cube collapses to the table entry at q
        idx = 0
        for b in self.q_bits:
            idx = idx * 2 + b
        return self.table.values[idx]

    def _suffix_index(self) -> int:
        idx = 0
        for b in self.q_bits[self.pos + 1:]:
            idx = idx * 2 + b
        return idx

    def round_polynomial(self) -> UnivariatePoly:
        p = self.field.p
        qj = self.q_bits[self.pos]
        suffix = self._suffix_index()
        points = []
        for t in range(3):
            chi = t if qj else (1 - t) % p
            val = self.scale * chi % p * self.table.at_bound(t, suffix) % p
            points.append((t, val))
        return lagrange_interpolate(points, self.field)

    def bind(self, r: int) -> None:
        p = self.field.p
        qj = self.q_bits[self.pos]
        self.scale = self.scale * (r if qj else (1 - r) % p) % p
        self.table.bind(r)
        self.pos += 1


class CheatingProver:
    """Greedy dishonest prover: claims H + lie, then in every round sends the
    honest polynomial adjusted by the smallest-degree term that satisfies
    the verifier's running sum constraint.  It survives to the final check,
    where it is caught unless a challenge lands on a correction root."""

    def __init__(self, honest, field: PrimeField, lie: int = 1):
        self.honest = honest
        self.field = field
        self.lie = lie % field.p
        self.needed: int | None = None
        self.sent: UnivariatePoly | None = None
        self.bound = honest.bound

    def degree_bounds(self, v: int) -> list[int]:
        return self.honest.degree_bounds(v)

    def claimed_sum(self) -> int:
        self.needed = (self.honest.claimed_sum() + self.lie) % self.field.p
        return self.needed

    def round_polynomial(self) -> UnivariatePoly:
        p = self.field.p
        g = self.honest.round_polynomial()
        have = (g.eval(0) + g.eval(1)) % p
        delta = (self.needed - have) % p
        if self.bound >= 1:
            fix = UnivariatePoly([0, delta], self.field)  # fix(0)+fix(1) = delta
        else:
            fix = UnivariatePoly([delta * self.field.inv(2) % p], self.field)
        self.sent = g + fix
        return self.sent

    def bind(self, r: int) -> None:
        self.needed = self.sent.eval(r)
        self.honest.bind(r)


class SumcheckVerifier:
    """Round-by-round verifier state: the pre-drawn challenges, the claimed
    sum (replaced by the previous polynomial's evaluation as rounds pass),
    and the current message.  Never more than v + max_deg + 2 elements."""

    def __init__(self, instance: SumcheckInstance, rng: random.Random,
                 challenges: list[int] | None = None):
        self.instance = instance
        self.field = instance.field
        if challenges is None:
            challenges = [instance.field.sample_int(rng) for _ in range(instance.v)]
        if len(challenges) != instance.v:
            raise ValueError("need one challenge per variable")
        self.challenges = challenges
        self.round = 0
        self.claim: int | None = None
        self.running: int | None = None  # H, then g_j(r_j)
        self._cur_msg_len = 0

    def set_claim(self, h_value: int) -> None:
        self.claim = h_value % self.field.p
        self.running = self.claim

    def process_round(self, coeffs: list[int]) -> int:
        if self.running is None:
            raise ValueError("claim not set before round 1")
        j = self.round
        if j >= self.instance.v:
            raise transport.ProtocolError("sum-check round beyond variable count")
        bound = self.instance.degree_bounds[j]
        if len(coeffs) != bound + 1:
            raise SumcheckReject("degree")
        self._cur_msg_len = len(coeffs)
        g = UnivariatePoly(coeffs, self.field)
        p = self.field.p
        if (g.eval(0) + g.eval(1)) % p != self.running:
            raise SumcheckReject("sum")
        r = self.challenges[j]
        self.running = g.eval(r)
        self.round += 1
        return r

    def final_check(self, g_at_r: int) -> bool:
        if self.round != self.instance.v:
            raise transport.ProtocolError("final check before all rounds completed")
        return self.running == g_at_r % self.field.p

    def state_size_elements(self) -> int:
        return len(self.challenges) + self._cur_msg_len + 1


@dataclass
class SumcheckResult:
    accepted: bool
    reason: str | None
    claimed_sum: int | None


def prover_steps(session: ProverSession, prover, v: int, field: PrimeField,
                 send_claim: bool = True) -> None:
    """Prover side of one sum-check run over an established session."""
    claimed = prover.claimed_sum()
    if send_claim:
        session.send(VALUE, encode_elements([claimed]))
    bounds = prover.degree_bounds(v)
    for j in range(v):
        poly = prover.round_polynomial()
        session.send(POLY, encode_elements(poly.padded(bounds[j] + 1)))
        frame = session.recv()
        if frame.kind == transport.BYE:
            return
        if frame.kind != CHALLENGE:
            raise transport.ProtocolError("expected challenge frame")
        (r,) = decode_elements(frame.payload, field)
        prover.bind(r)


def verifier_steps(session: Session, verifier: SumcheckVerifier, oracle,
                   claim: int | None = None, extra_state: int = 0) -> SumcheckResult:
    """Verifier side: consume the claimed sum (unless given), run the rounds,
    and settle with the oracle.  `oracle(challenges) -> g(r)`; `extra_state`
    is the element count of surrounding protocol state for the meter."""
    field = verifier.field
    if claim is None:
        frame = session.recv(VALUE)
        (claim,) = decode_elements(frame.payload, field)
    verifier.set_claim(claim)
    session.observe_state(verifier.state_size_elements() + extra_state)
    try:
        for _ in range(verifier.instance.v):
            frame = session.recv(POLY)
            coeffs = decode_elements(frame.payload, field)
            r = verifier.process_round(coeffs)
            session.observe_state(verifier.state_size_elements() + extra_state)
            session.send(CHALLENGE, encode_elements([r]))
    except SumcheckReject as rej:
        return SumcheckResult(accepted=False, reason=rej.reason, claimed_sum=claim)
    if verifier.final_check(oracle(verifier.challenges)):
        return SumcheckResult(accepted=True, reason=None, claimed_sum=claim)
    return SumcheckResult(accepted=False, reason="final", claimed_sum=claim)


def run_sumcheck(instance: SumcheckInstance, prover, oracle,
                 seed: int, claim: int | None = None,
                 challenges: list[int] | None = None,
                 recorder: transport.TranscriptRecorder | None = None,
                 extra_state: int = 0) -> tuple[SumcheckResult, transport.CostReport]:
    """Drive one full in-process run: prover thread against verifier loop.

    The verifier's challenges are drawn from `seed` before interaction (or
    passed in by a protocol whose streaming oracle already committed to
    them), so runs are replayable.  Returns the verdict and cost report.
    """
    import threading

    ch_v, ch_p = transport.in_process_pair()
    session = Session(ch_v, recorder=recorder)
    psession = ProverSession(ch_p)
    rng = random.Random(seed)
    verifier = SumcheckVerifier(instance, rng, challenges=challenges)

    errors: list[BaseException] = []

    def prover_main():
        try:
            prover_steps(psession, prover, instance.v, instance.field,
                         send_claim=claim is None)
        except BaseException as e:  # surfaced after join
            errors.append(e)

    t = threading.Thread(target=prover_main, daemon=True)
    t.start()
    result = verifier_steps(session, verifier, oracle, claim=claim,
                            extra_state=extra_state)
    session.finish(result.accepted)
    t.join(timeout=30)
    if errors:
        raise errors[0]
    return result, session.meter.report


# ---------------------------------------------------------------------------
# Streaming frequency statistics: F(a) = sum_i h(a_i)
# ---------------------------------------------------------------------------

@dataclass
class FreqStatisticInstance:
    """Sum-check instance for F(a) = sum_i h(a_i) over a length-u universe.

    The universe is padded to 2^v; when h(0) != 0 the padding cells
    contribute (2^v - u) * h(0) to the cube sum, which `adjust` removes so
    reported values always refer to the declared universe."""

    field: PrimeField
    u: int
    h: UnivariatePoly
    v: int = 0

    def __post_init__(self):
        self.v, self._u_pad = pad_to_pow2(self.u)

    @property
    def u_padded(self) -> int:
        return self._u_pad

    def sumcheck_instance(self) -> SumcheckInstance:
        return SumcheckInstance(self.field, self.v, [max(self.h.degree, 0)] * self.v)

    def adjust(self, cube_sum: int) -> int:
        pad_terms = (self._u_pad - self.u) * self.h.eval(0)
        return (cube_sum - pad_terms) % self.field.p

    def build_prover(self, updates: list[StreamUpdate]) -> ComposedProver:
        freq = frequencies(updates, self.u)
        table = [a % self.field.p for a in freq.vector] + [0] * (self._u_pad - self.u)
        return ComposedProver(DenseTable(table, self.field), self.h, self.field)

    def observe(self, updates, rng: random.Random) -> MleEvalState:
        """Verifier stream pass: fold updates into ahat(r) for fresh r."""
        state = MleEvalState.fresh(self.field, self.v, rng)
        state.update_many(updates)
        return state

    def oracle_from_state(self, state: MleEvalState):
        def oracle(challenges: list[int]) -> int:
            if challenges != state.r:
                raise ValueError("stream observation point does not match challenges")
            return self.h.eval(state.acc)
        return oracle


def freq_statistic_offline_oracle(inst: FreqStatisticInstance, updates) :
    """Test-oracle route: h(ahat(r)) computed from the explicit frequency
    table with mle_full_eval instead of the streaming fold."""
    freq = frequencies(list(updates), inst.u)
    table = [a % inst.field.p for a in freq.vector] + [0] * (inst.u_padded - inst.u)

    def oracle(challenges: list[int]) -> int:
        return inst.h.eval(mle_full_eval(table, challenges, inst.field))

    return oracle
