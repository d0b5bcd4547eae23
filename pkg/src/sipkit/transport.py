"""Message framing, channels, transcript recording, and cost accounting.

Wire format of a frame: a 4-byte little-endian length prefix covering
everything that follows, then 1 byte kind, 4 bytes session id, 4 bytes
round index, 1 byte direction, and the payload.  Round indices strictly
increase per direction within a session.

Channels deliver frames exactly once and in order per direction; the
in-process channel is a pair of queues, the TCP channel the same framing
over a socket.  A transcript file is `SIP1`, a header (protocol name,
parameter string, field modulus, seed), then the session's frames; because
verifier randomness is drawn from the seeded generator recorded in the
header, replaying a transcript against a fresh verifier reproduces the
identical verdict and cost report.

Cost accounting is information-theoretic, not allocator-level: the meter
counts field elements in live protocol state via explicit state-size
hooks, frames record exact payload bits, and a round is one maximal run of
consecutive prover-to-verifier frames.
"""

from __future__ import annotations

import queue
import socket
import struct
from dataclasses import dataclass, field as dc_field

MAGIC = b"SIP1"

# frame kinds
HELLO = 0       # transport handshake; never recorded
CLAIM = 1       # structured utf-8 claim text
POLY = 2        # univariate polynomial, 8-byte LE coefficients low-first
CHALLENGE = 3   # verifier randomness, 8-byte LE elements
VALUE = 4       # claimed scalar(s), 8-byte LE elements
ANNOTATION = 5  # one-shot annotation, 8-byte LE elements
VSTREAM = 6     # prover-supplied stream extension (matrix columns)
BYE = 7         # verdict byte, ends the session

_ELEMENT_KINDS = frozenset({POLY, CHALLENGE, VALUE, ANNOTATION, VSTREAM})
KIND_NAMES = {HELLO: "hello", CLAIM: "claim", POLY: "poly", CHALLENGE: "challenge",
              VALUE: "value", ANNOTATION: "annotation", VSTREAM: "vstream", BYE: "bye"}

P2V = 0  # prover -> verifier
V2P = 1  # verifier -> prover

_HEADER = struct.Struct("<BIIB")  # kind, session, round, direction


class TransportError(RuntimeError):
    pass


class ProtocolError(RuntimeError):
    """Out-of-order rounds, direction violations, malformed payloads."""


@dataclass(frozen=True)
class Frame:
    session: int
    round: int
    direction: int
    kind: int
    payload: bytes

    def encode(self) -> bytes:
        body = _HEADER.pack(self.kind, self.session, self.round, self.direction) + self.payload
        return struct.pack("<I", len(body)) + body

    @classmethod
    def decode_body(cls, body: bytes) -> Frame:
        if len(body) < _HEADER.size:
            raise ProtocolError(f"frame body too short: {len(body)} bytes")
        kind, session, rnd, direction = _HEADER.unpack_from(body)
        return cls(session=session, round=rnd, direction=direction, kind=kind,
                   payload=body[_HEADER.size:])

    def element_count(self) -> int:
        if self.kind in _ELEMENT_KINDS:
            if len(self.payload) % 8:
                raise ProtocolError("element payload not a multiple of 8 bytes")
            return len(self.payload) // 8
        return 0


class Channel:
    """Bidirectional frame transport; one end of a session."""

    def send(self, frame: Frame) -> None:
        raise NotImplementedError

    def recv(self) -> Frame:
        raise NotImplementedError

    def close(self) -> None:
        pass


class QueueChannel(Channel):
    def __init__(self, inbox: queue.Queue, outbox: queue.Queue):
        self._inbox = inbox
        self._outbox = outbox

    def send(self, frame: Frame) -> None:
        self._outbox.put(frame)

    def recv(self) -> Frame:
        frame = self._inbox.get(timeout=30)
        if frame is None:
            raise TransportError("peer closed the channel")
        return frame

    def close(self) -> None:
        self._outbox.put(None)


def in_process_pair() -> tuple[QueueChannel, QueueChannel]:
    a, b = queue.Queue(), queue.Queue()
    return QueueChannel(a, b), QueueChannel(b, a)


class TcpChannel(Channel):
    def __init__(self, sock: socket.socket):
        self._sock = sock
        self._buf = b""

    def send(self, frame: Frame) -> None:
        try:
            self._sock.sendall(frame.encode())
        except OSError as e:
            raise TransportError(f"send failed: {e}") from e

    def _read_exact(self, n: int) -> bytes:
        while len(self._buf) < n:
            try:
                chunk = self._sock.recv(65536)
            except OSError as e:
                raise TransportError(f"recv failed: {e}") from e
            if not chunk:
                raise TransportError("connection closed mid-frame")
            self._buf += chunk
        out, self._buf = self._buf[:n], self._buf[n:]
        return out

    def recv(self) -> Frame:
        (length,) = struct.unpack("<I", self._read_exact(4))
        return Frame.decode_body(self._read_exact(length))

    def close(self) -> None:
        try:
            self._sock.close()
        except OSError:
            pass


class ReplayChannel(Channel):
    """Feeds recorded prover frames to a fresh verifier and checks that the
    verifier's own messages reproduce the recorded ones byte for byte."""

    def __init__(self, frames: list[Frame]):
        self._frames = list(frames)
        self._pos = 0

    def _next(self) -> Frame:
        if self._pos >= len(self._frames):
            raise TransportError("transcript exhausted")
        f = self._frames[self._pos]
        self._pos += 1
        return f

    def recv(self) -> Frame:
        f = self._next()
        if f.direction != P2V:
            raise ProtocolError("transcript expected a prover frame here")
        return f

    def send(self, frame: Frame) -> None:
        recorded = self._next()
        if recorded != frame:
            raise ProtocolError(
                f"replay diverged at frame {self._pos - 1}: regenerated frame differs")


@dataclass
class CostReport:
    """Exact protocol costs: rounds, bits per direction, peak verifier state
    in field elements, and stream passes.  Totals equal the sums over
    recorded frames and state-meter samples."""

    rounds: int = 0
    bits_p2v: int = 0
    bits_v2p: int = 0
    peak_verifier_state: int = 0
    stream_passes: int = 0
    frames: int = 0
    elements_by_kind_p2v: dict = dc_field(default_factory=dict)
    elements_by_kind_v2p: dict = dc_field(default_factory=dict)

    def elements_p2v(self, kind: int | None = None) -> int:
        if kind is None:
            return sum(self.elements_by_kind_p2v.values())
        return self.elements_by_kind_p2v.get(kind, 0)

    def elements_v2p(self, kind: int | None = None) -> int:
        if kind is None:
            return sum(self.elements_by_kind_v2p.values())
        return self.elements_by_kind_v2p.get(kind, 0)

    def lines(self) -> list[str]:
        out = [
            f"rounds={self.rounds}",
            f"bits_p2v={self.bits_p2v}",
            f"bits_v2p={self.bits_v2p}",
            f"elements_p2v={self.elements_p2v()}",
            f"elements_v2p={self.elements_v2p()}",
            f"peak_verifier_state_elements={self.peak_verifier_state}",
            f"stream_passes={self.stream_passes}",
            f"frames={self.frames}",
        ]
        for kind in sorted(self.elements_by_kind_p2v):
            out.append(f"elements_p2v.{KIND_NAMES[kind]}={self.elements_by_kind_p2v[kind]}")
        for kind in sorted(self.elements_by_kind_v2p):
            out.append(f"elements_v2p.{KIND_NAMES[kind]}={self.elements_by_kind_v2p[kind]}")
        return out


class CostMeter:
    """Accumulates frame traffic and samples of live verifier state."""

    def __init__(self):
        self.report = CostReport()
        self._last_direction: int | None = None

    def add_frame(self, frame: Frame) -> None:
        if frame.kind in (HELLO,):
            return
        r = self.report
        r.frames += 1
        bits = len(frame.payload) * 8
        elems = frame.element_count()
        if frame.direction == P2V:
            r.bits_p2v += bits
            if elems:
                r.elements_by_kind_p2v[frame.kind] = (
                    r.elements_by_kind_p2v.get(frame.kind, 0) + elems)
            if self._last_direction != P2V and frame.kind != BYE:
                r.rounds += 1
        else:
            r.bits_v2p += bits
            if elems:
                r.elements_by_kind_v2p[frame.kind] = (
                    r.elements_by_kind_v2p.get(frame.kind, 0) + elems)
        if frame.kind != BYE:
            self._last_direction = frame.direction

    def observe_state(self, elements: int) -> None:
        if elements > self.report.peak_verifier_state:
            self.report.peak_verifier_state = elements


class Session:
    """Verifier-side wrapper of a channel: allocates round indices, records
    frames into the transcript, meters costs, and validates frame order."""

    def __init__(self, channel: Channel, session_id: int = 0,
                 recorder: TranscriptRecorder | None = None):
        self.channel = channel
        self.session_id = session_id
        self.meter = CostMeter()
        self.recorder = recorder
        self._next_round = {P2V: 0, V2P: 0}

    def _register(self, frame: Frame) -> None:
        expected = self._next_round[frame.direction]
        if frame.round < expected:
            raise ProtocolError(
                f"round {frame.round} out of order (expected >= {expected})")
        self._next_round[frame.direction] = frame.round + 1
        self.meter.add_frame(frame)
        if self.recorder is not None and frame.kind != HELLO:
            self.recorder.add(frame)

    def send(self, kind: int, payload: bytes) -> Frame:
        frame = Frame(session=self.session_id, round=self._next_round[V2P],
                      direction=V2P, kind=kind, payload=payload)
        self._register(frame)
        self.channel.send(frame)
        return frame

    def recv(self, expect_kind: int | None = None) -> Frame:
        frame = self.channel.recv()
        if frame.session != self.session_id:
            raise ProtocolError(f"frame for session {frame.session}, expected {self.session_id}")
        if frame.direction != P2V:
            raise ProtocolError("verifier received a verifier-direction frame")
        if expect_kind is not None and frame.kind != expect_kind:
            raise ProtocolError(
                f"expected {KIND_NAMES.get(expect_kind)} frame, got {KIND_NAMES.get(frame.kind)}")
        self._register(frame)
        return frame

    def observe_state(self, elements: int) -> None:
        self.meter.observe_state(elements)

    def finish(self, accepted: bool) -> None:
        try:
            self.send(BYE, b"\x01" if accepted else b"\x00")
        except TransportError:
            pass


class ProverSession:
    """Prover-side wrapper: mirrors round allocation so both ends agree."""

    def __init__(self, channel: Channel, session_id: int = 0):
        self.channel = channel
        self.session_id = session_id
        self._next_round = {P2V: 0, V2P: 0}

    def send(self, kind: int, payload: bytes) -> None:
        frame = Frame(session=self.session_id, round=self._next_round[P2V],
                      direction=P2V, kind=kind, payload=payload)
        self._next_round[P2V] = frame.round + 1
        self.channel.send(frame)

    def recv(self) -> Frame:
        frame = self.channel.recv()
        if frame.direction != V2P:
            raise ProtocolError("prover received a prover-direction frame")
        self._next_round[V2P] = frame.round + 1
        return frame


class TranscriptRecorder:
    def __init__(self, protocol: str, params: str, modulus: int, seed: int):
        self.protocol = protocol
        self.params = params
        self.modulus = modulus
        self.seed = seed
        self.frames: list[Frame] = []

    def add(self, frame: Frame) -> None:
        self.frames.append(frame)

    def to_bytes(self) -> bytes:
        name = self.protocol.encode()
        params = self.params.encode()
        out = [MAGIC, struct.pack("<H", 1),
               struct.pack("<H", len(name)), name,
               struct.pack("<H", len(params)), params,
               struct.pack("<Q", self.modulus), struct.pack("<q", self.seed)]
        out += [f.encode() for f in self.frames]
        return b"".join(out)

    def write(self, path: str) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())


@dataclass
class Transcript:
    protocol: str
    params: str
    modulus: int
    seed: int
    frames: list[Frame]

    @classmethod
    def from_bytes(cls, data: bytes) -> Transcript:
        if len(data) < 6 or data[:4] != MAGIC:
            raise TransportError("not a transcript: bad magic at offset 0")
        pos = 4
        (version,) = struct.unpack_from("<H", data, pos)
        pos += 2
        if version != 1:
            raise TransportError(f"unsupported transcript version {version}")

        def take(n: int, what: str) -> bytes:
            nonlocal pos
            if pos + n > len(data):
                raise TransportError(f"truncated transcript: {what} at offset {pos}")
            chunk = data[pos:pos + n]
            pos += n
            return chunk

        (nlen,) = struct.unpack("<H", take(2, "name length"))
        protocol = take(nlen, "protocol name").decode()
        (plen,) = struct.unpack("<H", take(2, "params length"))
        params = take(plen, "params").decode()
        (modulus,) = struct.unpack("<Q", take(8, "modulus"))
        (seed,) = struct.unpack("<q", take(8, "seed"))
        frames = []
        while pos < len(data):
            (length,) = struct.unpack("<I", take(4, "frame length"))
            frames.append(Frame.decode_body(take(length, "frame body")))
        if not frames:
            raise TransportError("empty transcript: no frames after header")
        return cls(protocol=protocol, params=params, modulus=modulus,
                   seed=seed, frames=frames)

    @classmethod
    def read(cls, path: str) -> Transcript:
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())


def connect_tcp(host: str, port: int, timeout: float = 10.0) -> TcpChannel:
    try:
        sock = socket.create_connection((host, port), timeout=timeout)
        sock.settimeout(timeout * 6)
    except OSError as e:
        raise TransportError(f"connect to {host}:{port} failed: {e}") from e
    return TcpChannel(sock)


class TcpListener:
    """Accepts one session at a time on the given port (0 = ephemeral)."""

    def __init__(self, host: str = "127.0.0.1", port: int = 0):
        self._srv = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._srv.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._srv.bind((host, port))
        self._srv.listen(1)
        self.port = self._srv.getsockname()[1]

    def accept(self, timeout: float = 60.0) -> TcpChannel:
        self._srv.settimeout(timeout)
        try:
            conn, _ = self._srv.accept()
        except OSError as e:
            raise TransportError(f"accept failed: {e}") from e
        conn.settimeout(60.0)
        return TcpChannel(conn)

    def close(self) -> None:
        self._srv.close()


def run_in_process(verifier_fn, prover_fn, session_id: int = 0,
                   recorder: TranscriptRecorder | None = None):
    """Run verifier_fn(Session) against prover_fn(ProverSession) over an
    in-process channel pair; the prover runs on a helper thread.  Returns
    (verifier result, Session).  The result object must expose `.accepted`
    so the closing BYE frame can carry the verdict."""
    import threading

    ch_v, ch_p = in_process_pair()
    session = Session(ch_v, session_id=session_id, recorder=recorder)
    psession = ProverSession(ch_p, session_id=session_id)
    errors: list[BaseException] = []

    def prover_main():
        try:
            prover_fn(psession)
        except (TransportError, ProtocolError):
            pass  # verifier hung up early; its verdict is authoritative
        except BaseException as e:
            errors.append(e)

    thread = threading.Thread(target=prover_main, daemon=True)
    thread.start()
    try:
        result = verifier_fn(session)
        session.finish(result.accepted)
    except BaseException:
        session.finish(False)
        raise
    finally:
        ch_v.close()
    thread.join(timeout=60)
    if errors:
        raise errors[0]
    return result, session


def run_verifier_tcp(verifier_fn, host: str, port: int, summary: str,
                     session_id: int = 0,
                     recorder: TranscriptRecorder | None = None):
    """Verifier side of a split run: connect, handshake, run, hang up."""
    channel = connect_tcp(host, port)
    try:
        handshake_verifier(channel, session_id, summary)
        session = Session(channel, session_id=session_id, recorder=recorder)
        try:
            result = verifier_fn(session)
            session.finish(result.accepted)
        except BaseException:
            session.finish(False)
            raise
        return result, session
    finally:
        channel.close()


def serve_prover_tcp(prover_fn, listener: TcpListener, summary: str,
                     session_id: int = 0) -> None:
    """Prover side of a split run: accept one session and play it out."""
    channel = listener.accept()
    try:
        handshake_prover(channel, session_id, summary)
        prover_fn(ProverSession(channel, session_id=session_id))
    except (TransportError, ProtocolError):
        pass  # verifier rejected and hung up; nothing left to do
    finally:
        channel.close()


def handshake_verifier(channel: Channel, session_id: int, summary: str) -> None:
    """Parameter agreement before the recorded session starts (TCP only)."""
    channel.send(Frame(session=session_id, round=0, direction=V2P,
                       kind=HELLO, payload=summary.encode()))
    reply = channel.recv()
    if reply.kind != HELLO:
        raise ProtocolError("handshake failed: prover did not reply hello")
    if reply.payload != summary.encode():
        raise ProtocolError(
            f"parameter mismatch: verifier={summary!r} prover={reply.payload.decode()!r}")


def handshake_prover(channel: Channel, session_id: int, summary: str) -> None:
    hello = channel.recv()
    if hello.kind != HELLO:
        raise ProtocolError("handshake failed: expected hello")
    channel.send(Frame(session=session_id, round=0, direction=P2V,
                       kind=HELLO, payload=summary.encode()))
    if hello.payload != summary.encode():
        raise ProtocolError(
            f"parameter mismatch: prover={summary!r} verifier={hello.payload.decode()!r}")
