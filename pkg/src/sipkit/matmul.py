"""Annotated (one-message) rectangular matrix multiplication, and eigenpair
verification built on two runs of it.

To verify C = A * B for A of shape k x n and B of shape n x k', both
parties grid the inner dimension as [h] x [v] with h * v >= n (cell (x, y)
holds coordinate y*h + x) and extend each row a_i of A and column b_j of B
to the bivariate polynomial of degree < h in X, < v in Y agreeing with it
on the grid.  While streaming the matrices the verifier folds, for random
r and alpha,

    s_y  = sum_i  atilde_i(r, y) * alpha^i          (from entries of A)
    s'_y = sum_j  btilde_j(r, y) * alpha^(k*j)      (from entries of B)

keeping 2v + O(1) field elements.  The prover's single annotation holds,
for every (i, j), a univariate s_ij claimed to equal
g_ij(X) = sum_y atilde_i(X, y) * btilde_j(X, y); the verifier accepts iff

    sum_ij s_ij(r) * alpha^(j*k + i)  ==  sum_y s_y * s'_y

and every message respects the degree bound, in which case
C_ij = sum_{x in [h]} s_ij(x).  Honest annotations satisfy the identity for
every (r, alpha); a wrong polynomial escapes with probability at most
h/|F| + k*k'/|F|.  g_ij is a sum of products of two degree-(h-1)
interpolants, so messages are bounded (and checked) at degree 2(h-1).

Eigenpair verification invokes the protocol twice on a symmetric integer
matrix A and claimed integer eigenpairs (lambda_i, v_i): once for C = A*V
(then a Reed-Solomon fingerprint check that C = V*D), and once for V^T*V,
whose verified product must be diagonal.  V itself is treated as part of
the input stream and is never stored by the verifier.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .extension import LagrangeBasis, UnivariatePoly, interpolate_on_nodes
from .field import PrimeField, decode_elements, encode_elements
from .fingerprint import Fingerprint
from .transport import (
    ANNOTATION,
    VALUE,
    VSTREAM,
    ProtocolError,
    ProverSession,
    Session,
    run_in_process,
)


@dataclass(frozen=True)
class MatMulInstance:
    k: int   # rows of A
    kp: int  # columns of B
    n: int   # inner dimension
    h: int
    v: int
    field: PrimeField

    def __post_init__(self):
        if self.h * self.v < self.n:
            raise ValueError(f"grid {self.h}x{self.v} cannot hold inner dimension {self.n}")
        if min(self.k, self.kp, self.n, self.h, self.v) < 1:
            raise ValueError("all dimensions must be positive")
        floor = max(100 * self.h * self.k * self.kp, 6 * self.n**3)
        if self.field.p < floor:
            raise ValueError(f"field size {self.field.p} below soundness floor {floor}")

    @property
    def degree_bound(self) -> int:
        return 2 * (self.h - 1)

    def cell(self, inner: int) -> tuple[int, int]:
        return inner % self.h, inner // self.h


class MatMulVerifierState:
    """Streaming fold of s_y and s'_y; entries of A and B may interleave."""

    def __init__(self, instance: MatMulInstance, rng: random.Random):
        self.instance = instance
        field = instance.field
        self.field = field
        self.r = field.sample_int(rng)
        self.alpha = field.sample_int(rng)
        self.s = [0] * instance.v
        self.sp = [0] * instance.v
        self._basis = LagrangeBasis(instance.h, field)
        self._full = self._basis.full_product(self.r)

    def observe(self, matrix: str, outer: int, inner: int, value: int) -> None:
        inst = self.instance
        p = self.field.p
        if not 0 <= inner < inst.n:
            raise ValueError(f"inner index {inner} out of range for n={inst.n}")
        x, y = inst.cell(inner)
        w = value % p * self._basis.basis_at(self.r, x, self._full) % p
        if matrix == "A":
            if not 0 <= outer < inst.k:
                raise ValueError(f"row index {outer} out of range for k={inst.k}")
            self.s[y] = (self.s[y] + w * pow(self.alpha, outer, p)) % p
        elif matrix == "B":
            if not 0 <= outer < inst.kp:
                raise ValueError(f"column index {outer} out of range for k'={inst.kp}")
            self.sp[y] = (self.sp[y] + w * pow(self.alpha, inst.k * outer, p)) % p
        else:
            raise ValueError(f"matrix id must be 'A' or 'B', got {matrix!r}")

    def state_size_elements(self) -> int:
        # r, alpha, running node product, fingerprint accumulator slot, s, s'
        return 2 * self.instance.v + 4


@dataclass
class ProverAnnotation:
    """k*k' univariate polynomials, row-major in (i, j), each transmitted as
    exactly degree_bound+1 coefficients."""

    instance: MatMulInstance
    polys: list[UnivariatePoly]

    def encode(self) -> bytes:
        width = self.instance.degree_bound + 1
        flat: list[int] = []
        for poly in self.polys:
            flat.extend(poly.padded(width))
        return encode_elements(flat)

    @classmethod
    def decode(cls, payload: bytes, instance: MatMulInstance) -> ProverAnnotation:
        values = decode_elements(payload, instance.field)
        width = instance.degree_bound + 1
        expected = instance.k * instance.kp * width
        if len(values) != expected:
            raise ProtocolError(
                f"annotation has {len(values)} elements, expected {expected}")
        polys = [UnivariatePoly(values[t:t + width], instance.field)
                 for t in range(0, len(values), width)]
        return cls(instance=instance, polys=polys)


def matmul_prove(rows_a: list[list[int]], cols_b: list[list[int]],
                 instance: MatMulInstance) -> ProverAnnotation:
    """Honest annotation; oblivious to the verifier's randomness.

    rows_a[i] and cols_b[j] are length-n integer vectors (row i of A,
    column j of B)."""
    inst = instance
    field = inst.field
    if len(rows_a) != inst.k or any(len(r) != inst.n for r in rows_a):
        raise ValueError("A has wrong shape")
    if len(cols_b) != inst.kp or any(len(c) != inst.n for c in cols_b):
        raise ValueError("B has wrong shape")

    def column_polys(vec: list[int]) -> list[UnivariatePoly]:
        # one degree-(h-1) interpolant per grid column y
        out = []
        for y in range(inst.v):
            col = [0] * inst.h
            for x in range(inst.h):
                inner = y * inst.h + x
                if inner < inst.n:
                    col[x] = vec[inner] % field.p
            out.append(interpolate_on_nodes(col, field))
        return out

    a_polys = [column_polys(r) for r in rows_a]
    b_polys = [column_polys(c) for c in cols_b]
    annotation = []
    for i in range(inst.k):
        for j in range(inst.kp):
            acc = UnivariatePoly([], field)
            for y in range(inst.v):
                acc = acc + a_polys[i][y] * b_polys[j][y]
            annotation.append(acc)
    return ProverAnnotation(instance=inst, polys=annotation)


@dataclass
class MatMulResult:
    accepted: bool
    reason: str | None
    product: list[list[int]] | None  # k x k' residues on accept


def matmul_verify(state: MatMulVerifierState,
                  annotation: ProverAnnotation) -> MatMulResult:
    inst = state.instance
    p = state.field.p
    width = inst.degree_bound + 1
    for poly in annotation.polys:
        if len(poly.coeffs) > width:
            return MatMulResult(accepted=False, reason="degree", product=None)
    fp = 0
    for t, poly in enumerate(annotation.polys):
        i, j = divmod(t, inst.kp)
        fp = (fp + poly.eval(state.r) * pow(state.alpha, j * inst.k + i, p)) % p
    rhs = 0
    for y in range(inst.v):
        rhs = (rhs + state.s[y] * state.sp[y]) % p
    if fp != rhs:
        return MatMulResult(accepted=False, reason="fingerprint", product=None)
    # C_ij = sum_{x in [h]} s_ij(x) via node power sums
    power_sums = [inst.h % p]
    acc = [1] * inst.h
    for _ in range(inst.degree_bound):
        acc = [a * x % p for x, a in enumerate(acc)]
        power_sums.append(sum(acc) % p)
    product = [[0] * inst.kp for _ in range(inst.k)]
    for t, poly in enumerate(annotation.polys):
        i, j = divmod(t, inst.kp)
        product[i][j] = sum(c * power_sums[d] for d, c in enumerate(poly.coeffs)) % p
    return MatMulResult(accepted=True, reason=None, product=product)


def signed(value: int, field: PrimeField) -> int:
    return value - field.p if value > field.p // 2 else value


# ---------------------------------------------------------------------------
# Channel protocol: the annotation travels as one frame
# ---------------------------------------------------------------------------

def matmul_prover_steps(psession: ProverSession, rows_a, cols_b,
                        instance: MatMulInstance) -> None:
    annotation = matmul_prove(rows_a, cols_b, instance)
    psession.send(ANNOTATION, annotation.encode())


def matmul_verifier_steps(session: Session, state: MatMulVerifierState,
                          extra_state: int = 0) -> MatMulResult:
    session.observe_state(state.state_size_elements() + extra_state)
    frame = session.recv(ANNOTATION)
    try:
        annotation = ProverAnnotation.decode(frame.payload, state.instance)
    except (ProtocolError, ValueError):
        # wrong element count is a syntactic degree-bound violation
        return MatMulResult(accepted=False, reason="degree", product=None)
    result = matmul_verify(state, annotation)
    session.observe_state(state.state_size_elements() + extra_state)
    return result


def run_matmul(entries, instance: MatMulInstance, seed: int,
               rows_a=None, cols_b=None, annotation: ProverAnnotation | None = None,
               recorder=None) -> tuple[MatMulResult, Session]:
    """In-process run over a stream of (matrix, outer, inner, value) entries.

    The prover side works from explicit matrices (reconstructed from the
    entries when not given) or from a precomputed annotation."""
    entries = list(entries)
    if rows_a is None or cols_b is None:
        rows_a = [[0] * instance.n for _ in range(instance.k)]
        cols_b = [[0] * instance.n for _ in range(instance.kp)]
        for mid, outer, inner, value in entries:
            if mid == "A":
                rows_a[outer][inner] += value
            else:
                cols_b[outer][inner] += value

    rng = random.Random(seed)
    state = MatMulVerifierState(instance, rng)
    for mid, outer, inner, value in entries:
        state.observe(mid, outer, inner, value)

    if annotation is not None:
        def prover_fn(psession: ProverSession) -> None:
            psession.send(ANNOTATION, annotation.encode())
    else:
        def prover_fn(psession: ProverSession) -> None:
            matmul_prover_steps(psession, rows_a, cols_b, instance)

    def verifier_fn(session: Session) -> MatMulResult:
        session.meter.report.stream_passes = 1
        return matmul_verifier_steps(session, state)

    result, session = run_in_process(verifier_fn, prover_fn, recorder=recorder)
    return result, session


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

def matmul_file_text(instance: MatMulInstance, entries) -> str:
    """Matrix stream file: header `matmul k= n= kp= h= v=`, then one entry
    per line `A <i> <x> <y> <val>` / `B <j> <x> <y> <val>` with (x, y) the
    grid cell of the inner coordinate."""
    lines = [f"matmul k={instance.k} n={instance.n} kp={instance.kp} "
             f"h={instance.h} v={instance.v}"]
    for mid, outer, inner, value in entries:
        x, y = instance.cell(inner)
        lines.append(f"{mid} {outer} {x} {y} {value}")
    return "\n".join(lines) + "\n"


def parse_matmul_file(path: str, field: PrimeField):
    with open(path, encoding="utf-8") as fh:
        lines = [ln.split("#", 1)[0].strip() for ln in fh]
    lines = [(i + 1, ln) for i, ln in enumerate(lines) if ln]
    if not lines or not lines[0][1].startswith("matmul "):
        raise ValueError("matmul file must start with 'matmul k= n= kp= h= v='")
    params = dict(tok.split("=", 1) for tok in lines[0][1].split()[1:])
    instance = MatMulInstance(k=int(params["k"]), kp=int(params["kp"]),
                              n=int(params["n"]), h=int(params["h"]),
                              v=int(params["v"]), field=field)
    entries = []
    for lineno, ln in lines[1:]:
        fields = ln.split()
        if len(fields) != 5 or fields[0] not in ("A", "B"):
            raise ValueError(f"line {lineno}: expected 'A|B <outer> <x> <y> <val>'")
        mid, outer, x, y, val = fields[0], int(fields[1]), int(fields[2]), \
            int(fields[3]), int(fields[4])
        if not (0 <= x < instance.h and 0 <= y < instance.v):
            raise ValueError(f"line {lineno}: cell ({x},{y}) outside grid")
        entries.append((mid, outer, y * instance.h + x, val))
    return instance, entries


def annotation_file_text(annotation: ProverAnnotation) -> str:
    """One line per (i, j): `<i> <j> <c0> <c1> ...` low-degree first."""
    inst = annotation.instance
    width = inst.degree_bound + 1
    lines = []
    for t, poly in enumerate(annotation.polys):
        i, j = divmod(t, inst.kp)
        coeffs = " ".join(str(c) for c in poly.padded(width))
        lines.append(f"{i} {j} {coeffs}")
    return "\n".join(lines) + "\n"


def parse_annotation_file(path: str, instance: MatMulInstance) -> ProverAnnotation:
    polys = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            ln = raw.split("#", 1)[0].strip()
            if not ln:
                continue
            fields = ln.split()
            i, j = int(fields[0]), int(fields[1])
            polys[(i, j)] = [int(c) % instance.field.p for c in fields[2:]]
    ordered = []
    for i in range(instance.k):
        for j in range(instance.kp):
            if (i, j) not in polys:
                raise ValueError(f"annotation missing entry ({i}, {j})")
            ordered.append(UnivariatePoly(polys[(i, j)], instance.field))
    return ProverAnnotation(instance=instance, polys=ordered)


def matrix_file_text(rows: list[list[int]]) -> str:
    """Square matrix file: header `matrix n=<n>`, then `i j val` lines."""
    n = len(rows)
    lines = [f"matrix n={n}"]
    for i in range(n):
        for j in range(n):
            if rows[i][j]:
                lines.append(f"{i} {j} {rows[i][j]}")
    return "\n".join(lines) + "\n"


def parse_matrix_file(path: str) -> list[list[int]]:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.split("#", 1)[0].strip() for ln in fh]
    lines = [ln for ln in lines if ln]
    if not lines or not lines[0].startswith("matrix "):
        raise ValueError("matrix file must start with 'matrix n=<n>'")
    n = int(dict(tok.split("=", 1) for tok in lines[0].split()[1:])["n"])
    rows = [[0] * n for _ in range(n)]
    for ln in lines[1:]:
        i, j, val = ln.split()
        rows[int(i)][int(j)] += int(val)
    return rows


def eigen_pairs_text(claim: EigenClaim) -> str:
    """Eigenpair file: header `eigen k=<k>`, then `<lambda> <v_1> ... <v_n>`."""
    lines = [f"eigen k={len(claim.lambdas)}"]
    for lam, vec in zip(claim.lambdas, claim.vectors):
        lines.append(f"{lam} " + " ".join(str(x) for x in vec))
    return "\n".join(lines) + "\n"


def parse_eigen_pairs(path: str) -> EigenClaim:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.split("#", 1)[0].strip() for ln in fh]
    lines = [ln for ln in lines if ln]
    if not lines or not lines[0].startswith("eigen "):
        raise ValueError("pairs file must start with 'eigen k=<k>'")
    k = int(dict(tok.split("=", 1) for tok in lines[0].split()[1:])["k"])
    if len(lines) != k + 1:
        raise ValueError(f"expected {k} eigenpair lines, got {len(lines) - 1}")
    lambdas, vectors = [], []
    for ln in lines[1:]:
        vals = [int(x) for x in ln.split()]
        lambdas.append(vals[0])
        vectors.append(vals[1:])
    return EigenClaim(lambdas=lambdas, vectors=vectors)


# ---------------------------------------------------------------------------
# Eigenpair verification
# ---------------------------------------------------------------------------

@dataclass
class EigenClaim:
    """k claimed eigenpairs of a symmetric n x n integer matrix; integer
    entries only (the non-integer case is out of contract and rejected at
    input validation)."""

    lambdas: list[int]
    vectors: list[list[int]]  # claimed eigenvectors, each of length n

    def validate(self, n: int) -> None:
        if len(self.lambdas) != len(self.vectors):
            raise ValueError("need one eigenvalue per eigenvector")
        for lam in self.lambdas:
            if not isinstance(lam, int):
                raise ValueError(
                    f"non-integer eigenvalue {lam!r}: only the integer-entry "
                    "protocol is supported")
        for vec in self.vectors:
            if len(vec) != n:
                raise ValueError("eigenvector length does not match matrix size")
            for entry in vec:
                if not isinstance(entry, int):
                    raise ValueError(
                        f"non-integer eigenvector entry {entry!r}: only the "
                        "integer-entry protocol is supported")


@dataclass
class EigenResult:
    accepted: bool
    reason: str | None


def _eigen_instances(n: int, k: int, h: int, v: int, field: PrimeField):
    run1 = MatMulInstance(k=n, kp=k, n=n, h=h, v=v, field=field)   # C = A * V
    run2 = MatMulInstance(k=k, kp=k, n=n, h=h, v=v, field=field)   # V^T * V
    return run1, run2


def eigen_prover_steps(psession: ProverSession, a_rows: list[list[int]],
                       claim: EigenClaim, h: int, v: int, field: PrimeField) -> None:
    n = len(a_rows)
    k = len(claim.lambdas)
    run1, run2 = _eigen_instances(n, k, h, v, field)
    psession.send(VALUE, encode_elements([lam % field.p for lam in claim.lambdas]))
    for vec in claim.vectors:
        psession.send(VSTREAM, encode_elements([x % field.p for x in vec]))
    ann1 = matmul_prove(a_rows, claim.vectors, run1)
    psession.send(ANNOTATION, ann1.encode())
    ann2 = matmul_prove(claim.vectors, claim.vectors, run2)
    psession.send(ANNOTATION, ann2.encode())


def eigen_verifier_steps(session: Session, a_entries, n: int, k: int,
                         h: int, v: int, field: PrimeField,
                         rng: random.Random) -> EigenResult:
    """Observe A, consume the prover's claim/V-stream/annotations, decide.

    Randomness order (all drawn before the stream): run-1 (r, alpha),
    run-2 (r, alpha), fingerprint point beta."""
    run1, run2 = _eigen_instances(n, k, h, v, field)
    st1 = MatMulVerifierState(run1, rng)
    st2 = MatMulVerifierState(run2, rng)
    vd_fp = Fingerprint.fresh(field, n * k, rng)
    c_fp = Fingerprint(field, n * k, vd_fp.r)

    def total_state(extra: int = 0) -> int:
        return (st1.state_size_elements() + st2.state_size_elements()
                + vd_fp.state_size_elements() + c_fp.state_size_elements()
                + k + extra)  # + k for the held eigenvalues

    for i, j, value in a_entries:
        st1.observe("A", i, j, value)
    session.meter.report.stream_passes = 1
    session.observe_state(total_state())

    lam_frame = session.recv(VALUE)
    lambdas = decode_elements(lam_frame.payload, field)
    if len(lambdas) != k:
        raise ProtocolError(f"claim has {len(lambdas)} eigenvalues, expected {k}")

    p = field.p
    for j in range(k):
        col_frame = session.recv(VSTREAM)
        column = decode_elements(col_frame.payload, field)
        if len(column) != n:
            raise ProtocolError(f"eigenvector column of length {len(column)}, expected {n}")
        lam = lambdas[j]
        for ell, value in enumerate(column):
            st1.observe("B", j, ell, value)
            st2.observe("A", j, ell, value)
            st2.observe("B", j, ell, value)
            vd_fp.update(j * n + ell, value * lam % p)
    session.observe_state(total_state())

    res1 = matmul_verifier_steps(session, st1, extra_state=total_state() - st1.state_size_elements())
    if not res1.accepted:
        return EigenResult(accepted=False, reason=f"matmul1 {res1.reason}")
    res2 = matmul_verifier_steps(session, st2, extra_state=total_state() - st2.state_size_elements())
    if not res2.accepted:
        return EigenResult(accepted=False, reason=f"matmul2 {res2.reason}")
    for i in range(k):
        for j in range(k):
            if i != j and res2.product[i][j] != 0:
                return EigenResult(accepted=False, reason="not orthogonal")
    for ell in range(n):
        for j in range(k):
            c_fp.update(j * n + ell, res1.product[ell][j])
    if not c_fp.equal(vd_fp):
        return EigenResult(accepted=False, reason="A*V != V*D")
    return EigenResult(accepted=True, reason=None)


def eigen_verify(a_rows: list[list[int]], claim: EigenClaim, seed: int,
                 h: int | None = None, v: int | None = None,
                 field: PrimeField | None = None,
                 recorder=None) -> tuple[EigenResult, Session]:
    """In-process eigenpair verification of a symmetric integer matrix."""
    field = field or PrimeField()
    n = len(a_rows)
    for row in a_rows:
        if len(row) != n:
            raise ValueError("A must be square")
        for entry in row:
            if not isinstance(entry, int):
                raise ValueError("A must have integer entries")
    for i in range(n):
        for j in range(n):
            if a_rows[i][j] != a_rows[j][i]:
                raise ValueError("A must be symmetric")
    claim.validate(n)
    k = len(claim.lambdas)
    if h is None or v is None:
        h = max(1, int(n**0.5))
        while h * h < n:
            h += 1
        v = h
    a_entries = [(i, j, a_rows[i][j]) for i in range(n) for j in range(n)]

    def prover_fn(psession: ProverSession) -> None:
        eigen_prover_steps(psession, a_rows, claim, h, v, field)

    def verifier_fn(session: Session) -> EigenResult:
        rng = random.Random(seed)
        return eigen_verifier_steps(session, a_entries, n, k, h, v, field, rng)

    return run_in_process(verifier_fn, prover_fn, recorder=recorder)
