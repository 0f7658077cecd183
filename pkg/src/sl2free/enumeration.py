"""Counting, listing and exactly-uniform sampling of bounded SL2(Z) balls.

A ball is split into *cells* indexed by ``(c, a)``.  For ``c != 0`` the admissible
``d`` in a cell form one residue class ``d = a^-1 (mod m)`` inside an integer
interval ``[lo, hi]`` (``m = |c|``, or ``Q|c|`` for the principal congruence
subgroup), and ``b = (ad - 1)/c`` is then determined.  For ``c = 0`` we have
``a = d = +-1`` and the cell is the admissible range of ``b``.  Everything else
(counts, ordered enumeration, unranking) is arithmetic on the cell table.
"""
from __future__ import annotations

import enum
import functools
from dataclasses import dataclass, field
from math import gcd, isqrt
from typing import Iterator

import numpy as np

from .exact_arith import (
    DomainError,
    count_in_residue_class,
    divisors_from_spf,
    first_in_residue_class,
    spf_sieve,
)
from .mat2 import Mat2, SubgroupKind, SubgroupSpec, op_ball_frobenius_bound

# int64 kernels are exact while every intermediate stays below 2**63
_HEIGHT_INT64_LIMIT = 2**30
_OP_INT64_LIMIT = 1200


class Norm(enum.Enum):
    HEIGHT = "height"
    OPERATOR = "op"


@dataclass(frozen=True)
class BallSpec:
    X: int
    subgroup: SubgroupSpec = field(default_factory=SubgroupSpec.full)
    norm: Norm = Norm.HEIGHT
    require_c_nonzero: bool = False

    def __post_init__(self):
        if isinstance(self.norm, str):
            object.__setattr__(self, "norm", Norm(self.norm))
        if self.X < 1:
            raise DomainError(f"ball radius X must be >= 1, got {self.X}")
        if self.subgroup.kind is not SubgroupKind.FULL and self.subgroup.Q > self.X:
            raise DomainError(f"level Q={self.subgroup.Q} exceeds X={self.X}")

    @property
    def Q(self) -> int:
        return self.subgroup.Q

    @classmethod
    def gamma0(cls, Q: int, X: int, *, c_nonzero: bool = False) -> BallSpec:
        return cls(X, SubgroupSpec.gamma0(Q), Norm.HEIGHT, c_nonzero)


@dataclass(frozen=True)
class SampleSeed:
    master_seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(ss))


# ---------------------------------------------------------------------------
# cell computation


def c_values(spec: BallSpec) -> list[int]:
    """Lower-left entries in canonical order: 0 first, then by ``|c|``, negative before positive."""
    step = spec.Q if spec.subgroup.kind is not SubgroupKind.FULL else 1
    out = [] if spec.require_c_nonzero else [0]
    for k in range(step, spec.X + 1, step):
        out.extend((-k, k))
    return out


def _modulus(spec: BallSpec, c: int) -> int:
    if spec.subgroup.kind is SubgroupKind.GAMMA:
        return spec.Q * abs(c)
    return abs(c)


def _a_range(spec: BallSpec):
    kind, Q = spec.subgroup.kind, spec.Q
    if kind in (SubgroupKind.GAMMA1, SubgroupKind.GAMMA) and Q > 1:
        first = first_in_residue_class(-spec.X, 1, Q)
        return range(first, spec.X + 1, Q)
    return range(-spec.X, spec.X + 1)


def _ceil_div(p: int, q: int) -> int:
    return -((-p) // q)


def _d_interval_height(X: int, a: int, c: int) -> tuple[int, int]:
    # |a d - 1| <= X|c| and |d| <= X
    if a == 0:
        return -X, X
    bound = X * abs(c)
    if a > 0:
        lo, hi = _ceil_div(1 - bound, a), (1 + bound) // a
    else:
        lo, hi = _ceil_div(-1 - bound, -a), (bound - 1) // (-a)
    return max(lo, -X), min(hi, X)


def _op_quadratic(a: int, c: int, d: int, M: int) -> int:
    # c**2 * (F - M) with b = (ad-1)/c substituted; <= 0 iff the matrix is in the ball
    A = a * a + c * c
    return A * d * d - 2 * a * d + 1 + c * c * (A - M)


def _d_interval_op(M: int, a: int, c: int) -> tuple[int, int]:
    A = a * a + c * c
    S = A * (M - A) - 1
    if S < 0:
        return 1, 0
    R = isqrt(c * c * S)
    hi = (a + R) // A
    if _op_quadratic(a, c, hi + 1, M) <= 0:
        hi += 1
    lo = _ceil_div(a - R, A)
    if _op_quadratic(a, c, lo - 1, M) <= 0:
        lo -= 1
    return lo, hi


def scalar_cells(spec: BallSpec, c: int) -> list[tuple[int, int, int, int]]:
    """Cells ``(a, first, step, count)`` of row ``c`` in pure Python integers.

    For ``c == 0`` ``first``/``step`` describe ``b``; otherwise ``d``.
    """
    X, Q, kind = spec.X, spec.Q, spec.subgroup.kind
    out = []
    if c == 0:
        if spec.norm is Norm.HEIGHT:
            B = X
        else:
            B = isqrt(op_ball_frobenius_bound(X) - 2)
        step = Q if kind is SubgroupKind.GAMMA else 1
        for a in (-1, 1):
            if kind in (SubgroupKind.GAMMA1, SubgroupKind.GAMMA) and (a - 1) % Q:
                continue
            first = first_in_residue_class(-B, 0, step)
            n = count_in_residue_class(-B, B, 0, step)
            if n:
                out.append((a, first, step, n))
        return out
    m = _modulus(spec, c)
    M = op_ball_frobenius_bound(X) if spec.norm is Norm.OPERATOR else 0
    for a in _a_range(spec):
        if gcd(a, m) != 1:
            continue
        r = pow(a, -1, m) if m > 1 else 0
        if spec.norm is Norm.HEIGHT:
            lo, hi = _d_interval_height(X, a, c)
        else:
            lo, hi = _d_interval_op(M, a, c)
        n = count_in_residue_class(lo, hi, r, m)
        if n:
            out.append((a, first_in_residue_class(lo, r, m), m, n))
    return out


def _vec_inverse_mod(a: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised extended Euclid: returns (gcd(a, m), a^-1 mod m where the gcd is 1)."""
    r0 = np.full(a.shape, m, dtype=np.int64)
    r1 = np.mod(a, m)
    s0 = np.zeros(a.shape, dtype=np.int64)
    s1 = np.ones(a.shape, dtype=np.int64)
    while True:
        live = r1 != 0
        if not live.any():
            break
        q = np.where(live, r0 // np.where(live, r1, 1), 0)
        r0, r1 = np.where(live, r1, r0), np.where(live, r0 - q * r1, r1)
        s0, s1 = np.where(live, s1, s0), np.where(live, s0 - q * s1, s1)
    return r0, np.mod(s0, m)


def _isqrt_vec(v: np.ndarray) -> np.ndarray:
    r = np.floor(np.sqrt(v.astype(np.float64))).astype(np.int64)
    for _ in range(3):
        r = np.where(r * r > v, r - 1, r)
        r = np.where((r + 1) * (r + 1) <= v, r + 1, r)
    return r


def _floordiv(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    # floor(p/q) for q != 0 of either sign
    return np.where(q > 0, p // np.where(q > 0, q, 1), (-p) // np.where(q < 0, -q, 1))


def _vector_cells(spec: BallSpec, c: int):
    X = spec.X
    m = _modulus(spec, c)
    a = np.fromiter(_a_range(spec), dtype=np.int64)
    if m == 1:
        r = np.zeros_like(a)
    else:
        g, r = _vec_inverse_mod(a, m)
        keep = g == 1
        a, r = a[keep], r[keep]
    if spec.norm is Norm.HEIGHT:
        bound = X * abs(c)
        nz = a != 0
        safe = np.where(nz, a, 1)
        lo_a = -_floordiv(-(1 - bound) * np.ones_like(a), safe)
        hi_a = _floordiv((1 + bound) * np.ones_like(a), safe)
        lo_n = -_floordiv(-(1 + bound) * np.ones_like(a), safe)
        hi_n = _floordiv((1 - bound) * np.ones_like(a), safe)
        lo = np.where(a > 0, lo_a, np.where(a < 0, lo_n, -X))
        hi = np.where(a > 0, hi_a, np.where(a < 0, hi_n, X))
        lo = np.maximum(lo, -X)
        hi = np.minimum(hi, X)
    else:
        M = op_ball_frobenius_bound(X)
        A = a * a + c * c
        S = A * (M - A) - 1
        ok = S >= 0
        a, r, A, S = a[ok], r[ok], A[ok], S[ok]
        R = _isqrt_vec(c * c * S)

        def quad(d):
            return A * d * d - 2 * a * d + 1 + c * c * (A - M)

        hi = (a + R) // A
        hi = np.where(quad(hi + 1) <= 0, hi + 1, hi)
        lo = -((R - a) // A)
        lo = np.where(quad(lo - 1) <= 0, lo - 1, lo)
    n = np.where(hi >= lo, (hi - r) // m - (lo - 1 - r) // m, 0)
    first = lo + np.mod(r - lo, m)
    keep = n > 0
    return a[keep], first[keep], n[keep], m


def _int64_ok(spec: BallSpec) -> bool:
    limit = _OP_INT64_LIMIT if spec.norm is Norm.OPERATOR else _HEIGHT_INT64_LIMIT
    return spec.X <= limit and (spec.subgroup.kind is not SubgroupKind.GAMMA or spec.Q * spec.X <= limit)


# ---------------------------------------------------------------------------
# the cell table


class BallIndex:
    """Row table of one ball (one row per ``c``); supports counting, listing and unranking.

    Only per-row totals are kept when the full cell table would be large; the
    cells of a row are then recomputed on demand.  Rank ``k`` corresponds to
    the ``k``-th matrix yielded by :meth:`__iter__`.
    """

    KEEP_CELLS = 2_000_000

    def __init__(self, spec: BallSpec, *, force_scalar: bool = False):
        self.spec = spec
        self._vector = _int64_ok(spec) and not force_scalar
        self.row_c = c_values(spec)
        self._cells: list | None = []
        kept = 0
        totals = []
        for c in self.row_c:
            cells = self._compute_row(c)
            totals.append(int(cells[3].sum()))
            if self._cells is not None:
                kept += len(cells[0])
                if kept > self.KEEP_CELLS:
                    self._cells = None
                else:
                    self._cells.append(cells)
        self.row_total = np.array(totals, dtype=np.int64)
        self.row_end = np.cumsum(self.row_total)
        self.total = int(self.row_total.sum())

    def _compute_row(self, c: int):
        if c != 0 and self._vector:
            a, first, n, m = _vector_cells(self.spec, c)
            return a, first, np.full(a.shape, m, dtype=np.int64), n
        cells = scalar_cells(self.spec, c)
        cols = list(zip(*cells)) if cells else [(), (), (), ()]
        return tuple(np.array(col, dtype=np.int64) for col in cols)

    def row_cells(self, i: int):
        """``(a, first, step, count)`` arrays of row ``i``."""
        if self._cells is not None:
            return self._cells[i]
        return self._compute_row(self.row_c[i])

    def __len__(self) -> int:
        return self.total

    def counts_by_c(self) -> dict[int, int]:
        return {c: int(n) for c, n in zip(self.row_c, self.row_total) if n}

    @staticmethod
    def _assemble(c: int, a, first, step, cell, j) -> np.ndarray:
        a = a[cell]
        v = first[cell] + j * step[cell]
        if c == 0:
            return np.stack([a, v, np.zeros_like(a), a], axis=1)
        return np.stack([a, (a * v - 1) // c, np.full_like(a, c), v], axis=1)

    def _row_array(self, i: int, within: np.ndarray) -> np.ndarray:
        a, first, step, n = self.row_cells(i)
        end = np.cumsum(n)
        cell = np.searchsorted(end, within, side="right")
        j = within - (end[cell] - n[cell])
        return self._assemble(self.row_c[i], a, first, step, cell, j)

    def unrank(self, k: np.ndarray) -> np.ndarray:
        """Matrices (as an ``(n, 4)`` array of ``a, b, c, d``) at the given ranks."""
        k = np.asarray(k, dtype=np.int64)
        out = np.empty((k.size, 4), dtype=np.int64)
        if k.size == 0:
            return out
        if k.min() < 0 or k.max() >= self.total:
            raise IndexError("rank out of range")
        row = np.searchsorted(self.row_end, k, side="right")
        order = np.argsort(row, kind="stable")
        rows_sorted = row[order]
        bounds = np.flatnonzero(np.diff(rows_sorted)) + 1
        for grp in np.split(order, bounds):
            i = int(row[grp[0]])
            within = k[grp] - (self.row_end[i] - self.row_total[i])
            out[grp] = self._row_array(i, within)
        return out

    def to_array(self) -> np.ndarray:
        parts = [np.zeros((0, 4), dtype=np.int64)]
        for i in range(len(self.row_c)):
            if self.row_total[i]:
                parts.append(self._row_array(i, np.arange(self.row_total[i], dtype=np.int64)))
        return np.concatenate(parts)

    def __iter__(self) -> Iterator[Mat2]:
        for i, c in enumerate(self.row_c):
            a, first, step, n = (col.tolist() for col in self.row_cells(i))
            for ai, f, m, cnt in zip(a, first, step, n):
                for v in range(f, f + m * cnt, m):
                    if c == 0:
                        yield Mat2(ai, v, 0, ai)
                    else:
                        yield Mat2(ai, (ai * v - 1) // c, c, v)

    def sample_array(self, n: int, seed: SampleSeed) -> np.ndarray:
        if self.total == 0:
            raise DomainError("cannot sample from an empty set")
        rng = seed.generator()
        return self.unrank(rng.integers(0, self.total, size=n, dtype=np.int64))


@functools.lru_cache(maxsize=16)
def ball_index(spec: BallSpec) -> BallIndex:
    return BallIndex(spec)


# ---------------------------------------------------------------------------
# public operations


def enumerate_ball(spec: BallSpec) -> Iterator[Mat2]:
    """Every matrix of the ball once, in canonical order."""
    return iter(ball_index(spec))


def ball_array(spec: BallSpec) -> np.ndarray:
    return ball_index(spec).to_array()


def count(spec: BallSpec) -> int:
    return ball_index(spec).total


def count_c_bounded(Q: int, X: int, Y: int) -> int:
    """Number of matrices in Gamma0*(Q, X) with ``0 < |c| <= Y``."""
    if Q < 1 or X < 1 or Y > X or Y < 0:
        raise DomainError(f"need 1 <= Q, 0 <= Y <= X; got Q={Q}, X={X}, Y={Y}")
    if Y < Q:
        return 0
    spec = BallSpec(X, SubgroupSpec.gamma0(Q) if Q > 1 else SubgroupSpec.full(), Norm.HEIGHT, True)
    return sum(n for c, n in ball_index(spec).counts_by_c().items() if abs(c) <= Y)


@functools.lru_cache(maxsize=4)
def _spf_cached(n: int) -> np.ndarray:
    return spf_sieve(n)


def _fixed_trace_cells(t: int, X: int, Q: int, c_nonzero: bool):
    """Yield ``(a, d, m)`` with ``m = ad - 1 = bc`` and the ``(b, c)`` solutions for each."""
    if X < 1 or Q < 1:
        raise DomainError("need X >= 1 and Q >= 1")
    spf = _spf_cached(X * X + 1)
    for a in range(max(-X, t - X), min(X, t + X) + 1):
        d = t - a
        m = a * d - 1
        sols = []
        if m == 0:
            for k in range(Q, X + 1, Q):
                sols.extend(((0, -k), (0, k)))
            if not c_nonzero:
                sols.extend((b, 0) for b in range(-X, X + 1))
        else:
            for e in divisors_from_spf(abs(m), spf):
                if e % Q or e > X or abs(m) // e > X:
                    continue
                sols.extend(((m // -e, -e), (m // e, e)))
        yield a, d, sols


def count_fixed_trace(t: int, X: int, Q: int = 1, *, c_nonzero: bool = True) -> int:
    """Number of matrices in Gamma0*(Q, X) with trace ``t``.

    With ``c_nonzero=False`` the ``c = 0`` matrices of Gamma0(Q, X) are included too.
    """
    return sum(len(sols) for _, _, sols in _fixed_trace_cells(t, X, Q, c_nonzero))


def fixed_trace_matrices(t: int, X: int, Q: int = 1, *, c_nonzero: bool = True) -> Iterator[Mat2]:
    for a, d, sols in _fixed_trace_cells(t, X, Q, c_nonzero):
        for b, c in sorted(sols, key=lambda bc: (abs(bc[1]), bc[1], bc[0])):
            yield Mat2(a, b, c, d)


def sample_uniform(spec: BallSpec, n: int, seed: SampleSeed) -> list[Mat2]:
    """``n`` independent exactly-uniform draws from the ball."""
    rows = ball_index(spec).sample_array(n, seed)
    return [Mat2(*map(int, row)) for row in rows]


def sample_ranks(total: int, n: int, master_seed: int, chunk: int = 4096) -> np.ndarray:
    """Uniform ranks in ``[0, total)``, chunk ``i`` drawn from stream ``(master_seed, i)``."""
    if total <= 0:
        raise DomainError("cannot sample from an empty set")
    parts = [np.zeros(0, dtype=np.int64)]
    for i, start in enumerate(range(0, n, chunk)):
        rng = SampleSeed(master_seed, i).generator()
        parts.append(rng.integers(0, total, size=min(chunk, n - start), dtype=np.int64))
    return np.concatenate(parts)


def sample_chunked(spec: BallSpec, n: int, master_seed: int, chunk: int = 4096) -> np.ndarray:
    """Uniform draws split into fixed-size chunks, chunk ``i`` using stream ``i``.

    The result depends only on ``(spec, n, master_seed, chunk)``, never on how
    chunks are later distributed over workers.
    """
    idx = ball_index(spec)
    return idx.unrank(sample_ranks(idx.total, n, master_seed, chunk))


def brute_force_ball(X: int, Q: int = 1, kind: SubgroupKind | str = SubgroupKind.GAMMA0) -> np.ndarray:
    """Reference scan of ``[-X, X]**4`` filtered by det and congruences; test oracle only."""
    kind = SubgroupKind(kind)
    r = np.arange(-X, X + 1, dtype=np.int64)
    a, b, c, d = (g.ravel() for g in np.meshgrid(r, r, r, r, indexing="ij"))
    keep = a * d - b * c == 1
    if kind is not SubgroupKind.FULL:
        keep &= c % Q == 0
        if kind is not SubgroupKind.GAMMA0:
            keep &= ((a - 1) % Q == 0) & ((d - 1) % Q == 0)
            if kind is SubgroupKind.GAMMA:
                keep &= b % Q == 0
    return np.stack([a[keep], b[keep], c[keep], d[keep]], axis=1)


def gamma0_height_profile(Xmax: int, Q: int, arr: np.ndarray | None = None) -> np.ndarray:
    """``prof[X] = #Gamma0(Q, X)`` for every ``0 <= X <= Xmax`` from one enumeration.

    ``arr`` may pass in a precomputed ``ball_array(BallSpec(Xmax))``.
    """
    if arr is None:
        arr = ball_array(BallSpec(Xmax))
    arr = arr[arr[:, 2] % Q == 0]
    h = np.abs(arr).max(axis=1)
    return np.cumsum(np.bincount(h, minlength=Xmax + 1))
