"""Desk-scale counting experiments around free tuples in SL2(Z).

All integer counts are exact.  Floats only appear in fitted slopes and in
empirical probabilities.  Randomised experiments draw in fixed-size chunks,
chunk ``i`` from stream ``(seed, i)``, so results never depend on ``threads``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .enumeration import (
    BallSpec,
    Norm,
    ball_array,
    count,
    fixed_trace_matrices,
    gamma0_height_profile,
    sample_chunked,
)
from .exact_arith import DomainError, phi_sieve
from .mat2 import IDENTITY, Mat2, SubgroupSpec, mul
from .pingpong import certify_tuple
from .relations import find_relation

EXACT_PAIR_BUDGET = 10**10
CHUNK = 4096


class BudgetExceeded(DomainError):
    pass


def _map(fn, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _gamma0_star(Q: int, X: int) -> BallSpec:
    sub = SubgroupSpec.gamma0(Q) if Q > 1 else SubgroupSpec.full()
    return BallSpec(X, sub, Norm.HEIGHT, require_c_nonzero=True)


# ---------------------------------------------------------------------------
# pair census


@dataclass
class CensusRow:
    X: int
    Q: int
    total_pairs: int
    nonpingpong_pairs: int
    trace_fail: int
    overlap_DD: int
    overlap_DinvDinv: int
    overlap_DDinv: int
    mode: str = "exact"
    population_pairs: int = 0
    # non-ping-pong pairs by dyadic stratum Y/2 < min(|c1|, |c2|) <= Y, keyed by k with Y = X/2**k
    dyadic: dict[int, int] = field(default_factory=dict)

    @property
    def fraction(self) -> float:
        return self.nonpingpong_pairs / self.total_pairs if self.total_pairs else 0.0

    CSV_FIELDS = (
        "X", "Q", "mode", "total_pairs", "nonpingpong_pairs", "trace_fail",
        "overlap_DD", "overlap_DinvDinv", "overlap_DDinv", "population_pairs",
    )


def _dyadic_table(X: int) -> np.ndarray:
    # k with X/2**(k+1) < m <= X/2**k
    return np.array([0] + [(X // m).bit_length() - 1 for m in range(1, X + 1)], dtype=np.int64)


def _classify(ai, ci, di, tri, aj, cj, dj, trj):
    """Boolean failure masks for aligned or broadcast pair arrays (exact int64)."""
    rad = np.abs(ci) + np.abs(cj)
    dd = np.abs(ai * cj - aj * ci) <= rad
    ii = np.abs(di * cj - dj * ci) <= rad
    cross = (np.abs(ai * cj + dj * ci) <= rad) | (np.abs(di * cj + aj * ci) <= rad)
    tf = ~(tri & trj)
    return tf, dd, ii, cross


def _census_block(arr, tr, absc, ktab, nk, s, e):
    a, c, d = arr[:, 0], arr[:, 2], arr[:, 3]
    out = np.zeros(5 + nk, dtype=np.int64)
    for lo, hi, weight in ((s, e, 1), (e, len(arr), 2)):
        if hi <= lo:
            continue
        tf, dd, ii, cross = _classify(
            a[s:e, None], c[s:e, None], d[s:e, None], tr[s:e, None],
            a[None, lo:hi], c[None, lo:hi], d[None, lo:hi], tr[None, lo:hi],
        )
        bad = tf | dd | ii | cross
        mins = np.minimum(absc[s:e, None], absc[None, lo:hi])[bad]
        out[0] += weight * int(bad.sum())
        out[1] += weight * int(tf.sum())
        out[2] += weight * int(dd.sum())
        out[3] += weight * int(ii.sum())
        out[4] += weight * int(cross.sum())
        out[5:] += weight * np.bincount(ktab[mins], minlength=nk)
    return out


def census_pairs(
    Q: int,
    X: int,
    mode: str = "exact",
    *,
    samples: int = 10**5,
    seed: int = 0,
    threads: int = 1,
    block: int = 256,
) -> CensusRow:
    """Classify ordered pairs in Gamma0*(Q, X)**2 by ping-pong failure.

    ``overlap_*`` count pairs whose closed disks ``D(A1), D(A2)`` /
    ``D(A1^-1), D(A2^-1)`` / either cross combination meet; a pair can be in
    several of them and ``nonpingpong_pairs`` counts it once.  ``trace_fail``
    counts pairs where some matrix has ``|tr| <= 2``.
    """
    if not 1 <= Q <= X:
        raise DomainError(f"need 1 <= Q <= X, got Q={Q}, X={X}")
    spec = _gamma0_star(Q, X)
    N = count(spec)
    ktab = _dyadic_table(X)
    nk = int(ktab.max()) + 1
    if mode == "exact":
        if N * N > EXACT_PAIR_BUDGET:
            raise BudgetExceeded(f"{N}**2 pairs exceed the exact budget; use mode='mc'")
        arr = ball_array(spec)
        tr = np.abs(arr[:, 0] + arr[:, 3]) > 2
        absc = np.abs(arr[:, 2])
        starts = list(range(0, N, block))
        parts = _map(lambda s: _census_block(arr, tr, absc, ktab, nk, s, min(s + block, N)), starts, threads)
        tot = np.sum(parts, axis=0) if parts else np.zeros(5 + nk, dtype=np.int64)
        total = N * N
    elif mode == "mc":
        pairs = sample_chunked(spec, 2 * samples, seed, CHUNK)
        A1, A2 = pairs[0::2], pairs[1::2]
        t1 = np.abs(A1[:, 0] + A1[:, 3]) > 2
        t2 = np.abs(A2[:, 0] + A2[:, 3]) > 2
        tf, dd, ii, cross = _classify(A1[:, 0], A1[:, 2], A1[:, 3], t1, A2[:, 0], A2[:, 2], A2[:, 3], t2)
        bad = tf | dd | ii | cross
        mins = np.minimum(np.abs(A1[:, 2]), np.abs(A2[:, 2]))[bad]
        tot = np.concatenate([
            [bad.sum(), tf.sum(), dd.sum(), ii.sum(), cross.sum()],
            np.bincount(ktab[mins], minlength=nk),
        ])
        total = samples
    else:
        raise DomainError(f"unknown census mode {mode!r}")
    tot = [int(v) for v in tot]
    return CensusRow(
        X=X, Q=Q, total_pairs=total, nonpingpong_pairs=tot[0], trace_fail=tot[1],
        overlap_DD=tot[2], overlap_DinvDinv=tot[3], overlap_DDinv=tot[4],
        mode=mode, population_pairs=N * N,
        dyadic={k: v for k, v in enumerate(tot[5:]) if v},
    )


# ---------------------------------------------------------------------------
# exponent fits


@dataclass
class FitResult:
    slope: float
    intercept: float
    points: list[tuple[float, float]]
    residual: float


def fit_exponent(rows: Iterable[tuple[float, float]]) -> FitResult:
    """Least-squares slope of ``log y`` against ``log x``."""
    rows = list(rows)
    if len(rows) < 3:
        raise DomainError("an exponent fit needs at least 3 points")
    if any(x <= 0 or y <= 0 for x, y in rows):
        raise DomainError("exponent fits need positive x and y")
    lx = np.log([float(x) for x, _ in rows])
    ly = np.log([float(y) for _, y in rows])
    design = np.stack([lx, np.ones_like(lx)], axis=1)
    (slope, intercept), *_ = np.linalg.lstsq(design, ly, rcond=None)
    resid = float(np.sum((ly - (slope * lx + intercept)) ** 2))
    return FitResult(float(slope), float(intercept), list(zip(lx.tolist(), ly.tolist())), resid)


# ---------------------------------------------------------------------------
# free / non-free rates


@dataclass
class RateRecord:
    s: int
    X: int
    n: int
    L: int
    certified: int
    relation: int
    inconclusive: int
    witness_lengths: dict[int, int] = field(default_factory=dict)
    # tuples neither certified nor refuted, as "a b c d; a b c d"
    inconclusive_log: list[str] = field(default_factory=list)

    @property
    def certified_frac(self) -> Fraction:
        return Fraction(self.certified, self.n)

    @property
    def relation_frac(self) -> Fraction:
        return Fraction(self.relation, self.n)

    @property
    def inconclusive_frac(self) -> Fraction:
        return Fraction(self.inconclusive, self.n)


def classify_tuple(tup: Sequence[Mat2], L: int) -> tuple[str, object]:
    """``("certified", report)``, ``("relation", witness)`` or ``("inconclusive", None)``."""
    rep = certify_tuple(tup)
    if rep.certified:
        return "certified", rep
    res = find_relation(tup, L)
    if res.found:
        return "relation", res
    return "inconclusive", None


def classify_tuples(tuples: Sequence[Sequence[Mat2]], L: int, *, X: int = 0, threads: int = 1) -> RateRecord:
    if not tuples:
        raise DomainError("no tuples to classify")
    s = len(tuples[0])
    results = _map(lambda t: classify_tuple(t, L), tuples, threads)
    rec = RateRecord(s=s, X=X, n=len(tuples), L=L, certified=0, relation=0, inconclusive=0)
    for tup, (kind, obj) in zip(tuples, results):
        if kind == "certified":
            rec.certified += 1
        elif kind == "relation":
            rec.relation += 1
            rec.witness_lengths[obj.length] = rec.witness_lengths.get(obj.length, 0) + 1
        else:
            rec.inconclusive += 1
            rec.inconclusive_log.append("; ".join(str(A) for A in tup))
    rec.witness_lengths = dict(sorted(rec.witness_lengths.items()))
    return rec


def nonfree_rate(s: int, X: int, n: int, L: int = 12, seed: int = 0, *, threads: int = 1) -> RateRecord:
    """Sample ``n`` uniform ``s``-tuples from SL2(Z; X) and classify each one."""
    if s < 1 or n < 1:
        raise DomainError("need s >= 1 and n >= 1")
    rows = sample_chunked(BallSpec(X), s * n, seed, CHUNK)
    tuples = [
        [Mat2(*map(int, rows[i * s + k])) for k in range(s)]
        for i in range(n)
    ]
    return classify_tuples(tuples, L, X=X, threads=threads)


# ---------------------------------------------------------------------------
# order-3 matrices


@dataclass
class Phi3Record:
    s: int
    X: int
    trace_minus1_count: int
    total_count: int
    implied_lower_bound: int
    all_cube_to_identity: bool


def phi3_lower_bound(s: int, X: int) -> Phi3Record:
    """Count trace -1 matrices (characteristic polynomial x**2 + x + 1) and check each has order 3."""
    if s < 1:
        raise DomainError("need s >= 1")
    n = 0
    ok = True
    for A in fixed_trace_matrices(-1, X, 1):
        n += 1
        if not mul(mul(A, A), A) == IDENTITY:
            ok = False
    total = count(BallSpec(X))
    return Phi3Record(s, X, n, total, n * total ** (s - 1), ok)


# ---------------------------------------------------------------------------
# the fixed-radius overlap claim


@dataclass
class FRRow:
    X: int
    r: Fraction
    prob_overlap: float
    prob_ac_le_1: float
    sample_size: int
    overlap_hits: int
    overlap_eligible: int
    ac_hits: int
    singles: int
    seed: int

    @property
    def sigma_overlap(self) -> float:
        p = self.prob_overlap
        return math.sqrt(p * (1 - p) / self.overlap_eligible) if self.overlap_eligible else 0.0

    @property
    def sigma_ac(self) -> float:
        p = self.prob_ac_le_1
        return math.sqrt(p * (1 - p) / self.singles)


def fr_disproof(X: int, r: Fraction | str | float, n: int, seed: int = 0) -> FRRow:
    """Sample ``n`` pairs uniformly from the operator-norm ball and measure two events.

    ``prob_overlap`` is the frequency of ``|a1/c1 - a2/c2| <= r`` among pairs with
    ``c1 c2 != 0``; ``prob_ac_le_1`` the frequency of ``c != 0, |a| <= |c|`` over
    all ``2n`` sampled matrices.
    """
    if X < 2 or n < 1:
        raise DomainError("need X >= 2 and n >= 1")
    r = Fraction(str(r)) if isinstance(r, float) else Fraction(r)
    if r <= 0:
        raise DomainError("overlap radius must be positive")
    p, q = r.numerator, r.denominator
    rows = sample_chunked(BallSpec(X, norm=Norm.OPERATOR), 2 * n, seed, CHUNK)
    A1, A2 = rows[0::2], rows[1::2]
    a1, c1, a2, c2 = A1[:, 0], A1[:, 2], A2[:, 0], A2[:, 2]
    eligible = (c1 != 0) & (c2 != 0)
    hit = q * np.abs(a1 * c2 - a2 * c1) <= p * np.abs(c1 * c2)
    hits = int((hit & eligible).sum())
    n_elig = int(eligible.sum())
    ac = (rows[:, 2] != 0) & (np.abs(rows[:, 0]) <= np.abs(rows[:, 2]))
    ac_hits = int(ac.sum())
    return FRRow(
        X=X, r=r,
        prob_overlap=hits / n_elig if n_elig else 0.0,
        prob_ac_le_1=ac_hits / len(rows),
        sample_size=n, overlap_hits=hits, overlap_eligible=n_elig,
        ac_hits=ac_hits, singles=len(rows), seed=seed,
    )


# ---------------------------------------------------------------------------
# size of Gamma0(Q, X)


@dataclass
class Gamma0Row:
    Q: int
    X: int
    count: int
    ratio: float
    phi_lower_bound: int

    @property
    def ok(self) -> bool:
        return self.count >= self.phi_lower_bound


def phi_sum(Q: int, X: int, phi: np.ndarray | None = None) -> int:
    """Sum of ``phi(eQ)`` over ``1 <= e <= X/Q``."""
    if phi is None:
        phi = phi_sieve(X)
    return int(phi[Q : X + 1 : Q].sum())


def gamma0_size_check(Q_list: Sequence[int], X_list: Sequence[int]) -> list[Gamma0Row]:
    phi = phi_sieve(max(X_list))
    rows = []
    for Q in Q_list:
        for X in X_list:
            if Q > X:
                raise DomainError(f"Q={Q} exceeds X={X}")
            n = count(BallSpec.gamma0(Q, X))
            rows.append(Gamma0Row(Q, X, n, n * Q / X**2, phi_sum(Q, X, phi)))
    return rows


def gamma0_lower_bound_sweep(Xmax: int) -> tuple[int, list[tuple[int, int, int, int]]]:
    """Check ``#Gamma0(Q, X) >= sum phi(eQ)`` for all ``Q <= X <= Xmax``.

    Returns the number of checks and the violations ``(Q, X, count, bound)``.
    """
    phi = phi_sieve(Xmax)
    arr = ball_array(BallSpec(Xmax))
    checks = 0
    bad = []
    for Q in range(1, Xmax + 1):
        prof = gamma0_height_profile(Xmax, Q, arr)
        cum = np.cumsum(phi[Q::Q])
        for X in range(Q, Xmax + 1):
            bound = int(cum[X // Q - 1])
            checks += 1
            if int(prof[X]) < bound:
                bad.append((Q, X, int(prof[X]), bound))
    return checks, bad


def format_tuple(tup: Sequence[Mat2]) -> str:
    return "; ".join(str(A) for A in tup)

