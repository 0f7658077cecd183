"""Half-disk geometry and the ping-pong freeness certificate.

Each ``A`` with ``c != 0`` has the open half-disk ``D(A)`` of centre ``a/c`` and
radius ``1/|c|``; ``A`` maps the exterior of ``D(A^-1)`` into ``D(A)`` whenever
``|tr A| > 2``.  If the closures of all ``2s`` disks of a tuple are pairwise
disjoint then no nonempty reduced word in the tuple is the identity.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .exact_arith import DomainError, QComplex, qc_norm_sq
from .mat2 import Mat2, mobius


class CZeroError(DomainError):
    """The matrix has ``c = 0``, so it has no half-disk."""


@dataclass(frozen=True)
class HalfDisk:
    center: Fraction
    radius: Fraction

    def __post_init__(self):
        if self.radius <= 0:
            raise DomainError("half-disk radius must be positive")

    def contains(self, z: QComplex) -> bool:
        """Open membership (``z`` assumed in the upper half-plane)."""
        return qc_norm_sq(z - self.center) < self.radius * self.radius

    def closure_contains(self, z: QComplex) -> bool:
        return qc_norm_sq(z - self.center) <= self.radius * self.radius

    def to_dict(self) -> dict[str, str]:
        return {"center": str(self.center), "radius": str(self.radius)}


def disk(A: Mat2) -> HalfDisk:
    if A.c == 0:
        raise CZeroError(f"c = 0 for {A}")
    return HalfDisk(Fraction(A.a, A.c), Fraction(1, abs(A.c)))


def disk_inv(A: Mat2) -> HalfDisk:
    """``D(A^-1)``: centre ``-d/c``, same radius."""
    if A.c == 0:
        raise CZeroError(f"c = 0 for {A}")
    return HalfDisk(Fraction(-A.d, A.c), Fraction(1, abs(A.c)))


def closed_disjoint(D1: HalfDisk, D2: HalfDisk) -> bool:
    # tangent closures share a boundary point, so equality is not disjoint
    return abs(D1.center - D2.center) > D1.radius + D2.radius


def separated_trace(A: Mat2) -> bool:
    if A.c == 0:
        raise CZeroError(f"c = 0 for {A}")
    return abs(A.a + A.d) > 2


class Verdict(enum.Enum):
    CERTIFIED = "Certified"
    PAIR_FAILURE = "PairFailure"
    TRACE_FAILURE = "TraceFailure"
    C_ZERO_FAILURE = "CZeroFailure"


# cross comparisons between the disks of A_i and A_j, labelled as in the census
PAIR_CHECKS = ("DD", "DinvDinv", "DDinv", "DinvD")


def pair_failures(A1: Mat2, A2: Mat2) -> list[str]:
    """Labels of the cross comparisons whose closures meet (empty for a ping-pong pair
    that also passes the trace test)."""
    d1, d1i, d2, d2i = disk(A1), disk_inv(A1), disk(A2), disk_inv(A2)
    pairs = {"DD": (d1, d2), "DinvDinv": (d1i, d2i), "DDinv": (d1, d2i), "DinvD": (d1i, d2)}
    return [name for name in PAIR_CHECKS if not closed_disjoint(*pairs[name])]


def is_ping_pong_pair(A1: Mat2, A2: Mat2) -> bool:
    """All four closed disks of the pair pairwise disjoint (six comparisons)."""
    discs = [disk(A1), disk_inv(A1), disk(A2), disk_inv(A2)]
    for i in range(4):
        for j in range(i + 1, 4):
            if not closed_disjoint(discs[i], discs[j]):
                return False
    return True


@dataclass
class PingPongReport:
    verdict: Verdict
    index: int | None = None
    pair: tuple[int, int] | None = None
    which: list[str] = field(default_factory=list)
    witness: list[HalfDisk] = field(default_factory=list)

    @property
    def certified(self) -> bool:
        return self.verdict is Verdict.CERTIFIED

    def to_dict(self) -> dict:
        failing_pair = None
        if self.pair is not None:
            failing_pair = {"i": self.pair[0], "j": self.pair[1], "which": list(self.which)}
        return {
            "verdict": self.verdict.value,
            "failing_index": self.index,
            "failing_pair": failing_pair,
            "witness_disks": [D.to_dict() for D in self.witness],
        }


def certify_tuple(tup: Sequence[Mat2]) -> PingPongReport:
    """Try to prove freeness of ``tup`` by ping pong.

    A ``CERTIFIED`` report is a proof; any failure says nothing about freeness.
    Indices in the report are 0-based.
    """
    if len(tup) == 0:
        raise DomainError("cannot certify an empty tuple")
    for i, A in enumerate(tup):
        if A.c == 0:
            return PingPongReport(Verdict.C_ZERO_FAILURE, index=i)
    for i, A in enumerate(tup):
        # equivalent to closed_disjoint(disk(A), disk_inv(A))
        if not separated_trace(A):
            return PingPongReport(Verdict.TRACE_FAILURE, index=i)
    for i in range(len(tup)):
        for j in range(i + 1, len(tup)):
            bad = pair_failures(tup[i], tup[j])
            if bad:
                return PingPongReport(Verdict.PAIR_FAILURE, pair=(i, j), which=bad)
    witness = []
    for A in tup:
        witness.extend((disk(A), disk_inv(A)))
    return PingPongReport(Verdict.CERTIFIED, witness=witness)


def check_e_to_b(A: Mat2, z: QComplex) -> bool:
    """``|cz + d| > 1`` implies ``|Az - a/c| <= 1/|c|``; evaluated exactly."""
    if A.c == 0:
        raise CZeroError(f"c = 0 for {A}")
    if qc_norm_sq(A.c * z + A.d) <= 1:
        return True
    w = mobius(A, z) - Fraction(A.a, A.c)
    return qc_norm_sq(w) <= Fraction(1, A.c * A.c)


def check_disc_mapping(A: Mat2, z: QComplex) -> bool:
    """For ``|tr A| > 2`` and ``z`` outside the closed ``D(A^-1)``, ``Az`` lies in open ``D(A)``."""
    if not separated_trace(A) or disk_inv(A).closure_contains(z):
        return True
    return disk(A).contains(mobius(A, z))
