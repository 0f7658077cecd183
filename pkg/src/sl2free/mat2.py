"""Integer 2x2 matrices of determinant one."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .exact_arith import DomainError, QComplex


class NotUnimodularError(DomainError):
    def __init__(self, a: int, b: int, c: int, d: int):
        self.det = a * d - b * c
        super().__init__(f"matrix [[{a}, {b}], [{c}, {d}]] is not unimodular (det = {self.det})")


@dataclass(frozen=True, slots=True)
class Mat2:
    """An element ``[[a, b], [c, d]]`` of SL2(Z); the determinant is checked on construction."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.a * self.d - self.b * self.c != 1:
            raise NotUnimodularError(self.a, self.b, self.c, self.d)

    @classmethod
    def identity(cls) -> Mat2:
        return cls(1, 0, 0, 1)

    @classmethod
    def from_rows(cls, rows) -> Mat2:
        (a, b), (c, d) = rows
        return cls(int(a), int(b), int(c), int(d))

    def entries(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    def __matmul__(self, other: Mat2) -> Mat2:
        return mul(self, other)

    def __neg__(self) -> Mat2:
        return Mat2(-self.a, -self.b, -self.c, -self.d)

    def __str__(self) -> str:
        return format_matrix(self)

    @property
    def trace(self) -> int:
        return self.a + self.d

    def is_identity(self) -> bool:
        return self.a == 1 and self.b == 0 and self.c == 0 and self.d == 1


IDENTITY = Mat2(1, 0, 0, 1)


def height(A: Mat2) -> int:
    """Naive height: the largest absolute entry."""
    return max(abs(A.a), abs(A.b), abs(A.c), abs(A.d))


def trace(A: Mat2) -> int:
    return A.a + A.d


def inverse(A: Mat2) -> Mat2:
    return Mat2(A.d, -A.b, -A.c, A.a)


def mul(A: Mat2, B: Mat2) -> Mat2:
    # the product of determinant-one matrices is unimodular, skip the re-check
    m = object.__new__(Mat2)
    object.__setattr__(m, "a", A.a * B.a + A.b * B.c)
    object.__setattr__(m, "b", A.a * B.b + A.b * B.d)
    object.__setattr__(m, "c", A.c * B.a + A.d * B.c)
    object.__setattr__(m, "d", A.c * B.b + A.d * B.d)
    return m


def frobenius_sq(A: Mat2) -> int:
    return A.a * A.a + A.b * A.b + A.c * A.c + A.d * A.d


def in_op_ball(A: Mat2, X: int) -> bool:
    """Whether the largest singular value of ``A`` is at most ``X``.

    For det 1 the singular values are ``s`` and ``1/s`` with
    ``s**2 + s**-2 = frobenius_sq(A)``, so ``s <= X`` iff ``F * X**2 <= X**4 + 1``.
    """
    if X < 1:
        raise DomainError(f"operator ball radius must be >= 1, got {X}")
    return frobenius_sq(A) * X * X <= X**4 + 1


def op_ball_frobenius_bound(X: int) -> int:
    """Largest Frobenius square admitted by ``in_op_ball`` at integer radius ``X``."""
    if X < 1:
        raise DomainError(f"operator ball radius must be >= 1, got {X}")
    return (X**4 + 1) // (X * X)


def mobius(A: Mat2, z: QComplex) -> QComplex:
    """Exact image ``(a z + b) / (c z + d)`` of a point in the upper half-plane."""
    if z.im <= 0:
        raise DomainError("Mobius action is only defined on the upper half-plane")
    return (A.a * z + A.b) / (A.c * z + A.d)


class SubgroupKind(enum.Enum):
    FULL = "full"
    GAMMA0 = "gamma0"
    GAMMA1 = "gamma1"
    GAMMA = "gamma"


@dataclass(frozen=True)
class SubgroupSpec:
    kind: SubgroupKind = SubgroupKind.FULL
    Q: int = 1

    def __post_init__(self):
        if isinstance(self.kind, str):
            object.__setattr__(self, "kind", SubgroupKind(self.kind))
        if self.Q < 1:
            raise DomainError(f"level Q must be >= 1, got {self.Q}")
        if self.kind is SubgroupKind.FULL:
            object.__setattr__(self, "Q", 1)

    @classmethod
    def full(cls) -> SubgroupSpec:
        return cls(SubgroupKind.FULL, 1)

    @classmethod
    def gamma0(cls, Q: int) -> SubgroupSpec:
        return cls(SubgroupKind.GAMMA0, Q)

    @classmethod
    def gamma1(cls, Q: int) -> SubgroupSpec:
        return cls(SubgroupKind.GAMMA1, Q)

    @classmethod
    def gamma(cls, Q: int) -> SubgroupSpec:
        return cls(SubgroupKind.GAMMA, Q)


def member(A: Mat2, G: SubgroupSpec) -> bool:
    Q = G.Q
    if G.kind is SubgroupKind.FULL or Q == 1:
        return True
    if A.c % Q:
        return False
    if G.kind is SubgroupKind.GAMMA0:
        return True
    if (A.a - 1) % Q or (A.d - 1) % Q:
        return False
    return G.kind is SubgroupKind.GAMMA1 or A.b % Q == 0


def format_matrix(A: Mat2) -> str:
    """Row-major text form ``"a b c d"``."""
    return f"{A.a} {A.b} {A.c} {A.d}"


def parse_matrix(text: str) -> Mat2:
    parts = text.split()
    if len(parts) != 4:
        raise DomainError(f"expected four integers 'a b c d', got {text!r}")
    try:
        a, b, c, d = (int(p) for p in parts)
    except ValueError:
        raise DomainError(f"expected four integers 'a b c d', got {text!r}") from None
    return Mat2(a, b, c, d)


def singular_value_max(A: Mat2) -> float:
    """Floating-point largest singular value; reporting and test cross-checks only."""
    f = frobenius_sq(A)
    return math.sqrt((f + math.sqrt(f * f - 4)) / 2)
