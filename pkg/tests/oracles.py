"""Independent reference implementations used by the tests."""
from __future__ import annotations

import functools
from fractions import Fraction

import numpy as np

from sl2free.enumeration import brute_force_ball


def scan(X: int, Q: int = 1, kind: str = "gamma0") -> np.ndarray:
    """Naive [-X, X]**4 determinant scan."""
    return brute_force_ball(X, Q, kind)


@functools.lru_cache(maxsize=None)
def oracle_pair_census(X: int, Q: int = 1) -> dict[str, int]:
    """All ordered pairs of Gamma0*(Q, X) classified with Fraction geometry.

    Written independently of the numpy census kernel: matrices come from the
    brute-force scan, disks are Fraction centres/radii, closures meet iff
    the centre distance is at most the radius sum.
    """
    mats = [tuple(map(int, r)) for r in scan(X, Q) if r[2] != 0]
    disks = []
    for a, b, c, d in mats:
        rad = Fraction(1, abs(c))
        disks.append((Fraction(a, c), Fraction(-d, c), rad, abs(a + d) > 2))

    def meet(x, y, r1, r2):
        return abs(x - y) <= r1 + r2

    out = dict(total=0, nonpp=0, trace=0, dd=0, ii=0, cross=0)
    for c1, i1, r1, t1 in disks:
        for c2, i2, r2, t2 in disks:
            out["total"] += 1
            tf = not (t1 and t2)
            dd = meet(c1, c2, r1, r2)
            ii = meet(i1, i2, r1, r2)
            cross = meet(c1, i2, r1, r2) or meet(i1, c2, r1, r2)
            out["trace"] += tf
            out["dd"] += dd
            out["ii"] += ii
            out["cross"] += cross
            out["nonpp"] += tf or dd or ii or cross
    return out


