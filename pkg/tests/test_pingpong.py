from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from sl2free.enumeration import BallSpec, SampleSeed, ball_array, sample_uniform
from sl2free.exact_arith import DomainError, QComplex
from sl2free.mat2 import Mat2, inverse
from sl2free.pingpong import (
    CZeroError,
    HalfDisk,
    Verdict,
    certify_tuple,
    check_disc_mapping,
    check_e_to_b,
    closed_disjoint,
    disk,
    disk_inv,
    is_ping_pong_pair,
    separated_trace,
)
from sl2free.relations import find_relation

A1 = Mat2(5, 1, 4, 1)
A2 = Mat2(12, -5, 5, -2)
F = Fraction


def test_disks():
    assert disk(A1) == HalfDisk(F(5, 4), F(1, 4))
    assert disk_inv(A1) == HalfDisk(F(-1, 4), F(1, 4))
    assert disk(A2) == HalfDisk(F(12, 5), F(1, 5))
    assert disk_inv(A2).center == F(2, 5)
    with pytest.raises(CZeroError):
        disk(Mat2(1, 1, 0, 1))
    assert issubclass(CZeroError, DomainError)


def test_closed_disjoint_and_tangency():
    D = HalfDisk(F(0), F(1, 2))
    tangent = HalfDisk(F(1), F(1, 2))
    assert not closed_disjoint(D, tangent)
    eps = F(1, 10**9)
    assert closed_disjoint(D, HalfDisk(F(1), F(1, 2) - eps))
    assert not closed_disjoint(D, HalfDisk(F(1), F(1, 2) + eps))
    assert closed_disjoint(HalfDisk(F(0), F(1, 2) - eps), tangent)


def test_separated_trace():
    assert separated_trace(Mat2(1, 1, 1, 2))
    assert not separated_trace(Mat2(0, -1, 1, 0))
    assert not separated_trace(Mat2(1, 0, 1, 1))  # parabolic, tangent disks


def test_ping_pong_examples():
    assert is_ping_pong_pair(A1, A2)
    assert not is_ping_pong_pair(A1, A1)
    assert not is_ping_pong_pair(A1, inverse(A1))


def test_certify_examples():
    rep = certify_tuple([A1, A2])
    assert rep.verdict is Verdict.CERTIFIED and len(rep.witness) == 4
    assert [D.center for D in rep.witness] == [F(5, 4), F(-1, 4), F(12, 5), F(2, 5)]
    sanov = certify_tuple([Mat2(1, 2, 0, 1), Mat2(1, 0, 2, 1)])
    assert sanov.verdict is Verdict.C_ZERO_FAILURE and sanov.index == 0
    rep = certify_tuple([Mat2(0, -1, 1, -1)])
    assert rep.verdict is Verdict.TRACE_FAILURE and rep.index == 0
    rep = certify_tuple([A1, A2, A1])
    assert rep.verdict is Verdict.PAIR_FAILURE and rep.pair == (0, 2)
    assert set(rep.which) == {"DD", "DinvDinv"}
    d = rep.to_dict()
    assert d["failing_pair"] == {"i": 0, "j": 2, "which": rep.which}
    with pytest.raises(DomainError):
        certify_tuple([])


HYPERBOLIC = [Mat2(*map(int, r)) for r in ball_array(BallSpec(10, require_c_nonzero=True)) if abs(r[0] + r[3]) > 2]
NONZERO_C = [Mat2(*map(int, r)) for r in ball_array(BallSpec(10, require_c_nonzero=True))]
points = st.builds(
    QComplex,
    st.fractions(min_value=-6, max_value=6, max_denominator=16),
    st.fractions(min_value=F(1, 16), max_value=3, max_denominator=16),
)


@settings(max_examples=400)
@given(st.sampled_from(NONZERO_C), st.sampled_from(NONZERO_C))
def test_pair_symmetry(A, B):
    p = is_ping_pong_pair(A, B)
    assert p == is_ping_pong_pair(B, A)
    assert p == is_ping_pong_pair(inverse(A), inverse(B))


@settings(max_examples=400)
@given(st.sampled_from(NONZERO_C), points)
def test_e_to_b(A, z):
    assert check_e_to_b(A, z)


def test_e_to_b_example():
    assert check_e_to_b(Mat2(1, 1, 1, 2), QComplex(0, 1))
    assert check_e_to_b(Mat2(1, 0, 1, 1), QComplex(F(-1), F(1, 2)))  # |cz + d| < 1


@settings(max_examples=400)
@given(st.sampled_from(HYPERBOLIC), points)
def test_disc_mapping(A, z):
    assert check_disc_mapping(A, z)


def test_certified_pairs_have_no_short_relation():
    mats = sample_uniform(BallSpec(60, require_c_nonzero=True), 400, SampleSeed(1, 0))
    seen = 0
    for A, B in zip(mats[0::2], mats[1::2]):
        if certify_tuple([A, B]).certified:
            seen += 1
            assert not find_relation([A, B], 8).found
    assert seen > 100
