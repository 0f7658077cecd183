"""Exact ping-pong freeness certificates and counting experiments for SL2(Z)."""

__version__ = "0.1.0"

from .exact_arith import DomainError, QComplex
from .mat2 import Mat2, SubgroupSpec, SubgroupKind
from .enumeration import BallSpec, Norm, SampleSeed, count, enumerate_ball, sample_uniform
from .pingpong import certify_tuple, is_ping_pong_pair
from .relations import find_relation
