"""Random desk-scale fixtures shared by several test modules."""
import math

import numpy as np

from sparsespec.logspace import LogReal
from sparsespec.potential import Bump, SparsePotential


def random_bump(rng, center=5.0, max_half_width=1.5, max_height=4.0, signed=True):
    a = float(rng.uniform(0.05, max_half_width))
    h = float(rng.uniform(0.0, max_height))
    pieces = int(rng.integers(1, 6))
    if pieces == 1:
        return Bump(center, a, h)
    lo = -h if signed else 0.0
    return Bump(center, a, h, tuple(rng.uniform(lo, h, pieces)))


def random_potential(rng, max_bumps=8, max_gap=15.0, **bump_kw):
    """Up to ``max_bumps`` disjoint bumps with gaps in ``[0.05, max_gap]``."""
    n = int(rng.integers(1, max_bumps + 1))
    edge = 0.0
    bumps = []
    for _ in range(n):
        proto = random_bump(rng, **bump_kw)
        edge += float(rng.uniform(0.05, max_gap))
        center = edge + proto.half_width
        bumps.append(Bump(LogReal.from_real(center), proto.half_width,
                          proto.height_bound, proto.profile))
        edge = center + proto.half_width
    return SparsePotential(tuple(bumps), "random")


def boundary_angles(count=16):
    """``count`` angles spread over ``(-pi/2, pi/2]``."""
    return [-math.pi / 2 + math.pi * (k + 1) / count for k in range(count)]


def log_violation(bound: LogReal, exact: LogReal, rel=1e-9) -> bool:
    """True when the bound exceeds the exact value beyond ``rel`` in log terms."""
    if bound.is_zero:
        return False
    if exact.is_zero:
        return True
    return bound.log_abs > exact.log_abs + rel * max(1.0, abs(exact.log_abs))
