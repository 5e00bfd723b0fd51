"""Transfer matrices for ``-f'' + V f = E f`` and the coefficient recursion.

A propagator maps ``(f, f')`` at the left end of an interval to ``(f, f')``
at its right end.  Over a free gap of length ``L`` it has a closed form
(a shear at ``E = 0``); over a bump it is either a closed form (constant
profile) or the fixed-step RK4 transfer matrix.  Entries are ``LogReal``
so that propagators across astronomically long gaps stay representable.

Starting from ``c_0 = (cos t, sin t)``, the value/derivative pair at the
right edge of bump ``n`` is ``c_n = R_n W_{n-1} c_{n-1}``; the pair at the
left edge of bump ``n`` is ``d_n = W_{n-1} c_{n-1}``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from . import _kernels
from .logspace import (LogReal, log_norm, mat2_log_apply, mat2_log_mul,
                       mat2_to_log)
from .mat2 import Mat2
from .potential import Bump, SparsePotential

__all__ = [
    "PropagatorE",
    "PropagationState",
    "VopTrajectory",
    "default_steps",
    "free_propagator",
    "bump_propagator",
    "bump_closed_form",
    "vop_coordinates",
    "propagate",
    "total_propagator",
    "gap_norm_exact",
]

MIN_STEPS = 16
VOP_MIN_DEFAULT_STEPS = 1024
_LOG2 = math.log(2.0)


@dataclass(frozen=True)
class PropagatorE:
    energy: float
    entries: tuple  # ((m11, m12), (m21, m22)) of LogReal

    @classmethod
    def from_matrix(cls, energy: float, m) -> "PropagatorE":
        if isinstance(m, Mat2):
            m = m.rows()
        return cls(float(energy), mat2_to_log(m))

    @property
    def matrix(self) -> Mat2:
        """Float view; raises ``OverflowError`` when entries exceed double range."""
        (a, b), (c, d) = self.entries
        return Mat2(a.to_real(), b.to_real(), c.to_real(), d.to_real())

    def to_array(self) -> np.ndarray:
        return self.matrix.to_array()

    def det(self) -> float:
        return self.matrix.det()

    @property
    def flagged(self) -> bool:
        return any(x.flagged for row in self.entries for x in row)

    def __matmul__(self, other: "PropagatorE") -> "PropagatorE":
        if self.energy != other.energy:
            raise ValueError("cannot compose propagators at different energies")
        return PropagatorE(self.energy, mat2_log_mul(self.entries, other.entries))

    def apply(self, v):
        return mat2_log_apply(self.entries, v)


def _cosh_sinh(z: LogReal):
    """``(cosh z, sinh z)`` for ``z >= 0`` given in the log domain."""
    if z.sign == 0:
        return LogReal.one(), LogReal.zero()
    zf = z.to_real()  # OverflowError when z itself exceeds double range
    if zf < 20.0:
        return LogReal.from_real(math.cosh(zf)), LogReal.from_real(math.sinh(zf))
    tail = math.exp(-2.0 * zf)
    return (LogReal.from_log(zf - _LOG2 + math.log1p(tail)),
            LogReal.from_log(zf - _LOG2 + math.log1p(-tail)))


def _const_propagator(q: float, width, energy: float) -> PropagatorE:
    """Closed form of the transfer matrix of ``f'' = q f`` over ``width``."""
    width = width if isinstance(width, LogReal) else LogReal.from_real(width)
    if q == 0.0:
        return PropagatorE(energy, ((LogReal.one(), width), (LogReal.zero(), LogReal.one())))
    k = math.sqrt(abs(q))
    kl = LogReal.from_real(k)
    if q > 0.0:
        ch, sh = _cosh_sinh(width * k)
        return PropagatorE(energy, ((ch, sh / kl), (sh * kl, ch)))
    if not width.is_representable() or width.to_real() * k > 1e15:
        raise OverflowError("oscillatory phase over this length is not resolvable in double precision")
    z = k * width.to_real()
    c, s = math.cos(z), math.sin(z)
    return PropagatorE.from_matrix(energy, ((c, s / k), (-k * s, c)))


def free_propagator(length, energy: float = 0.0) -> PropagatorE:
    """Propagator over a gap where ``V = 0``: shear, cosh/sinh or cos/sin."""
    length = length if isinstance(length, LogReal) else LogReal.from_real(length)
    if length.sign <= 0:
        raise ValueError("gap length must be positive")
    return _const_propagator(-float(energy), length, float(energy))


def default_steps(b: Bump, energy: float) -> int:
    """Default RK4 step count across a bump.

    RK4 loses about ``(k dt)^6 / 72`` of determinant per step on an
    oscillatory piece, so the mesh keeps ``k dt`` below roughly 1/80 to hold
    the determinant at 1 to 1e-10 over the whole bump.
    """
    return max(256, math.ceil(160.0 * b.half_width * math.sqrt(b.height_bound + abs(energy) + 1.0)))


def bump_closed_form(b: Bump, energy: float = 0.0) -> PropagatorE:
    if not b.is_constant:
        raise ValueError("closed form needs a constant profile")
    return _const_propagator(b.height_bound - energy, b.width, float(energy))


def bump_propagator(b: Bump, energy: float = 0.0, steps: Optional[int] = None,
                    method: str = "auto") -> PropagatorE:
    """Transfer matrix across a bump, columns ``(phi, phi')`` and ``(psi, psi')``.

    ``method="auto"`` uses the closed form for constant profiles and RK4
    otherwise; ``"rk4"`` always integrates.  ``steps`` is the total number
    of RK4 steps, spread evenly over the profile pieces so that no step
    straddles a discontinuity.
    """
    if not math.isfinite(energy):
        raise ValueError("energy must be finite")
    if method not in ("auto", "rk4", "closed"):
        raise ValueError(f"unknown method {method!r}")
    if steps is None:
        steps = default_steps(b, energy)
    if steps < MIN_STEPS:
        raise ValueError(f"steps must be at least {MIN_STEPS}, got {steps}")
    if method == "closed" or (method == "auto" and b.is_constant):
        return bump_closed_form(b, energy)
    vals = b.piece_values
    per_piece = max(1, math.ceil(steps / vals.size))
    m = _kernels.rk4_transfer(vals - energy, b.width / vals.size, per_piece)
    if not np.all(np.isfinite(m)):
        raise OverflowError("RK4 transfer matrix overflowed; bump too strong for float integration")
    return PropagatorE.from_matrix(energy, m)


@dataclass(frozen=True)
class VopTrajectory:
    """Samples of the coordinates ``u = (u1, u2)``, ``v = (v1, v2)`` of the
    bump solutions in the free basis ``(1, s)``, ``s`` = offset from the
    left edge."""

    offsets: np.ndarray
    coords: np.ndarray  # (n, 2, 2): [[u1, v1], [u2, v2]]

    @property
    def u(self) -> np.ndarray:
        return self.coords[:, :, 0]

    @property
    def v(self) -> np.ndarray:
        return self.coords[:, :, 1]

    def wronskian(self) -> np.ndarray:
        c = self.coords
        return c[:, 0, 0] * c[:, 1, 1] - c[:, 0, 1] * c[:, 1, 0]

    def final_matrix(self) -> Mat2:
        return Mat2.from_array(self.coords[-1])


def vop_coordinates(b: Bump, energy: float = 0.0, steps: Optional[int] = None) -> VopTrajectory:
    """Integrate ``d/ds [u v] = -V [[s, s^2], [-1, -s]] [u v]`` across a bump.

    Only the zero-energy system is supported.  At the right edge the bump
    transfer matrix factors as ``shear(2a) @ [[u1, v1], [u2, v2]]``.
    """
    if energy != 0.0:
        raise ValueError("variation-of-parameters coordinates are defined at E = 0 only")
    if steps is None:
        # the coefficient matrix grows like s^2, so this system wants a finer
        # mesh than the plain transfer matrix
        steps = max(VOP_MIN_DEFAULT_STEPS, 4 * default_steps(b, 0.0))
    if steps < MIN_STEPS:
        raise ValueError(f"steps must be at least {MIN_STEPS}, got {steps}")
    vals = b.piece_values
    per_piece = max(1, math.ceil(steps / vals.size))
    s, y = _kernels.rk4_vop(vals, b.width / vals.size, per_piece)
    return VopTrajectory(s, y)


# ---------------------------------------------------------------------------
# recursion

@dataclass(frozen=True)
class PropagationState:
    theta: float
    coeffs: tuple            # c_n as (LogReal, LogReal): (f, f') at x_n + a_n
    interval_index: int
    energy: float
    entry: Optional[tuple] = None  # d_n: (f, f') at x_n - a_n

    @property
    def flagged(self) -> bool:
        vals = self.coeffs + (self.entry or ())
        return any(x.flagged for x in vals)

    def norm(self) -> LogReal:
        return log_norm(self.coeffs)

    def log_norm(self) -> float:
        return self.norm().log_abs


def propagate(p: SparsePotential, theta: float, energy: float = 0.0,
              n_max: Optional[int] = None, steps: Optional[int] = None,
              bump_props: Optional[list] = None) -> List[PropagationState]:
    """States ``c_0 .. c_{n_max}`` of the solution with ``(f, f')(0) = (cos t, sin t)``.

    ``bump_props`` may carry precomputed bump propagators (one per bump, at
    this energy) when sweeping many angles.
    """
    if n_max is None:
        n_max = len(p.bumps)
    if n_max > len(p.bumps):
        raise ValueError(f"n_max={n_max} exceeds the {len(p.bumps)} stored bumps")
    p.require_structure(n_max)
    c = (LogReal.from_real(math.cos(theta)), LogReal.from_real(math.sin(theta)))
    states = [PropagationState(theta, c, 0, energy)]
    for n in range(1, n_max + 1):
        w = free_propagator(p.gap(n - 1), energy)
        d = w.apply(c)
        r = bump_props[n - 1] if bump_props is not None else \
            bump_propagator(p.bumps[n - 1], energy, steps)
        c = r.apply(d)
        states.append(PropagationState(theta, c, n, energy, d))
    return states


def total_propagator(p: SparsePotential, energy: float, n_max: Optional[int] = None,
                     steps: Optional[int] = None) -> PropagatorE:
    """Propagator from ``x = 0`` to the right edge of bump ``n_max``."""
    if n_max is None:
        n_max = len(p.bumps)
    p.require_structure(n_max)
    t = PropagatorE.from_matrix(energy, Mat2.identity())
    for n in range(1, n_max + 1):
        t = free_propagator(p.gap(n - 1), energy) @ t
        t = bump_propagator(p.bumps[n - 1], energy, steps) @ t
    return t


def gap_norm_exact(length, c) -> LogReal:
    """``int_0^L (c1 + c2 x)^2 dx`` for the zero-energy gap solution.

    Written as ``L ((c1 + c2 L/2)^2 + (c2 L)^2 / 12)`` so the only possible
    cancellation is in ``c1 + c2 L / 2``.
    """
    length = length if isinstance(length, LogReal) else LogReal.from_real(length)
    if length.sign <= 0:
        raise ValueError("gap length must be positive")
    c1, c2 = (x if isinstance(x, LogReal) else LogReal.from_real(x) for x in c)
    mid = c1 + c2 * length * 0.5
    slope = c2 * length
    return length * (mid * mid + slope * slope / 12.0)
