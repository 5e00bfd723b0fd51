"""2x2 real matrices, the smallest-singular-value functional and the
closed-form lower bounds built on it."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .logspace import _two_prod

__all__ = [
    "Mat2",
    "Vec2",
    "as_mat2",
    "det",
    "low",
    "low_brute_force",
    "lower_bound_shear",
    "lower_bound_unit_det",
    "quadratic_sup",
    "gram_smallest_eig",
    "gram_eig_floor",
]


@dataclass(frozen=True, slots=True)
class Vec2:
    v1: float
    v2: float

    def norm(self) -> float:
        return math.hypot(self.v1, self.v2)

    def __iter__(self):
        yield self.v1
        yield self.v2


@dataclass(frozen=True, slots=True)
class Mat2:
    a11: float
    a12: float
    a21: float
    a22: float

    @classmethod
    def identity(cls) -> "Mat2":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def shear(cls, length: float) -> "Mat2":
        """Zero-energy free propagator ``[[1, L], [0, 1]]``."""
        return cls(1.0, float(length), 0.0, 1.0)

    @classmethod
    def from_array(cls, a) -> "Mat2":
        a = np.asarray(a, dtype=float)
        if a.shape != (2, 2):
            raise ValueError(f"expected a 2x2 array, got shape {a.shape}")
        return cls(float(a[0, 0]), float(a[0, 1]), float(a[1, 0]), float(a[1, 1]))

    def to_array(self) -> np.ndarray:
        return np.array([[self.a11, self.a12], [self.a21, self.a22]])

    def rows(self):
        return ((self.a11, self.a12), (self.a21, self.a22))

    def det(self) -> float:
        return det(self)

    @property
    def T(self) -> "Mat2":
        return Mat2(self.a11, self.a21, self.a12, self.a22)

    def frobenius_sq(self) -> float:
        return self.a11 ** 2 + self.a12 ** 2 + self.a21 ** 2 + self.a22 ** 2

    def __matmul__(self, other):
        if isinstance(other, Vec2):
            return Vec2(self.a11 * other.v1 + self.a12 * other.v2,
                        self.a21 * other.v1 + self.a22 * other.v2)
        if isinstance(other, Mat2):
            return Mat2(self.a11 * other.a11 + self.a12 * other.a21,
                        self.a11 * other.a12 + self.a12 * other.a22,
                        self.a21 * other.a11 + self.a22 * other.a21,
                        self.a21 * other.a12 + self.a22 * other.a22)
        return NotImplemented


def as_mat2(m) -> Mat2:
    if isinstance(m, Mat2):
        return m
    return Mat2.from_array(m)


def det(m) -> float:
    """Determinant with both products formed exactly (Dekker), then summed.

    The only rounding is in combining the four exact pieces, so the result
    is accurate even when ``a11*a22`` and ``a12*a21`` nearly cancel.
    """
    m = as_mat2(m)
    p1, e1 = _two_prod(m.a11, m.a22)
    p2, e2 = _two_prod(m.a12, m.a21)
    return math.fsum((p1, -p2, e1, -e2))


def low(m) -> float:
    """Smallest singular value ``inf_{|u|=1} |M u|``.

    With ``t = |M|_F^2`` and ``d = det(M)^2`` the eigenvalues of ``M^T M``
    are ``(t +- sqrt((t - 2 sqrt d)(t + 2 sqrt d))) / 2``.  Both factors
    under the root are sums of squares of entry combinations, so they are
    formed without cancellation; the small eigenvalue is then taken as
    ``d / xi_+`` instead of a difference.  Singular matrices give 0.
    """
    m = as_mat2(m)
    dt = det(m)
    sg = 1.0 if dt >= 0.0 else -1.0
    # t - 2|det| and t + 2|det| as exact-form sums of squares
    p = math.hypot(m.a11 - sg * m.a22, m.a12 + sg * m.a21)
    q = math.hypot(m.a11 + sg * m.a22, m.a12 - sg * m.a21)
    smax = 0.5 * (p + q)
    if smax == 0.0:
        return 0.0
    return abs(dt) / smax


def low_brute_force(mats, n_angles: int = 1_000_000) -> np.ndarray:
    """Minimum of ``|M (cos t, sin t)|`` over an equispaced angle grid on [0, 2pi)."""
    return _kernels.circle_min_norm(mats, n_angles)


def lower_bound_shear(length: float) -> float:
    """``1/sqrt(L^2 + 2)``, a lower bound for ``low([[1, L], [0, 1]])``."""
    if length < 0:
        raise ValueError("shear length must be non-negative")
    return 1.0 / math.sqrt(length * length + 2.0)


def lower_bound_unit_det(m, tol: float = 1e-9) -> float:
    """``1/|M|_F``, valid as a lower bound of ``low(M)`` when ``det M = 1``."""
    m = as_mat2(m)
    d = det(m)
    if abs(d - 1.0) > tol:
        raise ValueError(f"determinant {d!r} deviates from 1 by more than {tol}")
    return 1.0 / math.sqrt(m.frobenius_sq())


def quadratic_sup(a: float, b: float) -> float:
    # sup over unit w of |<w, [[ab, b^2], [-a^2, -ab]] w>|
    return 0.5 * (a * a + b * b)


def gram_smallest_eig(length: float) -> float:
    """Smallest eigenvalue of the gap Gram matrix ``[[L, L^2/2], [L^2/2, L^3/3]]``.

    That matrix represents ``int_0^L (c1 + c2 x)^2 dx`` as a quadratic form in
    ``(c1, c2)``.  Its determinant is ``L^4/12``; the small eigenvalue is
    computed as ``det / lambda_+``.
    """
    if length <= 0:
        raise ValueError("gap length must be positive")
    L = float(length)
    a, b, c = L, 0.5 * L * L, L ** 3 / 3.0
    lam_plus = 0.5 * ((a + c) + math.hypot(a - c, 2.0 * b))
    return (L ** 4 / 12.0) / lam_plus


def gram_eig_floor(length: float) -> float:
    """``L^4 / (4 (L^3 + 3L))``, the closed-form floor under ``gram_smallest_eig``."""
    L = float(length)
    return L ** 4 / (4.0 * (L ** 3 + 3.0 * L))
