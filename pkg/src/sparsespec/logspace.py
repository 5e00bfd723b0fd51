"""Signed extended-range scalars stored as natural-log magnitudes.

Gap lengths such as ``exp(4**4) - exp(3**3) - 1`` and the products of
transfer matrices across them do not fit in a double.  A ``LogReal`` keeps
``sign`` and ``log|value|``; the log magnitude is carried as an unevaluated
sum ``logmag + lo`` (double-double) so that products of many factors and
round trips through ``from_real``/``to_real`` keep full double precision.

Subtracting nearly equal magnitudes cannot be done reliably in any finite
format.  Such results are returned with ``flagged=True``, and the flag
propagates through every later operation that consumes them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

__all__ = [
    "CANCELLATION_TOL",
    "LogReal",
    "log_mul",
    "log_add",
    "log_sub",
    "log_div",
    "log_sqrt",
    "log_norm",
    "mat2_log_apply",
    "mat2_log_mul",
    "mat2_to_log",
]

# Opposite-sign sums whose log magnitudes differ by less than this are
# reported as catastrophic cancellation.
CANCELLATION_TOL = 1e-13


def _two_sum(a: float, b: float) -> Tuple[float, float]:
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _split(a: float) -> Tuple[float, float]:
    c = 134217729.0 * a
    big = c - (c - a)
    return big, a - big


def _two_prod(a: float, b: float) -> Tuple[float, float]:
    """Dekker's exact product: ``a*b == p + e``."""
    p = a * b
    if not math.isfinite(p) or abs(a) > 1e290 or abs(b) > 1e290:
        return p, 0.0
    ah, al = _split(a)
    bh, bl = _split(b)
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


def _renorm(hi: float, lo: float) -> Tuple[float, float]:
    if not math.isfinite(hi):
        return hi, 0.0
    s = hi + lo
    return s, lo - (s - hi)


@dataclass(frozen=True, slots=True)
class LogReal:
    """``sign * exp(logmag + lo)``; ``sign == 0`` is exactly zero."""

    sign: int
    logmag: float = 0.0
    lo: float = 0.0
    flagged: bool = False

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or 1, got {self.sign!r}")
        if self.sign != 0 and math.isnan(self.logmag):
            raise ValueError("log magnitude is NaN")

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls, flagged: bool = False) -> "LogReal":
        return cls(0, 0.0, 0.0, flagged)

    @classmethod
    def one(cls) -> "LogReal":
        return cls(1, 0.0)

    @classmethod
    def from_log(cls, logmag: float, sign: int = 1) -> "LogReal":
        """Value ``sign * exp(logmag)`` without evaluating the exponential."""
        if sign == 0:
            return cls.zero()
        return cls(1 if sign > 0 else -1, float(logmag))

    @classmethod
    def from_real(cls, v: float) -> "LogReal":
        v = float(v)
        if v == 0.0:
            return cls.zero()
        if not math.isfinite(v):
            raise ValueError(f"cannot represent non-finite value {v!r}")
        a = abs(v)
        hi = math.log(a)
        try:
            e = math.exp(hi)
        except OverflowError:
            e = math.inf
        # exp(hi) is deterministic, so storing the residual makes to_real exact
        lo = (a - e) / e if math.isfinite(e) and e > 0.0 else 0.0
        return cls(1 if v > 0 else -1, hi, lo)

    # -- conversion -------------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return self.sign == 0

    @property
    def log_abs(self) -> float:
        """Natural log of ``|value|`` (``-inf`` for zero)."""
        if self.sign == 0:
            return -math.inf
        return self.logmag + self.lo

    def to_real(self) -> float:
        """Convert to a float; raises ``OverflowError`` when out of range."""
        if self.sign == 0:
            return 0.0
        try:
            e = math.exp(self.logmag)
        except OverflowError:
            raise OverflowError(
                f"exp({self.logmag:.6g}) is not representable as a float"
            ) from None
        return self.sign * (e + e * math.expm1(self.lo))

    def is_representable(self) -> bool:
        return self.sign == 0 or self.log_abs < 709.0

    def __float__(self) -> float:
        return self.to_real()

    def __repr__(self) -> str:
        if self.sign == 0:
            body = "0"
        else:
            body = f"{'+' if self.sign > 0 else '-'}exp({self.log_abs!r})"
        return f"LogReal({body}{', flagged' if self.flagged else ''})"

    # -- arithmetic -------------------------------------------------------
    def __mul__(self, other):
        return log_mul(self, _coerce(other))

    __rmul__ = __mul__

    def __add__(self, other):
        return log_add(self, _coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return log_sub(self, _coerce(other))

    def __rsub__(self, other):
        return log_sub(_coerce(other), self)

    def __truediv__(self, other):
        return log_div(self, _coerce(other))

    def __rtruediv__(self, other):
        return log_div(_coerce(other), self)

    def __neg__(self) -> "LogReal":
        return LogReal(-self.sign, self.logmag, self.lo, self.flagged)

    def __abs__(self) -> "LogReal":
        return LogReal(abs(self.sign), self.logmag, self.lo, self.flagged)

    def __pow__(self, p: float) -> "LogReal":
        if self.sign == 0:
            if p <= 0:
                raise ZeroDivisionError("zero to a non-positive power")
            return self
        if self.sign < 0 and p != int(p):
            raise ValueError("fractional power of a negative value")
        sign = 1 if self.sign > 0 or int(p) % 2 == 0 else -1
        hi, err = _two_prod(self.logmag, float(p))
        hi, lo = _renorm(hi, err + self.lo * p)
        return LogReal(sign, hi, lo, self.flagged)

    # signed ordering
    def _key(self):
        if self.sign == 0:
            return (0, 0.0)
        return (self.sign, self.sign * self.log_abs)

    def __lt__(self, other):
        return self._key() < _coerce(other)._key()

    def __le__(self, other):
        return self._key() <= _coerce(other)._key()

    def __gt__(self, other):
        return self._key() > _coerce(other)._key()

    def __ge__(self, other):
        return self._key() >= _coerce(other)._key()


def _coerce(x) -> LogReal:
    if isinstance(x, LogReal):
        return x
    return LogReal.from_real(x)


def log_mul(a: LogReal, b: LogReal) -> LogReal:
    flagged = a.flagged or b.flagged
    if a.sign == 0 or b.sign == 0:
        return LogReal.zero(flagged)
    hi, err = _two_sum(a.logmag, b.logmag)
    hi, lo = _renorm(hi, err + a.lo + b.lo)
    return LogReal(a.sign * b.sign, hi, lo, flagged)


def log_div(a: LogReal, b: LogReal) -> LogReal:
    if b.sign == 0:
        raise ZeroDivisionError("LogReal division by zero")
    return log_mul(a, LogReal(b.sign, -b.logmag, -b.lo, b.flagged))


def log_add(a: LogReal, b: LogReal) -> LogReal:
    """Sum via log-sum-exp (same signs) or log-diff-exp (opposite signs)."""
    flagged = a.flagged or b.flagged
    if a.sign == 0:
        return LogReal(b.sign, b.logmag, b.lo, flagged)
    if b.sign == 0:
        return LogReal(a.sign, a.logmag, a.lo, flagged)
    d = (a.logmag - b.logmag) + (a.lo - b.lo)
    if d < 0.0 or (d == 0.0 and a.sign < b.sign):
        a, b = b, a
        d = -d
    if math.isinf(a.logmag) or math.isnan(d):
        # magnitudes beyond double range: the larger one wins outright
        return LogReal(a.sign, a.logmag, a.lo, flagged)
    if a.sign == b.sign:
        inc = math.log1p(math.exp(-d))
    else:
        if d < CANCELLATION_TOL:
            if d == 0.0:
                return LogReal.zero(True)
            flagged = True
        inc = math.log(-math.expm1(-d))
    hi, err = _two_sum(a.logmag, inc)
    hi, lo = _renorm(hi, err + a.lo)
    return LogReal(a.sign, hi, lo, flagged)


def log_sub(a: LogReal, b: LogReal) -> LogReal:
    return log_add(a, -b)


def log_sqrt(a: LogReal) -> LogReal:
    if a.sign < 0:
        raise ValueError("square root of a negative LogReal")
    if a.sign == 0:
        return a
    return LogReal(1, a.logmag / 2, a.lo / 2, a.flagged)


def log_norm(v: Sequence[LogReal]) -> LogReal:
    """Euclidean norm of a vector of LogReal entries."""
    acc = LogReal.zero()
    for x in v:
        acc = log_add(acc, log_mul(abs(x), abs(x)))
    return log_sqrt(acc)


LogVec2 = Tuple[LogReal, LogReal]
LogMat2 = Tuple[LogVec2, LogVec2]


def mat2_log_apply(M: LogMat2, v: LogVec2) -> LogVec2:
    (m11, m12), (m21, m22) = M
    v1, v2 = v
    return (
        log_add(log_mul(m11, v1), log_mul(m12, v2)),
        log_add(log_mul(m21, v1), log_mul(m22, v2)),
    )


def mat2_log_mul(A: LogMat2, B: LogMat2) -> LogMat2:
    (b11, b12), (b21, b22) = B
    c1 = mat2_log_apply(A, (b11, b21))
    c2 = mat2_log_apply(A, (b12, b22))
    return ((c1[0], c2[0]), (c1[1], c2[1]))


def mat2_to_log(m) -> LogMat2:
    """Lift a float 2x2 (nested sequence or array) into the log domain."""
    return (
        (LogReal.from_real(m[0][0]), LogReal.from_real(m[0][1])),
        (LogReal.from_real(m[1][0]), LogReal.from_real(m[1][1])),
    )
