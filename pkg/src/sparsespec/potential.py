"""Sparse bump potentials.

A potential is a finite, ordered list of bumps.  Bump ``n`` sits on the
closed interval ``[x_n - a_n, x_n + a_n]`` and carries either a constant
value or a piecewise-constant profile; between bumps ``V = 0``.  Centres
are ``LogReal`` so that positions like ``exp(n**n)`` can be stored.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np

from .logspace import LogReal

__all__ = [
    "Bump",
    "SparsePotential",
    "PotentialError",
    "InsufficientData",
    "PotentialFormatError",
    "ConditionResult",
    "ValidationReport",
    "validate",
    "example_potential",
    "single_bump_potential",
    "evaluate",
    "evaluate_array",
    "cell_averages",
    "load_potential",
    "potential_from_dict",
]

MAX_EXAMPLE_BUMPS = 64
# closed supports: offsets within this relative slack of the edge count as inside,
# so an endpoint computed in the log domain lands on the bump
EDGE_SLACK = 1e-12


class PotentialError(ValueError):
    """Malformed or structurally invalid potential data."""


class PotentialFormatError(PotentialError):
    """Potential data with missing or mistyped fields."""


class InsufficientData(PotentialError):
    pass


@dataclass(frozen=True)
class Bump:
    """One bump: centre, half width, height bound and profile.

    ``profile=None`` means the constant value ``height_bound`` over the
    whole support.  Otherwise ``profile`` holds the values of equal-width
    pieces spanning the support, each bounded in modulus by
    ``height_bound``.
    """

    center: LogReal
    half_width: float
    height_bound: float
    profile: Optional[tuple] = None

    def __post_init__(self):
        if not isinstance(self.center, LogReal):
            object.__setattr__(self, "center", LogReal.from_real(self.center))
        if self.center.sign <= 0:
            raise PotentialError("bump centre must be positive")
        hw, hb = float(self.half_width), float(self.height_bound)
        if not (math.isfinite(hw) and hw > 0):
            raise PotentialError(f"half width must be positive, got {self.half_width!r}")
        if not (math.isfinite(hb) and hb >= 0):
            raise PotentialError(f"height bound must be non-negative, got {self.height_bound!r}")
        object.__setattr__(self, "half_width", hw)
        object.__setattr__(self, "height_bound", hb)
        if self.profile is not None:
            vals = tuple(float(v) for v in self.profile)
            if not vals:
                raise PotentialError("custom profile is empty")
            if not all(math.isfinite(v) for v in vals):
                raise PotentialError("custom profile has non-finite values")
            worst = max(abs(v) for v in vals)
            if worst > hb:
                raise PotentialError(
                    f"profile value {worst!r} exceeds height bound {hb!r}")
            object.__setattr__(self, "profile", vals)

    @property
    def is_constant(self) -> bool:
        return self.profile is None

    @property
    def piece_values(self) -> np.ndarray:
        if self.profile is None:
            return np.array([self.height_bound])
        return np.array(self.profile)

    @property
    def width(self) -> float:
        return 2.0 * self.half_width

    @property
    def left(self) -> LogReal:
        return self.center - self.half_width

    @property
    def right(self) -> LogReal:
        return self.center + self.half_width

    def value_at_offset(self, s: float) -> float:
        """Profile value at ``x = center + s`` for ``|s| <= half_width``."""
        if self.profile is None:
            return self.height_bound
        k = len(self.profile)
        idx = int(math.floor((s + self.half_width) / self.width * k))
        return self.profile[min(max(idx, 0), k - 1)]

    def min_value(self) -> float:
        return float(np.min(self.piece_values))


@dataclass(frozen=True)
class SparsePotential:
    bumps: tuple = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "bumps", tuple(self.bumps))

    def __len__(self) -> int:
        return len(self.bumps)

    @cached_property
    def gaps(self) -> tuple:
        """``L_0 = x_1 - a_1`` and ``L_n = x_{n+1} - x_n - a_{n+1} - a_n``."""
        out = []
        prev_right = LogReal.zero()
        for b in self.bumps:
            out.append(b.left - prev_right)
            prev_right = b.right
        return tuple(out)

    def gap(self, n: int) -> LogReal:
        return self.gaps[n]

    def truncated(self, n: int) -> "SparsePotential":
        return SparsePotential(self.bumps[:n], self.name)

    def is_nonnegative(self) -> bool:
        return all(b.min_value() >= 0.0 for b in self.bumps)

    def structural_errors(self, upto: Optional[int] = None) -> list:
        """Ordering and overlap problems among the first ``upto`` bumps."""
        bumps = self.bumps if upto is None else self.bumps[:upto]
        errors = []
        for n in range(1, len(bumps)):
            if not bumps[n].center > bumps[n - 1].center:
                errors.append(f"centres not increasing at index {n}")
        gaps = self.gaps[:len(bumps)]
        if gaps and not gaps[0] > 0:
            errors.append("first bump reaches the origin at index 0")
        for n in range(1, len(gaps)):
            if not gaps[n] > 0:
                errors.append(f"overlap at index {n}")
        return errors

    def require_structure(self, upto: Optional[int] = None) -> None:
        errors = self.structural_errors(upto)
        if errors:
            raise PotentialError("; ".join(errors))

    # serialization
    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "bumps": [
                {
                    "log_center": b.center.log_abs,
                    "half_width": b.half_width,
                    "height": b.height_bound,
                    "profile": "constant" if b.profile is None else list(b.profile),
                }
                for b in self.bumps
            ],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def potential_from_dict(data: dict) -> SparsePotential:
    if not isinstance(data, dict) or not isinstance(data.get("bumps"), list):
        raise PotentialFormatError("potential file must be an object with a 'bumps' list")
    bumps = []
    for i, item in enumerate(data["bumps"]):
        try:
            prof = item.get("profile", "constant")
            if prof == "constant":
                prof = None
            elif not isinstance(prof, list):
                raise PotentialFormatError(f"bump {i}: profile must be 'constant' or a list")
            bumps.append(Bump(LogReal.from_log(float(item["log_center"])),
                              float(item["half_width"]), float(item["height"]), prof))
        except PotentialFormatError:
            raise
        except (KeyError, TypeError, AttributeError, ValueError) as exc:
            if isinstance(exc, PotentialError):
                raise PotentialError(f"bump {i}: {exc}") from exc
            raise PotentialFormatError(f"bump {i}: missing or malformed field ({exc})") from exc
    return SparsePotential(tuple(bumps), str(data.get("name", "")))


def load_potential(path) -> SparsePotential:
    """Read a potential JSON file.  ``json.JSONDecodeError`` propagates."""
    with open(path) as fh:
        data = json.load(fh)
    return potential_from_dict(data)


# ---------------------------------------------------------------------------
# validation

@dataclass
class ConditionResult:
    name: str
    passed: bool
    index: Optional[int] = None
    message: str = ""


@dataclass
class ValidationReport:
    conditions: list = field(default_factory=list)
    ratios: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    @property
    def structural_ok(self) -> bool:
        return all(c.passed for c in self.conditions if c.name in ("ordering", "disjoint"))

    def condition(self, name: str) -> ConditionResult:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def lines(self) -> list:
        out = []
        for c in self.conditions:
            tag = "PASS" if c.passed else "FAIL"
            out.append(f"{tag} {c.name}" + (f": {c.message}" if c.message else ""))
        return out


def validate(p: SparsePotential, ratio_threshold: float = 10.0) -> ValidationReport:
    """Check the sparse-potential conditions on the stored prefix.

    The separation condition is a limit and cannot be certified from finitely
    many bumps; it is replaced by: the ratios
    ``(x_{n+1} - x_n) / (a_{n+1} + a_n + 1)`` are non-decreasing and the last
    one exceeds ``ratio_threshold``.  A pass means "prefix-consistent".
    """
    if len(p.bumps) < 2:
        raise InsufficientData("insufficient data: at least 2 bumps are needed")
    report = ValidationReport()
    bumps = p.bumps

    bad = [n for n in range(1, len(bumps)) if not bumps[n].center > bumps[n - 1].center]
    report.conditions.append(ConditionResult(
        "ordering", not bad, bad[0] if bad else None,
        f"centres not increasing at index {bad[0]}" if bad else "centres strictly increasing"))

    gaps = p.gaps
    bad = [n for n in range(len(gaps)) if not gaps[n] > 0]
    if bad:
        msg = ("first bump reaches the origin" if bad[0] == 0
               else f"overlap at index {bad[0]}")
    else:
        msg = "supports pairwise disjoint"
    report.conditions.append(ConditionResult("disjoint", not bad, bad[0] if bad else None, msg))

    ratios = []
    for n in range(len(bumps) - 1):
        sep = bumps[n + 1].center - bumps[n].center
        ratios.append(sep / (bumps[n + 1].half_width + bumps[n].half_width + 1.0))
    report.ratios = [r.log_abs if r.sign > 0 else -math.inf for r in ratios]
    drop = [n + 1 for n in range(1, len(ratios)) if ratios[n] < ratios[n - 1]]
    last = ratios[-1]
    ok = not drop and last > ratio_threshold
    if drop:
        msg = f"separation ratio decreases at index {drop[0]}"
    elif not ok:
        msg = f"last separation ratio below threshold {ratio_threshold}"
    else:
        msg = f"prefix-consistent (ratios non-decreasing, last > {ratio_threshold})"
    report.conditions.append(ConditionResult(
        "separation", ok, drop[0] if drop else (len(ratios) if not ok else None), msg))

    # the height bound is enforced when each Bump is built, and V vanishes off
    # the supports by construction
    report.conditions.append(ConditionResult("height_bound", True, None, "|V| <= h_n on every bump"))
    report.conditions.append(ConditionResult("zero_outside", True, None, "V = 0 off the supports"))
    return report


# ---------------------------------------------------------------------------
# constructors

def example_potential(n_bumps: int) -> SparsePotential:
    """Bumps of height ``e**n`` and half width 1/2 centred at ``exp(n**n)``."""
    if not 1 <= n_bumps <= MAX_EXAMPLE_BUMPS:
        raise PotentialError(f"n_bumps must lie in [1, {MAX_EXAMPLE_BUMPS}], got {n_bumps}")
    bumps = tuple(
        Bump(LogReal.from_log(float(n ** n)), 0.5, math.exp(n))
        for n in range(1, n_bumps + 1)
    )
    return SparsePotential(bumps, "example")


def single_bump_potential(center: float = 5.0, half_width: float = 0.5,
                          height: float = 1.0) -> SparsePotential:
    return SparsePotential((Bump(LogReal.from_real(center), half_width, height),),
                           "single-bump")


# ---------------------------------------------------------------------------
# evaluation

def evaluate(p: SparsePotential, x) -> float:
    """``V(x)``; supports are closed, so endpoints take the bump value."""
    x = x if isinstance(x, LogReal) else LogReal.from_real(x)
    if x.sign < 0:
        raise ValueError("V is defined on [0, inf)")
    for b in p.bumps:
        d = x - b.center
        if not d.is_representable():
            continue
        s = d.to_real()
        if abs(s) <= b.half_width * (1.0 + EDGE_SLACK):
            return b.value_at_offset(s)
    return 0.0


def _float_bumps(p: SparsePotential):
    for b in p.bumps:
        if b.center.log_abs < 700.0:
            yield b, b.center.to_real()


def evaluate_array(p: SparsePotential, xs) -> np.ndarray:
    """Vectorised ``V`` on float positions (bumps beyond float range ignored)."""
    xs = np.asarray(xs, dtype=float)
    out = np.zeros_like(xs)
    for b, c in _float_bumps(p):
        s = xs - c
        inside = np.abs(s) <= b.half_width * (1.0 + EDGE_SLACK)
        if not inside.any():
            continue
        vals = b.piece_values
        idx = np.floor((s[inside] + b.half_width) / b.width * vals.size).astype(int)
        out[inside] = vals[np.clip(idx, 0, vals.size - 1)]
    return out


def cell_averages(p: SparsePotential, edges) -> np.ndarray:
    """Mean of ``V`` over each cell ``[edges[i], edges[i+1]]`` (exact for
    piecewise-constant profiles)."""
    edges = np.asarray(edges, dtype=float)
    lo, hi = edges[:-1], edges[1:]
    acc = np.zeros(lo.size)
    for b, c in _float_bumps(p):
        vals = b.piece_values
        k = vals.size
        start = c - b.half_width
        for j, v in enumerate(vals):
            a = start + b.width * j / k
            e = start + b.width * (j + 1) / k
            overlap = np.clip(np.minimum(hi, e) - np.maximum(lo, a), 0.0, None)
            acc += v * overlap
    return acc / (hi - lo)
