"""Closed-form lower bounds for the zero-energy solution and the
divergence certificate that rules out a zero-energy L^2 solution.

Everything here is evaluated in the log domain.  The certificate can only
inspect finitely many terms, so its positive verdict is
``"diverging-prefix"``: the sequence grows over the trailing window of
stored terms.  It never claims the limit itself.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import List

from .logspace import LogReal
from .mat2 import gram_smallest_eig
from .potential import Bump, InsufficientData, SparsePotential

__all__ = [
    "bump_low_bound",
    "log_bump_low_bound",
    "gronwall_envelope",
    "cn_lower_bound",
    "gap_norm_lower_bound",
    "theorem_sequence",
    "ratio_divergence_check",
    "CertificateRecord",
    "CertificateReport",
    "certify_zero_energy",
    "DIVERGING",
    "INCONCLUSIVE",
]

DIVERGING = "diverging-prefix"
INCONCLUSIVE = "inconclusive"

_LOG2 = math.log(2.0)
_LOG4 = math.log(4.0)


def _bump_exponent(b: Bump) -> float:
    # h (4 a^3 + 3 a) / 3
    a = b.half_width
    return b.height_bound * (4.0 * a ** 3 + 3.0 * a) / 3.0


def log_bump_low_bound(b: Bump) -> LogReal:
    """log of ``exp(-h(4a^3 + 3a)/3) / (2 sqrt(2a^2 + 1))``."""
    a = b.half_width
    return LogReal.from_log(-_LOG2 - 0.5 * math.log1p(2.0 * a * a) - _bump_exponent(b))


def bump_low_bound(b: Bump) -> float:
    """Lower bound for the smallest singular value of the zero-energy bump
    propagator, from the height bound and half width alone."""
    return math.exp(log_bump_low_bound(b).log_abs)


def gronwall_envelope(b: Bump, x_rel: float) -> float:
    """Upper envelope ``exp(h (s + s^3/3))`` for ``|u(s)|^2`` and ``|v(s)|^2``."""
    if not 0.0 <= x_rel <= b.width * (1 + 1e-15):
        raise ValueError(f"offset {x_rel!r} outside [0, {b.width}]")
    return math.exp(b.height_bound * (x_rel + x_rel ** 3 / 3.0))


def _require(p: SparsePotential, needed: int, what: str):
    if len(p.bumps) < needed:
        raise InsufficientData(f"{what} needs {needed} bumps, potential has {len(p.bumps)}")


def _log_sq_plus_two(x: LogReal) -> LogReal:
    return x * x + 2.0


def cn_lower_bound(p: SparsePotential, n: int) -> LogReal:
    """Lower bound on ``|c_n|`` for every unit initial vector:

    ``2^-n prod_m (L_{m-1}^2 + 2)^(-1/2) (2a_m^2 + 1)^(-1/2) exp(-h_m (4a_m^3 + 3a_m)/3)``.
    """
    _require(p, n, "cn_lower_bound")
    acc = LogReal.one()
    for m in range(1, n + 1):
        b = p.bumps[m - 1]
        shear = _log_sq_plus_two(p.gap(m - 1)) ** -0.5
        acc = acc * shear * log_bump_low_bound(b)
    return acc


def gap_norm_lower_bound(p: SparsePotential, n: int, cn_bound: LogReal = None) -> LogReal:
    """Lower bound on ``int_{J_n} f^2`` from the Gram eigenvalue and ``|c_n|``.

    For ``L_n >= 2`` the Gram eigenvalue is bounded below by ``L_n / 16``; for
    shorter gaps the exact smallest eigenvalue is used.
    """
    _require(p, n + 1, "gap_norm_lower_bound")
    if cn_bound is None:
        cn_bound = cn_lower_bound(p, n)
    length = p.gap(n)
    if length >= 2.0:
        lam = length / 16.0
    else:
        lam = LogReal.from_real(gram_smallest_eig(length.to_real()))
    return lam * cn_bound * cn_bound


def theorem_sequence(p: SparsePotential, n: int) -> LogReal:
    """``S_n = L_n 4^-n prod(L_{m-1}^2 + 2)^-1 prod(2a_m^2 + 1)^-1 exp(-(2/3) sum h_m (4a_m^3 + 3a_m))``."""
    _require(p, n + 1, "theorem_sequence")
    acc = p.gap(n) * LogReal.from_log(-n * _LOG4)
    for m in range(1, n + 1):
        b = p.bumps[m - 1]
        a = b.half_width
        acc = acc / _log_sq_plus_two(p.gap(m - 1))
        acc = acc * LogReal.from_log(-math.log1p(2.0 * a * a) - 2.0 * _bump_exponent(b))
    return acc


def ratio_divergence_check(n: int, p_exp: float) -> LogReal:
    """``x_{n+1} (prod_{m<=n} x_m)^-p`` for ``x_m = exp(m^m)``, i.e. the value
    ``exp((n+1)^(n+1) - p sum_{m<=n} m^m)``."""
    if not 1 <= n <= 64:
        raise ValueError("n must lie in [1, 64]")
    if p_exp <= 0:
        raise ValueError("exponent must be positive")
    total = sum(m ** m for m in range(1, n + 1))
    return LogReal.from_log(float((n + 1) ** (n + 1)) - p_exp * float(total))


# ---------------------------------------------------------------------------
# certificate

@dataclass
class CertificateRecord:
    n: int
    log_seq_value: LogReal
    log_cn_bound: LogReal
    log_gap_norm_bound: LogReal

    def row(self) -> dict:
        return {
            "n": self.n,
            "log_S_n": self.log_seq_value.log_abs,
            "log_cn_bound": self.log_cn_bound.log_abs,
            "log_gap_norm_bound": self.log_gap_norm_bound.log_abs,
        }


@dataclass
class CertificateReport:
    records: List[CertificateRecord] = field(default_factory=list)
    verdict: str = INCONCLUSIVE
    window: int = 4
    margin: float = 0.0
    name: str = ""

    @property
    def flagged(self) -> bool:
        return any(r.log_seq_value.flagged or r.log_cn_bound.flagged for r in self.records)

    @property
    def log_values(self) -> list:
        return [r.log_seq_value.log_abs for r in self.records]

    def to_dict(self) -> dict:
        return {
            "potential": self.name,
            "verdict": self.verdict,
            "window": self.window,
            "margin": self.margin,
            "flagged": self.flagged,
            "claim": ("zero is not an eigenvalue (prefix evidence)"
                      if self.verdict == DIVERGING else "no conclusion"),
            "records": [r.row() for r in self.records],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# potential={self.name}\n# verdict={self.verdict}\n"
                  f"# window={self.window}\n# margin={self.margin!r}\n")
        w = csv.DictWriter(buf, fieldnames=["n", "log_S_n", "log_cn_bound", "log_gap_norm_bound"],
                           lineterminator="\n")
        w.writeheader()
        for r in self.records:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.row().items()})
        return buf.getvalue()


def _verdict(values: list, window: int, margin: float) -> str:
    if len(values) < window:
        return INCONCLUSIVE
    tail = values[-window:]
    rising = all(b > a for a, b in zip(tail, tail[1:]))
    return DIVERGING if rising and tail[-1] > margin else INCONCLUSIVE


def certify_zero_energy(p: SparsePotential, n_max: int, window: int = 4,
                        margin: float = 0.0) -> CertificateReport:
    """Records ``n = 1..n_max`` of the divergence sequence and the bounds behind it.

    ``margin`` is compared with ``log S_n`` at the last record.
    """
    if n_max < 5:
        raise ValueError("n_max must be at least 5")
    if window < 2:
        raise ValueError("window must be at least 2")
    _require(p, n_max + 1, "certify_zero_energy")
    p.require_structure(n_max + 1)
    report = CertificateReport(window=window, margin=margin, name=p.name)
    for n in range(1, n_max + 1):
        cb = cn_lower_bound(p, n)
        report.records.append(CertificateRecord(
            n, theorem_sequence(p, n), cb, gap_norm_lower_bound(p, n, cb)))
    # a flagged value came out of a near-cancellation and cannot be trusted
    report.verdict = INCONCLUSIVE if report.flagged else _verdict(report.log_values, window, margin)
    return report
