"""Negative spectrum of the self-adjoint realisations ``H_t``.

``H_t`` is ``-d^2/dx^2 + V`` on the half line with the boundary condition
``f(0) sin t - f'(0) cos t = 0``, ``t`` in ``(-pi/2, pi/2]``.  This module
provides:

* the quadratic form ``f(0) f'(0) + int (f'^2 + V f^2)`` on sampled test
  functions (a negative value proves that ``H_t`` has a negative eigenvalue);
* the family ``f_lam(x) = exp(lam / (x - 1))`` on ``[0, 1)`` whose form
  changes sign at ``lam = (1 + sqrt 3) / 2``;
* a shooting method that finds, for ``E < 0``, the angle ``t(E)`` for which
  ``E`` is an eigenvalue;
* a dense finite-difference eigensolver used as an independent oracle.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence

import numpy as np
from scipy import integrate, optimize
from scipy.linalg import eigh_tridiagonal

from .logspace import LogReal
from .potential import SparsePotential, cell_averages, evaluate_array
from .transfer import total_propagator

__all__ = [
    "normalize_theta",
    "BoundaryCondition",
    "TestFunction",
    "flambda",
    "form_closed",
    "gradient_integral_closed",
    "quadratic_form",
    "Threshold",
    "negative_form_threshold",
    "random_test_function",
    "ScanRow",
    "theta_scan",
    "sign_change_brackets",
    "ShootResult",
    "shoot_negative_eigenvalue",
    "DenseSpectrum",
    "dense_spectrum",
    "thread_count",
]

FORM_TOL = 1e-9
HALF_PI = 0.5 * math.pi


def thread_count() -> int:
    raw = os.environ.get("SPARSESPEC_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def normalize_theta(theta: float) -> float:
    """Representative of ``theta mod pi`` in ``(-pi/2, pi/2]``."""
    t = math.remainder(float(theta), math.pi)
    if t <= -HALF_PI:
        t += math.pi
    return t


@dataclass(frozen=True)
class BoundaryCondition:
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", normalize_theta(self.theta))

    def residual(self, f0: float, df0: float) -> float:
        return f0 * math.sin(self.theta) - df0 * math.cos(self.theta)

    def satisfied_by(self, f0: float, df0: float, tol: float = 1e-8) -> bool:
        return abs(self.residual(f0, df0)) <= tol * max(1.0, math.hypot(f0, df0))


@dataclass(frozen=True)
class TestFunction:
    """Samples of a real test function and its derivative on a grid."""

    x: np.ndarray
    f: np.ndarray
    df: np.ndarray

    @property
    def f0(self) -> float:
        return float(self.f[0])

    @property
    def df0(self) -> float:
        return float(self.df[0])

    def reconstruction_error(self) -> float:
        """Max deviation between ``f`` and ``f(0) + cumulative trapezoid of f'``."""
        rebuilt = self.f[0] + integrate.cumulative_trapezoid(self.df, self.x, initial=0.0)
        return float(np.max(np.abs(rebuilt - self.f)))


# ---------------------------------------------------------------------------
# f_lambda

def form_closed(lam: float) -> float:
    """Form of ``f_lam`` when ``V f_lam = 0``: ``(-2l^2 + 2l + 1) exp(-2l) / (4l)``."""
    return (-2.0 * lam * lam + 2.0 * lam + 1.0) * math.exp(-2.0 * lam) / (4.0 * lam)


def gradient_integral_closed(lam: float) -> float:
    """``int_0^1 |f_lam'|^2 = (2l^2 + 2l + 1) exp(-2l) / (4l)``."""
    return (2.0 * lam * lam + 2.0 * lam + 1.0) * math.exp(-2.0 * lam) / (4.0 * lam)


def flambda(lam: float, grid_points: int = 4097, tail_points: int = 8) -> TestFunction:
    """Sample ``f_lam`` and its derivative.

    The mesh is geometric in ``1 - x`` down to where ``f_lam`` drops below
    ``exp(-700)``, then a few zero samples past ``x = 1`` close the support.
    """
    if lam < 0.5:
        raise ValueError("lambda must be at least 1/2")
    if grid_points < 256:
        raise ValueError("grid_points must be at least 256")
    n_geo = grid_points - tail_points - 1
    t = np.geomspace(1.0, lam / 700.0, n_geo)
    x = np.concatenate([1.0 - t, [1.0], 1.0 + 0.1 * np.arange(1, tail_points + 1) / tail_points])
    f = np.zeros_like(x)
    df = np.zeros_like(x)
    f[:n_geo] = np.exp(-lam / t)
    df[:n_geo] = -lam / (t * t) * f[:n_geo]
    f[np.abs(f) < 1e-300] = 0.0
    df[np.abs(df) < 1e-300] = 0.0
    return TestFunction(x, f, df)


def quadratic_form(p: SparsePotential, f: TestFunction, bc) -> float:
    """``f(0) f'(0) + int (f'^2 + V f^2)`` by composite Simpson on the samples."""
    if not isinstance(bc, BoundaryCondition):
        bc = BoundaryCondition(bc)
    if not bc.satisfied_by(f.f0, f.df0):
        raise ValueError(
            f"test function violates the boundary condition at theta={bc.theta!r} "
            f"(residual {bc.residual(f.f0, f.df0):.3g})")
    if f.f[-1] != 0.0 or f.df[-1] != 0.0:
        raise ValueError("test function support touches the end of the grid")
    v = evaluate_array(p, f.x)
    integrand = f.df * f.df + v * f.f * f.f
    return f.f0 * f.df0 + float(integrate.simpson(integrand, x=f.x))


class Threshold(NamedTuple):
    lam: float
    theta: float


def negative_form_threshold() -> Threshold:
    """Positive root of ``-2l^2 + 2l + 1`` and the angle ``arctan(-root)``."""
    root = optimize.bisect(lambda l: -2.0 * l * l + 2.0 * l + 1.0, 1.0, 2.0,
                           xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    exact = (1.0 + math.sqrt(3.0)) / 2.0
    if abs(root - exact) > 1e-12:
        raise ArithmeticError(f"bisection root {root!r} disagrees with {exact!r}")
    return Threshold(root, math.atan(-root))


# ---------------------------------------------------------------------------
# randomized admissible test functions

def random_test_function(rng: np.random.Generator, theta: float, support: float,
                         n_modes: int = 6, grid_points: int = 2049) -> TestFunction:
    """Smooth ``f = g w`` on ``[0, X]`` with ``w = (1 - x/X)^4`` and
    ``g = a0 + a1 x + sum b_k sin(k pi x / X)``, chosen so that
    ``(f(0), f'(0))`` is parallel to ``(cos t, sin t)``."""
    X = float(support)
    r = rng.uniform(0.5, 2.0) * rng.choice((-1.0, 1.0))
    b = rng.normal(size=n_modes) / np.arange(1, n_modes + 1)
    k = np.arange(1, n_modes + 1) * math.pi / X
    a0 = r * math.cos(theta)
    a1 = r * math.sin(theta) - float(np.sum(b * k)) + 4.0 * a0 / X
    if grid_points % 2 == 0:
        grid_points += 1
    x = np.linspace(0.0, 1.05 * X, grid_points)
    xi = np.minimum(x, X)
    w = (1.0 - xi / X) ** 4
    dw = -4.0 / X * (1.0 - xi / X) ** 3
    phase = np.outer(xi, k)
    g = a0 + a1 * xi + np.sin(phase) @ b
    dg = a1 + np.cos(phase) @ (b * k)
    f = g * w
    df = dg * w + g * dw
    f[x >= X] = 0.0
    df[x >= X] = 0.0
    return TestFunction(x, f, df)


@dataclass(frozen=True)
class ScanRow:
    kind: str            # "theta" or "lambda"
    value: float         # theta or lambda
    theta: float
    form_value: float    # minimum over the family (theta rows) or f_lam form
    verdict: str


def _theta_row(p, theta, rng, n_random, grid_points):
    best = math.inf
    for _ in range(n_random):
        support = rng.uniform(0.5, 6.0)
        f = random_test_function(rng, theta, support, grid_points=grid_points)
        best = min(best, quadratic_form(p, f, theta))
    verdict = "nonnegative" if best >= -FORM_TOL else "negative-eigenvalue"
    return ScanRow("theta", float(theta), normalize_theta(theta), best, verdict)


def _lambda_row(p, lam, grid_points):
    theta = math.atan(-lam)
    val = quadratic_form(p, flambda(lam, max(grid_points, 256)), theta)
    verdict = "negative-eigenvalue" if val < 0.0 else "inconclusive-at-witness"
    return ScanRow("lambda", float(lam), theta, val, verdict)


def theta_scan(p: SparsePotential, thetas: Sequence[float] = (), lambdas: Sequence[float] = (),
               n_random: int = 100, seed: int = 42, grid_points: int = 2049,
               threads: Optional[int] = None) -> List[ScanRow]:
    """Evaluate the form over angles (random family) and over ``f_lam``.

    A negative value at any row is a witness for a negative eigenvalue of
    ``H_t``.  Angles in ``[0, pi/2]`` need ``V >= 0``, since that is the
    regime where the form is expected to be non-negative.
    """
    thetas = [float(t) for t in thetas]
    lambdas = [float(l) for l in lambdas]
    if any(0.0 <= t <= HALF_PI for t in thetas) and not p.is_nonnegative():
        raise ValueError("angles in [0, pi/2] require a non-negative potential")
    children = np.random.SeedSequence(seed).spawn(len(thetas))
    jobs = [(_theta_row, (p, t, np.random.default_rng(s), n_random, grid_points))
            for t, s in zip(thetas, children)]
    jobs += [(_lambda_row, (p, l, grid_points)) for l in lambdas]
    workers = min(threads or thread_count(), max(1, len(jobs)))
    if workers == 1:
        return [fn(*args) for fn, args in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, *args) for fn, args in jobs]
        return [fut.result() for fut in futures]


def sign_change_brackets(rows: Sequence[ScanRow]) -> list:
    """``(lam_prev, lam_next)`` pairs between consecutive lambda rows whose
    form values have opposite signs."""
    lam_rows = [r for r in rows if r.kind == "lambda"]
    out = []
    for a, b in zip(lam_rows, lam_rows[1:]):
        if (a.form_value < 0.0) != (b.form_value < 0.0):
            out.append((a.value, b.value))
    return out


# ---------------------------------------------------------------------------
# shooting

@dataclass(frozen=True)
class ShootResult:
    energy: float
    theta: float
    residual: float          # |a(theta)| / |(a+, a-)|
    a_plus: LogReal
    a_minus: LogReal
    growth: float            # growing-mode coefficient, same scale as decay
    decay: float             # decaying-mode coefficient at theta
    kappa: float
    n_bumps: int

    def log_profile(self, s) -> np.ndarray:
        """``log |f|`` (up to a constant) at distance ``s`` past the last bump."""
        s = np.asarray(s, dtype=float)
        vals = self.growth * np.exp(self.kappa * s) + self.decay * np.exp(-self.kappa * s)
        with np.errstate(divide="ignore"):
            return np.log(np.abs(vals))


def shoot_negative_eigenvalue(p: SparsePotential, energy: float, n_max: Optional[int] = None,
                              steps: Optional[int] = None) -> ShootResult:
    """Angle ``t(E)`` for which ``E < 0`` is an eigenvalue of ``H_t``.

    Past the last bump every solution is ``a e^{k x} + b e^{-k x}`` with
    ``k = sqrt(-E)``; ``a`` depends linearly on ``(cos t, sin t)``, so the
    decaying solution is ``t = atan2(-a+, a-)``.
    """
    if not energy < 0.0:
        raise ValueError("shooting needs a negative energy")
    n = len(p.bumps) if n_max is None else n_max
    kappa = math.sqrt(-energy)
    t = total_propagator(p, energy, n, steps)
    (t11, t12), (t21, t22) = t.entries
    a_plus = (t11 + t21 / kappa) * 0.5
    a_minus = (t12 + t22 / kappa) * 0.5
    if a_plus.is_zero and a_minus.is_zero:
        raise ArithmeticError("growing-mode coefficients both vanish")
    # scale everything by the largest entry to work in floats
    ref = max(x.log_abs for row in t.entries for x in row if not x.is_zero)

    def scaled(x: LogReal) -> float:
        return 0.0 if x.is_zero else x.sign * math.exp(x.log_abs - ref)

    n11, n12, n21, n22 = (scaled(x) for x in (t11, t12, t21, t22))
    ap, am = 0.5 * (n11 + n21 / kappa), 0.5 * (n12 + n22 / kappa)
    theta = normalize_theta(math.atan2(-ap, am))
    c, s = math.cos(theta), math.sin(theta)
    scale = math.hypot(ap, am)
    growth = (ap * c + am * s) / scale
    decay = 0.5 * ((n11 - n21 / kappa) * c + (n12 - n22 / kappa) * s) / scale
    return ShootResult(energy, theta, abs(growth), a_plus, a_minus, growth, decay, kappa, n)


# ---------------------------------------------------------------------------
# dense finite-difference oracle

@dataclass(frozen=True)
class DenseSpectrum:
    eigenvalues: np.ndarray   # lowest few
    n_negative: int
    x_max: float
    grid: int

    def nearest(self, energy: float) -> float:
        return float(self.eigenvalues[np.argmin(np.abs(self.eigenvalues - energy))])


def _last_right_edge(p: SparsePotential) -> float:
    if not p.bumps:
        return 0.0
    edge = p.bumps[-1].right
    if not edge.is_representable():
        raise OverflowError("dense oracle needs bump positions within float range")
    return edge.to_real()


def dense_spectrum(p: SparsePotential, theta: float, energy_hint: Optional[float] = None,
                   x_max: Optional[float] = None, grid: int = 1 << 14,
                   n_eigs: int = 4) -> DenseSpectrum:
    """Second-order finite differences on ``[0, X]``, Robin condition at 0
    (ghost node), Dirichlet at ``X``, cell-averaged ``V``.

    By default ``X`` leaves room for ``exp(-k (X - last edge)) < 1e-10`` with
    ``k = sqrt(-energy_hint)``.
    """
    theta = normalize_theta(theta)
    edge = _last_right_edge(p)
    if x_max is None:
        reach = 30.0
        if energy_hint is not None and energy_hint < 0:
            reach = max(reach, 23.1 / math.sqrt(-energy_hint))
        x_max = max(30.0, edge + reach)
    h = x_max / grid
    nodes = np.arange(grid) * h
    edges = np.concatenate([[0.0], nodes[1:] - h / 2, [nodes[-1] + h / 2]])
    v = cell_averages(p, edges)
    diag = 2.0 / h ** 2 + v
    off = np.full(grid - 1, -1.0 / h ** 2)
    cos_t = math.cos(theta)
    if abs(cos_t) < 1e-14:
        # Dirichlet at the origin: drop node 0
        diag, off = diag[1:], off[1:]
    else:
        tan_t = math.tan(theta)
        # ghost node f_{-1} = f_1 - 2 h tan(t) f_0, symmetrised with weight 1/2 at node 0
        diag[0] = (2.0 + 2.0 * h * tan_t) / h ** 2 + v[0]
        off[0] *= math.sqrt(2.0)
    k = min(n_eigs, diag.size)
    eigs = eigh_tridiagonal(diag, off, eigvals_only=True, select="i", select_range=(0, k - 1))
    lower = float(np.min(diag) - 2.0 * np.max(np.abs(off))) - 1.0
    negs = eigh_tridiagonal(diag, off, eigvals_only=True, select="v", select_range=(lower, 0.0))
    return DenseSpectrum(np.asarray(eigs), int(np.sum(negs < 0.0)), float(x_max), grid)
