"""Hot numeric loops.

Each kernel has a loop form (compiled with numba ``@njit`` when numba is
importable) and a pure-numpy form.  The loop form is used by default; set
``SPARSESPEC_DISABLE_JIT=1`` to force the numpy path.  Both forms compute
the same thing and are cross-checked in the test suite.

State matrices are ``[[f_a, f_b], [f'_a, f'_b]]``: two solutions of
``f'' = q f`` side by side.
"""
import math
import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

if numba is not None:
    # the bundled TBB is often too old; prefer OpenMP or the builtin pool
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

# parallel range inside jitted loops, plain range otherwise
_prange = numba.prange if numba is not None else range


def jit_disabled():
    return os.environ.get("SPARSESPEC_DISABLE_JIT", "").strip().lower() in (
        "1", "true", "yes", "on")


# ---------------------------------------------------------------------------
# loop forms

def _rk4_transfer_loop(q, piece_width, steps_per_piece):
    # classical RK4 on y' = (y2, q y1) for both columns, q constant per piece
    y11 = 1.0
    y12 = 0.0
    y21 = 0.0
    y22 = 1.0
    dt = piece_width / steps_per_piece
    half = 0.5 * dt
    for k in range(q.shape[0]):
        qq = q[k]
        for _ in range(steps_per_piece):
            # column a
            a1f = y21
            a1g = qq * y11
            a2f = y21 + half * a1g
            a2g = qq * (y11 + half * a1f)
            a3f = y21 + half * a2g
            a3g = qq * (y11 + half * a2f)
            a4f = y21 + dt * a3g
            a4g = qq * (y11 + dt * a3f)
            n11 = y11 + dt / 6.0 * (a1f + 2.0 * a2f + 2.0 * a3f + a4f)
            n21 = y21 + dt / 6.0 * (a1g + 2.0 * a2g + 2.0 * a3g + a4g)
            # column b
            b1f = y22
            b1g = qq * y12
            b2f = y22 + half * b1g
            b2g = qq * (y12 + half * b1f)
            b3f = y22 + half * b2g
            b3g = qq * (y12 + half * b2f)
            b4f = y22 + dt * b3g
            b4g = qq * (y12 + dt * b3f)
            n12 = y12 + dt / 6.0 * (b1f + 2.0 * b2f + 2.0 * b3f + b4f)
            n22 = y22 + dt / 6.0 * (b1g + 2.0 * b2g + 2.0 * b3g + b4g)
            y11 = n11
            y12 = n12
            y21 = n21
            y22 = n22
    out = np.empty((2, 2))
    out[0, 0] = y11
    out[0, 1] = y12
    out[1, 0] = y21
    out[1, 1] = y22
    return out


def _rk4_vop_loop(values, piece_width, steps_per_piece):
    # d/ds [[u1, v1], [u2, v2]] = -V [[s, s^2], [-1, -s]] [[u1, v1], [u2, v2]]
    # the two columns are independent, so each is advanced as (a, b)
    n = values.shape[0] * steps_per_piece
    s_out = np.empty(n + 1)
    y_out = np.empty((n + 1, 2, 2))
    y = np.eye(2)
    s_out[0] = 0.0
    y_out[0] = y
    dt = piece_width / steps_per_piece
    for col in range(2):
        a = y[0, col]
        b = y[1, col]
        i = 0
        for k in range(values.shape[0]):
            vv = values[k]
            s0 = k * piece_width
            for j in range(steps_per_piece):
                s = s0 + j * dt
                sm = s + 0.5 * dt
                se = s + dt
                k1a = -vv * (s * a + s * s * b)
                k1b = vv * (a + s * b)
                ta = a + 0.5 * dt * k1a
                tb = b + 0.5 * dt * k1b
                k2a = -vv * (sm * ta + sm * sm * tb)
                k2b = vv * (ta + sm * tb)
                ta = a + 0.5 * dt * k2a
                tb = b + 0.5 * dt * k2b
                k3a = -vv * (sm * ta + sm * sm * tb)
                k3b = vv * (ta + sm * tb)
                ta = a + dt * k3a
                tb = b + dt * k3b
                k4a = -vv * (se * ta + se * se * tb)
                k4b = vv * (ta + se * tb)
                a += dt / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
                b += dt / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b)
                i += 1
                s_out[i] = s0 + (j + 1) * dt
                y_out[i, 0, col] = a
                y_out[i, 1, col] = b
    return s_out, y_out


def _circle_min_norm_loop(mats, cos_t, sin_t):
    out = np.empty(mats.shape[0])
    for b in _prange(mats.shape[0]):
        a11 = mats[b, 0, 0]
        a12 = mats[b, 0, 1]
        a21 = mats[b, 1, 0]
        a22 = mats[b, 1, 1]
        best = np.inf
        for i in range(cos_t.size):
            r1 = a11 * cos_t[i] + a12 * sin_t[i]
            r2 = a21 * cos_t[i] + a22 * sin_t[i]
            val = r1 * r1 + r2 * r2
            if val < best:
                best = val
        out[b] = math.sqrt(best)
    return out


# ---------------------------------------------------------------------------
# numpy forms

def _rk4_transfer_numpy(q, piece_width, steps_per_piece):
    # RK4 applied to a constant linear system y' = A y is exactly
    # y <- P y with P the degree-4 Taylor polynomial of dt*A
    dt = piece_width / steps_per_piece
    y = np.eye(2)
    for qq in np.asarray(q, dtype=float):
        z = dt * np.array([[0.0, 1.0], [qq, 0.0]])
        z2 = z @ z
        p = np.eye(2) + z + z2 / 2.0 + (z2 @ z) / 6.0 + (z2 @ z2) / 24.0
        y = np.linalg.matrix_power(p, steps_per_piece) @ y
    return y


def _rk4_vop_numpy(values, piece_width, steps_per_piece):
    values = np.asarray(values, dtype=float)
    dt = piece_width / steps_per_piece
    n = values.size * steps_per_piece
    s_out = np.empty(n + 1)
    y_out = np.empty((n + 1, 2, 2))
    y = np.eye(2)
    s_out[0] = 0.0
    y_out[0] = y

    def rhs(vv, s, y):
        return -vv * np.array([[s, s * s], [-1.0, -s]]) @ y

    i = 0
    for k, vv in enumerate(values):
        s0 = k * piece_width
        for j in range(steps_per_piece):
            s = s0 + j * dt
            k1 = rhs(vv, s, y)
            k2 = rhs(vv, s + dt / 2, y + dt / 2 * k1)
            k3 = rhs(vv, s + dt / 2, y + dt / 2 * k2)
            k4 = rhs(vv, s + dt, y + dt * k3)
            y = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            i += 1
            s_out[i] = s0 + (j + 1) * dt
            y_out[i] = y
    return s_out, y_out


def _circle_min_norm_numpy(mats, cos_t, sin_t, chunk=1 << 18):
    mats = np.asarray(mats, dtype=float)
    out = np.empty(mats.shape[0])
    for b, m in enumerate(mats):
        best = np.inf
        for start in range(0, cos_t.size, chunk):
            c, s = cos_t[start:start + chunk], sin_t[start:start + chunk]
            r1 = m[0, 0] * c + m[0, 1] * s
            r2 = m[1, 0] * c + m[1, 1] * s
            best = min(best, float(np.min(r1 * r1 + r2 * r2)))
        out[b] = math.sqrt(best)
    return out


# ---------------------------------------------------------------------------
# dispatch

NUMPY_KERNELS = {
    "rk4_transfer": _rk4_transfer_numpy,
    "rk4_vop": _rk4_vop_numpy,
    "circle_min_norm": _circle_min_norm_numpy,
}

_jit_cache = {}


def jit_kernels():
    """numba-compiled loop kernels (compiled on first use); None without numba."""
    if numba is None:
        return None
    if not _jit_cache:
        opts = dict(cache=True, nogil=True)
        _jit_cache.update(
            rk4_transfer=numba.njit(**opts)(_rk4_transfer_loop),
            rk4_vop=numba.njit(**opts)(_rk4_vop_loop),
            circle_min_norm=numba.njit(parallel=True, **opts)(_circle_min_norm_loop),
        )
    return dict(_jit_cache)


def backend():
    return "numpy" if numba is None or jit_disabled() else "numba"


def _kernel(name):
    if backend() == "numba":
        return jit_kernels()[name]
    return NUMPY_KERNELS[name]


def rk4_transfer(q, piece_width, steps_per_piece):
    """Transfer matrix of ``f'' = q_k f`` over consecutive equal pieces."""
    q = np.ascontiguousarray(q, dtype=np.float64)
    return _kernel("rk4_transfer")(q, float(piece_width), int(steps_per_piece))


def rk4_vop(values, piece_width, steps_per_piece):
    """Variation-of-parameters coordinates sampled at every RK4 step."""
    values = np.ascontiguousarray(values, dtype=np.float64)
    return _kernel("rk4_vop")(values, float(piece_width), int(steps_per_piece))


def circle_min_norm(mats, n_angles):
    """Brute-force ``min |M (cos t, sin t)|`` over ``n_angles`` equispaced t."""
    mats = np.ascontiguousarray(np.reshape(mats, (-1, 2, 2)), dtype=np.float64)
    t = np.arange(int(n_angles)) * (2.0 * np.pi / int(n_angles))
    return _kernel("circle_min_norm")(mats, np.cos(t), np.sin(t))
