import math

import mpmath
import pytest
from hypothesis import given, strategies as st

from sparsespec.logspace import (LogReal, log_add, log_mul, log_norm, log_sqrt,
                                 mat2_log_apply, mat2_log_mul, mat2_to_log)

mpmath.mp.dps = 50

finite = st.floats(min_value=-1e300, max_value=1e300, allow_nan=False, allow_infinity=False)
positive = st.floats(min_value=1e-300, max_value=1e300)
logmags = st.floats(min_value=-1e6, max_value=1e6)
signs = st.sampled_from([-1, 1])


def mp_value(x: LogReal):
    if x.is_zero:
        return mpmath.mpf(0)
    return x.sign * mpmath.exp(mpmath.mpf(x.logmag) + mpmath.mpf(x.lo))


def close_log(x: LogReal, ref, rel=1e-12):
    """Relative agreement of ``x`` with an mpmath reference value."""
    if ref == 0:
        return x.is_zero
    if x.sign != (1 if ref > 0 else -1):
        return False
    return abs(x.log_abs - float(mpmath.log(abs(ref)))) <= rel * max(1.0, abs(x.log_abs))


# --- constructors and conversion ------------------------------------------

def test_zero_and_one():
    assert LogReal.zero().is_zero
    assert LogReal.zero().log_abs == -math.inf
    assert LogReal.one().to_real() == 1.0
    assert LogReal.from_real(0.0).is_zero


def test_sign_validation():
    with pytest.raises(ValueError):
        LogReal(2, 0.0)
    with pytest.raises(ValueError):
        LogReal.from_real(math.inf)
    with pytest.raises(ValueError):
        LogReal.from_real(math.nan)


@given(positive)
def test_round_trip(v):
    assert abs(LogReal.from_real(v).to_real() - v) <= 1e-14 * v


@given(finite)
def test_round_trip_signed(v):
    back = LogReal.from_real(v).to_real()
    assert abs(back - v) <= 1e-14 * abs(v)


def test_to_real_overflow():
    big = LogReal.from_log(1000.0)
    assert not big.is_representable()
    with pytest.raises(OverflowError):
        big.to_real()


def test_huge_centres_are_exact_logs():
    # exp(n^n) for n = 10 has log magnitude 1e10, far outside double range
    x = LogReal.from_log(float(10 ** 10))
    assert x.log_abs == 1e10
    assert not x.is_representable()


# --- multiplication --------------------------------------------------------

def test_mul_examples():
    six = LogReal.from_log(math.log(2)) * LogReal.from_log(math.log(3))
    assert six.sign == 1
    assert six.log_abs == pytest.approx(math.log(6), rel=1e-15)
    assert (LogReal.zero() * LogReal.from_log(1e9)).is_zero
    assert (LogReal.from_log(256.0) * LogReal.from_log(256.0)).log_abs == 512.0


@pytest.mark.parametrize("a, b", [(256.0, 256.0), (1e10, -3.5), (-700.0, 709.5), (1e15, 1e15 + 2.0)])
def test_mul_against_extended_precision(a, b):
    got = LogReal.from_log(a) * LogReal.from_log(b, -1)
    ref = -mpmath.exp(mpmath.mpf(a) + mpmath.mpf(b))
    assert close_log(got, ref, 1e-15)


@given(st.tuples(logmags, signs), st.tuples(logmags, signs), st.tuples(logmags, signs))
def test_mul_associative(x, y, z):
    a, b, c = (LogReal.from_log(m, s) for m, s in (x, y, z))
    left, right = (a * b) * c, a * (b * c)
    assert left.sign == right.sign
    assert abs(left.log_abs - right.log_abs) <= 1e-13 * max(1.0, abs(left.log_abs))


@given(finite, finite)
def test_mul_matches_float(x, y):
    prod = x * y
    if prod == 0.0 or not math.isfinite(prod) or abs(prod) < 1e-290:
        return
    got = (LogReal.from_real(x) * LogReal.from_real(y)).to_real()
    assert abs(got - prod) <= 1e-12 * abs(prod)


def test_pow_and_division():
    x = LogReal.from_log(3.0, -1)
    assert (x ** 2).sign == 1 and (x ** 2).log_abs == 6.0
    assert (x ** 3).sign == -1
    with pytest.raises(ValueError):
        x ** 0.5
    assert (LogReal.from_real(8.0) / 2.0).to_real() == pytest.approx(4.0, rel=1e-15)
    with pytest.raises(ZeroDivisionError):
        LogReal.one() / LogReal.zero()
    assert log_sqrt(LogReal.from_real(9.0)).to_real() == pytest.approx(3.0, rel=1e-15)


# --- addition --------------------------------------------------------------

def test_add_examples():
    two = LogReal.from_log(0.0) + LogReal.from_log(0.0)
    assert two.log_abs == pytest.approx(math.log(2), rel=1e-15)
    big = LogReal.from_log(700.0) + LogReal.from_log(0.0)
    ref = mpmath.mpf(700) + mpmath.log1p(mpmath.exp(-700))
    assert big.log_abs == float(ref) == 700.0


def test_exact_cancellation_is_flagged_zero():
    z = LogReal.from_log(5.0) + LogReal.from_log(5.0, -1)
    assert z.is_zero
    assert z.flagged


def test_near_cancellation_flagged():
    a = LogReal.from_log(5.0)
    b = LogReal.from_log(5.0 + 1e-14, -1)
    assert (a + b).flagged
    assert not (LogReal.from_log(5.0) + LogReal.from_log(4.0, -1)).flagged


def test_flag_propagates_through_products():
    z = LogReal.from_log(5.0 + 1e-14) - LogReal.from_log(5.0)
    assert (z * 3.0).flagged
    assert (z + 1.0).flagged


@given(st.tuples(logmags, signs), st.tuples(logmags, signs))
def test_add_commutes(x, y):
    a, b = LogReal.from_log(*x), LogReal.from_log(*y)
    s1, s2 = a + b, b + a
    assert s1.sign == s2.sign
    if not s1.is_zero:
        assert s1.log_abs == s2.log_abs


@given(st.floats(-500, 500), st.floats(-500, 500), st.floats(0, 50))
def test_add_monotone_same_sign(a, b, bump):
    base = LogReal.from_log(a) + LogReal.from_log(b)
    grown = LogReal.from_log(a + bump) + LogReal.from_log(b)
    assert grown.log_abs >= base.log_abs


@given(st.tuples(st.floats(-2000, 2000), signs), st.tuples(st.floats(-2000, 2000), signs))
def test_add_against_extended_precision(x, y):
    a, b = LogReal.from_log(*x), LogReal.from_log(*y)
    got = a + b
    ref = mp_value(a) + mp_value(b)
    if got.flagged:
        return
    # opposite signs lose relative accuracy in proportion to the cancellation
    scale = max(abs(mp_value(a)), abs(mp_value(b)))
    cond = float(scale / abs(ref)) if ref != 0 else math.inf
    tol = 1e-14 * max(1.0, cond)
    assert abs(mp_value(got) - ref) <= tol * abs(ref) + 1e-300


@given(finite, finite)
def test_add_matches_float(x, y):
    total = x + y
    if not math.isfinite(total):
        return
    got = LogReal.from_real(x) + LogReal.from_real(y)
    # the float sum is itself rounded; compare with the exact sum
    exact = mpmath.mpf(x) + mpmath.mpf(y)
    if exact == 0:
        assert got.is_zero
        return
    cond = max(abs(x), abs(y)) / abs(float(exact)) if float(exact) != 0 else math.inf
    assert abs(mp_value(got) - exact) <= 1e-13 * max(1.0, cond) * abs(exact)


# --- vectors and matrices --------------------------------------------------

def test_norm():
    assert log_norm((LogReal.from_real(3.0), LogReal.from_real(-4.0))).to_real() == pytest.approx(5.0)
    huge = log_norm((LogReal.from_log(1e6), LogReal.from_log(1e6)))
    assert huge.log_abs == pytest.approx(1e6 + 0.5 * math.log(2), rel=1e-15)


def test_mat_apply_examples():
    v = (LogReal.from_real(0.3), LogReal.from_real(-2.0))
    ident = mat2_to_log([[1.0, 0.0], [0.0, 1.0]])
    out = mat2_log_apply(ident, v)
    assert out[0].to_real() == pytest.approx(0.3) and out[1].to_real() == pytest.approx(-2.0)
    shear = mat2_to_log([[1.0, 7.5], [0.0, 1.0]])
    out = mat2_log_apply(shear, (LogReal.one(), LogReal.zero()))
    assert out[0].to_real() == 1.0 and out[1].is_zero


entry = st.tuples(st.floats(-300, 300), signs)


@given(st.lists(entry, min_size=6, max_size=6))
def test_mat_apply_extended_precision(raw):
    vals = [LogReal.from_log(m, s) for m, s in raw]
    M = ((vals[0], vals[1]), (vals[2], vals[3]))
    v = (vals[4], vals[5])
    out = mat2_log_apply(M, v)
    for i in range(2):
        p1 = mp_value(M[i][0]) * mp_value(v[0])
        p2 = mp_value(M[i][1]) * mp_value(v[1])
        ref = p1 + p2
        if out[i].flagged:
            continue
        cond = float(max(abs(p1), abs(p2)) / abs(ref))
        assert abs(mp_value(out[i]) - ref) <= 1e-12 * max(1.0, cond) * abs(ref)


def test_mat_mul_matches_float():
    a = [[1.5, -2.0], [0.25, 3.0]]
    b = [[0.5, 4.0], [-1.0, 2.0]]
    prod = mat2_log_mul(mat2_to_log(a), mat2_to_log(b))
    ref = [[sum(a[i][k] * b[k][j] for k in range(2)) for j in range(2)] for i in range(2)]
    for i in range(2):
        for j in range(2):
            assert prod[i][j].to_real() == pytest.approx(ref[i][j], rel=1e-14)


def test_ordering():
    assert LogReal.from_log(10.0, -1) < LogReal.zero() < LogReal.from_log(-10.0)
    assert LogReal.from_log(2.0) > 7.0
    assert LogReal.from_log(1e9) >= LogReal.from_log(1e9)
