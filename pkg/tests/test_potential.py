import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sparsespec.logspace import LogReal
from sparsespec.potential import (Bump, InsufficientData, PotentialError, PotentialFormatError,
                                  SparsePotential, cell_averages, evaluate, evaluate_array,
                                  example_potential, load_potential, potential_from_dict,
                                  single_bump_potential, validate)


def two_bumps(x1, x2, a1=0.5, a2=0.5):
    return SparsePotential((Bump(x1, a1, 1.0), Bump(x2, a2, 1.0)), "pair")


def test_bump_validation():
    with pytest.raises(PotentialError):
        Bump(5.0, -0.1, 1.0)
    with pytest.raises(PotentialError):
        Bump(5.0, 0.5, -1.0)
    with pytest.raises(PotentialError):
        Bump(-1.0, 0.5, 1.0)
    with pytest.raises(PotentialError, match="exceeds height bound"):
        Bump(5.0, 0.5, 1.0, (0.5, 1.5))
    b = Bump(5.0, 0.5, 2.0, (1.0, -2.0))
    assert b.value_at_offset(-0.25) == 1.0 and b.value_at_offset(0.25) == -2.0
    assert b.min_value() == -2.0


def test_example_constants():
    one = example_potential(1)
    assert len(one) == 1
    assert one.bumps[0].center.log_abs == 1.0
    assert one.bumps[0].height_bound == pytest.approx(math.e)
    three = example_potential(3)
    assert [b.center.log_abs for b in three.bumps] == [1.0, 4.0, 27.0]
    assert [b.height_bound for b in three.bumps] == pytest.approx([math.e, math.e ** 2, math.e ** 3])
    four = example_potential(4)
    assert four.bumps[3].center.log_abs == 256.0
    assert four.bumps[3].center.is_representable()
    assert not example_potential(5).bumps[4].center.is_representable()
    for bad in (0, 65):
        with pytest.raises(PotentialError):
            example_potential(bad)


def test_gaps_identity_in_log_space():
    p = example_potential(8)
    for n in range(len(p) - 1):
        lhs = p.bumps[n + 1].left
        rhs = p.bumps[n].right + p.gap(n + 1)
        assert abs(lhs.log_abs - rhs.log_abs) <= 1e-12 * max(1.0, abs(lhs.log_abs))
    assert p.gap(0).to_real() == pytest.approx(math.e - 0.5)


@pytest.mark.parametrize("k", range(2, 13))
def test_example_validates(k):
    report = validate(example_potential(k))
    assert report.passed, report.lines()
    assert "prefix-consistent" in report.condition("separation").message


def test_example_five_ratios():
    report = validate(example_potential(5))
    # (x_{n+1} - x_n) / 2 for consecutive example centres
    ref = [math.log(math.exp(4) - math.e) - math.log(2)]
    assert report.ratios[0] == pytest.approx(ref[0], rel=1e-12)
    assert report.ratios[-1] == pytest.approx(3125.0 - math.log(2), rel=1e-12)


def test_overlap_reported():
    report = validate(two_bumps(5.0, 5.8))
    assert not report.passed
    assert not report.structural_ok
    assert report.condition("disjoint").message == "overlap at index 1"


def test_non_monotone_centres():
    report = validate(two_bumps(8.0, 5.0))
    assert report.condition("ordering").message == "centres not increasing at index 1"


def test_single_bump_insufficient():
    with pytest.raises(InsufficientData, match="insufficient data"):
        validate(single_bump_potential())


def test_dense_prefix_fails_separation():
    bumps = [Bump(float(3 * k), 0.5, 1.0) for k in range(1, 6)]
    report = validate(SparsePotential(tuple(bumps)))
    assert report.structural_ok
    assert not report.condition("separation").passed


def test_evaluate_conventions():
    p = example_potential(3)
    x1 = math.e
    assert evaluate(p, x1) == pytest.approx(math.e)
    # edges built from the stored centre so that they sit exactly on the support
    c1 = p.bumps[0].center
    assert evaluate(p, c1 + 0.5) == pytest.approx(math.e)
    assert evaluate(p, c1 - 0.5) == pytest.approx(math.e)
    assert evaluate(p, (c1 + 0.5) * (1 + 1e-12)) == 0.0
    assert evaluate(p, 10.0) == 0.0
    assert evaluate(p, LogReal.from_log(27.0)) == pytest.approx(math.e ** 3)
    with pytest.raises(ValueError):
        evaluate(p, -1.0)


def test_evaluate_dense_samples():
    p = example_potential(3)
    gaps = np.linspace(0, math.e - 0.5 - 1e-9, 500)
    assert np.all(evaluate_array(p, gaps) == 0.0)
    inside = math.exp(4) + np.linspace(-0.5, 0.5, 501)
    vals = evaluate_array(p, inside)
    assert np.all(vals <= p.bumps[1].height_bound) and np.all(vals > 0)


@given(st.floats(0.0, 20.0))
def test_evaluate_array_matches_scalar(x):
    b = Bump(5.0, 0.75, 3.0, (1.0, -3.0, 2.0))
    p = SparsePotential((b, Bump(12.0, 1.0, 2.0)))
    assert evaluate_array(p, [x])[0] == evaluate(p, x)


def test_cell_averages_exact_for_pieces():
    p = SparsePotential((Bump(5.0, 0.5, 2.0, (1.0, 2.0)),))
    edges = np.array([4.0, 4.5, 4.75, 5.0, 5.25, 6.0])
    avg = cell_averages(p, edges)
    assert avg == pytest.approx([0.0, 1.0, 1.0, 2.0, (0.25 * 2.0) / 0.75])


def test_json_round_trip(tmp_path):
    p = SparsePotential((Bump(5.0, 0.5, 1.0), Bump(LogReal.from_log(27.0), 0.25, 3.0, (1.0, -2.0))),
                        "mixed")
    path = tmp_path / "p.json"
    path.write_text(p.to_json())
    q = load_potential(path)
    assert q.name == "mixed"
    for a, b in zip(p.bumps, q.bumps):
        assert a.center.log_abs == pytest.approx(b.center.log_abs, rel=1e-15)
        assert (a.half_width, a.height_bound, a.profile) == (b.half_width, b.height_bound, b.profile)


def test_json_errors(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"bumps": [')
    with pytest.raises(json.JSONDecodeError):
        load_potential(path)
    with pytest.raises(PotentialFormatError):
        potential_from_dict({"bumps": [{"half_width": 1.0}]})
    with pytest.raises(PotentialFormatError):
        potential_from_dict([1, 2])
    with pytest.raises(PotentialError) as info:
        potential_from_dict({"bumps": [{"log_center": 1.0, "half_width": -1.0, "height": 1.0}]})
    assert not isinstance(info.value, PotentialFormatError)
