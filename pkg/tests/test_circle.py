import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from annulusdyn import NearRationalError, make_denjoy, make_rigid_rotation
from annulusdyn.circle import (interval_length, is_near_rational,
                               rotation_number_estimate, truncation_index)

from conftest import GOLDEN


def test_rigid_identity():
    F = make_rigid_rotation(0.0)
    assert F.eval(0.3) == 0.3


def test_rigid_translation_values():
    F = make_rigid_rotation(1.0 / 3.0)
    assert F.eval(0.5) == pytest.approx(0.8333333333333333, abs=1e-15)
    assert make_rigid_rotation(0.25).eval(1.5) == 1.75


def test_rigid_threefold_composition_shifts_deck():
    F = make_rigid_rotation(1.0 / 3.0)
    x = F.eval(F.eval(F.eval(0.1)))
    assert x == pytest.approx(1.1, abs=1e-15)


def test_rigid_rational_recognition():
    assert make_rigid_rotation(1.0 / 3.0).rational.denominator == 3
    assert make_rigid_rotation(0.5).rational == pytest.approx(0.5)
    # an 8-digit decimal of an irrational is not near any small rational
    assert make_rigid_rotation(0.41421356).rational is None


def test_rotation_estimate_rigid():
    F = make_rigid_rotation(1.0 / 3.0)
    assert abs(F.rotation_estimate(0.7, 300) - 1.0 / 3.0) < 1e-12
    assert make_rigid_rotation(0.0).rotation_estimate(5.5, 10) == 0.0


def test_rotation_estimate_module_alias():
    F = make_rigid_rotation(0.2)
    assert rotation_number_estimate(F, 0.0, 10) == pytest.approx(0.2, abs=1e-14)


def test_denjoy_guard_rejects_rationals():
    with pytest.raises(NearRationalError):
        make_denjoy(1.0 / 3.0, 1e-6)
    with pytest.raises(NearRationalError):
        make_denjoy(0.5 + 1e-14, 1e-6)


def test_denjoy_rotation_estimate(golden_denjoy):
    est = golden_denjoy.rotation_estimate(0.123, 100000)
    assert abs(est - GOLDEN) < 1e-4


def test_denjoy_monotone(golden_denjoy):
    rng = np.random.default_rng(0)
    xs = np.sort(rng.uniform(-2.0, 2.0, 10000))
    vals = golden_denjoy.eval(xs)
    assert np.all(np.diff(vals) > 0.0)


def test_denjoy_deck_law(golden_denjoy):
    rng = np.random.default_rng(1)
    xs = rng.uniform(-3.0, 3.0, 5000)
    err = np.abs(golden_denjoy.eval(xs + 1.0) - golden_denjoy.eval(xs) - 1.0)
    assert err.max() < 1e-12


def test_denjoy_inverse_roundtrip(golden_denjoy):
    rng = np.random.default_rng(2)
    xs = rng.uniform(-2.0, 2.0, 5000)
    err = np.abs(golden_denjoy.inverse(golden_denjoy.eval(xs)) - xs)
    assert err.max() < 1e-12


def test_denjoy_semiconjugacy(golden_denjoy):
    rng = np.random.default_rng(3)
    xs = rng.uniform(-2.0, 2.0, 1000)
    drift = golden_denjoy.collapse(golden_denjoy.eval(xs)) \
        - golden_denjoy.collapse(xs) - GOLDEN
    frac = np.abs(drift - np.round(drift))
    assert frac.max() < 1e-8


def test_denjoy_interval_identification_exact(golden_denjoy):
    lo0, hi0 = golden_denjoy.interval(0)
    lo1, hi1 = golden_denjoy.interval(1)
    assert golden_denjoy.eval(lo0) == lo1
    assert golden_denjoy.eval(hi0) == hi1
    # interior maps affinely: midpoint to midpoint
    mid = golden_denjoy.eval(0.5 * (lo0 + hi0))
    assert abs(mid - 0.5 * (lo1 + hi1)) < 1e-12


def test_denjoy_interval_lengths_follow_law(golden_denjoy):
    for i in (-3, -1, 0, 2, 5):
        lo, hi = golden_denjoy.interval(i)
        assert hi - lo == pytest.approx(interval_length(i), rel=1e-12)


def test_interval_length_law_sums_to_half():
    n = 200000
    total = sum(interval_length(i) for i in range(-n, n + 1))
    assert abs(total - 0.5) < 1e-5


def test_truncation_index_controls_tail():
    for tol in (1e-3, 1e-5):
        n = truncation_index(tol)
        assert 2.0 / (3.0 * (n + 2)) < tol


def test_denjoy_no_periodic_points(golden_denjoy):
    rng = np.random.default_rng(7)
    xs = rng.uniform(0.0, 1.0, 1000)
    for q in range(1, 13):
        ys = xs.copy()
        for _ in range(q):
            ys = golden_denjoy.eval(ys)
        d = ys - xs
        frac = np.abs(d - np.round(d))
        assert frac.min() > 0.01  # measured margin 0.034 for the golden mean


def test_g_rigid_closed_form():
    F = make_rigid_rotation(0.5)
    assert F.g(0.25) == pytest.approx(0.5, abs=1e-15)
    assert F.g(0.0) == 0.0
    # zeros exactly on the periodic orbit of 0
    Fq = make_rigid_rotation(1.0 / 3.0)
    assert Fq.g(0.0) == 0.0
    assert Fq.g(1.0 / 6.0) == pytest.approx(0.5, abs=1e-12)


def test_g_rigid_irrational_is_zero():
    F = make_rigid_rotation(0.41421356)
    assert F.g(0.123) == 0.0


def test_g_denjoy_zero_set(golden_denjoy):
    # zero exactly on the minimal set, positive inside inserted intervals
    assert golden_denjoy.g(golden_denjoy.minimal_point()) == 0.0
    center = golden_denjoy.gap_center()
    assert golden_denjoy.g(center) == pytest.approx(0.5, abs=1e-12)
    lo, hi = golden_denjoy.interval(0)
    assert golden_denjoy.g(lo) == 0.0
    assert golden_denjoy.g(hi) == 0.0


def test_g_denjoy_scaling_law(golden_denjoy):
    theta = golden_denjoy.gap_center()
    g0 = golden_denjoy.g(theta)
    x = theta
    for i in range(1, 6):
        x = golden_denjoy.eval(x)
        assert golden_denjoy.g(x % 1.0) == pytest.approx(g0 / i, rel=1e-9)


def test_g_denjoy_partial_sums_diverge(golden_denjoy):
    theta = golden_denjoy.gap_center()
    total_half = 0.0
    x = theta
    n_half, n_full = 5000, 10000
    for i in range(n_half):
        total_half += golden_denjoy.g(x % 1.0)
        x = golden_denjoy.eval(x)
    total_full = total_half
    for i in range(n_half, n_full):
        total_full += golden_denjoy.g(x % 1.0)
        x = golden_denjoy.eval(x)
    assert total_half > 2.0
    assert total_full > total_half  # still increasing (harmonic growth)


@given(st.floats(-5.0, 5.0), st.floats(1e-6, 0.999))
@settings(max_examples=50, deadline=None)
def test_rigid_lift_laws_property(x, alpha):
    F = make_rigid_rotation(alpha)
    assert F.eval(x) == x + alpha
    assert abs(F.eval(x + 1.0) - F.eval(x) - 1.0) < 1e-12


def test_near_rational_guard_thresholds():
    assert is_near_rational(1.0 / 3.0, 1e-6)
    assert not is_near_rational(GOLDEN, 1e-6)
    assert not is_near_rational(math.sqrt(2.0) - 1.0, 1e-6)
