import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from annulusdyn import (ItineraryViolationError, LiftPoint, OutOfDomainError,
                        build_paper_example, horseshoe_heteroclinic_chain,
                        horseshoe_symbolic_point, is_valid_chain)

from conftest import SILVER


# -- twist family -----------------------------------------------------------

def test_degenerate_parameters_translate_down():
    m = build_paper_example(0.0, 0.0)
    q = m.lift_eval(LiftPoint(0.7, 3.0))
    assert q == LiftPoint(0.7, 2.0)
    for t in (-5.0, -1.2, 0.0, 4.4, 5.0):
        assert m.lift_eval(LiftPoint(0.3, t)).t == t - 1.0


def test_level_fifteen_maps_to_fourteen(paper_map):
    for th in (0.0, 0.123, 2.0 / 3.0, 0.998):
        q = paper_map.lift_eval(LiftPoint(th, 15.0))
        assert q.t == 14.0
    m = build_paper_example(1.0 / 3.0, 1.0 / 3.0)
    assert m.lift_eval(LiftPoint(0.4, 15.0)).t == 14.0


def test_condition_c_zero_set(paper_map):
    # g vanishes exactly on (minimal set) x {10} and x {-10}
    assert paper_map.g(0.0, 10.0) == 0.0
    assert paper_map.g(paper_map.f_beta.minimal_point(), -10.0) == 0.0
    rng = np.random.default_rng(0)
    for _ in range(2000):
        th, t = rng.uniform(0, 1), rng.uniform(-16, 16)
        g = float(paper_map.g(th, t))
        assert 0.0 <= g <= 1.0
        if abs(t - 10.0) > 1e-9 and abs(t + 10.0) > 1e-9:
            # away from the two special levels, zeros need g_alpha/g_beta = 0
            if 6.0 < t < 14.0:
                assert g > 0.0 or paper_map.f_alpha.g(th) == 0.0
            elif -14.0 < t < -6.0:
                assert g > 0.0 or paper_map.f_beta.g(th) == 0.0
            else:
                assert g == 1.0


def test_condition_d_domination(paper_map):
    rng = np.random.default_rng(1)
    ths = rng.uniform(0.0, 1.0, 10000)
    tts = rng.uniform(9.0, 11.0, 10000)
    ga = paper_map.f_alpha.g(ths)
    gv = np.array([paper_map.g(th, t) for th, t in zip(ths, tts)])
    assert np.all(gv >= ga - 1e-15)
    away = np.abs(tts - 10.0) > 1e-9
    assert np.all(gv[away] > ga[away])


def test_condition_f_height_slope(paper_map):
    rng = np.random.default_rng(2)
    ths = rng.uniform(0.0, 1.0, 10000)
    tts = rng.uniform(-16.0, 16.0, 10000)
    h = 1e-5
    g1 = np.array([paper_map.g(th, t) for th, t in zip(ths, tts)])
    g2 = np.array([paper_map.g(th, t + h) for th, t in zip(ths, tts)])
    assert np.max(np.abs(g2 - g1) / h) < 0.5


def test_condition_g_isotopy_matches_lifts(paper_map):
    rng = np.random.default_rng(3)
    for _ in range(200):
        x = rng.uniform(-2.0, 2.0)
        assert abs(paper_map.phi_lift(x, rng.uniform(5.0, 40.0))
                   - paper_map.f_alpha.eval(x)) < 1e-12
        assert abs(paper_map.phi_lift(x, rng.uniform(-40.0, -5.0))
                   - paper_map.f_beta.eval(x)) < 1e-12


def test_g_zero_grid_clusters():
    m = build_paper_example(1.0 / 3.0, 1.0 / 3.0)
    ths = np.arange(4096) / 4096.0
    g = np.array([m.g(th, 10.0) for th in ths])
    small = np.nonzero(g < 1e-6)[0]
    assert len(small) > 0
    targets = np.array([0.0, 1.0 / 3.0, 2.0 / 3.0])
    for k in small:
        d = np.min(np.abs(((ths[k] - targets) + 0.5) % 1.0 - 0.5))
        assert d <= 1.0 / 4096.0
    # every target has a nearby near-zero grid point
    for tg in targets:
        d = np.min(np.abs(((ths[small] - tg) + 0.5) % 1.0 - 0.5))
        assert d <= 1.0 / 4096.0


def test_paper_inverse_roundtrip(paper_map):
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(2000):
        z = LiftPoint(rng.uniform(-2.0, 2.0), rng.uniform(-25.0, 25.0))
        w = paper_map.lift_eval(z)
        b = paper_map.lift_inverse(w)
        worst = max(worst, abs(b.x - z.x), abs(b.t - z.t))
    assert worst < 1e-9


def test_paper_inverse_deep_region(paper_map):
    q = paper_map.lift_inverse(LiftPoint(0.3, 20.0))
    assert q.t == pytest.approx(21.0, abs=1e-12)
    assert q.x == pytest.approx(paper_map.f_alpha.inverse(0.3), abs=1e-12)


def test_paper_orientation_preserving(paper_map):
    rng = np.random.default_rng(5)
    h = 1e-6
    for _ in range(100):
        z = LiftPoint(rng.uniform(0.0, 1.0), rng.uniform(-16.0, 16.0))
        f0 = paper_map.lift_eval(z)
        fx = paper_map.lift_eval(LiftPoint(z.x + h, z.t))
        ft = paper_map.lift_eval(LiftPoint(z.x, z.t + h))
        j = np.array([[(fx.x - f0.x) / h, (ft.x - f0.x) / h],
                      [(fx.t - f0.t) / h, (ft.t - f0.t) / h]])
        assert np.linalg.det(j) > 0.0


def test_paper_deck_commutation_batch(paper_map):
    rng = np.random.default_rng(6)
    xs = rng.uniform(-2.0, 2.0, 10000)
    ts = rng.uniform(-20.0, 20.0, 10000)
    x1, t1, _ = paper_map.eval_batch(xs + 1.0, ts)
    x0, t0, _ = paper_map.eval_batch(xs, ts)
    assert np.max(np.abs(x1 - x0 - 1.0)) < 1e-11
    assert np.array_equal(t1, t0)


# -- horseshoe core ---------------------------------------------------------

def test_branch_formulas(horseshoe):
    assert horseshoe.lift_eval(LiftPoint(0.04, -0.2)) == LiftPoint(0.2, -0.04)
    q = horseshoe.lift_eval(LiftPoint(0.22, -0.1))
    assert q.x == pytest.approx(1.1, abs=1e-15)   # deck +1 on branch 1
    assert q.t == pytest.approx(-0.22, abs=1e-15)


def test_branch_zero_formula_via_extension(horseshoe):
    # the affine branch-0 formula evaluated outside R0 (analytic extension)
    ext, _, _ = horseshoe.branch_extension("0")
    assert ext(0.1, -0.2) == (0.5, -0.04)


def test_out_of_domain(horseshoe):
    with pytest.raises(OutOfDomainError):
        horseshoe.lift_eval(LiftPoint(0.1, -0.2))
    with pytest.raises(OutOfDomainError):
        horseshoe.lift_eval(LiftPoint(0.22, 0.5))


def test_corner_images_exact(horseshoe):
    q = horseshoe.lift_eval((Fraction(1, 20), Fraction(0)))
    assert q == (Fraction(1, 4), Fraction(0))
    q = horseshoe.lift_eval((Fraction(1, 5), Fraction(-1, 4)))
    assert q.x == Fraction(1) and q.t == Fraction(-1, 4)


def test_fixed_points_exact(horseshoe):
    a = (Fraction(0), Fraction(0))
    assert horseshoe.lift_eval(a) == a
    b = (Fraction(1, 4), Fraction(-1, 4))
    q = horseshoe.lift_eval(b)
    assert q.x == b[0] + 1 and q.t == b[1]  # lift of b moves by one deck


def test_inverse_roundtrip_random(horseshoe):
    rng = np.random.default_rng(7)
    for _ in range(2000):
        th = rng.uniform(0.0, 0.05) if rng.random() < 0.5 else rng.uniform(0.2, 0.25)
        z = LiftPoint(th + float(rng.integers(-3, 4)), rng.uniform(-0.25, 0.0))
        w = horseshoe.lift_eval(z)
        b = horseshoe.lift_inverse(w)
        assert abs(b.x - z.x) < 1e-12 and abs(b.t - z.t) < 1e-12


def test_symbolic_words():
    assert horseshoe_symbolic_point("0") == ((Fraction(0), Fraction(0)), 0)
    assert horseshoe_symbolic_point("1") == ((Fraction(1, 4), Fraction(-1, 4)), 1)
    (th, t), p = horseshoe_symbolic_point("01")
    assert (th, t, p) == (Fraction(1, 24), Fraction(-5, 24), 1)


def test_symbolic_second_orbit_point(horseshoe):
    (th, t), _ = horseshoe_symbolic_point("01")
    q = horseshoe.lift_eval((th, t))
    assert (q.x, q.t) == (Fraction(5, 24), Fraction(-1, 24))
    assert Fraction(1, 5) <= q.x <= Fraction(1, 4)


@pytest.mark.parametrize("q", range(1, 7))
def test_symbolic_all_words_exact_lift_relation(q):
    # the solver itself verifies h~^q = T^p exactly and the itinerary
    for bits in itertools.product("01", repeat=q):
        word = "".join(bits)
        (th, t), p = horseshoe_symbolic_point(word)
        assert p == word.count("1")
        assert 0 <= th <= Fraction(1, 4)
        assert Fraction(-1, 4) <= t <= 0


def test_symbolic_rejects_bad_words():
    with pytest.raises(ValueError):
        horseshoe_symbolic_point("")
    with pytest.raises(ValueError):
        horseshoe_symbolic_point("012")


def test_domain_cells(horseshoe):
    assert len(horseshoe.domain_cells(1)) == 2
    cells = horseshoe.domain_cells(3)
    assert len(cells) == 8
    for q in (2, 4):
        for bits in itertools.product("01", repeat=q):
            (th, _), _ = horseshoe_symbolic_point("".join(bits))
            assert any(lo <= float(th) <= hi for lo, hi in horseshoe.domain_cells(q))


@pytest.mark.parametrize("eps", [0.5, 0.1, 0.01, 0.001])
def test_heteroclinic_chain_valid(horseshoe, eps):
    chain = horseshoe_heteroclinic_chain(eps)
    assert is_valid_chain(horseshoe, chain, eps)
    assert chain[0] == (0.0, 0.0) and chain[-1] == (0.0, 0.0)
    assert any(abs(p.theta - 0.25) < 1e-12 and abs(p.t + 0.25) < 1e-12
               for p in chain)


def test_heteroclinic_chain_short_for_coarse_eps():
    assert len(horseshoe_heteroclinic_chain(0.1)) <= 30


def test_trivial_one_jump_chain(horseshoe):
    a = (0.0, 0.0)
    assert is_valid_chain(horseshoe, [a, a], 0.5)
