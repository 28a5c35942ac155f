import math

import numpy as np
import pytest

from annulusdyn import (Basin, LiftPoint, NoConvergenceError, RigidTranslation,
                        annulus_dist, birkhoff_rotation, classify_basin, deck,
                        displacement, from_document, lift_of, orbit, project,
                        to_document)
from annulusdyn.annulus import bisect_increasing


def test_deck_basics():
    assert deck(LiftPoint(0.5, 2.0), 3) == LiftPoint(3.5, 2.0)
    assert deck(LiftPoint(0.5, 2.0), 0) == LiftPoint(0.5, 2.0)


def test_deck_commutes_with_maps(horseshoe, paper_map):
    rng = np.random.default_rng(5)
    for _ in range(200):
        x = rng.uniform(0.0, 0.05)
        t = rng.uniform(-0.25, 0.0)
        a = horseshoe.lift_eval(deck(LiftPoint(x, t), 2))
        b = deck(horseshoe.lift_eval(LiftPoint(x, t)), 2)
        assert a.x == pytest.approx(b.x, abs=1e-12) and a.t == b.t
    for _ in range(200):
        x = rng.uniform(-1.0, 1.0)
        t = rng.uniform(-20.0, 20.0)
        a = paper_map.lift_eval(deck(LiftPoint(x, t), -3))
        b = deck(paper_map.lift_eval(LiftPoint(x, t)), -3)
        assert a.x == pytest.approx(b.x, abs=1e-11) and a.t == pytest.approx(b.t, abs=1e-12)


def test_project_and_lift():
    p = project(LiftPoint(2.75, 1.0))
    assert p.theta == 0.75 and p.t == 1.0
    assert lift_of(p, 2) == LiftPoint(2.75, 1.0)


def test_annulus_dist_wraps():
    assert annulus_dist((0.05, 0.0), (0.95, 0.0)) == pytest.approx(0.1)
    assert annulus_dist((0.2, 1.0), (0.2, -1.0)) == pytest.approx(2.0)


def test_displacement_rigid():
    m = RigidTranslation(0.2)
    assert displacement(m, (0.7, 3.0)) == pytest.approx(0.2)


def test_displacement_deck_invariant(horseshoe):
    b = LiftPoint(0.25, -0.25)
    assert displacement(horseshoe, b) == 1.0
    assert displacement(horseshoe, deck(b, 5)) == pytest.approx(1.0, abs=1e-12)


def test_birkhoff_rigid():
    m = RigidTranslation(0.2)
    res = birkhoff_rotation(m, LiftPoint(0.123, 7.0), 50)
    assert res.value == pytest.approx(0.2, abs=1e-14)
    assert res.complete and res.steps == 50


def test_birkhoff_partial_flag(horseshoe):
    # the orbit of an off-core point exits; partial average is flagged
    res = birkhoff_rotation(horseshoe, LiftPoint(0.001, -0.001), 50)
    assert not res.complete
    assert 0 < res.steps < 50


def test_birkhoff_exact_period_two(horseshoe):
    from fractions import Fraction
    z = LiftPoint(Fraction(1, 24), Fraction(-5, 24))
    res = birkhoff_rotation(horseshoe, z, 10)
    assert res.value == Fraction(1, 2)


def test_classify_basin_immediate(paper_map):
    assert classify_basin(paper_map, LiftPoint(0.3, 20.0), 15.0, -15.0, 5) is Basin.PLUS
    assert classify_basin(paper_map, LiftPoint(0.3, -20.0), 15.0, -15.0, 1) is Basin.MINUS


def test_classify_basin_undetermined_translation():
    m = RigidTranslation(0.3)
    assert classify_basin(m, LiftPoint(0.0, 0.0), 1.0, -1.0, 100) is Basin.UNDETERMINED


def test_classify_basin_interior_point_meets_both(paper_map):
    # the two basins intersect; an interior wandering point certifies both
    basin = classify_basin(paper_map, LiftPoint(1.0 / 6.0, 0.0), 15.0, -15.0, 10000)
    assert basin in (Basin.BOTH, Basin.PLUS, Basin.MINUS)


def test_orbit_stops_on_domain_exit(horseshoe):
    # 0.045 -> 0.225 -> 0.125 lands in the gap between the strips
    pts = orbit(horseshoe, LiftPoint(0.045, -0.2), 100)
    assert len(pts) == 3


def test_bisect_increasing_bracket_error():
    with pytest.raises(NoConvergenceError):
        bisect_increasing(lambda x: x + 10.0, 0.0, 1.0)


@pytest.mark.parametrize("maker", [
    lambda: RigidTranslation(0.37),
    lambda: __import__("annulusdyn").build_horseshoe_core(),
])
def test_mapspec_roundtrip_identical_evaluations(maker):
    m = maker()
    doc = to_document(m)
    m2 = from_document(doc)
    rng = np.random.default_rng(11)
    for _ in range(100):
        if m.variant == "horseshoe_core":
            x = rng.uniform(0.2, 0.25)
            t = rng.uniform(-0.25, 0.0)
        else:
            x = rng.uniform(-2.0, 2.0)
            t = rng.uniform(-5.0, 5.0)
        a = m.lift_eval(LiftPoint(x, t))
        b = m2.lift_eval(LiftPoint(x, t))
        assert a == b  # bit-identical reconstruction


def test_mapspec_roundtrip_paper(paper_map):
    doc = to_document(paper_map)
    m2 = from_document(doc)
    assert doc["alpha"]["kind"] == "rigid" and doc["alpha"]["q"] == 3
    assert doc["beta"]["kind"] == "denjoy"
    rng = np.random.default_rng(12)
    for _ in range(25):
        z = LiftPoint(rng.uniform(-1, 1), rng.uniform(-20, 20))
        assert paper_map.lift_eval(z) == m2.lift_eval(z)


def test_mapspec_rejects_unknown():
    with pytest.raises(ValueError):
        from_document({"schema_version": 1, "variant": "nope"})
    with pytest.raises(ValueError):
        from_document({"schema_version": 99, "variant": "horseshoe_core"})
