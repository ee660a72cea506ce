import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twotier import geometry
from twotier.geometry import GeometryError, QuantizationGrid


def test_gamma_values():
    assert geometry.gamma(0.0) == 0.0
    assert geometry.gamma(0.1) == pytest.approx(0.01 / 0.9801, rel=1e-15)
    assert geometry.gamma(1 / math.sqrt(2)) == pytest.approx(2.0, rel=1e-12)
    with pytest.raises(GeometryError):
        geometry.gamma(1.0)


def test_coverage_circle():
    c = geometry.fap_coverage_circle(700.0, 0.1)
    assert c.center_x == pytest.approx(707.0707070707, rel=1e-10)
    assert c.radius == pytest.approx(70.70707070707, rel=1e-10)
    assert c.radius == pytest.approx(math.sqrt(geometry.gamma(0.1)) * 700.0)
    c = geometry.fap_coverage_circle(1.0, 1 / math.sqrt(2))
    assert (c.center_x, c.center_y) == (pytest.approx(2.0), 0.0)
    assert c.radius == pytest.approx(math.sqrt(2))
    tiny = geometry.fap_coverage_circle(500.0, 1e-9)
    assert tiny.radius < 1e-6 and tiny.center_x == pytest.approx(500.0)
    with pytest.raises(GeometryError):
        geometry.fap_coverage_circle(0.0, 0.1)


def test_inner_apollonius_circle():
    c = geometry.inner_apollonius_circle(700.0, 0.5)
    assert c.center_x == pytest.approx(-233.3333333, rel=1e-9)
    assert c.radius == pytest.approx(466.6666667, rel=1e-9)
    # (-100, 0) has ratio 100/800 = 0.125
    for k, inside in ((0.12, False), (0.13, True)):
        assert bool(geometry.inner_apollonius_circle(700.0, k).contains(-100.0, 0.0)) is inside
    with pytest.raises(GeometryError):
        geometry.inner_apollonius_circle(700.0, 1.0)


def test_coverage_interior_is_high_ratio():
    rng = np.random.default_rng(3)
    for d_f, kappa in ((700.0, 0.1), (300.0, 0.4)):
        c = geometry.fap_coverage_circle(d_f, kappa)
        x, y = geometry.sample_uniform_disk(10_000, 1000.0, rng)
        # concentrate half the points around the circle so both sides are exercised
        x[:5000] = c.center_x + 2 * c.radius * (rng.random(5000) - 0.5)
        y[:5000] = 2 * c.radius * (rng.random(5000) - 0.5)
        delta = geometry.distance_ratio(x, y, d_f)
        assert np.array_equal(c.contains(x, y), delta > 1 / kappa)


def _asec(x):
    # arctan form, independent of the acos identity used by the library
    r = math.atan(math.sqrt(x * x - 1.0))
    return r if x > 0 else math.pi - r


def _f_printed(a, b, c):
    return (
        a * a * _asec(2 * a * c / (b * b - a * a - c * c))
        - b * b * _asec(2 * b * c / (b * b + c * c - a * a))
        + 0.5 * math.sqrt((a + b + c) * (b + c - a) * (c + a - b) * (a + b - c))
    )


def test_circle_outside_area_cases():
    assert geometry.circle_outside_area(1, 2, 5) == pytest.approx(math.pi)
    assert geometry.circle_outside_area(1, 3, 0) == 0.0
    assert geometry.circle_outside_area(1, 1, 1) == pytest.approx(math.pi - (2 * math.pi / 3 - math.sqrt(3) / 2), rel=1e-12)
    assert geometry.circle_outside_area(3, 1, 0.5) == pytest.approx(8 * math.pi)


@pytest.mark.parametrize("a,b,c", [(1, 1, 1), (2, 3, 2.5), (5, 2, 4), (70.7, 900, 850), (3, 4, 5.5)])
def test_circle_outside_area_matches_printed_form(a, b, c):
    assert geometry.circle_outside_area(a, b, c) == pytest.approx(_f_printed(a, b, c), rel=1e-10)


def test_circle_outside_area_against_sampling():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(100):
        a, b = rng.uniform(0.2, 2.0, 2)
        c = rng.uniform(0, a + b + 0.5)
        n = 200_000
        r = a * np.sqrt(rng.random(n))
        th = 2 * np.pi * rng.random(n)
        outside = (r * np.cos(th) - c) ** 2 + (r * np.sin(th)) ** 2 >= b * b
        mc = math.pi * a * a * outside.mean()
        lens_mc = math.pi * a * a - mc
        worst = max(worst, abs(geometry.circle_outside_area(a, b, c) + lens_mc - math.pi * a * a) / (math.pi * a * a))
    assert worst < 0.005


def test_bisector_segment_area():
    R = 1000.0
    assert geometry.bisector_segment_area(R, 0.0) == pytest.approx(math.pi * R * R / 2)
    assert geometry.bisector_segment_area(R, 1999.999999) < 1e-3
    th = math.acos(0.35)
    assert geometry.bisector_segment_area(R, 700.0) == pytest.approx(1e6 * (th - 0.5 * math.sin(2 * th)))
    mc = geometry.monte_carlo_area(lambda x, y: x > 350.0, R, 1_000_000, 5)
    assert mc == pytest.approx(geometry.bisector_segment_area(R, 700.0), rel=0.01)
    with pytest.raises(GeometryError):
        geometry.bisector_segment_area(R, 2 * R)


def test_grid_validation_and_nesting():
    g = QuantizationGrid.uniform(0.1, 8)
    assert g.t == 8 and g.kappa == 0.1 and g.levels[-1] == 1.0
    assert set(g.levels) <= set(QuantizationGrid.uniform(0.1, 16).levels) | {1.0}
    for bad in ((0.1,), (0.1, 0.5), (0.5, 0.3, 1.0), (0.0, 1.0)):
        with pytest.raises(GeometryError):
            QuantizationGrid(bad)


@pytest.mark.parametrize("d_f", [200.0, 700.0, 900.0])
def test_partition_matches_sampling(d_f):
    R = 1000.0
    grid = QuantizationGrid.uniform(0.1, 8)
    pa = geometry.partition_areas(d_f, R, grid)
    mc, cover = geometry.monte_carlo_band_areas(d_f, R, grid, 400_000, 1)
    assert np.max(np.abs(pa.areas - mc)) / pa.total < 0.005
    assert pa.total == pytest.approx(math.pi * R * R - geometry.coverage_area_in_disk(d_f, R, 0.1), rel=1e-12)
    exact = geometry.coverage_area_in_disk(d_f, R, 0.1)
    assert abs(cover - exact) < 4 * math.sqrt(exact * math.pi * R * R / 400_000)


def test_partition_clipped_coverage_large_kappa():
    # at kappa = 0.5 the coverage circle and the inner circles leave the disk
    R = 1000.0
    grid = QuantizationGrid.uniform(0.5, 8)
    for d_f in (300.0, 800.0, 950.0):
        pa = geometry.partition_areas(d_f, R, grid)
        mc, _ = geometry.monte_carlo_band_areas(d_f, R, grid, 400_000, 2)
        assert np.max(np.abs(pa.areas - mc)) / pa.total < 0.005


@settings(max_examples=60, deadline=None)
@given(
    d_frac=st.floats(0.01, 0.99),
    kappa=st.floats(0.02, 0.9),
    t=st.integers(1, 40),
)
def test_partition_probabilities_normalised(d_frac, kappa, t):
    pa = geometry.partition_areas(d_frac * 1000.0, 1000.0, QuantizationGrid.uniform(kappa, t))
    assert np.all(pa.areas >= 0)
    assert pa.probs.sum() == pytest.approx(1.0, abs=1e-12)


def test_band_index_edges():
    grid = QuantizationGrid((0.25, 0.5, 1.0))
    # 0: <= 0.25, -1: (0.25, 0.5], -2: (0.5, 1], 2: (1, 2], 1: (2, 4], covered: > 4
    cases = {0.1: 0, 0.25: 0, 0.3: -1, 0.5: -1, 0.7: -2, 1.0: -2, 1.5: 2, 2.0: 2, 3.0: 1, 4.0: 1, 4.5: 3}
    got = geometry.band_index(np.array(list(cases)), grid)
    assert list(got) == list(cases.values())


def test_quantize_ratio_brackets():
    grid = QuantizationGrid.uniform(0.1, 8)
    d = np.linspace(0.01, 9.99, 1001)
    lo, hi = geometry.quantize_ratio(d, grid)
    assert np.all(lo <= d + 1e-12) and np.all(d <= hi + 1e-12)


def test_monte_carlo_area_trivial():
    R = 10.0
    assert geometry.monte_carlo_area(lambda x, y: np.ones_like(x, bool), R, 1000, 0) == pytest.approx(math.pi * R * R)
    assert geometry.monte_carlo_area(lambda x, y: np.zeros_like(x, bool), R, 1000, 0) == 0.0
    a, se = geometry.monte_carlo_area_with_error(lambda x, y: x > 0, R, 100_000, 9)
    assert abs(a - math.pi * R * R / 2) < 3 * se
    assert geometry.monte_carlo_area(lambda x, y: x > 0, R, 5000, 4) == geometry.monte_carlo_area(lambda x, y: x > 0, R, 5000, 4)
