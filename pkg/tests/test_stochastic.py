import math

import numpy as np
import pytest

from twotier.stochastic import (
    RngStream,
    as_generator,
    sample_fading_power,
    sample_ppp_disk,
    sample_ppp_ring,
    zero_truncated_poisson,
)


def test_stream_determinism_and_independence():
    a = RngStream(42, 3).generator().random(10_000)
    b = RngStream(42, 3).generator().random(10_000)
    c = RngStream(42, 4).generator().random(10_000)
    d = RngStream(43, 3).generator().random(10_000)
    assert np.array_equal(a, b)
    assert abs(np.corrcoef(a, c)[0, 1]) < 0.01
    # neighbouring seeds: only a loose sanity bound, 4 standard errors at n = 1e4
    assert abs(np.corrcoef(a, d)[0, 1]) < 0.04
    assert not np.array_equal(a, c)


def test_stream_frozen_values():
    # guards against silent changes of the stream keying
    first = RngStream(1, 0).generator().integers(0, 2**32, 3)
    again = as_generator(RngStream(1, 0)).integers(0, 2**32, 3)
    assert np.array_equal(first, again)
    assert np.array_equal(as_generator(7).random(4), RngStream(7).generator().random(4))
    with pytest.raises(ValueError):
        RngStream(1, -1)
    with pytest.raises(TypeError):
        as_generator("seed")


def test_ppp_disk_counts_and_support():
    gen = RngStream(5).generator()
    counts = np.array([len(sample_ppp_disk(5e-6, 1000.0, gen)) for _ in range(10_000)])
    mean = math.pi * 1e6 * 5e-6
    assert abs(counts.mean() - mean) < 3 * math.sqrt(mean / counts.size)
    assert len(sample_ppp_disk(0.0, 1000.0, gen)) == 0


def test_ppp_disk_radial_law():
    gen = RngStream(6).generator()
    pts = np.concatenate([sample_ppp_disk(1e-4, 1000.0, gen) for _ in range(30)])
    r = np.sort(np.hypot(pts[:, 0], pts[:, 1]))
    n = r.size
    cdf = (r / 1000.0) ** 2
    ks = max(np.max(np.arange(1, n + 1) / n - cdf), np.max(cdf - np.arange(n) / n))
    # 1% critical value of the one-sample KS statistic
    assert ks < 1.628 / math.sqrt(n)
    assert r.max() <= 1000.0


def test_ppp_ring():
    gen = RngStream(7).generator()
    center = (300.0, -40.0)
    counts = []
    for _ in range(10_000):
        pts = sample_ppp_ring(0.01, center, 10.0, 5.0, gen)
        d = np.hypot(pts[:, 0] - center[0], pts[:, 1] - center[1])
        assert np.all((d >= 10.0 - 1e-9) & (d <= 15.0 + 1e-9))
        counts.append(len(pts))
    mean = 1.25 * math.pi
    counts = np.array(counts)
    assert mean == pytest.approx(3.927, abs=1e-3)
    assert abs(counts.mean() - mean) < 3 * math.sqrt(mean / counts.size)
    assert len(sample_ppp_ring(0.0, center, 10.0, 5.0, gen)) == 0


def test_poisson_dispersion():
    gen = RngStream(8).generator()
    counts = np.array([len(sample_ppp_disk(2e-5, 1000.0, gen)) for _ in range(20_000)])
    assert counts.var() == pytest.approx(counts.mean(), rel=0.05)


def test_fading_power():
    gen = RngStream(9).generator()
    x = sample_fading_power(1.7, gen, size=1_000_000)
    assert abs(x.mean() - 1.7) < 3 * 1.7 / math.sqrt(x.size)
    assert np.mean(x > 1.7 * math.log(2)) == pytest.approx(0.5, abs=0.003)
    y = sample_fading_power(1.0, gen, size=1_000_000)
    assert np.mean(y > 1.0) == pytest.approx(math.exp(-1), abs=0.003)
    with pytest.raises(ValueError):
        sample_fading_power(0.0, gen)


@pytest.mark.parametrize("mean", [1e-14, 1e-3, 0.5, 3.0, 40.0])
def test_zero_truncated_poisson(mean):
    gen = RngStream(10).generator()
    k = zero_truncated_poisson(np.full(200_000, mean), gen)
    assert k.min() >= 1
    expect = mean / -math.expm1(-mean)
    var = expect * (1 + mean - expect)
    assert abs(k.mean() - expect) < 4 * math.sqrt(var / k.size) + 1e-12
    if mean >= 0.5:
        p1 = mean * math.exp(-mean) / -math.expm1(-mean)
        assert np.mean(k == 1) == pytest.approx(p1, abs=4 * math.sqrt(p1 * (1 - p1) / k.size) + 1e-9)
