import math

import numpy as np
import pytest

from twotier import montecarlo as mc
from twotier.montecarlo import ConditioningError, OutageEstimate
from twotier.params import DEFAULTS as P, ParameterError


def test_estimate_fields_and_binomial_stderr():
    e = OutageEstimate.from_counts(400, 100, 7, realizations=1000, event_rate=0.4)
    assert e.p_hat == 0.25 and e.stderr == math.sqrt(0.25 * 0.75 / 400)
    assert e.realizations == 1000 and e.acceptance_rate == 0.4


def test_thread_count_does_not_change_results():
    a = mc.estimate_outage_at_fap(P, 700.0, trials=3000, rng=5, threads=1)
    b = mc.estimate_outage_at_fap(P, 700.0, trials=3000, rng=5, threads=4)
    assert a == b and a.trials == 3000
    c = mc.estimate_outage_at_fap(P, 700.0, trials=3000, rng=6, threads=1)
    assert c != a
    a = mc.estimate_outage_at_mbs(P, trials=2500, rng=5, threads=1)
    assert a == mc.estimate_outage_at_mbs(P, trials=2500, rng=5, threads=3)


def test_zero_threshold_and_huge_gain():
    p = P.replace(T=0.0)
    assert mc.estimate_outage_at_fap(p, 700.0, trials=500, rng=1).outages == 0
    assert mc.estimate_outage_fu_at_fap(p, 700.0, trials=500, rng=1).outages == 0
    assert mc.estimate_avg_outage_at_fap(p, trials=500, rng=1).outages == 0
    assert mc.estimate_outage_at_mbs(p, trials=500, rng=1).outages == 0
    big = P.replace(n_h=1e6)
    assert mc.estimate_outage_at_fap(big, 700.0, trials=2000, rng=2).p_hat < 0.01


def test_acceptance_rate_reported():
    e = mc.estimate_outage_at_fap(P, 700.0, trials=2000, rng=3)
    assert e.realizations >= e.trials
    # the conditioning event has probability about 1 - exp(-0.236)
    assert e.acceptance_rate == pytest.approx(-math.expm1(-P.n_mu_f(700.0)), rel=0.15)


def test_fu_and_mu_outage_agree():
    a = mc.estimate_outage_at_fap(P, 700.0, trials=20_000, rng=4, threads=4)
    b = mc.estimate_outage_fu_at_fap(P, 700.0, trials=20_000, rng=5, threads=4)
    assert abs(a.p_hat - b.p_hat) < 3 * math.hypot(a.stderr, b.stderr)


def test_fu_outage_without_macro_users():
    # only same-cell FUs interfere: P(no outage | k other FUs) = (1 + T_h)^-k
    # averaged over the zero-truncated count minus one
    p = P.replace(mu_m=0.0)
    e = mc.estimate_outage_fu_at_fap(p, 700.0, trials=20_000, rng=6, threads=4)
    n, z = p.n_fu, 1.0 / (1.0 + p.T_h)
    expect = 1.0 - math.expm1(n * z) / (z * math.expm1(n))
    assert abs(e.p_hat - expect) < 3 * e.stderr + 1e-3


def test_rare_conditioning_aborts():
    with pytest.raises(ConditioningError):
        mc.sample_sir_at_mbs(P.replace(mu_m=1e-13), trials=20, seed=1)
    with pytest.raises(ConditioningError):
        mc.sample_sir_at_mbs(P.replace(mu_m=0.0), trials=20, seed=1)


def test_sparse_users_rarely_interfere():
    # with about 0.3 MUs per disk the MBS-served MU is usually alone
    samples = mc.sample_sir_at_mbs(P.replace(mu_m=1e-7, lambda_f=0.0), trials=2000, seed=1)
    assert np.isinf(samples.values).mean() > 0.7


def test_outage_monotone_in_threshold():
    samples = mc.sample_sir_at_mbs(P, trials=5000, seed=7)
    est = mc.outage_over_thresholds(samples, [0.5, 1, 2, 4, 8])
    assert all(a.outages <= b.outages for a, b in zip(est, est[1:]))
    assert est[2] == samples.outage(2.0)


def test_avg_outage_r_scaling():
    a = mc.estimate_avg_outage_at_fap(P, trials=10_000, rng=8, threads=4)
    half = P.replace(R=500.0, lambda_f=4 * P.lambda_f, mu_m=4 * P.mu_m, mu_f=4 * P.mu_f,
                     r_f=P.r_f / 2, delta=P.delta / 2)
    b = mc.estimate_avg_outage_at_fap(half, trials=10_000, rng=9, threads=4)
    assert abs(a.p_hat - b.p_hat) < 3 * math.hypot(a.stderr, b.stderr)


def test_laplace_estimates():
    assert mc.estimate_laplace_nm_bm(P, 0.0, trials=200, rng=1).mean == 1.0
    e = mc.estimate_laplace_nm_bm(P.replace(lambda_f=0.0), 1.0, trials=20_000, rng=2, threads=4)
    exact = math.exp(P.n_mu * math.expm1(-1.0))
    assert abs(e.mean - exact) < 3 * e.stderr
    with pytest.raises(ValueError):
        mc.estimate_laplace_nm_bm(P, -1.0, trials=10)


def test_closed_access_aborts():
    with pytest.raises(ConditioningError):
        mc.estimate_outage_at_fap(P.replace(kappa=0.0), 700.0, trials=10)
    with pytest.raises(ConditioningError):
        mc.estimate_outage_at_fap(P.replace(kappa=1e-9), 700.0, trials=10)


def test_argument_checks():
    with pytest.raises(ValueError):
        mc.estimate_outage_at_fap(P, 700.0, trials=0)
    with pytest.raises(ParameterError):
        mc.estimate_outage_at_fap(P, 1200.0, trials=10)
    with pytest.raises(TypeError):
        mc.estimate_outage_at_mbs(P, trials=10, rng="x")
