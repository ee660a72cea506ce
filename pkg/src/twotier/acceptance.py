"""Acceptance checks A1-A11.

Each check returns a :class:`CheckResult`.  The pytest suite and the
``validate`` subcommand both run them through :func:`run_checks`.
"""

from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from . import bounds, geometry
from .geometry import QuantizationGrid
from .montecarlo import (
    estimate_avg_outage_at_fap,
    estimate_laplace_nm_bm,
    estimate_outage_at_fap,
    estimate_outage_at_mbs,
    sample_sir_at_fap,
    sample_sir_at_mbs,
)
from .network import build_batch
from .params import DEFAULTS, SystemParams
from .stochastic import RngStream

T_GRID = (0.5, 1.0, 2.0, 4.0, 8.0)
MU_GRID = (10e-6, 15e-6, 20e-6)
KAPPA_GRID = (0.05, 0.1, 0.2, 0.3, 0.4, 0.5)
AREA_DF = (200.0, 500.0, 700.0, 900.0)
LAPLACE_S = (0.1, 0.5, 1.0, 2.0)
REFINE_T = (4, 8, 16, 32)
REFINE_S = (0.001, 0.01, 0.1, 1.0)
SHAPE_DF = tuple(float(d) for d in range(100, 1000, 100))


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    lines: list = field(default_factory=list)

    def summary(self) -> str:
        return f"{self.name}: {'PASS' if self.passed else 'FAIL'} ({self.detail})"


@dataclass(frozen=True)
class Settings:
    trials: int = 100_000
    threads: int = min(8, os.cpu_count() or 1)
    seed: int = 20240601
    area_samples: int = 1_000_000
    band_samples: int = 100_000
    sweep_trials: int = 20_000


def _joint(*se):
    return math.sqrt(sum(x * x for x in se))


def check_a1(cfg: Settings) -> CheckResult:
    grid = QuantizationGrid.uniform(DEFAULTS.kappa, 32)
    lines, ok = [], True
    for k, mu in enumerate(MU_GRID):
        p = DEFAULTS.replace(mu_m=mu)
        areas = geometry.partition_areas(700.0, p.R, grid)
        sir = sample_sir_at_fap(p, 700.0, cfg.trials, seed=cfg.seed + k, threads=cfg.threads)
        for T in T_GRID:
            e = sir.outage(T)
            b = bounds.outage_bounds_at_fap(700.0, grid, p.replace(T=T), areas)
            hit = b.contains(e.p_hat, 3 * e.stderr)
            ok &= hit
            lines.append(
                f"mu_m={mu:g} T={T:g}: p_hat={e.p_hat:.4f} se={e.stderr:.4f} "
                f"bounds=[{b.lower_clamped:.4f}, {b.upper_clamped:.4f}] {'ok' if hit else 'OUT'}"
            )
    return CheckResult("A1", ok, f"{sum('ok' in l for l in lines)}/{len(lines)} points inside", lines)


def check_a2(cfg: Settings) -> CheckResult:
    lines, ok = [], True
    for k, mu in enumerate(MU_GRID):
        p = DEFAULTS.replace(mu_m=mu)
        sir = sample_sir_at_mbs(p, cfg.trials, seed=cfg.seed + 100 + k, threads=cfg.threads)
        for T in T_GRID:
            e = sir.outage(T)
            b = bounds.outage_bounds_at_mbs(p.replace(T=T))
            hit = b.contains(e.p_hat, 3 * e.stderr)
            ok &= hit
            lines.append(
                f"mu_m={mu:g} T={T:g}: p_hat={e.p_hat:.4f} se={e.stderr:.4f} "
                f"bounds=[{b.lower_clamped:.4f}, {b.upper_clamped:.4f}] {'ok' if hit else 'OUT'}"
            )
    return CheckResult("A2", ok, f"{sum('ok' in l for l in lines)}/{len(lines)} points inside", lines)


def _non_increasing(estimates, label, lines):
    ok = True
    for (k0, a), (k1, b) in zip(estimates, estimates[1:]):
        slack = 3 * _joint(a.stderr, b.stderr)
        step = b.p_hat <= a.p_hat + slack
        ok &= step
        lines.append(
            f"{label} kappa {k0:g}->{k1:g}: {a.p_hat:.4f} -> {b.p_hat:.4f} (slack {slack:.4f}) {'ok' if step else 'RISE'}"
        )
    return ok


def check_a3(cfg: Settings) -> CheckResult:
    mbs, fap = [], []
    for k, kappa in enumerate(KAPPA_GRID):
        p = DEFAULTS.replace(kappa=kappa)
        mbs.append((kappa, estimate_outage_at_mbs(p, cfg.trials, rng=cfg.seed + 200 + k, threads=cfg.threads)))
        fap.append((kappa, estimate_avg_outage_at_fap(p, cfg.trials, rng=cfg.seed + 300 + k, threads=cfg.threads)))
    lines: list = []
    ok = _non_increasing(mbs, "MBS", lines)
    ok &= _non_increasing(fap, "FAP(avg)", lines)
    return CheckResult("A3", ok, f"{sum(l.endswith('ok') for l in lines)}/{len(lines)} steps non-increasing", lines)


def check_a4(cfg: Settings) -> CheckResult:
    grid = QuantizationGrid.uniform(DEFAULTS.kappa, 8)
    R = DEFAULTS.R
    lines, ok = [], True
    for k, d in enumerate(AREA_DF):
        pa = geometry.partition_areas(d, R, grid)
        mc, _ = geometry.monte_carlo_band_areas(d, R, grid, cfg.area_samples, cfg.seed + 400 + k)
        worst = float(np.max(np.abs(pa.areas - mc)) / pa.total)
        expected_total = math.pi * R * R - geometry.coverage_area_in_disk(d, R, DEFAULTS.kappa)
        total_err = abs(float(pa.areas.sum()) - expected_total) / expected_total
        good = worst <= 0.005 and total_err <= 0.001
        ok &= good
        lines.append(f"d_f={d:g}: max|s_i - mc|/s={worst:.5f} sum rel err={total_err:.2e} {'ok' if good else 'BAD'}")
    return CheckResult("A4", ok, "; ".join(l.split(": ")[1] for l in lines), lines)


def check_a5(cfg: Settings) -> CheckResult:
    grid = QuantizationGrid.uniform(DEFAULTS.kappa, 8)
    R, n = DEFAULTS.R, cfg.band_samples
    lines, ok = [], True
    for k, d in enumerate(AREA_DF):
        pa = geometry.partition_areas(d, R, grid)
        cover = geometry.fap_coverage_circle(d, DEFAULTS.kappa)
        gen = RngStream(cfg.seed + 500 + k).generator()
        x, y = geometry.sample_points_in_region(n, R, lambda x, y: ~cover.contains(x, y), gen)
        idx = geometry.band_index(geometry.distance_ratio(x, y, d), grid) + grid.t
        freq = np.bincount(idx, minlength=2 * grid.t + 2)[: 2 * grid.t + 1] / n
        se = np.sqrt(pa.probs * (1 - pa.probs) / n)
        bad = np.abs(freq - pa.probs) > 3 * se
        ok &= not bad.any()
        lines.append(f"d_f={d:g}: {int(bad.sum())} of {bad.size} bins outside 3 se")
    return CheckResult("A5", ok, "; ".join(lines), lines)


def check_a6(cfg: Settings) -> CheckResult:
    lines, ok = [], True
    for k, s in enumerate(LAPLACE_S):
        for which, d_f in (("unconditional", None), ("d_f=700", 700.0)):
            e = estimate_laplace_nm_bm(DEFAULTS, s, d_f, cfg.trials, rng=cfg.seed + 600 + 2 * k + (d_f is not None), threads=cfg.threads)
            b = (
                bounds.laplace_n_mu_mbs_bounds(s, DEFAULTS)
                if d_f is None
                else bounds.laplace_n_mu_mbs_cond_bounds(s, d_f, DEFAULTS)
            )
            hit = b.lower <= e.mean <= b.upper + 3 * e.stderr
            ok &= hit
            lines.append(
                f"s={s:g} {which}: mc={e.mean:.4e} se={e.stderr:.2e} bounds=[{b.lower:.4e}, {b.upper:.4e}] {'ok' if hit else 'OUT'}"
            )
    return CheckResult("A6", ok, f"{sum(l.endswith('ok') for l in lines)}/{len(lines)} inside", lines)


def _poisson_pmf(k: int, mean: float) -> float:
    return math.exp(k * math.log(mean) - mean - math.lgamma(k + 1))


def _zt_series(z: float, mean: float, kmax: int) -> float:
    """``E[z^(N-1) | N >= 1]`` for ``N ~ Poisson(mean)`` by direct summation."""
    total = 0.0
    for k in range(1, kmax + 1):
        total += z ** (k - 1) * _poisson_pmf(k, mean)
    return total / -math.expm1(-mean)


def random_parameter_grid(n: int, seed: int):
    """``n`` random ``(params, d_f, grid)`` triples over a broad domain."""
    gen = RngStream(seed).generator()
    out = []
    for _ in range(n):
        kappa = float(gen.uniform(0.02, 0.6))
        p = DEFAULTS.replace(
            kappa=kappa,
            mu_m=float(gen.uniform(2e-6, 3e-5)),
            lambda_f=float(gen.uniform(1e-6, 2e-5)),
            mu_f=float(gen.uniform(0.001, 0.05)),
            eta=float(gen.uniform(1.0, 100.0)),
            alpha=float(gen.uniform(2.5, 5.0)),
            n_h=int(gen.integers(8, 1024)),
            T=float(gen.uniform(0.1, 10.0)),
            sigma_sq=float(gen.uniform(0.5, 2.0)),
        )
        d_f = float(gen.uniform(0.02, 0.98) * p.R)
        out.append((p, d_f, QuantizationGrid.uniform(kappa, int(gen.integers(1, 33)))))
    return out


def composed_fap_upper(d_f: float, grid: QuantizationGrid, p: SystemParams) -> float:
    """Upper bound rebuilt from the individual count transforms."""
    s = math.log1p(p.T_h)
    q = bounds.q_pair(p.T_h / p.sigma_sq, d_f, grid, p)[0]
    mbs_lower = bounds.laplace_n_mu_mbs_cond_bounds(-math.log(q), d_f, p).lower
    return 1.0 - bounds.laplace_n_fu(s, p) * bounds.laplace_n_mu_fap_plus(s, d_f, p) * mbs_lower


def series_mbs_upper(p: SystemParams, kmax: int = 400) -> float:
    return 1.0 - _zt_series(1.0 / (1.0 + p.T_h), p.n_mu, kmax)


def check_a7(cfg: Settings) -> CheckResult:
    worst_fap = worst_mbs = 0.0
    for p, d_f, grid in random_parameter_grid(100, cfg.seed + 700):
        closed = bounds.outage_bounds_at_fap(d_f, grid, p).upper
        worst_fap = max(worst_fap, abs(closed - composed_fap_upper(d_f, grid, p)) / abs(closed))
        closed_m = bounds.outage_bounds_at_mbs(p).upper
        worst_mbs = max(worst_mbs, abs(closed_m - series_mbs_upper(p)) / abs(closed_m))
    ok = worst_fap <= 1e-10 and worst_mbs <= 1e-10
    return CheckResult("A7", ok, f"max rel err FAP upper {worst_fap:.2e}, MBS upper {worst_mbs:.2e}")


def check_a8(cfg: Settings) -> CheckResult:
    lines, violations, total, tightening = [], 0, 0, 0
    grids = [QuantizationGrid.uniform(DEFAULTS.kappa, t) for t in REFINE_T]
    for d in AREA_DF:
        parts = [geometry.partition_areas(d, DEFAULTS.R, g) for g in grids]
        for s in REFINE_S:
            qs = [bounds.q_pair(s, d, g, DEFAULTS, a) for g, a in zip(grids, parts)]
            for (l0, u0), (l1, u1), t0, t1 in zip(qs, qs[1:], REFINE_T, REFINE_T[1:]):
                total += 2
                bad_u = u1 < u0
                bad_l = l1 > l0
                violations += bad_u + bad_l
                tightening += (u1 <= u0) + (l1 >= l0)
                if bad_u or bad_l:
                    lines.append(
                        f"d_f={d:g} s={s:g} t {t0}->{t1}: q_u {u0:.12f}->{u1:.12f}, q_l {l0:.12f}->{l1:.12f}"
                    )
    return CheckResult(
        "A8",
        violations == 0,
        f"{violations}/{total} comparisons violate 'q_u non-decreasing, q_l non-increasing'; "
        f"{tightening}/{total} follow the tightening order (q_u non-increasing, q_l non-decreasing)",
        lines,
    )


def check_a9(cfg: Settings) -> CheckResult:
    est = [
        estimate_outage_at_fap(DEFAULTS, d, cfg.trials, rng=cfg.seed + 900 + k, threads=cfg.threads)
        for k, d in enumerate(SHAPE_DF)
    ]
    lines = [f"d_f={d:g}: p_hat={e.p_hat:.4f} se={e.stderr:.4f}" for d, e in zip(SHAPE_DF, est)]
    inner = max(est[1:-1], key=lambda e: e.p_hat)
    first, last = est[0], est[-1]
    ok = all(inner.p_hat - e.p_hat > 3 * _joint(inner.stderr, e.stderr) for e in (first, last))
    return CheckResult(
        "A9", ok, f"interior max {inner.p_hat:.4f} vs endpoints {first.p_hat:.4f}, {last.p_hat:.4f}", lines
    )


def check_a10(cfg: Settings) -> CheckResult:
    from .cli import run

    outputs = []
    for threads in (1, 8):
        buf = io.StringIO()
        code = run(
            ["sweep", "--param", "T", "--values", "0.5,1,2,4,8", "--trials", str(cfg.sweep_trials),
             "--seed", "42", "--threads", str(threads)],
            stdout=buf,
        )
        if code != 0:
            return CheckResult("A10", False, f"sweep exited with {code}")
        outputs.append(buf.getvalue().encode())
    same = outputs[0] == outputs[1]
    return CheckResult("A10", same, f"{len(outputs[0])} bytes, identical={same}")


def check_a11(cfg: Settings) -> CheckResult:
    p = DEFAULTS.replace(kappa=1e-9)
    served = 0
    n, done, block = 10_000, 0, 0
    while done < n:
        m = min(1024, n - done)
        batch = build_batch(p, m, RngStream(cfg.seed + 1100, block).generator())
        served += int(np.count_nonzero(batch.serving >= 0))
        done += m
        block += 1
    T_h = p.T_h
    frac = T_h / (1 + T_h)
    tau_o = bounds._expm1_ratio(p.gamma * p.n_mu * frac)
    limit_lower = 1.0 - (1.0 + T_h) * math.exp(-p.n_mu * frac)
    b = bounds.outage_bounds_at_mbs(p)
    b10 = bounds.outage_bounds_at_mbs(p.replace(lambda_f=10 * p.lambda_f))
    close = abs(tau_o - 1) < 1e-12 and abs(b.lower - limit_lower) < 1e-12 and abs(b.lower - b10.lower) < 1e-12
    ok = served == 0 and close
    return CheckResult(
        "A11", ok,
        f"FAP-served MUs in {n} realizations: {served}; tau'_o-1={tau_o - 1:.1e}; "
        f"lower bound vs lambda_f-free limit diff={abs(b.lower - limit_lower):.1e}",
    )


CHECKS: dict[str, Callable[[Settings], CheckResult]] = {
    "A1": check_a1,
    "A2": check_a2,
    "A3": check_a3,
    "A4": check_a4,
    "A5": check_a5,
    "A6": check_a6,
    "A7": check_a7,
    "A8": check_a8,
    "A9": check_a9,
    "A10": check_a10,
    "A11": check_a11,
}


def run_checks(names: Optional[Iterable[str]] = None, settings: Optional[Settings] = None, echo=None):
    settings = settings or Settings()
    results = []
    for name in names or CHECKS:
        if name not in CHECKS:
            raise KeyError(f"unknown acceptance check {name!r}")
        res = CHECKS[name](settings)
        if echo is not None:
            echo(res.summary())
        results.append(res)
    return results
