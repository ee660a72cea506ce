"""Monte Carlo outage estimators and Laplace-transform estimators.

Trials are split into fixed blocks of ``BLOCK`` effective samples.  Block
``b`` draws from ``RngStream(seed, b)``, so its samples do not depend on which
thread runs it, and block results are concatenated in block order.  Thread
count therefore changes wall time only.

Conditioning is exact: realizations are drawn given at least one MU inside
the tagged FAP's coverage circle (or at least one FU), and those where the
tagged FAP still serves no MU are regenerated with the same ``d_f``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import geometry
from .network import MBS, build_batch
from .params import ParameterError, SystemParams
from .sir import CollisionMode, fap_sir_batch, mbs_sir_batch
from .stochastic import RngStream

BLOCK = 1024
MIN_EVENT_RATE = 1e-4
DEFAULT_TRIALS = 100_000


class ConditioningError(RuntimeError):
    """The conditioning event is too rare to sample by regeneration."""


@dataclass(frozen=True)
class OutageEstimate:
    trials: int
    outages: int
    p_hat: float
    stderr: float
    seed: int
    realizations: int = 0
    acceptance_rate: float = 1.0

    @classmethod
    def from_counts(cls, trials, outages, seed, realizations=None, event_rate=1.0):
        p = outages / trials
        return cls(
            trials=int(trials),
            outages=int(outages),
            p_hat=p,
            stderr=math.sqrt(p * (1.0 - p) / trials),
            seed=int(seed),
            realizations=int(trials if realizations is None else realizations),
            acceptance_rate=float(event_rate),
        )


@dataclass(frozen=True)
class SirSamples:
    """Effective SIR samples plus conditioning diagnostics."""

    values: np.ndarray
    seed: int
    realizations: int
    event_rate: float

    def outage(self, T: float) -> OutageEstimate:
        n = int(self.values.size)
        return OutageEstimate.from_counts(
            n, int(np.count_nonzero(self.values < T)), self.seed, self.realizations, self.event_rate
        )


@dataclass(frozen=True)
class MeanEstimate:
    mean: float
    stderr: float
    trials: int
    seed: int


def _block_sizes(trials: int):
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    full, rest = divmod(trials, BLOCK)
    return [BLOCK] * full + ([rest] if rest else [])


def _run_blocks(task: Callable, trials: int, seed: int, threads: int = 1):
    """Run ``task(gen, n)`` per block and return results in block order."""
    sizes = _block_sizes(trials)
    jobs = [(RngStream(seed, b), n) for b, n in enumerate(sizes)]
    if threads <= 1 or len(jobs) == 1:
        return [task(s.generator(), n) for s, n in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda job: task(job[0].generator(), job[1]), jobs))


def _collect(parts, seed):
    values = np.concatenate([p[0] for p in parts])
    drawn = sum(p[1] for p in parts)
    weight = sum(p[2] for p in parts)
    return SirSamples(values, seed, drawn, weight / drawn)


def _check_trials(trials):
    if int(trials) != trials or trials < 1:
        raise ValueError(f"trials must be a positive integer, got {trials}")


def _prob_in_coverage(params: SystemParams, d_f: np.ndarray) -> np.ndarray:
    area = np.array([geometry.coverage_area_in_disk(float(d), params.R, params.kappa) for d in d_f])
    return -np.expm1(-params.mu_m * area)


def _fap_block(params, d_f, random_df, target_kind, mode, include_cross_femto, max_rounds=10_000):
    """Block task: SIR of a served user at the tagged FAP."""
    condition = "mu" if target_kind == "mu" else "fu"

    def task(gen, n):
        if random_df:
            pending = params.R * np.sqrt(gen.random(n))
        else:
            pending = np.full(n, float(d_f))
        if condition == "mu":
            if params.kappa == 0 or params.mu_m == 0:
                raise ConditioningError("kappa = 0 or mu_m = 0: a FAP never serves an MU")
            p_in = _prob_in_coverage(params, pending)
        else:
            p_in = np.full(n, -math.expm1(-params.n_fu))
        if p_in.mean() < MIN_EVENT_RATE:
            raise ConditioningError(
                f"P(tagged FAP has a {target_kind.upper()}) ~ {p_in.mean():.3g} is below {MIN_EVENT_RATE}"
            )
        slots = np.arange(n)
        out = np.empty(n)
        drawn = 0
        weight = 0.0
        for _ in range(max_rounds):
            if slots.size == 0:
                break
            batch = build_batch(params, slots.size, gen, d_f=pending[slots], condition=condition)
            if target_kind == "mu":
                ok = (batch.serving == 0).any(axis=1)
            else:
                ok = np.ones(slots.size, bool)
            drawn += slots.size
            weight += float(p_in[slots[ok]].sum())
            if drawn >= 64 and weight / drawn < MIN_EVENT_RATE:
                raise ConditioningError(f"conditioning event rate {weight / drawn:.3g} is below {MIN_EVENT_RATE}")
            if ok.any():
                out[slots[ok]] = fap_sir_batch(batch.take(ok), params, gen, target_kind, mode, include_cross_femto)
            slots = slots[~ok]
        else:
            raise ConditioningError("conditioning did not complete within the retry budget")
        return out, drawn, weight

    return task


def sample_sir_at_fap(
    params: SystemParams,
    d_f: Optional[float] = None,
    trials: int = DEFAULT_TRIALS,
    mode=CollisionMode.EXPECTED,
    seed: int = 0,
    threads: int = 1,
    target_kind: str = "mu",
    include_cross_femto: bool = False,
) -> SirSamples:
    """Effective SIR samples of a user served by the tagged FAP.

    ``d_f=None`` draws the FAP distance per trial with density ``2r / R^2``.
    ``event_rate`` reports the estimated probability of the conditioning
    event, averaged over the drawn realizations.
    """
    _check_trials(trials)
    if d_f is not None:
        params.check_distance(d_f)
    task = _fap_block(params, d_f, d_f is None, target_kind, CollisionMode(mode), include_cross_femto)
    return _collect(_run_blocks(task, trials, seed, threads), seed)


def estimate_outage_at_fap(params, d_f, trials=DEFAULT_TRIALS, mode=CollisionMode.EXPECTED, rng=0, threads=1, include_cross_femto=False) -> OutageEstimate:
    """Outage of a uniformly chosen MU served by a FAP at ``d_f``."""
    return sample_sir_at_fap(params, d_f, trials, mode, _seed(rng), threads, "mu", include_cross_femto).outage(params.T)


def estimate_outage_fu_at_fap(params, d_f, trials=DEFAULT_TRIALS, mode=CollisionMode.EXPECTED, rng=0, threads=1, include_cross_femto=False) -> OutageEstimate:
    """Outage of a uniformly chosen FU of a FAP at ``d_f`` (given it has one)."""
    return sample_sir_at_fap(params, d_f, trials, mode, _seed(rng), threads, "fu", include_cross_femto).outage(params.T)


def estimate_avg_outage_at_fap(params, trials=DEFAULT_TRIALS, mode=CollisionMode.EXPECTED, rng=0, threads=1, include_cross_femto=False) -> OutageEstimate:
    """As :func:`estimate_outage_at_fap` with ``d_f`` drawn per trial."""
    return sample_sir_at_fap(params, None, trials, mode, _seed(rng), threads, "mu", include_cross_femto).outage(params.T)


def sample_sir_at_mbs(
    params: SystemParams,
    trials: int = DEFAULT_TRIALS,
    mode=CollisionMode.EXPECTED,
    seed: int = 0,
    threads: int = 1,
    include_fu_at_mbs: bool = False,
    max_rounds: int = 10_000,
) -> SirSamples:
    """Effective SIR samples at the MBS of a uniformly chosen MBS-served MU."""
    _check_trials(trials)
    mode = CollisionMode(mode)
    if params.mu_m == 0:
        raise ConditioningError("mu_m = 0: there are no MUs")

    def task(gen, n):
        parts = []
        need = n
        drawn = 0
        for _ in range(max_rounds):
            if need == 0:
                break
            batch = build_batch(params, need, gen)
            ok = (batch.serving == MBS).any(axis=1)
            drawn += need
            if drawn >= 64 and (n - need + ok.sum()) / drawn < MIN_EVENT_RATE:
                raise ConditioningError("too few realizations with an MBS-served MU")
            if ok.any():
                parts.append(mbs_sir_batch(batch.take(ok), params, gen, mode, include_fu_at_mbs))
            need -= int(ok.sum())
        else:
            raise ConditioningError("conditioning did not complete within the retry budget")
        return np.concatenate(parts), drawn, float(n)

    return _collect(_run_blocks(task, trials, seed, threads), seed)


def estimate_outage_at_mbs(params, trials=DEFAULT_TRIALS, mode=CollisionMode.EXPECTED, rng=0, threads=1, include_fu_at_mbs=False) -> OutageEstimate:
    """Outage of a uniformly chosen MBS-served MU."""
    return sample_sir_at_mbs(params, trials, mode, _seed(rng), threads, include_fu_at_mbs).outage(params.T)


def outage_over_thresholds(samples: SirSamples, thresholds: Sequence[float]) -> list:
    """Outage estimates for several thresholds from one set of SIR samples
    (SIR does not depend on ``T``)."""
    return [samples.outage(float(T)) for T in thresholds]


def estimate_laplace_nm_bm(
    params: SystemParams,
    s: float,
    d_f: Optional[float] = None,
    trials: int = DEFAULT_TRIALS,
    rng=0,
    threads: int = 1,
) -> MeanEstimate:
    """Sample mean of ``exp(-s N)`` with ``N`` the number of MBS-served MUs.

    With ``d_f`` a FAP is placed at that distance on top of the FAP process.
    """
    if not s >= 0:
        raise ValueError(f"s must be >= 0, got {s}")
    _check_trials(trials)
    if d_f is not None:
        params.check_distance(d_f)
    seed = _seed(rng)

    def task(gen, n):
        batch = build_batch(params, n, gen, d_f=d_f)
        return np.exp(-s * batch.count_mbs())

    x = np.concatenate(_run_blocks(task, trials, seed, threads))
    se = float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else float("nan")
    return MeanEstimate(float(x.mean()), se, int(x.size), seed)


def _seed(rng) -> int:
    if isinstance(rng, RngStream):
        return rng.master_seed
    if rng is None:
        return 0
    if isinstance(rng, (int, np.integer)):
        return int(rng)
    raise TypeError("estimators take an integer seed or an RngStream")
