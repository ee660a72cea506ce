"""Random sampling primitives: keyed RNG streams, Poisson point processes on
disks and rings, Rayleigh fading powers."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    """A counter-based random stream keyed by ``(master_seed, stream_index)``.

    Backed by Philox with the 128-bit key ``stream_index << 64 | master_seed``,
    so any stream can be created directly from its index, in any order and
    on any thread, and always yields the same sequence.
    """

    master_seed: int
    stream_index: int = 0

    def __post_init__(self):
        if self.stream_index < 0 or self.stream_index > _MASK64:
            raise ValueError(f"stream_index out of range: {self.stream_index}")

    def generator(self) -> np.random.Generator:
        key = (self.stream_index << 64) | (self.master_seed & _MASK64)
        return np.random.Generator(np.random.Philox(key=key))


def as_generator(rng) -> np.random.Generator:
    """Accept a Generator, an RngStream or an integer seed."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    if rng is None or isinstance(rng, (int, np.integer)):
        return RngStream(0 if rng is None else int(rng)).generator()
    raise TypeError(f"cannot build a generator from {type(rng).__name__}")


def _uniform_disk(n, R, gen):
    r = R * np.sqrt(gen.random(n))
    th = 2.0 * np.pi * gen.random(n)
    return np.column_stack((r * np.cos(th), r * np.sin(th)))


def sample_ppp_disk(density: float, R: float, rng) -> np.ndarray:
    """PPP of the given density on the radius-``R`` disk at the origin.

    Returns an ``(N, 2)`` array, ``N ~ Poisson(pi R^2 density)``.
    """
    if density < 0 or R <= 0:
        raise ValueError(f"need density >= 0 and R > 0, got {density}, {R}")
    gen = as_generator(rng)
    n = gen.poisson(math.pi * R * R * density)
    return _uniform_disk(n, R, gen)


def annulus_points(n, r_in: float, width: float, gen) -> np.ndarray:
    """``n`` uniform points on the annulus ``r_in <= r <= r_in + width``
    centred at the origin, by inverse CDF of the radial law."""
    r_out = r_in + width
    u = gen.random(n)
    r = np.sqrt(r_in * r_in + u * (r_out * r_out - r_in * r_in))
    th = 2.0 * np.pi * gen.random(n)
    return np.column_stack((r * np.cos(th), r * np.sin(th)))


def sample_ppp_ring(density: float, center, r_f: float, delta: float, rng) -> np.ndarray:
    """PPP on the ring of inner radius ``r_f`` and width ``delta`` around ``center``."""
    if r_f < 0 or delta <= 0 or density < 0:
        raise ValueError(f"need r_f >= 0, delta > 0, density >= 0")
    gen = as_generator(rng)
    area = math.pi * ((r_f + delta) ** 2 - r_f**2)
    n = gen.poisson(area * density)
    pts = annulus_points(n, r_f, delta, gen)
    return pts + np.asarray(center, dtype=float)


def sample_fading_power(sigma_sq: float, rng, size=None):
    """Rayleigh power gain ``|h|^2``: exponential with mean ``sigma_sq``."""
    if sigma_sq <= 0:
        raise ValueError(f"sigma_sq must be positive, got {sigma_sq}")
    return as_generator(rng).exponential(sigma_sq, size=size)


def zero_truncated_poisson(mean, gen: np.random.Generator) -> np.ndarray:
    """Poisson variates conditioned on being >= 1.

    Runs a unit-rate-``mean`` Poisson process on [0, 1] given at least one
    arrival: the first arrival time is a truncated exponential and the rest
    of the interval contributes an ordinary Poisson count.  Exact and stable
    for arbitrarily small means.
    """
    mean = np.asarray(mean, dtype=float)
    if np.any(mean <= 0):
        raise ValueError("zero-truncated Poisson needs positive means")
    u = gen.random(mean.shape)
    t1 = -np.log1p(u * np.expm1(-mean)) / mean
    rest = np.clip(mean * (1.0 - t1), 0.0, None)
    return 1 + gen.poisson(rest).astype(np.int64)
