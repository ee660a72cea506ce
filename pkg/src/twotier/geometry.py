"""Planar geometry of the macrocell: FAP coverage circles, distance-ratio
(Apollonius) partitions of the disk and their areas.

Coordinate frame: MBS at the origin, the FAP of interest on the positive
x-axis at distance ``d_f``.  For a point ``u`` the ratio
``delta = d(u, MBS) / d(u, FAP)`` classifies it; the level sets of ``delta``
are circles (Apollonius circles) except ``delta = 1``, which is the
perpendicular bisector ``x = d_f / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

# acos arguments closer than this to +-1 are snapped onto the boundary
_ACOS_SNAP = 1e-12
# relative tolerance on negative areas produced by the subtractive recursions
_AREA_EPS = 1e-6


class GeometryError(ValueError):
    """Raised for inputs outside the domain of a geometric construction."""


@dataclass(frozen=True)
class Circle:
    center_x: float
    center_y: float
    radius: float

    def __post_init__(self):
        if self.radius < 0:
            raise GeometryError(f"radius must be >= 0, got {self.radius}")

    @property
    def area(self) -> float:
        return math.pi * self.radius**2

    def contains(self, x, y):
        """Vectorised strict interior test."""
        return (np.asarray(x) - self.center_x) ** 2 + (
            np.asarray(y) - self.center_y
        ) ** 2 < self.radius**2


@dataclass(frozen=True)
class QuantizationGrid:
    """Ladder ``kappa = k_0 < k_1 < ... < k_t = 1`` of distance ratios."""

    levels: tuple[float, ...]

    def __post_init__(self):
        lv = tuple(float(v) for v in self.levels)
        object.__setattr__(self, "levels", lv)
        if len(lv) < 2:
            raise GeometryError("a quantization grid needs t >= 1 (two levels)")
        if lv[-1] != 1.0:
            raise GeometryError(f"last level must be exactly 1, got {lv[-1]}")
        if not 0.0 < lv[0] < 1.0:
            raise GeometryError(f"first level must lie in (0, 1), got {lv[0]}")
        if any(b <= a for a, b in zip(lv, lv[1:])):
            raise GeometryError("levels must be strictly increasing")

    @classmethod
    def uniform(cls, kappa: float, t: int = 32) -> "QuantizationGrid":
        """Uniform spacing ``k_j = kappa + j (1 - kappa) / t``.

        Doubling ``t`` produces a grid that contains the previous one.
        """
        if t < 1:
            raise GeometryError(f"t must be >= 1, got {t}")
        if not 0.0 < kappa < 1.0:
            raise GeometryError(f"kappa must lie in (0, 1), got {kappa}")
        levels = [kappa + j * (1.0 - kappa) / t for j in range(t)] + [1.0]
        return cls(tuple(levels))

    @property
    def kappa(self) -> float:
        return self.levels[0]

    @property
    def t(self) -> int:
        return len(self.levels) - 1


@dataclass(frozen=True)
class PartitionAreas:
    """Areas ``s_{-t}..s_t`` of the ratio bands and their probabilities.

    ``areas[k]`` holds the band with signed index ``k - t``.
    """

    areas: np.ndarray
    total: float
    probs: np.ndarray
    grid: QuantizationGrid

    @property
    def t(self) -> int:
        return self.grid.t

    def area(self, i: int) -> float:
        return float(self.areas[i + self.t])

    def prob(self, i: int) -> float:
        return float(self.probs[i + self.t])

    @property
    def indices(self) -> np.ndarray:
        return np.arange(-self.t, self.t + 1)


def gamma(kappa: float) -> float:
    """Squared coverage-radius factor ``kappa^2 / (1 - kappa^2)^2``."""
    if kappa < 0 or kappa >= 1:
        raise GeometryError(f"kappa must lie in [0, 1), got {kappa}")
    return kappa**2 / (1.0 - kappa**2) ** 2


def fap_coverage_circle(d_f: float, kappa: float) -> Circle:
    """Locus ``d(u, FAP) < kappa d(u, MBS)`` for a FAP at ``(d_f, 0)``."""
    if d_f <= 0:
        raise GeometryError(f"d_f must be positive, got {d_f}")
    if not 0.0 <= kappa < 1.0:
        raise GeometryError(f"kappa must lie in [0, 1), got {kappa}")
    k2 = 1.0 - kappa**2
    return Circle(d_f / k2, 0.0, kappa * d_f / k2)


def inner_apollonius_circle(d_f: float, kappa_i: float) -> Circle:
    """Locus ``d(u, MBS) / d(u, FAP) = kappa_i`` on the MBS side.

    The interior is ``{delta < kappa_i}``.  ``kappa_i = 1`` is a line and has
    no circle; use :func:`bisector_segment_area` for it.
    """
    if d_f <= 0:
        raise GeometryError(f"d_f must be positive, got {d_f}")
    if not 0.0 < kappa_i < 1.0:
        raise GeometryError(f"kappa_i must lie in (0, 1), got {kappa_i}")
    k2 = 1.0 - kappa_i**2
    return Circle(-(kappa_i**2) * d_f / k2, 0.0, kappa_i * d_f / k2)


def _safe_acos(x: float) -> float:
    if x > 1.0:
        if x - 1.0 > _ACOS_SNAP:
            raise GeometryError(f"acos argument {x} outside [-1, 1]")
        x = 1.0
    elif x < -1.0:
        if -1.0 - x > _ACOS_SNAP:
            raise GeometryError(f"acos argument {x} outside [-1, 1]")
        x = -1.0
    return math.acos(x)


def circle_outside_area(a: float, b: float, c: float) -> float:
    """Area of the radius-``a`` circle lying outside a radius-``b`` circle
    whose centre is ``c`` away.

    In the partially overlapping regime this is

        a^2 asec(2ac / (b^2 - a^2 - c^2)) - b^2 asec(2bc / (b^2 + c^2 - a^2))
            + sqrt((a+b+c)(b+c-a)(c+a-b)(a+b-c)) / 2

    written with ``asec(x) = acos(1/x)``.
    """
    if a < 0 or b < 0 or c < 0:
        raise GeometryError(f"negative argument in f({a}, {b}, {c})")
    if a == 0:
        return 0.0
    if c >= a + b:
        return math.pi * a * a
    if c + a <= b:
        return 0.0
    if c + b <= a:
        return math.pi * (a * a - b * b)
    t1 = _safe_acos((b * b - a * a - c * c) / (2.0 * a * c))
    t2 = _safe_acos((b * b + c * c - a * a) / (2.0 * b * c))
    heron = (a + b + c) * (b + c - a) * (c + a - b) * (a + b - c)
    return a * a * t1 - b * b * t2 + 0.5 * math.sqrt(max(heron, 0.0))


def lens_area(a: float, b: float, c: float) -> float:
    """Intersection area of two circles (radii ``a``, ``b``, centres ``c`` apart)."""
    return math.pi * a * a - circle_outside_area(a, b, c)


def bisector_segment_area(R: float, d_f: float) -> float:
    """Area of the radius-``R`` disk on the FAP side of ``x = d_f / 2``."""
    if not 0.0 <= d_f < 2.0 * R:
        raise GeometryError(f"need 0 <= d_f < 2R, got d_f={d_f}, R={R}")
    theta = math.acos(d_f / (2.0 * R))
    return R * R * (theta - 0.5 * math.sin(2.0 * theta))


def _clipped_area(circle: Circle, R: float) -> float:
    """Area of ``circle`` inside the macrocell disk (both centred on the x-axis)."""
    return circle.area - circle_outside_area(circle.radius, R, abs(circle.center_x))


def coverage_area_in_disk(d_f: float, R: float, kappa: float) -> float:
    """Area of the FAP coverage circle clipped to the macrocell."""
    if kappa == 0:
        return 0.0
    return _clipped_area(fap_coverage_circle(d_f, kappa), R)


def partition_areas(d_f: float, R: float, grid: QuantizationGrid) -> PartitionAreas:
    """Areas of the ratio bands inside the macrocell, outside the FAP coverage.

    Band ``i >= 1`` holds ``1/k_i < delta <= 1/k_{i-1}``, band ``-i`` holds
    ``k_{i-1} < delta <= k_i`` and band ``0`` holds ``delta <= kappa``.  Each
    band is a difference of nested clipped Apollonius discs, with the
    bisector half-disks closing the ladder at ``k_t = 1``.
    """
    if not 0.0 < d_f < R:
        raise GeometryError(f"d_f must lie in (0, R), got d_f={d_f}, R={R}")
    lv = grid.levels
    t = grid.t
    # clipped area of {delta > 1/k} (FAP side) and {delta < k} (MBS side)
    fap_side = [_clipped_area(fap_coverage_circle(d_f, k), R) for k in lv[:-1]]
    mbs_side = [_clipped_area(inner_apollonius_circle(d_f, k), R) for k in lv[:-1]]
    half_fap = bisector_segment_area(R, d_f)
    half_mbs = math.pi * R * R - half_fap
    fap_side.append(half_fap)
    mbs_side.append(half_mbs)

    areas = np.empty(2 * t + 1)
    areas[t] = mbs_side[0]
    for i in range(1, t + 1):
        areas[t + i] = fap_side[i] - fap_side[i - 1]
        areas[t - i] = mbs_side[i] - mbs_side[i - 1]

    eps = _AREA_EPS * math.pi * R * R
    if areas.min() < -eps:
        raise ArithmeticError(
            f"negative band area {areas.min()} for d_f={d_f}, R={R}"
        )
    areas = np.clip(areas, 0.0, None)
    total = float(areas.sum())
    return PartitionAreas(areas=areas, total=total, probs=areas / total, grid=grid)


def distance_ratio(x, y, d_f: float):
    """``d(u, MBS) / d(u, FAP)`` for points ``(x, y)``; FAP at ``(d_f, 0)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    to_fap = np.hypot(x - d_f, y)
    with np.errstate(divide="ignore"):
        return np.hypot(x, y) / to_fap


def band_index(delta, grid: QuantizationGrid):
    """Signed band index ``-t..t`` of each ratio (see :func:`partition_areas`).

    Ratios above ``1/kappa`` (inside the FAP coverage) map to ``t + 1``.
    """
    delta = np.asarray(delta, dtype=float)
    lv = np.asarray(grid.levels)
    t = grid.t
    out = np.empty(delta.shape, dtype=np.int64)
    low = delta <= 1.0
    # k_{j-1} < delta <= k_j  ->  -j ; delta <= k_0 -> 0
    j = np.searchsorted(lv, delta[low], side="left")
    out[low] = -j
    # 1/k_j < delta <= 1/k_{j-1}  ->  j ; delta > 1/k_0 -> t+1 (covered).
    # -1/k is increasing, so this counts the levels with 1/k_j >= delta.
    n_ge = np.searchsorted(-1.0 / lv, -delta[~low], side="right")
    out[~low] = np.where(n_ge == 0, t + 1, n_ge)
    return out


def quantize_ratio(delta, grid: QuantizationGrid):
    """Lower and upper quantizations of ratios of MBS-eligible points.

    Returns ``(lower, upper)`` with ``lower <= delta <= upper``; the lower
    quantizer maps ``delta <= kappa`` to 0.
    """
    idx = np.asarray(band_index(delta, grid))
    if np.any(idx > grid.t):
        raise GeometryError("ratio above 1/kappa: point is inside the FAP coverage")
    lv = np.asarray(grid.levels)
    lower = np.empty(idx.shape)
    upper = np.empty(idx.shape)
    zero = idx == 0
    lower[zero] = 0.0
    upper[zero] = lv[0]
    neg = idx < 0
    j = -idx[neg]
    lower[neg] = lv[j - 1]
    upper[neg] = lv[j]
    pos = idx > 0
    j = idx[pos]
    lower[pos] = 1.0 / lv[j]
    upper[pos] = 1.0 / lv[j - 1]
    return lower, upper


def sample_uniform_disk(n: int, R: float, rng: np.random.Generator):
    """``n`` uniform points on the radius-``R`` disk via ``r = R sqrt(u)``."""
    u = rng.random(n)
    v = rng.random(n)
    r = R * np.sqrt(u)
    th = 2.0 * np.pi * v
    return r * np.cos(th), r * np.sin(th)


def monte_carlo_area(
    region_predicate: Callable,
    R: float,
    n_samples: int,
    seed: int,
    chunk: int = 1 << 20,
) -> float:
    """Area of ``{p in disk : predicate(x, y)}`` from uniform disk samples.

    ``region_predicate`` is called on coordinate arrays and must return a
    boolean array.
    """
    return monte_carlo_area_with_error(region_predicate, R, n_samples, seed, chunk)[0]


def monte_carlo_area_with_error(
    region_predicate: Callable,
    R: float,
    n_samples: int,
    seed: int,
    chunk: int = 1 << 20,
) -> tuple[float, float]:
    """Like :func:`monte_carlo_area` but also returns the standard error."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    hits = 0
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        x, y = sample_uniform_disk(m, R, rng)
        hits += int(np.count_nonzero(region_predicate(x, y)))
        done += m
    frac = hits / n_samples
    disk = math.pi * R * R
    return disk * frac, disk * math.sqrt(frac * (1.0 - frac) / n_samples)


def monte_carlo_band_areas(
    d_f: float,
    R: float,
    grid: QuantizationGrid,
    n_samples: int,
    seed: int,
) -> tuple[np.ndarray, float]:
    """Band areas ``s_{-t}..s_t`` and coverage area by classifying uniform
    disk samples with their exact ratio.  Returns ``(areas, coverage)``."""
    rng = np.random.default_rng(seed)
    x, y = sample_uniform_disk(n_samples, R, rng)
    idx = band_index(distance_ratio(x, y, d_f), grid)
    t = grid.t
    counts = np.bincount(idx + t, minlength=2 * t + 2)
    disk = math.pi * R * R
    return disk * counts[: 2 * t + 1] / n_samples, disk * counts[2 * t + 1] / n_samples


def sample_points_in_region(
    n: int,
    R: float,
    keep: Callable,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """``n`` uniform points on ``{p in disk : keep(x, y)}`` by rejection."""
    xs: list[np.ndarray] = []
    ys: list[np.ndarray] = []
    have = 0
    while have < n:
        x, y = sample_uniform_disk(max(2 * (n - have), 1024), R, rng)
        ok = keep(x, y)
        xs.append(x[ok])
        ys.append(y[ok])
        have += int(ok.sum())
    return np.concatenate(xs)[:n], np.concatenate(ys)[:n]
