"""Closed-form quantities: Laplace transforms of the user counts, their
bounds, and upper/lower bounds on the outage probabilities of FAP-served and
MBS-served users.

Conventions
-----------
* ``s`` arguments of the per-interferer factors ``q_l``/``q_u`` follow the
  fading-averaged form ``1 / (1 + s sigma^2 delta^alpha / eta)``; outage
  bounds evaluate them at ``T_h / sigma^2``, so ``sigma^2`` cancels.
* Every ``(e^x - 1) / x`` is evaluated through :func:`_expm1_ratio` so the
  ``x -> 0`` limits are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geometry
from .geometry import QuantizationGrid
from .params import ParameterError, SystemParams


@dataclass(frozen=True)
class BoundPair:
    """Raw lower/upper expressions and their values clipped to ``[0, 1]``."""

    lower: float
    upper: float

    @property
    def lower_clamped(self) -> float:
        return min(max(self.lower, 0.0), 1.0)

    @property
    def upper_clamped(self) -> float:
        return min(max(self.upper, 0.0), 1.0)

    @property
    def was_clamped(self) -> bool:
        return self.lower != self.lower_clamped or self.upper != self.upper_clamped

    @property
    def ordered(self) -> bool:
        return self.lower <= self.upper

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.lower_clamped - slack <= value <= self.upper_clamped + slack


def _expm1_ratio(x: float) -> float:
    """``(e^x - 1) / x`` with the series branch near 0."""
    if abs(x) < 1e-6:
        return 1.0 + x / 2.0 + x * x / 6.0
    return math.expm1(x) / x


def _check_s(s: float) -> None:
    if not s >= 0:
        raise ValueError(f"s must be >= 0, got {s}")


# --- Laplace transforms of the user counts ---------------------------------


def laplace_n_fu(s: float, params: SystemParams) -> float:
    """``E[exp(-s N)]`` for the Poisson number of FUs of a FAP."""
    _check_s(s)
    return math.exp(params.n_fu * math.expm1(-s))


def laplace_n_mu_fap(s: float, d_f: float, params: SystemParams) -> float:
    """``E[exp(-s N)]`` for the MUs in the coverage circle of a FAP at ``d_f``."""
    _check_s(s)
    params.check_distance(d_f)
    return math.exp(params.n_mu_f(d_f) * math.expm1(-s))


def laplace_n_mu_fap_plus(s: float, d_f: float, params: SystemParams) -> float:
    """``E[exp(-s (N - 1)) | N >= 1]`` for the same count.

    Evaluated as ``n * g(n e^{-s}) / (e^n - 1)`` with ``g(x) = (e^x - 1)/x``,
    which equals ``e^s (e^{n(e^{-s}-1)} - e^{-n}) / (1 - e^{-n})``.
    """
    _check_s(s)
    params.check_distance(d_f)
    n = params.n_mu_f(d_f)
    if n <= 0:
        raise ParameterError("kappa", "conditioning on N >= 1 needs a positive mean count")
    return n * _expm1_ratio(n * math.exp(-s)) / math.expm1(n)


def tau(s: float, params: SystemParams) -> float:
    """Mean of ``exp((1 - e^{-s}) mu_m pi gamma d^2)`` over a uniformly placed
    FAP distance ``d``."""
    _check_s(s)
    return _expm1_ratio(-math.expm1(-s) * params.gamma * params.n_mu)


def chernoff_tail(params: SystemParams) -> float:
    """Chernoff bound on ``P(#FAPs > 1/gamma)``.

    The optimised exponent ``1/gamma - n + log(gamma n)/gamma`` is only the
    optimum when ``gamma n < 1``; otherwise the infimum over ``x > 0`` is
    attained as ``x -> 0`` and the bound is 1.
    """
    g = params.gamma
    n = params.n_fap
    if g == 0 or n == 0:
        return 0.0
    if g * n >= 1.0:
        return 1.0
    return math.exp(1.0 / g - n + math.log(g * n) / g)


def _mbs_count_lower(s: float, params: SystemParams) -> float:
    return math.exp(params.n_mu * math.expm1(-s))


def laplace_n_mu_mbs_bounds(s: float, params: SystemParams) -> BoundPair:
    """Bounds on ``E[exp(-s N)]`` for the number of MBS-served MUs."""
    _check_s(s)
    lower = _mbs_count_lower(s, params)
    upper = math.exp(params.n_mu * math.expm1(-s) + params.n_fap * (tau(s, params) - 1.0))
    return BoundPair(lower, upper + chernoff_tail(params))


def laplace_n_mu_mbs_cond_bounds(s: float, d_f: float, params: SystemParams) -> BoundPair:
    """As :func:`laplace_n_mu_mbs_bounds`, given a FAP at distance ``d_f``."""
    _check_s(s)
    params.check_distance(d_f)
    n_fap = params.n_fap
    if n_fap <= 0:
        raise ParameterError("lambda_f", "conditioning on a FAP needs lambda_f > 0")
    p_any = -math.expm1(-n_fap)
    tv = tau(s, params)
    main = math.exp((params.n_mu - params.n_mu_f(d_f)) * math.expm1(-s) + n_fap * (tv - 1.0))
    upper = main / (p_any * tv) + chernoff_tail(params) / p_any
    return BoundPair(_mbs_count_lower(s, params), upper)


# --- quantized interference factors ----------------------------------------


def q_pair(s: float, d_f: float, grid: QuantizationGrid, params: SystemParams, areas=None):
    """``(q_l, q_u)``: averages of ``1 / (1 + s sigma^2 x^alpha / eta)`` over
    the ratio bands, with ``x`` the upper (for ``q_l``) or lower (for ``q_u``)
    end of each band.  ``areas`` may pass a precomputed partition."""
    _check_s(s)
    if areas is None:
        areas = geometry.partition_areas(d_f, params.R, grid)
    if abs(grid.kappa - params.kappa) > 1e-12:
        raise ParameterError("kappa", f"grid starts at {grid.kappa}, system uses {params.kappa}")
    lv = np.asarray(grid.levels)
    t = grid.t
    a = params.alpha
    c = s * params.sigma_sq / params.eta
    p = areas.probs
    p_pos = p[t + 1 :]  # bands 1..t
    p_neg = p[:t][::-1]  # bands -1..-t
    p0 = p[t]
    lo, hi = lv[:-1], lv[1:]  # k_{i-1}, k_i for i = 1..t
    q_l = p0 / (1.0 + c * lv[0] ** a) + np.sum(
        p_pos / (1.0 + c / lo**a) + p_neg / (1.0 + c * hi**a)
    )
    q_u = p0 + np.sum(p_pos / (1.0 + c / hi**a) + p_neg / (1.0 + c * lo**a))
    return float(q_l), float(q_u)


# --- outage bounds ---------------------------------------------------------


def _own_cell_factor(n: float, T_h: float) -> float:
    """``(1 + T_h)(e^{n/(1+T_h)} - 1)/(e^n - 1)``; 1 in the ``n -> 0`` limit."""
    if n == 0:
        return 1.0
    return (1.0 + T_h) * math.expm1(n / (1.0 + T_h)) / math.expm1(n)


def outage_bounds_at_fap(d_f: float, grid: QuantizationGrid, params: SystemParams, areas=None) -> BoundPair:
    """Bounds on the outage probability of a user served by a FAP at ``d_f``."""
    params.check_distance(d_f)
    T_h = params.T_h
    # the upper bound on outage needs the smaller factor (largest ratios)
    q_l, q_u = q_pair(T_h / params.sigma_sq, d_f, grid, params, areas)
    n_f = params.n_mu_f(d_f)
    lead = _own_cell_factor(n_f, T_h) * math.exp(-params.n_fu * T_h / (1.0 + T_h))
    upper = 1.0 - lead * math.exp(-params.n_mu * (1.0 - q_l))

    n_fap = params.n_fap
    if n_fap <= 0:
        raise ParameterError("lambda_f", "the bounds condition on at least one FAP")
    p_any = -math.expm1(-n_fap)
    tau_o = tau(-math.log(q_u), params)
    inner = math.exp((params.n_mu - n_f) * (q_u - 1.0) + n_fap * (tau_o - 1.0)) / (p_any * tau_o)
    lower = 1.0 - lead * (inner + chernoff_tail(params) / p_any)
    return BoundPair(lower, upper)


def outage_bounds_at_mbs(params: SystemParams) -> BoundPair:
    """Bounds on the outage probability of an MBS-served MU."""
    T_h = params.T_h
    frac = T_h / (1.0 + T_h)
    tau_o = _expm1_ratio(params.gamma * params.n_mu * frac)
    lower = 1.0 - (1.0 + T_h) * (
        math.exp(-params.n_mu * frac + params.n_fap * (tau_o - 1.0)) + chernoff_tail(params)
    )
    upper = 1.0 - _own_cell_factor(params.n_mu, T_h)
    return BoundPair(lower, upper)


def radial_quadrature(R: float, quad_points: int):
    """Nodes and weights integrating against the density ``2r / R^2`` on (0, R)."""
    if quad_points < 2:
        raise ValueError(f"quad_points must be >= 2, got {quad_points}")
    x, w = np.polynomial.legendre.leggauss(quad_points)
    r = 0.5 * R * (x + 1.0)
    return r, 0.5 * R * w * 2.0 * r / R**2


def avg_outage_bounds_at_fap(grid: QuantizationGrid, params: SystemParams, quad_points: int = 128) -> BoundPair:
    """Average of the clamped FAP outage bounds over a FAP distance with
    density ``2r / R^2``."""
    nodes, weights = radial_quadrature(params.R, quad_points)
    lo = hi = 0.0
    for r, w in zip(nodes, weights):
        b = outage_bounds_at_fap(float(r), grid, params)
        lo += w * b.lower_clamped
        hi += w * b.upper_clamped
    return BoundPair(float(lo), float(hi))


# --- large-n_h approximations ----------------------------------------------


def approx_outage_at_fap(d_f: float, grid: QuantizationGrid, params: SystemParams, near_mbs: bool = False) -> BoundPair:
    """Simplified FAP outage bounds for many carriers per subband.

    ``near_mbs`` uses ``q ~ 1 / (1 + T_h / eta)`` (all ratios close to 1).
    """
    params.check_distance(d_f)
    T_h = params.T_h
    n_f = params.n_mu_f(d_f)
    shared = params.n_mu - 0.5 * params.gamma * params.n_fap * params.n_mu
    if near_mbs:
        base = T_h * (params.n_fu + params.n_mu / params.eta)
        upper = -math.expm1(-base)
        lower = -math.expm1(-base + T_h * (n_f + 0.5 * params.gamma * params.n_fap * params.n_mu) / params.eta)
        return BoundPair(lower, upper)
    q_l, q_u = q_pair(T_h / params.sigma_sq, d_f, grid, params)
    upper = -math.expm1(-params.n_fu * T_h - params.n_mu * (1.0 - q_l))
    lower = -math.expm1(-params.n_fu * T_h - (1.0 - q_u) * (shared - n_f))
    return BoundPair(lower, upper)


def approx_outage_at_mbs(params: SystemParams) -> float:
    """Simplified lower bound on the MBS outage probability."""
    return -math.expm1(-params.n_mu * params.T_h * (1.0 - 0.5 * params.gamma * params.n_fap))
