"""Uplink SIR of users served by a FAP and of MUs served by the MBS.

Every user runs power control towards its serving station, so a user served
by a FAP arrives there with power ``P_f`` and one served by the MBS arrives
with ``P_m``; at any other station its power is scaled by the ratio of path
losses ``(d_own / d_other)^alpha``.  With ``G = n_s n_h`` subchannels and a
random carrier per subband, an interferer collides with the target with
probability ``1 / n_h``.  Outage is evaluated on a single subband.

Noise is not modelled.  By default a FAP only hears its own users and the
MBS-served MUs, and the MBS does not hear femto users; the flags
``include_cross_femto`` and ``include_fu_at_mbs`` switch those terms on.
"""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass

import numpy as np

from .network import MBS, NetworkRealization, RealizationBatch
from .params import SystemParams
from .stochastic import as_generator

_MIN_DIST = 1e-9


class CollisionMode(str, enum.Enum):
    EXPECTED = "expected"
    SAMPLED = "sampled"


class ServingMismatch(ValueError):
    """The target user is not served by the station it was evaluated at."""


@dataclass(frozen=True)
class SirSample:
    value: float
    serving: int
    subband: int = 0


def _pick(eligible: np.ndarray, gen: np.random.Generator) -> np.ndarray:
    """One uniformly chosen eligible column per row."""
    keys = gen.random(eligible.shape)
    keys[~eligible] = -1.0
    return np.argmax(keys, axis=1)


def fap_powers(
    batch: RealizationBatch,
    params: SystemParams,
    targets: np.ndarray,
    target_kind: str = "mu",
    include_cross_femto: bool = False,
    p_m: float = 1.0,
):
    """Received powers at the tagged FAP (column 0).

    Returns ``(p_signal, P)`` where ``P`` has one column per MU slot followed
    by one per FU slot; non-interferers and the target have power 0.
    """
    p_f = params.eta * p_m
    a = params.alpha
    rows = np.arange(batch.size)
    a0 = batch.fap_xy[:, 0, :]

    d_tag = np.maximum(np.hypot(*(batch.mu_xy - a0[:, None, :]).transpose(2, 0, 1)), _MIN_DIST)
    d_mbs = np.maximum(np.hypot(batch.mu_xy[..., 0], batch.mu_xy[..., 1]), _MIN_DIST)
    s = batch.serving
    pm = np.zeros(s.shape)
    pm[s == 0] = p_f
    mbs = s == MBS
    pm[mbs] = p_m * (d_mbs[mbs] / d_tag[mbs]) ** a
    if include_cross_femto:
        other = s >= 1
        pm[other] = p_f * (batch.mu_d_own[other] / d_tag[other]) ** a

    owner = batch.fu_owner
    pf = np.zeros(owner.shape)
    pf[owner == 0] = p_f
    if include_cross_femto:
        other = owner >= 1
        d_fu = np.maximum(np.hypot(*(batch.fu_xy - a0[:, None, :]).transpose(2, 0, 1)), _MIN_DIST)
        pf[other] = p_f * (batch.fu_d_own[other] / d_fu[other]) ** a

    if target_kind == "mu":
        pm[rows, targets] = 0.0
    elif target_kind == "fu":
        pf[rows, targets] = 0.0
    else:
        raise ValueError(f"target_kind must be 'mu' or 'fu', got {target_kind!r}")
    return p_f, np.concatenate([pm, pf], axis=1)


def mbs_powers(
    batch: RealizationBatch,
    params: SystemParams,
    targets: np.ndarray,
    include_fu_at_mbs: bool = False,
    p_m: float = 1.0,
):
    """Received powers at the MBS; layout as in :func:`fap_powers`."""
    p_f = params.eta * p_m
    a = params.alpha
    rows = np.arange(batch.size)
    d_mbs = np.maximum(np.hypot(batch.mu_xy[..., 0], batch.mu_xy[..., 1]), _MIN_DIST)
    s = batch.serving
    pm = np.zeros(s.shape)
    pm[s == MBS] = p_m
    femto = s >= 0
    pm[femto] = p_f * (batch.mu_d_own[femto] / d_mbs[femto]) ** a
    pm[rows, targets] = 0.0

    pf = np.zeros(batch.fu_owner.shape)
    if include_fu_at_mbs:
        m = batch.fu_mask
        d_fu = np.maximum(np.hypot(batch.fu_xy[..., 0], batch.fu_xy[..., 1]), _MIN_DIST)
        pf[m] = p_f * (batch.fu_d_own[m] / d_fu[m]) ** a
    return p_m, np.concatenate([pm, pf], axis=1)


def sir_from_powers(p_signal, h0, powers, fading, params: SystemParams, mode=CollisionMode.EXPECTED, collide=None):
    """SIR from received powers and fading gains (last axis = interferers).

    In expected mode every interferer contributes ``P h / G``; in sampled mode
    only colliding ones contribute, with ``P h / n_s``.  No interference gives
    ``inf``.
    """
    powers = np.asarray(powers, dtype=float)
    fading = np.asarray(fading, dtype=float)
    if CollisionMode(mode) is CollisionMode.EXPECTED:
        interference = (powers * fading).sum(axis=-1) / params.G
    else:
        if collide is None:
            raise ValueError("sampled mode needs the collision indicators")
        interference = (powers * fading * collide).sum(axis=-1) / params.n_s
    signal = p_signal * np.asarray(h0, dtype=float) / params.n_s
    positive = interference > 0
    return np.where(positive, signal / np.where(positive, interference, 1.0), np.inf)


def _draw_sir(p_signal, powers, params, mode, gen):
    h0 = gen.exponential(params.sigma_sq, powers.shape[0])
    h = gen.exponential(params.sigma_sq, powers.shape)
    collide = None
    if CollisionMode(mode) is CollisionMode.SAMPLED:
        collide = gen.random(powers.shape) < 1.0 / params.n_h
    return sir_from_powers(p_signal, h0, powers, h, params, mode, collide)


def fap_sir_batch(
    batch: RealizationBatch,
    params: SystemParams,
    gen: np.random.Generator,
    target_kind: str = "mu",
    mode=CollisionMode.EXPECTED,
    include_cross_femto: bool = False,
    targets=None,
    p_m: float = 1.0,
) -> np.ndarray:
    """SIR at the tagged FAP of one user it serves per realization.

    Unless ``targets`` is given, the user is drawn uniformly among the
    tagged FAP's MUs (``target_kind="mu"``) or FUs (``"fu"``); every row
    must have at least one.
    """
    if targets is None:
        eligible = batch.serving == 0 if target_kind == "mu" else batch.fu_owner == 0
        if not eligible.any(axis=1).all():
            raise ServingMismatch("a realization has no user of the requested kind at the tagged FAP")
        targets = _pick(eligible, gen)
    p_sig, powers = fap_powers(batch, params, targets, target_kind, include_cross_femto, p_m)
    return _draw_sir(p_sig, powers, params, mode, gen)


def mbs_sir_batch(
    batch: RealizationBatch,
    params: SystemParams,
    gen: np.random.Generator,
    mode=CollisionMode.EXPECTED,
    include_fu_at_mbs: bool = False,
    targets=None,
    p_m: float = 1.0,
) -> np.ndarray:
    """SIR at the MBS of one uniformly chosen MBS-served MU per realization."""
    if targets is None:
        eligible = batch.serving == MBS
        if not eligible.any(axis=1).all():
            raise ServingMismatch("a realization has no MBS-served MU")
        targets = _pick(eligible, gen)
    p_sig, powers = mbs_powers(batch, params, targets, include_fu_at_mbs, p_m)
    return _draw_sir(p_sig, powers, params, mode, gen)


def _single(realization: NetworkRealization, target_fap=None) -> RealizationBatch:
    if target_fap is not None:
        realization = dataclasses.replace(realization, tagged_fap=target_fap)
    return RealizationBatch.from_realization(realization)


def fap_interference_powers(
    realization: NetworkRealization,
    target_fap: int,
    target_user: int,
    params: SystemParams,
    target_kind: str = "mu",
    include_cross_femto: bool = False,
    p_m: float = 1.0,
):
    """``(p_signal, powers)`` at ``target_fap``; ``powers`` lists every MU of
    the realization, then the FUs of ``target_fap``, then the other FUs."""
    _check_fap_target(realization, target_fap, target_user, target_kind)
    batch = _single(realization, target_fap)
    p_sig, powers = fap_powers(batch, params, np.array([target_user]), target_kind, include_cross_femto, p_m)
    return p_sig, powers[0]


def mbs_interference_powers(
    realization: NetworkRealization,
    target_user: int,
    params: SystemParams,
    include_fu_at_mbs: bool = False,
    p_m: float = 1.0,
):
    """``(p_signal, powers)`` at the MBS; MUs first, then FUs."""
    _check_mbs_target(realization, target_user)
    batch = _single(realization)
    p_sig, powers = mbs_powers(batch, params, np.array([target_user]), include_fu_at_mbs, p_m)
    return p_sig, powers[0]


def _check_fap_target(realization, target_fap, target_user, target_kind):
    if target_kind == "mu":
        if realization.serving[target_user] != target_fap:
            raise ServingMismatch(f"MU {target_user} is not served by FAP {target_fap}")
    elif target_kind == "fu":
        if not 0 <= target_user < len(realization.fus[target_fap]):
            raise ServingMismatch(f"FAP {target_fap} has no FU {target_user}")
    else:
        raise ValueError(f"target_kind must be 'mu' or 'fu', got {target_kind!r}")


def _check_mbs_target(realization, target_user):
    if realization.serving[target_user] != MBS:
        raise ServingMismatch(f"MU {target_user} is not served by the MBS")


def sir_user_at_fap(
    realization: NetworkRealization,
    target_fap: int,
    target_user: int,
    params: SystemParams,
    mode=CollisionMode.EXPECTED,
    rng=None,
    target_kind: str = "mu",
    include_cross_femto: bool = False,
) -> SirSample:
    """Subband-0 SIR of one MU (or FU) of ``target_fap``, with fresh fading."""
    _check_fap_target(realization, target_fap, target_user, target_kind)
    gen = as_generator(rng)
    value = fap_sir_batch(
        _single(realization, target_fap), params, gen, target_kind, mode,
        include_cross_femto, targets=np.array([target_user]),
    )[0]
    return SirSample(float(value), target_fap)


def sir_mu_at_mbs(
    realization: NetworkRealization,
    target_user: int,
    params: SystemParams,
    mode=CollisionMode.EXPECTED,
    rng=None,
    include_fu_at_mbs: bool = False,
) -> SirSample:
    """Subband-0 SIR at the MBS of an MBS-served MU, with fresh fading."""
    _check_mbs_target(realization, target_user)
    gen = as_generator(rng)
    value = mbs_sir_batch(
        _single(realization), params, gen, mode, include_fu_at_mbs,
        targets=np.array([target_user]),
    )[0]
    return SirSample(float(value), MBS)
