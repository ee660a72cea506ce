"""Network realizations: FAPs, macro users and femto users drawn from Poisson
point processes, and the distance-ratio open-access assignment.

Realizations are generated in batches of padded arrays so the Monte Carlo
engine can process many of them at once; :class:`NetworkRealization` is the
unpadded view of a single one.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import geometry
from .params import ParameterError, SystemParams
from .stochastic import annulus_points, as_generator, zero_truncated_poisson

MBS = -1
_PAD = -2
# MUs closer than this to the MBS are treated as lying at this distance
_MIN_DIST = 1e-9
# coordinate used for padded FAP slots so they never win a nearest search
_FAR = 1e12


@dataclass(frozen=True)
class UserCounts:
    n_fu_tagged: int
    n_mu_tagged: int
    n_mu_mbs: int


@dataclass(frozen=True)
class NetworkRealization:
    """One sampled network.  The MBS sits at the origin.

    ``serving[k]`` is the FAP index serving MU ``k`` or ``MBS`` (-1).
    ``fus[j]`` holds the femto users of FAP ``j``.
    """

    faps: np.ndarray
    mus: np.ndarray
    fus: tuple
    serving: np.ndarray
    tagged_fap: Optional[int] = None

    def served_by(self, fap: int) -> np.ndarray:
        return np.flatnonzero(self.serving == fap)

    def mbs_users(self) -> np.ndarray:
        return np.flatnonzero(self.serving == MBS)


@dataclass
class RealizationBatch:
    """``B`` realizations stored as padded arrays.

    When ``tagged`` is set, FAP column 0 of every row is the tagged FAP.
    """

    fap_xy: np.ndarray  # (B, F, 2)
    fap_mask: np.ndarray  # (B, F)
    mu_xy: np.ndarray  # (B, M, 2)
    mu_mask: np.ndarray  # (B, M)
    serving: np.ndarray  # (B, M) FAP column, MBS, or _PAD
    mu_d_own: np.ndarray  # (B, M) distance to the nearest FAP (inf if none)
    fu_xy: np.ndarray  # (B, K, 2)
    fu_owner: np.ndarray  # (B, K) FAP column or _PAD
    fu_d_own: np.ndarray  # (B, K)
    tagged: bool

    @property
    def size(self) -> int:
        return self.fap_xy.shape[0]

    @property
    def fu_mask(self) -> np.ndarray:
        return self.fu_owner != _PAD

    def take(self, rows) -> "RealizationBatch":
        return RealizationBatch(
            fap_xy=self.fap_xy[rows],
            fap_mask=self.fap_mask[rows],
            mu_xy=self.mu_xy[rows],
            mu_mask=self.mu_mask[rows],
            serving=self.serving[rows],
            mu_d_own=self.mu_d_own[rows],
            fu_xy=self.fu_xy[rows],
            fu_owner=self.fu_owner[rows],
            fu_d_own=self.fu_d_own[rows],
            tagged=self.tagged,
        )

    def count_served(self, fap: int = 0) -> np.ndarray:
        return np.count_nonzero(self.serving == fap, axis=1)

    def count_mbs(self) -> np.ndarray:
        return np.count_nonzero(self.serving == MBS, axis=1)

    def count_fus(self, fap: int = 0) -> np.ndarray:
        return np.count_nonzero(self.fu_owner == fap, axis=1)

    def realization(self, i: int) -> NetworkRealization:
        fmask = self.fap_mask[i]
        cols = np.flatnonzero(fmask)
        # columns are dense from 0 except for the tagged slot, so a remap is cheap
        remap = {int(c): k for k, c in enumerate(cols)}
        mmask = self.mu_mask[i]
        serving = np.array(
            [MBS if s == MBS else remap[int(s)] for s in self.serving[i][mmask]],
            dtype=np.int64,
        )
        fus = tuple(self.fu_xy[i][self.fu_owner[i] == c] for c in cols)
        return NetworkRealization(
            faps=self.fap_xy[i][fmask],
            mus=self.mu_xy[i][mmask],
            fus=fus,
            serving=serving,
            tagged_fap=0 if self.tagged else None,
        )

    @classmethod
    def from_realization(cls, real: NetworkRealization) -> "RealizationBatch":
        """Wrap a single realization; the tagged FAP (if any) moves to column 0."""
        n_f = len(real.faps)
        order = list(range(n_f))
        if real.tagged_fap is not None:
            order.remove(real.tagged_fap)
            order.insert(0, real.tagged_fap)
        col_of = {old: new for new, old in enumerate(order)}
        faps = np.asarray(real.faps, dtype=float).reshape(-1, 2)[order]
        mus = np.asarray(real.mus, dtype=float).reshape(-1, 2)
        serving = np.array([MBS if s == MBS else col_of[int(s)] for s in real.serving], dtype=np.int64)
        fu_xy = [np.asarray(real.fus[j], dtype=float).reshape(-1, 2) for j in order]
        owners = np.concatenate([np.full(len(p), c, dtype=np.int64) for c, p in enumerate(fu_xy)] or [np.empty(0, np.int64)])
        fu_flat = np.concatenate(fu_xy) if fu_xy else np.empty((0, 2))
        d_own = np.hypot(*(fu_flat - faps[owners]).T) if len(fu_flat) else np.empty(0)
        mu_d_own = _nearest(mus[None], faps[None], np.ones((1, n_f), bool))[1][0]
        femto = serving >= 0
        mu_d_own[femto] = np.hypot(*(mus[femto] - faps[serving[femto]]).T)
        return cls(
            fap_xy=faps[None],
            fap_mask=np.ones((1, n_f), bool),
            mu_xy=mus[None],
            mu_mask=np.ones((1, len(mus)), bool),
            serving=serving[None],
            mu_d_own=mu_d_own[None],
            fu_xy=fu_flat[None],
            fu_owner=owners[None],
            fu_d_own=d_own[None],
            tagged=real.tagged_fap is not None,
        )


def _scatter(counts: np.ndarray, values: np.ndarray, fill):
    """Pack trial-grouped rows ``values`` into a ``(B, max(counts), ...)`` array."""
    B = len(counts)
    width = int(counts.max()) if B else 0
    trial = np.repeat(np.arange(B), counts)
    start = np.cumsum(counts) - counts
    rank = np.arange(len(trial)) - start[trial]
    out = np.full((B, width) + values.shape[1:], fill, dtype=values.dtype)
    out[trial, rank] = values
    mask = np.zeros((B, width), bool)
    mask[trial, rank] = True
    return out, mask


def _uniform_disk(n, R, gen):
    r = R * np.sqrt(gen.random(n))
    th = 2.0 * np.pi * gen.random(n)
    return np.column_stack((r * np.cos(th), r * np.sin(th)))


def _uniform_in_clipped_circles(cx, rc, R, gen):
    """One uniform point per entry in ``circle(cx[k], rc[k]) ∩ disk(R)``."""
    out = np.empty((len(cx), 2))
    todo = np.arange(len(cx))
    while todo.size:
        r = rc[todo] * np.sqrt(gen.random(todo.size))
        th = 2.0 * np.pi * gen.random(todo.size)
        x = cx[todo] + r * np.cos(th)
        y = r * np.sin(th)
        ok = x * x + y * y <= R * R
        out[todo[ok], 0] = x[ok]
        out[todo[ok], 1] = y[ok]
        todo = todo[~ok]
    return out


def _nearest(mu_xy, fap_xy, fap_mask):
    """Index of and distance to the nearest FAP, per user."""
    B, M = mu_xy.shape[:2]
    if fap_xy.shape[1] == 0 or M == 0:
        return np.zeros((B, M), np.int64), np.full((B, M), np.inf)
    dx = mu_xy[:, :, None, 0] - fap_xy[:, None, :, 0]
    dy = mu_xy[:, :, None, 1] - fap_xy[:, None, :, 1]
    d2 = dx * dx + dy * dy
    # padded FAP slots sit at _FAR already; the mask covers any other filler
    if not fap_mask.all():
        d2 = np.where(fap_mask[:, None, :], d2, np.inf)
    idx = np.argmin(d2, axis=2)
    return idx, np.sqrt(np.take_along_axis(d2, idx[:, :, None], axis=2)[:, :, 0])


def _assign(mu_xy, mu_mask, fap_xy, fap_mask, kappa):
    idx, dmin = _nearest(mu_xy, fap_xy, fap_mask)
    d_mbs = np.maximum(np.hypot(mu_xy[..., 0], mu_xy[..., 1]), _MIN_DIST)
    serving = np.where(dmin < kappa * d_mbs, idx, MBS)
    serving[~mu_mask] = _PAD
    return serving, dmin


def assign_users(faps, mus, kappa: float) -> np.ndarray:
    """Serving station of each MU: its nearest FAP if that FAP is closer than
    ``kappa`` times the MBS distance, otherwise the MBS (``-1``)."""
    if not 0 <= kappa < 1:
        raise ParameterError("kappa", f"must lie in [0, 1), got {kappa}")
    faps = np.asarray(faps, dtype=float).reshape(-1, 2)
    mus = np.asarray(mus, dtype=float).reshape(-1, 2)
    serving, _ = _assign(mus[None], np.ones((1, len(mus)), bool), faps[None],
                         np.ones((1, len(faps)), bool), kappa)
    return serving[0]


def build_batch(
    params: SystemParams,
    n: int,
    rng,
    d_f=None,
    condition: Optional[str] = None,
) -> RealizationBatch:
    """Draw ``n`` independent realizations.

    ``d_f`` (scalar or length-``n`` array) superposes a tagged FAP at
    ``(d_f, 0)`` on the FAP process.  ``condition`` draws the realizations
    given an event on the tagged FAP:

    * ``"mu"``: at least one MU inside its coverage circle (zero-truncated
      count there, independent PPP elsewhere).  Whether the FAP actually
      serves one still depends on its neighbours; callers reject on that.
    * ``"fu"``: at least one femto user.
    """
    gen = as_generator(rng)
    R = params.R
    if d_f is not None:
        d_f = np.broadcast_to(np.asarray(d_f, dtype=float), (n,)).copy()
        if np.any((d_f <= 0) | (d_f >= R)):
            raise ParameterError("d_f", f"must lie in (0, R={R})")
    elif condition is not None:
        raise ValueError("conditioning requires a tagged FAP distance")

    # FAPs
    counts = gen.poisson(params.n_fap, n)
    pts = _uniform_disk(int(counts.sum()), R, gen)
    fap_xy, fap_mask = _scatter(counts, pts, _FAR)
    if d_f is not None:
        tag = np.zeros((n, 1, 2))
        tag[:, 0, 0] = d_f
        fap_xy = np.concatenate([tag, fap_xy], axis=1)
        fap_mask = np.concatenate([np.ones((n, 1), bool), fap_mask], axis=1)

    # MUs
    if condition == "mu":
        if params.kappa == 0 or params.mu_m == 0:
            raise ParameterError("kappa", "a FAP cannot serve MUs when kappa = 0 or mu_m = 0")
        k2 = 1.0 - params.kappa**2
        cx = d_f / k2
        rc = params.kappa * d_f / k2
        cover = np.array([geometry.coverage_area_in_disk(d, R, params.kappa) for d in d_f])
        n_in = zero_truncated_poisson(params.mu_m * cover, gen)
        owner = np.repeat(np.arange(n), n_in)
        inside, in_mask = _scatter(n_in, _uniform_in_clipped_circles(cx[owner], rc[owner], R, gen), 0.0)
        m_out = gen.poisson(params.n_mu, n)
        pts = _uniform_disk(int(m_out.sum()), R, gen)
        owner = np.repeat(np.arange(n), m_out)
        keep = np.hypot(pts[:, 0] - cx[owner], pts[:, 1]) >= rc[owner]
        outside, out_mask = _scatter(np.bincount(owner[keep], minlength=n), pts[keep], 0.0)
        mu_xy = np.concatenate([inside, outside], axis=1)
        mu_mask = np.concatenate([in_mask, out_mask], axis=1)
    else:
        m = gen.poisson(params.n_mu, n)
        mu_xy, mu_mask = _scatter(m, _uniform_disk(int(m.sum()), R, gen), 0.0)

    serving, d_own = _assign(mu_xy, mu_mask, fap_xy, fap_mask, params.kappa)

    # FUs, one ring per FAP
    trial, col = np.nonzero(fap_mask)
    per_fap = gen.poisson(params.n_fu, len(trial))
    if condition == "fu":
        first = col == 0
        per_fap[first] = zero_truncated_poisson(np.full(int(first.sum()), params.n_fu), gen)
    ring = annulus_points(int(per_fap.sum()), params.r_f, params.delta, gen)
    src = np.repeat(np.arange(len(trial)), per_fap)
    fu_pts = ring + fap_xy[trial[src], col[src]]
    fu_counts = np.bincount(trial[src], minlength=n)
    fu_xy, _ = _scatter(fu_counts, fu_pts, 0.0)
    fu_owner, _ = _scatter(fu_counts, col[src].astype(np.int64), _PAD)
    fu_d_own, _ = _scatter(fu_counts, np.hypot(ring[:, 0], ring[:, 1]), np.inf)

    return RealizationBatch(
        fap_xy=fap_xy,
        fap_mask=fap_mask,
        mu_xy=mu_xy,
        mu_mask=mu_mask,
        serving=serving,
        mu_d_own=d_own,
        fu_xy=fu_xy,
        fu_owner=fu_owner,
        fu_d_own=fu_d_own,
        tagged=d_f is not None,
    )


def build_realization(params: SystemParams, d_f: Optional[float] = None, rng=None) -> NetworkRealization:
    """Sample one network; with ``d_f`` a tagged FAP is added at ``(d_f, 0)``
    and gets index 0."""
    if d_f is not None:
        params.check_distance(d_f)
    return build_batch(params, 1, rng, d_f=d_f).realization(0)


def user_counts(realization: NetworkRealization, tagged_fap: Optional[int] = None) -> UserCounts:
    if tagged_fap is None:
        tagged_fap = realization.tagged_fap
    if tagged_fap is None:
        raise ValueError("no tagged FAP given")
    return UserCounts(
        n_fu_tagged=len(realization.fus[tagged_fap]),
        n_mu_tagged=int(np.count_nonzero(realization.serving == tagged_fap)),
        n_mu_mbs=int(np.count_nonzero(realization.serving == MBS)),
    )


CSV_COLUMNS = ("entity_type", "x", "y", "fap_index", "serving")


def write_realization_csv(realization: NetworkRealization, fh) -> None:
    """Dump a realization, one row per station or user.

    ``fap_index`` is the FAP's own index (FAP rows) or the owning FAP (FU
    rows); ``serving`` is ``mbs`` or a FAP index for users.
    """
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    w.writerow(["mbs", repr(0.0), repr(0.0), "", ""])
    for j, (x, y) in enumerate(realization.faps):
        w.writerow(["fap", repr(float(x)), repr(float(y)), j, ""])
    for (x, y), s in zip(realization.mus, realization.serving):
        w.writerow(["mu", repr(float(x)), repr(float(y)), "", "mbs" if s == MBS else int(s)])
    for j, pts in enumerate(realization.fus):
        for x, y in pts:
            w.writerow(["fu", repr(float(x)), repr(float(y)), j, j])


def read_realization_csv(fh) -> NetworkRealization:
    rows = list(csv.DictReader(fh))
    faps = [(float(r["x"]), float(r["y"])) for r in rows if r["entity_type"] == "fap"]
    mus = [(float(r["x"]), float(r["y"])) for r in rows if r["entity_type"] == "mu"]
    serving = [MBS if r["serving"] == "mbs" else int(r["serving"]) for r in rows if r["entity_type"] == "mu"]
    fus = [[] for _ in faps]
    for r in rows:
        if r["entity_type"] == "fu":
            fus[int(r["fap_index"])].append((float(r["x"]), float(r["y"])))
    return NetworkRealization(
        faps=np.asarray(faps, dtype=float).reshape(-1, 2),
        mus=np.asarray(mus, dtype=float).reshape(-1, 2),
        fus=tuple(np.asarray(p, dtype=float).reshape(-1, 2) for p in fus),
        serving=np.asarray(serving, dtype=np.int64),
    )
