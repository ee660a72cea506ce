"""Uplink outage analysis of a two-tier femto/macro network with open access.

The modules split as follows:

- ``geometry``: coverage circles, distance-ratio bands and their areas.
- ``stochastic``: keyed RNG streams, PPP samplers, fading.
- ``network``: random network realizations and user-to-station assignment.
- ``sir``: uplink SIR at a FAP or at the MBS.
- ``montecarlo``: outage and Laplace-transform estimators.
- ``bounds``: closed-form transforms and outage bounds.
- ``cli``: command line front end.
"""

from .bounds import (
    BoundPair,
    avg_outage_bounds_at_fap,
    outage_bounds_at_fap,
    outage_bounds_at_mbs,
    q_pair,
)
from .geometry import QuantizationGrid, partition_areas
from .montecarlo import (
    OutageEstimate,
    estimate_avg_outage_at_fap,
    estimate_laplace_nm_bm,
    estimate_outage_at_fap,
    estimate_outage_at_mbs,
    estimate_outage_fu_at_fap,
)
from .network import build_realization
from .params import DEFAULTS, ParameterError, SystemParams
from .sir import CollisionMode

__all__ = [
    "BoundPair",
    "CollisionMode",
    "DEFAULTS",
    "OutageEstimate",
    "ParameterError",
    "QuantizationGrid",
    "SystemParams",
    "avg_outage_bounds_at_fap",
    "build_realization",
    "estimate_avg_outage_at_fap",
    "estimate_laplace_nm_bm",
    "estimate_outage_at_fap",
    "estimate_outage_at_mbs",
    "estimate_outage_fu_at_fap",
    "outage_bounds_at_fap",
    "outage_bounds_at_mbs",
    "partition_areas",
    "q_pair",
]
