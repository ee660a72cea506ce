"""System parameters of the two-tier uplink model."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

from .geometry import gamma as _gamma


class ParameterError(ValueError):
    """A parameter is outside its domain.  ``key`` names the offending field."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class SystemParams:
    """All scalar model parameters.  Defaults reproduce the reference scenario
    (1 km macrocell, kappa = 0.1, 32 x 256 MCFH carriers, eta = 25).

    Powers enter only through ``eta = P_f / P_m``; the MBS received power is
    normalised to 1.
    """

    R: float = 1000.0
    lambda_f: float = 5e-6
    mu_m: float = 15e-6
    mu_f: float = 0.01
    r_f: float = 10.0
    delta: float = 5.0
    alpha: float = 4.0
    kappa: float = 0.1
    n_s: int = 32
    n_h: int = 256
    eta: float = 25.0
    sigma_sq: float = 1.0
    T: float = 2.0

    def __post_init__(self):
        for key in ("n_s", "n_h"):
            v = getattr(self, key)
            if int(v) != v or v < 1:
                raise ParameterError(key, f"must be an integer >= 1, got {v}")
            object.__setattr__(self, key, int(v))
        for key in ("lambda_f", "mu_m", "mu_f"):
            if not getattr(self, key) >= 0:
                raise ParameterError(key, f"density must be >= 0, got {getattr(self, key)}")
        for key in ("R", "eta", "sigma_sq"):
            if not getattr(self, key) > 0:
                raise ParameterError(key, f"must be > 0, got {getattr(self, key)}")
        if not self.T >= 0:
            raise ParameterError("T", f"threshold must be >= 0, got {self.T}")
        if not self.r_f >= 0:
            raise ParameterError("r_f", f"must be >= 0, got {self.r_f}")
        if not self.delta > 0:
            raise ParameterError("delta", f"ring width must be > 0, got {self.delta}")
        if not self.alpha > 2:
            raise ParameterError("alpha", f"path-loss exponent must exceed 2, got {self.alpha}")
        if not 0 <= self.kappa < 1:
            raise ParameterError("kappa", f"must lie in [0, 1), got {self.kappa}")

    def replace(self, **changes) -> "SystemParams":
        return dataclasses.replace(self, **changes)

    @property
    def G(self) -> int:
        return self.n_s * self.n_h

    @property
    def T_h(self) -> float:
        return self.T / self.n_h

    @property
    def gamma(self) -> float:
        return _gamma(self.kappa)

    @property
    def n_fap(self) -> float:
        """Mean number of FAPs in the macrocell."""
        return math.pi * self.R**2 * self.lambda_f

    @property
    def n_mu(self) -> float:
        """Mean number of macro users."""
        return math.pi * self.R**2 * self.mu_m

    @property
    def n_fu(self) -> float:
        """Mean number of femto users per FAP."""
        return math.pi * ((self.r_f + self.delta) ** 2 - self.r_f**2) * self.mu_f

    def n_mu_f(self, d_f: float) -> float:
        """Mean number of MUs inside the coverage circle of a FAP at ``d_f``."""
        return math.pi * self.gamma * d_f**2 * self.mu_m

    def check_distance(self, d_f: float) -> None:
        if not 0 < d_f < self.R:
            raise ParameterError("d_f", f"must lie in (0, R={self.R}), got {d_f}")


DEFAULTS = SystemParams()
