"""System and solver configuration."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

BOLTZMANN = 1.380649e-23
SPEED_OF_LIGHT = 299_792_458.0
EARTH_RADIUS_M = 6_371_000.0
T0_KELVIN = 290.0


class ConfigurationError(ValueError):
    """Raised when a system configuration cannot support the requested design."""


class NumericalError(RuntimeError):
    """Raised when an iterative numerical routine hits a degenerate scaling."""


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def noise_power(bandwidth_hz: float, noise_figure_db: float, temperature_k: float = T0_KELVIN) -> float:
    """Thermal noise power k_B * T * B * NF in watts."""
    return BOLTZMANN * temperature_k * bandwidth_hz * db_to_linear(noise_figure_db)


@dataclass(frozen=True)
class SystemConfig:
    """Cooperative cluster of ``S`` satellites serving ``K`` multi-antenna users.

    All powers are linear watts. ``sigma2`` defaults to the thermal noise
    budget ``k_B T0 B NF`` when left as ``None``.
    """

    S: int = 4
    K: int = 10
    M_x: int = 6
    M_y: int = 6
    N_x: int = 4
    N_y: int = 2
    P: float = db_to_linear(15.0)
    sigma2: float | None = None
    kappa_dB: float = 10.0
    phase_var: float = 0.05
    d_sat_over_lambda: float = 1.0
    d_ut_over_lambda: float = 0.5
    carrier_hz: float = 2.19e9
    bandwidth_hz: float = 20e6
    altitude_km: float = 550.0
    noise_figure_db: float = 7.0
    sat_gain_dbi: float = 6.0
    ut_gain_dbi: float = 0.0
    ionospheric_loss_db: float = 1.0
    min_elevation_deg: float = 10.0
    array_gain: bool = True
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("S", "K", "M_x", "M_y", "N_x", "N_y"):
            if int(getattr(self, name)) < 1:
                raise ConfigurationError(f"{name} must be >= 1")
        if not self.P > 0:
            raise ConfigurationError("P must be positive")
        if self.sigma2 is None:
            object.__setattr__(self, "sigma2", noise_power(self.bandwidth_hz, self.noise_figure_db))
        if not self.sigma2 > 0:
            raise ConfigurationError("sigma2 must be positive")
        if self.phase_var < 0:
            raise ConfigurationError("phase_var must be nonnegative")
        if not self.d_sat_over_lambda > 0 or not self.d_ut_over_lambda > 0:
            raise ConfigurationError("antenna spacings must be positive")
        # Each satellite needs a nonempty per-user null space.
        if self.M <= self.K - 1:
            raise ConfigurationError(f"M={self.M} antennas per satellite cannot null K-1={self.K - 1} users")

    @property
    def M(self) -> int:
        return self.M_x * self.M_y

    @property
    def N(self) -> int:
        return self.N_x * self.N_y

    @property
    def kappa(self) -> float:
        return db_to_linear(self.kappa_dB)

    @property
    def power_dBW(self) -> float:
        return linear_to_db(self.P)

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_hz

    @property
    def max_streams(self) -> int:
        return min(self.S, self.N)

    def with_power_dBW(self, power_dBW: float) -> "SystemConfig":
        return replace(self, P=db_to_linear(power_dBW))

    def replace(self, **changes) -> "SystemConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class SolverOptions:
    """Stopping rules for the iterative WMMSE solvers."""

    max_iters: int = 30
    eps_obj: float = 1e-3
    bisection_tol: float = 1e-10
    bisection_max_steps: int = 200

    def __post_init__(self):
        if self.max_iters < 1 or self.bisection_max_steps < 1:
            raise ValueError("iteration limits must be positive")
        if self.eps_obj < 0 or not self.bisection_tol > 0:
            raise ValueError("tolerances must be nonnegative")


DEFAULT_SOLVER = SolverOptions()

__all__ = [
    "SystemConfig",
    "SolverOptions",
    "ConfigurationError",
    "NumericalError",
    "db_to_linear",
    "linear_to_db",
    "noise_power",
    "DEFAULT_SOLVER",
]
