"""Link geometry, array responses and Rician channel realizations.

Each satellite-user link is rank one: ``H_sk = phi_sk * d_sk * g_sk^H`` with a
unit-norm satellite steering vector ``g_sk``, a Rician user-side vector
``d_sk`` and a unit-modulus residual phase error ``phi_sk``. The stacked
per-user channel is ``[H_1k, ..., H_Sk]`` of shape ``(N, S*M)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import EARTH_RADIUS_M, SPEED_OF_LIGHT, SystemConfig, db_to_linear

_COSINE_SLACK = 1e-12


def steering_vector(n_axis1: int, n_axis2: int, spacing_over_lambda: float, u1: float, u2: float) -> np.ndarray:
    """Unit-norm UPA response ``v(u1) kron v(u2)``.

    ``u1`` and ``u2`` are the direction cosines along the two array axes and
    ``v(x)[i] = exp(-j 2 pi i d x / lambda) / sqrt(n)``.
    """
    if n_axis1 < 1 or n_axis2 < 1:
        raise ValueError("array dimensions must be positive")
    if not spacing_over_lambda > 0:
        raise ValueError("antenna spacing must be positive")
    for u in (u1, u2):
        if not -1.0 - _COSINE_SLACK <= u <= 1.0 + _COSINE_SLACK:
            raise ValueError(f"direction cosine {u} outside [-1, 1]")
    v1 = np.exp(-2j * np.pi * spacing_over_lambda * u1 * np.arange(n_axis1)) / math.sqrt(n_axis1)
    v2 = np.exp(-2j * np.pi * spacing_over_lambda * u2 * np.arange(n_axis2)) / math.sqrt(n_axis2)
    return np.kron(v1, v2)


def phase_error_mean(phase_var: float) -> complex:
    """E{exp(j psi)} for psi ~ N(0, phase_var), i.e. exp(-phase_var / 2)."""
    if phase_var < 0:
        raise ValueError("phase variance must be nonnegative")
    return complex(math.exp(-0.5 * phase_var))


def rician_split(kappa: float) -> tuple[float, float]:
    """Fractions (kappa/(kappa+1), 1/(kappa+1)) of the link power; handles kappa = inf."""
    if kappa < 0:
        raise ValueError("Rician factor must be nonnegative")
    if math.isinf(kappa):
        return 1.0, 0.0
    return kappa / (kappa + 1.0), 1.0 / (kappa + 1.0)


@dataclass(frozen=True)
class LinkStats:
    """Statistical state of one satellite-user link.

    ``gamma`` is the link power ``E{||H_sk||_F^2}``; with unit-norm steering
    vectors this carries the array gain.
    """

    gamma: float
    kappa: float
    g: np.ndarray
    d_los: np.ndarray
    phase_mean: complex
    phase_var: float = 0.0
    sat_cosines: tuple[float, float] = (0.0, 0.0)
    ut_cosines: tuple[float, float] = (0.0, 0.0)
    elevation_deg: float = 90.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if abs(self.phase_mean) > 1 + 1e-12:
            raise ValueError("|phase_mean| must not exceed 1")

    @property
    def beta_los(self) -> float:
        """LoS scale kappa*gamma / (2(kappa+1))."""
        return 0.5 * self.gamma * rician_split(self.kappa)[0]

    @property
    def d_bar(self) -> np.ndarray:
        return math.sqrt(self.beta_los) * (1 + 1j) * self.d_los

    @property
    def rho(self) -> float:
        """Scattering-plus-phase power gamma (1 + kappa (1 - |phi_bar|^2)) / (kappa + 1)."""
        los, nlos = rician_split(self.kappa)
        return self.gamma * (nlos + los * (1.0 - abs(self.phase_mean) ** 2))

    @property
    def M(self) -> int:
        return self.g.shape[0]

    @property
    def N(self) -> int:
        return self.d_los.shape[0]


@dataclass(frozen=True)
class ChannelRealization:
    """Per-user stacked channels ``H[k]`` (N x SM) and phase draws ``phi[k, s]``."""

    H: list[np.ndarray]
    phi: np.ndarray
    n_sat: int = field(default=1)

    @property
    def K(self) -> int:
        return len(self.H)


def slant_range_m(elevation_deg: float, altitude_km: float) -> float:
    """Distance from a ground user to a satellite seen at the given elevation (spherical Earth)."""
    r = EARTH_RADIUS_M
    h = altitude_km * 1e3
    e = math.radians(elevation_deg)
    return math.sqrt((r + h) ** 2 - (r * math.cos(e)) ** 2) - r * math.sin(e)


def free_space_path_loss_db(distance_m: float, carrier_hz: float) -> float:
    return 20.0 * math.log10(4.0 * math.pi * distance_m * carrier_hz / SPEED_OF_LIGHT)


def off_nadir_angle(elevation_deg: float, altitude_km: float) -> float:
    """Angle at the satellite between nadir and the user direction (radians)."""
    r = EARTH_RADIUS_M
    return math.asin(r * math.cos(math.radians(elevation_deg)) / (r + altitude_km * 1e3))


def link_gain(config: SystemConfig, elevation_deg: float) -> float:
    """Linear large-scale gain of one link.

    Per-element budget (path loss, element gains, ionospheric loss) times the
    ``M*N`` array gain when ``config.array_gain`` is set.
    """
    fspl = free_space_path_loss_db(slant_range_m(elevation_deg, config.altitude_km), config.carrier_hz)
    budget_db = -fspl + config.sat_gain_dbi + config.ut_gain_dbi - config.ionospheric_loss_db
    gain = db_to_linear(budget_db)
    if config.array_gain:
        gain *= config.M * config.N
    return gain


def make_link(config: SystemConfig, elevation_deg: float, sat_cosines, ut_cosines, gamma: float | None = None) -> LinkStats:
    g = steering_vector(config.M_x, config.M_y, config.d_sat_over_lambda, *sat_cosines)
    d_los = steering_vector(config.N_x, config.N_y, config.d_ut_over_lambda, *ut_cosines)
    return LinkStats(
        gamma=link_gain(config, elevation_deg) if gamma is None else gamma,
        kappa=config.kappa,
        g=g,
        d_los=d_los,
        phase_mean=phase_error_mean(config.phase_var),
        phase_var=config.phase_var,
        sat_cosines=tuple(float(u) for u in sat_cosines),
        ut_cosines=tuple(float(u) for u in ut_cosines),
        elevation_deg=float(elevation_deg),
    )


def sample_geometry(config: SystemConfig, rng: np.random.Generator) -> list[list[LinkStats]]:
    """Draw i.i.d. link geometry for every (user, satellite) pair.

    Returns ``links[k][s]``. Elevation is uniform in [min_elevation, 90] deg;
    the satellite-side direction follows from the elevation with a uniform
    azimuth, and the user-side LoS direction is uniform on the upper hemisphere.
    """
    links = []
    for _ in range(config.K):
        row = []
        for _ in range(config.S):
            elev = rng.uniform(config.min_elevation_deg, 90.0)
            eta = off_nadir_angle(elev, config.altitude_km)
            az = rng.uniform(0.0, 2 * math.pi)
            sat_u = (math.sin(eta) * math.cos(az), math.sin(eta) * math.sin(az))
            cos_polar = rng.uniform(0.0, 1.0)
            sin_polar = math.sqrt(1.0 - cos_polar**2)
            az_ut = rng.uniform(0.0, 2 * math.pi)
            ut_u = (sin_polar * math.cos(az_ut), sin_polar * math.sin(az_ut))
            row.append(make_link(config, elev, sat_u, ut_u))
        links.append(row)
    return links


def _complex_normal(rng: np.random.Generator, shape, var: float) -> np.ndarray:
    # CN(0, var): real and imaginary parts each carry var/2
    return math.sqrt(var / 2.0) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def draw_channel_batch(stats: list[LinkStats], rng: np.random.Generator, n_draws: int) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``n_draws`` stacked channels for one user.

    Returns ``(H, phi)`` with shapes ``(n_draws, N, S*M)`` and ``(n_draws, S)``.
    The scattering vector carries total power ``gamma/(kappa+1)`` spread evenly
    over the N user antennas, so that ``E{H_s^H H_s} = gamma g g^H``.
    """
    S = len(stats)
    N, M = stats[0].N, stats[0].M
    H = np.empty((n_draws, N, S * M), dtype=complex)
    phi = np.empty((n_draws, S), dtype=complex)
    for s, link in enumerate(stats):
        nlos_var = link.gamma * rician_split(link.kappa)[1] / N
        d = link.d_bar[None, :] + _complex_normal(rng, (n_draws, N), nlos_var)
        psi = rng.normal(0.0, math.sqrt(link.phase_var), n_draws) if link.phase_var > 0 else np.zeros(n_draws)
        phi[:, s] = np.exp(1j * psi)
        H[:, :, s * M:(s + 1) * M] = (phi[:, s, None, None] * d[:, :, None]) * link.g.conj()[None, None, :]
    return H, phi


def draw_channel(stats: list[LinkStats], rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """One stacked channel ``(N, S*M)`` and its phase draws ``(S,)`` for a single user."""
    H, phi = draw_channel_batch(stats, rng, 1)
    return H[0], phi[0]


def draw_realization(links: list[list[LinkStats]], rng: np.random.Generator) -> ChannelRealization:
    H, phis = [], []
    for stats in links:
        Hk, phik = draw_channel(stats, rng)
        H.append(Hk)
        phis.append(phik)
    return ChannelRealization(H=H, phi=np.array(phis), n_sat=len(links[0]))


def satellite_directions(links: list[list[LinkStats]]) -> np.ndarray:
    """Stack satellite steering vectors as ``g[s, k, :]``."""
    return np.array([[links[k][s].g for k in range(len(links))] for s in range(len(links[0]))])


def drift_links(config: SystemConfig, links: list[list[LinkStats]], rng: np.random.Generator,
                delay_s: float, sat_speed_mps: float = 7.6e3) -> list[list[LinkStats]]:
    """Links as seen ``delay_s`` later.

    Moves every satellite-side direction by the angle the satellite sweeps over
    the slant range (random heading) and re-evaluates the elevation-dependent
    gain. Used to emulate stale statistical CSI.
    """
    if delay_s <= 0:
        return links
    out = []
    for row in links:
        new_row = []
        for link in row:
            dist = slant_range_m(link.elevation_deg, config.altitude_km)
            dtheta = sat_speed_mps * delay_s / dist
            heading = rng.uniform(0.0, 2 * math.pi)
            u1 = link.sat_cosines[0] + dtheta * math.cos(heading)
            u2 = link.sat_cosines[1] + dtheta * math.sin(heading)
            norm = math.hypot(u1, u2)
            if norm > 1.0:
                u1, u2 = u1 / norm, u2 / norm
            # elevation follows the off-nadir angle
            sin_eta = min(math.hypot(u1, u2), 1.0)
            r = EARTH_RADIUS_M
            cos_elev = min(sin_eta * (r + config.altitude_km * 1e3) / r, 1.0)
            elev = max(math.degrees(math.acos(cos_elev)), config.min_elevation_deg)
            new_row.append(make_link(config, elev, (u1, u2), link.ut_cosines))
        out.append(new_row)
    return out
