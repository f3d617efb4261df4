"""Statistical CSI: mean channel, second-moment factor and smoothed gain tracking."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import LinkStats


@dataclass(frozen=True)
class StatChannel:
    """Mean channel ``H_bar`` (N x SM) and factor ``H_tilde`` with
    ``H_tilde^H H_tilde = E{H^H H}``.

    ``H_tilde`` stacks ``H_bar`` on top of one scattering row per satellite,
    ``sqrt(rho_s) g_s^H`` placed in block ``s``, so it has ``N + S`` rows.
    """

    H_bar: np.ndarray
    H_tilde: np.ndarray
    n_sat: int

    @property
    def gram(self) -> np.ndarray:
        G = self.H_tilde.conj().T @ self.H_tilde
        return 0.5 * (G + G.conj().T)


def mean_channel(stats: list[LinkStats]) -> np.ndarray:
    """Blocks ``sqrt(beta_los) (1+j) d_los g^H phi_bar`` side by side."""
    return np.hstack([link.phase_mean * np.outer(link.d_bar, link.g.conj()) for link in stats])


def build_stat_channel(stats: list[LinkStats]) -> StatChannel:
    H_bar = mean_channel(stats)
    S = len(stats)
    M = stats[0].M
    scatter = np.zeros((S, S * M), dtype=complex)
    for s, link in enumerate(stats):
        scatter[s, s * M:(s + 1) * M] = np.sqrt(link.rho) * link.g.conj()
    return StatChannel(H_bar=H_bar, H_tilde=np.vstack([H_bar, scatter]), n_sat=S)


def second_moment(stats: list[LinkStats]) -> np.ndarray:
    """Direct blockwise assembly of ``E{H^H H}``.

    Diagonal blocks ``gamma g g^H``; off-diagonal blocks
    ``d_bar_1^H d_bar_2 conj(phi_bar_1) phi_bar_2 g_1 g_2^H``.
    """
    S = len(stats)
    M = stats[0].M
    R = np.zeros((S * M, S * M), dtype=complex)
    for a, la in enumerate(stats):
        for b, lb in enumerate(stats):
            if a == b:
                blk = la.gamma * np.outer(la.g, la.g.conj())
            else:
                coef = np.vdot(la.d_bar, lb.d_bar) * np.conj(la.phase_mean) * lb.phase_mean
                blk = coef * np.outer(la.g, lb.g.conj())
            R[a * M:(a + 1) * M, b * M:(b + 1) * M] = blk
    return R


@dataclass(frozen=True)
class SmoothedGamma:
    value: float
    alpha: float

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")


def update_gamma(state: SmoothedGamma, fresh_estimate: float) -> SmoothedGamma:
    """Exponential smoothing ``alpha * fresh + (1 - alpha) * previous``."""
    if not fresh_estimate > 0:
        raise ValueError("gain estimate must be positive")
    return SmoothedGamma(state.alpha * fresh_estimate + (1.0 - state.alpha) * state.value, state.alpha)
