"""MSE/MMSE matrices, Wiener receivers, rates and stream-count selection.

Interference from other users enters through the per-satellite block-diagonal
lift of their precoders: signals of user ``k'`` radiated by different
satellites arrive with different symbol content and are treated as mutually
independent. The interference-plus-noise covariance seen by user ``k`` is

    R_k = sum_{k' != k} sum_s H_{k,s} W_{s,k'} W_{s,k'}^H H_{k,s}^H + sigma2 I.

Rates are reported in bits; ``log det`` objectives are kept in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .precoding import PrecoderSet
from .stat_csi import StatChannel
from .waterfill import waterfill_maxse

LN2 = math.log(2.0)


def hermitian(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + A.conj().T)


def _check_dims(H_k: np.ndarray, W: PrecoderSet):
    if H_k.ndim != 2 or H_k.shape[1] != W.n_antennas:
        raise ValueError(f"channel with {H_k.shape} columns does not match {W.n_antennas} antennas")


def interference_covariance(H_k: np.ndarray, W: PrecoderSet, k: int, sigma2: float) -> np.ndarray:
    _check_dims(H_k, W)
    rows = H_k.shape[0]
    S, M = W.n_sat, W.block
    R = sigma2 * np.eye(rows, dtype=complex)
    others = [W[j] for j in range(len(W)) if j != k]
    if not others:
        return R
    Wo = np.hstack(others).reshape(S, M, -1)
    X = np.einsum("rsm,smd->srd", H_k.reshape(rows, S, M), Wo)
    R += np.einsum("srd,sqd->rq", X, X.conj())
    return hermitian(R)


def _cho(A: np.ndarray):
    return linalg.cho_factor(hermitian(A), lower=True, check_finite=False)


def _cho_solve(c, B: np.ndarray) -> np.ndarray:
    return linalg.cho_solve(c, B, check_finite=False)


def _logdet_pd(A: np.ndarray) -> float:
    L = linalg.cholesky(hermitian(A), lower=True, check_finite=False)
    return 2.0 * float(np.sum(np.log(np.diag(L).real)))


def mse_matrix(H_k: np.ndarray, W: PrecoderSet, F_k: np.ndarray, sigma2: float, k: int) -> np.ndarray:
    """MSE of user ``k`` for an arbitrary receive filter ``F_k``."""
    T = H_k @ W[k]
    if F_k.shape != T.shape:
        raise ValueError(f"receive filter shape {F_k.shape} does not match {T.shape}")
    R = interference_covariance(H_k, W, k, sigma2)
    FhT = F_k.conj().T @ T
    E = F_k.conj().T @ (T @ T.conj().T + R) @ F_k - FhT - FhT.conj().T + np.eye(T.shape[1])
    return hermitian(E)


def wiener_filter(H_k: np.ndarray, W: PrecoderSet, sigma2: float, k: int) -> np.ndarray:
    T = H_k @ W[k]
    R = interference_covariance(H_k, W, k, sigma2)
    return _cho_solve(_cho(T @ T.conj().T + R), T)


def _information_matrix(H_k, W, sigma2, k):
    """``I + T^H R^{-1} T`` with ``T = H_k W_k``."""
    T = H_k @ W[k]
    R = interference_covariance(H_k, W, k, sigma2)
    return hermitian(np.eye(T.shape[1]) + T.conj().T @ _cho_solve(_cho(R), T))


def mmse_matrix(H_k: np.ndarray, W: PrecoderSet, sigma2: float, k: int) -> np.ndarray:
    return hermitian(np.linalg.inv(_information_matrix(H_k, W, sigma2, k)))


def rate_icsi(H_k: np.ndarray, W: PrecoderSet, sigma2: float, k: int) -> float:
    """Achievable rate of user ``k`` in bits per channel use."""
    return max(_logdet_pd(_information_matrix(H_k, W, sigma2, k)), 0.0) / LN2


def rate_scsi(stat: StatChannel, W: PrecoderSet, sigma2: float, k: int) -> float:
    """Statistical rate: the same log-det form with the second-moment factor."""
    return rate_icsi(stat.H_tilde, W, sigma2, k)


def scsi_wiener_filter(stat: StatChannel, W: PrecoderSet, sigma2: float, k: int) -> np.ndarray:
    return wiener_filter(stat.H_tilde, W, sigma2, k)


def stream_sinr(H_k: np.ndarray, W: PrecoderSet, sigma2: float, k: int) -> np.ndarray:
    """Per-stream SINR after the Wiener receiver, ``xi / (1 - xi)``."""
    T = H_k @ W[k]
    R = interference_covariance(H_k, W, k, sigma2)
    xi = np.einsum("ij,ij->j", T.conj(), _cho_solve(_cho(T @ T.conj().T + R), T)).real
    xi = np.clip(xi, 0.0, 1.0 - 1e-300)
    return xi / (1.0 - xi)


def user_rates(channels, W: PrecoderSet, sigma2: float) -> np.ndarray:
    return np.array([rate_icsi(H, W, sigma2, k) for k, H in enumerate(channels)])


@dataclass(frozen=True)
class RateReport:
    """Per-user log-det rates (bits) and per-stream Wiener SINRs.

    ``sum(log2(1 + sinr))`` equals the user rate only when the MMSE matrix is
    diagonal; otherwise it is a lower bound.
    """

    per_user_rate: np.ndarray
    per_stream_sinr: list[np.ndarray]

    @property
    def sum_rate(self) -> float:
        return float(np.sum(self.per_user_rate))


def rate_report(channels, W: PrecoderSet, sigma2: float) -> RateReport:
    return RateReport(
        per_user_rate=user_rates(channels, W, sigma2),
        per_stream_sinr=[stream_sinr(H, W, sigma2, k) for k, H in enumerate(channels)],
    )


def select_stream_count(eigs, per_user_power: float) -> int:
    """Stream count maximizing ``prod(1 + p_i lam_i)`` with ``P/K`` water-filled over the top ``d`` modes."""
    eigs = np.asarray(eigs, dtype=float)
    if eigs.size == 0:
        raise ValueError("no eigenvalues given")
    if not per_user_power > 0:
        raise ValueError("per-user power must be positive")
    if np.any(np.diff(eigs) > 1e-12 * max(abs(eigs[0]), 1e-300)):
        raise ValueError("eigenvalues must be sorted in descending order")
    if eigs[0] <= 0:
        return 1
    best_d, best = 1, float(np.log1p(per_user_power * eigs[0]))
    for d in range(2, eigs.size + 1):
        lam = eigs[:d]
        if lam[-1] <= 0:
            break
        value = float(np.sum(np.log1p(waterfill_maxse(lam, per_user_power) * lam)))
        if value > best + 1e-12 * max(abs(best), 1.0):
            best_d, best = d, value
    return best_d
