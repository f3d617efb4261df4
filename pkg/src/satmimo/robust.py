"""Closed-form robust precoder from statistical CSI under a total power budget.

Every satellite restricts user ``k``'s precoder to the null space of the other
users' satellite-side steering vectors. Since each link is rank one, this
zeroes inter-user interference for every channel realization sharing those
directions. Within the null space the precoder aligns with the eigenmodes of
``Psi_k = V_k^H H_tilde_k^H H_tilde_k V_k / sigma2`` and the pooled stream
powers are water-filled under either the max-SE or the MMSE criterion.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .config import ConfigurationError
from .lanczos import lanczos_topk
from .metrics import hermitian
from .precoding import TPC, PrecoderSet
from .stat_csi import StatChannel
from .waterfill import waterfill

MAX_SE = "max_se"
MMSE = "mmse"
FULL_EVD = "full_evd"
LANCZOS = "lanczos"

_POS_EIG = 1e-12


@dataclass(frozen=True)
class NullSpaceBasis:
    """Per-satellite orthonormal null-space blocks ``V_sk`` for one user."""

    blocks: list[np.ndarray]

    @property
    def dims(self) -> list[int]:
        return [b.shape[1] for b in self.blocks]

    def stacked(self) -> np.ndarray:
        """Block-diagonal ``V_k`` of shape ``(S*M, sum_s I_sk)``."""
        return linalg.block_diag(*self.blocks)


@dataclass(frozen=True)
class EigenSelection:
    lambdas: np.ndarray
    U: np.ndarray


def null_space_basis(g_vectors: np.ndarray, s: int, k: int) -> np.ndarray:
    """Orthonormal basis of ``{v : g_{s,k'}^H v = 0 for all k' != k}``.

    ``g_vectors`` has shape ``(S, K, M)``.
    """
    g_vectors = np.asarray(g_vectors, dtype=complex)
    S, K, M = g_vectors.shape
    if not (0 <= s < S and 0 <= k < K):
        raise IndexError("satellite or user index out of range")
    if K == 1:
        return np.eye(M, dtype=complex)
    G = np.delete(g_vectors[s], k, axis=0).conj()
    _, sv, Vh = np.linalg.svd(G, full_matrices=True)
    tol = max(K - 1, M) * np.finfo(float).eps * (sv[0] if sv.size else 0.0)
    rank = int(np.sum(sv > tol))
    if rank < K - 1:
        warnings.warn(f"satellite {s}: other users' directions for user {k} are colinear (rank {rank} < {K - 1})",
                      RuntimeWarning, stacklevel=2)
    if rank >= M:
        raise ConfigurationError(f"satellite {s} has an empty null space for user {k}")
    return Vh[rank:].conj().T


def user_null_space(g_vectors: np.ndarray, k: int) -> NullSpaceBasis:
    S = np.asarray(g_vectors).shape[0]
    return NullSpaceBasis([null_space_basis(g_vectors, s, k) for s in range(S)])


def build_psi(Vk: np.ndarray, stat: StatChannel, sigma2: float) -> np.ndarray:
    X = stat.H_tilde @ Vk
    return hermitian(X.conj().T @ X) / sigma2


def top_eigenpairs(Psi: np.ndarray, d: int, eigensolver: str = FULL_EVD, m: int | None = None,
                   rng: np.random.Generator | None = None) -> EigenSelection:
    """Leading ``d`` eigenpairs, clamped to the strictly positive part of the spectrum."""
    if eigensolver == FULL_EVD:
        lam, U = np.linalg.eigh(Psi)
        lam, U = lam[::-1], U[:, ::-1]
    elif eigensolver == LANCZOS:
        m = min(Psi.shape[0], m if m is not None else d)
        rng = np.random.default_rng() if rng is None else rng
        # start inside range(Psi): rank(Psi) <= m steps then span it exactly
        r = rng.standard_normal(Psi.shape[0]) + 1j * rng.standard_normal(Psi.shape[0])
        pairs = lanczos_topk(Psi, m, rng, v0=Psi @ r)
        lam = np.array([p[0] for p in pairs])
        U = np.column_stack([p[1] for p in pairs]) if pairs else np.zeros((Psi.shape[0], 0), complex)
    else:
        raise ValueError(f"unknown eigensolver {eigensolver!r}")
    top = float(lam[0]) if lam.size else 0.0
    n_pos = int(np.sum(lam > _POS_EIG * top)) if top > 0 else 0
    d = min(d, n_pos)
    return EigenSelection(lambdas=lam[:d].copy(), U=U[:, :d].copy())


def robust_precoder(g_vectors: np.ndarray, stats: list[StatChannel], P: float, sigma2: float, d,
                    criterion: str = MAX_SE, eigensolver: str = FULL_EVD,
                    rng: np.random.Generator | None = None, lanczos_iters: int | None = None) -> PrecoderSet:
    """Null-space eigenmode precoder ``W_k = V_k U_k diag(sqrt(p_k))``.

    ``d`` gives the requested streams per user; users whose ``Psi_k`` has
    fewer positive eigenvalues get fewer columns. ``lanczos_iters`` defaults
    to ``max(S, N)``.
    """
    if criterion not in (MAX_SE, MMSE):
        raise ValueError(f"unknown criterion {criterion!r}")
    if not P > 0 or not sigma2 > 0:
        raise ValueError("power and noise must be positive")
    g_vectors = np.asarray(g_vectors, dtype=complex)
    S, K, _ = g_vectors.shape
    if len(stats) != K or len(d) != K:
        raise ValueError("need one statistical channel and one stream count per user")
    rng = np.random.default_rng(0) if rng is None else rng
    bases, sel = [], []
    for k in range(K):
        Vk = user_null_space(g_vectors, k).stacked()
        Psi = build_psi(Vk, stats[k], sigma2)
        m = lanczos_iters if lanczos_iters is not None else max(S, stats[k].H_bar.shape[0])
        m = min(max(m, d[k]), Psi.shape[0])
        bases.append(Vk)
        sel.append(top_eigenpairs(Psi, int(d[k]), eigensolver, m, rng))
    lams = np.concatenate([e.lambdas for e in sel])
    if lams.size == 0:
        raise ConfigurationError("no user has a usable eigenmode")
    p = waterfill(lams, P, criterion)
    W, start = [], 0
    for Vk, e in zip(bases, sel):
        n = e.lambdas.size
        if n == 0:
            W.append(np.zeros((Vk.shape[0], 1), dtype=complex))
            continue
        W.append(Vk @ e.U * np.sqrt(p[start:start + n]))
        start += n
    return PrecoderSet(W, S, TPC)
