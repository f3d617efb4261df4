"""Partial Hermitian eigensolver: Lanczos with full re-orthogonalization.

Only the top few eigenpairs of ``Psi_k`` are needed, and ``Psi_k`` has rank
at most ``S``, so a Krylov space of dimension ``max(S, N)`` is enough.
Ritz pairs are kept only if their true residual ``||Psi u - lam u||`` passes a
threshold, then near-duplicates are merged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

_BETA_REL = 1e-12
_RITZ_REL = 1e-6
_DUP_EIG_REL = 1e-8
_DUP_OVERLAP = 0.99


@dataclass(frozen=True)
class TridiagonalForm:
    """``T = tridiag(betas, alphas, betas)`` with ``C^H Psi C = T`` on the Krylov basis ``C``."""

    alphas: np.ndarray
    betas: np.ndarray
    C: np.ndarray

    @property
    def T(self) -> np.ndarray:
        n = self.alphas.size
        T = np.diag(self.alphas)
        if n > 1:
            T += np.diag(self.betas[: n - 1], 1) + np.diag(self.betas[: n - 1], -1)
        return T


def _start_vector(n: int, rng: np.random.Generator) -> np.ndarray:
    while True:
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        nv = np.linalg.norm(v)
        if nv > 0:
            return v / nv


def lanczos_tridiagonalize(Psi: np.ndarray, m: int, rng: np.random.Generator | None = None,
                           v0: np.ndarray | None = None) -> TridiagonalForm:
    """Run at most ``m`` Lanczos steps, stopping early when ``beta`` vanishes."""
    Psi = 0.5 * (Psi + Psi.conj().T)
    n = Psi.shape[0]
    if Psi.ndim != 2 or Psi.shape[1] != n:
        raise ValueError("Psi must be square")
    if not 1 <= m <= n:
        raise ValueError(f"iteration count {m} must lie in [1, {n}]")
    rng = np.random.default_rng() if rng is None else rng
    if v0 is not None and np.linalg.norm(v0) > 0:
        c = np.asarray(v0, dtype=complex) / np.linalg.norm(v0)
    else:
        c = _start_vector(n, rng)
    scale = np.linalg.norm(Psi, "fro")
    C = np.zeros((n, m), dtype=complex)
    alphas, betas = [], []
    C[:, 0] = c
    for j in range(m):
        w = Psi @ C[:, j]
        alphas.append(float(np.vdot(C[:, j], w).real))
        # full re-orthogonalization, done twice to stay at machine precision
        for _ in range(2):
            w -= C[:, : j + 1] @ (C[:, : j + 1].conj().T @ w)
        beta = float(np.linalg.norm(w))
        if j == m - 1:
            betas.append(beta)
            break
        if beta <= _BETA_REL * scale:
            betas.append(0.0)
            break
        betas.append(beta)
        C[:, j + 1] = w / beta
    k = len(alphas)
    return TridiagonalForm(alphas=np.array(alphas), betas=np.array(betas), C=C[:, :k])


def lanczos_topk(Psi: np.ndarray, m: int, rng: np.random.Generator | None = None,
                 eps_ritz: float | None = None, v0: np.ndarray | None = None) -> list[tuple[float, np.ndarray]]:
    """Residual-filtered Ritz pairs of ``Psi``, sorted by descending eigenvalue."""
    Psi = 0.5 * (Psi + Psi.conj().T)
    form = lanczos_tridiagonalize(Psi, m, rng, v0)
    k = form.alphas.size
    if k == 1:
        theta, Y = form.alphas.copy(), np.ones((1, 1))
    else:
        theta, Y = linalg.eigh_tridiagonal(form.alphas, form.betas[: k - 1])
    U = form.C @ Y
    if eps_ritz is None:
        eps_ritz = _RITZ_REL * max(float(np.max(np.abs(theta))), np.finfo(float).tiny)
    residuals = np.linalg.norm(Psi @ U - U * theta, axis=0)
    keep = [i for i in np.argsort(-theta, kind="stable") if residuals[i] <= eps_ritz]
    pairs: list[tuple[float, np.ndarray, float]] = []
    for i in keep:
        lam, u, r = float(theta[i]), U[:, i] / np.linalg.norm(U[:, i]), float(residuals[i])
        dup = None
        for idx, (lam2, u2, _) in enumerate(pairs):
            close = abs(lam - lam2) <= _DUP_EIG_REL * max(abs(lam), abs(lam2))
            if close and abs(np.vdot(u2, u)) > _DUP_OVERLAP:
                dup = idx
                break
        if dup is None:
            pairs.append((lam, u, r))
        elif r < pairs[dup][2]:
            pairs[dup] = (lam, u, r)
    pairs.sort(key=lambda p: -p[0])
    return [(lam, u) for lam, u, _ in pairs]
