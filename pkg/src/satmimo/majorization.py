"""Majorization predicates and the eigenvalue-matching transform used by the robust design."""

from __future__ import annotations

import numpy as np

_MAJ_REL = 1e-9


def majorizes(x, y, rel_tol: float = _MAJ_REL) -> bool:
    """True iff ``x`` is majorized by ``y`` (``x ≺ y``).

    Sorted-descending partial sums of ``x`` never exceed those of ``y`` and the
    totals agree, both up to ``rel_tol`` times the scale of the inputs.
    """
    x = np.sort(np.asarray(x, dtype=float).ravel())[::-1]
    y = np.sort(np.asarray(y, dtype=float).ravel())[::-1]
    if x.shape != y.shape:
        raise ValueError("majorization needs vectors of equal length")
    if x.size == 0:
        return True
    cx, cy = np.cumsum(x), np.cumsum(y)
    tol = rel_tol * max(float(np.sum(np.abs(x))), float(np.sum(np.abs(y))), 1e-300)
    return bool(np.all(cx <= cy + tol) and abs(cx[-1] - cy[-1]) <= tol)


def inverse_product_objective(x) -> float:
    """``-prod(1/x_i)``; Schur-concave on the positive orthant."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("entries must be positive")
    return -float(np.exp(-np.sum(np.log(x))))


def random_doubly_stochastic(n: int, rng: np.random.Generator, n_perms: int = 4) -> np.ndarray:
    """Convex combination of random permutation matrices (Birkhoff)."""
    weights = rng.dirichlet(np.ones(n_perms))
    D = np.zeros((n, n))
    for w in weights:
        D[np.arange(n), rng.permutation(n)] += w
    return D


def theorem1_transform(Psi: np.ndarray, A: np.ndarray) -> np.ndarray:
    """Map a feasible ``A`` to ``U2[:, :s] diag(sqrt(lam1 / lam2))``.

    ``lam1`` are the eigenvalues of ``A^H Psi A`` and ``U2, lam2`` the leading
    eigenpairs of ``Psi``, both descending. The result diagonalizes
    ``A^H Psi A`` onto the eigenbasis of ``Psi`` without using more power than ``A``.
    """
    Psi = 0.5 * (Psi + Psi.conj().T)
    A = np.asarray(A, dtype=complex)
    n, s = A.shape
    if Psi.shape != (n, n):
        raise ValueError("Psi and A have inconsistent shapes")
    if s > n:
        raise ValueError("more columns than the ambient dimension")
    B = A.conj().T @ Psi @ A
    lam1 = np.linalg.eigvalsh(0.5 * (B + B.conj().T))[::-1]
    lam2, U2 = np.linalg.eigh(Psi)
    lam2, U2 = lam2[::-1], U2[:, ::-1]
    eps = np.finfo(float).eps
    top2 = max(float(lam2[0]), 0.0)
    floor1 = 10 * n * eps * top2 * np.linalg.norm(A, 2) ** 2
    lam1 = np.where(lam1 > floor1, lam1, 0.0)
    lam2s = lam2[:s]
    bad = (lam1 > 0) & (lam2s <= 10 * n * eps * top2)
    if np.any(bad):
        raise ValueError("eigenvalue of A^H Psi A is positive where Psi has none; numerical rank mismatch")
    p = np.zeros(s)
    pos = lam1 > 0
    p[pos] = lam1[pos] / lam2s[pos]
    return U2[:, :s] * np.sqrt(p)
