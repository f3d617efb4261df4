"""Pooled water-filling over eigenmode gains under a total power budget.

Two criteria share one bisection on the multiplier ``mu``:

* Max-SE, ``max sum log(1 + p*lam)``:  ``p = max(0, 1/mu - 1/lam)``
* MMSE,   ``min sum 1/(1 + p*lam)``:   ``p = max(0, 1/sqrt(mu*lam) - 1/lam)``

A stream is active iff ``mu < lam`` in both cases, so the bisection bracket
lives in ``(0, max(lam))``. After bisection the water level is re-solved in
closed form on the active set so the budget is met to rounding.
"""

from __future__ import annotations

import numpy as np

_MU_FLOOR = 1e-300


def _powers(lams: np.ndarray, mu: float, criterion: str) -> np.ndarray:
    pos = lams > 0
    p = np.zeros_like(lams)
    if criterion == "max_se":
        p[pos] = 1.0 / mu - 1.0 / lams[pos]
    else:
        p[pos] = 1.0 / np.sqrt(mu * lams[pos]) - 1.0 / lams[pos]
    return np.maximum(p, 0.0)


def _bisect_mu(lams: np.ndarray, P: float, criterion: str, max_steps: int = 400) -> float:
    lo, hi = _MU_FLOOR, 1.0
    while _powers(lams, hi, criterion).sum() >= P:
        lo, hi = hi, 2.0 * hi
    for _ in range(max_steps):
        mid = 0.5 * (lo + hi) if hi / lo < 4 else np.sqrt(lo * hi)
        if mid <= lo or mid >= hi:
            break
        if _powers(lams, mid, criterion).sum() > P:
            lo = mid
        else:
            hi = mid
    return hi


def _refine(lams: np.ndarray, active: np.ndarray, P: float, criterion: str) -> np.ndarray:
    la = lams[active]
    p = np.zeros_like(lams)
    if criterion == "max_se":
        level = (P + np.sum(1.0 / la)) / la.size
        p[active] = level - 1.0 / la
    else:
        inv_sqrt_mu = (P + np.sum(1.0 / la)) / np.sum(1.0 / np.sqrt(la))
        p[active] = inv_sqrt_mu / np.sqrt(la) - 1.0 / la
    return p


def waterfill(lams, P: float, criterion: str = "max_se") -> np.ndarray:
    lams = np.asarray(lams, dtype=float)
    if criterion not in ("max_se", "mmse"):
        raise ValueError(f"unknown criterion {criterion!r}")
    if not P > 0:
        raise ValueError("power budget must be positive")
    if lams.size == 0 or not np.any(lams > 0):
        raise ValueError("water-filling needs at least one positive gain")
    if np.any(lams < 0):
        raise ValueError("gains must be nonnegative")
    mu = _bisect_mu(lams, P, criterion)
    active = _powers(lams, mu, criterion) > 0
    if not active.any():
        active = lams == lams.max()
    p = _refine(lams, active, P, criterion)
    # a borderline stream can come out marginally negative; drop it and re-solve
    while np.any(p[active] < 0):
        active &= p > 0
        p = _refine(lams, active, P, criterion)
    return p


def waterfill_maxse(lams, P: float) -> np.ndarray:
    return waterfill(lams, P, "max_se")


def waterfill_mmse(lams, P: float) -> np.ndarray:
    return waterfill(lams, P, "mmse")
