"""Iterative WMMSE precoder design under total and per-antenna power budgets.

Block coordinate descent on ``sum_k tr(Gamma_k E_k) - log det Gamma_k``:
receive filters are Wiener, weights are ``Gamma_k = I + T_k^H R_k^{-1} T_k``
and precoders minimize the resulting quadratic under the power constraint.
The objective ``sum_k log det Gamma_k`` (nats) equals the sum rate of the
current precoders and never decreases.

The solvers only see per-user effective channels, so the same code serves
instantaneous channels and the statistical factors ``H_tilde``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .config import DEFAULT_SOLVER, NumericalError, SolverOptions
from .metrics import hermitian, interference_covariance
from .precoding import PAPC, TPC, PrecoderSet, scale_into_budget
from .stat_csi import StatChannel

_NULL_EIG = 1e-12
_MAX_DOUBLINGS = 1000


@dataclass
class WmmseState:
    """Solver output. ``objective_trace[i]`` is the objective after iteration ``i + 1``."""

    W: PrecoderSet
    F: list[np.ndarray]
    Gamma: list[np.ndarray]
    initial_objective: float
    objective_trace: list[float] = field(default_factory=list)
    converged: bool = False

    @property
    def iterations(self) -> int:
        return len(self.objective_trace)

    @property
    def objective(self) -> float:
        return self.objective_trace[-1] if self.objective_trace else self.initial_objective


def _as_channels(channels):
    if channels and isinstance(channels[0], StatChannel):
        return [c.H_tilde for c in channels], channels[0].n_sat
    return [np.asarray(H, dtype=complex) for H in channels], None


def _check_problem(H, P, n_sat):
    if not P > 0:
        raise ValueError("power budget must be positive")
    if not H:
        raise ValueError("no users given")
    SM = H[0].shape[1]
    if any(h.ndim != 2 or h.shape[1] != SM for h in H):
        raise ValueError("all channels must have the same number of antenna columns")
    if n_sat < 1 or SM % n_sat:
        raise ValueError(f"{SM} antennas cannot be split across {n_sat} satellites")


def matched_filter_init(channels, P: float, n_sat: int, d, constraint: str = TPC) -> PrecoderSet:
    """``H_k^H U_k`` with ``U_k`` the top-``d_k`` left singular vectors, scaled to the budget."""
    W = []
    for H, dk in zip(channels, d):
        U, _, _ = np.linalg.svd(H, full_matrices=False)
        Wk = H.conj().T @ U[:, :dk]
        if Wk.shape[1] < dk:
            Wk = np.hstack([Wk, np.zeros((Wk.shape[0], dk - Wk.shape[1]), dtype=complex)])
        W.append(Wk)
    out = PrecoderSet(W, n_sat, constraint)
    total = out.total_power()
    if total <= 0:
        return out
    out = out.scaled(np.sqrt(P / total))
    return scale_into_budget(out, P, constraint)


def _receiver_update(H, W: PrecoderSet):
    """Wiener filters, weights and per-user ``log det Gamma`` (with unit noise)."""
    F, G, logdets = [], [], []
    for k, Hk in enumerate(H):
        T = Hk @ W[k]
        R = interference_covariance(Hk, W, k, 1.0)
        Phi = linalg.cho_factor(hermitian(T @ T.conj().T + R), lower=True, check_finite=False)
        Fk = linalg.cho_solve(Phi, T, check_finite=False)
        Rc = linalg.cho_factor(R, lower=True, check_finite=False)
        Gk = hermitian(np.eye(T.shape[1]) + T.conj().T @ linalg.cho_solve(Rc, T, check_finite=False))
        L = np.linalg.cholesky(Gk)
        F.append(Fk)
        G.append(Gk)
        logdets.append(2.0 * float(np.sum(np.log(np.diag(L).real))))
    return F, G, float(np.sum(logdets))


def _weighted_grams(H, F, G):
    """``Xi_k = F_k Gamma_k F_k^H`` and ``Q_k = H_k^H Xi_k H_k``."""
    Xi = [hermitian(Fk @ Gk @ Fk.conj().T) for Fk, Gk in zip(F, G)]
    Q = [hermitian(Hk.conj().T @ X @ Hk) for Hk, X in zip(H, Xi)]
    return Xi, Q


def _block_diag_part(A: np.ndarray, n_sat: int) -> np.ndarray:
    M = A.shape[0] // n_sat
    out = np.zeros_like(A)
    for s in range(n_sat):
        sl = slice(s * M, (s + 1) * M)
        out[sl, sl] = A[sl, sl]
    return out


@dataclass(frozen=True)
class EigenContext:
    """EVD of one user's quadratic term ``J_k = U diag(lam) U^H`` and rotated linear term ``U^H B_k``."""

    lam: np.ndarray
    U: np.ndarray
    G: np.ndarray

    @property
    def theta(self) -> np.ndarray:
        """Diagonal of ``Theta_k = U^H B B^H U``."""
        return np.sum(np.abs(self.G) ** 2, axis=1)

    def active(self) -> np.ndarray:
        top = float(np.max(self.lam)) if self.lam.size else 0.0
        return self.lam > _NULL_EIG * top if top > 0 else np.zeros(self.lam.shape, dtype=bool)

    def power(self, mu: float) -> float:
        a = self.active()
        return float(np.sum(self.theta[a] / (self.lam[a] + mu) ** 2))

    def precoder(self, mu: float) -> np.ndarray:
        a = self.active()
        scale = np.zeros_like(self.lam)
        scale[a] = 1.0 / (self.lam[a] + mu)
        return self.U @ (scale[:, None] * self.G)


def bisection_mu(contexts: list[EigenContext], P: float, tol: float = 1e-10, max_steps: int = 200) -> float:
    """Smallest ``mu >= 0`` with ``sum_k tr((Lam_k + mu)^-2 Theta_k) <= P``.

    Returns 0 when the unconstrained minimizer already fits the budget;
    otherwise the feasible end of a bisection bracket, whose power is within
    ``tol * P`` of ``P``.
    """
    if not P > 0:
        raise ValueError("power budget must be positive")

    def power(mu):
        return sum(c.power(mu) for c in contexts)

    if power(0.0) <= P:
        return 0.0
    lo, hi = 0.0, 1.0
    doublings = 0
    while power(hi) >= P:
        lo, hi = hi, 2.0 * hi
        doublings += 1
        if doublings > _MAX_DOUBLINGS:
            raise NumericalError("could not bracket the power multiplier")
    for _ in range(max_steps):
        if P - power(hi) <= tol * P:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if power(mid) > P:
            lo = mid
        else:
            hi = mid
    return hi


def _eigen_contexts(H, F, G, n_sat):
    Xi, Q = _weighted_grams(H, F, G)
    shared = sum(_block_diag_part(Qk, n_sat) for Qk in Q)
    contexts = []
    for Hk, Fk, Gk, Qk in zip(H, F, G, Q):
        J = hermitian(Qk + shared - _block_diag_part(Qk, n_sat))
        lam, U = np.linalg.eigh(J)
        lam = np.maximum(lam, 0.0)
        B = Hk.conj().T @ Fk @ Gk
        contexts.append(EigenContext(lam=lam, U=U, G=U.conj().T @ B))
    return contexts


def _tpc_step(H, F, G, W: PrecoderSet, P, opts):
    contexts = _eigen_contexts(H, F, G, W.n_sat)
    mu = bisection_mu(contexts, P, opts.bisection_tol, opts.bisection_max_steps)
    out = PrecoderSet([c.precoder(mu) for c in contexts], W.n_sat, TPC)
    # bisection returns the feasible end; guard the last ulp anyway
    return scale_into_budget(out, P, TPC)


def _papc_step(H, F, G, W: PrecoderSet, P, opts):
    """One sweep of exact per-antenna minimization, satellites then antennas in index order."""
    S, M = W.n_sat, W.block
    SM = S * M
    P_m = P / SM
    sizes = [Hk.shape[0] for Hk in H]
    streams = W.streams
    Hs = np.vstack(H)
    Xi = linalg.block_diag(*[hermitian(Fk @ Gk @ Fk.conj().T) for Fk, Gk in zip(F, G)])
    FG = linalg.block_diag(*[Fk @ Gk for Fk, Gk in zip(F, G)])
    Xi_h = Xi @ Hs
    a = np.einsum("rm,rm->m", Hs.conj(), Xi_h).real
    lin = Hs.conj().T @ FG
    # rows of user k only see columns of user j != k through the serving satellite's block
    same_user = linalg.block_diag(*[np.ones((r, d)) for r, d in zip(sizes, streams)]).astype(bool)
    Wall = W.stacked().copy()
    for s in range(S):
        own = np.zeros(SM, dtype=bool)
        own[s * M:(s + 1) * M] = True
        C = Hs[:, own] @ Wall[own] + np.where(same_user, Hs[:, ~own] @ Wall[~own], 0.0)
        for m in range(s * M, (s + 1) * M):
            h = Hs[:, m]
            xh = Xi_h[:, m]
            b = lin[m] - xh.conj() @ (C - np.outer(h, Wall[m]))
            nb = float(np.linalg.norm(b))
            mu = max(0.0, nb / np.sqrt(P_m) - a[m])
            denom = a[m] + mu
            new = b / denom if denom > 0 else np.zeros_like(b)
            nn = float(np.vdot(new, new).real)
            if nn > P_m:
                new *= np.sqrt(P_m / nn)
            C += np.outer(h, new - Wall[m])
            Wall[m] = new
    splits = np.cumsum(streams)[:-1]
    return PrecoderSet(np.split(Wall, splits, axis=1), S, PAPC)


def _solve(channels, P, sigma2, n_sat, d, W_init, opts, constraint, callback=None):
    opts = DEFAULT_SOLVER if opts is None else opts
    H, stat_sat = _as_channels(channels)
    n_sat = stat_sat if n_sat is None else n_sat
    if n_sat is None:
        raise ValueError("n_sat is required for plain channel matrices")
    _check_problem(H, P, n_sat)
    if not sigma2 > 0:
        raise ValueError("noise power must be positive")
    # work with unit noise; precoders are unaffected
    Hn = [h / np.sqrt(sigma2) for h in H]
    if W_init is None:
        if d is None:
            d = [min(h.shape) for h in H]
        W = matched_filter_init(Hn, P, n_sat, d, constraint)
    else:
        W = scale_into_budget(W_init, P, constraint)
        if d is not None and list(d) != W.streams:
            raise ValueError("stream counts do not match the initial precoders")
    if len(W) != len(H) or W.n_antennas != H[0].shape[1]:
        raise ValueError("initial precoders do not match the channels")
    step = _tpc_step if constraint == TPC else _papc_step
    F, G, obj = _receiver_update(Hn, W)
    state = WmmseState(W=W, F=F, Gamma=G, initial_objective=obj)
    for _ in range(opts.max_iters):
        W = step(Hn, F, G, W, P, opts)
        F, G, new_obj = _receiver_update(Hn, W)
        state.objective_trace.append(new_obj)
        state.W, state.F, state.Gamma = W, F, G
        if callback is not None:
            callback(len(state.objective_trace), W)
        if abs(new_obj - obj) <= opts.eps_obj:
            state.converged = True
            break
        obj = new_obj
    # filters are reported for the caller's noise scale
    state.F = [Fk / np.sqrt(sigma2) for Fk in state.F]
    return state


def wmmse_tpc(channels, P: float, sigma2: float, n_sat: int | None = None, d=None,
              W_init: PrecoderSet | None = None, opts: SolverOptions | None = None,
              callback=None) -> WmmseState:
    """WMMSE under ``sum_k tr(W_k W_k^H) <= P``.

    ``channels`` is a list of per-user matrices (then ``n_sat`` is required)
    or a list of :class:`StatChannel` for the statistical design.
    ``callback(iteration, W)`` runs after every precoder update.
    """
    return _solve(channels, P, sigma2, n_sat, d, W_init, opts, TPC, callback)


def wmmse_papc(channels, P: float, sigma2: float, n_sat: int | None = None, d=None,
               W_init: PrecoderSet | None = None, opts: SolverOptions | None = None,
               callback=None) -> WmmseState:
    """WMMSE under ``sum_k [W_k W_k^H]_mm <= P / (S M)`` for every antenna."""
    return _solve(channels, P, sigma2, n_sat, d, W_init, opts, PAPC, callback)


def wmmse_scsi(stats: list[StatChannel], P: float, sigma2: float, constraint: str = TPC, d=None,
               W_init: PrecoderSet | None = None, opts: SolverOptions | None = None,
               callback=None) -> WmmseState:
    """Statistical-CSI design: the instantaneous solvers run on ``H_tilde``."""
    solver = wmmse_tpc if constraint == TPC else wmmse_papc
    return solver(stats, P, sigma2, d=d, W_init=W_init, opts=opts, callback=callback)
