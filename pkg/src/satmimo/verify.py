"""Randomized property checks runnable from the command line (``simulate verify``)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import draw_realization, sample_geometry, satellite_directions, steering_vector
from .config import SolverOptions, SystemConfig
from .lanczos import lanczos_topk
from .majorization import inverse_product_objective, majorizes, random_doubly_stochastic, theorem1_transform
from .metrics import mmse_matrix, rate_icsi, stream_sinr
from .precoding import PrecoderSet
from .robust import robust_precoder
from .stat_csi import build_stat_channel, second_moment
from .waterfill import waterfill
from .wmmse import wmmse_papc, wmmse_tpc


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def check_eigen_matching(rng, n_cases=200):
    worst_diag, worst_trace = 0.0, -np.inf
    for _ in range(n_cases):
        n = int(rng.integers(1, 9))
        s = int(rng.integers(1, n + 1))
        X = _crandn(rng, n, int(rng.integers(1, n + 1)))
        Psi = X @ X.conj().T
        A = _crandn(rng, n, s)
        At = theorem1_transform(Psi, A)
        lam1 = np.sort(np.linalg.eigvalsh(A.conj().T @ Psi @ A))[::-1]
        D = np.diag(At.conj().T @ Psi @ At).real
        worst_diag = max(worst_diag, float(np.max(np.abs(D - lam1)) / max(lam1.max(), 1e-300)))
        worst_trace = max(worst_trace, float(np.vdot(At, At).real - np.vdot(A, A).real))
    ok = worst_diag <= 1e-9 and worst_trace <= 1e-9
    return CheckResult("eigen_matching_transform", ok, f"diag err {worst_diag:.2e}, trace excess {worst_trace:.2e}")


def check_majorization(rng, n_cases=200):
    ok = True
    for _ in range(n_cases):
        n = int(rng.integers(1, 13))
        X = _crandn(rng, n, n)
        R = X + X.conj().T
        ok &= majorizes(np.diag(R).real, np.linalg.eigvalsh(R))
        y = rng.uniform(0.1, 5.0, n)
        x = random_doubly_stochastic(n, rng) @ y
        ok &= inverse_product_objective(x) >= inverse_product_objective(y) - 1e-12 * abs(inverse_product_objective(y))
    return CheckResult("majorization_and_schur", bool(ok), f"{n_cases} cases")


def check_waterfill(rng, n_cases=200):
    worst = 0.0
    for _ in range(n_cases):
        lam = rng.uniform(0.05, 10.0, int(rng.integers(1, 17)))
        P = float(rng.uniform(0.1, 10.0))
        for crit in ("max_se", "mmse"):
            p = waterfill(lam, P, crit)
            worst = max(worst, abs(p.sum() - P) / P)
            act = p > 0
            g = 1.0 / (1.0 + p * lam) if crit == "max_se" else 1.0 / (1.0 + p * lam) ** 2
            grad = lam * g
            if act.any():
                level = grad[act].max()
                worst = max(worst, float(np.ptp(grad[act]) / level))
                if (~act).any():
                    worst = max(worst, float(max(grad[~act].max() - level, 0.0) / level))
    return CheckResult("waterfill_kkt", worst <= 1e-8, f"worst KKT/budget residual {worst:.2e}")


def check_rate_identities(rng, n_cases=50):
    worst = 0.0
    for _ in range(n_cases):
        S, M, K, N = 2, 3, 2, 2
        H = [_crandn(rng, N, S * M) for _ in range(K)]
        W = PrecoderSet([_crandn(rng, S * M, 2) for _ in range(K)], S)
        for k in range(K):
            E = mmse_matrix(H[k], W, 0.7, k)
            r = rate_icsi(H[k], W, 0.7, k)
            worst = max(worst, abs(r + np.log2(np.linalg.det(E).real)) / max(r, 1.0))
            sinr = stream_sinr(H[k], W, 0.7, k)
            worst = max(worst, float(np.max(np.abs(np.diag(E).real * (1 + sinr) - 1))))
    return CheckResult("rate_identities", worst <= 1e-10, f"worst {worst:.2e}")


def check_second_moment(rng, n_cases=20):
    worst = 0.0
    cfg = SystemConfig(S=3, K=2, M_x=2, M_y=2, N_x=2, N_y=1)
    for _ in range(n_cases):
        links = sample_geometry(cfg, rng)
        for row in links:
            A = build_stat_channel(row).gram
            B = second_moment(row)
            worst = max(worst, float(np.max(np.abs(A - B)) / np.max(np.abs(B))))
    return CheckResult("second_moment_factor", worst <= 1e-12, f"worst relative {worst:.2e}")


def check_zero_forcing(rng, n_cases=20):
    worst = 0.0
    cfg = SystemConfig(S=2, K=4, M_x=2, M_y=3, N_x=2, N_y=1)
    for _ in range(n_cases):
        links = sample_geometry(cfg, rng)
        stats = [build_stat_channel(r) for r in links]
        W = robust_precoder(satellite_directions(links), stats, cfg.P, cfg.sigma2, [2] * cfg.K)
        H = draw_realization(links, rng).H
        M = cfg.M
        for k in range(cfg.K):
            for j in range(cfg.K):
                if j == k:
                    continue
                for s in range(cfg.S):
                    blk = W.satellite_block(k, s)
                    nb = np.linalg.norm(blk)
                    if nb > 0:
                        worst = max(worst, np.linalg.norm(H[j][:, s * M:(s + 1) * M] @ blk) / (nb * np.linalg.norm(H[j][:, s * M:(s + 1) * M])))
    return CheckResult("zero_forcing", worst <= 1e-9, f"worst leakage {worst:.2e}")


def check_wmmse(rng, n_cases=10):
    worst_drop, feasible = 0.0, True
    opts = SolverOptions(max_iters=15, eps_obj=0.0)
    for _ in range(n_cases):
        S, M, K, N = 2, 4, 3, 2
        H = [_crandn(rng, N, S * M) for _ in range(K)]
        P = 4.0
        for solver in (wmmse_tpc, wmmse_papc):
            st = solver(H, P, 1.0, n_sat=S, d=[2] * K, opts=opts)
            tr = [st.initial_objective] + st.objective_trace
            worst_drop = max(worst_drop, float(-np.min(np.diff(tr))))
            feasible &= st.W.is_feasible(P)
    return CheckResult("wmmse_monotone_feasible", worst_drop <= 1e-8 and feasible,
                       f"largest decrease {worst_drop:.2e}")


def check_lanczos(rng, n_cases=10):
    worst = 0.0
    for _ in range(n_cases):
        X = _crandn(rng, 64, 6)
        Psi = X @ X.conj().T
        pairs = lanczos_topk(Psi, 8, rng)
        ref = np.linalg.eigvalsh(Psi)[::-1][:6]
        got = np.array([p[0] for p in pairs[:6]])
        worst = max(worst, float(np.max(np.abs(got - ref) / ref)) if got.size == 6 else np.inf)
    return CheckResult("lanczos_vs_dense", worst <= 1e-8, f"worst relative {worst:.2e}")


def check_steering(rng, n_cases=100):
    worst = 0.0
    for _ in range(n_cases):
        v = steering_vector(3, 2, 0.5, *rng.uniform(-1, 1, 2))
        worst = max(worst, abs(np.linalg.norm(v) - 1.0))
    return CheckResult("steering_unit_norm", worst <= 1e-12, f"worst {worst:.2e}")


CHECKS = (check_steering, check_second_moment, check_rate_identities, check_eigen_matching, check_majorization,
          check_waterfill, check_zero_forcing, check_lanczos, check_wmmse)


def run_all(seed: int = 0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    return [check(rng) for check in CHECKS]
