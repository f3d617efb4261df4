import numpy as np
import pytest

from conftest import crandn
from satmimo.lanczos import lanczos_tridiagonalize, lanczos_topk


def _low_rank(rng, n, r):
    X = crandn(rng, n, r)
    return X @ X.conj().T


def test_diagonal_full_krylov_space(rng):
    pairs = lanczos_topk(np.diag([3.0, 2.0, 1.0]), 3, rng)
    np.testing.assert_allclose([p[0] for p in pairs], [3.0, 2.0, 1.0], atol=1e-10)


def test_diagonal_two_steps_only_returns_accurate_pairs(rng):
    Psi = np.diag([3.0, 2.0, 1.0])
    pairs = lanczos_topk(Psi, 2, rng)
    for lam, u in pairs:
        assert np.linalg.norm(Psi @ u - lam * u) <= 1e-6 * 3.0


def test_scaled_identity_terminates_after_one_step(rng):
    form = lanczos_tridiagonalize(2.5 * np.eye(6), 4, rng)
    assert form.alphas.size == 1 and form.betas[0] == 0.0
    pairs = lanczos_topk(2.5 * np.eye(6), 4, rng)
    assert len(pairs) == 1 and pairs[0][0] == pytest.approx(2.5)


@pytest.mark.parametrize("seed", range(5))
def test_low_rank_matches_dense(seed):
    rng = np.random.default_rng(seed)
    Psi = _low_rank(rng, 64, 6)
    pairs = lanczos_topk(Psi, 8, rng)
    ref = np.linalg.eigvalsh(Psi)[::-1][:6]
    np.testing.assert_allclose([p[0] for p in pairs[:6]], ref, rtol=1e-8)


@pytest.mark.parametrize("seed", range(5))
def test_returned_pairs_are_true_eigenpairs(seed):
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(crandn(rng, 96, 96))
    Psi = (Q * 0.6 ** np.arange(96)) @ Q.conj().T
    pairs = lanczos_topk(Psi, 20, rng)
    assert len(pairs) >= 5
    spectrum = np.linalg.eigvalsh(Psi)
    top = max(p[0] for p in pairs)
    assert top >= (1 - 1e-8) * spectrum[-1]
    lams = [p[0] for p in pairs]
    assert lams == sorted(lams, reverse=True)
    for lam, u in pairs:
        assert np.linalg.norm(Psi @ u - lam * u) <= 1e-6 * top
        assert np.min(np.abs(spectrum - lam)) <= 1e-6 * top


def test_basis_orthonormal_and_tridiagonal(rng):
    Psi = _low_rank(rng, 50, 20)
    form = lanczos_tridiagonalize(Psi, 15, rng)
    C = form.C
    assert np.max(np.abs(C.conj().T @ C - np.eye(C.shape[1]))) <= 1e-8
    assert np.all(form.betas >= 0)
    np.testing.assert_allclose(C.conj().T @ Psi @ C, form.T, atol=1e-9 * np.linalg.norm(Psi))


def test_early_termination_is_exact_on_krylov_space(rng):
    Psi = _low_rank(rng, 30, 3)
    form = lanczos_tridiagonalize(Psi, 10, rng)
    # rank 3 plus a null component: the Krylov space closes after four vectors
    assert form.alphas.size == 4
    C = form.C
    for _ in range(3):
        x = C @ crandn(rng, C.shape[1])
        np.testing.assert_allclose(C @ form.T @ C.conj().T @ x, Psi @ x, atol=1e-9 * np.linalg.norm(Psi))


def test_iteration_count_validated(rng):
    with pytest.raises(ValueError):
        lanczos_topk(np.eye(3), 4, rng)
    with pytest.raises(ValueError):
        lanczos_topk(np.eye(3), 0, rng)


def test_deduplication_of_repeated_ritz_values(rng):
    Psi = np.diag([5.0, 5.0, 1.0, 1.0])
    pairs = lanczos_topk(Psi, 4, rng)
    lams = [p[0] for p in pairs]
    # one Krylov sequence sees each eigenspace once
    assert len(lams) == 2
    np.testing.assert_allclose(lams, [5.0, 1.0], atol=1e-10)
