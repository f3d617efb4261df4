import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import crandn
from satmimo.majorization import inverse_product_objective, majorizes, random_doubly_stochastic, theorem1_transform

positive = st.lists(st.floats(0.05, 20.0), min_size=1, max_size=10)


def test_textbook_examples():
    assert majorizes([1, 1], [2, 0])
    assert not majorizes([2, 0], [1, 1])
    assert majorizes([3, 1, 2], [3, 1, 2])
    assert not majorizes([1, 1], [1, 2])
    with pytest.raises(ValueError):
        majorizes([1, 2], [3])


@given(st.lists(st.floats(-10, 10), min_size=1, max_size=8))
def test_reflexive_and_mean_is_minimal(x):
    x = np.array(x)
    assert majorizes(x, x)
    assert majorizes(np.full(x.size, x.mean()), x)


@pytest.mark.parametrize("seed", range(20))
def test_diagonal_majorized_by_spectrum(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 13))
    X = crandn(rng, n, n)
    R = X + X.conj().T
    assert majorizes(np.diag(R).real, np.linalg.eigvalsh(R))


@given(positive, st.integers(0, 2**32 - 1))
def test_schur_concavity_probe(y, seed):
    rng = np.random.default_rng(seed)
    y = np.array(y)
    x = random_doubly_stochastic(y.size, rng) @ y
    assert majorizes(x, y)
    fy = inverse_product_objective(y)
    assert inverse_product_objective(x) >= fy - 1e-12 * abs(fy)


def test_inverse_product_requires_positive():
    with pytest.raises(ValueError):
        inverse_product_objective([1.0, 0.0])


def test_eigen_matching_identity_psi(rng):
    A = crandn(rng, 5, 3)
    At = theorem1_transform(np.eye(5), A)
    assert np.vdot(At, At).real == pytest.approx(np.vdot(A, A).real, rel=1e-12)
    np.testing.assert_allclose(np.sort(np.diag(At.conj().T @ At).real),
                               np.sort(np.linalg.eigvalsh(A.conj().T @ A)), rtol=1e-12)


def test_eigen_matching_fixed_point(rng):
    X = crandn(rng, 6, 6)
    Psi = X @ X.conj().T
    lam, U = np.linalg.eigh(Psi)
    U = U[:, ::-1]
    A = U[:, :3] * np.array([1.5, 0.7, 0.2])
    At = theorem1_transform(Psi, A)
    for j in range(3):
        ratio = np.vdot(At[:, j], A[:, j]) / np.vdot(At[:, j], At[:, j])
        assert abs(abs(ratio) - 1) < 1e-9
        np.testing.assert_allclose(At[:, j] * ratio, A[:, j], atol=1e-9)


@given(st.integers(0, 2**32 - 1))
def test_eigen_matching_postconditions(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 9))
    s = int(rng.integers(1, n + 1))
    X = crandn(rng, n, int(rng.integers(1, n + 1)))
    Psi = X @ X.conj().T
    A = crandn(rng, n, s)
    At = theorem1_transform(Psi, A)
    lam1 = np.sort(np.linalg.eigvalsh(A.conj().T @ Psi @ A))[::-1]
    D = At.conj().T @ Psi @ At
    scale = max(lam1.max(), 1e-300)
    assert np.max(np.abs(D - np.diag(lam1))) <= 1e-9 * scale
    assert np.vdot(At, At).real <= np.vdot(A, A).real + 1e-9


def test_eigen_matching_shape_errors(rng):
    with pytest.raises(ValueError):
        theorem1_transform(np.eye(3), crandn(rng, 4, 2))
    with pytest.raises(ValueError):
        theorem1_transform(np.eye(2), crandn(rng, 2, 3))
