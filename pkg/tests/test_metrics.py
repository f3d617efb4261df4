import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import crandn
from oracles import expanded_mse_trace
from satmimo.channel import LinkStats, draw_channel, phase_error_mean, sample_geometry, steering_vector
from satmimo.config import SystemConfig
from satmimo.metrics import (mmse_matrix, mse_matrix, rate_icsi, rate_report, rate_scsi, scsi_wiener_filter,
                             select_stream_count, stream_sinr, user_rates, wiener_filter)
from satmimo.precoding import PrecoderSet
from satmimo.stat_csi import build_stat_channel


def _instance(rng, S=2, M=3, K=3, N=2, d=2):
    H = [crandn(rng, N, S * M) for _ in range(K)]
    W = PrecoderSet([crandn(rng, S * M, d) for _ in range(K)], S)
    return H, W


def test_mse_all_zero_is_identity():
    W = PrecoderSet([np.zeros((4, 2))], 2)
    E = mse_matrix(np.ones((3, 4)), W, np.zeros((3, 2)), 0.5, 0)
    np.testing.assert_array_equal(E, np.eye(2))


def test_mse_rejects_bad_filter(rng):
    H, W = _instance(rng)
    with pytest.raises(ValueError):
        mse_matrix(H[0], W, np.zeros((5, 2)), 1.0, 0)
    with pytest.raises(ValueError):
        rate_icsi(np.zeros((2, 5)), W, 1.0, 0)


def test_single_user_mse_at_wiener_equals_mmse(rng):
    H = crandn(rng, 3, 4)
    W = PrecoderSet([crandn(rng, 4, 2)], 2)
    F = wiener_filter(H, W, 0.3, 0)
    np.testing.assert_allclose(mse_matrix(H, W, F, 0.3, 0), mmse_matrix(H, W, 0.3, 0), atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_mse_trace_matches_term_by_term_expansion(seed):
    rng = np.random.default_rng(seed)
    H, W = _instance(rng, S=2, M=2, K=3, N=2, d=2)
    F = crandn(rng, 2, 2)
    for k in range(3):
        got = np.trace(mse_matrix(H[k], W, F, 0.4, k)).real
        assert got == pytest.approx(expanded_mse_trace(H[k], W.W, k, F, 0.4, 2), rel=1e-12)


def test_wiener_zero_precoder():
    W = PrecoderSet([np.zeros((2, 1)), np.zeros((2, 1))], 1)
    assert np.all(wiener_filter(np.ones((2, 2)), W, 1.0, 0) == 0)


def test_scalar_wiener_and_rate():
    h, w, s2 = 1.7, 0.6, 0.3
    W = PrecoderSet([np.array([[w]])], 1)
    H = np.array([[h]])
    assert wiener_filter(H, W, s2, 0)[0, 0] == pytest.approx(h * w / ((h * w) ** 2 + s2))
    assert rate_icsi(H, W, s2, 0) == pytest.approx(math.log2(1 + (h * w) ** 2 / s2), rel=1e-12)


def test_wiener_minimizes_mse_trace(rng):
    H, W = _instance(rng)
    for k in range(3):
        F = wiener_filter(H[k], W, 0.5, k)
        best = np.trace(mse_matrix(H[k], W, F, 0.5, k)).real
        for _ in range(100):
            D = 0.1 * crandn(rng, *F.shape)
            assert np.trace(mse_matrix(H[k], W, F + D, 0.5, k)).real >= best - 1e-12


def test_mmse_identities(rng):
    H, W = _instance(rng)
    for k in range(3):
        E = mmse_matrix(H[k], W, 0.7, k)
        F = wiener_filter(H[k], W, 0.7, k)
        np.testing.assert_allclose(E, mse_matrix(H[k], W, F, 0.7, k), atol=1e-10)
        w = np.linalg.eigvalsh(E)
        assert w.min() > 0 and w.max() <= 1 + 1e-12
        sinr = stream_sinr(H[k], W, 0.7, k)
        np.testing.assert_allclose(np.diag(E).real * (1 + sinr), 1.0, atol=1e-12)
        r = rate_icsi(H[k], W, 0.7, k)
        assert r == pytest.approx(-np.log2(np.linalg.det(E).real), rel=1e-10)


def test_zero_precoder_rates():
    W = PrecoderSet([np.zeros((4, 2))], 2)
    assert mmse_matrix(np.ones((2, 4)), W, 1.0, 0) == pytest.approx(np.eye(2))
    assert rate_icsi(np.ones((2, 4)), W, 1.0, 0) == 0.0


def _stat(seed=0, S=2, kappa_dB=10.0, phase_var=0.05):
    cfg = SystemConfig(S=S, K=1, M_x=2, M_y=2, N_x=2, N_y=1, kappa_dB=kappa_dB, phase_var=phase_var)
    links = sample_geometry(cfg, np.random.default_rng(seed))[0]
    return links, build_stat_channel(links)


def test_scsi_rate_zero_precoder():
    _, stat = _stat()
    assert rate_scsi(stat, PrecoderSet([np.zeros((8, 2))], 2), 1e-13, 0) == 0.0
    assert np.all(scsi_wiener_filter(stat, PrecoderSet([np.zeros((8, 2))], 2), 1e-13, 0) == 0)


def test_scsi_rate_deterministic_limit(rng):
    g = steering_vector(2, 2, 1.0, 0.2, 0.1)
    d = steering_vector(2, 1, 0.5, -0.4, 0.0)
    link = LinkStats(gamma=3.0, kappa=math.inf, g=g, d_los=d, phase_mean=phase_error_mean(0.0))
    stat = build_stat_channel([link])
    H, _ = draw_channel([link], rng)
    W = PrecoderSet([crandn(rng, 4, 2)], 1)
    assert rate_scsi(stat, W, 0.5, 0) == pytest.approx(rate_icsi(H, W, 0.5, 0), rel=1e-12)


def test_scsi_rate_single_user_determinant_identity(rng):
    _, stat = _stat(seed=2)
    W = PrecoderSet([crandn(rng, 8, 2) * 1e-6], 2)
    s2 = 1e-13
    direct = np.linalg.slogdet(np.eye(2) + W[0].conj().T @ stat.gram @ W[0] / s2)[1] / math.log(2)
    assert rate_scsi(stat, W, s2, 0) == pytest.approx(direct, rel=1e-10)


def test_scsi_wiener_is_optimal(rng):
    _, stat = _stat(seed=3)
    W = PrecoderSet([crandn(rng, 8, 2) * 1e-6, crandn(rng, 8, 1) * 1e-6], 2)
    F = scsi_wiener_filter(stat, W, 1e-13, 0)
    E = mse_matrix(stat.H_tilde, W, F, 1e-13, 0)
    np.testing.assert_allclose(E, mmse_matrix(stat.H_tilde, W, 1e-13, 0), atol=1e-10)
    for _ in range(100):
        D = 0.1 * np.linalg.norm(F) * crandn(rng, *F.shape) / np.sqrt(F.size)
        assert np.trace(mse_matrix(stat.H_tilde, W, F + D, 1e-13, 0)).real >= np.trace(E).real - 1e-12


@given(st.floats(1.0, 100.0), st.integers(0, 20))
def test_scsi_rate_monotone_in_power(t, seed):
    _, stat = _stat(seed=seed)
    W = PrecoderSet([np.random.default_rng(seed).standard_normal((8, 2)) * 1e-6 + 0j], 2)
    assert rate_scsi(stat, W.scaled(math.sqrt(t)), 1e-13, 0) >= rate_scsi(stat, W, 1e-13, 0) - 1e-12


def test_rate_report_consistency(rng):
    H, W = _instance(rng)
    rep = rate_report(H, W, 0.5)
    assert rep.sum_rate == pytest.approx(float(np.sum(user_rates(H, W, 0.5))))
    for r, sinr in zip(rep.per_user_rate, rep.per_stream_sinr):
        assert r >= 0 and np.all(sinr >= 0)
        # per-stream Wiener decoding never beats joint decoding
        assert np.sum(np.log2(1 + sinr)) <= r + 1e-12


def test_rate_report_equality_for_diagonal_mmse():
    H = np.diag([2.0, 1.0]).astype(complex)
    W = PrecoderSet([np.eye(2, dtype=complex)], 1)
    rep = rate_report([H], W, 0.5)
    assert np.sum(np.log2(1 + rep.per_stream_sinr[0])) == pytest.approx(rep.per_user_rate[0], rel=1e-12)


def test_select_stream_count_examples():
    assert select_stream_count([3.0], 1.0) == 1
    assert select_stream_count([10.0, 1e-3], 0.1) == 1
    assert select_stream_count([4.0, 4.0], 2.0) == 2
    with pytest.raises(ValueError):
        select_stream_count([], 1.0)
    with pytest.raises(ValueError):
        select_stream_count([1.0, 2.0], 1.0)


@given(st.lists(st.floats(0.01, 100.0), min_size=1, max_size=6), st.floats(0.01, 100.0))
def test_select_stream_count_is_argmax(eigs, power):
    from satmimo.waterfill import waterfill_maxse

    eigs = sorted(eigs, reverse=True)
    d = select_stream_count(eigs, power)
    vals = [np.sum(np.log1p(waterfill_maxse(eigs[:n], power) * np.array(eigs[:n]))) for n in range(1, len(eigs) + 1)]
    assert vals[d - 1] >= max(vals) - 1e-9 * max(1.0, max(vals))
