import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import sample_moments
from satmimo.channel import LinkStats, draw_channel_batch, phase_error_mean, sample_geometry, steering_vector
from satmimo.config import SystemConfig
from satmimo.stat_csi import SmoothedGamma, build_stat_channel, mean_channel, second_moment, update_gamma


def _links(S=3, kappa_dB=10.0, phase_var=0.05, seed=0):
    cfg = SystemConfig(S=S, K=1, M_x=3, M_y=2, N_x=2, N_y=2, kappa_dB=kappa_dB, phase_var=phase_var)
    return sample_geometry(cfg, np.random.default_rng(seed))[0]


def test_mean_channel_zero_for_rayleigh():
    assert np.all(mean_channel(_links(kappa_dB=-math.inf)) == 0)


def test_mean_channel_zero_when_phase_fully_random():
    links = _links(phase_var=1e4)
    assert np.linalg.norm(mean_channel(links)) < 1e-300 + 1e-12 * links[0].gamma


def test_mean_channel_block_energy():
    g = steering_vector(2, 2, 1.0, 0.3, -0.2)
    d = steering_vector(2, 1, 0.5, 0.1, 0.0)
    link = LinkStats(gamma=1.0, kappa=10.0, g=g, d_los=d, phase_mean=phase_error_mean(0.0))
    assert np.linalg.norm(mean_channel([link])) ** 2 == pytest.approx(10 / 11, rel=1e-14)


def test_factor_layout():
    links = _links()
    stat = build_stat_channel(links)
    N, M, S = links[0].N, links[0].M, len(links)
    assert stat.H_tilde.shape == (N + S, S * M)
    np.testing.assert_array_equal(stat.H_tilde[:N], stat.H_bar)
    for s, link in enumerate(links):
        row = stat.H_tilde[N + s]
        np.testing.assert_allclose(row[s * M:(s + 1) * M], math.sqrt(link.rho) * link.g.conj())
        assert np.count_nonzero(np.delete(row, np.s_[s * M:(s + 1) * M])) == 0


@pytest.mark.parametrize("seed", range(5))
def test_factor_reproduces_second_moment(seed):
    links = _links(S=4, seed=seed)
    A = build_stat_channel(links).gram
    B = second_moment(links)
    assert np.max(np.abs(A - B)) <= 1e-12 * np.max(np.abs(B))
    M = links[0].M
    for s, link in enumerate(links):
        np.testing.assert_allclose(A[s * M:(s + 1) * M, s * M:(s + 1) * M],
                                   link.gamma * np.outer(link.g, link.g.conj()), atol=1e-14 * link.gamma)


def test_rayleigh_gram_block_diagonal():
    links = _links(kappa_dB=-math.inf)
    A = build_stat_channel(links).gram
    M = links[0].M
    off = A.copy()
    for s in range(len(links)):
        off[s * M:(s + 1) * M, s * M:(s + 1) * M] = 0
    assert np.max(np.abs(off)) == 0


def test_gram_is_psd():
    for seed in range(10):
        w = np.linalg.eigvalsh(build_stat_channel(_links(S=4, seed=seed)).gram)
        assert w.min() >= -1e-10 * w.max()


def test_monte_carlo_second_moment_matches_factor():
    links = _links(S=3, seed=3)
    H, _ = draw_channel_batch(links, np.random.default_rng(11), 100_000)
    mean, second = sample_moments(H)
    stat = build_stat_channel(links)
    assert np.linalg.norm(second - stat.gram) <= 0.01 * np.linalg.norm(stat.gram)
    assert np.linalg.norm(mean - stat.H_bar) <= 0.01 * np.linalg.norm(stat.H_bar)


@given(st.floats(0.0, 3.0), st.floats(0.01, 3.0))
def test_phase_error_degrades_monotonically(v, dv):
    a, b = _links(phase_var=v, seed=1), _links(phase_var=v + dv, seed=1)
    assert np.linalg.norm(mean_channel(b)) <= np.linalg.norm(mean_channel(a)) + 1e-18
    assert all(lb.rho >= la.rho for la, lb in zip(a, b))


def test_update_gamma_examples():
    assert update_gamma(SmoothedGamma(7.0, 1.0), 3.0).value == 3.0
    assert update_gamma(SmoothedGamma(2.0, 0.0), 9.0).value == 2.0
    out = update_gamma(SmoothedGamma(2.0, 0.5), 4.0)
    assert out.value == 3.0 and out.alpha == 0.5
    with pytest.raises(ValueError):
        update_gamma(SmoothedGamma(2.0, 0.5), 0.0)
    with pytest.raises(ValueError):
        SmoothedGamma(1.0, 1.5)


@given(st.floats(1e-6, 1e6), st.floats(0.0, 1.0), st.lists(st.floats(1e-6, 1e6), min_size=1, max_size=10))
def test_smoothed_gamma_stays_positive(v0, alpha, fresh):
    state = SmoothedGamma(v0, alpha)
    for f in fresh:
        state = update_gamma(state, f)
        assert state.value > 0
