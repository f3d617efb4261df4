import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import projected_gradient_allocation
from satmimo.waterfill import waterfill, waterfill_maxse, waterfill_mmse

gains = st.lists(st.floats(0.05, 20.0), min_size=1, max_size=16)
budget = st.floats(0.05, 50.0)


def test_maxse_examples():
    np.testing.assert_allclose(waterfill_maxse([2.0], 1.0), [1.0])
    np.testing.assert_allclose(waterfill_maxse([4.0, 1.0], 1.0), [0.875, 0.125], rtol=1e-12)
    np.testing.assert_allclose(waterfill_maxse([4.0, 0.1], 1.0), [1.0, 0.0], atol=1e-15)


def test_mmse_examples():
    np.testing.assert_allclose(waterfill_mmse([1.0], 1.0), [1.0])
    np.testing.assert_allclose(waterfill_mmse([1.0, 1.0], 2.0), [1.0, 1.0], rtol=1e-12)
    # 1/sqrt(mu) = 1.5 from 1.5/sqrt(mu) - 1.25 = 1
    np.testing.assert_allclose(waterfill_mmse([4.0, 1.0], 1.0), [0.5, 0.5], rtol=1e-12)
    np.testing.assert_allclose(waterfill_mmse([4.0, 1.0], 1.0), projected_gradient_allocation([4.0, 1.0], 1.0, "mmse"),
                               atol=1e-6)


def test_zero_gain_streams_get_nothing():
    p = waterfill_maxse([3.0, 0.0, 1.0], 2.0)
    assert p[1] == 0.0 and p.sum() == pytest.approx(2.0)


@pytest.mark.parametrize("args", [([0.0, 0.0], 1.0), ([1.0], 0.0), ([1.0, -1.0], 1.0), ([], 1.0)])
def test_invalid_inputs(args):
    with pytest.raises(ValueError):
        waterfill_maxse(*args)


def test_unknown_criterion():
    with pytest.raises(ValueError):
        waterfill([1.0], 1.0, "minmax")


@given(gains, budget, st.sampled_from(["max_se", "mmse"]))
def test_budget_and_kkt(lam, P, crit):
    lam = np.array(lam)
    p = waterfill(lam, P, crit)
    assert np.all(p >= 0)
    assert p.sum() == pytest.approx(P, rel=1e-9)
    grad = lam / (1 + p * lam) if crit == "max_se" else lam / (1 + p * lam) ** 2
    act = p > 0
    level = grad[act].max()
    assert np.ptp(grad[act]) <= 1e-8 * level
    if (~act).any():
        assert grad[~act].max() <= level * (1 + 1e-8)


@given(gains, budget)
def test_maxse_water_level(lam, P):
    lam = np.array(lam)
    p = waterfill_maxse(lam, P)
    act = p > 0
    levels = p[act] + 1 / lam[act]
    assert np.ptp(levels) <= 1e-9 * levels.max()
    assert np.all(1 / lam[~act] >= levels.max() * (1 - 1e-9))


@given(gains, budget, st.floats(1.01, 4.0))
def test_more_power_never_hurts(lam, P, t):
    lam = np.array(lam)
    a, b = waterfill_maxse(lam, P), waterfill_maxse(lam, t * P)
    assert np.sum(np.log1p(b * lam)) >= np.sum(np.log1p(a * lam))
