import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from mfrank import rank_model as rm
from mfrank.errors import CalibrationError, UnreachableRankError

M = rm.RankModel()

# 40-digit evaluations of the in-degree -> rank chain at the default parameters
PREDICT_1000_1E6 = (1.0512345679012345679e-8, 89582.18730500425497, 11.059529296914105552)
PREDICT_10_1E6 = 1468.7225435414651845
REQUIRED = {(10, 10**6): 1097, (1, 10**6): 8903, (100, 10**7): 1097, (5, 10**5): 253}


def test_defaults():
    assert (M.A, M.alpha, M.web_size, M.mean_k_in, M.q) == (1.5e-4, 1.1, 8.1e9, 10.0, 0.15)


@pytest.mark.parametrize("field, value", [("A", 0), ("alpha", -1), ("web_size", 0.5), ("mean_k_in", 0), ("q", 1)])
def test_model_validation(field, value):
    with pytest.raises(ValueError):
        rm.RankModel(**{field: value})


def test_global_rank_examples():
    assert rm.global_rank(M, 1e-8) == pytest.approx(1.5e-4 * 10**8.8, rel=1e-12)
    assert rm.global_rank(M, 1e-8) == pytest.approx(9.46e4, rel=1e-3)
    with pytest.raises(ValueError):
        rm.global_rank(M, 0.0)


def test_global_rank_scaling():
    for p in np.logspace(-12, -1, 25):
        assert rm.global_rank(M, 2 * p) / rm.global_rank(M, p) == pytest.approx(2**-1.1, rel=1e-12)


def test_local_rank_examples():
    assert rm.local_rank(M, 12345.0, M.web_size) == pytest.approx(12345.0, rel=1e-15)
    assert rm.local_rank(M, M.web_size, 777) == pytest.approx(777, rel=1e-15)
    assert rm.local_rank(M, 9.46e4, 10**6) == pytest.approx(11.68, abs=0.01)


def test_predict_against_high_precision():
    p, R, r = PREDICT_1000_1E6
    assert rm.pagerank_from_indegree(M, 1000) == pytest.approx(p, rel=1e-13)
    assert rm.predict_local_rank(M, 1000, 10**6) == pytest.approx(r, rel=1e-6)
    assert rm.predict_local_rank(M, 10, 10**6) == pytest.approx(PREDICT_10_1E6, rel=1e-12)
    assert float(oracles.predict_mp(1000, 10**6)[2]) == pytest.approx(r, rel=1e-15)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**7), st.integers(1, 10**9))
def test_composition_identity(k, n):
    chain = rm.local_rank(M, rm.global_rank(M, rm.pagerank_from_indegree(M, k)), n)
    assert rm.predict_local_rank(M, k, n) == pytest.approx(chain, rel=1e-12)
    assert rm.predict_local_rank_closed(M, k, n) == pytest.approx(chain, rel=1e-12)


def test_monotonicity():
    k = np.arange(0, 5000)
    r = rm.predict_local_rank(M, k, 10**6)
    assert np.all(np.diff(r) < 0)
    assert rm.predict_local_rank(M, 50, 2 * 10**6) == pytest.approx(2 * rm.predict_local_rank(M, 50, 10**6))


@pytest.mark.parametrize("k", [10, 100, 1000])
def test_required_round_trip(k):
    n = 10**6
    assert rm.required_inlinks(M, rm.predict_local_rank(M, k, n), n) == k


def test_required_against_bisection_oracle():
    for (target, n), k in REQUIRED.items():
        assert rm.required_inlinks(M, target, n) == k
        assert oracles.required_by_bisection(target, n) == k


def test_required_floor_case():
    n = 100
    assert rm.required_inlinks(M, rm.predict_local_rank(M, 0, n), n) == 0
    assert rm.required_inlinks(M, 50, n) == 0


def test_required_errors():
    with pytest.raises(ValueError):
        rm.required_inlinks(M, 0.5, 10)
    with pytest.raises(ValueError):
        rm.required_inlinks(M, 5, 0)
    # a vanishing exponent makes every rank the same: no amount of links helps
    flat = rm.RankModel(A=1e3, alpha=1e-300)
    with pytest.raises(UnreachableRankError):
        rm.required_inlinks(flat, 1, 10**9)


def test_observation_validation():
    with pytest.raises(ValueError):
        rm.RankObservation(5, 10, 11)
    with pytest.raises(ValueError):
        rm.RankObservation(5, 10, 0)
    assert rm.RankObservation(5, 10**6, 1000).at_cap
    assert not rm.RankObservation(5, 10**6, 999).at_cap


def _synthetic_observations(A, seed, sigma=0.0, count=60, lo=50, hi=140):
    """Integer ranks from the forward model; ranks below ``lo`` are skipped
    so that rounding to integers stays under 1%."""
    rng = np.random.default_rng(seed)
    m = M.with_A(A)
    obs = []
    while len(obs) < count:
        k = int(rng.integers(100, 50_000))
        n = int(rng.integers(10**4, 10**7))
        r = rm.predict_local_rank(m, k, n) * math.exp(sigma * rng.normal())
        r = int(round(r))
        if lo <= r < hi and r <= n:
            obs.append(rm.RankObservation(k, n, r))
    return obs


def test_calibrate_noiseless():
    obs = _synthetic_observations(1.5e-4, 0)
    m, loss = rm.calibrate_A(obs)
    assert m.A == pytest.approx(1.5e-4, rel=0.01)
    assert loss < 1e-3


def test_calibrate_scale_invariance():
    obs = _synthetic_observations(3e-4, 1)
    scaled = [rm.RankObservation(o.k_in, 7 * o.n_hits, 7 * o.empirical_rank) for o in obs]
    a = rm.calibrate_A(obs)[0].A
    b = rm.calibrate_A(scaled)[0].A
    assert b == pytest.approx(a, rel=1e-12)


def test_calibrate_with_capped_observations():
    m = M.with_A(2e-4)
    obs = _synthetic_observations(2e-4, 2)
    # pages predicted far below the cap are reported at the cap
    for k in (1, 2, 3):
        assert rm.predict_local_rank(m, k, 10**7) > rm.RESULT_CAP
        obs.append(rm.RankObservation(k, 10**7, rm.RESULT_CAP))
    fit, _ = rm.calibrate_A(obs)
    assert fit.A == pytest.approx(2e-4, rel=0.01)
    assert rm.calibration_loss(obs, fit) == pytest.approx(rm.calibrate_A(obs)[1])


def test_calibrate_errors():
    with pytest.raises(CalibrationError):
        rm.calibrate_A([rm.RankObservation(10, 100, 5)] * 9)
    with pytest.raises(CalibrationError):
        rm.calibrate_A([rm.RankObservation(10, 100, 5)] * 20)


def test_alpha_from_pagerank():
    s = oracles.pareto_samples(2.1, 1e-6, 50_000, 3)
    m = rm.RankModel.from_pagerank(s, x_min=1e-6)
    assert m.alpha == pytest.approx(1.1, abs=0.03)
