import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from svhmc import StochasticVolatilityMCMC, check_returns
from svhmc.samplers import ChainConfig, run_chain


class TestCheckReturns:
    def test_column_is_flattened(self):
        out = check_returns(np.arange(4.0).reshape(-1, 1))
        assert out.shape == (4,)

    @pytest.mark.parametrize("bad", [np.ones((3, 2)), [1.0], [1.0, np.nan], [[1.0], [np.inf]]])
    def test_rejects(self, bad):
        with pytest.raises(ValueError):
            check_returns(bad)


class TestEstimator:
    def test_params_round_trip(self):
        est = StochasticVolatilityMCMC(algorithm="metropolis", n_samples=50, random_state=3)
        p = est.get_params()
        assert p["algorithm"] == "metropolis" and p["random_state"] == 3
        twin = clone(est).set_params(burn_in=7)
        assert twin.burn_in == 7 and twin.n_samples == 50

    def test_matches_run_chain(self, reference_series):
        y = reference_series[0][:300]
        est = StochasticVolatilityMCMC(burn_in=50, n_samples=200, random_state=9).fit(y)
        ref = run_chain(y, ChainConfig(burn_in=50, n_record=200, seed=9, tracked_latents=(100,)))
        np.testing.assert_array_equal(est.chain_.mu, ref.mu)
        assert est.params_.phi == pytest.approx(ref.phi.mean())
        assert set(est.summary_) == {"phi", "mu", "sigma_eta2", "h_100"}
        assert est.volatility().shape == (300,)
        assert 0 <= est.acceptance_ <= 1 and est.n_obs_ == 300

    def test_column_input_and_short_series(self):
        y = np.random.default_rng(0).normal(size=(40, 1))
        est = StochasticVolatilityMCMC(burn_in=10, n_samples=20).fit(y)
        assert est.summary_ == {}
        assert est.chain_.tracked_h.shape == (20, 0)

    def test_not_fitted(self):
        with pytest.raises(NotFittedError):
            StochasticVolatilityMCMC().volatility()

    def test_invalid_config(self):
        with pytest.raises(ValueError):
            StochasticVolatilityMCMC(algorithm="nuts", n_samples=5).fit(np.ones(10))
        with pytest.raises(ValueError):
            StochasticVolatilityMCMC(n_samples=0).fit(np.ones(10))
