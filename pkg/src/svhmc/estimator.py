"""scikit-learn style wrapper around :func:`svhmc.samplers.run_chain`."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils import check_array
from sklearn.utils.validation import check_is_fitted

from .diagnostics import summarize
from .model import SvParams
from .samplers import ChainConfig, HmcConfig, MetroConfig, run_chain


def check_returns(X) -> np.ndarray:
    """Validate a return series given as a 1-D array or a single column."""
    X = check_array(X, ensure_2d=False, dtype=np.float64)
    if X.ndim == 2:
        if X.shape[1] != 1:
            raise ValueError(f"expected a single column of returns, got shape {X.shape}")
        X = X[:, 0]
    if X.size < 2:
        raise ValueError("need at least two returns")
    return np.ascontiguousarray(X)


class StochasticVolatilityMCMC(BaseEstimator):
    """Posterior sampler for the SV model.

    Parameters
    ----------
    algorithm : {"hmc", "metropolis"}
        Update scheme for the latent log-variances.
    burn_in, n_samples, thin : int
        Discarded iterations, recorded draws and thinning interval.
    trajectory_length, n_steps : float, int
        HMC trajectory length and the initial number of leapfrog steps.
    delta : float
        Initial width of the Metropolis proposal.
    target_accept : float or None
        Acceptance targeted during burn-in (0.65 for HMC, 0.5 for
        Metropolis when None).
    track : sequence of int or None
        1-based latent indices to record; None records h_100 when the
        series is long enough.
    init_params : tuple
        Starting (mu, phi, sigma_eta2).
    random_state : int
        Seed of the chain.

    Attributes
    ----------
    chain_ : ChainResult
    params_ : SvParams
        Posterior means of (mu, phi, sigma_eta2).
    summary_ : dict
        :class:`~svhmc.diagnostics.SummaryStats` per recorded quantity
        (empty when fewer than 100 draws were recorded).
    h_mean_ : ndarray
        Posterior mean of every log-variance h_t.
    acceptance_ : float
        Post burn-in acceptance of the volatility update.
    """

    def __init__(self, algorithm="hmc", burn_in=10000, n_samples=200000, thin=1,
                 trajectory_length=1.0, n_steps=20, delta=0.5, target_accept=None,
                 track=None, init_params=(0.0, 0.5, 1.0), random_state=0):
        self.algorithm = algorithm
        self.burn_in = burn_in
        self.n_samples = n_samples
        self.thin = thin
        self.trajectory_length = trajectory_length
        self.n_steps = n_steps
        self.delta = delta
        self.target_accept = target_accept
        self.track = track
        self.init_params = init_params
        self.random_state = random_state

    def _chain_config(self, n: int) -> ChainConfig:
        track = self.track
        if track is None:
            track = (100,) if n >= 100 else ()
        hmc_kw, metro_kw = {}, {}
        if self.target_accept is not None:
            hmc_kw["target_acceptance"] = metro_kw["target_acceptance"] = self.target_accept
        return ChainConfig(
            algorithm=self.algorithm,
            burn_in=self.burn_in,
            n_record=self.n_samples,
            thin=self.thin,
            init_params=SvParams(*self.init_params),
            seed=self.random_state,
            hmc=HmcConfig(trajectory_length=self.trajectory_length, n_steps=self.n_steps, **hmc_kw),
            metro=MetroConfig(delta=self.delta, **metro_kw),
            tracked_latents=tuple(track),
        )

    def fit(self, X, y=None):
        """Sample the posterior given the return series ``X``."""
        returns = check_returns(X)
        if self.n_samples < 1:
            raise ValueError("n_samples must be positive")
        chain = run_chain(returns, self._chain_config(returns.size))
        self.chain_ = chain
        self.params_ = SvParams(float(chain.mu.mean()), float(chain.phi.mean()),
                                float(chain.sigma_eta2.mean()))
        self.summary_ = (
            {name: summarize(chain.series(name)) for name in chain.names} if len(chain) >= 100 else {}
        )
        self.h_mean_ = chain.h_mean
        self.acceptance_ = chain.volatility_acceptance
        self.n_obs_ = returns.size
        return self

    def volatility(self) -> np.ndarray:
        """exp(h_t / 2) at the posterior mean of each log-variance."""
        check_is_fitted(self, "h_mean_")
        return np.exp(0.5 * self.h_mean_)
