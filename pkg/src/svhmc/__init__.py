"""Bayesian inference of the stochastic volatility model by Hybrid Monte Carlo."""
from .data import (
    DataError,
    PriceSeries,
    SyntheticSpec,
    generate_sv_series,
    prices_to_returns,
    read_chain_csv,
    read_price_csv,
    write_chain_csv,
)
from .diagnostics import acf, jackknife_error, summarize, tau_int
from .estimator import StochasticVolatilityMCMC, check_returns
from .model import (
    ConditionalStats,
    DegenerateConditionalError,
    SvParams,
    conditional_stats,
    hamiltonian,
    volatility_gradient,
    volatility_potential,
)
from .rng import RngStream
from .samplers import (
    ChainConfig,
    ChainResult,
    ChainSample,
    DivergentTrajectoryError,
    HmcConfig,
    MetroConfig,
    draw_inverse_gamma,
    hmc_update_volatility,
    leapfrog_trajectory,
    metropolis_update_volatility,
    run_chain,
    tune_step_size,
    update_mu,
    update_phi,
    update_sigma_eta2,
)

__version__ = "0.1.0"
