"""MCMC updates for the stochastic volatility model.

One chain iteration updates the latent volatilities (a Hybrid Monte Carlo
trajectory or a sweep of local Metropolis moves) and then draws, in order,
sigma_eta2 from its inverse-gamma conditional, mu from its Gaussian
conditional and phi by Metropolis-Hastings with a Gaussian proposal.
"""
from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field, replace

import numba
import numpy as np

from .model import (
    DegenerateConditionalError,
    SvParams,
    _check_latent,
    _gradient,
    _potential,
    _site_energy,
    as_returns,
    conditional_stats,
)
from .rng import RngStream

logger = logging.getLogger(__name__)

ALGORITHMS = ("hmc", "metropolis")

TUNE_INTERVAL = 100
TUNE_RATE = 1.0
TUNE_MIN, TUNE_MAX = 1e-6, 1e2


class DivergentTrajectoryError(FloatingPointError):
    """The leapfrog integration produced non-finite values."""


@dataclass(frozen=True)
class HmcConfig:
    """Leapfrog settings; ``step_size * n_steps`` equals ``trajectory_length``."""

    trajectory_length: float = 1.0
    n_steps: int = 20
    step_size: float | None = None
    target_acceptance: float = 0.65

    def __post_init__(self):
        if not self.trajectory_length > 0:
            raise ValueError("trajectory_length must be positive")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ValueError("n_steps must be a positive integer")
        if self.step_size is None:
            object.__setattr__(self, "step_size", self.trajectory_length / self.n_steps)
        if not self.step_size > 0:
            raise ValueError("step_size must be positive")
        mismatch = abs(self.step_size * self.n_steps - self.trajectory_length)
        if mismatch > 1e-12 * max(1.0, self.trajectory_length):
            raise ValueError("step_size * n_steps must equal trajectory_length")
        if not 0.0 < self.target_acceptance < 1.0:
            raise ValueError("target_acceptance must lie in (0, 1)")


@dataclass(frozen=True)
class MetroConfig:
    """Proposal width ``delta`` of the local move h + delta * (r - 0.5)."""

    delta: float = 0.5
    target_acceptance: float = 0.5

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if not 0.0 < self.target_acceptance < 1.0:
            raise ValueError("target_acceptance must lie in (0, 1)")


@dataclass(frozen=True)
class ChainConfig:
    algorithm: str = "hmc"
    burn_in: int = 10000
    n_record: int = 200000
    thin: int = 1
    init_params: SvParams = field(default_factory=lambda: SvParams(mu=0.0, phi=0.5, sigma_eta2=1.0))
    seed: int = 0
    hmc: HmcConfig = field(default_factory=HmcConfig)
    metro: MetroConfig = field(default_factory=MetroConfig)
    tracked_latents: tuple = (100,)
    log_every: int = 0

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.burn_in < 0:
            raise ValueError("burn_in must be non-negative")
        if self.n_record < 0:
            raise ValueError("n_record must be non-negative")
        if self.thin < 1:
            raise ValueError("thin must be positive")
        if not self.init_params.sigma_eta2 > 0:
            raise ValueError("initial sigma_eta2 must be positive")
        object.__setattr__(self, "tracked_latents", tuple(int(i) for i in self.tracked_latents))


@dataclass(frozen=True)
class ChainSample:
    """One recorded draw.

    ``acceptance`` is 1.0 or 0.0 for an HMC trajectory and the fraction of
    accepted sites for a Metropolis sweep.
    """

    iteration: int
    params: SvParams
    tracked_h: tuple
    acceptance: float
    delta_h: float

    @property
    def accept_flag_volatility(self) -> bool:
        return self.acceptance > 0.0


# ---------------------------------------------------------------------------
# parameter conditionals


def draw_inverse_gamma(shape: float, scale: float, rng: RngStream) -> float:
    """Draw from the density proportional to x**(-shape-1) * exp(-scale/x)."""
    if not shape > 0 or not scale > 0:
        raise ValueError(f"inverse gamma needs positive shape and scale, got {shape}, {scale}")
    x = scale / rng.gamma(shape)
    if not math.isfinite(x):
        raise DegenerateConditionalError("inverse gamma draw overflowed")
    return float(x)


def update_sigma_eta2(params: SvParams, h, rng: RngStream) -> SvParams:
    h = np.asarray(h, dtype=np.float64)
    stats = conditional_stats(params, h)
    if not stats.a_stat > 0:
        raise DegenerateConditionalError("A = 0: every latent value sits on the mean")
    return replace(params, sigma_eta2=draw_inverse_gamma(0.5 * h.size, stats.a_stat, rng))


def update_mu(params: SvParams, h, rng: RngStream) -> SvParams:
    stats = conditional_stats(params, h)
    b = stats.b_stat
    if not b > 0:
        raise DegenerateConditionalError(f"B = {b} is not positive")
    mu = stats.c_stat / b + math.sqrt(params.sigma_eta2 / b) * rng.normal()
    return replace(params, mu=float(mu))


def phi_acceptance_probability(phi_old: float, phi_new: float) -> float:
    """Metropolis-Hastings correction for the Gaussian phi proposal."""
    if abs(phi_new) >= 1.0:
        return 0.0
    return min(math.sqrt((1.0 - phi_new**2) / (1.0 - phi_old**2)), 1.0)


def update_phi(params: SvParams, h, rng: RngStream):
    """Metropolis-Hastings update of phi.

    Returns ``(params, accepted)``. Raises DegenerateConditionalError when
    D <= 0, since the proposal variance sigma_eta2 / D is then undefined;
    :func:`run_chain` skips the update and counts the event.
    """
    stats = conditional_stats(params, h)
    d = stats.d_stat
    if not d > 0:
        raise DegenerateConditionalError(f"D = {d} is not positive")
    phi_new = stats.e_stat / d + math.sqrt(params.sigma_eta2 / d) * rng.normal()
    if abs(phi_new) >= 1.0:
        return params, False
    if rng.uniform() < phi_acceptance_probability(params.phi, phi_new):
        return replace(params, phi=float(phi_new)), True
    return params, False


# ---------------------------------------------------------------------------
# volatility updates


@numba.njit(cache=True)
def _kinetic(p):
    k = 0.0
    for i in range(p.shape[0]):
        k += p[i] * p[i]
    return 0.5 * k


@numba.njit(cache=True)
def _leapfrog_kernel(h, p, y2, mu, phi, s2, dt, nsteps):
    h = h.copy()
    p = p.copy()
    g = np.empty_like(h)
    n = h.shape[0]
    half = 0.5 * dt
    for _ in range(nsteps):
        for i in range(n):
            h[i] += half * p[i]
        _gradient(h, y2, mu, phi, s2, g)
        for i in range(n):
            p[i] -= dt * g[i]
        for i in range(n):
            h[i] += half * p[i]
    return h, p


@numba.njit(cache=True)
def _hmc_kernel(h, p, y2, mu, phi, s2, dt, nsteps):
    h0 = _kinetic(p) + _potential(h, y2, mu, phi, s2)
    h1, p1 = _leapfrog_kernel(h, p, y2, mu, phi, s2, dt, nsteps)
    for i in range(h1.shape[0]):
        if not (math.isfinite(h1[i]) and math.isfinite(p1[i])):
            return h1, math.inf
    dh = _kinetic(p1) + _potential(h1, y2, mu, phi, s2) - h0
    if not math.isfinite(dh):
        dh = math.inf
    return h1, dh


@numba.njit(cache=True)
def _metropolis_kernel(h, y2, mu, phi, s2, delta, r, u):
    h = h.copy()
    n = h.shape[0]
    accepted = 0
    for t in range(n):
        x_old = h[t]
        x_new = x_old + delta * (r[t] - 0.5)
        du = _site_energy(x_new, t, h, y2, mu, phi, s2) - _site_energy(x_old, t, h, y2, mu, phi, s2)
        if du <= 0.0 or u[t] < math.exp(-du):
            h[t] = x_new
            accepted += 1
    return h, accepted / n


def leapfrog(h, p, grad, step_size: float, n_steps: int):
    """Generic leapfrog integrator for any gradient callable ``grad(h)``.

    Hook for alternative targets and integrators; the sampler itself uses
    the compiled kernel behind :func:`leapfrog_trajectory`.
    """
    h = np.array(h, dtype=np.float64)
    p = np.array(p, dtype=np.float64)
    half = 0.5 * step_size
    for _ in range(n_steps):
        h += half * p
        p -= step_size * np.asarray(grad(h))
        h += half * p
    if not (np.all(np.isfinite(h)) and np.all(np.isfinite(p))):
        raise DivergentTrajectoryError("non-finite values in leapfrog trajectory")
    return h, p


def leapfrog_trajectory(h, p, params: SvParams, y, cfg: HmcConfig):
    """Integrate ``cfg.n_steps`` leapfrog steps of the volatility dynamics."""
    y = as_returns(y)
    h = _check_latent(h, y.size)
    p = _check_latent(p, y.size)
    h1, p1 = _leapfrog_kernel(h, p, y * y, params.mu, params.phi, params.sigma_eta2,
                              cfg.step_size, cfg.n_steps)
    if not (np.all(np.isfinite(h1)) and np.all(np.isfinite(p1))):
        raise DivergentTrajectoryError("non-finite values in leapfrog trajectory")
    return h1, p1


def _hmc_step(h, y2, params, cfg, rng):
    p = rng.normal(h.size)
    h1, dh = _hmc_kernel(h, p, y2, params.mu, params.phi, params.sigma_eta2,
                         cfg.step_size, cfg.n_steps)
    u = rng.uniform()
    if dh <= 0.0 or u < math.exp(-dh):
        return h1, True, dh
    return h, False, dh


def hmc_update_volatility(h, params: SvParams, y, cfg: HmcConfig, rng: RngStream):
    """One HMC proposal for all volatilities with fresh Gaussian momenta.

    Returns ``(h, accepted, delta_h)``; a divergent trajectory is rejected
    and reports ``delta_h = inf``.
    """
    y = as_returns(y)
    h = _check_latent(h, y.size)
    return _hmc_step(h, y * y, params, cfg, rng)


def _metropolis_step(h, y2, params, cfg, rng):
    r = rng.uniform(h.size)
    u = rng.uniform(h.size)
    return _metropolis_kernel(h, y2, params.mu, params.phi, params.sigma_eta2, cfg.delta, r, u)


def metropolis_update_volatility(h, params: SvParams, y, cfg: MetroConfig, rng: RngStream):
    """Sweep t = 1..n with local uniform proposals.

    Returns ``(h, sweep_acceptance)``.
    """
    y = as_returns(y)
    h = _check_latent(h, y.size)
    return _metropolis_step(h, y * y, params, cfg, rng)


def tune_step_size(cfg, recent_acceptance: float):
    """Scale the step (HMC) or proposal width (Metropolis) towards the target.

    The HMC step is snapped to ``trajectory_length / n_steps`` after the
    update so the trajectory length is preserved exactly.
    """
    factor = math.exp(TUNE_RATE * (recent_acceptance - cfg.target_acceptance))
    if isinstance(cfg, HmcConfig):
        dt = min(max(cfg.step_size * factor, TUNE_MIN), TUNE_MAX)
        n_steps = max(1, round(cfg.trajectory_length / dt))
        return replace(cfg, n_steps=n_steps, step_size=cfg.trajectory_length / n_steps)
    if isinstance(cfg, MetroConfig):
        return replace(cfg, delta=min(max(cfg.delta * factor, TUNE_MIN), TUNE_MAX))
    raise TypeError(f"cannot tune {type(cfg).__name__}")


# ---------------------------------------------------------------------------
# chain orchestration


def initial_latents(y) -> np.ndarray:
    """Start h at the measurement-implied value log(y**2), floored at log(1e-8)."""
    y = np.asarray(y, dtype=np.float64)
    return np.log(np.maximum(y * y, 1e-8))


class ChainResult(Sequence):
    """Recorded draws of a chain, stored column-wise.

    Indexing yields :class:`ChainSample` objects; :meth:`series` returns a
    whole column as an array.
    """

    def __init__(self, iteration, mu, phi, sigma_eta2, acceptance, delta_h, tracked_h,
                 tracked_latents, *, config, hmc, metro, h_mean, volatility_acceptance,
                 phi_acceptance, phi_skipped):
        self.iteration = iteration
        self.mu = mu
        self.phi = phi
        self.sigma_eta2 = sigma_eta2
        self.acceptance = acceptance
        self.delta_h = delta_h
        self.tracked_h = tracked_h
        self.tracked_latents = tuple(tracked_latents)
        self.config = config
        # tuned settings in force after burn-in
        self.hmc = hmc
        self.metro = metro
        self.h_mean = h_mean
        self.volatility_acceptance = volatility_acceptance
        self.phi_acceptance = phi_acceptance
        self.phi_skipped = phi_skipped

    def __len__(self):
        return self.iteration.size

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        if i < 0:
            i += len(self)
        if not 0 <= i < len(self):
            raise IndexError("chain index out of range")
        return ChainSample(
            iteration=int(self.iteration[i]),
            params=SvParams(float(self.mu[i]), float(self.phi[i]), float(self.sigma_eta2[i])),
            tracked_h=tuple(float(v) for v in self.tracked_h[i]),
            acceptance=float(self.acceptance[i]),
            delta_h=float(self.delta_h[i]),
        )

    @property
    def names(self):
        return ["phi", "mu", "sigma_eta2"] + [f"h_{i}" for i in self.tracked_latents]

    def series(self, name: str) -> np.ndarray:
        if name in ("phi", "mu", "sigma_eta2"):
            return getattr(self, name)
        if name.startswith("h_"):
            idx = int(name[2:])
            if idx in self.tracked_latents:
                return self.tracked_h[:, self.tracked_latents.index(idx)]
        raise KeyError(name)


def run_chain(y, cfg: ChainConfig) -> ChainResult:
    """Run burn-in (with step tuning) followed by the recorded iterations."""
    y = as_returns(y)
    n = y.size
    for idx in cfg.tracked_latents:
        if not 1 <= idx <= n:
            raise ValueError(f"tracked latent index {idx} outside [1, {n}]")
    y2 = y * y
    rng = RngStream(cfg.seed)
    h = initial_latents(y)
    params = cfg.init_params
    hmc, metro = cfg.hmc, cfg.metro
    use_hmc = cfg.algorithm == "hmc"
    cols = [i - 1 for i in cfg.tracked_latents]

    n_rec = cfg.n_record
    iteration = np.empty(n_rec, dtype=np.int64)
    mu_s, phi_s, s2_s = np.empty(n_rec), np.empty(n_rec), np.empty(n_rec)
    acc_s, dh_s = np.empty(n_rec), np.empty(n_rec)
    tracked = np.empty((n_rec, len(cols)))
    h_sum = np.zeros(n)

    window = 0.0
    total = cfg.burn_in + n_rec * cfg.thin
    rec = 0
    acc_sum = phi_acc = phi_tries = phi_skipped = 0
    for it in range(1, total + 1):
        if use_hmc:
            h, accepted, dh = _hmc_step(h, y2, params, hmc, rng)
            acc = 1.0 if accepted else 0.0
        else:
            h, acc = _metropolis_step(h, y2, params, metro, rng)
            dh = 0.0

        try:
            params = update_sigma_eta2(params, h, rng)
            params = update_mu(params, h, rng)
        except DegenerateConditionalError as exc:
            raise DegenerateConditionalError(f"iteration {it}: {exc}") from exc
        try:
            params, phi_ok = update_phi(params, h, rng)
        except DegenerateConditionalError:
            phi_skipped += 1
        else:
            phi_tries += 1
            phi_acc += phi_ok

        if it <= cfg.burn_in:
            window += acc
            if it % TUNE_INTERVAL == 0:
                rate = window / TUNE_INTERVAL
                if use_hmc:
                    hmc = tune_step_size(hmc, rate)
                else:
                    metro = tune_step_size(metro, rate)
                window = 0.0
        else:
            acc_sum += acc
            if (it - cfg.burn_in) % cfg.thin == 0:
                iteration[rec] = it
                mu_s[rec], phi_s[rec], s2_s[rec] = params.as_tuple()
                acc_s[rec], dh_s[rec] = acc, dh
                tracked[rec] = h[cols]
                h_sum += h
                rec += 1

        if cfg.log_every and it % cfg.log_every == 0:
            logger.info("iteration %d/%d  acceptance %.3f  phi %.4f  mu %.4f  sigma_eta2 %.4f",
                        it, total, acc, params.phi, params.mu, params.sigma_eta2)

    n_after = total - cfg.burn_in
    return ChainResult(
        iteration, mu_s, phi_s, s2_s, acc_s, dh_s, tracked, cfg.tracked_latents,
        config=cfg, hmc=hmc, metro=metro,
        h_mean=h_sum / rec if rec else np.full(n, np.nan),
        volatility_acceptance=acc_sum / n_after if n_after else float("nan"),
        phi_acceptance=phi_acc / phi_tries if phi_tries else float("nan"),
        phi_skipped=phi_skipped,
    )
