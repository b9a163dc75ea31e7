"""Probability structure of the standard stochastic volatility model.

    y_t = exp(h_t / 2) * eps_t,            eps_t ~ N(0, 1)
    h_t = mu + phi * (h_{t-1} - mu) + eta_t, eta_t ~ N(0, sigma_eta2)

The latent log-variances ``h`` are sampled from exp(-U(h)) where U is the
potential returned by :func:`volatility_potential`. Additive constants that
do not depend on ``h`` are dropped.

All kernels loop left to right so that results are bit-reproducible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np


@dataclass(frozen=True)
class SvParams:
    """Model parameters theta = (mu, phi, sigma_eta2)."""

    mu: float
    phi: float
    sigma_eta2: float

    def __post_init__(self):
        for name in ("mu", "phi", "sigma_eta2"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not abs(self.phi) < 1.0:
            raise ValueError(f"|phi| must be < 1, got {self.phi}")
        # zero is allowed so the generator can produce a constant path
        if self.sigma_eta2 < 0.0:
            raise ValueError(f"sigma_eta2 must be >= 0, got {self.sigma_eta2}")

    def as_tuple(self):
        return self.mu, self.phi, self.sigma_eta2


@dataclass(frozen=True)
class ConditionalStats:
    """Sufficient statistics of the parameter conditionals given h.

    ``a_stat`` scales the inverse-gamma draw of sigma_eta2, ``b_stat`` and
    ``c_stat`` give the Gaussian for mu (mean C/B), ``d_stat`` and ``e_stat``
    the Gaussian proposal for phi (mean E/D).
    """

    a_stat: float
    b_stat: float
    c_stat: float
    d_stat: float
    e_stat: float


class DegenerateConditionalError(ArithmeticError):
    """A parameter conditional is improper for the current latent state."""


# ---------------------------------------------------------------------------
# numba kernels; no validation, callers guarantee shapes and finiteness


@numba.njit(cache=True)
def _potential(h, y2, mu, phi, s2):
    n = h.shape[0]
    meas = 0.0
    for t in range(n):
        meas += 0.5 * h[t] + 0.5 * y2[t] * math.exp(-h[t])
    d = h[0] - mu
    chain = d * d * (1.0 - phi * phi)
    for t in range(1, n):
        r = h[t] - mu - phi * (h[t - 1] - mu)
        chain += r * r
    return meas + chain / (2.0 * s2)


@numba.njit(cache=True)
def _gradient(h, y2, mu, phi, s2, out):
    n = h.shape[0]
    inv = 1.0 / s2
    for t in range(n):
        out[t] = 0.5 - 0.5 * y2[t] * math.exp(-h[t])
    out[0] += (1.0 - phi * phi) * (h[0] - mu) * inv
    for t in range(1, n):
        r = (h[t] - mu - phi * (h[t - 1] - mu)) * inv
        out[t] += r
        out[t - 1] -= phi * r
    return out


@numba.njit(cache=True)
def _site_energy(x, t, h, y2, mu, phi, s2):
    # terms of the potential that involve h[t], evaluated at h[t] = x
    n = h.shape[0]
    e = 0.5 * x + 0.5 * y2[t] * math.exp(-x)
    c = 0.0
    if t == 0:
        d = x - mu
        c += d * d * (1.0 - phi * phi)
    else:
        r = x - mu - phi * (h[t - 1] - mu)
        c += r * r
    if t < n - 1:
        r = h[t + 1] - mu - phi * (x - mu)
        c += r * r
    return e + c / (2.0 * s2)


@numba.njit(cache=True)
def _stats(h, mu, phi):
    n = h.shape[0]
    d1 = h[0] - mu
    a = (1.0 - phi * phi) * d1 * d1
    c = (1.0 - phi * phi) * h[0]
    dd = -d1 * d1
    e = 0.0
    for t in range(1, n):
        r = h[t] - mu - phi * (h[t - 1] - mu)
        a += r * r
        c += (1.0 - phi) * (h[t] - phi * h[t - 1])
        prev = h[t - 1] - mu
        dd += prev * prev
        e += (h[t] - mu) * prev
    b = (1.0 - phi * phi) + (n - 1) * (1.0 - phi) ** 2
    return 0.5 * a, b, c, dd, e


# ---------------------------------------------------------------------------
# validated public API


def as_returns(y) -> np.ndarray:
    """Coerce ``y`` to a finite, non-empty 1-D float array."""
    y = np.ascontiguousarray(y, dtype=np.float64)
    if y.ndim != 1:
        raise ValueError(f"returns must be one-dimensional, got shape {y.shape}")
    if y.size == 0:
        raise ValueError("returns must contain at least one value")
    if not np.all(np.isfinite(y)):
        raise ValueError("returns contain non-finite values")
    return y


def _check_latent(h, n) -> np.ndarray:
    h = np.ascontiguousarray(h, dtype=np.float64)
    if h.shape != (n,):
        raise ValueError(f"latent state has shape {h.shape}, expected ({n},)")
    if not np.all(np.isfinite(h)):
        raise ValueError("latent state contains non-finite values")
    return h


def _check_positive_variance(params: SvParams):
    if not params.sigma_eta2 > 0.0:
        raise ValueError("sigma_eta2 must be > 0 for density evaluation")


def volatility_potential(params: SvParams, h, y) -> float:
    """Negative log density of the latent volatilities, up to a constant."""
    y = as_returns(y)
    h = _check_latent(h, y.size)
    _check_positive_variance(params)
    return float(_potential(h, y * y, params.mu, params.phi, params.sigma_eta2))


def volatility_gradient(params: SvParams, h, y) -> np.ndarray:
    """Analytic gradient of :func:`volatility_potential` with respect to h."""
    y = as_returns(y)
    h = _check_latent(h, y.size)
    _check_positive_variance(params)
    out = np.empty_like(h)
    return _gradient(h, y * y, params.mu, params.phi, params.sigma_eta2, out)


def hamiltonian(p, h, params: SvParams, y) -> float:
    """Kinetic energy ``sum(p**2)/2`` plus the volatility potential."""
    p = np.asarray(p, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    if p.shape != h.shape:
        raise ValueError(f"momenta shape {p.shape} does not match latent shape {h.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError("momenta contain non-finite values")
    kinetic = 0.0
    for v in p:
        kinetic += v * v
    return 0.5 * kinetic + volatility_potential(params, h, y)


def conditional_stats(params: SvParams, h) -> ConditionalStats:
    """Statistics A, B, C, D, E of the sigma_eta2, mu and phi conditionals.

    The sum in E runs over t = 2..n; there is no h_0.
    """
    h = np.ascontiguousarray(h, dtype=np.float64)
    if h.ndim != 1 or h.size < 2:
        raise ValueError("conditional statistics need at least two latent values")
    if not np.all(np.isfinite(h)):
        raise ValueError("latent state contains non-finite values")
    return ConditionalStats(*_stats(h, params.mu, params.phi))
