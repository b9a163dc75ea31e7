"""Autocorrelation and error analysis of MCMC output series."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal

WINDOW_FACTOR = 6.0
TAU_JACKKNIFE_BINS = 20


@dataclass(frozen=True)
class AcfCurve:
    lags: np.ndarray
    values: np.ndarray
    window: int | None = None


@dataclass(frozen=True)
class TauIntEstimate:
    tau: float
    error: float
    window: int
    truncated: bool = False


@dataclass(frozen=True)
class SummaryStats:
    """Posterior summary of one chain quantity.

    ``se`` is the autocorrelation-corrected error of the mean,
    ``sd * sqrt(two_tau / n)``.
    """

    mean: float
    sd: float
    se: float
    two_tau: float
    two_tau_error: float
    n: int
    se_jackknife: float = float("nan")
    degenerate: bool = False
    truncated: bool = False


def _as_series(values, min_len: int = 2) -> np.ndarray:
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"series must be one-dimensional, got shape {x.shape}")
    if x.size < min_len:
        raise ValueError(f"series needs at least {min_len} values, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValueError("series contains non-finite values")
    return x


def _autocov_sums(d: np.ndarray, max_lag: int) -> np.ndarray:
    # s[t] = sum_j d[j] * d[j + t] for t = 0..max_lag
    n = d.size
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(d, size)
    return np.fft.irfft(f * np.conj(f), size)[: max_lag + 1]


def acf(values, max_lag: int) -> AcfCurve:
    """Autocorrelation function for lags 0..max_lag.

    Lag-t products are averaged over the N - t available pairs and divided
    by the full-series variance (1/N normalisation).
    """
    x = _as_series(values)
    n = x.size
    if not 1 <= max_lag < n:
        raise ValueError(f"max_lag must lie in [1, {n - 1}], got {max_lag}")
    d = x - x.mean()
    var = np.dot(d, d) / n
    if not var > 0:
        raise ValueError("series has zero variance")
    sums = _autocov_sums(d, max_lag)
    lags = np.arange(max_lag + 1)
    values = sums / (n - lags) / var
    values[0] = 1.0
    return AcfCurve(lags=lags, values=values)


def _positive_run(rho: np.ndarray, cap: int) -> int:
    # last lag of the initial run of positive pair sums rho(2k) + rho(2k+1)
    pairs = rho[0 : cap - cap % 2 : 2] + rho[1 : cap + 1 - cap % 2 : 2]
    stop = np.flatnonzero(pairs <= 0)
    return cap if stop.size == 0 else max(2 * int(stop[0]) - 1, 1)


def _window(rho: np.ndarray, cap: int):
    start = min(_positive_run(rho, cap), cap)
    tau = 0.5 + float(np.sum(rho[1:start]))
    for w in range(start, cap + 1):
        tau += rho[w]
        if w >= WINDOW_FACTOR * tau:
            return w, tau, False
    return cap, tau, True


def tau_int(values, n_bins: int = TAU_JACKKNIFE_BINS) -> TauIntEstimate:
    """Integrated autocorrelation time with a self-consistent window.

    The window W is the smallest lag with W >= 6 * tau(W) that does not
    cut into the initial run of positive pair sums rho(2k) + rho(2k+1);
    without that floor a small, slowly decaying component (an ACF that
    starts at a few percent and stays there) would close the window at
    once. W is capped at N/10 (``truncated`` is set when the cap is hit). The error comes from a
    leave-one-bin-out jackknife of the windowed estimator: the lagged
    products whose first index falls in the dropped bin are removed.
    """
    x = _as_series(values, min_len=100)
    n = x.size
    cap = n // 10
    curve = acf(x, cap)
    w, tau, truncated = _window(curve.values, cap)

    d = x - x.mean()
    padded = np.concatenate([d, np.zeros(w)])
    edges = np.linspace(0, n, n_bins + 1).astype(int)
    lags = np.arange(w + 1)
    total = np.zeros(w + 1)
    parts = []
    for a, b in zip(edges[:-1], edges[1:]):
        part = signal.correlate(padded[a : b + w], d[a:b], mode="valid", method="fft")
        counts = np.clip(np.minimum(b, n - lags) - a, 0, None)
        parts.append((part, counts))
        total += part
    taus = np.empty(n_bins)
    for k, (part, counts) in enumerate(parts):
        cov = (total - part) / (n - lags - counts)
        taus[k] = 0.5 + np.sum(cov[1:] / cov[0])
    err = math.sqrt((n_bins - 1) / n_bins * np.sum((taus - taus.mean()) ** 2))
    return TauIntEstimate(tau=float(max(tau, 0.5)), error=err, window=w, truncated=truncated)


def jackknife_error(values, bin_size: int) -> float:
    """Jackknife error of the mean from leave-one-bin-out averages."""
    x = _as_series(values, min_len=1)
    if bin_size < 1:
        raise ValueError("bin_size must be positive")
    m = x.size // bin_size
    if m < 2:
        raise ValueError(f"need at least 2 bins, got {m}")
    bins = x[: m * bin_size].reshape(m, bin_size).mean(axis=1)
    loo = (bins.sum() - bins) / (m - 1)
    return float(math.sqrt((m - 1) / m * np.sum((loo - loo.mean()) ** 2)))


def default_bin_size(tau: float) -> int:
    return max(100, 4 * math.ceil(tau))


def summarize(values) -> SummaryStats:
    """Mean, standard deviation, error of the mean and 2 * tau_int."""
    x = _as_series(values, min_len=100)
    n = x.size
    mean = float(x.mean())
    sd = float(x.std(ddof=1))
    if not sd > 0 or np.all(x == x[0]):
        return SummaryStats(mean=mean, sd=0.0, se=0.0, two_tau=float("nan"),
                            two_tau_error=float("nan"), n=n, se_jackknife=0.0, degenerate=True)
    est = tau_int(x)
    two_tau = 2.0 * est.tau
    bin_size = default_bin_size(est.tau)
    se_jk = jackknife_error(x, bin_size) if n // bin_size >= 2 else float("nan")
    return SummaryStats(
        mean=mean,
        sd=sd,
        se=sd * math.sqrt(two_tau / n),
        two_tau=two_tau,
        two_tau_error=2.0 * est.error,
        n=n,
        se_jackknife=se_jk,
        truncated=est.truncated,
    )
