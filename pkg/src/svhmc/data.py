"""Synthetic series, price-to-return transform and flat-file I/O."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numba
import numpy as np

from .model import SvParams
from .rng import RngStream

CHAIN_FIXED_COLUMNS = ("iteration", "phi", "mu", "sigma_eta2", "accept", "delta_h")


class DataError(ValueError):
    """Malformed or invalid input data."""


@dataclass(frozen=True)
class SyntheticSpec:
    params: SvParams
    n: int
    seed: int = 0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("n must be a positive integer")


@dataclass(frozen=True)
class PriceSeries:
    prices: np.ndarray
    dates: tuple | None = None

    def __post_init__(self):
        prices = np.asarray(self.prices, dtype=np.float64)
        if prices.ndim != 1 or prices.size < 2:
            raise DataError("a price series needs at least two prices")
        if not np.all(np.isfinite(prices)) or np.any(prices <= 0):
            raise DataError("prices must be finite and strictly positive")
        if self.dates is not None and len(self.dates) != prices.size:
            raise DataError("dates and prices differ in length")
        object.__setattr__(self, "prices", prices)

    def __len__(self):
        return self.prices.size


@numba.njit(cache=True)
def _ar1_path(mu, phi, h1, eta):
    n = eta.shape[0] + 1
    h = np.empty(n)
    h[0] = h1
    for t in range(1, n):
        h[t] = mu + phi * (h[t - 1] - mu) + eta[t - 1]
    return h


def generate_sv_series(spec: SyntheticSpec):
    """Simulate ``(y, h)`` from the SV model.

    h_1 comes from the stationary law N(mu, sigma_eta2 / (1 - phi**2)).
    Draw order from the seeded stream: n normals for the latent path
    (the first for h_1, the rest as innovations), then n normals for eps.
    """
    mu, phi, s2 = spec.params.as_tuple()
    rng = RngStream(spec.seed)
    z = rng.normal(spec.n)
    eps = rng.normal(spec.n)
    h1 = mu + math.sqrt(s2 / (1.0 - phi * phi)) * z[0]
    h = _ar1_path(mu, phi, h1, math.sqrt(s2) * z[1:])
    y = np.exp(0.5 * h) * eps
    return y, h


def prices_to_returns(prices) -> np.ndarray:
    """Percent log-returns with the mean log-return removed.

    r_i = 100 * (ln(p_i / p_{i-1}) - mean log-return); one value shorter
    than the input.
    """
    if not isinstance(prices, PriceSeries):
        prices = PriceSeries(prices)
    p = prices.prices
    s = np.log(p[1:] / p[:-1])
    return 100.0 * (s - s.mean())


def read_price_csv(path) -> PriceSeries:
    """Read a price file with a header and a ``close`` column.

    Accepted layouts are ``date,close`` and a single ``close`` column.
    Blank lines are skipped.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{path}: no such file")
    dates, prices = [], []
    with path.open(newline="", encoding="utf-8") as fh:
        rows = csv.reader(fh)
        header = None
        for lineno, row in enumerate(rows, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if header is None:
                header = [c.strip().lower() for c in row]
                if "close" not in header:
                    raise DataError(f"{path}:{lineno}: header must contain a 'close' column")
                if len(header) > 1 and header != ["date", "close"]:
                    raise DataError(f"{path}:{lineno}: expected columns 'date,close' or 'close'")
                col = header.index("close")
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                value = float(row[col])
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric close {row[col]!r}") from None
            if not math.isfinite(value) or value <= 0:
                raise DataError(f"{path}:{lineno}: close must be positive, got {row[col]!r}")
            prices.append(value)
            if len(header) == 2:
                dates.append(row[0].strip())
    if header is None or not prices:
        raise DataError(f"{path}: no price data")
    return PriceSeries(np.array(prices), tuple(dates) if dates else None)


def write_price_csv(prices: PriceSeries, path):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if prices.dates is not None:
            w.writerow(["date", "close"])
            w.writerows([d, repr(float(p))] for d, p in zip(prices.dates, prices.prices))
        else:
            w.writerow(["close"])
            w.writerows([repr(float(p))] for p in prices.prices)


def write_column_csv(values, path, name: str):
    """Single-column CSV with header ``name``, values in shortest round-trip form."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        fh.write(name + "\n")
        for v in np.asarray(values, dtype=np.float64):
            fh.write(repr(float(v)) + "\n")


def read_column_csv(path, name: str) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{path}: no such file")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [(i, r) for i, r in enumerate(csv.reader(fh), start=1) if r]
    if not rows or [c.strip() for c in rows[0][1]] != [name]:
        raise DataError(f"{path}: expected a single '{name}' column")
    out = []
    for lineno, row in rows[1:]:
        try:
            out.append(float(row[0]))
        except ValueError:
            raise DataError(f"{path}:{lineno}: non-numeric value {row[0]!r}") from None
    if not out:
        raise DataError(f"{path}: no data")
    values = np.array(out)
    if not np.all(np.isfinite(values)):
        raise DataError(f"{path}: non-finite values")
    return values


def _fmt(v) -> str:
    return format(float(v), ".17g")


def write_chain_csv(samples, path, tracked_latents=None):
    """Write recorded draws, one row each, at 17 significant digits.

    ``samples`` is a :class:`~svhmc.samplers.ChainResult` or any sequence of
    :class:`~svhmc.samplers.ChainSample`; in the latter case the 1-based
    ``tracked_latents`` labelling the h columns must be given.
    """
    if tracked_latents is None:
        tracked_latents = getattr(samples, "tracked_latents", None)
    if len(samples) == 0:
        raise ValueError("cannot write an empty chain")
    if tracked_latents is None:
        raise ValueError("tracked_latents is required for a plain sample sequence")
    header = list(CHAIN_FIXED_COLUMNS) + [f"h_{i}" for i in tracked_latents]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for s in samples:
            if len(s.tracked_h) != len(tracked_latents):
                raise ValueError("sample has the wrong number of tracked latents")
            row = [str(s.iteration), _fmt(s.params.phi), _fmt(s.params.mu),
                   _fmt(s.params.sigma_eta2), _fmt(s.acceptance), _fmt(s.delta_h)]
            row += [_fmt(v) for v in s.tracked_h]
            fh.write(",".join(row) + "\n")


def read_chain_csv(path) -> dict:
    """Read a chain CSV into an ordered ``{column: array}`` mapping."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{path}: no such file")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty chain file") from None
        if tuple(header[: len(CHAIN_FIXED_COLUMNS)]) != CHAIN_FIXED_COLUMNS or any(
            not c.startswith("h_") or not c[2:].isdigit() for c in header[len(CHAIN_FIXED_COLUMNS):]
        ):
            raise DataError(f"{path}:1: unexpected chain header {','.join(header)!r}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric field") from None
    if not rows:
        raise DataError(f"{path}: chain file has no samples")
    table = np.array(rows)
    out = {name: table[:, j] for j, name in enumerate(header)}
    out["iteration"] = out["iteration"].astype(np.int64)
    return out
