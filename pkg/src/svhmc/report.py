"""Per-quantity summaries of chain files, as text tables and CSV."""
from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .diagnostics import SummaryStats, acf, summarize

SUMMARY_FIELDS = ("quantity", "mean", "sd", "se", "two_tau", "two_tau_error",
                  "se_jackknife", "n", "degenerate", "truncated")


def chain_quantities(columns: dict) -> list:
    """Names of the reportable series in a chain table, in file order."""
    return [k for k in columns if k in ("phi", "mu", "sigma_eta2") or k.startswith("h_")]


def summarize_chain(columns: dict) -> dict:
    return {name: summarize(columns[name]) for name in chain_quantities(columns)}


def acf_table(columns: dict, max_lag: int) -> dict:
    """ACF curves up to ``max_lag``; constant series give all-NaN curves."""
    out = {}
    for name in chain_quantities(columns):
        x = np.asarray(columns[name])
        lag = min(max_lag, x.size - 1)
        try:
            vals = acf(x, lag).values
        except ValueError:
            vals = np.full(lag + 1, np.nan)
        out[name] = vals
    return out


def _g(v, digits=6) -> str:
    if isinstance(v, float) and math.isnan(v):
        return "nan"
    return format(v, f".{digits}g")


def _tau_cell(s: SummaryStats) -> str:
    if s.degenerate:
        return "degenerate"
    cell = f"{_g(s.two_tau, 4)}({_g(s.two_tau_error, 2)})"
    return cell + "*" if s.truncated else cell


def format_table(stats: dict, title: str = "") -> str:
    """Rows estimate/SD/SE/2tau_int, one column per quantity."""
    names = list(stats)
    rows = [
        ("estimate", lambda s: _g(s.mean)),
        ("SD", lambda s: _g(s.sd, 3)),
        ("SE", lambda s: _g(s.se, 3)),
        ("SE(jk)", lambda s: _g(s.se_jackknife, 3)),
        ("2tau_int", _tau_cell),
    ]
    cells = [[cell(stats[n]) for n in names] for _, cell in rows]
    width = max([12] + [len(n) + 2 for n in names] + [len(c) + 2 for r in cells for c in r])
    lines = [title] if title else []
    lines.append(f"{'':<10}" + "".join(f"{n:>{width}}" for n in names))
    for (label, _), row in zip(rows, cells):
        lines.append(f"{label:<10}" + "".join(f"{c:>{width}}" for c in row))
    notes = []
    if any(s.degenerate for s in stats.values()):
        notes.append("degenerate: zero-variance series, SD = SE = 0")
    if any(s.truncated for s in stats.values()):
        notes.append("*: autocorrelation window hit the N/10 cap")
    lines.extend(notes)
    return "\n".join(lines) + "\n"


def format_comparison(a: dict, b: dict, labels=("A", "B")) -> str:
    """Side-by-side means and 2tau_int with the ratio 2tau(A)/2tau(B)."""
    names = [n for n in a if n in b]
    la, lb = labels
    head = (f"{'quantity':<12}{'mean ' + la:>14}{'mean ' + lb:>14}"
            f"{'2tau ' + la:>14}{'2tau ' + lb:>14}{'ratio':>10}")
    lines = [head]
    for n in names:
        ratio = a[n].two_tau / b[n].two_tau
        lines.append(f"{n:<12}{_g(a[n].mean):>14}{_g(b[n].mean):>14}"
                     f"{_g(a[n].two_tau, 4):>14}{_g(b[n].two_tau, 4):>14}{_g(ratio, 3):>10}")
    return "\n".join(lines) + "\n"


def write_summary_csv(stats: dict, path):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_FIELDS)
        for name, s in stats.items():
            w.writerow([name, _g(s.mean, 17), _g(s.sd, 17), _g(s.se, 17), _g(s.two_tau, 17),
                        _g(s.two_tau_error, 17), _g(s.se_jackknife, 17), s.n,
                        int(s.degenerate), int(s.truncated)])


def write_acf_csv(curves: dict, path):
    names = list(curves)
    n_lags = max(len(v) for v in curves.values())
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["lag"] + names)
        for t in range(n_lags):
            w.writerow([t] + [_g(float(curves[n][t]), 17) if t < len(curves[n]) else ""
                              for n in names])


def write_comparison_csv(a: dict, b: dict, path, labels=("A", "B")):
    la, lb = labels
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["quantity", f"mean_{la}", f"mean_{lb}", f"two_tau_{la}",
                    f"two_tau_{lb}", "two_tau_ratio"])
        for n in a:
            if n in b:
                w.writerow([n, _g(a[n].mean, 17), _g(b[n].mean, 17), _g(a[n].two_tau, 17),
                            _g(b[n].two_tau, 17), _g(a[n].two_tau / b[n].two_tau, 17)])
