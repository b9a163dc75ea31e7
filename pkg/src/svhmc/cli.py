"""Command-line front end: ``svhmc synth | fit | report``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical degeneracy.
"""
from __future__ import annotations

import argparse
import hashlib
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import data, report
from .model import DegenerateConditionalError, SvParams
from .samplers import ChainConfig, HmcConfig, MetroConfig, run_chain

logger = logging.getLogger("svhmc")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_DEGENERATE = 0, 1, 2, 3

PRESETS = {
    "full": {"burn_in": 10000, "samples": 200000},
    "quick": {"burn_in": 2000, "samples": 20000},
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class ExperimentConfig:
    command: str
    chain: ChainConfig | None = None
    data_path: Path | None = None
    returns_path: Path | None = None
    synthetic: data.SyntheticSpec | None = None
    first: int | None = None
    output_dir: Path = Path(".")
    max_lag: int = 200
    chains: int = 1


def _track(text: str) -> tuple:
    try:
        idx = tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid latent index list {text!r}") from None
    if any(i < 1 for i in idx):
        raise argparse.ArgumentTypeError("latent indices are 1-based")
    return idx


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="svhmc", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def truth(p):
        p.add_argument("--phi", type=float, default=0.97)
        p.add_argument("--mu", type=float, default=-1.0)
        p.add_argument("--sigma-eta2", type=float, default=0.05)

    p = sub.add_parser("synth", help="simulate an SV return series")
    truth(p)
    p.add_argument("--t", type=int, required=True, help="series length")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("fit", help="sample the posterior of a return series")
    src = p.add_argument_group("data source (exactly one)")
    src.add_argument("--data", type=Path, help="price CSV (date,close or close)")
    src.add_argument("--returns", type=Path, help="returns CSV written by synth")
    src.add_argument("--t", type=int, help="simulate a series of this length")
    truth(p)
    p.add_argument("--data-seed", type=int, default=1, help="seed of the simulated series")
    p.add_argument("--first", type=int, help="use only the first K returns")
    p.add_argument("--algorithm", choices=("hmc", "metropolis"), default="hmc")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--preset", choices=sorted(PRESETS), default="full")
    p.add_argument("--burn-in", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--thin", type=int, default=1)
    p.add_argument("--trajectory-length", type=float, default=1.0)
    p.add_argument("--n-steps", type=int, default=20, help="initial leapfrog steps")
    p.add_argument("--delta", type=float, default=0.5, help="initial Metropolis width")
    p.add_argument("--target-accept", type=float,
                   help="target acceptance (default 0.65 for hmc, 0.5 for metropolis)")
    p.add_argument("--track", type=_track, default=(100,),
                   help="comma-separated 1-based latent indices to record")
    p.add_argument("--chains", type=int, default=1)
    p.add_argument("--log-every", type=int, default=10000)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("report", help="summarise one chain or compare two")
    p.add_argument("chains", nargs="+", type=Path)
    p.add_argument("--labels", help="comma-separated labels for two chains")
    p.add_argument("--max-lag", type=int, default=200)
    p.add_argument("--out", type=Path, required=True)
    return parser


def _fit_config(args) -> ExperimentConfig:
    sources = [s for s in (args.data, args.returns, args.t) if s is not None]
    if len(sources) != 1:
        raise UsageError("fit needs exactly one of --data, --returns, --t")
    if args.chains < 1:
        raise UsageError("--chains must be positive")
    preset = PRESETS[args.preset]
    burn_in = preset["burn_in"] if args.burn_in is None else args.burn_in
    samples = preset["samples"] if args.samples is None else args.samples
    try:
        synthetic = None
        if args.t is not None:
            synthetic = data.SyntheticSpec(SvParams(args.mu, args.phi, args.sigma_eta2),
                                           args.t, args.data_seed)
        chain = ChainConfig(
            algorithm=args.algorithm,
            burn_in=burn_in,
            n_record=samples,
            thin=args.thin,
            seed=args.seed,
            hmc=HmcConfig(trajectory_length=args.trajectory_length, n_steps=args.n_steps,
                          target_acceptance=args.target_accept or 0.65),
            metro=MetroConfig(delta=args.delta, target_acceptance=args.target_accept or 0.5),
            tracked_latents=args.track,
            log_every=args.log_every if args.verbose else 0,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return ExperimentConfig(command="fit", chain=chain, data_path=args.data,
                            returns_path=args.returns, synthetic=synthetic, first=args.first,
                            output_dir=args.out, chains=args.chains)


def load_returns(cfg: ExperimentConfig) -> np.ndarray:
    if cfg.data_path is not None:
        y = data.prices_to_returns(data.read_price_csv(cfg.data_path))
    elif cfg.returns_path is not None:
        y = data.read_column_csv(cfg.returns_path, "y")
    else:
        y, _ = data.generate_sv_series(cfg.synthetic)
    if cfg.first is not None:
        if not 1 <= cfg.first <= y.size:
            raise data.DataError(f"--first {cfg.first} outside [1, {y.size}]")
        y = y[: cfg.first]
    return y


def cmd_synth(args) -> int:
    try:
        spec = data.SyntheticSpec(SvParams(args.mu, args.phi, args.sigma_eta2), args.t, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    args.out.mkdir(parents=True, exist_ok=True)
    y, h = data.generate_sv_series(spec)
    data.write_column_csv(y, args.out / "returns.csv", "y")
    data.write_column_csv(h, args.out / "latent.csv", "h")
    print(f"synth mu={spec.params.mu!r} phi={spec.params.phi!r} "
          f"sigma_eta2={spec.params.sigma_eta2!r} n={spec.n} seed={spec.seed}")
    return EXIT_OK


def _run_one(y, chain):
    start = time.perf_counter()
    result = run_chain(y, chain)
    return result, time.perf_counter() - start


def _manifest(result, chain, y, checksum, wall) -> str:
    items = [
        ("algorithm", chain.algorithm),
        ("seed", chain.seed),
        ("n", y.size),
        ("data_sha256", checksum),
        ("burn_in", chain.burn_in),
        ("samples", chain.n_record),
        ("thin", chain.thin),
        ("init_mu", repr(chain.init_params.mu)),
        ("init_phi", repr(chain.init_params.phi)),
        ("init_sigma_eta2", repr(chain.init_params.sigma_eta2)),
        ("tracked", ",".join(str(i) for i in chain.tracked_latents)),
    ]
    if chain.algorithm == "hmc":
        items += [
            ("trajectory_length", repr(result.hmc.trajectory_length)),
            ("n_steps", result.hmc.n_steps),
            ("step_size", repr(result.hmc.step_size)),
            ("target_acceptance", repr(result.hmc.target_acceptance)),
        ]
    else:
        items += [
            ("delta", repr(result.metro.delta)),
            ("target_acceptance", repr(result.metro.target_acceptance)),
        ]
    items += [
        ("acceptance", repr(result.volatility_acceptance)),
        ("phi_acceptance", repr(result.phi_acceptance)),
        ("phi_skipped", result.phi_skipped),
        ("wall_time_s", f"{wall:.3f}"),
    ]
    return "".join(f"{k}={v}\n" for k, v in items)


def cmd_fit(cfg: ExperimentConfig) -> int:
    y = load_returns(cfg)
    for idx in cfg.chain.tracked_latents:
        if idx > y.size:
            raise UsageError(f"--track index {idx} exceeds series length {y.size}")
    checksum = hashlib.sha256(np.ascontiguousarray(y).tobytes()).hexdigest()
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    chains = [cfg.chain] if cfg.chains == 1 else [
        replace(cfg.chain, seed=cfg.chain.seed + i) for i in range(cfg.chains)
    ]
    if len(chains) == 1:
        outcomes = [_run_one(y, chains[0])]
    else:
        with ProcessPoolExecutor(max_workers=len(chains)) as pool:
            outcomes = list(pool.map(_run_one, [y] * len(chains), chains))
    for i, (chain, (result, wall)) in enumerate(zip(chains, outcomes)):
        suffix = "" if len(chains) == 1 else f"_{i}"
        if len(result):
            data.write_chain_csv(result, cfg.output_dir / f"chain{suffix}.csv")
        else:
            (cfg.output_dir / f"chain{suffix}.csv").write_text(
                ",".join(data.CHAIN_FIXED_COLUMNS + tuple(f"h_{k}" for k in chain.tracked_latents)) + "\n")
        (cfg.output_dir / f"manifest{suffix}.txt").write_text(
            _manifest(result, chain, y, checksum, wall))
        print(f"chain{suffix}: {len(result)} samples, acceptance {result.volatility_acceptance:.3f}")
    return EXIT_OK


def cmd_report(args) -> int:
    if len(args.chains) > 2:
        raise UsageError("report takes one chain file or two for comparison")
    labels = args.labels.split(",") if args.labels else [p.stem for p in args.chains]
    if len(labels) != len(args.chains) or len(set(labels)) != len(labels):
        raise UsageError("need one distinct label per chain file")
    args.out.mkdir(parents=True, exist_ok=True)
    stats = []
    for path, label in zip(args.chains, labels):
        columns = data.read_chain_csv(path)
        if len(columns["iteration"]) < 100:
            raise data.DataError(f"{path}: need at least 100 samples for a report")
        s = report.summarize_chain(columns)
        stats.append(s)
        tag = "" if len(args.chains) == 1 else f"_{label}"
        text = report.format_table(s, title=f"{label} ({len(columns['iteration'])} samples)")
        (args.out / f"summary{tag}.txt").write_text(text)
        report.write_summary_csv(s, args.out / f"summary{tag}.csv")
        report.write_acf_csv(report.acf_table(columns, args.max_lag), args.out / f"acf{tag}.csv")
        sys.stdout.write(text)
    if len(stats) == 2:
        text = report.format_comparison(stats[0], stats[1], labels)
        (args.out / "comparison.txt").write_text(text)
        report.write_comparison_csv(stats[0], stats[1], args.out / "comparison.csv", labels)
        sys.stdout.write(text)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s", stream=sys.stderr)
    try:
        if args.command == "synth":
            return cmd_synth(args)
        if args.command == "fit":
            return cmd_fit(_fit_config(args))
        return cmd_report(args)
    except UsageError as exc:
        print(f"svhmc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"svhmc: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DegenerateConditionalError as exc:
        print(f"svhmc: numerical degeneracy: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE


if __name__ == "__main__":
    sys.exit(main())
