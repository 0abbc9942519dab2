"""Command-line entry point.

Subcommands::

    bcjrlab run CONFIG                  run the configured grid and write results
    bcjrlab train CONFIG                train and store BCJRNet providers only
    bcjrlab detect --provider P CONFIG  run detection with a stored provider
    bcjrlab oracle T L                  compare BCJR against brute-force MAP
"""
import argparse
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .bcjr import BACKEND, map_detect
from .channel import TapProfile, normalize_taps
from .config import load_config, resolve_output_dir
from .errors import BcjrLabError
from .experiments import run_bcjrnet, run_config, run_conventional, train_for
from .likelihood import CsiLikelihoodProvider, build_table
from .neural import load_provider, save_provider
from .results import RunManifest, write_results
from .trellis import Trellis

log = logging.getLogger("bcjrlab")


def _load(args):
    configs, options = load_config(args.config)
    if args.seed is not None:
        configs = [replace(c, seed=args.seed) for c in configs]
    return configs, resolve_output_dir(args.output_dir, options["output_dir"])


class ProviderCache:
    """Trained providers stored under ``<dir>/<training key>.npz``."""

    def __init__(self, directory, enabled=True):
        self.directory = Path(directory)
        self.enabled = enabled

    def path(self, config):
        return self.directory / f"{config.training_key()}.npz"

    def __call__(self, config):
        path = self.path(config)
        if self.enabled and path.is_file():
            log.info("reusing cached provider %s", path)
            return load_provider(path)
        provider = train_for(config)
        if self.enabled:
            self.directory.mkdir(parents=True, exist_ok=True)
            save_provider(path, provider)
        return provider


def cmd_run(args):
    configs, out = _load(args)
    cache = ProviderCache(out / "cache", enabled=not args.no_cache)
    start = time.perf_counter()
    results = []
    for i, config in enumerate(configs, 1):
        log.info("[%d/%d] case %d gamma=%g variant=%s", i, len(configs), config.case,
                 config.gamma, config.variant())
        results += run_config(config, threads=args.threads, provider_cache=cache)
    manifest = RunManifest(configs, results, seed=args.seed,
                           duration_s=round(time.perf_counter() - start, 3))
    table, _ = write_results(manifest, out, args.format)
    print(table)
    return 0


def cmd_train(args):
    configs, out = _load(args)
    cache = ProviderCache(out / "providers")
    for config in configs:
        if "bcjrnet" not in config.detectors:
            continue
        cache(config)
        print(cache.path(config))
    return 0


def cmd_detect(args):
    configs, out = _load(args)
    provider = load_provider(args.provider)
    start = time.perf_counter()
    results = []
    for config in configs:
        if provider.meta.get("training_key") not in (None, config.training_key()):
            log.warning("provider %s was trained for a different configuration", args.provider)
        for detector in config.detectors:
            if detector == "conventional":
                results.append(run_conventional(config, threads=args.threads))
            else:
                results.append(run_bcjrnet(config, provider=provider, threads=args.threads))
    manifest = RunManifest(configs, results, seed=args.seed,
                           duration_s=round(time.perf_counter() - start, 3))
    table, _ = write_results(manifest, out, args.format)
    print(table)
    return 0


def oracle_deviation(T, L, seed=0, instances=1):
    """Largest gap between BCJR and brute-force posteriors over random CSI tables."""
    import itertools

    rng = np.random.default_rng(seed)
    trellis = Trellis(L)
    worst = 0.0
    for _ in range(instances):
        taps = normalize_taps(TapProfile(rng.normal(size=L)))
        x = rng.choice((-1.0, 1.0), size=T)
        s2 = rng.uniform(0.1, 1.0)
        y = np.array([taps.taps[0][:min(L, t + 1)] @ x[t::-1][:L] for t in range(T)])
        y = y + rng.normal(0.0, np.sqrt(s2), size=T)
        table = build_table(y, CsiLikelihoodProvider(taps, s2, trellis)).values
        _, post = map_detect(table, trellis)

        exact = np.zeros((T, 2))
        pre = L - 1
        for seq in itertools.product((0, 1), repeat=T + pre):
            w = 1.0
            for t in range(T):
                idx = 0
                for b in seq[t:t + L]:
                    idx = idx * 2 + b
                # seq is oldest-first, so reverse the bit order of each window
                idx = int(format(idx, f"0{L}b")[::-1], 2)
                w *= table[t, idx]
            for t in range(T):
                exact[t, seq[t + pre]] += w
        exact /= exact.sum(axis=1, keepdims=True)
        worst = max(worst, float(np.abs(exact - post.per_symbol).max()))
    return worst


def cmd_oracle(args):
    if args.T < 1 or args.L < 1 or args.T + args.L > 24:
        raise BcjrLabError("oracle needs T >= 1, L >= 1 and T + L <= 24 (exhaustive enumeration)")
    dev = oracle_deviation(args.T, args.L, seed=args.seed or 0, instances=args.instances)
    print(f"max posterior deviation: {dev:.3e}")
    return 0 if dev <= 1e-9 else 1


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="override the configured seed")
    common.add_argument("--threads", type=int, default=1, help="worker threads for Monte-Carlo trials")
    common.add_argument("--output-dir", default=None,
                        help="results directory (default: config output_dir, $BCJRLAB_OUTPUT_DIR, ./results)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="bcjrlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND} kernel)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="run a configuration grid")
    p.add_argument("config")
    p.add_argument("--no-cache", action="store_true", help="always retrain BCJRNet providers")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("train", parents=[common], help="train and store BCJRNet providers")
    p.add_argument("config")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("detect", parents=[common], help="detect with a stored provider")
    p.add_argument("--provider", required=True)
    p.add_argument("config")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("oracle", parents=[common], help="brute-force MAP cross-check")
    p.add_argument("T", type=int)
    p.add_argument("L", type=int)
    p.add_argument("--instances", type=int, default=1)
    p.set_defaults(func=cmd_oracle)
    return parser


def run_cli(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (BcjrLabError, OSError) as exc:
        print(f"bcjrlab: error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
