"""Command line entry point: ``adaptnet <scenario> --config FILE --out DIR``.

Exit codes: 0 success, 1 configuration error, 2 identity check failure,
3 topology or placement error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .experiments.config import SCENARIOS, ConfigError, TopologyConfigError, load_config

EXIT_OK, EXIT_CONFIG, EXIT_IDENTITY, EXIT_TOPOLOGY = 0, 1, 2, 3

log = logging.getLogger("adaptnet")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="adaptnet", description="Run an adaptive-network experiment")
    ap.add_argument("scenario", choices=SCENARIOS)
    ap.add_argument("--config", required=True, help="INI experiment file")
    ap.add_argument("--out", required=True, help="directory for CSV and summary.json")
    ap.add_argument("--seed", type=int, help="override [experiment] seed")
    ap.add_argument("--runs", type=int, help="override [experiment] runs")
    ap.add_argument("--threads", type=int, help="worker threads for Monte Carlo kernels")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def _set_threads(k: int | None) -> None:
    if k is None:
        return
    import numba
    numba.set_num_threads(min(k, numba.config.NUMBA_NUM_THREADS))


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    from .evo.state import PlacementError
    from .experiments.scenarios import run_scenario
    from .topology import TopologyError
    try:
        cfg = load_config(args.config, seed=args.seed, runs=args.runs, threads=args.threads)
        if cfg.scenario != args.scenario:
            raise ConfigError(f"{cfg.where('experiment', 'scenario')}: [experiment] scenario: "
                              f"file declares {cfg.scenario!r} but {args.scenario!r} was requested")
        _set_threads(cfg.threads)
        log.info("running %s with seed %d and %d runs", cfg.scenario, cfg.seed, cfg.runs)
        result = run_scenario(cfg, Path(args.out))
    except (TopologyConfigError, TopologyError, PlacementError) as exc:
        print(f"adaptnet: topology error: {exc}", file=sys.stderr)
        return EXIT_TOPOLOGY
    except ConfigError as exc:
        print(f"adaptnet: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(json.dumps(result.summary, indent=2, sort_keys=True))
    for f in result.files:
        log.info("wrote %s", f)
    return EXIT_OK if result.passed else EXIT_IDENTITY


if __name__ == "__main__":
    sys.exit(main())
