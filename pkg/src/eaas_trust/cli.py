"""Command line entry point.

    eaas-trust run       strategy x environment x service-count sweep
    eaas-trust history   full vs time vs spatio-temporal history filtering
    eaas-trust expect    advertised vs capped vs customized expectations
    eaas-trust timing    composition wall-clock per strategy and count
    eaas-trust generate  write a synthetic scenario as CSV files
    eaas-trust compose   compose services from CSV files
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .composition import STRATEGIES, compose
from .context import ContextModel
from .demand import aggregate_demand, read_requests_csv, write_requests_csv
from .harness import (
    RESULT_COLUMNS,
    ConfigError,
    ExperimentConfig,
    compare_expectation_modes,
    compare_history_constraints,
    config_from_mapping,
    measure_timing,
    parse_demand,
    read_config_file,
    run_experiment,
)
from .model import (
    EnergyDemand,
    TimeInterval,
    build_profiles,
    read_history_csv,
    read_offers_csv,
    write_history_csv,
    write_offers_csv,
)
from .workload import ENVIRONMENTS, EnvironmentProfile, Table1Params, generate_scenario, history_records

log = logging.getLogger("eaas_trust")

# Defaults per subcommand, applied before the config file and flags.
COMMAND_DEFAULTS = {
    "run": {},
    "history": {"environments": "neutral", "service_counts": "10", "in_cell_boost": "0.3",
                "trust_threshold": "0.7", "strategies": "knapsack"},
    "expect": {"environments": "neutral", "service_counts": "10", "strategies": "knapsack"},
    "timing": {"environments": "neutral", "service_counts": "10,100,1000", "trials": "5"},
}


def _experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--seed", help="base seed")
    p.add_argument("--trials", help="trials per point")
    p.add_argument("--demand", help="demand in mAh, or a range like 500-2500")
    p.add_argument("--strategies", help=f"comma-separated subset of {','.join(STRATEGIES)}")
    p.add_argument("--environments", help=f"comma-separated subset of {','.join(ENVIRONMENTS)}")
    p.add_argument("--service-counts", dest="service_counts", help="comma-separated service counts")
    p.add_argument("--out", help="results CSV path (default: stdout)")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any config key; may repeat")


def _build_config(command: str, args) -> ExperimentConfig:
    values = dict(COMMAND_DEFAULTS.get(command, {}))
    if args.config:
        values.update(read_config_file(args.config))
    for item in args.set:
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        values[key.strip()] = val.strip()
    for key in ("seed", "trials", "demand", "strategies", "environments", "service_counts", "out"):
        val = getattr(args, key)
        if val is not None:
            values[key] = val
    return config_from_mapping(values)


def _print_rows(rows, variant_column):
    w = csv.writer(sys.stdout)
    header = list(RESULT_COLUMNS)
    header[1] = variant_column
    w.writerow(header)
    for r in rows:
        w.writerow([r.environment, r.variant, r.service_count, r.trials, f"{r.mean_expected_qoe:.4f}",
                    f"{r.mean_realized_qoe:.4f}", f"{r.qoe_stddev:.4f}", f"{r.mean_cost:.2f}",
                    f"{r.mean_time_us:.1f}"])


def _cmd_experiment(command, args) -> int:
    cfg = _build_config(command, args)
    if command == "run":
        rows, column = run_experiment(cfg), "strategy"
    elif command == "history":
        rows, column = compare_history_constraints(cfg, cfg.strategies[0]), "filter"
    elif command == "expect":
        rows, column = compare_expectation_modes(cfg, strategy=cfg.strategies[0]), "expectation"
    else:
        rows = measure_timing(cfg)
        if not cfg.output_path:
            print("strategy,service_count,trials,mean_time_us,time_stddev_us")
            for r in rows:
                print(f"{r.strategy},{r.service_count},{r.trials},{r.mean_time_us:.1f},{r.time_stddev_us:.1f}")
        return 0
    if not cfg.output_path:
        _print_rows(rows, column)
    else:
        log.info("wrote %d rows to %s", len(rows), cfg.output_path)
    return 0


def _cmd_generate(args) -> int:
    params = replace(Table1Params(), in_cell_boost=args.in_cell_boost)
    scenario = generate_scenario(EnvironmentProfile(args.environment, args.seed), args.providers,
                                 args.history_len, params)
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    write_offers_csv(out / "offers.csv", [p.offered_service for p in scenario.providers])
    write_history_csv(out / "history.csv", history_records(scenario.providers))
    write_requests_csv(out / "requests.csv", scenario.requests)
    log.info("wrote scenario with %d providers to %s", len(scenario.providers), out)
    return 0


def _cmd_compose(args) -> int:
    profiles = build_profiles(read_offers_csv(args.offers), read_history_csv(args.history))
    lo, hi = (int(x) for x in args.slot.split("-"))
    slot = TimeInterval(lo, hi)
    if args.demand:
        amount = parse_demand(args.demand)
        if isinstance(amount, tuple):
            raise ConfigError("compose needs a single --demand amount, not a range")
        demand = EnergyDemand(amount, slot, args.microcell)
    elif args.requests:
        demand = aggregate_demand(read_requests_csv(args.requests), slot, args.microcell)
    else:
        raise ConfigError("give --demand or --requests")
    values = {k: v for k, v in (s.partition("=")[::2] for s in args.set)}
    ctx = config_from_mapping(values).context if values else ContextModel()
    result = compose(profiles, demand, ctx, args.strategy, args.price)
    print("service_id,provider_id,trust,advertised_mAh,allocated_mAh,fallback")
    for c, a in zip(result.selected, result.allocated):
        print(f"{c.service.service_id},{c.provider_id},{c.trust:.4f},{c.service.amount:.2f},{a:.2f},"
              f"{int(c.fallback_used)}")
    print(f"# demand={demand.amount:.2f} expected_qoe={result.expected_qoe:.4f} cost={result.cost:.2f}",
          file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eaas-trust", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("run", "strategy sweep"), ("history", "history-filter comparison"),
                        ("expect", "expectation-mode comparison"), ("timing", "composition timing")):
        _experiment_flags(sub.add_parser(name, help=help_))

    g = sub.add_parser("generate", help="write a synthetic scenario as CSV")
    g.add_argument("--environment", default="neutral", choices=ENVIRONMENTS)
    g.add_argument("--providers", type=int, default=20)
    g.add_argument("--history-len", type=int, default=50)
    g.add_argument("--in-cell-boost", type=float, default=0.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--outdir", required=True)

    c = sub.add_parser("compose", help="compose services from CSV files")
    c.add_argument("--offers", required=True)
    c.add_argument("--history", required=True)
    c.add_argument("--requests")
    c.add_argument("--demand")
    c.add_argument("--slot", default="600-720", help="demand slot in minutes, START-END")
    c.add_argument("--microcell", default=Table1Params().target_microcell)
    c.add_argument("--strategy", default="trust_heuristic", choices=STRATEGIES)
    c.add_argument("--price", type=float, default=0.1)
    c.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "generate":
            return _cmd_generate(args)
        if args.command == "compose":
            return _cmd_compose(args)
        return _cmd_experiment(args.command, args)
    except ConfigError as exc:
        print(f"eaas-trust: config error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"eaas-trust: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
