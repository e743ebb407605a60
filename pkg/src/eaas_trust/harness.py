"""Repeated-trial experiments over generated scenarios.

Every trial draws one scenario per environment with as many providers as
the largest service count; smaller counts use a prefix of the same
providers, so a sweep adds services to an otherwise fixed market. All
strategies in a trial see the same scored candidates, and delivery outcomes
are drawn per service, so strategies differ only in what they select.
"""

from __future__ import annotations

import configparser
import csv
import logging
import statistics
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .composition import STRATEGIES, allocate, compose, get_allocator, score_candidates
from .context import ContextModel, HistoryConstraints
from .demand import aggregate_demand, qoe
from .expectations import Advertised, Capped, Customized, ExpectationMode, parse_expectation
from .model import EnergyDemand, TimeInterval
from .trust import TrustWeights
from .workload import ENVIRONMENTS, EnvironmentProfile, Table1Params, generate_scenario, simulate_delivery

log = logging.getLogger(__name__)

RESULT_COLUMNS = ("environment", "strategy", "service_count", "trials", "mean_expected_qoe",
                  "mean_realized_qoe", "qoe_stddev", "mean_cost", "mean_time_us")
TIMING_COLUMNS = ("strategy", "service_count", "trials", "mean_time_us", "time_stddev_us")
TIME_COLUMNS = frozenset({"mean_time_us", "time_stddev_us"})

HISTORY_FILTERS = ("full", "time", "spatio_temporal")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    demand_mAh: Union[float, tuple[float, float]] = 1000.0
    service_counts: tuple[int, ...] = (10, 20, 40, 80)
    trials: int = 200
    environments: tuple[str, ...] = ENVIRONMENTS
    strategies: tuple[str, ...] = STRATEGIES
    context: ContextModel = field(default_factory=ContextModel)
    price_per_unit: float = 0.1
    seed: int = 0
    output_path: Optional[str] = None
    history_len: int = 50
    in_cell_boost: float = 0.0
    admit_low_trust: bool = False

    def validate(self) -> None:
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.service_counts or min(self.service_counts) < 1:
            raise ConfigError("service_counts must be a non-empty list of positive counts")
        if self.history_len < 1:
            raise ConfigError("history_len must be >= 1")
        if self.price_per_unit < 0:
            raise ConfigError("price_per_unit must be >= 0")
        for env in self.environments:
            if env not in ENVIRONMENTS:
                raise ConfigError(f"unknown environment {env!r}; expected one of {ENVIRONMENTS}")
        for s in self.strategies:
            if s not in STRATEGIES:
                raise ConfigError(f"unknown strategy {s!r}; expected one of {STRATEGIES}")
        if not self.environments or not self.strategies:
            raise ConfigError("need at least one environment and one strategy")
        lo, hi = self.demand_bounds
        if not 0 < lo <= hi:
            raise ConfigError(f"bad demand {self.demand_mAh}")

    @property
    def demand_bounds(self) -> tuple[float, float]:
        d = self.demand_mAh
        return (float(d[0]), float(d[1])) if isinstance(d, tuple) else (float(d), float(d))

    @property
    def params(self) -> Table1Params:
        base = Table1Params()
        lo, hi = self.demand_bounds
        # a fixed demand keeps the default request generator range
        demand_range = (lo, hi) if lo != hi else base.demand_range
        return replace(base, in_cell_boost=self.in_cell_boost, demand_range=demand_range)


@dataclass(frozen=True)
class ResultRow:
    environment: str
    variant: str
    service_count: int
    trials: int
    mean_expected_qoe: float
    mean_realized_qoe: float
    qoe_stddev: float
    mean_cost: float
    mean_time_us: float
    time_stddev_us: float
    mean_trust: float
    mean_selected_trust: float
    mean_raw_energy: float


@dataclass(frozen=True)
class TimingRow:
    strategy: str
    service_count: int
    trials: int
    mean_time_us: float
    time_stddev_us: float


@dataclass(frozen=True)
class _Variant:
    label: str
    context: ContextModel
    strategy: str


def _trial_seeds(seed: int, env: str, trial: int) -> tuple[int, int]:
    ss = np.random.SeedSequence([seed, ENVIRONMENTS.index(env), trial])
    gen_seed, delivery_seed = ss.generate_state(2)
    return int(gen_seed), int(delivery_seed)


def _demand_for(config: ExperimentConfig, scenario) -> EnergyDemand:
    params = config.params
    lo, hi = config.demand_bounds
    if lo == hi:
        return EnergyDemand(lo, params.window, params.target_microcell)
    return aggregate_demand(scenario.requests, params.window, params.target_microcell)


def _stdev(xs: Sequence[float]) -> float:
    return statistics.stdev(xs) if len(xs) > 1 else 0.0


def _run_grid(config: ExperimentConfig, variants: Sequence[_Variant]) -> list[ResultRow]:
    config.validate()
    counts = tuple(config.service_counts)
    max_count = max(counts)
    params = config.params
    rows = []
    for env in config.environments:
        stats = {(v.label, n): {"exp": [], "real": [], "cost": [], "time": [], "trust": [], "sel": [], "raw": []}
                 for v in variants for n in counts}
        for trial in range(config.trials):
            gen_seed, delivery_seed = _trial_seeds(config.seed, env, trial)
            scenario = generate_scenario(EnvironmentProfile(env, gen_seed), max_count,
                                         config.history_len, params)
            demand = _demand_for(config, scenario)
            for n in counts:
                providers = scenario.providers[:n]
                pools = {}
                for v in variants:
                    if v.context not in pools:
                        t0 = time.perf_counter_ns()
                        pool = score_candidates(providers, demand, v.context)
                        pools[v.context] = (pool, time.perf_counter_ns() - t0)
                    pool, score_ns = pools[v.context]
                    t0 = time.perf_counter_ns()
                    result = allocate(pool, demand, v.strategy, config.price_per_unit,
                                      config.admit_low_trust)
                    elapsed = score_ns + time.perf_counter_ns() - t0
                    delivered = simulate_delivery(result, scenario.behaviors, delivery_seed)
                    s = stats[(v.label, n)]
                    s["exp"].append(result.expected_qoe)
                    s["real"].append(qoe(delivered, demand))
                    s["cost"].append(result.cost)
                    s["time"].append(elapsed / 1000.0)
                    s["raw"].append(result.raw_energy)
                    trusts = [c.trust for c in pool.trusted] + [c.trust for c in pool.low_trust]
                    s["trust"].append(statistics.fmean(trusts) if trusts else 0.0)
                    if result.selected:
                        s["sel"].append(statistics.fmean(c.trust for c in result.selected))
        for v in variants:
            for n in counts:
                s = stats[(v.label, n)]
                rows.append(ResultRow(
                    environment=env, variant=v.label, service_count=n, trials=config.trials,
                    mean_expected_qoe=statistics.fmean(s["exp"]),
                    mean_realized_qoe=statistics.fmean(s["real"]),
                    qoe_stddev=_stdev(s["real"]),
                    mean_cost=statistics.fmean(s["cost"]),
                    mean_time_us=statistics.fmean(s["time"]),
                    time_stddev_us=_stdev(s["time"]),
                    mean_trust=statistics.fmean(s["trust"]),
                    mean_selected_trust=statistics.fmean(s["sel"]) if s["sel"] else 0.0,
                    mean_raw_energy=statistics.fmean(s["raw"]),
                ))
        log.info("environment %s done", env)
    return rows


def run_experiment(config: ExperimentConfig) -> list[ResultRow]:
    """Mean QoE, cost and composition time per environment, strategy and count."""
    variants = [_Variant(s, config.context, s) for s in config.strategies]
    rows = _run_grid(config, variants)
    if config.output_path:
        write_results_csv(config.output_path, rows, variant_column="strategy")
    return rows


def history_filter_contexts(config: ExperimentConfig) -> dict[str, ContextModel]:
    params = config.params
    base = config.context
    return {
        "full": replace(base, history=HistoryConstraints()),
        "time": replace(base, history=HistoryConstraints(time=params.window)),
        "spatio_temporal": replace(base, history=HistoryConstraints(
            location=params.target_microcell, time=params.window)),
    }


def compare_history_constraints(config: ExperimentConfig, strategy: str = "knapsack") -> list[ResultRow]:
    """Knapsack QoE when trust is judged on full, time-filtered or
    spatio-temporally filtered history."""
    get_allocator(strategy)
    variants = [_Variant(label, ctx, strategy) for label, ctx in history_filter_contexts(config).items()]
    rows = _run_grid(config, variants)
    if config.output_path:
        write_results_csv(config.output_path, rows, variant_column="filter")
    return rows


DEFAULT_EXPECTATIONS: dict[str, ExpectationMode] = {
    "advertised": Advertised(),
    "capped": Capped(50.0),
    "customized": Customized("median"),
}


def compare_expectation_modes(
    config: ExperimentConfig,
    modes: Optional[dict[str, ExpectationMode]] = None,
    strategy: str = "knapsack",
) -> list[ResultRow]:
    """Knapsack QoE under different delivery expectations."""
    get_allocator(strategy)
    modes = modes or DEFAULT_EXPECTATIONS
    variants = [_Variant(label, replace(config.context, expectation=m), strategy)
                for label, m in modes.items()]
    rows = _run_grid(config, variants)
    if config.output_path:
        write_results_csv(config.output_path, rows, variant_column="expectation")
    return rows


def measure_timing(config: ExperimentConfig) -> list[TimingRow]:
    """Wall-clock of a full compose() (scoring plus allocation) per strategy
    and service count, in the first configured environment."""
    config.validate()
    env = config.environments[0]
    params = config.params
    samples = {(s, n): [] for s in config.strategies for n in config.service_counts}
    for n in config.service_counts:
        for trial in range(config.trials):
            gen_seed, _ = _trial_seeds(config.seed, env, trial)
            scenario = generate_scenario(EnvironmentProfile(env, gen_seed), n, config.history_len, params)
            demand = _demand_for(config, scenario)
            for s in config.strategies:
                t0 = time.perf_counter_ns()
                compose(scenario.providers, demand, config.context, s, config.price_per_unit,
                        config.admit_low_trust)
                samples[(s, n)].append((time.perf_counter_ns() - t0) / 1000.0)
    rows = [TimingRow(s, n, config.trials, statistics.fmean(samples[(s, n)]), _stdev(samples[(s, n)]))
            for s in config.strategies for n in config.service_counts]
    if config.output_path:
        _write_csv(config.output_path, TIMING_COLUMNS,
                   ([r.strategy, r.service_count, r.trials, repr(r.mean_time_us), repr(r.time_stddev_us)]
                    for r in rows))
    return rows


def _write_csv(path, header, rows: Iterable[list]) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc.strerror or exc}") from exc


def write_results_csv(path, rows: Sequence[ResultRow], variant_column: str = "strategy") -> None:
    header = list(RESULT_COLUMNS)
    header[1] = variant_column
    _write_csv(path, header, (
        [r.environment, r.variant, r.service_count, r.trials, repr(r.mean_expected_qoe),
         repr(r.mean_realized_qoe), repr(r.qoe_stddev), repr(r.mean_cost), repr(r.mean_time_us)]
        for r in rows))


# -- config files ----------------------------------------------------------------

def _split(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


def _range(text: str) -> tuple[float, float]:
    lo, sep, hi = text.partition("-")
    if not sep:
        raise ValueError(f"expected a range like 500-2500, got {text!r}")
    return float(lo), float(hi)


def parse_demand(text: str) -> Union[float, tuple[float, float]]:
    text = text.strip()
    return _range(text) if "-" in text.lstrip("-") else float(text)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


CONFIG_KEYS = {
    "demand", "service_counts", "trials", "environments", "strategies", "price_per_unit", "seed",
    "out", "history_len", "in_cell_boost", "admit_low_trust", "trust_threshold", "expectation",
    "min_history", "min_records_duration", "filter_location", "filter_time", "filter_min_energy",
    "w_sr", "w_tl", "w_ds", "w_i", "w_d",
}


def config_from_mapping(values: dict[str, str], base: Optional[ExperimentConfig] = None) -> ExperimentConfig:
    """Build a config from flat string key/values (config file or CLI)."""
    cfg = base or ExperimentConfig()
    unknown = set(values) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    v = {k: s for k, s in values.items() if s is not None and str(s).strip() != ""}
    try:
        ctx = cfg.context
        weights = ctx.weights
        wkeys = ("w_sr", "w_tl", "w_ds", "w_i", "w_d")
        if any(k in v for k in wkeys):
            weights = TrustWeights.normalized(*(float(v.get(k, getattr(weights, k))) for k in wkeys))
        hist = ctx.history
        if "filter_location" in v:
            hist = replace(hist, location=v["filter_location"].strip())
        if "filter_time" in v:
            lo, hi = _range(v["filter_time"])
            hist = replace(hist, time=TimeInterval(int(lo), int(hi)))
        if "filter_min_energy" in v:
            hist = replace(hist, min_energy=float(v["filter_min_energy"]))
        ctx = ContextModel(
            history=hist,
            weights=weights,
            trust_threshold=float(v.get("trust_threshold", ctx.trust_threshold)),
            expectation=parse_expectation(v["expectation"]) if "expectation" in v else ctx.expectation,
            min_history=int(v.get("min_history", ctx.min_history)),
            min_records_duration=int(v.get("min_records_duration", ctx.min_records_duration)),
        )
        cfg = ExperimentConfig(
            demand_mAh=parse_demand(v["demand"]) if "demand" in v else cfg.demand_mAh,
            service_counts=tuple(int(x) for x in _split(v["service_counts"])) if "service_counts" in v
            else cfg.service_counts,
            trials=int(v.get("trials", cfg.trials)),
            environments=_split(v["environments"]) if "environments" in v else cfg.environments,
            strategies=_split(v["strategies"]) if "strategies" in v else cfg.strategies,
            context=ctx,
            price_per_unit=float(v.get("price_per_unit", cfg.price_per_unit)),
            seed=int(v.get("seed", cfg.seed)),
            output_path=v.get("out", cfg.output_path),
            history_len=int(v.get("history_len", cfg.history_len)),
            in_cell_boost=float(v.get("in_cell_boost", cfg.in_cell_boost)),
            admit_low_trust=_bool(v["admit_low_trust"]) if "admit_low_trust" in v else cfg.admit_low_trust,
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    cfg.validate()
    return cfg


def read_config_file(path) -> dict[str, str]:
    """Read a flat ``key = value`` file; ``#`` starts a comment."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    try:
        parser.read_string("[experiment]\n" + text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return dict(parser["experiment"])
