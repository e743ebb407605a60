"""Context-aware trust assessment and trust-based composition of
crowdsourced IoT energy services."""

from .composition import (
    STRATEGIES,
    CompositionResult,
    ScoredPool,
    ScoredService,
    allocate,
    allocate_greedy,
    allocate_knapsack,
    allocate_priority,
    allocate_trust_heuristic,
    compose,
    incentive_cost,
    score_candidates,
)
from .context import ContextModel, HistoryConstraints, filter_history, satisfies
from .demand import RequestRecord, aggregate_demand, expected_qoe, qoe
from .expectations import Advertised, Capped, Customized, resolve_expectation
from .model import EnergyDemand, EnergyService, HistoryRecord, ProviderProfile, Status, TimeInterval
from .harness import (
    ExperimentConfig,
    compare_expectation_modes,
    compare_history_constraints,
    measure_timing,
    run_experiment,
)
from .trust import TrustAttributes, TrustWeights, provider_trust
from .workload import EnvironmentProfile, GroundTruthBehavior, Table1Params, generate_scenario, simulate_delivery

__version__ = "0.1.0"
