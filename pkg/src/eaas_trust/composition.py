"""Trust-based composition of energy services.

Candidates are scored once (history filtering, expectation, trust) and then
handed to one of four allocators:

* ``greedy``: first come first served by start time, trust ignored.
* ``priority``: highest trust first, whole services.
* ``knapsack``: highest trust first, the last service cut to close the gap
  exactly. This maximizes the lowest trust among participants.
* ``trust_heuristic``: highest trust first, counting each service only at its
  trust-discounted size. The selected raw energy therefore exceeds demand,
  which acts as backup against cancellations.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple, Optional, Sequence

from .context import ContextModel, filter_history, resolve_expectation
from .demand import expected_qoe
from .model import EnergyDemand, EnergyService, ProviderProfile
from .trust import TrustAttributes, provider_trust

STRATEGIES = ("greedy", "priority", "knapsack", "trust_heuristic")


@dataclass(frozen=True)
class ScoredService:
    service: EnergyService
    trust: float
    attributes: TrustAttributes
    fallback_used: bool = False

    @property
    def discounted_amount(self) -> float:
        return self.service.amount * self.trust

    @property
    def provider_id(self) -> str:
        return self.service.provider_id


@dataclass(frozen=True)
class CompositionResult:
    """Selected services and the energy drawn from each.

    ``allocated[i]`` is the raw mAh used from ``selected[i]``; it equals the
    advertised amount except for the knapsack's final, partially used service.
    """

    strategy: str
    demand: EnergyDemand
    selected: tuple[ScoredService, ...] = ()
    allocated: tuple[float, ...] = ()
    expected_qoe: float = 0.0
    realized_qoe: Optional[float] = None
    cost: float = 0.0

    @property
    def raw_energy(self) -> float:
        return sum(self.allocated)

    @property
    def min_trust(self) -> Optional[float]:
        return min((s.trust for s in self.selected), default=None)


class ScoredPool(NamedTuple):
    trusted: list[ScoredService]
    low_trust: list[ScoredService]


def score_candidates(
    providers: Sequence[ProviderProfile], demand: EnergyDemand, model: ContextModel
) -> ScoredPool:
    """Trust-assess every provider whose offer fits inside the demand slot.

    Providers scoring below ``model.trust_threshold`` go to the low-trust pool.
    """
    trusted, low = [], []
    for p in providers:
        offer = p.offered_service
        if not offer.interval.within(demand.slot):
            continue
        records, fallback = filter_history(p, model)
        expectation = model.expectation
        if records:
            expectation = resolve_expectation(records, expectation)
        trust, attrs = provider_trust(records, offer, model.weights, expectation,
                                      model.min_records_duration)
        scored = ScoredService(replace(offer, trust=trust), trust, attrs, fallback)
        (trusted if trust >= model.trust_threshold else low).append(scored)
    return ScoredPool(trusted, low)


def _eligible(candidates, demand):
    return [c for c in candidates if c.service.interval.within(demand.slot)]


def _by_start(c: ScoredService):
    s = c.service
    return (s.interval.start, s.provider_id, s.service_id)


def _by_trust(c: ScoredService):
    s = c.service
    return (-c.trust, -s.amount, s.provider_id, s.service_id)


def _result(strategy, demand, picked, allocated):
    expected = expected_qoe(
        [replace(c.service, amount=a) for c, a in zip(picked, allocated) if a > 0], demand)
    return CompositionResult(strategy, demand, tuple(picked), tuple(allocated), expected)


def _take_whole(ordered, demand, size):
    picked, total = [], 0.0
    for c in ordered:
        if total >= demand.amount:
            break
        picked.append(c)
        total += size(c)
    return picked


def allocate_greedy(candidates: Sequence[ScoredService], demand: EnergyDemand) -> CompositionResult:
    ordered = sorted(_eligible(candidates, demand), key=_by_start)
    picked = _take_whole(ordered, demand, lambda c: c.service.amount)
    return _result("greedy", demand, picked, [c.service.amount for c in picked])


def allocate_priority(candidates: Sequence[ScoredService], demand: EnergyDemand) -> CompositionResult:
    ordered = sorted(_eligible(candidates, demand), key=_by_trust)
    picked = _take_whole(ordered, demand, lambda c: c.service.amount)
    return _result("priority", demand, picked, [c.service.amount for c in picked])


def allocate_knapsack(candidates: Sequence[ScoredService], demand: EnergyDemand) -> CompositionResult:
    ordered = sorted(_eligible(candidates, demand), key=_by_trust)
    picked, allocated = [], []
    remaining = demand.amount
    for c in ordered:
        if remaining <= 0:
            break
        take = min(c.service.amount, remaining)
        picked.append(c)
        allocated.append(take)
        remaining -= take
    return _result("knapsack", demand, picked, allocated)


def allocate_trust_heuristic(candidates: Sequence[ScoredService], demand: EnergyDemand) -> CompositionResult:
    ordered = sorted(_eligible(candidates, demand), key=_by_trust)
    picked = _take_whole(ordered, demand, lambda c: c.discounted_amount)
    return _result("trust_heuristic", demand, picked, [c.service.amount for c in picked])


ALLOCATORS: dict[str, Callable[[Sequence[ScoredService], EnergyDemand], CompositionResult]] = {
    "greedy": allocate_greedy,
    "priority": allocate_priority,
    "knapsack": allocate_knapsack,
    "trust_heuristic": allocate_trust_heuristic,
}


def get_allocator(strategy: str):
    try:
        return ALLOCATORS[strategy]
    except KeyError:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}") from None


def incentive_cost(result: CompositionResult, price_per_unit: float) -> float:
    if price_per_unit < 0:
        raise ValueError("price_per_unit must be >= 0")
    return price_per_unit * result.raw_energy


def allocate(
    pool: ScoredPool, demand: EnergyDemand, strategy: str,
    price_per_unit: float = 0.0, admit_low_trust: bool = False,
) -> CompositionResult:
    """Run one allocator over a scored pool.

    With ``admit_low_trust`` the low-trust pool joins the candidates when the
    trusted pool alone cannot cover the demand.
    """
    allocator = get_allocator(strategy)
    candidates = list(pool.trusted)
    if admit_low_trust and sum(c.service.amount for c in candidates) < demand.amount:
        candidates += pool.low_trust
    result = allocator(candidates, demand)
    return replace(result, cost=incentive_cost(result, price_per_unit))


def compose(
    providers: Sequence[ProviderProfile],
    demand: EnergyDemand,
    model: ContextModel,
    strategy: str = "trust_heuristic",
    price_per_unit: float = 0.0,
    admit_low_trust: bool = False,
) -> CompositionResult:
    """Score the providers, then allocate with ``strategy``."""
    get_allocator(strategy)
    pool = score_candidates(providers, demand, model)
    return allocate(pool, demand, strategy, price_per_unit, admit_low_trust)
