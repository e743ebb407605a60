"""Super-provider context: which history counts, and how trust is judged."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

from .expectations import (  # noqa: F401  (re-exported)
    Advertised,
    Capped,
    Customized,
    ExpectationMode,
    resolve_expectation,
)
from .model import HistoryRecord, ProviderProfile, TimeInterval
from .trust import TrustWeights


@dataclass(frozen=True)
class HistoryConstraints:
    """Conjunction of optional record filters. ``None`` disables a filter."""

    location: Optional[str] = None
    time: Optional[TimeInterval] = None
    min_energy: Optional[float] = None

    @property
    def active(self) -> bool:
        return self.location is not None or self.time is not None or self.min_energy is not None


@dataclass(frozen=True)
class ContextModel:
    history: HistoryConstraints = field(default_factory=HistoryConstraints)
    weights: TrustWeights = field(default_factory=TrustWeights)
    trust_threshold: float = 0.0
    expectation: ExpectationMode = field(default_factory=Advertised)
    min_history: int = 5
    min_records_duration: int = 3

    def __post_init__(self):
        if not 0.0 <= self.trust_threshold <= 1.0:
            raise ValueError(f"trust_threshold {self.trust_threshold} outside [0, 1]")
        if self.min_history < 0 or self.min_records_duration < 0:
            raise ValueError("record-count thresholds must be non-negative")


class FilteredHistory(NamedTuple):
    records: list[HistoryRecord]
    fallback: bool


def satisfies(record: HistoryRecord, constraints: HistoryConstraints) -> bool:
    if constraints.location is not None and record.microcell != constraints.location:
        return False
    if constraints.time is not None and not record.service.interval.within(constraints.time):
        return False
    if constraints.min_energy is not None and record.service.amount < constraints.min_energy:
        return False
    return True


def filter_records(history: Sequence[HistoryRecord], constraints: HistoryConstraints) -> list[HistoryRecord]:
    return [h for h in history if satisfies(h, constraints)]


def filter_history(profile: ProviderProfile, model: ContextModel) -> FilteredHistory:
    """Keep the records that meet the context's history constraints.

    When fewer than ``model.min_history`` records survive, the provider is
    judged on its full history instead and ``fallback`` is set.
    """
    kept = filter_records(profile.history, model.history)
    if len(kept) < model.min_history:
        return FilteredHistory(list(profile.history), True)
    return FilteredHistory(kept, False)
