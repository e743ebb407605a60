"""Provider trust: five history-derived attributes and their weighted sum."""

from __future__ import annotations

import math
from dataclasses import astuple, dataclass
from typing import Sequence

from .expectations import Advertised, Capped, Customized, ExpectationMode, resolve_expectation
from .model import EnergyService, HistoryRecord, Status

WEIGHT_TOL = 1e-9


@dataclass(frozen=True)
class TrustAttributes:
    success_rate: float
    delivery_size: float
    timeliness: float
    impact: float
    duration_factor: float

    def __post_init__(self):
        for name, v in zip(("success_rate", "delivery_size", "timeliness", "impact",
                            "duration_factor"), astuple(self)):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")


@dataclass(frozen=True)
class TrustWeights:
    w_sr: float = 0.2
    w_tl: float = 0.2
    w_ds: float = 0.2
    w_i: float = 0.2
    w_d: float = 0.2

    def __post_init__(self):
        ws = astuple(self)
        if any(w < 0 or not math.isfinite(w) for w in ws):
            raise ValueError(f"weights must be finite and non-negative: {ws}")
        if abs(sum(ws) - 1.0) > WEIGHT_TOL:
            raise ValueError(f"weights must sum to 1, got {sum(ws)!r}")

    @classmethod
    def normalized(cls, w_sr, w_tl, w_ds, w_i, w_d) -> "TrustWeights":
        total = w_sr + w_tl + w_ds + w_i + w_d
        if not total > 0:
            raise ValueError("at least one weight must be positive")
        return cls(w_sr / total, w_tl / total, w_ds / total, w_i / total, w_d / total)


def success_rate(history: Sequence[HistoryRecord]) -> float:
    if not history:
        return 0.0
    done = sum(1 for h in history if h.status is Status.COMPLETED)
    return done / len(history)


def delivery_size(history: Sequence[HistoryRecord], expectation: ExpectationMode = Advertised()) -> float:
    """Delivered energy relative to the expected energy.

    Under Advertised this is total delivered over total advertised. Under a
    Capped amount each record scores min(1, delivered / amount) and the scores
    are averaged, so over-delivery never earns more than full credit.
    Customized modes are resolved against ``history`` first.
    """
    if not history:
        return 0.0
    if isinstance(expectation, Customized):
        expectation = resolve_expectation(history, expectation)
    if isinstance(expectation, Capped):
        cap = expectation.expected_amount
        if cap <= 0:
            raise ValueError(f"expected amount must be > 0, got {cap}")
        return sum(min(1.0, h.delivered / cap) for h in history) / len(history)
    advertised = sum(h.service.amount for h in history)
    return min(1.0, sum(h.delivered for h in history) / advertised)


def timeliness(history: Sequence[HistoryRecord]) -> float:
    # only end-time overruns count; early finishes offset late ones
    if not history:
        return 1.0
    total_delay = sum(h.actual_interval.end - h.service.interval.end for h in history)
    if total_delay <= 0:
        return 1.0
    return min(1.0, len(history) / total_delay)


def failure_impact(record: HistoryRecord) -> float:
    """Share of the microcell's consumers hit when this service was canceled."""
    if record.consumers_present < 1:
        raise ValueError("consumers_present must be >= 1")
    if record.status is not Status.CANCELED:
        return 0.0
    return record.affected_consumers / record.consumers_present


def impact_score(history: Sequence[HistoryRecord]) -> float:
    if not history:
        return 1.0
    return sum(1.0 - failure_impact(h) for h in history) / len(history)


def duration_factor(history: Sequence[HistoryRecord], current: EnergyService, min_records: int) -> float:
    """Penalize advertising a longer stay than the provider usually makes.

    The usual stay is the mean advertised duration over ``history``; it is
    only trusted once there are more than ``min_records`` records.
    """
    if len(history) <= min_records:
        return 1.0
    usual = sum(h.service.interval.duration for h in history) / len(history)
    wanted = current.interval.duration
    if wanted <= usual:
        return 1.0
    return usual / wanted


def trust_attributes(history, current, expectation=Advertised(), min_records=0) -> TrustAttributes:
    return TrustAttributes(
        success_rate=success_rate(history),
        delivery_size=delivery_size(history, expectation),
        timeliness=timeliness(history),
        impact=impact_score(history),
        duration_factor=duration_factor(history, current, min_records),
    )


def combine(attrs: TrustAttributes, weights: TrustWeights) -> float:
    score = (weights.w_sr * attrs.success_rate
             + weights.w_tl * attrs.timeliness
             + weights.w_ds * attrs.delivery_size
             + weights.w_i * attrs.impact
             + weights.w_d * attrs.duration_factor)
    # weights sum to 1 only within WEIGHT_TOL
    return min(1.0, max(0.0, score))


def provider_trust(
    history: Sequence[HistoryRecord],
    current: EnergyService,
    weights: TrustWeights = TrustWeights(),
    expectation: ExpectationMode = Advertised(),
    min_records: int = 0,
) -> tuple[float, TrustAttributes]:
    """Weighted trust score of a provider plus the attribute breakdown."""
    attrs = trust_attributes(history, current, expectation, min_records)
    return combine(attrs, weights), attrs
