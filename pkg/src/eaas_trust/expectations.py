"""Expectation modes: the yardstick a delivery is judged against."""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from typing import Sequence, Union

from .model import HistoryRecord

STATISTICS = ("mean", "median", "mode")


@dataclass(frozen=True)
class Advertised:
    """Judge deliveries against what each service advertised."""


@dataclass(frozen=True)
class Capped:
    """Judge deliveries against a fixed amount, regardless of the advertisement."""

    expected_amount: float

    def __post_init__(self):
        if not self.expected_amount > 0:
            raise ValueError(f"capped expectation must be > 0, got {self.expected_amount}")


@dataclass(frozen=True)
class Customized:
    """Per-provider amount: a statistic over the provider's own deliveries."""

    statistic: str = "median"

    def __post_init__(self):
        if self.statistic not in STATISTICS:
            raise ValueError(f"unknown statistic {self.statistic!r}; expected one of {STATISTICS}")


ExpectationMode = Union[Advertised, Capped, Customized]


def _mode(values: Sequence[float]) -> float:
    # smallest value wins ties
    counts: dict[float, int] = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    best = max(counts.values())
    return min(v for v, c in counts.items() if c == best)


def resolve_expectation(history: Sequence[HistoryRecord], mode: ExpectationMode) -> ExpectationMode:
    """Turn a Customized mode into Capped(statistic of delivered amounts).

    Advertised and Capped pass through unchanged. A statistic of zero
    resolves to Advertised.
    """
    if not isinstance(mode, Customized):
        return mode
    if not history:
        raise ValueError("customized expectation needs a non-empty history")
    delivered = [h.delivered for h in history]
    if mode.statistic == "mean":
        value = statistics.fmean(delivered)
    elif mode.statistic == "median":
        value = statistics.median(delivered)
    else:
        value = _mode(delivered)
    if value <= 0:
        # nothing typical was delivered; a zero yardstick would make DS vacuous
        return Advertised()
    return Capped(value)


def parse_expectation(text: str) -> ExpectationMode:
    """Parse ``advertised``, ``capped:<mAh>`` or ``customized:<statistic>``."""
    kind, _, arg = text.strip().partition(":")
    kind = kind.lower()
    if kind == "advertised" and not arg:
        return Advertised()
    if kind == "capped":
        return Capped(float(arg))
    if kind == "customized":
        return Customized(arg or "median")
    raise ValueError(f"bad expectation mode {text!r}")


def format_expectation(mode: ExpectationMode) -> str:
    if isinstance(mode, Capped):
        return f"capped:{mode.expected_amount:g}"
    if isinstance(mode, Customized):
        return f"customized:{mode.statistic}"
    return "advertised"
