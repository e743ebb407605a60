"""Synthetic providers, histories, requests and delivery outcomes.

Each provider has a latent reliability drawn from its environment. The
reliability decides how often past services completed, how much a failed
service still delivered, how late failed services ran, and how long the
provider usually stays. The trust engine is expected to recover it from the
generated history.

Optionally a provider behaves better in the target microcell than elsewhere
(``in_cell_boost``), and habitually visits it during the demand window
(``habit``). This is what makes context filtering matter.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .model import EnergyService, HistoryRecord, ProviderProfile, Status, TimeInterval
from .demand import RequestRecord

DAY_MINUTES = 24 * 60

RELIABILITY_RANGES = {
    "trustworthy": (0.8, 1.0),
    "neutral": (0.0, 1.0),
    "untrustworthy": (0.0, 0.2),
}
ENVIRONMENTS = tuple(RELIABILITY_RANGES)


@dataclass(frozen=True)
class EnvironmentProfile:
    kind: str
    seed: int = 0

    def __post_init__(self):
        if self.kind not in RELIABILITY_RANGES:
            raise ValueError(f"unknown environment {self.kind!r}; expected one of {ENVIRONMENTS}")


@dataclass(frozen=True)
class GroundTruthBehavior:
    provider_id: str
    reliability: float
    delivery_fraction: float
    delay_minutes: float

    def __post_init__(self):
        if not 0.0 <= self.reliability <= 1.0:
            raise ValueError(f"reliability {self.reliability} outside [0, 1]")
        if not 0.0 <= self.delivery_fraction <= 1.0:
            raise ValueError(f"delivery_fraction {self.delivery_fraction} outside [0, 1]")
        if self.delay_minutes < 0:
            raise ValueError("delay_minutes must be >= 0")


@dataclass(frozen=True)
class Table1Params:
    amount_range: tuple[float, float] = (150.0, 300.0)
    duration_range: tuple[int, int] = (10, 30)
    demand_range: tuple[float, float] = (500.0, 2500.0)
    window_minutes: int = 120
    window_start: int = 600
    microcells: tuple[str, ...] = ("A", "B", "C")
    consumers_present_range: tuple[int, int] = (1, 20)
    max_delay: float = 30.0
    in_cell_boost: float = 0.0
    habit: float = 0.75
    consumers_range: tuple[int, int] = (2, 8)
    requests_per_consumer: int = 3

    def __post_init__(self):
        lo, hi = self.amount_range
        if not 0 < lo <= hi:
            raise ValueError(f"bad amount_range {self.amount_range}")
        dlo, dhi = self.duration_range
        if not 0 <= dlo <= dhi <= self.window_minutes:
            raise ValueError(f"bad duration_range {self.duration_range} for a {self.window_minutes} min window")
        if not 0 < self.demand_range[0] <= self.demand_range[1]:
            raise ValueError(f"bad demand_range {self.demand_range}")
        if not 0 <= self.window_start <= DAY_MINUTES - self.window_minutes:
            raise ValueError("demand window must fit inside one day")
        if not self.microcells:
            raise ValueError("need at least one microcell")
        plo, phi = self.consumers_present_range
        if not 1 <= plo <= phi:
            raise ValueError(f"bad consumers_present_range {self.consumers_present_range}")
        if self.max_delay < 0 or not 0.0 <= self.in_cell_boost <= 1.0 or not 0.0 <= self.habit <= 1.0:
            raise ValueError("max_delay, in_cell_boost or habit out of range")
        clo, chi = self.consumers_range
        if not 1 <= clo <= chi or self.requests_per_consumer < 1:
            raise ValueError("bad consumer settings")

    @property
    def target_microcell(self) -> str:
        return self.microcells[0]

    @property
    def window(self) -> TimeInterval:
        return TimeInterval(self.window_start, self.window_start + self.window_minutes)


class Scenario(NamedTuple):
    providers: list[ProviderProfile]
    requests: list[RequestRecord]
    behaviors: dict[str, GroundTruthBehavior]


def _start_in(rng, window: TimeInterval, duration: int) -> int:
    return int(rng.integers(window.start, window.end - duration + 1))


def _past_records(rng, pid, n, params, reliability, fraction, delay, stay_max) -> tuple[HistoryRecord, ...]:
    p = params
    cells = rng.integers(len(p.microcells), size=n)
    durations = rng.integers(p.duration_range[0], stay_max + 1, size=n)
    habitual = (cells == 0) & (rng.random(n) < p.habit)
    # start offsets drawn as fractions so the bounds can depend on duration
    u_start = rng.random(n)
    amounts = rng.uniform(*p.amount_range, size=n)
    present = rng.integers(p.consumers_present_range[0], p.consumers_present_range[1] + 1, size=n)
    rel = np.where(cells == 0, min(1.0, reliability + p.in_cell_boost), reliability)
    completed = rng.random(n) < rel
    cancel_draw = rng.random(n) < 0.5
    u_affected = rng.random(n)
    late = int(round(delay))

    out = []
    for k in range(n):
        cell = p.microcells[cells[k]]
        dur = int(durations[k])
        lo, hi = (p.window_start, p.window_start + p.window_minutes) if habitual[k] else (0, DAY_MINUTES)
        start = lo + int(u_start[k] * (hi - dur - lo + 1))
        advertised = TimeInterval(start, start + dur)
        amount = float(amounts[k])
        service = EnergyService(f"{pid}-h{k:04d}", pid, amount, cell, advertised)
        n_present = int(present[k])
        if completed[k]:
            out.append(HistoryRecord(service, amount, cell, advertised, Status.COMPLETED, 0, n_present))
            continue
        delivered = fraction * amount
        canceled = bool(cancel_draw[k]) or delivered <= 0
        affected = int(u_affected[k] * (n_present + 1)) if canceled else 0
        actual = TimeInterval(start, advertised.end + late)
        status = Status.CANCELED if canceled else Status.PARTIAL
        out.append(HistoryRecord(service, delivered, cell, actual, status, affected, n_present))
    return tuple(out)


def _requests(rng, params) -> list[RequestRecord]:
    p = params
    total = rng.uniform(*p.demand_range)
    n = int(rng.integers(p.consumers_range[0], p.consumers_range[1] + 1))
    means = total * rng.dirichlet(np.ones(n))
    out = []
    k = p.requests_per_consumer
    for j, m in enumerate(means):
        # symmetric spread keeps each consumer's mean request at m
        spread = np.linspace(-0.2, 0.2, k) if k > 1 else np.zeros(1)
        for s in spread:
            dur = int(rng.integers(p.duration_range[0], p.duration_range[1] + 1))
            st = _start_in(rng, p.window, dur)
            out.append(RequestRecord(f"c{j:03d}", float(m * (1 + s)), TimeInterval(st, st + dur),
                                     p.target_microcell))
    return out


def generate_scenario(
    env: EnvironmentProfile,
    n_providers: int,
    history_len: int,
    params: Table1Params = Table1Params(),
) -> Scenario:
    """Generate providers with histories, consumer requests and ground truth.

    Offers are placed in the target microcell inside the demand window, and
    the returned behaviors describe each provider there. Deterministic in
    ``env.seed``.
    """
    if n_providers < 1 or history_len < 1:
        raise ValueError("n_providers and history_len must be >= 1")
    rng = np.random.default_rng(env.seed)
    r_lo, r_hi = RELIABILITY_RANGES[env.kind]
    d_lo, d_hi = params.duration_range
    providers, behaviors = [], {}
    for i in range(n_providers):
        pid = f"p{i:05d}"
        reliability = float(rng.uniform(r_lo, r_hi))
        fraction = min(0.99, float(rng.uniform(0.0, reliability)))
        delay = params.max_delay * (1.0 - reliability)
        # unreliable providers habitually leave early
        stay_max = int(round(d_lo + (d_hi - d_lo) * reliability))
        history = _past_records(rng, pid, history_len, params, reliability, fraction, delay, stay_max)
        duration = int(rng.integers(d_lo, d_hi + 1))
        start = _start_in(rng, params.window, duration)
        offer = EnergyService(f"{pid}-s", pid, float(rng.uniform(*params.amount_range)),
                              params.target_microcell, TimeInterval(start, start + duration))
        providers.append(ProviderProfile(pid, offer, history))
        behaviors[pid] = GroundTruthBehavior(
            pid, min(1.0, reliability + params.in_cell_boost), fraction, delay)
    return Scenario(providers, _requests(rng, params), behaviors)


def _service_rng(seed: int, service_id: str):
    return np.random.default_rng([seed, zlib.crc32(service_id.encode())])


def simulate_delivery(result, behaviors: Mapping[str, GroundTruthBehavior], seed: int):
    """Draw what each selected service actually delivers.

    The draw for a service depends only on ``seed`` and its id, so every
    strategy that picks the same service sees the same outcome. A failed
    service delivers ``delivery_fraction`` of its allocated energy.
    """
    out = []
    for scored, allocated in zip(result.selected, result.allocated):
        service = scored.service
        try:
            b = behaviors[service.provider_id]
        except KeyError:
            raise KeyError(f"no ground-truth behavior for provider {service.provider_id}") from None
        completed = _service_rng(seed, service.service_id).random() < b.reliability
        out.append((service, allocated if completed else b.delivery_fraction * allocated))
    return out


def history_records(providers: Sequence[ProviderProfile]) -> list[HistoryRecord]:
    return [h for p in providers for h in p.history]
