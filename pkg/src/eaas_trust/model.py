"""Domain types for crowdsourced IoT energy services.

Times are integer minutes since the start of the simulation day; energy is
float mAh. All types are frozen and validated on construction, so values
read from CSV files are checked rather than trusted.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

PathLike = Union[str, Path]


@dataclass(frozen=True, slots=True)
class TimeInterval:
    start: int
    end: int

    def __post_init__(self):
        if self.start > self.end:
            raise ValueError(f"interval start {self.start} after end {self.end}")

    @property
    def duration(self) -> int:
        return self.end - self.start

    def within(self, other: "TimeInterval") -> bool:
        """True if this interval is contained in ``other`` (inclusive bounds)."""
        return other.start <= self.start and self.end <= other.end

    def overlaps(self, other: "TimeInterval") -> bool:
        return self.start < other.end and other.start < self.end


@dataclass(frozen=True, slots=True)
class EnergyService:
    """An advertised energy offer. ``trust`` is filled in by the trust engine."""

    service_id: str
    provider_id: str
    amount: float
    location: str
    interval: TimeInterval
    trust: Optional[float] = None

    def __post_init__(self):
        if not self.amount > 0:
            raise ValueError(f"service {self.service_id}: amount must be > 0, got {self.amount}")
        if self.trust is not None and not 0.0 <= self.trust <= 1.0:
            raise ValueError(f"service {self.service_id}: trust {self.trust} outside [0, 1]")


class Status(str, enum.Enum):
    COMPLETED = "completed"
    PARTIAL = "partial"
    CANCELED = "canceled"


@dataclass(frozen=True, slots=True)
class HistoryRecord:
    """One past provisioning of ``service``.

    ``status`` and the consumer counts are needed by the success-rate and
    failure-impact scores. A completed record delivered exactly the advertised
    amount; a partial one delivered something short of it without the
    provider leaving; a canceled one was cut off, and ``affected_consumers``
    of the ``consumers_present`` in the microcell were receiving from it.
    """

    service: EnergyService
    delivered: float
    microcell: str
    actual_interval: TimeInterval
    status: Status
    affected_consumers: int = 0
    consumers_present: int = 1

    def __post_init__(self):
        object.__setattr__(self, "status", Status(self.status))
        sid = self.service.service_id
        if not 0.0 <= self.delivered <= self.service.amount:
            raise ValueError(
                f"record {sid}: delivered {self.delivered} outside [0, {self.service.amount}]"
            )
        full = self.delivered == self.service.amount
        if (self.status is Status.COMPLETED) != full:
            raise ValueError(
                f"record {sid}: status {self.status.value} inconsistent with "
                f"delivered {self.delivered} of {self.service.amount}"
            )
        if self.status is Status.PARTIAL and self.delivered <= 0:
            raise ValueError(f"record {sid}: partial delivery must be > 0")
        if self.consumers_present < 1:
            raise ValueError(f"record {sid}: consumers_present must be >= 1")
        if not 0 <= self.affected_consumers <= self.consumers_present:
            raise ValueError(
                f"record {sid}: affected_consumers {self.affected_consumers} "
                f"outside [0, {self.consumers_present}]"
            )
        if self.status is not Status.CANCELED and self.affected_consumers != 0:
            raise ValueError(f"record {sid}: only canceled records may affect consumers")

    @property
    def provider_id(self) -> str:
        return self.service.provider_id


@dataclass(frozen=True, slots=True)
class ProviderProfile:
    provider_id: str
    offered_service: EnergyService
    history: tuple[HistoryRecord, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "history", tuple(self.history))
        if self.offered_service.provider_id != self.provider_id:
            raise ValueError(
                f"offered service belongs to {self.offered_service.provider_id}, "
                f"not {self.provider_id}"
            )


@dataclass(frozen=True, slots=True)
class EnergyDemand:
    amount: float
    slot: TimeInterval
    microcell: str

    def __post_init__(self):
        if not self.amount > 0:
            raise ValueError(f"demand must be > 0, got {self.amount}")


# -- CSV formats ---------------------------------------------------------------

HISTORY_COLUMNS = (
    "provider_id", "service_id", "microcell", "advertised_mAh", "delivered_mAh",
    "adv_start_min", "adv_end_min", "act_start_min", "act_end_min", "status",
    "affected_consumers", "consumers_present",
)

OFFER_COLUMNS = ("provider_id", "service_id", "microcell", "amount_mAh", "start_min", "end_min")


def _check_header(path, header, expected):
    if header is None or tuple(h.strip() for h in header) != expected:
        raise ValueError(f"{path}: expected header {','.join(expected)}, got {header}")


def write_history_csv(path: PathLike, records: Iterable[HistoryRecord]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(HISTORY_COLUMNS)
        for r in records:
            s = r.service
            w.writerow([
                s.provider_id, s.service_id, r.microcell, repr(s.amount), repr(r.delivered),
                s.interval.start, s.interval.end, r.actual_interval.start, r.actual_interval.end,
                r.status.value, r.affected_consumers, r.consumers_present,
            ])


def read_history_csv(path: PathLike) -> list[HistoryRecord]:
    """Read history rows. The advertised service is placed in the row's microcell."""
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        _check_header(path, next(reader, None), HISTORY_COLUMNS)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                (pid, sid, cell, adv, dele, ast, aen, xst, xen, status, aff, present) = row
                service = EnergyService(sid, pid, float(adv), cell, TimeInterval(int(ast), int(aen)))
                out.append(HistoryRecord(
                    service=service,
                    delivered=float(dele),
                    microcell=cell,
                    actual_interval=TimeInterval(int(xst), int(xen)),
                    status=Status(status),
                    affected_consumers=int(aff),
                    consumers_present=int(present),
                ))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
    return out


def write_offers_csv(path: PathLike, services: Iterable[EnergyService]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(OFFER_COLUMNS)
        for s in services:
            w.writerow([s.provider_id, s.service_id, s.location, repr(s.amount),
                        s.interval.start, s.interval.end])


def read_offers_csv(path: PathLike) -> list[EnergyService]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        _check_header(path, next(reader, None), OFFER_COLUMNS)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                pid, sid, cell, amount, st, en = row
                out.append(EnergyService(sid, pid, float(amount), cell, TimeInterval(int(st), int(en))))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
    return out


def build_profiles(offers: Sequence[EnergyService], records: Iterable[HistoryRecord]) -> list[ProviderProfile]:
    """Join offers with history rows by provider id, keeping file order."""
    by_provider: dict[str, list[HistoryRecord]] = {}
    for r in records:
        by_provider.setdefault(r.provider_id, []).append(r)
    return [ProviderProfile(s.provider_id, s, tuple(by_provider.get(s.provider_id, ())))
            for s in offers]
