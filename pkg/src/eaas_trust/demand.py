"""Demand aggregation and QoE scoring."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .model import EnergyDemand, EnergyService, PathLike, TimeInterval, _check_header


@dataclass(frozen=True, slots=True)
class RequestRecord:
    consumer_id: str
    amount: float
    slot: TimeInterval
    microcell: str

    def __post_init__(self):
        if not self.amount > 0:
            raise ValueError(f"request by {self.consumer_id}: amount must be > 0")


Predictor = Callable[[Sequence[RequestRecord], TimeInterval], float]


def mean_request(records: Sequence[RequestRecord], slot: TimeInterval) -> float:
    """Default predictor: mean amount of the consumer's requests overlapping ``slot``."""
    hits = [r.amount for r in records if r.slot.overlaps(slot)]
    return sum(hits) / len(hits) if hits else 0.0


def aggregate_demand(
    consumer_histories: Iterable[RequestRecord],
    slot: TimeInterval,
    microcell: str,
    predictor: Predictor = mean_request,
) -> EnergyDemand:
    """Sum each consumer's predicted request for ``slot`` in ``microcell``."""
    if slot.duration <= 0:
        raise ValueError("demand slot must have positive length")
    by_consumer: dict[str, list[RequestRecord]] = {}
    for r in consumer_histories:
        if r.microcell == microcell and r.slot.overlaps(slot):
            by_consumer.setdefault(r.consumer_id, []).append(r)
    if not by_consumer:
        raise ValueError(f"no request history overlaps slot {slot} in microcell {microcell}")
    total = sum(predictor(recs, slot) for recs in by_consumer.values())
    return EnergyDemand(total, slot, microcell)


def qoe_ratio(allocated: Iterable[tuple[EnergyService, float]], demand: EnergyDemand) -> float:
    """Unclamped delivered / demand."""
    return sum(d for _, d in allocated) / demand.amount


def qoe(allocated: Iterable[tuple[EnergyService, float]], demand: EnergyDemand) -> float:
    return min(1.0, qoe_ratio(allocated, demand))


def expected_qoe(selected: Iterable[EnergyService], demand: EnergyDemand) -> float:
    """Trust-weighted supply over demand, clamped to 1."""
    total = 0.0
    for s in selected:
        if s.trust is None:
            raise ValueError(f"service {s.service_id} has no trust score")
        total += s.amount * s.trust
    return min(1.0, total / demand.amount)


REQUEST_COLUMNS = ("consumer_id", "microcell", "amount_mAh", "start_min", "end_min")


def write_requests_csv(path: PathLike, requests: Iterable[RequestRecord]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(REQUEST_COLUMNS)
        for r in requests:
            w.writerow([r.consumer_id, r.microcell, repr(r.amount), r.slot.start, r.slot.end])


def read_requests_csv(path: PathLike) -> list[RequestRecord]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        _check_header(path, next(reader, None), REQUEST_COLUMNS)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                cid, cell, amount, st, en = row
                out.append(RequestRecord(cid, float(amount), TimeInterval(int(st), int(en)), cell))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
    return out
