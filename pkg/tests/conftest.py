import pytest

from eaas_trust.composition import ScoredService
from eaas_trust.model import EnergyService, HistoryRecord, Status, TimeInterval
from eaas_trust.trust import TrustAttributes

_ACCEPTANCE = []


def service(sid="s", pid="p", amount=100.0, start=0, end=20, location="A", trust=None):
    return EnergyService(sid, pid, float(amount), location, TimeInterval(start, end), trust)


def record(
    advertised=100.0,
    delivered=None,
    *,
    status=None,
    microcell="A",
    start=0,
    end=20,
    delay=0,
    affected=0,
    present=10,
    sid="h",
    pid="p",
):
    """History record with sensible defaults: a full, on-time delivery."""
    delivered = advertised if delivered is None else delivered
    if status is None:
        status = Status.COMPLETED if delivered == advertised else Status.PARTIAL
    s = service(sid, pid, advertised, start, end, microcell)
    return HistoryRecord(s, float(delivered), microcell, TimeInterval(start, end + delay),
                         status, affected, present)


ONES = TrustAttributes(1.0, 1.0, 1.0, 1.0, 1.0)


def scored(pid, trust, amount=200.0, start=600, end=620, sid=None):
    s = service(sid or f"{pid}-s", pid, amount, start, end, trust=trust)
    return ScoredService(s, trust, ONES)


@pytest.fixture
def criterion():
    """Record an acceptance criterion outcome for the end-of-run summary."""
    def report(number, name, passed, detail=""):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {name}"
        if detail:
            line += f" ({detail})"
        _ACCEPTANCE.append((number, line))
        print(line)
        return passed
    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
