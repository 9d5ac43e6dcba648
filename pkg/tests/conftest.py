from pathlib import Path

import pytest

FIXTURES = Path(__file__).resolve().parent / "fixtures"


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


def zone_records(rows):
    return [{"zone_id": z, "name": "", "population": p, "area_km2": a} for z, p, a in rows]


def flow_records(rows):
    return [{"origin": o, "destination": d, "count": c} for o, d, c in rows]


@pytest.fixture
def two_zone():
    from migimpact import load_system
    return load_system(zone_records([("A", 100, 50), ("B", 100, 10)]),
                       flow_records([("A", "B", 10), ("B", "A", 4)]))


ACCEPTANCE_LINES: dict[str, str] = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line per criterion; printed in the terminal summary."""
    name = request.node.get_closest_marker("acceptance").args[0]
    info = {"detail": ""}
    yield info
    ACCEPTANCE_LINES[name] = info["detail"]


_OUTCOMES: dict[str, str] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("acceptance")
    if m and (rep.when == "call" or (rep.when == "setup" and rep.failed)):
        _OUTCOMES[m.args[0]] = "PASS" if rep.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_OUTCOMES, key=lambda s: int(s.split()[0].lstrip("C"))):
        detail = ACCEPTANCE_LINES.get(name, "")
        terminalreporter.write_line(f"{_OUTCOMES[name]}  {name}" + (f"  ({detail})" if detail else ""))
