import re
from pathlib import Path

import pytest

from locreq import (
    AxisSpace,
    ConfidenceLevel,
    DofMask,
    LocalizationFunctionSpec,
    MarginVector,
    VelocityBound,
)

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
PALLET_FIXTURE = FIXTURES / "pallet_booking.json"
SLOW_ILS_FIXTURE = FIXTURES / "pallet_booking_slow_ils.json"
GOLDEN = FIXTURES / "golden"


def make_pallet_spec(**overrides) -> LocalizationFunctionSpec:
    """Pallet-in-compartment function with requirement margin (0.3, 0.5, 0.15) m."""
    kw = dict(
        name="pallet_to_storage_compartment",
        entity="pallet",
        dof=DofMask(["x", "y", "z"]),
        interest_space=AxisSpace(x=(0.0, 1.9), y=(0.0, 1.2), z=(0.0, 1.2)),
        motion_space=AxisSpace(x=(0.45, 1.45), y=(0.55, 0.65), z=(0.15, 0.15)),
        safety_margin=MarginVector(x=0.15, y=0.05, z=0.0),
        max_velocity=VelocityBound(x=0.1, y=0.7, z=0.1),
        confidence=ConfidenceLevel.from_sigma(4.0),
    )
    kw.update(overrides)
    return LocalizationFunctionSpec(**kw)


@pytest.fixture
def pallet_spec():
    return make_pallet_spec()


# --- acceptance summary ---------------------------------------------------

_AC_RESULTS: dict[str, list[str]] = {}
_AC_NAME = re.compile(r"test_(ac\d+)")


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    m = _AC_NAME.search(report.nodeid)
    if not m:
        return
    if report.when == "call" or report.outcome != "passed":
        _AC_RESULTS.setdefault(m.group(1).upper(), []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _AC_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for ac in sorted(_AC_RESULTS, key=lambda k: int(k[2:])):
        outcomes = _AC_RESULTS[ac]
        ok = all(o == "passed" for o in outcomes)
        terminalreporter.write_line(f"{ac}: {'PASS' if ok else 'FAIL'} ({len(outcomes)} check(s))")
