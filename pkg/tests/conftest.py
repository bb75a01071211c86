import os
import sys

from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

# derandomized so that every run draws the same examples
settings.register_profile(
    "repro", derandomize=True, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repro"))

# criterion number -> list of (verdict, detail); filled by test_acceptance
ACCEPTANCE = {}


def record(criterion, passed, detail, verdict=None):
    verdict = verdict or ("PASS" if passed else "FAIL")
    ACCEPTANCE.setdefault(criterion, []).append((verdict, detail))
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        for verdict, detail in ACCEPTANCE[n]:
            terminalreporter.write_line(f"criterion {n:2d}: {verdict:4s} {detail}")
