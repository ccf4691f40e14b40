import os

from hypothesis import HealthCheck, settings

settings.register_profile(
    "mechgap",
    deadline=None,
    max_examples=int(os.environ.get("MECHGAP_HYPOTHESIS_EXAMPLES", "60")),
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("mechgap")

# Filled by test_acceptance.py; printed once per session so the verdicts are
# visible even when pytest captures stdout.
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
