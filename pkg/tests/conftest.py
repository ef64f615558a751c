import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from siot_trust.behavior import default_policies  # noqa: E402
from siot_trust.trace import GeneratorConfig, generate_trace  # noqa: E402


@pytest.fixture(scope="session")
def small_trace():
    """20 objects, 2,000 events, a mix of every behaviour."""
    from siot_trust.behavior import Kind

    cfg = GeneratorConfig(
        object_count=20, target_event_count=2000, mean_friends_per_object=4,
        malicious_fraction=0.3, seed=17,
        malicious_mix={Kind.MALICIOUS: 1, Kind.ON_OFF: 1, Kind.GOOD_TO_MALICIOUS: 1},
        good_mix={Kind.GOOD: 3, Kind.MALICIOUS_TO_GOOD: 1})
    return generate_trace(cfg)


@pytest.fixture(scope="session")
def small_policies(small_trace):
    return default_policies(small_trace.behaviors)


# criterion number -> (passed, label, seconds); filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, label, seconds = ACCEPTANCE[number]
        terminalreporter.write_line(
            f"{'PASS' if passed else 'FAIL'}  criterion {number}: {label} ({seconds:.2f} s)")
