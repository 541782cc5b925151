import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from deps.sleigh import SleighParams
from deps.suslov import MassTensor

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def generic_J():
    return MassTensor(1.0, 2.0, 3.0, 0.1, 0.3, 0.2)


@pytest.fixture
def sleigh_b0():
    return SleighParams(m=1.0, J=1.5, a=1.0, b=0.0)


@pytest.fixture
def sleigh_b():
    return SleighParams(m=1.2, J=0.8, a=0.7, b=0.3)


def pytest_terminal_summary(terminalreporter):
    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        title, ok, detail = results[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {n:2d} {title}: {detail}")
