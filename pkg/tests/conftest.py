import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

FROZEN = json.loads((Path(__file__).parent / "frozen_values.json").read_text())


@pytest.fixture(scope="session")
def frozen():
    """Expected values derived independently by scripts/derive_frozen_values.py."""
    return {k: np.array(v["value"]) for k, v in FROZEN.items()}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion; a test that raises before recording is shown as FAIL."""
    num = int(request.node.name.split("_")[1])
    ACCEPTANCE[num] = (False, "did not complete")

    def record(ok: bool, detail: str):
        ACCEPTANCE[num] = (bool(ok), detail)
        assert ok, detail
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
