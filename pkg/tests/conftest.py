import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from cglram import MatrixStack, ProjectorPair

settings.register_profile("default", deadline=None, max_examples=50,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=200)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")
DIGIT_IMAGES = os.path.join(DATA_DIR, "digits-images-idx3-ubyte")
DIGIT_LABELS = os.path.join(DATA_DIR, "digits-labels-idx1-ubyte")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_pair(rng, r, c, k):
    L, _ = np.linalg.qr(rng.standard_normal((r, k)))
    R, _ = np.linalg.qr(rng.standard_normal((c, k)))
    return ProjectorPair(L, R)


def random_stack(rng, N, r, c):
    return MatrixStack(rng.standard_normal((N, r, c)))


# acceptance criteria register here; the summary prints after every run
ACCEPTANCE = {}


def record_criterion(number, title, ok, detail=""):
    ACCEPTANCE[number] = (title, bool(ok), detail)
    assert ok, f"criterion {number} ({title}) failed: {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(
            f"[{'PASS' if ok else 'FAIL'}] {n:2d}. {title}" + (f" -- {detail}" if detail else ""))
