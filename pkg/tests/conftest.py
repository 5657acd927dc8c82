import numpy as np
import pytest

from rostexplore import kernels
from rostexplore.topic_model import Hyperparams, TopicModel


@pytest.fixture(params=sorted(kernels.BACKENDS))
def backend(request):
    """Run the test once per available kernel backend."""
    previous = kernels.BACKEND
    kernels.use(request.param)
    yield request.param
    kernels.use(previous)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def toy_state():
    """1x1 world, K=V=2, delta=0, alpha=beta=1: nwk=[[2,0],[0,1]], cell hist=[2,1]."""
    hyper = Hyperparams(K=2, V=2, alpha=1.0, beta=1.0, delta=0, tau=0.5)
    m = TopicModel(hyper, 1, 1)
    m._append((0, 0), [0, 0, 1])
    m.assign(1, [0, 0, 1])
    return m


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion, then assert it."""
    def record(cid, ok, detail):
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {cid}: {detail}")
        assert ok, f"{cid}: {detail}"
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
