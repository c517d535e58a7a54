import random
import sys

import pytest
from hypothesis import settings

from multicontact.expr import SamplingPolicy
from multicontact.fixtures import FIXTURES
from multicontact.linfty import LinftyContext
from multicontact.symplectization import build_symplectization

settings.register_profile("default", max_examples=25, deadline=None)
settings.load_profile("default")


@pytest.fixture
def policy():
    return SamplingPolicy()


@pytest.fixture
def rng():
    return random.Random(20261016)


@pytest.fixture(params=sorted(FIXTURES))
def fixture_name(request):
    return request.param


@pytest.fixture(scope="session")
def symplectizations():
    return {name: build_symplectization(make()) for name, make in FIXTURES.items()}


@pytest.fixture(scope="session")
def ctx_a(symplectizations):
    return LinftyContext(symplectizations["A"])


@pytest.fixture(scope="session")
def ctx_b(symplectizations):
    return LinftyContext(symplectizations["B"])


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
