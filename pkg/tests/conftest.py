import pytest

from honeyauth.model import toy_corpus, train_model
from honeyauth.policyguard import Policy


@pytest.fixture(scope="session")
def corpus():
    return toy_corpus()


@pytest.fixture(scope="session")
def model(corpus):
    return train_model(corpus)


@pytest.fixture
def policy():
    return Policy()


def pytest_terminal_summary(terminalreporter):
    from tests import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(test_acceptance.RESULTS, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
