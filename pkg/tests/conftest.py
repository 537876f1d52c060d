import pytest

from ant import CORPUS, load_corpus
from ant.analysis import build_table
from ant.bounds import BoundedDomain

_ACCEPTANCE = {}


@pytest.fixture(scope="session")
def programs():
    return {name: load_corpus(name) for name in CORPUS}


@pytest.fixture(scope="session")
def account(programs):
    return programs["account"]


@pytest.fixture(scope="session")
def tables(programs):
    return {name: build_table(p, BoundedDomain.for_program(p)) for name, p in programs.items()}


@pytest.fixture(scope="session")
def account_table(tables):
    return tables["account"]


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid or "::test_criterion_" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call" or report.outcome != "passed":
        _ACCEPTANCE[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        n = int(name.split("_")[2])
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if _ACCEPTANCE[name] == 'passed' else 'FAIL'}  ({name})")
