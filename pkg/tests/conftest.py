import pathlib
import sys

import pytest

from roommates import parse_instance

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent))


def load_fixture(name):
    return parse_instance((FIXTURES / f"{name}.txt").read_text())


@pytest.fixture(scope="session")
def example1():
    return load_fixture("example1")


@pytest.fixture(scope="session")
def example2():
    return load_fixture("example2")


@pytest.fixture(scope="session")
def example3():
    return load_fixture("example3")
