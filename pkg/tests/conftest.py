from __future__ import annotations

import pytest

from helpers import load_suite, make_separable_dataset


@pytest.fixture(scope="session")
def earth_dataset():
    return load_suite("earth_science")


@pytest.fixture(scope="session")
def ml_dataset():
    return load_suite("machine_learning")


@pytest.fixture(scope="session")
def separable_dataset():
    return make_separable_dataset()
