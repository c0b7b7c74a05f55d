from __future__ import annotations

import pytest

from pneusim import default_calibration, load_bundled_scene, load_bundled_trace


@pytest.fixture(scope="session")
def tables():
    return default_calibration()


@pytest.fixture(scope="session")
def frozen_meat():
    return load_bundled_scene("frozen_meat")


@pytest.fixture(scope="session")
def abrasive_ice():
    return load_bundled_scene("abrasive_ice")


@pytest.fixture(scope="session")
def push_button():
    return load_bundled_scene("push_button")


@pytest.fixture(scope="session")
def stationary_touch():
    return load_bundled_trace("stationary_touch")
