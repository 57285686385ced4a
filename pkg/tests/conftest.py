"""Shared fixtures: shipped geometries, kernel backends and the acceptance summary."""
from __future__ import annotations

import json
from importlib import resources

import pytest

from randorth import kernels
from randorth.geometry import WeightedSet

GEOMETRIES = ("circle", "interval", "ginibre-disk", "polydisk", "ball", "ellipsoid")


def load_geometry(name: str) -> WeightedSet:
    text = resources.files("randorth").joinpath("configs", f"{name}.geom.json").read_text()
    return WeightedSet.from_json(json.loads(text))


def load_shipped_config(name: str) -> dict:
    return json.loads(resources.files("randorth").joinpath("configs", f"{name}.json").read_text())


@pytest.fixture(scope="session")
def geometries() -> dict[str, WeightedSet]:
    return {name: load_geometry(name) for name in GEOMETRIES}


@pytest.fixture(params=kernels.AVAILABLE)
def backend(request):
    """Run the test once per available kernel backend."""
    previous = kernels.BACKEND
    kernels.use_backend(request.param)
    yield request.param
    kernels.use_backend(previous)


# ---------------------------------------------------------------------------
# acceptance summary: one line per criterion at the end of the session

_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def record_criterion():
    def record(number: int, passed: bool, detail: str, advisory: bool = False) -> None:
        status = "PASS" if passed else ("ADVISORY-FAIL" if advisory else "FAIL")
        _ACCEPTANCE[number] = f"criterion {number:2d}: {status:13s} {detail}"
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[number])
