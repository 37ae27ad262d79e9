import functools

import pytest
from hypothesis import HealthCheck, settings

from adscmc import foliation as fol
from adscmc.background import BackgroundModel
from adscmc.metric import PerturbedMetric, background_family, sphere_block_family, standard_family
from adscmc.sphere import SphereGrid

settings.register_profile("adscmc", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("adscmc")

ACCEPTANCE_LINES = []


@functools.lru_cache(maxsize=None)
def model(m=1.0):
    return BackgroundModel(m)


@functools.lru_cache(maxsize=None)
def grid(L=15):
    return SphereGrid(L)


@functools.lru_cache(maxsize=None)
def metric(family="background", eps=0.0, m=1.0):
    spec = {"background": lambda: background_family(),
            "standard": lambda: standard_family(eps),
            "sphere_block": lambda: sphere_block_family(eps)}[family]()
    return PerturbedMetric(model(m), spec)


@functools.lru_cache(maxsize=None)
def foliation(family="background", eps=0.0, s_max=8.0, ds=0.1, variant="minimal", L=15):
    return fol.foliate(metric(family, eps), s_max=s_max, ds=ds, grid=grid(L), variant=variant)


def record(line):
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def std_foliation():
    return foliation("standard", 1e-3)


@pytest.fixture
def bg_foliation():
    return foliation()
