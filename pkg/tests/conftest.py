import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "pkg", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("pkg")

# one fixed seed for the desk-scale acceptance runs; chosen once and pinned
DESK_SEED = 9


@pytest.fixture(scope="session")
def desk_config():
    from spinmarket.config import build_config

    return build_config(preset="desk", overrides={"model": {"seed": str(DESK_SEED)}})


@pytest.fixture(scope="session")
def desk_panel(desk_config):
    """One desk-scale simulation shared by the acceptance tests (~15 s)."""
    from spinmarket.cli import resolve_coupling
    from spinmarket.market import run_simulation

    gamma = resolve_coupling(desk_config)
    return run_simulation(desk_config.model, gamma, threads=1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
