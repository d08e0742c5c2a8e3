"""Shared fixtures: model parameters and the pre-built scenario library.

The library fixture file in tests/data was produced with build_library on
a coarse grid (limits 30/50/100 km/h, 0.5 km/h velocity step, one ramp
per case) and is loaded once per session; rebuilding it takes about a
minute and is exercised separately on a tiny grid.
"""

from pathlib import Path

import pytest

from paretodrive.controller import MpcConfig
from paretodrive.library import Library, load
from paretodrive.params import ModelParams
from paretodrive.scenarios import Case, GridConfig
from paretodrive.solver import SolverConfig

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def params() -> ModelParams:
    return ModelParams()


@pytest.fixture(scope="session")
def solver_config() -> SolverConfig:
    return SolverConfig()


@pytest.fixture(scope="session")
def mpc_config() -> MpcConfig:
    return MpcConfig()


@pytest.fixture(scope="session")
def demo_grid() -> GridConfig:
    """The grid the bundled test library was built with."""
    return GridConfig(v_lim_set=(30.0, 50.0, 100.0), v_step=0.5, v_cap=110.0,
                      ramps_accel=(0.1,), ramps_decel=(0.2,),
                      ramps_stop=(0.5,),
                      cases=(Case.CONSTANT, Case.ACCELERATE, Case.DECELERATE))


@pytest.fixture(scope="session")
def demo_library(params, solver_config, demo_grid) -> Library:
    from paretodrive.library import config_hash
    path = DATA / "demo_library.txt"
    return load(path, expect_hash=config_hash(params, solver_config, demo_grid))
