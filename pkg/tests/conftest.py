"""Shared fixtures: compiled-kernel warmup and default domain objects."""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from phlink.channel import ChannelGeometry, TransportParams, simulate
from phlink.chemistry import gating_solution, supply_solution
from phlink.transmitter import GatingModel, InletSignal


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Trigger JIT compilation once so timed tests measure physics, not codegen."""
    inlet = InletSignal(
        dt=0.1, f_in=np.ones(3), u=np.full(3, 0.02)
    )
    simulate(inlet, ChannelGeometry(), TransportParams(n=16))


@pytest.fixture(scope="session")
def solutions():
    return supply_solution(), gating_solution()


@pytest.fixture(scope="session")
def gating_model():
    return GatingModel()
