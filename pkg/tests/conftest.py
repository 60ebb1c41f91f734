import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from timelens import EscortPulse, GaussianJSA, LensConfig

import oracles


@pytest.fixture
def exp_state() -> GaussianJSA:
    return GaussianJSA(
        omega1=oracles.OMEGA1,
        omegah=oracles.OMEGAH,
        sigma1=oracles.SIGMA1,
        sigmah=oracles.SIGMAH,
        rho=oracles.RHO_IN,
    )


@pytest.fixture
def exp_escort() -> EscortPulse:
    return EscortPulse(center=oracles.OMEGAE, sigma=oracles.SIGMAE, chirp=oracles.AE)


@pytest.fixture
def exp_lens(exp_escort) -> LensConfig:
    return LensConfig(signal_chirp=oracles.A1, escort=exp_escort)
