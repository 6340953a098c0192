import numpy as np
import pytest

from gauss_distill import fock_engine
from gauss_distill.configuration import Command, RunConfig, Tolerances


@pytest.fixture
def tolerances():
    return Tolerances()


@pytest.fixture
def lossy_state():
    """Fock representation of the state (r = 1, T = 0.5) at d = 6."""
    return fock_engine.lossy_tmsv(np.tanh(1.0), 0.5, 6)


@pytest.fixture
def truncated_lossy_state():
    """(|00⟩ + |11⟩)/√2 after loss T = 0.5 on both modes."""
    rho = fock_engine.truncated_tmsv(1.0, 4).to_density()
    rho = fock_engine.apply_loss(rho, 0.5, 0)
    return fock_engine.apply_loss(rho, 0.5, 1)


@pytest.fixture
def validate_config(tmp_path):
    return RunConfig(
        command=Command.VALIDATE, output_dir=str(tmp_path), jobs=1
    )
