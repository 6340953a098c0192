"""Gaussian Entanglement Distillation

Simulates the distillation of symmetric two-mode Gaussian entanglement by
two-copy de-Gaussification followed by iterative Gaussification.  This
involves

- the covariance matrix description of symmetric Gaussian states and of
  Gaussian completely positive maps,
- a truncated Fock-space engine for the non-Gaussian filter steps,
- the asymptotic Gaussian state of the Gaussification procedure,
- nested distillation stages with optional tuning of the detection
  parameter, and
- a command line front end that exports the results as CSV files with a
  manifest for reproduction.
"""

__copyright__ = "Copyright (c) 2026, the gauss_distill developers"
__license__ = "BSD 3-Clause"
__version__ = "1.0.0"

from .gaussian_core import (  # noqa
    SymmetricGaussianState,
    ChannelParametrization,
    cs_from_rt,
    rt_from_cs,
    epsilon_from_cs,
    purity,
    eof_symmetric,
)

from .fock_engine import FockArray, WeightedState, lossy_tmsv  # noqa
from .gaussify import asymptotic_state, iterate_to_convergence  # noqa
from .degauss import two_copy_degauss  # noqa
from .protocol import (  # noqa
    ProtocolConfig,
    StageReport,
    run_stage,
    tune_q,
    nested_protocol,
)
