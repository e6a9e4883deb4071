"""Coupled multinomial HMC with maximal and optimal-transport couplings."""

__version__ = "0.1.0"

from .targets import TargetModel, make_builtin_target  # noqa: F401
from .integrator import PhasePoint, Trajectory, hamiltonian, leapfrog  # noqa: F401
from .kernels import KernelConfig  # noqa: F401
from .estimation import CoupledRun, run_coupled_pair, unbiased_estimate  # noqa: F401
