"""On-lattice higher-order lattice Boltzmann models: discovery, equilibria and a thermal shock tube."""
from .equilibrium import build_projector, discrete_equilibrium, macro_from_populations
from .kernels import BACKEND
from .lattice import LatticeModel, ModelSpec, build_velocities, orbit, orbit_size, velocity_count
from .moments import MacroState, enumerate_constraints, equation_count, gaussian_moment
from .solver import assemble, solve, verify

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "LatticeModel", "MacroState", "ModelSpec", "assemble", "build_projector",
    "build_velocities", "discrete_equilibrium", "enumerate_constraints", "equation_count",
    "gaussian_moment", "macro_from_populations", "orbit", "orbit_size", "solve", "velocity_count", "verify",
]
