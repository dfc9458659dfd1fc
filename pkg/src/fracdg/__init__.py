"""Time-stepping discontinuous Galerkin solver for subdiffusion with two
Riemann-Liouville derivatives, ``u_t - (k1 D^a + k2 D^b) u_xx = f``."""

from fracdg.dgsolver import ProblemSpec, SpaceTimeSolution, manufactured_problem, solve
from fracdg.fem1d import assemble
from fracdg.frackernel import FractionalKernel, history_block
from fracdg.mesh import SpatialPartition, make_graded_mesh, sigma_star, sigma_star_star

__all__ = [
    "FractionalKernel",
    "ProblemSpec",
    "SpaceTimeSolution",
    "SpatialPartition",
    "assemble",
    "history_block",
    "make_graded_mesh",
    "manufactured_problem",
    "sigma_star",
    "sigma_star_star",
    "solve",
]

__version__ = "0.1.0"
