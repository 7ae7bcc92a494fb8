"""L1 / finite element solver for subdiffusion with a constant delay.

Uniform and symmetric graded temporal meshes, P1 elements in space, exact
fractional calculus on shifted-power expansions for manufactured data.
"""

from .fem1d import SingularSystemError
from .mesh import SpatialMesh, TemporalMesh, build_spatial, build_temporal
from .powcalc import PowerExpansion, PowerTerm
from .problems import example1_case1, example1_case2, get_case
from .solver import ProblemSpec, Separable, SolveRecord, SolverDivergence, solve

__version__ = "0.1.0"

__all__ = [
    "PowerExpansion",
    "PowerTerm",
    "ProblemSpec",
    "Separable",
    "SingularSystemError",
    "SolveRecord",
    "SolverDivergence",
    "SpatialMesh",
    "TemporalMesh",
    "build_spatial",
    "build_temporal",
    "example1_case1",
    "example1_case2",
    "get_case",
    "solve",
]
