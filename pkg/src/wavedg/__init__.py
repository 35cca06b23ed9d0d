"""Energy-based staggered and non-staggered DG for the scalar wave equation."""

from .analysis import (
    OneStepMatrix,
    SpectrumReport,
    bound_sweep,
    build_one_step_matrix,
    check_operator_bounds,
    eig_moduli,
    spectral_radius_semidiscrete,
)
from .basis import ReferenceBasis, gauss_rule, legendre_table
from .dg1d import assemble_nonstaggered_1d, assemble_staggered_1d, l2_error, project_initial_data_1d
from .dg2d import ManufacturedSolution, WaveSpeedField, assemble_staggered_2d, project_initial_data
from .mesh import DofLayout, StaggeredMesh1D, StaggeredMesh2D, build_mesh_1d, build_mesh_2d
from .operator import BoundaryCondition, DgState, FluxParams, SemiDiscreteOperator
from .timeint import LtsConfig, TaylorScheme, evolve, lts_step, make_lts, taylor_step

__version__ = "0.1.0"
