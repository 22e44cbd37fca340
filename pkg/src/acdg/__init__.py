"""acdg: interior-penalty DG discretization of the Allen-Cahn equation
with energy-stable averaged-gradient time stepping and adaptive step control."""

from .assembly import (AssembledOperator, KappaField, assemble_mass,
                       assemble_reaction, assemble_reaction_jacobian,
                       assemble_stiffness, default_sigma, discrete_energy,
                       potential_integral)
from .config import (ConfigError, RunConfig, build_config, build_mesh,
                     build_space, initial_coefficients, load_config,
                     load_preset, random_initial_field, run_from_config)
from .dg_core import DGSpace, eval_field, l2_project, nodal_interpolate
from .driver import (AdaptiveSettings, AdaptiveStepError, AllenCahnSystem,
                     ModelConfig, RunTrace, detect_ripening, estimate_error,
                     propose_step, run_adaptive)
from .integrators import (GradientFlowSystem, NewtonSettings, StepResult,
                          avf_residual, avf_step, backward_euler_step)
from .linalg import LinearSolveError, SparseMatrix, solve_linear, spmv
from .mesh import Mesh, build_mesh_1d, build_mesh_2d
from .output import write_outputs, write_sweep
from .physics import (MobilitySpec, PotentialSpec, free_energy_density,
                      mobility, reaction, reaction_derivative)

__version__ = "0.1.0"
