"""Tour of the library pieces: mesh, broken space, operators, one step.

Run:  python3 demos/building_blocks.py
"""

import numpy as np

import acdg
from acdg.assembly import assemble_mass, assemble_stiffness
from acdg.driver import AllenCahnSystem

# a periodic triangulated square and a piecewise-linear broken space
mesh = acdg.build_mesh_2d(2 * np.pi, 2 * np.pi, 8, 8)
space = acdg.DGSpace(mesh, degree=1)
print(f"mesh: {mesh.n_elements} triangles, {len(mesh.interior_edges)} interior edges, "
      f"{len(mesh.periodic_pairs)} periodic pairs")
print(f"space: {space.n_dofs} degrees of freedom")

# project an initial field and measure its broken energy
xi = acdg.l2_project(space, lambda x, y: 0.1 * np.cos(x) * np.sin(y))
model = acdg.ModelConfig(
    epsilon=0.3,
    potential=acdg.PotentialSpec("double_well"),
    mobility=acdg.MobilitySpec("constant", beta=1.0),
    sigma=acdg.default_sigma(space.degree, space.dim),
)
e0 = acdg.discrete_energy(space, xi, model.epsilon, model.sigma, model.potential)
print(f"initial energy: {e0:.6f}")

# the operators behind one implicit step
mass = assemble_mass(space)
stiffness = assemble_stiffness(space, model.epsilon ** 2, model.sigma)
print(f"mass nnz {mass.matrix.csr.nnz}, stiffness nnz {stiffness.matrix.csr.nnz}")

system = AllenCahnSystem(space, model, xi, mass, stiffness)
for dt in (0.1, 1.0, 10.0):
    res = acdg.avf_step(xi, dt, system)
    e1 = acdg.discrete_energy(space, res.xi_next, model.epsilon, model.sigma,
                              model.potential)
    print(f"dt {dt:5.1f}: {res.newton_iterations} Newton iterations, "
          f"residual {res.final_residual_norm:.1e}, energy {e0:.6f} -> {e1:.6f}")
