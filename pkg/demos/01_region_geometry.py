"""Tour of the permissible region for a qutrit with one basis unmeasured.

Measure three of the four mutually unbiased bases exactly, leave the fourth
open, and look at the set of outcome assignments for the open basis that
remain consistent with positivity.  Writes plotting data (a barycentric grid
of the minimum eigenvalue and the traced boundary curve) to ./demo_out/.
"""

import os

import numpy as np

from qutrit_tomo import (
    PriorData,
    emit_region_plot_data,
    find_feasible,
    min_eig_field,
    min_entropy_boundary_state,
    region_area,
    sample_hs,
    sample_region,
    trace_boundary,
    von_neumann_entropy,
)

OUT = os.path.join(os.path.dirname(__file__), "demo_out")
os.makedirs(OUT, exist_ok=True)

rng = np.random.default_rng(7)
rho_true = sample_hs(rng)
prior = PriorData.from_state(rho_true, unmeasured_indices=(0,))

print("true state purity:", float(np.real(np.trace(rho_true @ rho_true))))
print("measured bases   :", [m.basis_index for m in prior.measured])

# the true outcome probabilities are always inside the region
p_true = prior.born_unmeasured(rho_true)
print("true unmeasured probabilities:", np.round(p_true, 4))
print("min eigenvalue at truth      :", min_eig_field(p_true, prior))

# a feasible point found by eigenvalue ascent from the simplex center
p0 = find_feasible(prior)
print("feasible interior point      :", np.round(p0, 4))

# the region boundary satisfies det(rho) = 0
mesh = trace_boundary(prior, n_angles=512)
clipped = int(mesh.on_simplex_edge.sum())
print(f"boundary mesh: {len(mesh.points)} points, {clipped} clipped by the simplex edge")

# uniform samples and the Monte Carlo area in counting-measure units
pts = sample_region(prior, 5_000, rng=rng)
area = region_area(prior, n=100_000, rng=rng)
print(f"region area: {area.area:.4f} +- {area.std_error:.4f} "
      f"(full simplex would be {np.pi / 2:.4f})")
print("sample mean (center of mass):", np.round(pts.mean(axis=0), 4))

# the least-mixed state on the boundary
p_min = min_entropy_boundary_state(prior, n_angles=512)
s_min = von_neumann_entropy(prior.rho_of_p(p_min))
print(f"minimum boundary entropy: {s_min:.4f} nats at p = {np.round(p_min, 4)}")

grid_path = os.path.join(OUT, "region_grid.csv")
emit_region_plot_data(prior, grid_n=160, out_path=grid_path)
print("wrote", grid_path, "and its *_boundary.csv sibling for plotting")
