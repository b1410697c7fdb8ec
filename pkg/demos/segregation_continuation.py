"""Follow a branch of minimizers toward the segregation limit.

Three densities on the disk share partially segregated boundary data:
around the rim each component is a shifted bump and at every boundary
point at least one of them vanishes.  As the competition strength beta
grows, the interior interaction is squeezed out and the components sort
themselves into regions meeting near a triple point.

Run:  python3 demos/segregation_continuation.py
"""

import numpy as np

from seglab import (
    ContinuationSchedule,
    continuation,
    initial_state,
    make_domain,
    make_preset,
    overlap_measures,
    product_integral,
)

n = 65
betas = tuple(10.0 ** k for k in range(6))

grid = make_domain("disk", n)
trace = make_preset("symmetric_sine", grid)
eps = 1e-2 * trace.sup_norm()

print(f"disk {n}x{n}, boundary preset 'symmetric_sine', "
      f"beta {betas[0]:g} -> {betas[-1]:g}")
print()
print(f"{'beta':>10} {'dirichlet':>12} {'beta*prod':>12} {'prod':>12} "
      f"{'triple area':>12} {'sweeps':>6}")

stages = continuation(ContinuationSchedule(betas),
                      initial_state(grid, trace, betas[0]))
for st in stages:
    ov = overlap_measures(st.state, eps)
    print(f"{st.beta:10g} {sum(st.breakdown.dirichlet):12.6f} "
          f"{st.breakdown.interaction:12.6f} "
          f"{product_integral(st.state.u):12.3e} "
          f"{ov.triple:12.4f} {st.report.sweeps:6d}")

print()
print("The plain product integral (the derivative of the concave map")
print("beta -> minimal energy) decreases at every stage.  The weighted")
print("term beta*prod first grows while the minimizers barely move, then")
print("falls once segregation sets in.  The triple-overlap area shrinks")
print("while pairwise overlaps persist: the limit is only partially")
print("segregated.")

final = stages[-1].state
vals = np.stack([u.values for u in final.u])
interior_min = min(float(u.values[grid.nonexterior].min()) for u in final.u)
print()
print(f"max principle check: min u = {interior_min:.2e} >= 0, "
      f"max u = {vals.max():.4f} <= sup psi = {trace.sup_norm():.4f}")
