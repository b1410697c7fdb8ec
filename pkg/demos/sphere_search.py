"""Search the spherical arc-partition problem on the circle.

Assign each of k components a union of circular arcs so that no angle
belongs to all k supports, and minimize the sum of the homogeneity
exponents gamma((pi/L)^2) over the longest arc L of each support (a
full circle contributes 0).  The optimal value calibrates the exponent
used by the monotonicity scan.

Run:  python3 demos/sphere_search.py
"""

from seglab import (
    config_value,
    halfcap_config,
    search_alpha,
    symmetric_config,
)

print("hand-built competitors (k components, one arc each):")
for k in (3, 4, 5):
    sym = config_value(symmetric_config(k))
    print(f"  k = {k}: symmetric equal arcs -> {sym:.6f} "
          f"(= k^2/(2(k-1)) = {k * k / (2 * (k - 1)):.6f})")
print(f"  half circles + full circle    -> "
      f"{config_value(halfcap_config(3)):.6f}")
print()

for k in (2, 3, 4):
    res = search_alpha(k)
    sup_desc = ["full circle" if s == "full_circle"
                else f"{len(s)} arc(s), longest {max(ln for _, ln in s):.4f}"
                for s in res.best_config.supports]
    print(f"search k = {k}: best value {res.best_value:.8f}")
    for d in sup_desc:
        print(f"    {d}")

print()
print("For every k the optimum is 2: give one component the whole")
print("circle for free and split the rest of the obstruction between")
print("two half circles.  The symmetric competitor is strictly worse")
print("for k >= 3, which is why the search matters.")
