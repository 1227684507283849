"""Solve the standard double bubble and inspect its structure.

Starts from a rough two-chamber seed, minimizes total interface length at
equal prescribed areas, then checks the classical picture: two circular
outer arcs, a straight middle wall, and 120 degree junctions.
"""

import math

from planarclusters import canon
from planarclusters.cluster import perimeter, plateau_check, save_cluster, validate
from planarclusters.optimize import curvature_multipliers, solve_partition
from planarclusters.svgplot import render_clusters_svg

m = [math.pi, math.pi]
init = canon.double_bubble_init(*m)
print(f"seed perimeter: {perimeter(init):.6f}")

out = solve_partition(m, init)
print(f"solved perimeter: {perimeter(out):.6f}")
print(f"analytic oracle:  {canon.double_bubble_perimeter(math.pi):.6f}")
print()
print(validate(out))
print()

rep = plateau_check(out)
print(f"max junction angle deviation: {math.degrees(rep.max_angle_deviation):.5f} deg")
for i, (mean, std) in enumerate(zip(rep.curvature_mean, rep.curvature_std)):
    kind = "segment" if abs(mean) < 1e-4 else "arc"
    print(f"interface {i}: {kind}, curvature {mean:+.6f} (std {std:.2e})")

fit = curvature_multipliers(out)
print(f"chamber pressures: {fit.pressures} (residual {fit.residual:.2e})")

save_cluster(out, "double_bubble.cluster")
render_clusters_svg("double_bubble.svg", [(out, "#1f77b4", 2.0, None)])
print("wrote double_bubble.cluster and double_bubble.svg")
