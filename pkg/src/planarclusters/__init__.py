"""Planar bubble-cluster toolkit.

Computes desk-scale isoperimetric clusters with Plateau-law verification,
builds almost-normal diffeomorphisms between nearby singular curve
networks, and measures improved convergence of cluster sequences.
"""

from .geom import (
    Curve,
    resample,
    frame,
    frames,
    co_normal,
    hausdorff,
    trim,
    geodesic_dist,
)
from .cluster import (
    Interface,
    TriplePoint,
    PlanarCluster,
    validate,
    perimeter,
    areas,
    cluster_delta,
    density_ratio,
    plateau_check,
    save_cluster,
    load_cluster,
)
from .optimize import (
    SolveOptions,
    solve_partition,
    solve_with_potential,
    project_volumes,
    curvature_multipliers,
)
from .extend import Jet1, jet_norm, whitney_extend, DistanceMap, extend_boundary_data
from .diffeo import (
    DiffeoMap,
    build_cutoff,
    boundary_decompose,
    build_diffeo,
    diffeo_norms,
)
from .converge import match_structure, normal_graph, improved_convergence_report

__version__ = "0.1.0"

__all__ = [
    "Curve", "resample", "frame", "frames", "co_normal", "hausdorff", "trim",
    "geodesic_dist",
    "Interface", "TriplePoint", "PlanarCluster", "validate", "perimeter",
    "areas", "cluster_delta", "density_ratio", "plateau_check",
    "save_cluster", "load_cluster",
    "SolveOptions", "solve_partition", "solve_with_potential",
    "project_volumes", "curvature_multipliers",
    "Jet1", "jet_norm", "whitney_extend", "DistanceMap", "extend_boundary_data",
    "DiffeoMap", "build_cutoff", "boundary_decompose", "build_diffeo",
    "diffeo_norms",
    "match_structure", "normal_graph", "improved_convergence_report",
]
