from .family import (LevelSetFamily, NestingError, box_calibration, build_family, chord_fraction,
                     exact_family_volumes, nested_step, nested_volume_estimates)
from .lp import LPError, bounding_box, chebyshev_center, is_bounded, linprog_standard, support
from .polytope import (EmptyPolytopeError, Polytope, UnboundedPolytopeError, clip_to_box,
                       level_set, quantile_offsets)
from .sampling import (ThinPolytopeError, default_steps, hit_and_run, hit_and_run_chain,
                       rejection_sample_uniform)
from .vertices import VertexSet, vertex_enumeration, vertices_bruteforce
from .volume import VolumeEstimate, exact_volume

__all__ = [
    "EmptyPolytopeError", "LPError", "LevelSetFamily", "NestingError", "Polytope",
    "ThinPolytopeError", "UnboundedPolytopeError", "VertexSet", "VolumeEstimate",
    "bounding_box", "box_calibration", "build_family", "chebyshev_center", "chord_fraction",
    "clip_to_box", "default_steps", "exact_family_volumes", "exact_volume", "hit_and_run",
    "hit_and_run_chain", "is_bounded", "level_set", "linprog_standard", "nested_step",
    "nested_volume_estimates", "quantile_offsets", "rejection_sample_uniform", "support",
    "vertex_enumeration", "vertices_bruteforce",
]
