"""Inverse-limit presentations of matchbox manifolds from tiling and odometer data."""
from .clopen import ClopenSet, Partition
from .coding import CodingHierarchy, build_hierarchy, check_codes, check_level, dump_hierarchy
from .delone import DeloneNet, net, stats
from .errors import DepthInsufficient, MatchboxError
from .estimator import InverseLimitPresentation
from .invlim import InverseSystem, compose_check, h1_limit, matrix_functoriality, thread_check
from .io import load_spec
from .pipeline import artifacts, run
from .systems import OdometerSpec, SubstitutionRule, make_system, validate_system
from .tower import build_tower, collapse, simplify
from .voronoi import cells, halfspace_form, star

__version__ = "0.1.0"

__all__ = [
    "ClopenSet", "Partition", "CodingHierarchy", "build_hierarchy", "check_codes", "check_level",
    "dump_hierarchy", "DeloneNet", "net", "stats", "DepthInsufficient", "MatchboxError",
    "InverseLimitPresentation", "InverseSystem", "compose_check", "h1_limit", "matrix_functoriality",
    "thread_check", "load_spec", "artifacts", "run", "OdometerSpec", "SubstitutionRule", "make_system",
    "validate_system", "build_tower", "collapse", "simplify", "cells", "halfspace_form", "star",
]
