"""Sampled genealogies of supercritical birth-death processes with mutations at births.

Three generators of the same object are provided: an exact forward
(Gillespie) simulation, a contour/Levy encoding of the population size, and
a backward coalescent construction with red and blue reproduction events.
A large-sample approximation and a verification harness complete the package.
"""

from .bdmath import RateParams, SamplingFrame, delta, q_prob, sample_h, sample_y
from .coalescent import (
    CoalescentTree,
    MarkedTree,
    MutationEvent,
    descendants_of_event,
    place_mutations,
    sample_marked_tree,
    sample_tree,
    topology_from_heights,
)
from .contour import ContourPath, contour_population_at_T, simulate_contour
from .forward import Genealogy, conditioned_forward, sfs_from_genealogy, simulate_forward
from .rng import replicate_rng
from .sfsstats import SfsReport, asymptotic_clt_params, asymptotic_r_mean, sfs_from_marked_tree

__version__ = "0.1.0"

__all__ = [
    "CoalescentTree",
    "ContourPath",
    "Genealogy",
    "MarkedTree",
    "MutationEvent",
    "RateParams",
    "SamplingFrame",
    "SfsReport",
    "asymptotic_clt_params",
    "asymptotic_r_mean",
    "conditioned_forward",
    "contour_population_at_T",
    "delta",
    "descendants_of_event",
    "place_mutations",
    "q_prob",
    "replicate_rng",
    "sample_h",
    "sample_marked_tree",
    "sample_tree",
    "sample_y",
    "sfs_from_genealogy",
    "sfs_from_marked_tree",
    "simulate_contour",
    "simulate_forward",
    "topology_from_heights",
]
