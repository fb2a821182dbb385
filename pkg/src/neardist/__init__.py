"""Nearly k-distance sets: constructions, interval-cover certificates, flatness and bounds."""

from .geometry import DistanceMultiset, PointSet, is_separated, pairwise_distances
from .interval_cover import is_nearly_k_distance, min_epsilon, min_intervals

__version__ = "0.1.0"

__all__ = [
    "DistanceMultiset",
    "PointSet",
    "is_nearly_k_distance",
    "is_separated",
    "min_epsilon",
    "min_intervals",
    "pairwise_distances",
]
