"""Purity-order geometry, purity-law statistics, and purity-weighted
policy training for the Euclidean TSP."""

from .errors import CapacityError, DegenerateFitError, TsplibParseError
from .generators import DISTRIBUTIONS, GenSpec, generate, generate_suite, parse_spec_string
from .geometry import (Instance, all_pairs_purity, normalize_points, purity_order,
                       purity_order_fast, sorted_partners)
from .policy import FEATURE_NAMES, PolicyParams, action_distribution, grad_log_prob, rollout
from .purity import (AvailabilityTracker, ConstructionState, PurityProfile, PurityTrace,
                     purity_availability, purity_cost, purity_profile, purity_trace,
                     purity_weights)
from .solvers import Tour, held_karp, local_search_solve, nearest_neighbor, tour_length
from .stats import FitResult, OrderHistogramPool, fit_purity_law, proportions, purity_law_report
from .topology import check_connectivity, check_convexity, check_existence, run_topology_suite
from .training import TrainConfig, evaluate, pupo_gradient, reinforce_gradient, train
from .tsplib import TsplibInstance, load_tsplib, parse_tsplib, rounded_tour_length

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
