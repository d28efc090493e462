"""Online multi-level aggregation with deadlines on weighted rooted trees."""
from .generators import GenParams, gen_3decreasing, gen_random, gen_staggered_fan
from .model import (
    CostModel,
    CostTree,
    Instance,
    Request,
    Schedule,
    Transmission,
    dump_instance,
    load_instance,
    parse_instance,
    validate_3decreasing,
    verify_feasible,
)
from .oracle import OracleLimits, candidate_times, opt_suffix, solve_opt
from .reductions import decompose_forest, edge_to_node, map_back, normalize, split_at_root
from .simulator import run, run_online, run_online_edge, suffix_requests
from .transmission import check_transmission_invariants, expand_concrete, select_transmission_tree

__all__ = [
    "GenParams",
    "gen_3decreasing",
    "gen_random",
    "gen_staggered_fan",
    "CostModel",
    "CostTree",
    "Instance",
    "Request",
    "Schedule",
    "Transmission",
    "dump_instance",
    "load_instance",
    "parse_instance",
    "validate_3decreasing",
    "verify_feasible",
    "OracleLimits",
    "candidate_times",
    "opt_suffix",
    "solve_opt",
    "decompose_forest",
    "edge_to_node",
    "map_back",
    "normalize",
    "split_at_root",
    "run",
    "run_online",
    "run_online_edge",
    "suffix_requests",
    "check_transmission_invariants",
    "expand_concrete",
    "select_transmission_tree",
]

__version__ = "0.1.0"
