"""Verification of neural network controllers under controller faults.

A policy network, a deterministic environment and a fault model are
abstracted into a finite MDP over boxes; bounded reachability on that MDP
gives upper bounds on the failure probability of every initial state.
"""
from .abstraction import build_mdp, initial_grid
from .environment import CartPole, Environment, Pendulum, make_environment
from .errors import MosaicError
from .extraction import PolicyExtractor, find_action_subregions, partition_consistent
from .faults import FaultModel, dropped, fault_free, sticky
from .geometry import Box, Interval
from .mdp import AbstractMdp, export_model, import_model
from .model_check import concrete_reach, concrete_reach_batch, max_reach
from .network import Layer, Network, load_network
from .refinement import RegionResult, refine
from .results import safe_set, volume_histogram, worst_case

__all__ = [
    "AbstractMdp", "Box", "CartPole", "Environment", "FaultModel", "Interval", "Layer",
    "MosaicError", "Network", "Pendulum", "PolicyExtractor", "RegionResult", "build_mdp",
    "concrete_reach", "concrete_reach_batch", "dropped", "export_model", "fault_free",
    "find_action_subregions", "import_model", "initial_grid", "load_network",
    "make_environment", "max_reach", "partition_consistent", "refine", "safe_set", "sticky",
    "volume_histogram", "worst_case",
]
