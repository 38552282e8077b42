"""Passage-traversing optimal path planning."""

from ._kernels import BACKEND
from .cells import CellComplex, GabrielCell, compound_cells_3d, detect_cells
from .costs import CostSpec, CostValue, SortedWidths, path_cost, validate_weights
from .env import GenSpec, Obstacle, Scenario, generate, load, save
from .errors import PtoppError
from .passages import Passage, brute_force_detect, detect_2d, detect_3d
from .planners import PlanConfig, PlanResult, plan, prm_star, rrt_star, run_baseline

__all__ = [
    "BACKEND",
    "CellComplex",
    "CostSpec",
    "CostValue",
    "GabrielCell",
    "GenSpec",
    "Obstacle",
    "Passage",
    "PlanConfig",
    "PlanResult",
    "PtoppError",
    "Scenario",
    "SortedWidths",
    "brute_force_detect",
    "compound_cells_3d",
    "detect_2d",
    "detect_3d",
    "detect_cells",
    "generate",
    "load",
    "path_cost",
    "plan",
    "prm_star",
    "rrt_star",
    "run_baseline",
    "save",
    "validate_weights",
]
