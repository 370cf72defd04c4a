"""Analysis and simulation of turn-by-turn multi-type population games."""

from .analysis import Analysis, analyze
from .attractors import Attractor, MFEVerdict, all_attractors, two_action_limits, verify_mfe
from .cycle3 import CycleTest, examine_cycle, run_cycle_tests
from .disolver import DISolution, check_cycle_certificate, exit_time, oracle_integrate, solve
from .estimators import GameAnalyzer, TurnByTurnSimulator
from .game import (
    BorderFun,
    GameSpec,
    GameSpecError,
    avoid_type,
    best_response_set,
    border_functions,
    drift,
    herd_type,
    make_game,
    prefer_type,
    utility,
)
from .io import build_report, load_game, save_game
from .presets import build_queuing_preset
from .regions import AdjacencyRecord, RegionVertex, adjacency, enumerate_regions
from .rvgraph import RVGraph, build_with_cycles
from .simulator import SimConfig, batch, classify_limit, run

__version__ = "0.1.0"

__all__ = [
    "AdjacencyRecord",
    "Analysis",
    "Attractor",
    "BorderFun",
    "CycleTest",
    "DISolution",
    "GameAnalyzer",
    "GameSpec",
    "GameSpecError",
    "MFEVerdict",
    "RVGraph",
    "RegionVertex",
    "SimConfig",
    "TurnByTurnSimulator",
    "adjacency",
    "all_attractors",
    "analyze",
    "avoid_type",
    "batch",
    "best_response_set",
    "border_functions",
    "build_queuing_preset",
    "build_report",
    "build_with_cycles",
    "check_cycle_certificate",
    "classify_limit",
    "drift",
    "enumerate_regions",
    "examine_cycle",
    "exit_time",
    "herd_type",
    "load_game",
    "make_game",
    "oracle_integrate",
    "prefer_type",
    "run",
    "run_cycle_tests",
    "save_game",
    "solve",
    "two_action_limits",
    "utility",
    "verify_mfe",
]
