"""Graph-constrained reinforced choice dynamics.

Simulation of a frequency-reinforced random walk on a constraint graph with
decaying exploration and optional annealing of the preference exponent, the
deterministic (potential / growth-rate ODE) analysis of its limit behavior,
simulated-annealing and epsilon-greedy baselines under the same constraints,
and a reproducible experiment harness with a CLI.

The submodules group the functionality:

  graphs     constraint graphs, generators, validation, JSON persistence
  schedules  exploration eps(n) and exponent alpha(n) = 1/T(n) sequences
  walk       the reinforced walk engine (seeded, batch-vectorized)
  analysis   kernels, stationary laws, potential, ODE rest points, bounds
  baselines  simulated annealing and epsilon-greedy under graph constraints
  harness    experiment configs, persistence, summaries, comparisons
  cli        `graphchoice` command-line entry point
"""

__version__ = "0.1.0"

from .graphs import (Graph, adjacency_matrix, load_graph, make_complete,
                     make_linear, make_star, make_two_cliques, save_graph,
                     validate)
from .schedules import ScheduleConfig, ScheduleState
from .walk import RewardModel, Trajectory, WalkRng, WalkState, run, run_batch

__all__ = [
    "Graph", "RewardModel", "ScheduleConfig", "ScheduleState", "Trajectory",
    "WalkRng", "WalkState", "adjacency_matrix", "load_graph", "make_complete",
    "make_linear", "make_star", "make_two_cliques", "run", "run_batch",
    "save_graph", "validate", "__version__",
]
