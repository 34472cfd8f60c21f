"""Comparison algorithms under the same graph constraints and noisy rewards.

Two standard methods, both moving only along graph edges and both keeping
running-mean reward estimates exactly like the reinforced walk:

  * Simulated annealing with the neighbor-proposal kernel
        p(x -> y) = (1/|N(x)|) * exp(-max(0, mu_hat_x - mu_hat_y) / T_n)
    for y in N(x), y != x, self-loop taking the remaining mass, and
    T_n = gamma / log(1 + n). Moving toward higher estimated reward is free;
    downhill moves are suppressed as T decays (maximization orientation).

  * Epsilon-greedy: with probability eps_n a uniform random neighbor,
    otherwise the neighbor (including the current node) with the highest
    estimated reward, ties broken toward the lowest node id. Default
    schedule eps_n = 1/n.

Runs reuse the walk module's Trajectory/CSV format. The recorded `alpha`
column holds 1/T_n for annealing and 0 for epsilon-greedy; the `eps` column
holds 0 for annealing and eps_n for epsilon-greedy. Randomness follows the
same [init, select, noise] stream protocol as the reinforced walk: one
selection uniform and one reward normal per step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graphs import Graph
from .walk import (RewardModel, Trajectory, WalkRng, _resolve_starts,
                   _sample_rows, _BLOCK)


@dataclass(frozen=True)
class SAConfig:
    gamma: float = 0.1  # temperature scale, T_n = gamma / log(1 + n)

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")


@dataclass(frozen=True)
class GreedyConfig:
    eps_mode: str = "one_over_n"  # or 'constant'
    eps_value: float = 0.1        # used by 'constant'

    def __post_init__(self):
        if self.eps_mode not in ("one_over_n", "constant"):
            raise ValueError(f"unknown eps_mode {self.eps_mode!r}")
        if not 0.0 <= self.eps_value <= 1.0:
            raise ValueError("eps_value must be in [0, 1]")


@dataclass
class SAState:
    n: int
    current: int
    counts: np.ndarray
    mu_hat: np.ndarray
    temp: float

    @classmethod
    def initial(cls, g: Graph, start: int) -> "SAState":
        """State at n = 0 from a 1-based start node; temp is set on first step."""
        if not 1 <= start <= g.m:
            raise ValueError(f"start node {start} out of range")
        return cls(n=0, current=start - 1, counts=np.zeros(g.m, dtype=np.int64),
                   mu_hat=np.zeros(g.m), temp=math.inf)


@dataclass
class GreedyState:
    n: int
    current: int
    counts: np.ndarray
    mu_hat: np.ndarray
    eps: float

    @classmethod
    def initial(cls, g: Graph, start: int) -> "GreedyState":
        if not 1 <= start <= g.m:
            raise ValueError(f"start node {start} out of range")
        return cls(n=0, current=start - 1, counts=np.zeros(g.m, dtype=np.int64),
                   mu_hat=np.zeros(g.m), eps=1.0)


def sa_temperature(n: int, cfg: SAConfig) -> float:
    """T_n = gamma / log(1 + n) for n >= 1."""
    if n < 1:
        raise ValueError("temperature index starts at n = 1")
    return cfg.gamma / math.log(1.0 + n)


def greedy_epsilon(n: int, cfg: GreedyConfig) -> float:
    if n < 1:
        raise ValueError("epsilon index starts at n = 1")
    if cfg.eps_mode == "constant":
        return cfg.eps_value
    return 1.0 / n


def _sa_rows(mu_hat, cur, g: Graph, temp: float) -> np.ndarray:
    """Annealing kernel rows for a batch; self-loop takes the leftover mass."""
    rows = np.arange(cur.size)
    nbr = g.adjacency_bool[cur]
    drop = mu_hat[rows, cur][:, None] - mu_hat  # positive part penalizes downhill
    pen = np.exp(-np.maximum(drop, 0.0) / temp)
    p = np.where(nbr, pen, 0.0) / g.degrees[cur].astype(float)[:, None]
    p[rows, cur] = 0.0
    p[rows, cur] = 1.0 - p.sum(axis=1)
    return p


def _greedy_rows(mu_hat, cur, g: Graph, eps: float) -> np.ndarray:
    """Epsilon-greedy kernel rows; argmax ties go to the lowest node id."""
    rows = np.arange(cur.size)
    nbr = g.adjacency_bool[cur]
    best = np.where(nbr, mu_hat, -np.inf).argmax(axis=1)
    p = eps * nbr / g.degrees[cur].astype(float)[:, None]
    p[rows, best] += 1.0 - eps
    return p


def sa_transition_row(state: SAState, g: Graph) -> np.ndarray:
    """Single-state annealing kernel row (mostly for inspection and tests)."""
    return _sa_rows(state.mu_hat[None, :], np.array([state.current]), g,
                    state.temp)[0]


def _observe(mu_hat, counts, rows, sel, rm: RewardModel, z):
    obs = rm.mu[sel] + rm.noise_std * z
    counts[rows, sel] += 1
    mu_hat[rows, sel] += (obs - mu_hat[rows, sel]) / counts[rows, sel]
    return obs


def sa_step(state: SAState, g: Graph, rm: RewardModel, cfg: SAConfig,
            rng: WalkRng) -> SAState:
    """One annealing move; observes the reward of the node moved to."""
    state.temp = sa_temperature(state.n + 1, cfg)
    p = _sa_rows(state.mu_hat[None, :], np.array([state.current]), g, state.temp)
    u = np.array([rng.select.random()])
    sel = int(_sample_rows(p, u)[0])
    z = np.array([rng.noise.standard_normal()])
    _observe(state.mu_hat[None, :], state.counts[None, :], np.array([0]),
             np.array([sel]), rm, z)
    state.current = sel
    state.n += 1
    return state


def greedy_step(state: GreedyState, g: Graph, rm: RewardModel,
                cfg: GreedyConfig, rng: WalkRng) -> GreedyState:
    """One epsilon-greedy move; observes the reward of the node moved to."""
    state.eps = greedy_epsilon(state.n + 1, cfg)
    p = _greedy_rows(state.mu_hat[None, :], np.array([state.current]), g,
                     state.eps)
    u = np.array([rng.select.random()])
    sel = int(_sample_rows(p, u)[0])
    z = np.array([rng.noise.standard_normal()])
    _observe(state.mu_hat[None, :], state.counts[None, :], np.array([0]),
             np.array([sel]), rm, z)
    state.current = sel
    state.n += 1
    return state


def _run_baseline_batch(algo: str, g: Graph, rm: RewardModel, cfg,
                        n_steps: int, seeds, record_stride: int,
                        start) -> list[Trajectory]:
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if record_stride < 1:
        raise ValueError("record_stride must be >= 1")
    seeds = [int(s) for s in seeds]
    if len(set(seeds)) != len(seeds):
        raise ValueError("seeds must be distinct")
    if rm.mu.size != g.m:
        raise ValueError("reward vector length != node count")

    rngs = [WalkRng(s) for s in seeds]
    R, m = len(seeds), g.m
    cur = _resolve_starts(g, start, rngs)
    S = np.zeros((R, m), dtype=np.int64)
    mu_hat = np.zeros((R, m))
    rows = np.arange(R)
    U = np.empty((R, _BLOCK))
    Z = np.empty((R, _BLOCK))

    snaps_n, snaps_node, snaps_x, snaps_eps, snaps_alpha = [], [], [], [], []

    def snap(n, eps_rec, alpha_rec):
        snaps_n.append(n)
        snaps_node.append(cur.copy())
        x = S / n if n > 0 else np.full((R, m), 1.0 / m)
        snaps_x.append(x)
        snaps_eps.append(eps_rec)
        snaps_alpha.append(alpha_rec)

    snap(0, 0.0, 0.0)
    for t in range(n_steps):
        k = t % _BLOCK
        if k == 0:
            for r in range(R):
                rngs[r].select.random(out=U[r])
                rngs[r].noise.standard_normal(out=Z[r])

        n_next = t + 1
        if algo == "sa":
            temp = sa_temperature(n_next, cfg)
            p = _sa_rows(mu_hat, cur, g, temp)
            eps_rec, alpha_rec = 0.0, 1.0 / temp
        else:
            eps = greedy_epsilon(n_next, cfg)
            p = _greedy_rows(mu_hat, cur, g, eps)
            eps_rec, alpha_rec = eps, 0.0

        sel = _sample_rows(p, U[:, k])
        _observe(mu_hat, S, rows, sel, rm, Z[:, k])
        cur = sel
        if n_next % record_stride == 0 or n_next == n_steps:
            snap(n_next, eps_rec, alpha_rec)

    ns = np.array(snaps_n, dtype=np.int64)
    node_mat = np.stack(snaps_node, axis=1)
    x_mat = np.stack(snaps_x, axis=1)
    eps_arr = np.array(snaps_eps)
    alpha_arr = np.array(snaps_alpha)
    return [Trajectory(seed=seeds[r], ns=ns.copy(), nodes=node_mat[r].copy(),
                       xs=x_mat[r].copy(), eps=eps_arr.copy(),
                       alphas=alpha_arr.copy())
            for r in range(R)]


def run_sa_batch(g: Graph, rm: RewardModel, cfg: SAConfig, n_steps: int,
                 seeds, record_stride: int = 1, start=None) -> list[Trajectory]:
    """Seeded annealing runs, one per seed, sharing (g, rm, cfg)."""
    return _run_baseline_batch("sa", g, rm, cfg, n_steps, seeds,
                               record_stride, start)


def run_greedy_batch(g: Graph, rm: RewardModel, cfg: GreedyConfig,
                     n_steps: int, seeds, record_stride: int = 1,
                     start=None) -> list[Trajectory]:
    """Seeded epsilon-greedy runs, one per seed, sharing (g, rm, cfg)."""
    return _run_baseline_batch("greedy", g, rm, cfg, n_steps, seeds,
                               record_stride, start)
