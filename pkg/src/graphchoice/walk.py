"""Reinforced random walk on a constraint graph.

The process: an agent at node i observes a noisy reward at each node it
visits, keeps running-mean estimates mu_hat, and moves to a successor j with
probability proportional to (mu_hat_j * x_j)**alpha, mixed with an eps(n)
chance of a uniform random neighbor. x is the vector of visit frequencies,
updated by

    x(n+1) = x(n) + (I[next = j] - x(n)) / (n + 1),   x(0) = uniform,

so reinforcement feeds back into the move distribution. Unvisited nodes (and
nodes whose current estimate is nonpositive) carry zero preference weight;
when every neighbor has zero weight the reinforced part falls back to uniform
on N(i), which keeps the kernel stochastic at the start of a run.

Randomness protocol (recorded in run metadata): each seed expands through
numpy's SeedSequence into three independent PCG64 streams, [init, select,
noise]. The init stream is consumed only when the start node is drawn
uniformly; the select stream yields exactly one uniform per step (the node
draw via the cumulative kernel row); the noise stream yields exactly one
standard normal per step. Because the streams are separate and consumed in
fixed order, a batched run over many seeds is bit-identical to running each
seed alone.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import schedules
from .graphs import Graph
from .schedules import ScheduleConfig, ScheduleState

_BLOCK = 1 << 12  # random numbers pre-drawn per stream per refill
_RENORM_TOL = 1e-9  # rescale x only if the simplex sum drifts this far


@dataclass(frozen=True)
class RewardModel:
    """True node rewards mu_i > 0 plus i.i.d. zero-mean Gaussian noise."""

    mu: np.ndarray
    noise_std: float = 0.0

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        if mu.ndim != 1 or mu.size == 0:
            raise ValueError("mu must be a nonempty vector")
        if not np.all(mu > 0):
            raise ValueError("all rewards must be positive")
        if self.noise_std < 0:
            raise ValueError("noise_std must be nonnegative")
        mu = mu.copy()
        mu.setflags(write=False)
        object.__setattr__(self, "mu", mu)


class WalkRng:
    """Per-run random streams: [init, select, noise], spawned from one seed."""

    ALGORITHM = "numpy-pcg64 seedsequence-spawn3 [init,select,noise]"

    def __init__(self, seed: int):
        self.seed = int(seed)
        kids = np.random.SeedSequence(self.seed).spawn(3)
        self.init, self.select, self.noise = (
            np.random.Generator(np.random.PCG64(k)) for k in kids)


@dataclass
class WalkState:
    """Full state of the recursion at step n (single run, 0-based node)."""

    n: int
    current: int
    counts: np.ndarray  # int64 visit counts S, sum(counts) == n
    x: np.ndarray       # visit frequencies on the simplex
    mu_hat: np.ndarray  # running-mean reward estimates, 0 until first visit
    sched: ScheduleState

    @classmethod
    def initial(cls, g: Graph, cfg: ScheduleConfig, start: int) -> "WalkState":
        """State at n = 0: uniform x, zero counts and estimates.

        `start` is 1-based. The start node constrains the first move but is
        not counted or observed: counts track arrivals, so sum(S) == n holds
        exactly and mu_hat_i is always the mean of exactly S_i observations.
        """
        if not 1 <= start <= g.m:
            raise ValueError(f"start node {start} out of range")
        return cls(
            n=0,
            current=start - 1,
            counts=np.zeros(g.m, dtype=np.int64),
            x=np.full(g.m, 1.0 / g.m),
            mu_hat=np.zeros(g.m),
            sched=schedules.initial_state(cfg),
        )


@dataclass
class Trajectory:
    """Recorded (n, node, x, eps, alpha) snapshots at a fixed stride.

    `nodes` are 0-based internally; the CSV emits 1-based ids. `final_state`
    carries the full end-of-run state; `rewards` holds the per-step observed
    rewards when their recording was requested.
    """

    seed: int
    ns: np.ndarray
    nodes: np.ndarray
    xs: np.ndarray
    eps: np.ndarray
    alphas: np.ndarray
    final_state: WalkState | None = None
    rewards: np.ndarray | None = None

    def to_csv(self, path) -> None:
        m = self.xs.shape[1]
        with open(path, "w") as fh:
            fh.write("n,xi,eps,alpha," + ",".join(f"x_{i+1}" for i in range(m)) + "\n")
            for k in range(len(self.ns)):
                row = [str(int(self.ns[k])), str(int(self.nodes[k]) + 1),
                       repr(float(self.eps[k])), repr(float(self.alphas[k]))]
                row += [repr(float(v)) for v in self.xs[k]]
                fh.write(",".join(row) + "\n")


def read_trajectory_csv(path, seed: int = -1) -> Trajectory:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        m = len(header) - 4
        rows = [line.strip().split(",") for line in fh if line.strip()]
    ns = np.array([int(r[0]) for r in rows], dtype=np.int64)
    nodes = np.array([int(r[1]) - 1 for r in rows], dtype=np.int64)
    eps = np.array([float(r[2]) for r in rows])
    alphas = np.array([float(r[3]) for r in rows])
    xs = np.array([[float(v) for v in r[4:4 + m]] for r in rows])
    return Trajectory(seed=seed, ns=ns, nodes=nodes, xs=xs, eps=eps, alphas=alphas)


def _kernel_rows(x, mu_hat, cur, g: Graph, alpha: float, eps: float,
                 notnbr=None, unif=None) -> np.ndarray:
    """Transition rows for a batch: (R, m) states -> (R, m) stochastic rows.

    Preference weights are evaluated in log space with a per-row shift so
    arbitrarily large alpha cannot overflow; weights that underflow to zero
    relative to the row maximum are genuinely negligible. Nonpositive
    estimates contribute zero weight (log of the clamped product is -inf).
    Callers are expected to silence divide/invalid warnings via errstate;
    `notnbr`/`unif` allow hot loops to pass pre-gathered neighborhood rows.
    """
    if notnbr is None:
        notnbr = ~g.adjacency_bool[cur]
    if unif is None:
        unif = g.uniform_rows[cur]
    p = mu_hat * x
    np.maximum(p, 0.0, out=p)
    np.log(p, out=p)
    p *= alpha
    np.copyto(p, -np.inf, where=notnbr)
    rowmax = p.max(axis=1)
    if rowmax.min() == -np.inf:  # some row has no visited neighbor yet
        live = rowmax > -np.inf
        p -= np.where(live, rowmax, 0.0)[:, None]
        np.exp(p, out=p)
        dead = ~live
        p[dead] = ~notnbr[dead]  # uniform fallback keeps the row stochastic
    else:
        p -= rowmax[:, None]
        np.exp(p, out=p)
    scale = (1.0 - eps) / p.sum(axis=1)
    p *= scale[:, None]
    p += eps * unif
    return p


def transition_probabilities(state: WalkState, g: Graph,
                             alpha: float | None = None,
                             eps: float | None = None) -> np.ndarray:
    """Move distribution over all m nodes from the current state.

    alpha/eps default to the state's schedule values. The result is supported
    on N(current) and sums to one.
    """
    a = state.sched.alpha if alpha is None else alpha
    e = state.sched.eps if eps is None else eps
    if a <= 0:
        raise ValueError("alpha must be positive")
    if not 0.0 <= e <= 1.0:
        raise ValueError("eps must be in [0, 1]")
    with np.errstate(divide="ignore", invalid="ignore"):
        rows = _kernel_rows(state.x[None, :], state.mu_hat[None, :],
                            np.array([state.current]), g, a, e)
    return rows[0]


def _sample_rows(probs: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF draw per row; zero-probability entries are never selected."""
    cum = probs.cumsum(axis=1)
    sel = (u[:, None] >= cum).sum(axis=1)
    m = probs.shape[1]
    if sel.max() >= m:  # u beyond a short final cumsum: last supported node
        for r in np.flatnonzero(sel >= m):
            sel[r] = np.flatnonzero(probs[r] > 0)[-1]
    return sel


def observe_and_update_mean(state: WalkState, node: int, rm: RewardModel,
                            rng: WalkRng) -> float:
    """Draw the reward observation at `node` (0-based) and fold it into mu_hat.

    Must be called after counts[node] was incremented for this arrival; the
    running mean then divides by the exact observation count.
    """
    obs = float(rm.mu[node]) + rm.noise_std * float(rng.noise.standard_normal())
    s = state.counts[node]
    state.mu_hat[node] += (obs - state.mu_hat[node]) / s
    return obs


def step(state: WalkState, g: Graph, rm: RewardModel, cfg: ScheduleConfig,
         rng: WalkRng) -> WalkState:
    """Advance the walk one step in place; returns the mutated state."""
    probs = transition_probabilities(state, g)
    u = np.array([rng.select.random()])
    sel = int(_sample_rows(probs[None, :], u)[0])

    a = 1.0 / (state.n + 1)
    state.x *= 1.0 - a
    state.x[sel] += a
    state.counts[sel] += 1
    observe_and_update_mean(state, sel, rm, rng)
    state.current = sel
    state.n += 1
    state.sched = schedules.advance(state.sched, cfg)
    return state


def _resolve_starts(g: Graph, start, rngs: list[WalkRng]) -> np.ndarray:
    """Start nodes per run (0-based). Uniform policies consume the init stream."""
    if start is None:
        return np.array([r.init.integers(0, g.m) for r in rngs], dtype=np.int64)
    if isinstance(start, int):
        if not 1 <= start <= g.m:
            raise ValueError(f"start node {start} out of range")
        return np.full(len(rngs), start - 1, dtype=np.int64)
    pool = np.array([int(s) - 1 for s in start], dtype=np.int64)
    if pool.size == 0 or pool.min() < 0 or pool.max() >= g.m:
        raise ValueError("start pool contains out-of-range nodes")
    return np.array([pool[r.init.integers(0, pool.size)] for r in rngs],
                    dtype=np.int64)


def run_batch(g: Graph, rm: RewardModel, cfg: ScheduleConfig, n_steps: int,
              seeds, record_stride: int = 1, start=None,
              record_rewards: bool = False) -> list[Trajectory]:
    """Run one walk per seed, vectorized across seeds.

    All runs share (g, rm, cfg) and differ only in their random streams, so
    the schedule scalars are common. Results are bit-identical to running
    each seed through `run` alone. `start` is None (uniform over V), a
    1-based node id, or a pool of 1-based ids to draw from uniformly.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if record_stride < 1:
        raise ValueError("record_stride must be >= 1")
    seeds = [int(s) for s in seeds]
    if len(set(seeds)) != len(seeds):
        raise ValueError("seeds must be distinct")
    mu = rm.mu
    if mu.size != g.m:
        raise ValueError("reward vector length != node count")

    rngs = [WalkRng(s) for s in seeds]
    R, m = len(seeds), g.m
    cur = _resolve_starts(g, start, rngs)
    S = np.zeros((R, m), dtype=np.int64)
    x = np.full((R, m), 1.0 / m)
    mu_hat = np.zeros((R, m))
    eps_arr, alpha_arr, temp_arr = schedules.schedule_arrays(cfg, n_steps)

    rows = np.arange(R)
    notnbr_all = ~g.adjacency_bool
    unif_all = g.uniform_rows
    noise_std = rm.noise_std
    U = np.empty((R, _BLOCK))
    Z = np.empty((R, _BLOCK))
    snaps_n, snaps_node, snaps_x = [], [], []
    rewards = np.empty((R, n_steps)) if record_rewards else None

    def snap(n):
        snaps_n.append(n)
        snaps_node.append(cur.copy())
        snaps_x.append(x.copy())

    snap(0)
    with np.errstate(divide="ignore", invalid="ignore"):
        for t in range(n_steps):
            k = t % _BLOCK
            if k == 0:
                for r in range(R):
                    rngs[r].select.random(out=U[r])
                    rngs[r].noise.standard_normal(out=Z[r])
                if np.abs(x.sum(axis=1) - 1.0).max() > _RENORM_TOL:
                    x /= x.sum(axis=1)[:, None]

            probs = _kernel_rows(x, mu_hat, cur, g, alpha_arr[t], eps_arr[t],
                                 notnbr=notnbr_all[cur], unif=unif_all[cur])
            sel = _sample_rows(probs, U[:, k])

            a = 1.0 / (t + 1)
            x *= 1.0 - a
            x[rows, sel] += a
            S[rows, sel] += 1
            obs = mu[sel] + noise_std * Z[:, k]
            mu_hat[rows, sel] += (obs - mu_hat[rows, sel]) / S[rows, sel]
            if record_rewards:
                rewards[:, t] = obs
            cur = sel

            n = t + 1
            if n % record_stride == 0 or n == n_steps:
                snap(n)

    ns = np.array(snaps_n, dtype=np.int64)
    node_mat = np.stack(snaps_node, axis=1)   # (R, k)
    x_mat = np.stack(snaps_x, axis=1)         # (R, k, m)
    eps_snap = eps_arr[ns]
    alpha_snap = alpha_arr[ns]
    final_sched = ScheduleState(n=n_steps, eps=float(eps_arr[n_steps]),
                                temp=float(temp_arr[n_steps]))

    out = []
    for r in range(R):
        final = WalkState(n=n_steps, current=int(cur[r]), counts=S[r].copy(),
                          x=x[r].copy(), mu_hat=mu_hat[r].copy(),
                          sched=final_sched)
        out.append(Trajectory(
            seed=seeds[r], ns=ns.copy(), nodes=node_mat[r].copy(),
            xs=x_mat[r].copy(), eps=eps_snap.copy(), alphas=alpha_snap.copy(),
            final_state=final,
            rewards=rewards[r].copy() if record_rewards else None))
    return out


def run(g: Graph, rm: RewardModel, cfg: ScheduleConfig, n_steps: int,
        seed: int, record_stride: int = 1, start=None,
        record_rewards: bool = False) -> Trajectory:
    """Run a single seeded walk; deterministic given (inputs, seed)."""
    return run_batch(g, rm, cfg, n_steps, [seed], record_stride=record_stride,
                     start=start, record_rewards=record_rewards)[0]
