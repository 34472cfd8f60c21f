"""Experiment orchestration: configs, runs, persistence, summaries.

An experiment is a JSON document (strict schema, unknown keys rejected)
naming a graph, a reward vector, an algorithm, schedules, seeds and a step
budget. Runs are written one directory per seed:

    <out>/<name>/<seed>/trajectory.csv     n,xi,eps,alpha,x_1..x_m
    <out>/<name>/<seed>/meta.json          seed, config hash, rng protocol
    <out>/<name>/summary.json              per-seed finals + aggregates

Summaries are computed by reading the persisted trajectory files back, so
they are reproducible from the artifacts alone. Everything is deterministic
given (config, seeds): rerunning produces byte-identical files.
"""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import __version__, baselines, graphs, walk
from .schedules import ScheduleConfig

_SCHEMA = 1
_ALGOS = ("reinforced", "sa", "greedy")

_TOP_KEYS = {"schema", "name", "graph", "mu", "noise_std", "algorithm",
             "schedule", "greedy_eps", "n_steps", "seeds", "record_stride",
             "start", "acceptance", "out_dir"}
_GRAPH_KEYS = {"generator", "m", "center", "m1", "m2", "file"}
_ACCEPT_KEYS = {"nodes", "min_fraction", "min_seeds"}


class ConfigError(ValueError):
    """Invalid experiment configuration (maps to CLI exit code 2)."""


@dataclass
class ExperimentConfig:
    name: str
    graph_spec: dict
    mu: np.ndarray
    noise_std: float
    algorithm: str
    schedule: ScheduleConfig
    n_steps: int
    seeds: list[int]
    record_stride: int
    start: object  # None (uniform) | int | list[int]
    greedy_eps: baselines.GreedyConfig = field(default_factory=baselines.GreedyConfig)
    acceptance: dict | None = None
    out_dir: str | None = None
    raw: dict = field(default_factory=dict, repr=False)

    def build_graph(self) -> graphs.Graph:
        return build_graph(self.graph_spec)

    def reward_model(self) -> walk.RewardModel:
        return walk.RewardModel(mu=self.mu, noise_std=self.noise_std)

    def config_hash(self) -> str:
        blob = json.dumps(self.raw, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def build_graph(spec: dict) -> graphs.Graph:
    """Graph from a config 'graph' block (generator + params, or a file)."""
    unknown = set(spec) - _GRAPH_KEYS
    if unknown:
        raise ConfigError(f"unknown graph keys: {sorted(unknown)}")
    if "file" in spec:
        g, _notes = graphs.load_graph(spec["file"])
        return g
    gen = spec.get("generator")
    if gen == "complete":
        return graphs.make_complete(int(spec["m"]))
    if gen == "linear":
        return graphs.make_linear(int(spec["m"]))
    if gen == "star":
        return graphs.make_star(int(spec["m"]), int(spec["center"]))
    if gen == "two_cliques":
        return graphs.make_two_cliques(int(spec["m1"]), int(spec["m2"]))
    raise ConfigError(f"unknown graph generator {gen!r}")


def parse_graph_arg(text: str) -> graphs.Graph:
    """Graph from a compact CLI spec: complete:M, linear:M, star:M:CENTER,
    two_cliques:M1:M2, or a JSON graph file path."""
    if os.sep in text or text.endswith(".json"):
        g, _ = graphs.load_graph(text)
        return g
    parts = text.split(":")
    kind, args = parts[0], [int(p) for p in parts[1:]]
    if kind == "complete" and len(args) == 1:
        return graphs.make_complete(args[0])
    if kind == "linear" and len(args) == 1:
        return graphs.make_linear(args[0])
    if kind == "star" and len(args) == 2:
        return graphs.make_star(args[0], args[1])
    if kind == "two_cliques" and len(args) == 2:
        return graphs.make_two_cliques(args[0], args[1])
    raise ConfigError(f"cannot parse graph spec {text!r}")


def _parse_seeds(spec) -> list[int]:
    if isinstance(spec, list):
        seeds = [int(s) for s in spec]
    elif isinstance(spec, dict) and set(spec) <= {"count", "base"}:
        base = int(spec.get("base", 1))
        seeds = list(range(base, base + int(spec["count"])))
    else:
        raise ConfigError("seeds must be a list or {'count': k, 'base': b}")
    if len(set(seeds)) != len(seeds):
        raise ConfigError("seeds must be distinct")
    if not seeds:
        raise ConfigError("need at least one seed")
    return seeds


def parse_config(doc: dict) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if doc.get("schema") != _SCHEMA:
        raise ConfigError(f"config schema must be {_SCHEMA}")
    for key in ("name", "graph", "mu", "algorithm", "n_steps", "seeds"):
        if key not in doc:
            raise ConfigError(f"missing config key {key!r}")
    algo = doc["algorithm"]
    if algo not in _ALGOS:
        raise ConfigError(f"algorithm must be one of {_ALGOS}")

    g = build_graph(doc["graph"])  # validates the block and any file
    mu = np.asarray(doc["mu"], dtype=float)
    if mu.size != g.m:
        raise ConfigError(f"mu has {mu.size} entries for a {g.m}-node graph")

    try:
        schedule = ScheduleConfig(**doc.get("schedule", {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad schedule block: {exc}") from exc

    greedy_spec = doc.get("greedy_eps", {})
    try:
        greedy_eps = baselines.GreedyConfig(
            eps_mode=greedy_spec.get("mode", "one_over_n"),
            eps_value=float(greedy_spec.get("value", 0.1)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad greedy_eps block: {exc}") from exc

    start = doc.get("start", "uniform")
    if start == "uniform":
        start = None
    elif isinstance(start, list):
        start = [int(s) for s in start]
    elif isinstance(start, int):
        pass
    else:
        raise ConfigError("start must be 'uniform', a node id, or a node list")

    acceptance = doc.get("acceptance")
    if acceptance is not None:
        if set(acceptance) - _ACCEPT_KEYS:
            raise ConfigError("unknown acceptance keys")
        for key in _ACCEPT_KEYS:
            if key not in acceptance:
                raise ConfigError(f"acceptance block missing {key!r}")

    n_steps = int(doc["n_steps"])
    stride = int(doc.get("record_stride", max(1, n_steps // 100)))
    if n_steps < 1 or stride < 1:
        raise ConfigError("n_steps and record_stride must be positive")

    return ExperimentConfig(
        name=str(doc["name"]), graph_spec=doc["graph"], mu=mu,
        noise_std=float(doc.get("noise_std", 0.0)), algorithm=algo,
        schedule=schedule, n_steps=n_steps, seeds=_parse_seeds(doc["seeds"]),
        record_stride=stride, start=start, greedy_eps=greedy_eps,
        acceptance=acceptance, out_dir=doc.get("out_dir"), raw=doc)


def bundled_config_names() -> list[str]:
    root = resources.files("graphchoice") / "configs"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_config(ref: str) -> ExperimentConfig:
    """Load a config from a file path or a bundled config name."""
    if os.path.isfile(ref):
        with open(ref) as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{ref}: invalid JSON ({exc})") from exc
        return parse_config(doc)
    candidate = resources.files("graphchoice") / "configs" / f"{ref}.json"
    if candidate.is_file():
        return parse_config(json.loads(candidate.read_text()))
    raise ConfigError(
        f"no such config file or bundled name: {ref!r} "
        f"(bundled: {', '.join(bundled_config_names())})")


def run_trajectories(cfg: ExperimentConfig, seeds=None) -> list[walk.Trajectory]:
    """Execute the experiment's runs in memory (one per seed, batched)."""
    seeds = cfg.seeds if seeds is None else seeds
    g = cfg.build_graph()
    rm = cfg.reward_model()
    if cfg.algorithm == "reinforced":
        return walk.run_batch(g, rm, cfg.schedule, cfg.n_steps, seeds,
                              record_stride=cfg.record_stride, start=cfg.start)
    if cfg.algorithm == "sa":
        sa_cfg = baselines.SAConfig(gamma=cfg.schedule.gamma_sa)
        return baselines.run_sa_batch(g, rm, sa_cfg, cfg.n_steps, seeds,
                                      record_stride=cfg.record_stride,
                                      start=cfg.start)
    return baselines.run_greedy_batch(g, rm, cfg.greedy_eps, cfg.n_steps,
                                      seeds, record_stride=cfg.record_stride,
                                      start=cfg.start)


def resolve_out_dir(cfg: ExperimentConfig, cli_out: str | None = None) -> str:
    """Precedence: --out flag, then GRAPHCHOICE_OUT, then config, then ./runs."""
    return cli_out or os.environ.get("GRAPHCHOICE_OUT") or cfg.out_dir or "runs"


def _acceptance_verdict(cfg: ExperimentConfig, finals: dict[int, list[float]]):
    acc = cfg.acceptance
    if acc is None:
        return None
    idx = [int(i) - 1 for i in acc["nodes"]]
    hits = sum(1 for x in finals.values()
               if sum(x[i] for i in idx) >= acc["min_fraction"])
    return {"nodes": acc["nodes"], "min_fraction": acc["min_fraction"],
            "min_seeds": acc["min_seeds"], "passing_seeds": hits,
            "passed": hits >= acc["min_seeds"]}


def summarize_from_disk(cfg: ExperimentConfig, exp_dir: str) -> dict:
    """Aggregate summary recomputed purely from the persisted trajectories."""
    finals = {}
    for seed in cfg.seeds:
        path = os.path.join(exp_dir, str(seed), "trajectory.csv")
        traj = walk.read_trajectory_csv(path, seed=seed)
        finals[seed] = [float(v) for v in traj.xs[-1]]
    mat = np.array([finals[s] for s in cfg.seeds])
    summary = {
        "schema": _SCHEMA,
        "name": cfg.name,
        "algorithm": cfg.algorithm,
        "n_steps": cfg.n_steps,
        "seeds": cfg.seeds,
        "final_x": {str(s): finals[s] for s in cfg.seeds},
        "median_final_x": [float(v) for v in np.median(mat, axis=0)],
        "q25_final_x": [float(v) for v in np.quantile(mat, 0.25, axis=0)],
        "q75_final_x": [float(v) for v in np.quantile(mat, 0.75, axis=0)],
    }
    verdict = _acceptance_verdict(cfg, finals)
    if verdict is not None:
        summary["acceptance"] = verdict
    return summary


def run_experiment(cfg: ExperimentConfig, out_dir: str,
                   seed_override: int | None = None) -> dict:
    """Run all seeds, persist trajectories and metadata, return the summary."""
    seeds = cfg.seeds if seed_override is None else [int(seed_override)]
    cfg = ExperimentConfig(**{**cfg.__dict__, "seeds": seeds})
    trajs = run_trajectories(cfg)
    exp_dir = os.path.join(out_dir, cfg.name)
    meta_common = {
        "schema": _SCHEMA,
        "name": cfg.name,
        "config_sha256": cfg.config_hash(),
        "algorithm": cfg.algorithm,
        "graph": cfg.graph_spec,
        "n_steps": cfg.n_steps,
        "record_stride": cfg.record_stride,
        "rng": walk.WalkRng.ALGORITHM,
        "package_version": __version__,
    }
    for traj in trajs:
        seed_dir = os.path.join(exp_dir, str(traj.seed))
        os.makedirs(seed_dir, exist_ok=True)
        traj.to_csv(os.path.join(seed_dir, "trajectory.csv"))
        with open(os.path.join(seed_dir, "meta.json"), "w") as fh:
            json.dump({**meta_common, "seed": traj.seed}, fh, indent=1,
                      sort_keys=True)
            fh.write("\n")
    summary = summarize_from_disk(cfg, exp_dir)
    with open(os.path.join(exp_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return summary


def compare_experiments(cfgs: list[ExperimentConfig]):
    """Aligned per-step median optimal-set frequency for each experiment.

    All configs must share graph, rewards, step budget and stride; returns
    (ns, {name: medians}) ready for CSV emission or plotting.
    """
    if not cfgs:
        raise ConfigError("need at least one config to compare")
    ref = cfgs[0]
    for other in cfgs[1:]:
        if other.graph_spec != ref.graph_spec:
            raise ConfigError("compared configs must share the same graph")
        if not np.array_equal(other.mu, ref.mu):
            raise ConfigError("compared configs must share the same rewards")
        if (other.n_steps, other.record_stride) != (ref.n_steps, ref.record_stride):
            raise ConfigError("compared configs must share n_steps and stride")
    from .analysis import optimal_set
    best = optimal_set(ref.mu)
    columns = {}
    ns = None
    for cfg in cfgs:
        trajs = run_trajectories(cfg)
        ns = trajs[0].ns
        mass = np.stack([t.xs[:, best].sum(axis=1) for t in trajs])
        columns[cfg.name] = np.median(mass, axis=0)
    return ns, columns


def comparison_csv(ns, columns: dict) -> str:
    names = list(columns)
    lines = ["n," + ",".join(names)]
    for k in range(len(ns)):
        lines.append(",".join([str(int(ns[k]))] +
                              [repr(float(columns[n][k])) for n in names]))
    return "\n".join(lines) + "\n"
