"""Benchmark harness and command-line interface.

``extrl run`` produces a reward-per-turn table (one row per agent x env,
aggregated over seeds); ``extrl curves`` produces per-episode learning
curves for combined environments; ``extrl list`` prints the registries.
Every run with seed index ``s`` uses ``s`` for both the agent and the
environment, so outputs are reproducible without a seed table.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import agents
from .combine import env_factory, registered_env_names
from .core import AgentFactory, ExtRLError, Interaction, run_interaction
from .reality_check import rc_wrap

log = logging.getLogger(__name__)

REVERSE_HISTORY_STEP_CAP = 10_000
DEFAULT_CURVE_EPISODES = 10_000
DEFAULT_CURVE_SEEDS = 10
MOVING_AVERAGE_WINDOW = 100

AGENT_NAMES = ("constant", "constant_never_push", "constant_always_push", "random", "q")

_PARAM_ALIASES = {
    "lr": "learning_rate",
    "learning_rate": "learning_rate",
    "gamma": "discount",
    "discount": "discount",
    "eps": "exploration",
    "epsilon": "exploration",
    "exploration": "exploration",
    "tie_break": "tie_break",
    "k": "k",
    "y": "y",
}


class ConfigError(ExtRLError, ValueError):
    pass


# --------------------------------------------------------------------------
# agent specs
# --------------------------------------------------------------------------


def _split_top_level(text: str, sep: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise ConfigError(f"unbalanced parentheses in {text!r}")
        if ch == sep and depth == 0:
            parts.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    if depth != 0:
        raise ConfigError(f"unbalanced parentheses in {text!r}")
    parts.append("".join(cur).strip())
    return [p for p in parts if p]


def _parse_value(raw: str) -> Any:
    raw = raw.strip()
    for conv in (int, float):
        try:
            return conv(raw)
        except ValueError:
            pass
    return raw


def _parse_args(body: str) -> dict[str, Any]:
    out = {}
    for item in _split_top_level(body, ";"):
        if "=" not in item:
            raise ConfigError(f"expected key=value, got {item!r}")
        key, value = item.split("=", 1)
        key = key.strip()
        if key not in _PARAM_ALIASES:
            raise ConfigError(f"unknown agent parameter {key!r}")
        out[_PARAM_ALIASES[key]] = _parse_value(value)
    return out


_SPEC_RE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*(?:\((.*)\))?\s*$", re.S)


def parse_agent(
    spec: str,
    *,
    action_count: int = 2,
    obs_count: int = 1,
    seed: int = 0,
    overrides: dict[str, dict[str, Any]] | None = None,
) -> AgentFactory:
    """Build a factory from an agent spec such as ``q(lr=0.2)`` or ``rc(q;y=1)``.

    ``overrides`` maps a spec string (or a bare kind name) to config fields
    applied to the learner it names.
    """
    overrides = overrides or {}
    m = _SPEC_RE.match(spec)
    if not m:
        raise ConfigError(f"cannot parse agent spec {spec!r}")
    name, body = m.group(1), m.group(2)
    if name == "rc":
        if not body:
            raise ConfigError("rc(...) needs an inner agent")
        inner_spec, *rest = _split_top_level(body, ";")
        opts = _parse_args(";".join(rest)) if rest else {}
        unknown = set(opts) - {"y"}
        if unknown:
            raise ConfigError(f"rc() accepts only y=<action>, got {sorted(unknown)}")
        inner = parse_agent(
            inner_spec, action_count=action_count, obs_count=obs_count, seed=seed, overrides=overrides
        )
        return rc_wrap(inner, opts.get("y"))

    opts = _parse_args(body) if body else {}
    for key in (name, spec.strip()):
        opts.update({_PARAM_ALIASES.get(k, k): v for k, v in overrides.get(key, {}).items()})
    spaces = dict(action_count=action_count, obs_count=obs_count, seed=seed)
    if name in ("constant", "constant_never_push", "constant_always_push"):
        k = opts.pop("k", 1 if name == "constant_always_push" else 0)
        _reject_extra(name, opts)
        return agents.constant(int(k), **spaces)
    if name == "random":
        _reject_extra(name, opts)
        return agents.random_agent(**spaces)
    if name == "q":
        q_opts = {k: opts.pop(k) for k in ("learning_rate", "discount", "exploration", "tie_break") if k in opts}
        _reject_extra(name, opts)
        return agents.q_learner(**q_opts, **spaces)
    raise ConfigError(f"unknown agent {name!r}; known: {', '.join(AGENT_NAMES)}, rc(<agent>)")


def _reject_extra(name: str, opts: dict) -> None:
    if opts:
        raise ConfigError(f"agent {name!r} does not accept {sorted(opts)}")


# --------------------------------------------------------------------------
# config and results
# --------------------------------------------------------------------------


@dataclass
class BenchConfig:
    agents: list[str] = field(default_factory=lambda: ["q"])
    envs: list[str] = field(default_factory=lambda: ["tempting_button"])
    steps: int = 100_000
    seeds: int = 5
    episodes: int = DEFAULT_CURVE_EPISODES
    episode_curves: bool = False
    output_path: str = "result_table.csv"
    overrides: dict[str, dict[str, Any]] = field(default_factory=dict)
    allow_quadratic: bool = False

    def validate(self) -> None:
        if self.steps < 1 or self.seeds < 1 or self.episodes < 1:
            raise ConfigError("steps, seeds and episodes must all be >= 1")
        if not self.agents or not self.envs:
            raise ConfigError("at least one agent and one environment are required")
        for env in self.envs:
            env_factory(env)
        for spec in self.agents:
            parse_agent(spec, overrides=self.overrides)

    @classmethod
    def from_json(cls, path: str | os.PathLike) -> BenchConfig:
        try:
            data = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class ResultRow:
    agent: str
    env: str
    steps: int
    seeds: int
    mean_reward_per_turn: float
    stderr: float


def parse_agent_for(ef, spec: str, seed: int, overrides=None) -> AgentFactory:
    return parse_agent(
        spec,
        action_count=ef.action_count,
        obs_count=ef.observation_count,
        seed=seed,
        overrides=overrides,
    )


def _effective_steps(env: str, config: BenchConfig) -> int:
    if "reverse_history" in env and config.steps > REVERSE_HISTORY_STEP_CAP and not config.allow_quadratic:
        log.warning(
            "reverse_history costs O(steps^2); capping %d steps at %d (pass --allow-quadratic to lift)",
            config.steps,
            REVERSE_HISTORY_STEP_CAP,
        )
        return REVERSE_HISTORY_STEP_CAP
    return config.steps


def _mean_reward_job(job: tuple) -> float:
    spec, env, steps, seed, overrides = job
    ef = env_factory(env)
    record = run_interaction(parse_agent_for(ef, spec, seed, overrides), ef, steps, seed)
    return record.mean_reward_per_turn


def _episode_job(job: tuple) -> list[float]:
    spec, env, episodes, seed, overrides = job
    return episode_rewards(parse_agent_for(env_factory(env), spec, seed, overrides), env, episodes, seed)


def worker_count(jobs: int) -> int:
    cap = os.environ.get("EXTRL_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise ConfigError(f"EXTRL_THREADS must be an integer, got {cap!r}") from None
    return max(1, min(n, jobs))


def _map_jobs(fn, jobs: list) -> list:
    # results come back in job order whatever the schedule
    workers = worker_count(len(jobs))
    if workers == 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def summarize(per_seed: Sequence[float]) -> tuple[float, float]:
    """Mean and standard error (sample std / sqrt(n); 0 for a single seed)."""
    values = np.asarray(per_seed, dtype=float)
    mean = float(values.mean())
    if len(values) < 2:
        return mean, 0.0
    return mean, float(values.std(ddof=1) / math.sqrt(len(values)))


def run_benchmark(config: BenchConfig) -> list[ResultRow]:
    config.validate()
    pairs = [(a, e) for a in config.agents for e in config.envs]
    steps = {e: _effective_steps(e, config) for e in config.envs}
    jobs = [(a, e, steps[e], s, config.overrides) for a, e in pairs for s in range(config.seeds)]
    means = _map_jobs(_mean_reward_job, jobs)
    rows = []
    for i, (agent, env) in enumerate(pairs):
        chunk = means[i * config.seeds : (i + 1) * config.seeds]
        mean, stderr = summarize(chunk)
        rows.append(ResultRow(agent, env, steps[env], config.seeds, mean, stderr))
    return rows


def _fmt(x: float) -> str:
    return f"{x:.5f}"


def write_result_table(rows: Sequence[ResultRow], path: str | os.PathLike) -> None:
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["agent", "env", "steps", "seeds", "mean_reward_per_turn", "stderr"])
            for r in rows:
                w.writerow([r.agent, r.env, r.steps, r.seeds, _fmt(r.mean_reward_per_turn), _fmt(r.stderr)])
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write result table {path}: {exc.strerror}") from exc


# --------------------------------------------------------------------------
# learning curves
# --------------------------------------------------------------------------


def episode_rewards(agent_factory: AgentFactory, env: str, episodes: int, seed: int) -> list[float]:
    """Total reward of each of the first ``episodes`` episodes of a combined run."""
    ef = env_factory(env)
    if not ef.episodic:
        raise ConfigError(f"{env!r} has no episode structure; curves need a control task")
    run = Interaction(agent_factory, ef, seed)
    run.start()
    out: list[float] = []
    total = 0.0
    step, task = run.step, run.env
    while len(out) < episodes:
        total += step()[1]
        if task.episode_done:
            out.append(total)
            total = 0.0
    return out


def mean_curve_path(path: str | os.PathLike) -> Path:
    p = Path(path)
    return p.with_name(f"{p.stem}_mean{p.suffix or '.csv'}")


def moving_average(values: Sequence[float], window: int = MOVING_AVERAGE_WINDOW) -> np.ndarray:
    """Trailing mean over up to ``window`` values ending at each position."""
    v = np.asarray(values, dtype=float)
    csum = np.concatenate(([0.0], np.cumsum(v)))
    idx = np.arange(1, len(v) + 1)
    lo = np.maximum(0, idx - window)
    return (csum[idx] - csum[lo]) / (idx - lo)


def run_curves(config: BenchConfig) -> dict[tuple[str, str], np.ndarray]:
    """Write per-episode curves and their cross-seed means.

    Returns a mapping (agent, env) -> array of shape (seeds, episodes).
    """
    config.validate()
    for env in config.envs:
        if not env_factory(env).episodic:
            raise ConfigError(f"{env!r} has no episode structure; curves need a control task")
    pairs = [(a, e) for a in config.agents for e in config.envs]
    jobs = [(a, e, config.episodes, s, config.overrides) for a, e in pairs for s in range(config.seeds)]
    results = _map_jobs(_episode_job, jobs)
    curves = {}
    for i, pair in enumerate(pairs):
        curves[pair] = np.array(results[i * config.seeds : (i + 1) * config.seeds], dtype=float)

    path = Path(config.output_path)
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["agent", "env", "seed", "episode", "episode_reward"])
            for (agent, env), arr in curves.items():
                for seed, row in enumerate(arr):
                    for ep, value in enumerate(row, start=1):
                        w.writerow([agent, env, seed, ep, _fmt(value)])
        with open(mean_curve_path(path), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["agent", "env", "episode", "mean_episode_reward", f"moving_average_{MOVING_AVERAGE_WINDOW}"])
            for (agent, env), arr in curves.items():
                mean = arr.mean(axis=0)
                for ep, (m, ma) in enumerate(zip(mean, moving_average(mean)), start=1):
                    w.writerow([agent, env, ep, _fmt(m), _fmt(ma)])
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write curves {path}: {exc.strerror}") from exc
    return curves


# --------------------------------------------------------------------------
# CLI
# --------------------------------------------------------------------------


def _split_names(values: Sequence[str] | None) -> list[str] | None:
    if values is None:
        return None
    out = []
    for v in values:
        out += _split_top_level(v, ",")
    return out


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="extrl", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="reward-per-turn table over agents x envs x seeds")
    run.add_argument("--config", help="JSON file with BenchConfig fields; flags override it")
    run.add_argument("--agents", nargs="+")
    run.add_argument("--envs", nargs="+")
    run.add_argument("--steps", type=int)
    run.add_argument("--seeds", type=int)
    run.add_argument("--out", dest="output_path")
    run.add_argument(
        "--allow-quadratic",
        action="store_true",
        default=None,
        help="run reverse_history beyond its default step cap",
    )

    curves = sub.add_parser("curves", help="per-episode learning curves for combined environments")
    curves.add_argument("--config")
    curves.add_argument("--agents", nargs="+")
    curves.add_argument("--envs", nargs="+")
    curves.add_argument("--episodes", type=int)
    curves.add_argument("--seeds", type=int)
    curves.add_argument("--out", dest="output_path")

    sub.add_parser("list", help="print the agent and environment registries")
    return parser


def config_from_args(args: argparse.Namespace) -> BenchConfig:
    config = BenchConfig.from_json(args.config) if args.config else None
    if config is None:
        config = BenchConfig()
        if args.command == "curves":
            config.seeds = DEFAULT_CURVE_SEEDS
            config.output_path = "curves.csv"
    if args.command == "curves":
        config.episode_curves = True
    for name in ("agents", "envs"):
        value = _split_names(getattr(args, name))
        if value is not None:
            setattr(config, name, value)
    for name in ("steps", "seeds", "episodes", "output_path", "allow_quadratic"):
        value = getattr(args, name, None)
        if value is not None:
            setattr(config, name, value)
    return config


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "list":
            print("agents: " + ", ".join(AGENT_NAMES) + ", rc(<agent>), rc(<agent>;y=<k>)")
            print("envs:   " + ", ".join(registered_env_names()))
            return 0
        config = config_from_args(args)
        if args.command == "run":
            rows = run_benchmark(config)
            write_result_table(rows, config.output_path)
            for r in rows:
                log.info("%s on %s: %.5f +- %.5f", r.agent, r.env, r.mean_reward_per_turn, r.stderr)
        else:
            run_curves(config)
        return 0
    except (ExtRLError, KeyError, ValueError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"extrl: error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
