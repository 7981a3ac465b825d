"""Learning and testing loops, repeated experiments and CSV exports."""
from __future__ import annotations

import configparser
import csv
import dataclasses
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .envs import Environment, make_env
from .errors import InvalidArgumentError, NumericDegeneracyError
from .features import BranchRule, RbfSet, RgdConfig, rgd_update
from .ktd import StateModel, build_measurement, state_value
from .mmae import FilterBank, mmktd_step
from .policy import UniformRandomPolicy, active_action
from .types import Transition, WeightBelief

log = logging.getLogger(__name__)

AGENTS = ("ktd", "mmktd", "mmktd_p")
DEFAULT_R_CANDIDATES = (0.01, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0)

_ENV_DEFAULTS = {
    "pendulum": dict(
        rbf_grid=[[-math.pi / 4, 0.0, math.pi / 4], [-0.5, 0.0, 0.5]],
        lambda_mu=200.0,
        lambda_sigma=100.0,
    ),
    "mountain_car": dict(
        rbf_grid=[[-0.775, -0.35, 0.775], [-0.035, 0.0, 0.035]],
        lambda_mu=100.0,
        lambda_sigma=80.0,
    ),
}

SWEEP_COLUMNS = ["env", "agent", "train_episodes", "repeat", "successes", "trials",
                 "mean_success", "ci95_halfwidth", "wallclock_s"]

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(*parts: int) -> int:
    """Mix integers into one 64-bit seed; order matters."""
    x = 0
    for p in parts:
        x = splitmix64(x ^ splitmix64(int(p) & _MASK64))
    return x


@dataclass
class RunConfig:
    env: str = "pendulum"
    agent: str = "mmktd"
    gamma: float = 0.95
    theta0: list | None = None
    p0_scale: float = 10.0
    q_scale: float = 1e-3
    r_candidates: list = field(default_factory=lambda: list(DEFAULT_R_CANDIDATES))
    single_r: float = 1.0
    rbf_grid: list | None = None
    rbf_sigma_scale: float = 1.0
    include_bias: bool = True
    rbf: dict | None = None
    lambda_mu: float | None = None
    lambda_sigma: float | None = None
    branch_rule: str = "paper_literal"
    # At the published rates the basis adaptation diverges; see README.
    rgd_enabled: bool = False
    weighting_mode: str = "recursive"
    likelihood_form: str = "full_gaussian"
    ktd_policy: str = "active_info"
    # Exact ties in the behaviour policy: seeded uniform draw or lowest index.
    tie_break: str = "random"
    train_episodes: int = 30
    test_trials: int = 50
    repeats: int = 10
    master_seed: int = 0
    max_steps_train: int | None = None
    max_steps_test: int | None = None
    n_jobs: int = 1

    def __post_init__(self):
        if self.env not in _ENV_DEFAULTS:
            raise InvalidArgumentError(f"unknown environment {self.env!r}")
        if self.agent not in AGENTS:
            raise InvalidArgumentError(f"unknown agent {self.agent!r}")
        for key, value in _ENV_DEFAULTS[self.env].items():
            if getattr(self, key) is None:
                setattr(self, key, value)
        if self.train_episodes < 1:
            raise InvalidArgumentError("train_episodes must be at least 1")
        if self.test_trials < 1 or self.repeats < 1:
            raise InvalidArgumentError("test_trials and repeats must be at least 1")
        if not 0.0 <= self.gamma <= 1.0:
            raise InvalidArgumentError("gamma must lie in [0, 1]")
        scales = [self.p0_scale, self.q_scale, self.single_r, self.rbf_sigma_scale,
                  self.lambda_mu, self.lambda_sigma, *self.r_candidates]
        if any(not v > 0 for v in scales):
            raise InvalidArgumentError("all scales, rates and noise candidates must be positive")
        BranchRule(self.branch_rule)
        if self.ktd_policy not in ("active_info", "uniform_random"):
            raise InvalidArgumentError("ktd_policy must be active_info or uniform_random")
        if self.tie_break not in ("random", "lowest"):
            raise InvalidArgumentError("tie_break must be random or lowest")

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def make_env(self) -> Environment:
        overrides = {}
        if self.max_steps_train is not None:
            overrides["max_steps_train"] = self.max_steps_train
        if self.max_steps_test is not None:
            overrides["max_steps_test"] = self.max_steps_test
        return make_env(self.env, **overrides)

    def make_rbfs(self, n_actions: int) -> RbfSet:
        if self.rbf is not None:
            return RbfSet.from_dict(self.rbf)
        return RbfSet.grid(self.rbf_grid, n_actions, self.rbf_sigma_scale, self.include_bias)

    def make_bank(self) -> FilterBank:
        r = [self.single_r] if self.agent == "ktd" else self.r_candidates
        return FilterBank(r, weighting_mode=self.weighting_mode,
                          likelihood_form=self.likelihood_form)


def load_config(path) -> RunConfig:
    """Read a run config: one ``[run]`` section of ``key = <json value>`` lines."""
    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_file(fh)
    if not parser.has_section("run"):
        raise InvalidArgumentError(f"{path}: missing [run] section")
    known = {f.name for f in dataclasses.fields(RunConfig)}
    values = {}
    for key, raw in parser.items("run"):
        if key not in known:
            raise InvalidArgumentError(f"{path}: unknown key {key!r}")
        try:
            values[key] = json.loads(raw)
        except json.JSONDecodeError:
            values[key] = raw
    return RunConfig(**values)


def dump_config(cfg: RunConfig) -> str:
    parser = configparser.ConfigParser()
    parser["run"] = {k: json.dumps(v) for k, v in cfg.to_dict().items()}
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


@dataclass
class Snapshot:
    """Trained agent state: features, weight belief and filter bank."""

    rbfs: RbfSet
    belief: WeightBelief
    bank: FilterBank
    episode_steps: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "rbf": self.rbfs.to_dict(),
            "theta": self.belief.theta.tolist(),
            "cov": self.belief.cov.tolist(),
            "r_candidates": self.bank.r_candidates.tolist(),
            "weights": self.bank.weights.tolist(),
            "weighting_mode": self.bank.weighting_mode.value,
            "likelihood_form": self.bank.likelihood_form.value,
            "episode_steps": list(self.episode_steps),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Snapshot":
        return cls(RbfSet.from_dict(data["rbf"]),
                   WeightBelief(data["theta"], data["cov"]),
                   FilterBank(data["r_candidates"], data["weights"],
                              data.get("weighting_mode", "memoryless"),
                              data.get("likelihood_form", "exponent_only")),
                   data.get("episode_steps", []))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path) -> "Snapshot":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


class Agent:
    """One learner: RBF set, weight belief, filter bank and behaviour policy."""

    def __init__(self, cfg: RunConfig, n_actions: int, seed: int):
        self.cfg = cfg
        self.rbfs = cfg.make_rbfs(n_actions)
        dim = self.rbfs.feature_dim
        self.belief = WeightBelief.initial(dim, cfg.p0_scale, cfg.theta0)
        self.model = StateModel(dim, cfg.q_scale, cfg.gamma)
        self.bank = cfg.make_bank()
        self.rgd = RgdConfig(cfg.lambda_mu, cfg.lambda_sigma, cfg.branch_rule)
        random_behaviour = cfg.agent == "mmktd_p" or (
            cfg.agent == "ktd" and cfg.ktd_policy == "uniform_random")
        self._random = UniformRandomPolicy(n_actions, seed) if random_behaviour else None
        self._tie_rng = (np.random.default_rng(derive_seed(seed, 1))
                         if cfg.tie_break == "random" else None)

    def act(self, s) -> int:
        if self._random is not None:
            return self._random()
        return active_action(self.rbfs, self.belief, s, self.cfg.gamma, rng=self._tie_rng)

    def observe(self, t: Transition) -> None:
        row = build_measurement(self.rbfs, self.belief, t, self.cfg.gamma)
        self.belief = mmktd_step(self.belief, self.model, row, self.bank)
        if self.cfg.rgd_enabled:
            self.rbfs = rgd_update(self.rbfs, self.rgd, t, self.belief, self.cfg.gamma)

    def snapshot(self, episode_steps) -> Snapshot:
        return Snapshot(self.rbfs.copy(), self.belief.copy(), self.bank.copy(),
                        list(episode_steps))


def _repeat_seed(cfg: RunConfig, repeat: int) -> int:
    return derive_seed(cfg.master_seed, repeat)


def train(cfg: RunConfig, seed: int | None = None, diagnostics=None) -> Snapshot:
    """Learning phase: ``cfg.train_episodes`` episodes of online updates.

    `diagnostics`, when given, is a csv writer that receives one row per
    step: step, innovation, mode weights, effective R.
    """
    if cfg.train_episodes < 1:
        raise InvalidArgumentError("train_episodes must be at least 1")
    seed = _repeat_seed(cfg, 0) if seed is None else seed
    env = cfg.make_env()
    agent = Agent(cfg, env.n_actions, derive_seed(seed, 2))
    steps_per_episode = []
    step_index = 0
    for episode in range(cfg.train_episodes):
        rng = np.random.default_rng(derive_seed(seed, 0, episode))
        s = env.reset(rng)
        steps = 0
        for _ in range(env.max_steps_train):
            a = agent.act(s)
            out = env.step(s, a)
            agent.observe(Transition(s, a, out.reward, out.next_state, out.terminal))
            steps += 1
            if diagnostics is not None:
                diagnostics.writerow([step_index, repr(agent.bank.last_innovation),
                                      *map(repr, agent.bank.weights.tolist()),
                                      repr(agent.bank.effective_r)])
            step_index += 1
            s = out.next_state
            if out.terminal:
                break
        steps_per_episode.append(steps)
    return agent.snapshot(steps_per_episode)


def run_test_episode(snapshot: Snapshot, env: Environment, rng, max_steps: int,
                     trajectory=None) -> bool:
    rbfs, theta = snapshot.rbfs, snapshot.belief.theta
    s = env.reset(rng)
    terminal = False
    steps = 0
    for steps in range(1, max_steps + 1):
        a = rbfs.greedy(s, theta)
        out = env.step(s, a)
        if trajectory is not None:
            trajectory.append((steps - 1, *s.tolist(), a, out.reward))
        s = out.next_state
        if out.terminal:
            terminal = True
            break
    return env.test_success(steps, terminal)


def test(snapshot: Snapshot, cfg: RunConfig, seed: int | None = None,
         max_steps: int | None = None) -> int:
    """Testing phase: greedy rollouts, nothing is updated. Returns successes."""
    seed = _repeat_seed(cfg, 0) if seed is None else seed
    env = cfg.make_env()
    max_steps = env.max_steps_test if max_steps is None else max_steps
    wins = 0
    for trial in range(cfg.test_trials):
        rng = np.random.default_rng(derive_seed(seed, 1, trial))
        wins += run_test_episode(snapshot, env, rng, max_steps)
    return wins


def greedy_trajectory(snapshot: Snapshot, cfg: RunConfig, seed: int) -> list:
    """Rows ``(step, *state, action, reward)`` of one greedy test episode."""
    env = cfg.make_env()
    rows = []
    run_test_episode(snapshot, env, np.random.default_rng(seed), env.max_steps_test, rows)
    return rows


@dataclass
class ExperimentReport:
    env: str
    agent: str
    train_episodes: int
    test_trials: int
    successes: list
    seeds: list
    train_steps: list
    wallclock_s: list
    failures: dict
    config: dict

    @property
    def completed(self) -> list:
        return [s for s in self.successes if s is not None]

    @property
    def mean_success(self) -> float:
        done = self.completed
        return float(np.mean(done)) if done else float("nan")

    @property
    def ci95_halfwidth(self) -> float:
        done = self.completed
        if len(done) < 2:
            return 0.0
        return float(1.96 * np.std(done, ddof=1) / math.sqrt(len(done)))

    @property
    def ci_degenerate(self) -> bool:
        return len(self.completed) < 2

    @property
    def success_rate(self) -> float:
        return self.mean_success / self.test_trials


def _one_repeat(args):
    cfg, repeat = args
    seed = _repeat_seed(cfg, repeat)
    start = time.perf_counter()
    try:
        snap = train(cfg, seed)
        wins = test(snap, cfg, seed)
    except NumericDegeneracyError as exc:
        log.warning("repeat %d aborted: %s", repeat, exc)
        return repeat, seed, None, [], time.perf_counter() - start, str(exc)
    return repeat, seed, wins, snap.episode_steps, time.perf_counter() - start, None


def run_experiment(cfg: RunConfig) -> ExperimentReport:
    """``cfg.repeats`` independent train/test cycles with seed-derived streams."""
    jobs = [(cfg, r) for r in range(cfg.repeats)]
    if cfg.n_jobs > 1:
        with ProcessPoolExecutor(cfg.n_jobs) as pool:
            results = list(pool.map(_one_repeat, jobs))
    else:
        results = [_one_repeat(j) for j in jobs]
    report = ExperimentReport(cfg.env, cfg.agent, cfg.train_episodes, cfg.test_trials,
                              successes=[r[2] for r in results],
                              seeds=[r[1] for r in results],
                              train_steps=[r[3] for r in results],
                              wallclock_s=[r[4] for r in results],
                              failures={r[0]: r[5] for r in results if r[5] is not None},
                              config=cfg.to_dict())
    if report.ci_degenerate:
        log.warning("fewer than two completed repeats; CI half-width reported as 0")
    return report


def sweep(cfg: RunConfig, episodes, agents=None) -> list:
    agents = [cfg.agent] if agents is None else list(agents)
    return [run_experiment(cfg.replace(agent=agent, train_episodes=int(n)))
            for agent in agents for n in episodes]


def write_sweep_csv(reports, fh, timing: bool = False) -> None:
    """One row per repeat plus a ``mean`` row per (agent, budget).

    ``wallclock_s`` is left blank unless `timing` is set, so that equal
    seeds give byte-identical files.
    """
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for rep in reports:
        mean = f"{rep.mean_success:.6f}"
        ci = f"{rep.ci95_halfwidth:.6f}"
        for i, wins in enumerate(rep.successes):
            wall = f"{rep.wallclock_s[i]:.3f}" if timing else ""
            writer.writerow([rep.env, rep.agent, rep.train_episodes, i,
                             "" if wins is None else wins, rep.test_trials, mean, ci, wall])
        wall = f"{sum(rep.wallclock_s):.3f}" if timing else ""
        writer.writerow([rep.env, rep.agent, rep.train_episodes, "mean",
                         f"{rep.mean_success:.6f}", rep.test_trials, mean, ci, wall])


def export_value_surface(snapshot: Snapshot, grid, fh=None) -> list:
    """Evaluate ``V(s) = max_a Q(s, a)`` on a rectangular grid.

    `grid` is a sequence of ``(low, high, count)`` per state dimension.
    Returns the rows and, if `fh` is given, writes them as CSV with
    columns ``s1, s2, ..., V``.
    """
    axes = [np.linspace(lo, hi, int(n)) for lo, hi, n in grid]
    if not axes or any(ax.size == 0 for ax in axes):
        raise InvalidArgumentError("value-surface grid must have at least one point per axis")
    if len(axes) != snapshot.rbfs.state_dim:
        raise InvalidArgumentError("grid dimension does not match state dimension")
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(axes))
    rows = [(*pt.tolist(), state_value(snapshot.rbfs, snapshot.belief, pt)) for pt in mesh]
    if fh is not None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"s{i + 1}" for i in range(len(axes))] + ["V"])
        writer.writerows([[repr(v) for v in row] for row in rows])
    return rows


def write_trajectory_csv(rows, fh, state_dim: int = 2) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["step", *[f"s{i + 1}" for i in range(state_dim)], "action", "reward"])
    writer.writerows(rows)
