"""Interleaved training loop: rollout collection, one GFlowNet update on the
fresh trajectories, and one dynamics-model update from the replay buffer.
"""

from __future__ import annotations

import json
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import autodiff as ad
from . import objectives as obj
from .dynamics import NeuralDynamics, OracleDynamics, ReplayBuffer, TabularDynamics, \
    make_dynamics, model_loss
from .errors import ConfigError, TrainingAborted
from .evaluation import ModeTracker, exact_terminating_distribution, gradient_norm, \
    l1_error, target_distribution
from .policy import make_policy, sample_trajectories

OBJECTIVES = ("db", "tb", "stoch_db", "stoch_tb")

METRIC_KEYS = ("iteration", "wall_ms", "loss", "model_loss", "l1_exact",
               "l1_empirical", "modes", "top100_mean", "top100_median",
               "clamped_terms", "grad_norm", "seed", "method", "env")


@dataclass
class MetricsRecord:
    iteration: int
    wall_ms: int
    loss: Optional[float]
    model_loss: Optional[float]
    l1_exact: Optional[float]
    l1_empirical: Optional[float]
    modes: int
    top100_mean: Optional[float]
    top100_median: Optional[float]
    clamped_terms: int
    grad_norm: Optional[float]
    seed: int
    method: str
    env: str

    def to_json(self):
        return json.dumps({k: getattr(self, k) for k in METRIC_KEYS})

    @classmethod
    def from_json(cls, line):
        return cls(**json.loads(line))


@dataclass
class TrainConfig:
    objective: str = "stoch_db"
    param_kind: str = "tabular"
    dynamics_mode: str = "learned"
    dynamics_kind: str = "neural"
    iterations: int = 1000
    rollouts: int = 16
    model_batch: int = 16
    lr: float = 1e-3
    lr_logz: float = 0.1
    lr_model: float = 1e-4
    epsilon: float = 0.0
    beta: float = 1.0
    buffer_capacity: int = 100_000
    seed: int = 0
    eval_every: int = 100
    hidden: tuple = (256, 256)
    activation: str = "leaky_relu"
    model_hidden: tuple = (256, 256)
    model_activation: str = "leaky_relu"
    uniform_backward: bool = False
    logz_init: float = 0.0
    warmup: int = 10
    window: int = 100_000
    topk: int = 100
    dp_cap: int = 20_000
    smoothing: float = 0.1

    def __post_init__(self):
        if self.objective not in OBJECTIVES:
            raise ConfigError(f"objective must be one of {OBJECTIVES}, "
                              f"got {self.objective!r}")
        if self.dynamics_mode not in ("learned", "oracle"):
            raise ConfigError(f"dynamics_mode must be learned|oracle, "
                              f"got {self.dynamics_mode!r}")
        for name in ("lr", "lr_logz", "lr_model"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be > 0")
        for name in ("iterations", "rollouts", "model_batch", "buffer_capacity",
                     "eval_every"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if not (0.0 <= self.epsilon <= 1.0):
            raise ConfigError(f"epsilon must be in [0,1], got {self.epsilon}")
        if self.beta <= 0:
            raise ConfigError("beta must be > 0")


@dataclass
class TrainRun:
    policy: object
    dyn: object
    metrics: list
    wall_s: float
    visited_pairs: set = field(default_factory=set)


class _EvalState:
    """Cross-iteration evaluation bookkeeping (sample window, modes, targets)."""

    def __init__(self, env, cfg):
        self.env = env
        self.cfg = cfg
        self.window = deque(maxlen=cfg.window)  # (terminal state, reward)
        self.tracker = ModeTracker(env)
        self.exact = env.enumerable and env.state_count() <= cfg.dp_cap
        self._terms = None
        self._tidx = None
        self._p = None
        if env.enumerable and env.state_count() <= 500_000:
            terms, p = target_distribution(env, cfg.beta)
            self._terms, self._p = terms, p
            self._tidx = {x: i for i, x in enumerate(terms)}

    def observe(self, trajs, iteration):
        for t in trajs:
            x = t.terminal_state
            self.window.append((x, t.terminal_reward))
            self.tracker.update([x], iteration)

    def empirical_l1(self):
        if self._tidx is None or not self.window:
            return None
        q = np.zeros(len(self._terms))
        for x, _ in self.window:
            q[self._tidx[x]] += 1.0
        q /= q.sum()
        return float(np.abs(self._p - q).mean())

    def topk(self):
        k = self.cfg.topk
        if len(self.window) < k:
            return None, None
        rewards = np.fromiter((r for _, r in self.window), dtype=np.float64)
        top = np.sort(rewards)[-k:]
        return float(top.mean()), float(np.median(top))


def evaluate_tick(env, policy, dyn, state: _EvalState, *, iteration, wall_ms,
                  loss, mloss, clamped, grad_norm_val, seed, method):
    l1_exact = None
    if state.exact:
        pt = exact_terminating_distribution(env, policy)
        l1_exact = l1_error(pt, env, beta=policy.beta)
    top_mean, top_median = state.topk()
    return MetricsRecord(
        iteration=iteration, wall_ms=wall_ms, loss=loss, model_loss=mloss,
        l1_exact=l1_exact, l1_empirical=state.empirical_l1(),
        modes=state.tracker.count, top100_mean=top_mean,
        top100_median=top_median, clamped_terms=clamped,
        grad_norm=grad_norm_val, seed=seed, method=method, env=env.fingerprint)


def train(env, cfg: TrainConfig, sink=None, method=None):
    """Run the full loop; returns final policy, model, and the metrics stream."""
    t0 = time.perf_counter()
    method = method or cfg.objective
    ss = np.random.SeedSequence(cfg.seed)
    init_rng, rollout_rng, buffer_rng = (np.random.default_rng(s)
                                         for s in ss.spawn(3))
    policy = make_policy(env, cfg.param_kind, beta=cfg.beta, rng=init_rng,
                         hidden=cfg.hidden, activation=cfg.activation,
                         uniform_backward=cfg.uniform_backward)
    # An optimistic partition-function guess keeps early TB residuals
    # positive, which pushes flow away from the first trajectories sampled
    # instead of reinforcing them.
    policy.logz.value = np.array(cfg.logz_init, dtype=np.float64)
    stochastic = cfg.objective.startswith("stoch")
    dyn = None
    if stochastic:
        if cfg.dynamics_mode == "oracle":
            dyn = OracleDynamics(env)
        else:
            dyn = make_dynamics(env, cfg.dynamics_kind, hidden=cfg.model_hidden,
                                activation=cfg.model_activation,
                                lam=cfg.smoothing, rng=init_rng)
    buffer = ReplayBuffer(cfg.buffer_capacity)
    gfn_opt = ad.Adam(ad.param_dict(policy.gfn_params()), cfg.lr)
    logz_opt = (ad.Adam({"logz": policy.logz}, cfg.lr_logz)
                if cfg.objective in ("tb", "stoch_tb") else None)
    model_opt = (ad.Adam(dyn.params(), cfg.lr_model)
                 if isinstance(dyn, NeuralDynamics) else None)

    state = _EvalState(env, cfg)
    metrics = []
    visited = set()
    last_loss = last_mloss = last_gnorm = None
    last_clamped = 0

    for it in range(1, cfg.iterations + 1):
        trajs = sample_trajectories(policy, env, cfg.rollouts, cfg.epsilon,
                                    rollout_rng)
        learned_model = stochastic and cfg.dynamics_mode == "learned"
        if learned_model:
            for t in trajs:
                buffer.push(t)
                for st in t.steps:
                    visited.add((st.s, st.a))

        warm = learned_model and it <= cfg.warmup
        if not warm:
            gfn_opt.zero_grad()
            policy.logz.grad = None
            loss, report = obj.objective_loss(cfg.objective, policy, trajs,
                                              dyn=dyn)
            if not np.isfinite(loss.value):
                raise TrainingAborted(
                    f"non-finite loss at iteration {it}",
                    snapshot=dict(iteration=it, loss=float(loss.value),
                                  clamped_terms=report.clamped_terms,
                                  batch_trajectories=len(trajs)))
            ad.backward(loss)
            last_gnorm = gradient_norm(policy)
            report.grad_norms["gfn"] = last_gnorm
            gfn_opt.step()
            if logz_opt is not None:
                logz_opt.step()
            last_loss = report.mean_loss
            last_clamped = report.clamped_terms

        if learned_model:
            batch = buffer.sample(cfg.model_batch, buffer_rng)
            if isinstance(dyn, TabularDynamics):
                dyn.update(batch)
                last_mloss = float(model_loss(dyn, batch).value)
            else:
                model_opt.zero_grad()
                mloss_t = model_loss(dyn, batch)
                if not np.isfinite(mloss_t.value):
                    raise TrainingAborted(
                        f"non-finite model loss at iteration {it}",
                        snapshot=dict(iteration=it))
                ad.backward(mloss_t)
                model_opt.step()
                last_mloss = float(mloss_t.value)

        state.observe(trajs, it)

        if it % cfg.eval_every == 0 or it == cfg.iterations:
            rec = evaluate_tick(
                env, policy, dyn, state, iteration=it,
                wall_ms=int((time.perf_counter() - t0) * 1000),
                loss=last_loss, mloss=last_mloss, clamped=last_clamped,
                grad_norm_val=last_gnorm, seed=cfg.seed, method=method)
            metrics.append(rec)
            if sink is not None:
                sink(rec)

    return TrainRun(policy=policy, dyn=dyn, metrics=metrics,
                    wall_s=time.perf_counter() - t0, visited_pairs=visited)
