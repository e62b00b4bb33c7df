"""Metropolis-Hastings baseline over complete terminal objects.

Samples the same reward-proportional target as the GFlowNet methods; the
transition-kernel noise alpha does not apply here. One MH step is charged
as one sample so curves align with rollout counts.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .evaluation import ModeTracker, target_distribution
from .trainer import MetricsRecord


@dataclass
class McmcConfig:
    chains: int = 16
    steps: int = 1000
    beta: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.chains < 1 or self.steps < 1:
            raise ConfigError("chains and steps must be >= 1")


def mh_chain(env, steps, beta, rng):
    """One chain; emits the current object after every step."""
    x = env.random_object(rng)
    rx = env.object_reward(x)
    out = []
    for _ in range(steps):
        y = env.propose_object(x, rng)
        ry = env.object_reward(y)
        # single-site uniform resampling is symmetric, so the Hastings
        # correction cancels
        if rng.random() < min(1.0, (ry / rx) ** beta):
            x, rx = y, ry
        out.append(x)
    return out


def mh_run(env, cfg: McmcConfig):
    """All chains, chain-major emission order, deterministic per seed."""
    streams = [np.random.default_rng(s)
               for s in np.random.SeedSequence(cfg.seed).spawn(cfg.chains)]
    return [mh_chain(env, cfg.steps, cfg.beta, rng) for rng in streams]


def run_mcmc(env, cfg: McmcConfig, eval_every=100, window=100_000, topk=100,
             sink=None, method="mcmc"):
    """Drive the chains and emit the shared metrics-record stream.

    One step across all chains counts as one iteration, matching a GFlowNet
    iteration of `chains` rollouts.
    """
    t0 = time.perf_counter()
    chains = mh_run(env, cfg)
    tracker = ModeTracker(env)
    win = deque(maxlen=window)
    tidx = p = None
    if env.enumerable and env.state_count() <= 500_000:
        terms, p = target_distribution(env, cfg.beta)
        tidx = {x: i for i, x in enumerate(terms)}
    metrics = []
    for it in range(1, cfg.steps + 1):
        for chain in chains:
            x = chain[it - 1]
            term = env.object_terminal(x)
            tracker.update([term], it)
            win.append((term, env.object_reward(x)))
        if it % eval_every == 0 or it == cfg.steps:
            l1_emp = None
            if tidx is not None:
                q = np.zeros(len(tidx))
                for term, _ in win:
                    q[tidx[term]] += 1.0
                q /= q.sum()
                l1_emp = float(np.abs(p - q).mean())
            top_mean = top_median = None
            if len(win) >= topk:
                rewards = np.fromiter((r for _, r in win), dtype=np.float64)
                top = np.sort(rewards)[-topk:]
                top_mean, top_median = float(top.mean()), float(np.median(top))
            rec = MetricsRecord(
                iteration=it, wall_ms=int((time.perf_counter() - t0) * 1000),
                loss=None, model_loss=None, l1_exact=None, l1_empirical=l1_emp,
                modes=tracker.count, top100_mean=top_mean,
                top100_median=top_median, clamped_terms=0, grad_norm=None,
                seed=cfg.seed, method=method, env=env.fingerprint)
            metrics.append(rec)
            if sink is not None:
                sink(rec)
    return metrics
