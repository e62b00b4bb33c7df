"""Exact and empirical evaluation of a trained sampler.

The exact terminating distribution is a forward dynamic program over the
bipartite DAG: unit mass at the root, even -> odd through the forward
policy, odd -> even through the TRUE transition kernel, terminal mass
collected on arrival.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from statistics import median
from typing import Optional

import numpy as np

from . import autodiff as ad
from .errors import NotEnumerableError, UsageError

MASS_TOL = 1e-9


def exact_terminating_distribution(env, policy, cap=500_000):
    """Terminal state -> probability of a sampled trajectory ending there."""
    if not env.enumerable:
        raise NotEnumerableError(f"{env.fingerprint}: exact DP needs enumeration")
    if env.state_count() > cap:
        raise NotEnumerableError(
            f"{env.fingerprint}: {env.state_count()} states exceeds cap {cap}")
    evens = env.even_states_topo()
    nonterm = [s for s in evens if not env.is_terminal(s)]
    with ad.no_grad():
        probs = {}
        chunk = 4096
        for i in range(0, len(nonterm), chunk):
            batch = nonterm[i:i + chunk]
            lp = policy.bind(batch).fwd(np.arange(len(batch))).value
            p = np.exp(lp)
            p[~np.isfinite(lp)] = 0.0
            for s, row in zip(batch, p):
                probs[s] = row
    mass = defaultdict(float)
    mass[env.s0] = 1.0
    pt = {}
    for s in evens:
        mu = mass.get(s, 0.0)
        if env.is_terminal(s):
            if mu > 0.0:
                pt[s] = mu
            continue
        if mu == 0.0:
            continue
        row = probs[s]
        for a in env.actions(s):
            pa = mu * row[a]
            if pa == 0.0:
                continue
            for s_next, p in env.kernel_support(s, a):
                mass[s_next] += pa * p
    total = sum(pt.values())
    if abs(total - 1.0) > 1e-6:
        raise RuntimeError(f"DP mass leak: terminal mass sums to {total}")
    return pt


def target_distribution(env, beta=1.0):
    """Reward-proportional target p(x) = R(x)^beta / sum R^beta over terminals."""
    terms = env.terminal_states()
    if hasattr(env, "all_terminal_rewards"):
        r = env.all_terminal_rewards() ** beta
    else:
        r = np.array([env.reward(x) for x in terms]) ** beta
    return terms, r / r.sum()


def l1_error(pt, env, beta=1.0, reduction="mean"):
    """Mean (or summed) absolute gap to the reward-proportional target."""
    terms, p = target_distribution(env, beta)
    q = np.array([pt.get(x, 0.0) for x in terms])
    gaps = np.abs(p - q)
    if reduction == "mean":
        return float(gaps.mean())
    if reduction == "sum":
        return float(gaps.sum())
    raise UsageError(f"unknown reduction {reduction!r}")


def empirical_distribution(samples):
    counts = defaultdict(int)
    for x in samples:
        counts[x] += 1
    n = len(samples)
    return {x: c / n for x, c in counts.items()}


@dataclass
class ModeTracker:
    """First-discovery bookkeeping over an environment's designated modes."""

    env: object
    discovered: dict = field(default_factory=dict)  # mode id -> iteration

    def update(self, samples, iteration=0):
        for x in samples:
            m = self.env.mode_of(x)
            if m is not None and m not in self.discovered:
                self.discovered[m] = iteration
        return self

    @property
    def count(self):
        return len(self.discovered)


def topk_stats(samples, k, env):
    """(mean, median) of the k highest terminal rewards in the sample list."""
    if len(samples) < k:
        raise UsageError(f"need at least k={k} samples, got {len(samples)}")
    rewards = sorted((env.reward(x) for x in samples), reverse=True)[:k]
    return float(np.mean(rewards)), float(median(rewards))


def gradient_norm(policy):
    total = 0.0
    for p in policy.gfn_params():
        if p.grad is not None:
            total += float(np.sum(p.grad * p.grad))
    return float(np.sqrt(total))


def gradient_norm_samples(policy, env, objective, dyn, n_batches, rollouts,
                          epsilon, rng):
    """Per-batch gradient norms at fixed parameters (no updates applied)."""
    from . import objectives as obj
    from .policy import sample_trajectories

    norms = []
    for _ in range(n_batches):
        trajs = sample_trajectories(policy, env, rollouts, epsilon, rng)
        for p in policy.gfn_params():
            p.grad = None
        policy.logz.grad = None
        loss, _ = obj.objective_loss(objective, policy, trajs, dyn=dyn)
        ad.backward(loss)
        norms.append(gradient_norm(policy))
    return np.array(norms)
