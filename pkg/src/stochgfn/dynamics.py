"""Learned categorical transition model and the interaction replay buffer.

The candidate next-state set for (s, a) is the structural one: the intended
outcomes of every valid action at s, indexed by action slot. Observed next
states map back to a candidate via the intended action of the edge.
"""

from __future__ import annotations

import math
from collections import deque

import numpy as np

from . import autodiff as ad
from .errors import UsageError


class ReplayBuffer:
    """Bounded FIFO of StepRecords; sampling is uniform over stored records."""

    def __init__(self, capacity):
        if capacity < 1:
            raise UsageError("buffer capacity must be >= 1")
        self.capacity = capacity
        self.storage = deque(maxlen=capacity)

    def __len__(self):
        return len(self.storage)

    def push(self, traj):
        if not traj.steps:
            raise UsageError("cannot push an empty trajectory")
        self.storage.extend(traj.steps)

    def sample(self, k, rng):
        if len(self.storage) == 0:
            raise UsageError("cannot sample from an empty buffer")
        idx = rng.integers(0, len(self.storage), size=k)
        return [self.storage[i] for i in idx]

    def dump(self, path):
        """One record per line: s<TAB>a<TAB>s_next<TAB>terminal<TAB>reward."""
        with open(path, "w") as fh:
            for st in self.storage:
                rew = "" if st.reward is None else repr(st.reward)
                fh.write(f"{st.s!r}\t{st.a}\t{st.s_next!r}\t{int(st.terminal)}\t{rew}\n")


class _BatchByLoop:
    def predict_batch(self, steps):
        return np.stack([self.predict(st.s, st.a) for st in steps])


class OracleDynamics(_BatchByLoop):
    """True kernel stand-in for the learned model (exactness tests, ablations)."""

    kind = "oracle"

    def __init__(self, env):
        self.env = env
        self._cache = {}

    def predict(self, s, a):
        key = (s, a)
        if key not in self._cache:
            vec = np.zeros(self.env.n_action_slots)
            for s_next, p in self.env.kernel_support(s, a):
                vec[self.env.candidate_index(s, a, s_next)] = p
            self._cache[key] = vec
        return self._cache[key]


class TabularDynamics(_BatchByLoop):
    """Transition counts with Laplace smoothing; a debugging baseline."""

    kind = "tabular"

    def __init__(self, env, lam=0.1):
        self.env = env
        self.lam = lam
        self.counts = {}

    def _counts(self, s, a):
        key = (s, a)
        if key not in self.counts:
            self.counts[key] = np.zeros(self.env.n_action_slots)
        return self.counts[key]

    def update(self, steps):
        for st in steps:
            ci = self.env.candidate_index(st.s, st.a, st.s_next)
            self._counts(st.s, st.a)[ci] += 1.0

    def predict(self, s, a):
        valid = self.env.actions(s)
        c = self._counts(s, a)[valid]
        denom = c.sum() + self.lam * len(valid)
        vec = np.zeros(self.env.n_action_slots)
        if denom == 0.0:
            vec[valid] = 1.0 / len(valid)
        else:
            vec[valid] = (c + self.lam) / denom
        return vec


class NeuralDynamics:
    """MLP over (state encoding, one-hot action) with softmax over candidates."""

    kind = "neural"

    def __init__(self, env, hidden=(256, 256), activation="leaky_relu", rng=None):
        self.env = env
        rng = rng if rng is not None else np.random.default_rng(0)
        in_dim = env.encoding_dim + env.n_action_slots
        self.trunk = ad.Mlp(in_dim, hidden, rng, "dyn_trunk", activation)
        self.head = ad.Linear(self.trunk.out_dim, env.n_action_slots, rng, "dyn_head")
        self.head.w.value[:] = 0.0

    def params(self):
        return ad.param_dict(self.trunk.params() + self.head.params())

    def _inputs(self, steps):
        env = self.env
        x = np.zeros((len(steps), env.encoding_dim + env.n_action_slots))
        for i, st in enumerate(steps):
            x[i, :env.encoding_dim] = env.encode(st.s)
            x[i, env.encoding_dim + st.a] = 1.0
        return x

    def logprobs(self, steps):
        x = ad.const(self._inputs(steps))
        logits = self.head(self.trunk(x))
        masks = np.stack([self.env.action_mask(st.s) for st in steps])
        return ad.log_softmax(logits, masks)

    def predict(self, s, a):
        from .envs import StepRecord
        return self.predict_batch([StepRecord(s=s, a=a, s_next=None,
                                              terminal=False)])[0]

    def predict_batch(self, steps):
        with ad.no_grad():
            lp = self.logprobs(steps).value
        p = np.exp(lp)
        p[~np.isfinite(lp)] = 0.0
        return p


def model_loss(dyn, steps):
    """Mean negative log-likelihood of observed next states under the model.

    Differentiable for the neural model; a constant diagnostic otherwise.
    """
    if not steps:
        raise UsageError("model_loss needs a non-empty batch")
    env = dyn.env
    cand = []
    for st in steps:
        try:
            cand.append(env.candidate_index(st.s, st.a, st.s_next))
        except UsageError:
            raise UsageError(
                f"observed next state outside candidate set for "
                f"({st.s!r}, {st.a}, {st.s_next!r})")
    if dyn.kind == "neural":
        lp = ad.pick(dyn.logprobs(steps), np.array(cand, dtype=np.intp))
        return ad.neg(ad.tmean(lp))
    total = 0.0
    for st, ci in zip(steps, cand):
        p = max(dyn.predict(st.s, st.a)[ci], ad.LOG_FLOOR)
        total -= math.log(p)
    return ad.const(total / len(steps))


def make_dynamics(env, kind, hidden=(256, 256), activation="leaky_relu",
                  lam=0.1, rng=None):
    if kind == "oracle":
        return OracleDynamics(env)
    if kind == "tabular":
        return TabularDynamics(env, lam=lam)
    if kind == "neural":
        return NeuralDynamics(env, hidden=hidden, activation=activation, rng=rng)
    raise UsageError(f"unknown dynamics kind {kind!r}")


def mean_tv_distance(dyn, env, pairs):
    """Mean total-variation distance between the model and the true kernel
    over the given (s, a) pairs."""
    oracle = OracleDynamics(env)
    tvs = []
    for s, a in pairs:
        tvs.append(0.5 * np.abs(dyn.predict(s, a) - oracle.predict(s, a)).sum())
    return float(np.mean(tvs))
