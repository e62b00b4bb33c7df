"""GFlowNet quantities: forward policy, backward policy over odd parents,
log state flow, and log-partition, in interchangeable tabular and neural
parameterizations.

Both parameterizations expose `bind(states)`, which fixes a batch of unique
states and hands back head evaluators sharing one trunk pass; objectives are
built on top of that to keep large-batch losses cheap.
"""

from __future__ import annotations

import numpy as np

from . import autodiff as ad
from .envs import OddState
from .errors import UsageError


class _BoundHeads:
    def __init__(self, policy, states):
        self.policy = policy
        self.states = states

    def fwd(self, rows):
        """Masked log pi(a|s) rows; every selected state must be non-terminal."""
        raise NotImplementedError

    def bwd(self, rows, masks):
        """Masked log pi_B(parent|s') rows over parent slots."""
        raise NotImplementedError

    def flow(self, rows):
        """log F(s) for non-terminal states (terminal flow is clamped by callers)."""
        raise NotImplementedError


class GfnPolicy:
    """Common surface shared by the tabular and neural parameterizations."""

    def __init__(self, env, beta=1.0, learn_backward=True):
        self.env = env
        self.beta = float(beta)
        self.learn_backward = learn_backward
        self.logz = ad.param(0.0, "logz")

    # parameter bookkeeping ------------------------------------------------

    def gfn_params(self):
        raise NotImplementedError

    def all_params(self):
        return ad.param_dict(self.gfn_params() + [self.logz])

    def save(self, path):
        ad.save_params(path, self.all_params())

    def load(self, path):
        ad.assign_params(self.all_params(), ad.load_params(path))

    # heads ------------------------------------------------------------------

    def bind(self, states) -> _BoundHeads:
        raise NotImplementedError

    def _action_masks(self, states):
        return np.stack([self.env.action_mask(s) for s in states])

    # convenience single-state views ------------------------------------------

    def forward_dist(self, s):
        """Probability vector over action slots at non-terminal s."""
        if self.env.is_terminal(s):
            raise UsageError("forward_dist on terminal state")
        with ad.no_grad():
            lp = self.bind([s]).fwd(np.array([0])).value[0]
        p = np.exp(lp)
        p[~np.isfinite(lp)] = 0.0
        return p

    def backward_dist(self, s_next, det_view=False):
        """Probabilities aligned with env parents order (det or stochastic view)."""
        parents = (self.env.det_parents(s_next) if det_view
                   else self.env.parents(s_next))
        if len(parents) == 1:
            return parents, np.array([1.0])
        slots = [self.env.parent_slot(s_next, p) for p in parents]
        mask = np.zeros((1, self.env.n_parent_slots), dtype=bool)
        mask[0, slots] = True
        with ad.no_grad():
            lp = self.bind([s_next]).bwd(np.array([0]), mask).value[0]
        return parents, np.exp(lp[slots])

    def log_flow(self, s):
        if self.env.is_terminal(s):
            return self.beta * np.log(self.env.reward(s))
        with ad.no_grad():
            return float(self.bind([s]).flow(np.array([0])).value[0])


class _TabularHeads(_BoundHeads):
    def __init__(self, policy, states):
        super().__init__(policy, states)
        self.idx = np.array([policy.state_index[s] for s in states], dtype=np.intp)

    def fwd(self, rows):
        rows = np.asarray(rows, dtype=np.intp)
        logits = ad.gather_rows(self.policy.fwd_table, self.idx[rows])
        masks = self.policy._fwd_masks[self.idx[rows]]
        return ad.log_softmax(logits, masks)

    def bwd(self, rows, masks):
        rows = np.asarray(rows, dtype=np.intp)
        if self.policy.uniform_backward:
            logits = ad.const(np.zeros((len(rows), self.policy.env.n_parent_slots)))
        else:
            logits = ad.gather_rows(self.policy.bwd_table, self.idx[rows])
        return ad.log_softmax(logits, masks)

    def flow(self, rows):
        rows = np.asarray(rows, dtype=np.intp)
        return ad.gather_rows(self.policy.flow_table, self.idx[rows])


class TabularGfn(GfnPolicy):
    """Dense per-state tables; requires an enumerable environment."""

    def __init__(self, env, beta=1.0, learn_backward=True, uniform_backward=False,
                 enum_cap=500_000):
        super().__init__(env, beta, learn_backward)
        self.uniform_backward = uniform_backward
        evens = env.even_states_topo()
        self.state_index = {s: i for i, s in enumerate(evens)}
        n = len(evens)
        self.fwd_table = ad.param(np.zeros((n, env.n_action_slots)), "fwd_table")
        self.bwd_table = ad.param(np.zeros((n, env.n_parent_slots)), "bwd_table")
        self.flow_table = ad.param(np.zeros(n), "flow_table")
        self._fwd_masks = np.stack([
            env.action_mask(s) if not env.is_terminal(s)
            else np.zeros(env.n_action_slots, dtype=bool)
            for s in evens
        ])

    def gfn_params(self):
        ps = [self.fwd_table, self.flow_table]
        if self.learn_backward and not self.uniform_backward:
            ps.append(self.bwd_table)
        return ps

    def bind(self, states):
        return _TabularHeads(self, states)


class _NeuralHeads(_BoundHeads):
    def __init__(self, policy, states):
        super().__init__(policy, states)
        enc = np.stack([policy.env.encode(s) for s in states])
        self.trunk_out = policy.trunk(ad.const(enc))

    def fwd(self, rows):
        h = ad.gather_rows(self.trunk_out, np.asarray(rows, dtype=np.intp))
        logits = self.policy.fwd_head(h)
        masks = np.stack([self.policy.env.action_mask(self.states[r]) for r in rows])
        return ad.log_softmax(logits, masks)

    def bwd(self, rows, masks):
        if self.policy.uniform_backward:
            logits = ad.const(np.zeros((len(rows), self.policy.env.n_parent_slots)))
        else:
            h = ad.gather_rows(self.trunk_out, np.asarray(rows, dtype=np.intp))
            logits = self.policy.bwd_head(h)
        return ad.log_softmax(logits, masks)

    def flow(self, rows):
        h = ad.gather_rows(self.trunk_out, np.asarray(rows, dtype=np.intp))
        return _squeeze(self.policy.flow_head(h))


def _squeeze(t):
    # [B,1] -> [B] view op
    value = t.value[:, 0]
    if not t.parents and not t.requires_grad:
        return ad.Tensor(value)
    return ad.Tensor(value, parents=(t,), backward_fn=lambda g: (g[:, None],))


class NeuralGfn(GfnPolicy):
    """Shared MLP trunk with forward-logit, backward-logit, and flow heads.

    Head weights start at zero so a fresh policy is exactly uniform over the
    masked support and initial flows are zero.
    """

    def __init__(self, env, beta=1.0, learn_backward=True, uniform_backward=False,
                 hidden=(256, 256), activation="leaky_relu", rng=None):
        super().__init__(env, beta, learn_backward)
        self.uniform_backward = uniform_backward
        rng = rng if rng is not None else np.random.default_rng(0)
        self.trunk = ad.Mlp(env.encoding_dim, hidden, rng, "trunk", activation)
        d = self.trunk.out_dim
        self.fwd_head = ad.Linear(d, env.n_action_slots, rng, "fwd_head")
        self.bwd_head = ad.Linear(d, env.n_parent_slots, rng, "bwd_head")
        self.flow_head = ad.Linear(d, 1, rng, "flow_head")
        for head in (self.fwd_head, self.bwd_head, self.flow_head):
            head.w.value[:] = 0.0

    def gfn_params(self):
        ps = self.trunk.params() + self.fwd_head.params() + self.flow_head.params()
        if self.learn_backward and not self.uniform_backward:
            ps += self.bwd_head.params()
        return ps

    def bind(self, states):
        return _NeuralHeads(self, states)


def make_policy(env, kind, beta=1.0, rng=None, **kwargs):
    if kind == "tabular":
        kwargs.pop("hidden", None)
        kwargs.pop("activation", None)
        return TabularGfn(env, beta=beta, **kwargs)
    if kind == "neural":
        return NeuralGfn(env, beta=beta, rng=rng, **kwargs)
    raise UsageError(f"unknown parameterization {kind!r}")


def mixed_action_probs(policy, s, epsilon):
    """Exact (1-eps)*pi + eps*uniform over the valid actions at s."""
    p = policy.forward_dist(s)
    mask = policy.env.action_mask(s)
    u = mask / mask.sum()
    return (1.0 - epsilon) * p + epsilon * u


def sample_trajectories(policy, env, n, epsilon, rng):
    """Batch-roll n trajectories with eps-uniform exploration mixing."""
    from .envs import Trajectory

    if not (0.0 <= epsilon <= 1.0):
        raise UsageError(f"epsilon must be in [0,1], got {epsilon}")
    cur = [env.s0] * n
    steps = [[] for _ in range(n)]
    active = list(range(n))
    hops = 0
    while active:
        hops += 1
        if hops > env.horizon + 1:
            raise RuntimeError("trajectory exceeded the environment horizon; "
                               "acyclicity invariant broken")
        batch = [cur[i] for i in active]
        with ad.no_grad():
            lp = policy.bind(batch).fwd(np.arange(len(batch))).value
        probs = np.exp(lp)
        probs[~np.isfinite(lp)] = 0.0
        masks = np.stack([env.action_mask(s) for s in batch])
        uni = masks / masks.sum(axis=1, keepdims=True)
        probs = (1.0 - epsilon) * probs + epsilon * uni
        probs /= probs.sum(axis=1, keepdims=True)
        u = rng.random(len(batch))
        acts = (np.cumsum(probs, axis=1) < u[:, None]).sum(axis=1)
        still = []
        for j, i in enumerate(active):
            rec = env.step(cur[i], int(acts[j]), rng)
            steps[i].append(rec)
            if rec.terminal:
                continue
            cur[i] = rec.s_next
            still.append(i)
        active = still
    return [Trajectory(s) for s in steps]
