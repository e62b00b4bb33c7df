"""The four training losses as log-squared consistency residuals.

Plain DB/TB take the deterministic view of an observed transition: the
edge s -> s' is credited to the action whose intended outcome is s', and
the backward policy ranges over intended-edge parents only. The stochastic
variants keep the actual chosen action, route flow through the odd state,
and carry an explicit log P(s'|s,a) term from the dynamics model, which is
treated as a constant (no gradient flows into the model from these losses).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .envs import OddState, Trajectory


@dataclass
class LossBatchReport:
    mean_loss: float
    residuals: np.ndarray
    clamped_terms: int
    grad_norms: dict = field(default_factory=dict)


def _log_phat_batch(policy, dyn, steps):
    env = policy.env
    cand = np.array([env.candidate_index(st.s, st.a, st.s_next) for st in steps],
                    dtype=np.intp)
    probs = dyn.predict_batch(steps)[np.arange(len(steps)), cand]
    clamped = int(np.sum(probs < ad.LOG_FLOOR))
    return np.log(np.maximum(probs, ad.LOG_FLOOR)), clamped


def _assemble_edge_terms(policy, steps, *, stochastic, dyn):
    """Shared per-transition term builder.

    Returns (terms, report_ctx) where terms is a dict of [B] tensors/consts:
      logf_s, logpf, logphat (const), logf_next, logpb
    """
    env = policy.env
    beta = policy.beta
    B = len(steps)
    states, index = [], {}

    def uid(s):
        if s not in index:
            index[s] = len(states)
            states.append(s)
        return index[s]

    rows_s = np.array([uid(st.s) for st in steps], dtype=np.intp)
    if stochastic:
        acts = np.array([st.a for st in steps], dtype=np.intp)
    else:
        acts = np.array([env.intended_action(st.s, st.s_next) for st in steps],
                        dtype=np.intp)

    clamped = 0
    logphat = np.zeros(B)
    if stochastic:
        if dyn is None:
            raise ValueError("stochastic losses need a dynamics model")
        logphat, clamped = _log_phat_batch(policy, dyn, steps)

    # next-state flow: learned for non-terminal, beta*log R clamp at terminals
    flow_rows, flow_pos = [], []
    logf_next_const = np.zeros(B)
    # backward: learned only where the parent set has >1 element
    bwd_rows, bwd_pos, bwd_masks, bwd_slots = [], [], [], []
    for i, st in enumerate(steps):
        if st.terminal:
            r = max(st.reward if st.reward is not None else env.reward(st.s_next),
                    ad.LOG_FLOOR)
            logf_next_const[i] = beta * math.log(r)
        else:
            flow_rows.append(uid(st.s_next))
            flow_pos.append(i)
        parents, slots, slot_of, mask = env.parents_info(
            st.s_next, det_view=not stochastic)
        if len(parents) > 1:
            key = (st.s, int(acts[i]))
            if key not in slot_of:
                raise ValueError(
                    f"transition ({st.s!r}, {acts[i]}, {st.s_next!r}) has no "
                    f"matching parent slot")
            bwd_rows.append(uid(st.s_next))
            bwd_pos.append(i)
            bwd_masks.append(mask)
            bwd_slots.append(slot_of[key])

    heads = policy.bind(states)
    logf_s = heads.flow(rows_s)
    logpf = ad.pick(heads.fwd(rows_s), acts)

    if flow_rows:
        fl = heads.flow(np.array(flow_rows, dtype=np.intp))
        logf_next = ad.segment_sum(fl, np.array(flow_pos, dtype=np.intp), B)
    else:
        logf_next = ad.const(np.zeros(B))
    logf_next = ad.add(logf_next, ad.const(logf_next_const))

    if bwd_rows:
        lp = heads.bwd(np.array(bwd_rows, dtype=np.intp), np.stack(bwd_masks))
        picked = ad.pick(lp, np.array(bwd_slots, dtype=np.intp))
        logpb = ad.segment_sum(picked, np.array(bwd_pos, dtype=np.intp), B)
    else:
        logpb = ad.const(np.zeros(B))

    return dict(logf_s=logf_s, logpf=logpf, logphat=ad.const(logphat),
                logf_next=logf_next, logpb=logpb), clamped


def _transition_residuals(policy, steps, *, stochastic, dyn=None):
    terms, clamped = _assemble_edge_terms(policy, steps, stochastic=stochastic,
                                          dyn=dyn)
    r = ad.add(terms["logf_s"], terms["logpf"])
    if stochastic:
        r = ad.add(r, terms["logphat"])
    r = ad.sub(r, terms["logf_next"])
    r = ad.sub(r, terms["logpb"])
    return r, clamped


def _trajectory_residuals(policy, trajs, *, stochastic, dyn=None):
    env = policy.env
    beta = policy.beta
    steps = [st for t in trajs for st in t.steps]
    seg = np.array([i for i, t in enumerate(trajs) for _ in t.steps], dtype=np.intp)
    terms, clamped = _assemble_edge_terms(policy, steps, stochastic=stochastic,
                                          dyn=dyn)
    per_edge = terms["logpf"]
    if stochastic:
        per_edge = ad.add(per_edge, terms["logphat"])
    per_edge = ad.sub(per_edge, terms["logpb"])
    summed = ad.segment_sum(per_edge, seg, len(trajs))
    logr = np.array([beta * math.log(max(t.terminal_reward, ad.LOG_FLOOR))
                     for t in trajs])
    logz = ad.gather_rows(_as_vec(policy.logz), np.zeros(len(trajs), dtype=np.intp))
    r = ad.sub(ad.add(logz, summed), ad.const(logr))
    return r, clamped


def _as_vec(scalar_param):
    # view a 0-d parameter as a length-1 vector so gather can broadcast it
    value = scalar_param.value.reshape(1)
    return ad.Tensor(value, parents=(scalar_param,),
                     backward_fn=lambda g: (g.reshape(()),))


def _finish(residuals, clamped):
    loss = ad.tmean(ad.square(residuals))
    report = LossBatchReport(mean_loss=float(loss.value),
                             residuals=residuals.value.copy(),
                             clamped_terms=clamped)
    return loss, report


# -- batched entry points (used by the trainer) ---------------------------

def db_loss_batch(policy, steps):
    return _finish(*_transition_residuals(policy, steps, stochastic=False))


def stoch_db_loss_batch(policy, dyn, steps):
    return _finish(*_transition_residuals(policy, steps, stochastic=True, dyn=dyn))


def tb_loss_batch(policy, trajs):
    return _finish(*_trajectory_residuals(policy, trajs, stochastic=False))


def stoch_tb_loss_batch(policy, dyn, trajs):
    return _finish(*_trajectory_residuals(policy, trajs, stochastic=True, dyn=dyn))


# -- single-item forms ------------------------------------------------------

def db_loss(policy, step):
    """Squared DB residual of one transition under the deterministic view."""
    loss, _ = db_loss_batch(policy, [step])
    return loss


def tb_loss(policy, traj: Trajectory):
    loss, _ = tb_loss_batch(policy, [traj])
    return loss


def stoch_db_loss(policy, dyn, step):
    loss, _ = stoch_db_loss_batch(policy, dyn, [step])
    return loss


def stoch_tb_loss(policy, dyn, traj: Trajectory):
    loss, _ = stoch_tb_loss_batch(policy, dyn, [traj])
    return loss


LOSS_KINDS = {
    "db": dict(stochastic=False, per_trajectory=False),
    "tb": dict(stochastic=False, per_trajectory=True),
    "stoch_db": dict(stochastic=True, per_trajectory=False),
    "stoch_tb": dict(stochastic=True, per_trajectory=True),
}


def objective_loss(objective, policy, trajs, dyn=None):
    """Dispatch an objective name to its batched loss over fresh trajectories."""
    kind = LOSS_KINDS[objective]
    if kind["per_trajectory"]:
        residuals, clamped = _trajectory_residuals(
            policy, trajs, stochastic=kind["stochastic"], dyn=dyn)
    else:
        steps = [st for t in trajs for st in t.steps]
        residuals, clamped = _transition_residuals(
            policy, steps, stochastic=kind["stochastic"], dyn=dyn)
    return _finish(residuals, clamped)
