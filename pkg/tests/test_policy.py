import numpy as np
import pytest

from stochgfn import autodiff as ad
from stochgfn.envs import BitSeq, HyperGrid, TwoArmToy
from stochgfn.policy import (NeuralGfn, TabularGfn, make_policy,
                             mixed_action_probs, sample_trajectories)


@pytest.mark.parametrize("kind", ["tabular", "neural"])
def test_uniform_at_init(kind):
    env = HyperGrid(H=4, ndim=2, alpha=0.25)
    pol = make_policy(env, kind, rng=np.random.default_rng(0))
    s = ((0, 0), False)
    d = pol.forward_dist(s)
    assert np.allclose(d, 1 / 3)
    # corner cell: only stop valid; invalid slots carry zero probability
    assert np.allclose(pol.forward_dist(((3, 3), False)), [0.0, 0.0, 1.0])
    assert pol.log_flow(s) == pytest.approx(0.0)


def test_forward_dist_masks_invalid_actions():
    env = HyperGrid(H=4, ndim=2, alpha=0.25)
    pol = make_policy(env, "neural", rng=np.random.default_rng(1))
    # edge cell (3, 1): dim-0 increment invalid, actions are [1, stop]
    s = ((3, 1), False)
    d = pol.forward_dist(s)
    assert d[0] == 0.0  # dim-0 increment masked out at the far edge
    assert d.sum() == pytest.approx(1.0)


def test_backward_dist_over_parents():
    env = HyperGrid(H=4, ndim=2, alpha=0.25)
    pol = make_policy(env, "tabular")
    s_next = ((1, 1), False)
    parents, d = pol.backward_dist(s_next)
    assert len(d) == len(parents) == 4
    assert d.sum() == pytest.approx(1.0)
    # deterministic view: only intended edges
    det_parents, det = pol.backward_dist(s_next, det_view=True)
    assert len(det) == len(det_parents) == 2


def test_epsilon_mixing_exact():
    env = TwoArmToy()
    pol = TabularGfn(env)
    pol.fwd_table.value[0] = np.log([0.9, 0.1])
    probs = mixed_action_probs(pol, 0, epsilon=0.2)
    assert np.allclose(probs, 0.8 * np.array([0.9, 0.1]) + 0.2 * 0.5)
    assert np.allclose(mixed_action_probs(pol, 0, epsilon=0.0), [0.9, 0.1])


def test_sample_trajectories_shape_and_rewards():
    env = HyperGrid(H=4, ndim=2, alpha=0.25)
    pol = make_policy(env, "tabular")
    trajs = sample_trajectories(pol, env, 32, epsilon=0.0,
                                rng=np.random.default_rng(2))
    assert len(trajs) == 32
    for t in trajs:
        assert t.steps[0].s == env.s0
        assert t.steps[-1].terminal
        assert t.terminal_reward == pytest.approx(env.reward(t.terminal_state))
        for st in t.steps:
            assert st.s_next in dict(env.kernel_support(st.s, st.a))


def test_sample_trajectories_deterministic():
    env = BitSeq(n=8, k=4, alpha=0.3)
    pol = make_policy(env, "neural", rng=np.random.default_rng(3))
    a = sample_trajectories(pol, env, 8, 0.1, np.random.default_rng(7))
    b = sample_trajectories(pol, env, 8, 0.1, np.random.default_rng(7))
    assert a == b


def test_sample_frequencies_match_policy():
    env = TwoArmToy()
    pol = TabularGfn(env)
    pol.fwd_table.value[0] = np.log([0.3, 0.7])
    trajs = sample_trajectories(pol, env, 20000, 0.0, np.random.default_rng(4))
    frac_a1 = np.mean([t.steps[0].a for t in trajs])
    assert abs(frac_a1 - 0.7) < 4 * np.sqrt(0.3 * 0.7 / 20000)


def test_neural_policy_save_load(tmp_path):
    env = HyperGrid(H=4, ndim=2, alpha=0.25)
    pol = make_policy(env, "neural", rng=np.random.default_rng(5))
    # train-ish perturbation so the state isn't trivially uniform
    rng = np.random.default_rng(6)
    for p in pol.gfn_params():
        p.value += rng.normal(size=p.value.shape) * 0.1
    want = pol.forward_dist(((1, 2), False))
    path = tmp_path / "pol.npz"
    pol.save(path)
    fresh = make_policy(env, "neural", rng=np.random.default_rng(9))
    fresh.load(path)
    assert np.allclose(fresh.forward_dist(((1, 2), False)), want)


def test_bind_matches_single_state_views():
    env = HyperGrid(H=4, ndim=2, alpha=0.25)
    pol = make_policy(env, "neural", rng=np.random.default_rng(8))
    states = [((0, 0), False), ((1, 2), False), ((2, 2), False)]
    with ad.no_grad():
        heads = pol.bind(states)
        flows = heads.flow(np.arange(3)).value
    for i, s in enumerate(states):
        assert flows[i] == pytest.approx(pol.log_flow(s))
    # terminal flow is the reward clamp, not a head output
    assert pol.log_flow(((1, 1), True)) == pytest.approx(np.log(env.reward(((1, 1), True))))


def test_make_policy_rejects_unknown_kind():
    with pytest.raises(Exception):
        make_policy(TwoArmToy(), "quantum")
