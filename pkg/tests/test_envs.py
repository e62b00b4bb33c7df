import itertools
import math

import numpy as np
import pytest

from stochgfn.envs import (BitSeq, ExternalRewardSeq, HyperGrid, OddState,
                           StepRecord, Trajectory, TwoArmToy, edit_distance)
from stochgfn.errors import NotEnumerableError, UsageError


def all_even_nonterminal(env):
    return [s for s in env.even_states_topo() if not env.is_terminal(s)]


@pytest.mark.parametrize("env", [
    TwoArmToy(),
    HyperGrid(H=4, ndim=2, alpha=0.25),
    HyperGrid(H=3, ndim=3, alpha=0.5, noisy_stop=True),
    BitSeq(n=8, k=4, alpha=0.3),
])
def test_kernel_rows_normalize(env):
    for s in all_even_nonterminal(env):
        for a in env.actions(s):
            probs = [p for _, p in env.kernel_support(s, a)]
            assert abs(sum(probs) - 1.0) < 1e-9
            assert all(p > 0 for p in probs)


@pytest.mark.parametrize("env", [
    TwoArmToy(),
    HyperGrid(H=4, ndim=2, alpha=0.25),
    BitSeq(n=8, k=4, alpha=0.3),
])
def test_parent_child_duality(env):
    # every kernel edge (s,a)->s' appears in parents(s') with the same prob,
    # and vice versa; checked exhaustively
    fwd = {}
    for s in all_even_nonterminal(env):
        for a in env.actions(s):
            for s_next, p in env.kernel_support(s, a):
                fwd[(s, a, s_next)] = p
    bwd = {}
    for s_next in env.even_states_topo():
        if s_next == env.s0:
            continue
        for odd in env.parents(s_next):
            bwd[(odd.even, odd.action, s_next)] = env.kernel_prob(
                odd.even, odd.action, s_next)
    assert fwd == bwd


def test_toy_kernel_matches_construction():
    env = TwoArmToy()
    assert dict(env.kernel_support(0, 0)) == {1: 0.75, 2: 0.25}
    assert dict(env.kernel_support(0, 1)) == {1: 0.25, 2: 0.75}
    assert env.reward(1) == 1.0 and env.reward(2) == 2.0


def test_grid_kernel_example():
    env = HyperGrid(H=8, ndim=2, alpha=0.25)
    s = ((0, 0), False)
    sup = dict(env.kernel_support(s, 0))
    assert sup == {((1, 0), False): 0.875, ((0, 1), False): 0.125}
    # stop is noise-exempt by default: deterministic
    assert dict(env.kernel_support(s, 2)) == {((0, 0), True): 1.0}


def test_grid_slip_splits_over_noise_actions():
    env = HyperGrid(H=4, ndim=2, alpha=0.5)
    # at the far corner only stop is valid, kernel must still be a distribution
    s = ((3, 3), False)
    assert env.actions(s) == [2]
    assert dict(env.kernel_support(s, 2)) == {((3, 3), True): 1.0}
    # on an edge only one movement remains: no slip alternatives
    s = ((3, 0), False)
    assert dict(env.kernel_support(s, 1)) == {((3, 1), False): 1.0}


def test_kernel_mc_consistency():
    env = HyperGrid(H=8, ndim=2, alpha=0.25)
    rng = np.random.default_rng(0)
    s, a, n = ((2, 3), False), 0, 100_000
    counts = {}
    for _ in range(n):
        rec = env.step(s, a, rng)
        counts[rec.s_next] = counts.get(rec.s_next, 0) + 1
    for s_next, p in env.kernel_support(s, a):
        sigma = math.sqrt(p * (1 - p) / n)
        assert abs(counts.get(s_next, 0) / n - p) < 4 * sigma


def test_step_record_fields():
    env = TwoArmToy()
    rng = np.random.default_rng(1)
    rec = env.step(0, 1, rng)
    assert rec.s == 0 and rec.a == 1 and rec.terminal
    assert rec.reward == env.reward(rec.s_next)


def test_grid_reward_values():
    env = HyperGrid(H=8, ndim=2, alpha=0.0)
    assert env.reward(((1, 1), True)) == pytest.approx(2.501)
    assert env.reward(((1, 7), True)) == pytest.approx(2.501)
    assert env.reward(((0, 0), True)) == pytest.approx(0.501)
    assert env.reward(((3, 3), True)) == pytest.approx(0.001)
    with pytest.raises(UsageError):
        env.reward(((1, 1), False))


def test_grid_appendix_constant_ordering():
    env = HyperGrid(H=8, ndim=2, R0=2.0, R1=0.5, R2=0.001)
    assert env.reward(((3, 3), True)) == pytest.approx(2.0)
    assert env.reward(((1, 1), True)) == pytest.approx(2.501)


def test_grid_modes():
    env = HyperGrid(H=8, ndim=2)
    assert env.n_modes == 4
    ids = {env.mode_of(c) for c in [(1, 1), (1, 7), (7, 1), (7, 7)]}
    assert ids == {0, 1, 2, 3}
    assert env.mode_of((2, 2)) is None
    assert env.mode_of(((1, 1), True)) == env.mode_of((1, 1))


def test_grid_parent_slots_unique():
    env = HyperGrid(H=4, ndim=2, alpha=0.25)
    for s_next in env.even_states_topo():
        if s_next == env.s0:
            continue
        slots = [env.parent_slot(s_next, odd) for odd in env.parents(s_next)]
        assert len(slots) == len(set(slots))
        assert all(0 <= q < env.n_parent_slots for q in slots)


def test_intended_action_roundtrip():
    env = HyperGrid(H=4, ndim=2)
    s = ((1, 2), False)
    for a in env.actions(s):
        assert env.intended_action(s, env.intended_next(s, a)) == a
    with pytest.raises(UsageError):
        env.intended_action(s, ((3, 3), False))


def test_state_counts_match_enumeration():
    for env in [TwoArmToy(), HyperGrid(H=4, ndim=2), BitSeq(n=8, k=4)]:
        states = env.enumerate_states()
        assert len(states) == env.state_count()
        assert len(states) == len(set(states))
        assert states[0] == env.s0


def test_toy_enumeration():
    env = TwoArmToy()
    assert env.state_count() == 5
    assert list(env.even_states_topo()) == [0, 1, 2]
    assert env.terminal_states() == [1, 2]


def test_enumeration_cap():
    env = BitSeq(n=120, k=4, alpha=0.1)
    with pytest.raises(NotEnumerableError):
        env.enumerate_states(cap=10_000)


def test_edit_distance():
    assert edit_distance([], []) == 0
    assert edit_distance([1, 0, 1], [1, 0, 1]) == 0
    assert edit_distance([1, 0, 1], [1, 1, 1]) == 1
    assert edit_distance([1, 0], [0, 1, 0]) == 1
    assert edit_distance("kitten", "sitting") == 3


def test_bitseq_rewards_and_modes():
    env = BitSeq(n=8, k=4, alpha=0.0)
    mode = env.mode_set[0]
    assert env.reward(mode) == pytest.approx(1.0)
    assert env.mode_of(mode) == 0
    # every terminal reward matches the scalar path
    all_r = env.all_terminal_rewards()
    terms = env.terminal_states()
    for i in [0, 17, 100, 255]:
        assert all_r[i] == pytest.approx(env.reward(terms[i]))
    assert (all_r > 0).all() and all_r.max() == pytest.approx(1.0)


def test_bitseq_mode_set_seeded():
    a, b = BitSeq(n=16, k=4), BitSeq(n=16, k=4)
    assert a.mode_set == b.mode_set
    assert len(a.mode_set) == 4
    custom = BitSeq(n=8, k=4, mode_set=[(0, 0), (15, 15)])
    assert custom.n_modes == 2


def test_bitseq_kernel_is_token_slip():
    env = BitSeq(n=8, k=4, alpha=0.3)
    sup = dict(env.kernel_support((), 5))
    assert sup[(5,)] == pytest.approx(1 - 0.3 + 0.3 / 16)
    assert sup[(0,)] == pytest.approx(0.3 / 16)
    assert len(sup) == 16


def test_trajectory_validation():
    env = TwoArmToy()
    good = StepRecord(s=0, a=0, s_next=2, terminal=True, reward=2.0)
    t = Trajectory([good])
    assert t.terminal_state == 2 and t.terminal_reward == 2.0
    with pytest.raises(UsageError):
        Trajectory([])
    with pytest.raises(UsageError):
        Trajectory([StepRecord(s=0, a=0, s_next=2, terminal=False, reward=0.0)])


def test_external_reward_env(tmp_path):
    path = tmp_path / "table.txt"
    path.write_text("# comment\nab 1.0\naa 2.0\nba 0.5\nbb 4.0\n")
    env = ExternalRewardSeq(path, alpha=0.1)
    assert env.L == 2 and env.V == 2 and env.enumerable
    assert env.object_reward(env._to_state("bb")) == 4.0
    assert env.decode((0, 0)) == "aa"
    assert env.n_modes == 1  # default threshold = max reward
    # partial tables are allowed but not enumerable
    path2 = tmp_path / "partial.txt"
    path2.write_text("ab 1.0\nba 2.0\n")
    assert not ExternalRewardSeq(path2).enumerable


def test_external_reward_env_errors(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("ab 1.0 extra\n")
    with pytest.raises(UsageError, match="bad.txt:1"):
        ExternalRewardSeq(bad)
    bad.write_text("ab -1.0\n")
    with pytest.raises(UsageError, match="positive"):
        ExternalRewardSeq(bad)
    bad.write_text("ab 1.0\nabc 2.0\n")
    with pytest.raises(UsageError, match="length"):
        ExternalRewardSeq(bad)
    bad.write_text("\n")
    with pytest.raises(UsageError, match="empty"):
        ExternalRewardSeq(bad)


def test_candidates_cover_kernel_support():
    env = HyperGrid(H=4, ndim=2, alpha=0.5)
    for s in all_even_nonterminal(env):
        cand = dict(env.candidates(s))
        for a in env.actions(s):
            for s_next, _ in env.kernel_support(s, a):
                idx = env.candidate_index(s, a, s_next)
                assert cand[idx] == s_next


def test_constructor_validation():
    with pytest.raises(UsageError):
        HyperGrid(H=1)
    with pytest.raises(UsageError):
        HyperGrid(alpha=1.0)
    with pytest.raises(UsageError):
        BitSeq(n=10, k=4)
