import numpy as np
import pytest

from stochgfn.envs import BitSeq, HyperGrid, TwoArmToy
from stochgfn.errors import NotEnumerableError, UsageError
from stochgfn.evaluation import (ModeTracker, empirical_distribution,
                                 exact_terminating_distribution, l1_error,
                                 target_distribution, topk_stats)
from stochgfn.policy import TabularGfn, make_policy


def test_toy_dp_uniform_policy():
    # uniform pi pushed through the 0.75/0.25 kernel lands at (1/2, 1/2)
    env = TwoArmToy()
    pol = TabularGfn(env)
    pt = exact_terminating_distribution(env, pol)
    assert pt[1] == pytest.approx(0.5)
    assert pt[2] == pytest.approx(0.5)


def test_toy_dp_deterministic_view_fixed_point():
    # pi proportional to R over intended outcomes, pi = (1/3, 2/3), pushed
    # through the true kernel: P(s1) = 1/3*3/4 + 2/3*1/4 = 5/12
    env = TwoArmToy()
    pol = TabularGfn(env)
    pol.fwd_table.value[0] = np.log([1 / 3, 2 / 3])
    pt = exact_terminating_distribution(env, pol)
    assert pt[1] == pytest.approx(5 / 12)
    assert pt[2] == pytest.approx(7 / 12)
    # mean L1 to the (1/3, 2/3) target: mean(|5/12-1/3|, |7/12-2/3|) = 1/12
    assert l1_error(pt, env) == pytest.approx(1 / 12)
    assert l1_error(pt, env, reduction="sum") == pytest.approx(1 / 6)


def test_toy_uniform_l1():
    env = TwoArmToy()
    pt = {1: 0.5, 2: 0.5}
    assert l1_error(pt, env) == pytest.approx(1 / 6)


def test_target_distribution_beta():
    env = TwoArmToy()
    terms, p = target_distribution(env, beta=1.0)
    assert terms == [1, 2]
    assert np.allclose(p, [1 / 3, 2 / 3])
    _, p2 = target_distribution(env, beta=2.0)
    assert np.allclose(p2, [1 / 5, 4 / 5])


def test_dp_mass_conserved_on_grid():
    env = HyperGrid(H=6, ndim=2, alpha=0.4)
    pol = make_policy(env, "neural", hidden=(16,), rng=np.random.default_rng(0))
    rng = np.random.default_rng(1)
    for p in pol.gfn_params():
        p.value += rng.normal(size=p.value.shape) * 0.3
    pt = exact_terminating_distribution(env, pol)
    assert sum(pt.values()) == pytest.approx(1.0, abs=1e-9)
    assert all(v >= 0 for v in pt.values())


def test_dp_refuses_nonenumerable():
    env = BitSeq(n=120, k=4)
    pol = make_policy(env, "neural", hidden=(8,), rng=np.random.default_rng(2))
    with pytest.raises(NotEnumerableError):
        exact_terminating_distribution(env, pol)
    env2 = BitSeq(n=16, k=4)
    pol2 = make_policy(env2, "neural", hidden=(8,), rng=np.random.default_rng(3))
    with pytest.raises(NotEnumerableError):
        exact_terminating_distribution(env2, pol2, cap=100)


def test_empirical_distribution():
    d = empirical_distribution([1, 1, 2, 2, 2, 3])
    assert d == {1: 2 / 6, 2: 3 / 6, 3: 1 / 6}


def test_mode_tracker():
    env = HyperGrid(H=8, ndim=2)
    mt = ModeTracker(env)
    mt.update([((1, 1), True), ((3, 3), True)], iteration=10)
    assert mt.count == 1 and mt.discovered == {0: 10}
    mt.update([((7, 7), True), ((1, 1), True)], iteration=20)
    assert mt.count == 2
    assert mt.discovered[0] == 10  # first discovery is kept


def test_topk_stats():
    env = TwoArmToy()
    samples = [1, 1, 2, 2, 2]
    mean, med = topk_stats(samples, 3, env)
    assert mean == pytest.approx(2.0)
    assert med == pytest.approx(2.0)
    mean, med = topk_stats(samples, 5, env)
    assert mean == pytest.approx(8 / 5)
    assert med == pytest.approx(2.0)
    with pytest.raises(UsageError):
        topk_stats(samples, 6, env)


def test_l1_unknown_reduction():
    with pytest.raises(UsageError):
        l1_error({1: 1.0}, TwoArmToy(), reduction="max")
