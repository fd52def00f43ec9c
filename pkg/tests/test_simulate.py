import math

import numpy as np
import pytest

from fnmix import zoo
from fnmix.errors import InputError
from fnmix.seqtest import RUNNING, make_config
from fnmix.simulate import (
    ChainStream,
    MCEstimate,
    SimPlan,
    batch_means_variance,
    empirical_coverage,
    empirical_seqtest,
    empirical_tail,
    frequency,
    initial_law,
    path_means,
    sample_path,
    sample_paths,
)


def test_frequency_se():
    est = frequency([True, False, False, True])
    assert est == MCEstimate(0.5, math.sqrt(0.25 / 4), 4)


def test_rank_one_is_iid():
    pi = np.array([0.2, 0.3, 0.5])
    x = sample_path(zoo.rank_one(pi), "stationary", 10**5, seed=7)
    emp = np.bincount(x, minlength=3) / x.size
    se = np.sqrt(pi * (1 - pi) / x.size)
    assert np.all(np.abs(emp - pi) <= 3 * se)


def test_two_state_transition_frequencies(two_state):
    x = sample_path(two_state, 0, 10**6, seed=3)
    prev, nxt = x[:-1], x[1:]
    for i in range(2):
        from_i = nxt[prev == i]
        p_hat = np.mean(from_i != i)
        assert abs(p_hat - 0.3) <= 3 * math.sqrt(0.21 / from_i.size)


def test_large_chain_sampler_matches_rows():
    # d > 64 exercises the flat-search path
    c = zoo.lazy_cycle(40)
    x = sample_path(c, 0, 2 * 10**5, seed=1)
    step = (x[1:] - x[:-1]) % 80
    freq = np.bincount(step, minlength=80)[[0, 1, 79]] / step.size
    np.testing.assert_allclose(freq, [0.5, 0.25, 0.25], atol=0.005)
    assert np.isin(step, [0, 1, 79]).all()


def test_determinism(two_state, indicator):
    plan = SimPlan(two_state, indicator, "stationary", 300, 5000, seed=11)
    np.testing.assert_array_equal(sample_paths(plan), sample_paths(plan))
    other = SimPlan(two_state, indicator, "stationary", 300, 5000, seed=12)
    assert not np.array_equal(sample_paths(plan), sample_paths(other))


def test_replicates_uncorrelated(two_state, indicator):
    plan = SimPlan(two_state, indicator, "stationary", 1, 2 * 10**4, seed=5)
    x = sample_paths(plan)[:, 0].astype(float)
    a, b = x[0::2], x[1::2]
    r = np.corrcoef(a, b)[0, 1]
    assert abs(r) <= 3 / math.sqrt(a.size)


def test_initial_law(two_state):
    np.testing.assert_array_equal(initial_law(two_state, 1), [0, 1])
    np.testing.assert_allclose(initial_law(two_state, "stationary"), two_state.pi)
    with pytest.raises(InputError):
        initial_law(two_state, 5)
    with pytest.raises(InputError):
        initial_law(two_state, [0.5, 0.6])


def test_tail_trivial_cases(two_state, indicator):
    plan = SimPlan(two_state, indicator, "stationary", 50, 200, seed=0)
    assert empirical_tail(plan, 1.1).estimate == 0.0
    # with mu = 0.1 the threshold mu - 0.1 is the minimum of f
    low = SimPlan(two_state, 0.2 * indicator, "stationary", 50, 200, seed=0)
    assert empirical_tail(low, -0.1).estimate == 1.0


def test_burnin_drops_prefix(two_state):
    f = np.array([0.0, 1.0])
    plan = SimPlan(two_state, f, 0, 2000, 3, seed=2)
    paths = sample_paths(plan)
    np.testing.assert_allclose(path_means(plan, 500), f[paths[:, 500:]].mean(axis=1))
    with pytest.raises(InputError):
        path_means(plan, 2000)


def test_batch_means(two_state, indicator):
    plan = SimPlan(two_state, indicator, "stationary", 20000, 100, seed=4)
    est = batch_means_variance(plan, batch=1000)
    assert abs(est.estimate - 1.4 / 0.6 * 0.25) <= 4 * est.std_error


def test_coverage_of_trivial_interval(two_state, indicator):
    from fnmix.intervals import ConfidenceInterval

    plan = SimPlan(two_state, indicator, "stationary", 100, 50, seed=0)
    est = empirical_coverage(plan, lambda x: ConfidenceInterval(float(x.mean()), 1.0, 0.05, "t", 0))
    assert est.estimate == 1.0


def test_chain_stream_matches_path_law(two_state, indicator):
    s = ChainStream(two_state, indicator, "stationary", seed=0, rep=0, chunk=37)
    a = s.take(50)
    b = s.take(1000)
    assert a.size == 50 and b.size == 1000 and s.count == 1050
    again = ChainStream(two_state, indicator, "stationary", seed=0, rep=0, chunk=37).take(1050)
    np.testing.assert_array_equal(np.r_[a, b], again)
    x = ChainStream(two_state, indicator, "stationary", seed=0, rep=1).take(10**5)
    assert abs(x.mean() - 0.5) <= 4 * math.sqrt(0.5833 / 1e5)


def test_empirical_seqtest_iid():
    chain, f = zoo.bernoulli_iid(0.7)
    cfg = make_config("seq", 0.5, 0.1, 0.1, Tf_at=lambda d: 1)
    res = empirical_seqtest(chain, f.values, "stationary", cfg, reps=100, seed=0)
    assert res["error"].estimate <= 0.1 + 3 * max(res["error"].std_error, 0.03)
    assert res["capped"] == 0


def test_empirical_seqtest_degenerate_capped():
    chain, f = zoo.bernoulli_iid(0.5)
    cfg = make_config("seq", 0.5, 0.1, 0.1, gamma_0=1.0, cap=3000)
    res = empirical_seqtest(chain, f.values, "stationary", cfg, reps=5, seed=1)
    verdicts = [d.verdict for d in res["decisions"]]
    assert res["capped"] == verdicts.count(RUNNING)
    assert all(d.stop_index <= 3000 for d in res["decisions"])


@pytest.mark.parametrize("d", [3, 40])
def test_scalar_walk_matches_vector_step(d):
    from fnmix.simulate import _Sampler

    s = _Sampler(zoo.lazy_cycle(d))
    u = np.random.default_rng(0).random(500)
    out = np.empty(500, dtype=np.int64)
    s.walk(0, u, out)
    x = np.array([0])
    ref = []
    for ut in u:
        x = s.step(x, np.array([ut]))
        ref.append(int(x[0]))
    np.testing.assert_array_equal(out, ref)
