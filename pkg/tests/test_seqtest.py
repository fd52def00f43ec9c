import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fnmix.errors import InputError
from fnmix.seqtest import (
    H0,
    H1,
    INDIFFERENCE,
    RUNNING,
    StreamExhausted,
    algdiff_epsilon_k,
    algdiff_epsilon_k_uniform,
    algfix_run,
    algfix_sample_size,
    algseq_margin,
    algseq_run,
    first_small_epsilon,
    initial_decision_time,
    make_config,
    run,
    schedule,
    stopping_bound_diff,
    stopping_bound_seq,
    stopping_bound_seq_uniform,
)


def const(t):
    return lambda _: t


def test_algfix_sizes():
    assert algfix_sample_size(0.1, 0.05, Tf_at=const(2)) == 1199
    assert algfix_sample_size(0.1, 0.05, gamma_0=1.0) == 300
    assert algfix_sample_size(0.01, 0.05, gamma_0=1.0) >= 99 * algfix_sample_size(0.1, 0.05, gamma_0=1.0)


def test_algfix_source_required():
    with pytest.raises(InputError):
        algfix_sample_size(0.1, 0.05)
    with pytest.raises(InputError):
        algfix_sample_size(0.1, 0.05, Tf_at=const(1), gamma_0=1.0)


@pytest.mark.parametrize("value, verdict", [(1.0, H0), (0.0, H1), (0.5, INDIFFERENCE)])
def test_algfix_run(value, verdict):
    assert algfix_run(itertools.repeat(value), 0.5, 0.1, 100).verdict == verdict


def test_algfix_exhausted():
    with pytest.raises(StreamExhausted):
        algfix_run([1.0] * 10, 0.5, 0.1, 100)


def test_margins():
    assert algseq_margin(0.1, 0.1, 0.1, Tf_at=const(1)) == pytest.approx(8 * math.log(20) / 0.1)
    assert algseq_margin(0.1, 0.1, 0.1, Tf_at=const(1)) == pytest.approx(239.66, abs=0.01)
    assert algseq_margin(0.1, 0.1, 0.1, gamma_0=1.0) == pytest.approx(29.957, abs=1e-3)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 20), st.floats(0.01, 1.0), st.floats(0.01, 0.3))
def test_margin_ratio(T, g0, delta):
    a = algseq_margin(delta, 0.1, 0.1, Tf_at=const(T))
    u = algseq_margin(delta, 0.1, 0.1, gamma_0=g0)
    assert a / u == pytest.approx(8 * g0 * T)


def test_initial_decision_time():
    assert initial_decision_time(240.0, 0.3) == math.floor(240 / 0.7)
    assert initial_decision_time(240.0, 0.8) == math.floor(240 / 0.8)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 10**5), st.floats(0.001, 0.39))
def test_schedule_strictly_increasing(N0, xi):
    ks, ns = zip(*itertools.islice(schedule(N0, xi), 60))
    assert ks == tuple(range(1, 61))
    assert ns[0] > N0
    assert all(b > a for a, b in zip(ns, ns[1:]))
    assert all(n >= math.floor(N0 * (1 + xi) ** k) for k, n in zip(ks, ns))


def test_epsilon_k_examples():
    assert algdiff_epsilon_k(0.05, 1, 120, const(1)) == pytest.approx(math.sqrt(8 * (math.log(20) + 1) / 120), rel=1e-12)
    assert algdiff_epsilon_k(0.05, 1, 120, const(1)) == pytest.approx(0.5161, abs=1e-4)
    assert algdiff_epsilon_k(0.05, 1, 1, const(100)) == math.inf
    assert algdiff_epsilon_k_uniform(0.05, 1, 120, 1.0) == pytest.approx(math.sqrt((math.log(20) + 1) / 120))


def test_epsilon_k_decreasing():
    T = lambda d: max(1, math.ceil(math.log(0.5 / d) / math.log(1 / 0.4)))
    eps = [algdiff_epsilon_k(0.1, 1, n, T) for n in (10**2, 10**3, 10**4, 10**5, 10**6)]
    assert all(b < a for a, b in zip(eps, eps[1:]))
    assert eps[-1] < 0.02


def test_epsilon_k_satisfies_condition():
    T = lambda d: max(1, math.ceil(math.log(0.5 / d) / math.log(1 / 0.4)))
    eps = algdiff_epsilon_k(0.1, 3, 5000, T)
    target = (math.log(10) + 1 + 2 * math.log(3)) / 5000
    assert eps**2 / (8 * T(eps / 2)) >= target


def test_algseq_constant_one_stops_first():
    cfg = make_config("seq", 0.5, 0.1, 0.1, Tf_at=const(1))
    dec = algseq_run(itertools.repeat(1.0), cfg)
    assert dec.verdict == H0 and dec.k_stop == 1


def test_algseq_at_threshold_runs_to_cap():
    cfg = make_config("seq", 0.5, 0.1, 0.1, Tf_at=const(1), cap=20000)
    dec = algseq_run(itertools.repeat(0.5), cfg)
    assert dec.verdict == RUNNING
    assert dec.stop_index <= 20000


def test_algdiff_constant_one():
    cfg = make_config("diff", 0.5, 0.0, 0.1, Tf_at=const(1), N0=10)
    dec = run(itertools.repeat(1.0), cfg)
    assert dec.verdict == H0
    k, nk = dec.k_stop, dec.stop_index
    assert cfg.epsilon_k(k, nk) < 0.5
    if k > 1:
        prev = list(itertools.islice(cfg.schedule(), k - 1))[-1]
        assert cfg.epsilon_k(*prev) >= 0.5


def test_algdiff_stream_exhausted_is_running():
    cfg = make_config("diff", 0.5, 0.0, 0.1, Tf_at=const(1), N0=10)
    assert run([0.5] * 100, cfg).verdict == RUNNING


def test_diff_preset_n0():
    cfg = make_config("diff", 0.5, 0.0, 0.1, gamma_0=0.25)
    assert cfg.N0 == 400
    with pytest.raises(InputError):
        make_config("diff", 0.5, 0.0, 0.1, Tf_at=const(1))


@pytest.mark.parametrize(
    "kw",
    [dict(r=1.2), dict(alpha=0.5), dict(xi=0.5), dict(delta=-0.1)],
)
def test_config_validation(kw):
    args = dict(mode="seq", r=0.5, delta=0.1, alpha=0.1, xi=0.1, Tf_at=const(1))
    args.update(kw)
    with pytest.raises(InputError):
        make_config(**args)


def test_stopping_bound_seq_example():
    b = stopping_bound_seq(0.1, 240, 0.1, const(1), 0.1)
    assert b == pytest.approx(1.1 * (2400 + 40 * math.sqrt(4808) + 1))
    assert b == pytest.approx(5692.1, abs=0.1)


def test_stopping_bound_seq_monotone_in_gap():
    vals = [stopping_bound_seq(D, 240, 0.1, const(1), 0.1) for D in (0.05, 0.1, 1.0, 100.0)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert vals[-1] == pytest.approx(1.1 * (240 / 100 + 1), rel=0.1)
    u = stopping_bound_seq_uniform(0.1, 30, 0.1, 1.0)
    assert u == pytest.approx(1.1 * (300 + 20 * math.sqrt(300 + 4) + 1))


def test_stopping_bound_diff():
    cfg = make_config("diff", 0.5, 0.0, 0.1, Tf_at=const(1), N0=10)
    k, n = first_small_epsilon(0.2, cfg)
    assert cfg.epsilon_k(k, n) <= 0.1
    assert stopping_bound_diff(0.2, cfg) == pytest.approx(1.1 * (n + 1) + 32 * 0.1 / 0.04)
    ucfg = make_config("diff", 0.5, 0.0, 0.1, gamma_0=1.0, N0=10)
    _, nu = first_small_epsilon(0.2, ucfg)
    assert stopping_bound_diff(0.2, ucfg) == pytest.approx(1.1 * (nu + 1) + 4 * 0.1 / 0.04)


def test_iterable_of_arrays_stream():
    class Chunky:
        def __init__(self):
            self.rng = np.random.default_rng(0)

        def take(self, n):
            return (self.rng.random(min(n, 7)) < 0.9).astype(float)

    cfg = make_config("seq", 0.5, 0.1, 0.1, gamma_0=1.0)
    assert run(Chunky(), cfg).verdict == H0
