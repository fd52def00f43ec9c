import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fnmix import errors, zoo
from fnmix.chain import (
    load_chain,
    save_chain,
    spectral_decompose,
    stationary_distribution,
    validate_chain,
)


def test_symmetric_two_state_pi():
    c = validate_chain([[0.7, 0.3], [0.3, 0.7]])
    np.testing.assert_allclose(c.pi, [0.5, 0.5])
    assert c.pi_min == pytest.approx(0.5)


def test_lazy_c4_uniform():
    c = validate_chain(zoo.lazy_cycle(2).P)
    np.testing.assert_allclose(c.pi, 0.25)
    assert c.pi_min == pytest.approx(0.25)


def test_claimed_pi_not_reversible():
    with pytest.raises(errors.NotReversible):
        validate_chain([[0.5, 0.5], [0.9, 0.1]], [0.5, 0.5])


@pytest.mark.parametrize(
    "P, exc",
    [
        ([[0.5, 0.6], [0.5, 0.5]], errors.NotStochastic),
        ([[1.2, -0.2], [0.5, 0.5]], errors.NotStochastic),
        ([[1.0, 0.0], [0.5, 0.5]], errors.Reducible),
        ([[0.5, 0.5, 0.0], [0.5, 0.5, 0.0], [0.0, 0.0, 1.0]], errors.Reducible),
        ([[0.0, 1.0], [1.0, 0.0]], errors.Periodic),
        ([[0.5, 0.5]], errors.InputError),
    ],
)
def test_invalid_chains(P, exc):
    with pytest.raises(exc):
        validate_chain(P)


def test_non_positive_pi():
    with pytest.raises(errors.InputError):
        validate_chain([[0.7, 0.3], [0.3, 0.7]], [1.0, 0.0])


@pytest.mark.parametrize(
    "P, pi",
    [
        ([[0.7, 0.3], [0.3, 0.7]], [0.5, 0.5]),
        ([[0.9, 0.1], [0.2, 0.8]], [2 / 3, 1 / 3]),
    ],
)
def test_stationary_distribution(P, pi):
    np.testing.assert_allclose(stationary_distribution(np.array(P)), pi, atol=1e-14)


@pytest.mark.parametrize("d", [2, 5, 16])
def test_cycle_stationary_uniform(d):
    np.testing.assert_allclose(stationary_distribution(zoo.lazy_cycle(d).P), 1 / (2 * d), atol=1e-14)


def test_two_state_decomposition(two_state):
    s = spectral_decompose(two_state)
    np.testing.assert_allclose(s.eigenvalues, [1.0, 0.4], atol=1e-14)
    h2, q2 = s.h[1], s.q[1]
    sign = np.sign(h2[0])
    np.testing.assert_allclose(sign * h2, [1, -1], atol=1e-14)
    np.testing.assert_allclose(sign * q2, [0.5, -0.5], atol=1e-14)
    assert s.gamma_star == pytest.approx(0.6)


def test_lazy_c4_eigenvalues():
    s = spectral_decompose(zoo.lazy_cycle(2))
    np.testing.assert_allclose(s.eigenvalues, [1, 0.5, 0.5, 0], atol=1e-14)


def test_rank_one_gaps():
    s = spectral_decompose(zoo.rank_one([0.2, 0.3, 0.5]))
    np.testing.assert_allclose(s.eigenvalues[1:], 0, atol=1e-14)
    assert s.gamma_0 == pytest.approx(1.0)
    assert s.gamma_star == pytest.approx(1.0)


@st.composite
def reversible_chains(draw):
    d = draw(st.integers(2, 7))
    w = np.array(draw(st.lists(st.floats(0.05, 1.0), min_size=d * d, max_size=d * d))).reshape(d, d)
    W = w + w.T
    P = W / W.sum(axis=1, keepdims=True)
    return P


@settings(max_examples=50, deadline=None)
@given(reversible_chains())
def test_decomposition_properties(P):
    c = validate_chain(P)
    np.testing.assert_allclose(c.pi @ c.P, c.pi, atol=1e-12)
    s = spectral_decompose(c)
    assert s.reconstruction_error() <= 1e-10
    assert s.biorthogonality_error() <= 1e-10
    assert np.all(np.diff(s.eigenvalues) <= 1e-12)
    assert s.eigenvalues[0] == pytest.approx(1.0)
    np.testing.assert_allclose(s.pi @ s.h[1:].T, 0, atol=1e-10)


def test_json_round_trip(tmp_path, two_state):
    path = tmp_path / "c.json"
    save_chain(two_state, path)
    back = load_chain(path)
    np.testing.assert_array_equal(back.P, two_state.P)
    np.testing.assert_allclose(back.pi, two_state.pi)
    assert json.loads(path.read_text())["d"] == 2


def test_load_derives_pi(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"d": 2, "P": [0.9, 0.1, 0.2, 0.8]}))
    np.testing.assert_allclose(load_chain(path).pi, [2 / 3, 1 / 3])


def test_load_requires_d(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"P": [0.9, 0.1, 0.2, 0.8]}))
    with pytest.raises(errors.InputError):
        load_chain(path)


def test_load_missing(tmp_path):
    with pytest.raises(errors.InputError):
        load_chain(tmp_path / "none.json")
