"""Example chains and functions: cycles, lines, random functions, and two
posterior samplers with exactly computable transition matrices."""

from __future__ import annotations

import csv
import itertools
import math
from importlib import resources
from pathlib import Path

import numpy as np
import scipy.optimize
import scipy.special

from .chain import TransitionMatrix, validate_chain
from .discrepancy import FunctionOnChain, function_on_chain
from .errors import DataMissing, InputError, InvalidData


# -- small chains ---------------------------------------------------------


def two_state(p: float = 0.3, q: float | None = None) -> TransitionMatrix:
    """``[[1-p, p], [q, 1-q]]`` (symmetric when ``q`` is omitted)."""
    q = p if q is None else q
    P = np.array([[1.0 - p, p], [q, 1.0 - q]])
    return validate_chain(P, np.array([q, p]) / (p + q))


def rank_one(pi) -> TransitionMatrix:
    """Independent sampling from ``pi``: every row of ``P`` equals ``pi``."""
    pi = np.asarray(pi, dtype=float)
    return validate_chain(np.tile(pi, (pi.size, 1)), pi)


def bernoulli_iid(p: float = 0.7):
    """Independent Bernoulli(p) draws as a two-state rank-one chain with ``f = (0, 1)``."""
    chain = rank_one([1.0 - p, p])
    return chain, function_on_chain(chain, [0.0, 1.0])


# -- lazy cycle -----------------------------------------------------------


def lazy_cycle(d: int) -> TransitionMatrix:
    """Lazy walk on the cycle with ``2d`` states: hold 1/2, step either way 1/4."""
    if d < 2:
        raise InputError("d must be >= 2")
    n = 2 * d
    P = 0.5 * np.eye(n)
    idx = np.arange(n)
    P[idx, (idx + 1) % n] += 0.25
    P[idx, (idx - 1) % n] += 0.25
    return validate_chain(P, np.full(n, 1.0 / n))


def cycle_eigenvalue(d: int, j: int) -> float:
    return 0.5 * (1.0 + math.cos(math.pi * j / d))


def periodic_function(d: int, j: int) -> np.ndarray:
    """``f_j(u) = (1 + cos(pi j u / d)) / 2`` on ``u = 0..2d-1``."""
    if not 0 <= j <= d:
        raise InputError("j must lie in [0, d]")
    u = np.arange(2 * d)
    return 0.5 * (1.0 + np.cos(np.pi * j * u / d))


def parity(d: int) -> np.ndarray:
    """Indicator of odd states; the complement ``1 - f_d`` of the fastest periodic function."""
    return (np.arange(2 * d) % 2).astype(float)


def cycle_mixing_time_bound(d: int, j: int, delta: float) -> float:
    """Gap-based upper bound on ``T_{f_j}(delta)`` for the lazy cycle.

    ``(24/pi^2) [log(2d)/2 + log(1/delta)] d^2/j^2`` for ``j <= d/2`` and
    ``log(2d) + 2 log(1/delta)`` above.
    """
    if not 1 <= j <= d:
        raise InputError("j must lie in [1, d]")
    if j <= d / 2:
        return 24.0 / math.pi**2 * (0.5 * math.log(2 * d) + math.log(1.0 / delta)) * d**2 / j**2
    return math.log(2 * d) + 2.0 * math.log(1.0 / delta)


def periodic_gap_lower_bound(d: int, j: int) -> float:
    """``pi^2 j^2 / (24 d^2)`` for ``j <= d/2``, else ``1/2``."""
    return math.pi**2 * j**2 / (24.0 * d**2) if j <= d / 2 else 0.5


def random_function(d: int, seed: int, nu=None) -> np.ndarray:
    """iid values on the ``2d`` cycle states.

    ``nu`` is ``None`` (Uniform[0, 1]), a float (point mass) or a callable
    ``(rng, size) -> values``.
    """
    rng = np.random.default_rng(seed)
    n = 2 * d
    if nu is None:
        vals = rng.random(n)
    elif callable(nu):
        vals = np.asarray(nu(rng, n), dtype=float)
    else:
        vals = np.full(n, float(nu))
    if vals.min() < 0 or vals.max() > 1:
        raise InputError("nu must be supported on [0, 1]")
    return vals


def j_delta_set(d: int, delta: float) -> tuple:
    """Fourier indices ``j in [1, 2d-1]`` within ``4 delta sqrt(d / log d)`` of 0 or ``2d``."""
    if d < 2:
        raise InputError("d must be >= 2")
    c = 4.0 * delta * math.sqrt(d / math.log(d))
    return tuple(j for j in range(1, 2 * d) if j <= c or j >= 2 * d - c)


def fourier_projections(f) -> np.ndarray:
    """``|(1/2d) sum_u f(u) exp(i pi j u / d)|`` for ``j = 0..2d-1``."""
    f = np.asarray(f, dtype=float)
    return np.abs(np.fft.fft(f)) / f.size


def random_function_projection_cap(d: int) -> float:
    """``2 sqrt(10 log d / d)``, the high-probability cap on low-frequency projections."""
    return 2.0 * math.sqrt(10.0 * math.log(d) / d)


def random_function_mixing_scale(d: int, delta: float) -> float:
    """``d log d log(d/delta) / delta^2``, the random-function mixing-time scale."""
    return d * math.log(d) * math.log(d / delta) / delta**2


# -- line graph -----------------------------------------------------------


def line_chain(d: int) -> TransitionMatrix:
    """Lazy walk on a path of ``2d`` states with reflecting ends.

    Interior states hold with probability 1/2 and step each way with
    1/4; the two end states hold with 3/4. ``P`` is symmetric, so the
    stationary law is uniform.
    """
    if d < 2:
        raise InputError("d must be >= 2")
    n = 2 * d
    P = 0.5 * np.eye(n)
    idx = np.arange(n - 1)
    P[idx, idx + 1] = 0.25
    P[idx + 1, idx] = 0.25
    P[0, 0] = P[-1, -1] = 0.75
    return validate_chain(P, np.full(n, 1.0 / n))


def threshold_function(d: int, delta: float) -> np.ndarray:
    """``1/2 - delta`` on the first ``d`` states, ``1/2 + delta`` on the rest."""
    if not 0.0 < delta < 0.5:
        raise InputError("delta must lie in (0, 1/2)")
    return np.r_[np.full(d, 0.5 - delta), np.full(d, 0.5 + delta)]


def outer_quarters(d: int) -> np.ndarray:
    """Boolean mask of positions ``i in [0, d/2] or [3d/2, 2d]`` (1-based labels)."""
    i = np.arange(1, 2 * d + 1)
    return (i <= d / 2) | (i >= 1.5 * d)


# -- data files -----------------------------------------------------------


def _read_csv(path, name):
    if path is None:
        try:
            text = resources.files("fnmix").joinpath("data", name).read_text()
        except (FileNotFoundError, OSError) as exc:
            raise DataMissing(f"bundled dataset {name} not found") from exc
    else:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise DataMissing(f"cannot read {path}: {exc}") from exc
    rows = [r for r in csv.reader(line for line in text.splitlines() if line and not line.startswith("#"))]
    return rows[0], rows[1:]


# -- O-ring logistic regression ------------------------------------------


def load_oring(path=None):
    """Return ``(x, y)``: temperature / 100 and the binary failure indicator."""
    header, rows = _read_csv(path, "oring.csv")
    try:
        data = np.array([[float(v) for v in r] for r in rows])
    except ValueError as exc:
        raise InvalidData(f"non-numeric O-ring data: {exc}") from exc
    if data.shape != (23, 2):
        raise InvalidData(f"expected 23 rows of (temperature, failure), got {data.shape}")
    y = data[:, 1]
    if not np.all((y == 0) | (y == 1)):
        raise InvalidData("failure column must be 0/1")
    return data[:, 0] / 100.0, y


def logistic_mle(x, y) -> np.ndarray:
    """Maximum-likelihood ``(alpha, beta)`` for ``P(y=1) = logistic(alpha + beta x)``."""

    def nll(t):
        eta = t[0] + t[1] * x
        return float(np.sum(np.logaddexp(0.0, eta) - y * eta))

    def grad(t):
        r = scipy.special.expit(t[0] + t[1] * x) - y
        return np.array([r.sum(), (r * x).sum()])

    res = scipy.optimize.minimize(nll, np.zeros(2), jac=grad, method="BFGS", options={"gtol": 1e-10})
    return res.x


def oring_log_posterior(a, b, x, y, scale):
    """Unnormalized log posterior: ``e^alpha ~ Exp(mean scale)``, flat prior on ``beta``."""
    eta = a[..., None] + b[..., None] * x
    loglik = np.sum(y * eta - np.logaddexp(0.0, eta), axis=-1)
    return a - np.exp(a) / scale + loglik


def oring_mh_chain(path=None, half_width: int = 8, mesh: float = 0.1, Sigma=((4.0, 0.0), (0.0, 10.0))):
    """Metropolis-Hastings on a ``(2k+1)^2`` grid centred at the MLE.

    The Gaussian proposal is restricted to the grid: from state ``s`` the
    proposal weight of ``t`` is proportional to ``N(t - s; 0, Sigma)``,
    renormalized over the grid. Acceptance uses the exact Hastings ratio
    of these discrete proposals, and rejected mass stays at ``s``.

    Returns
    -------
    (TransitionMatrix, FunctionOnChain, dict)
        The chain, ``f65 = logistic(alpha + 0.65 beta)``, and grid metadata.
    """
    x, y = load_oring(path)
    a_hat, b_hat = logistic_mle(x, y)
    offs = mesh * np.arange(-half_width, half_width + 1)
    A, B = np.meshgrid(a_hat + offs, b_hat + offs, indexing="ij")
    a, b = A.ravel(), B.ravel()
    logp = oring_log_posterior(a, b, x, y, math.exp(a_hat))
    pi = np.exp(logp - logp.max())
    pi /= pi.sum()

    Sinv = np.linalg.inv(np.asarray(Sigma, dtype=float))
    diff = np.stack([a[:, None] - a[None, :], b[:, None] - b[None, :]], axis=-1)
    W = np.exp(-0.5 * np.einsum("ijk,kl,ijl->ij", diff, Sinv, diff))
    Z = W.sum(axis=1)
    Q = W / Z[:, None]
    # pi_t q(t, s) / (pi_s q(s, t)) = pi_t Z_s / (pi_s Z_t) for a symmetric kernel
    ratio = (pi[None, :] * Z[:, None]) / (pi[:, None] * Z[None, :])
    P = Q * np.minimum(1.0, ratio)
    np.fill_diagonal(P, 0.0)
    P[np.diag_indices_from(P)] = 1.0 - P.sum(axis=1)
    chain = validate_chain(P, pi)
    f65 = function_on_chain(chain, scipy.special.expit(a + 0.65 * b))
    meta = {"alpha_hat": float(a_hat), "beta_hat": float(b_hat), "alpha": a.tolist(), "beta": b.tolist()}
    return chain, f65, meta


# -- two-component mixture, collapsed Gibbs ------------------------------


def load_mixture(path=None):
    """Return ``(values, groups)``: 10 observations and their 0/1 group labels."""
    header, rows = _read_csv(path, "mixture.csv")
    try:
        data = np.array([[float(v) for v in r] for r in rows])
    except ValueError as exc:
        raise InvalidData(f"non-numeric mixture data: {exc}") from exc
    if data.shape != (10, 2):
        raise InvalidData(f"expected 10 rows of (value, group), got {data.shape}")
    groups = data[:, 1].astype(int)
    if sorted(groups.tolist()) != [0] * 5 + [1] * 5:
        raise InvalidData("need exactly five observations in each group")
    return data[:, 0], groups


def gaussian_group_log_marginal(s1, s2, n, sigma, rho):
    """Log marginal density of ``n`` points with sums ``s1``, ``s2`` under ``x_i ~ N(m, sigma^2)``, ``m ~ N(0, rho^2)``."""
    n = np.asarray(n, dtype=float)
    s2v, r2 = sigma**2, rho**2
    out = (
        -0.5 * n * math.log(2.0 * math.pi * s2v)
        - 0.5 * np.log1p(n * r2 / s2v)
        - (s2 - r2 * s1**2 / (s2v + n * r2)) / (2.0 * s2v)
    )
    return np.where(n > 0, out, 0.0)


def mixture_log_posterior(x, sigma=70.0, rho=237.0, alpha0=1.0, alpha1=1.0) -> np.ndarray:
    """Unnormalized ``log p(z | x)`` for all ``2^n`` labelings (bit ``i`` of the index is ``z_i``)."""
    x = np.asarray(x, dtype=float)
    n = x.size
    Z = np.array(list(itertools.product([0, 1], repeat=n)))[:, ::-1]
    n1 = Z.sum(axis=1)
    n0 = n - n1
    lp = scipy.special.betaln(alpha0 + n1, alpha1 + n0) - scipy.special.betaln(alpha0, alpha1)
    for lab, cnt in ((1, n1), (0, n0)):
        mask = Z == lab
        s1 = (mask * x).sum(axis=1)
        s2 = (mask * x**2).sum(axis=1)
        lp = lp + gaussian_group_log_marginal(s1, s2, cnt, sigma, rho)
    return lp


def mixture_gibbs_chain(path=None, values=None, groups=None, sigma=70.0, rho=237.0, alpha0=1.0, alpha1=1.0):
    """Random-scan collapsed Gibbs sampler over the ``2^10`` cluster labelings.

    From ``z`` a coordinate ``i`` is drawn uniformly and ``z_i`` is
    resampled from its exact conditional, so ``P(z, z^(i)) =
    pi(z^(i)) / (10 (pi(z) + pi(z^(i))))``.

    Returns
    -------
    (TransitionMatrix, FunctionOnChain, dict)
        The chain, the exact-recovery indicator of the two labelings that
        split the groups, and metadata.
    """
    if values is None:
        values, groups = load_mixture(path)
    values = np.asarray(values, dtype=float)
    groups = np.asarray(groups, dtype=int)
    if values.shape != (10,) or groups.shape != (10,):
        raise InvalidData("need 10 values with 10 group labels")
    n = values.size
    d = 2**n
    lp = mixture_log_posterior(values, sigma, rho, alpha0, alpha1)
    pi = np.exp(lp - lp.max())
    pi /= pi.sum()
    P = np.zeros((d, d))
    states = np.arange(d)
    for i in range(n):
        nb = states ^ (1 << i)
        P[states, nb] = pi[nb] / (n * (pi + pi[nb]))
    P[states, states] = 1.0 - P.sum(axis=1)
    chain = validate_chain(P, pi)
    truth = sum(int(g) << i for i, g in enumerate(groups))
    f = np.zeros(d)
    f[[truth, truth ^ (d - 1)]] = 1.0
    meta = {"truth_states": [truth, truth ^ (d - 1)], "sigma": sigma, "rho": rho, "alpha0": alpha0, "alpha1": alpha1}
    return chain, function_on_chain(chain, f), meta
