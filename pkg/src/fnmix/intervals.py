"""Confidence intervals for the stationary mean of a bounded function.

Three families: the spectral-gap Hoeffding interval with a global
burn-in, the function-adaptive interval built on f-mixing times, and the
Berry-Esseen corrected CLT interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .chain import SpectralDecomposition
from .errors import EtaTooLarge, GapTooSmall, InputError, InsufficientSamples, MinimumNUnmet
from .spectral import EIGEN_GROUP_TOL, f_spectrum

ALPHA0_GRID_SIZE = 200


@dataclass(frozen=True)
class ConfidenceInterval:
    center: float
    half_width: float
    alpha: float
    method: str
    burnin: int
    diagnostics: dict = field(default_factory=dict)

    @property
    def lower(self) -> float:
        return self.center - self.half_width

    @property
    def upper(self) -> float:
        return self.center + self.half_width

    def covers(self, mu: float) -> bool:
        return self.lower <= mu <= self.upper

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "center": self.center,
            "half_width": self.half_width,
            "alpha": self.alpha,
            "burnin": self.burnin,
            "diagnostics": self.diagnostics,
        }


@dataclass(frozen=True)
class AsymptoticVariance:
    sigma2_asym: float
    sigma2_f: float
    rho_f: float


def asymptotic_variance(decomp: SpectralDecomposition, f) -> AsymptoticVariance:
    """Spectral evaluation ``sum_{j in J_f} (1 + l_j)/(1 - l_j) (q_j^T f)^2``.

    ``rho_f = sigma_f^2 / sigma_asym^2`` is set to 1 for constant ``f``.
    """
    fv = f.values if hasattr(f, "values") else np.asarray(f, dtype=float)
    fspec = f_spectrum(decomp, fv)
    coef = decomp.projections(fv)
    mu = float(decomp.pi @ fv)
    sigma2_f = float(max(decomp.pi @ (fv - mu) ** 2, 0.0))
    # f_spectrum folds eigenvalues this close to 1 into the unit eigenspace
    near_unit = np.flatnonzero(decomp.eigenvalues[1:] > 1.0 - EIGEN_GROUP_TOL) + 1
    if near_unit.size and np.abs(coef[near_unit]).max() > fspec.tau_orth:
        raise GapTooSmall("an eigenvalue numerically equal to 1 carries mass of f")
    if not fspec.J_f:
        return AsymptoticVariance(0.0, sigma2_f, 1.0)
    idx = np.array(fspec.J_f) - 1
    lam = decomp.eigenvalues[idx]
    s2 = float(np.sum((1.0 + lam) / (1.0 - lam) * coef[idx] ** 2))
    rho = sigma2_f / s2 if s2 > 0 else 1.0
    return AsymptoticVariance(s2, sigma2_f, rho)


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise InputError("alpha must lie in (0, 1)")


def uniform_width(N: int, gamma_0: float, T_at, alpha: float, alpha_0: float) -> float:
    """``sqrt(2 (2 - g0)) sqrt(log(2/(alpha - alpha_0)) / (g0 (N - T(alpha_0))))``."""
    _check_alpha(alpha)
    if not 0.0 < alpha_0 < alpha:
        raise InputError("alpha_0 must lie in (0, alpha)")
    T = int(T_at(alpha_0))
    if N <= T:
        raise InsufficientSamples(f"N={N} does not exceed the burn-in T(alpha_0)={T}")
    return math.sqrt(2.0 * (2.0 - gamma_0)) * math.sqrt(math.log(2.0 / (alpha - alpha_0)) / (gamma_0 * (N - T)))


def uniform_ci(samples, gamma_0: float, T_at, alpha: float, alpha_0: float) -> ConfidenceInterval:
    """Spectral-gap Hoeffding interval with a total-variation burn-in.

    Parameters
    ----------
    samples : array_like
        ``f(X_1), ..., f(X_N)``.
    gamma_0 : float
        Spectral gap of the chain.
    T_at : callable
        ``delta -> T(delta)``, the total-variation mixing time.
    alpha, alpha_0 : float
        Overall level and the share spent on the burn-in.
    """
    x = np.asarray(samples, dtype=float)
    N = x.size
    width = uniform_width(N, gamma_0, T_at, alpha, alpha_0)
    burn = int(T_at(alpha_0 / 2))
    if N <= burn:
        raise InsufficientSamples(f"N={N} does not exceed the burn-in T(alpha_0/2)={burn}")
    return ConfidenceInterval(
        float(x[burn:].mean()), width, alpha, "uniform", burn, {"alpha_0": alpha_0}
    )


def optimize_alpha0(samples, gamma_0: float, T_at, alpha: float) -> ConfidenceInterval:
    """:func:`uniform_ci` at the grid minimizer of the width over ``alpha_0``.

    The grid has 200 log-spaced points in ``(1e-4 alpha, 0.99 alpha)``.
    """
    _check_alpha(alpha)
    N = np.asarray(samples).size
    grid = np.geomspace(1e-4 * alpha, 0.99 * alpha, ALPHA0_GRID_SIZE)
    best, best_w = None, math.inf
    for a0 in grid:
        try:
            w = uniform_width(N, gamma_0, T_at, alpha, float(a0))
            if N <= int(T_at(a0 / 2)):
                continue
        except InsufficientSamples:
            continue
        if w < best_w:
            best, best_w = float(a0), w
    if best is None:
        raise InsufficientSamples("no burn-in level on the grid leaves samples to average")
    return uniform_ci(samples, gamma_0, T_at, alpha, best)


def r_tilde(epsilon: float, N: int, T: int) -> float:
    """Rate ``eps^2 (N / T - 1)`` appearing in the tail ``exp(-r / 8)``."""
    return epsilon**2 * (N / T - 1.0)


def adaptive_width(N: int, T_eta: int, alpha: float) -> float:
    """``2 sqrt(2) sqrt(T_eta log(2/alpha) / (N - T_eta))``."""
    if N <= T_eta:
        raise InsufficientSamples(f"N={N} does not exceed T_f(eta/2)={T_eta}")
    return 2.0 * math.sqrt(2.0) * math.sqrt(T_eta * math.log(2.0 / alpha) / (N - T_eta))


def adaptive_ci(samples, alpha: float, Tf_at, eta: float) -> ConfidenceInterval:
    """Function-adaptive Hoeffding interval.

    The width uses ``T_eta = Tf_at(eta / 2)``; the center averages the
    samples after a burn-in of ``Tf_at(eps_N / 2)`` steps.

    Raises
    ------
    InsufficientSamples
        If ``N <= T_f(eta/2)``.
    EtaTooLarge
        If the resulting width is below ``eta``, where the rate bound at
        ``eta`` no longer certifies it.
    """
    _check_alpha(alpha)
    if not 0.0 < eta < 1.0:
        raise InputError("eta must lie in (0, 1)")
    x = np.asarray(samples, dtype=float)
    N = x.size
    T_eta = int(Tf_at(eta / 2))
    eps = adaptive_width(N, T_eta, alpha)
    if eps < eta:
        raise EtaTooLarge(f"width {eps:.4g} is below eta={eta:.4g}; choose a smaller eta")
    burn = int(Tf_at(eps / 2))
    if N <= burn:
        raise InsufficientSamples(f"N={N} does not exceed the burn-in {burn}")
    diag = {
        "eta": eta,
        "T_eta": T_eta,
        "r_N_eta": r_tilde(eps, N, T_eta),
        "r_N": r_tilde(eps, N, burn),
        "r_required": 8.0 * math.log(2.0 / alpha),
    }
    return ConfidenceInterval(float(x[burn:].mean()), eps, alpha, "adaptive", burn, diag)


def best_adaptive_eta(N: int, alpha: float, Tf_at, etas=None):
    """Smallest valid adaptive width over a grid of ``eta`` values.

    Returns ``(eta, width)`` or ``(None, inf)`` if no grid point is valid.
    """
    if etas is None:
        etas = np.geomspace(1e-4, 0.99, 400)
    best = (None, math.inf)
    for eta in etas:
        T_eta = int(Tf_at(eta / 2))
        if N <= T_eta:
            continue
        w = adaptive_width(N, T_eta, alpha)
        if w >= eta and w < best[1]:
            best = (float(eta), w)
    return best


def berry_esseen_gap(N: int, gamma_0: float, pi_min: float, sigma_asym: float) -> float:
    """CDF error ``e^{-g0 N}/(3 sqrt(pi_min)) + 13/(sigma sqrt(pi_min) g0 sqrt(N))``."""
    if min(N, gamma_0, pi_min, sigma_asym) <= 0:
        raise InputError("inputs must be positive")
    r = math.sqrt(pi_min)
    return math.exp(-gamma_0 * N) / (3.0 * r) + 13.0 / (sigma_asym * r) / (gamma_0 * math.sqrt(N))


def berry_esseen_min_n(alpha: float, sigma_asym: float, gamma_0: float, pi_min: float) -> float:
    """Sample size above which both CDF error terms are at most 1/6."""
    return max(
        math.log(2.0 / (math.sqrt(pi_min) * alpha)) / gamma_0,
        6084.0 / (gamma_0**2 * sigma_asym**2 * pi_min * alpha**2),
    )


def berry_esseen_width(N: int, alpha: float, sigma_asym: float) -> float:
    """``sigma sqrt(2 log(6/alpha) / N)``."""
    return sigma_asym * math.sqrt(2.0 * math.log(6.0 / alpha) / N)


def berry_esseen_ci(samples, alpha: float, sigma_asym: float, gamma_0: float, pi_min: float) -> ConfidenceInterval:
    """CLT interval ``mean +/- sigma sqrt(2 log(6/alpha) / N)`` behind a sample-size gate.

    Raises
    ------
    MinimumNUnmet
        With ``required_n`` set, when ``N`` is below the gate.
    """
    _check_alpha(alpha)
    if sigma_asym <= 0:
        raise InputError("sigma_asym must be positive")
    x = np.asarray(samples, dtype=float)
    N = x.size
    need = berry_esseen_min_n(alpha, sigma_asym, gamma_0, pi_min)
    if N < need:
        raise MinimumNUnmet(f"N={N} is below the Berry-Esseen minimum {need:.6g}", math.ceil(need))
    width = berry_esseen_width(N, alpha, sigma_asym)
    diag = {"required_n": math.ceil(need), "cdf_error": berry_esseen_gap(N, gamma_0, pi_min, sigma_asym)}
    return ConfidenceInterval(float(x.mean()), width, alpha, "clt", 0, diag)
