"""Hoeffding-type tail bounds for ergodic averages of a bounded function.

Every bound here controls an upper-tail probability
``P(mean of f(X_1..X_N) >= mu + epsilon)`` and is clipped to ``[0, 1]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, InsufficientSamples, PreconditionViolated
from .spectral import FSpectrum, JSplit

# gamma_0 at or above this is treated as independent sampling
IID_GAMMA_TOL = 1e-12


@dataclass(frozen=True)
class TailBound:
    method: str
    epsilon: float
    N: int
    value: float
    n_eff: float
    burnin: int = 0
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "method": self.method,
            "epsilon": self.epsilon,
            "N": self.N,
            "burnin": self.burnin,
            "bound": self.value,
            "n_eff": self.n_eff,
        }
        out.update(self.extra)
        return out


def _clip(x: float) -> float:
    return float(min(1.0, max(0.0, x)))


def _check_eps_N(epsilon, N):
    if not epsilon > 0:
        raise InputError("epsilon must be positive")
    if N < 1:
        raise InputError("N must be >= 1")


def effective_sample_size(N: int, Tf: float, with_burnin: bool = False) -> float:
    """``N / Tf``, less one when a burn-in of ``Tf`` steps is charged."""
    if Tf < 1:
        raise InputError("Tf must be >= 1")
    return N / Tf - (1.0 if with_burnin else 0.0)


def master_hoeffding(epsilon: float, N: int, Tf_at, check_start: float | None = None, with_burnin: bool = False) -> TailBound:
    """Mixing-time Hoeffding bound ``exp(-eps^2 floor(N/T) / 8)``, ``T = T_f(eps/2)``.

    Parameters
    ----------
    epsilon : float
        Deviation in ``(0, 1)``.
    N : int
        Number of samples averaged.
    Tf_at : callable
        ``delta -> T_f(delta)``; any upper bound on the f-mixing time works.
    check_start : float, optional
        ``d_f(pi0, pi)`` of the start distribution; must not exceed ``epsilon / 2``.
    with_burnin : bool
        Report the effective sample size net of a ``T_f(eps/2)`` burn-in.

    Raises
    ------
    PreconditionViolated
        If ``N < T_f(eps/2)`` or the start is too far from stationarity.
    """
    _check_eps_N(epsilon, N)
    if epsilon >= 1:
        raise InputError("epsilon must lie in (0, 1)")
    if check_start is not None and check_start > epsilon / 2:
        raise PreconditionViolated(
            f"start distribution has f-discrepancy {check_start:.4g} > epsilon/2 = {epsilon / 2:.4g}"
        )
    T = int(Tf_at(epsilon / 2))
    if N < T:
        raise InsufficientSamples(f"N={N} is below the f-mixing time T_f(epsilon/2)={T}")
    # thinning into T interleaved subsequences; floor is the conservative side
    blocks = N // T
    value = math.exp(-(epsilon**2) * blocks / 8.0)
    return TailBound(
        "master",
        epsilon,
        N,
        _clip(value),
        effective_sample_size(N, T, with_burnin),
        burnin=T if with_burnin else 0,
        extra={"Tf": T},
    )


def hoeffding_spectral(epsilon: float, N: int, fspec: FSpectrum, pi_min: float) -> TailBound:
    """Tail bound with ``T_f`` replaced by its f-spectral-gap estimate.

    Uses ``exp(-(eps^2/8) gamma_f N / log(2/(eps sqrt(pi_min))))`` when
    ``eps <= 2 lambda_f / sqrt(pi_min)`` and the independent-sampling form
    ``exp(-eps^2 N / 8)`` otherwise.
    """
    _check_eps_N(epsilon, N)
    root = math.sqrt(pi_min)
    if epsilon <= 2.0 * fspec.lambda_f / root:
        L = math.log(2.0 / (epsilon * root))
        T_real = L / fspec.gamma_f
        T_needed = max(1, math.ceil(T_real))
        if N < T_needed:
            raise InsufficientSamples(f"N={N} is below the spectral f-mixing bound {T_needed}")
        value = math.exp(-(epsilon**2 / 8.0) * fspec.gamma_f * N / L)
        branch = "gap"
    else:
        T_real = 1.0
        value = math.exp(-(epsilon**2) * N / 8.0)
        branch = "iid"
    return TailBound("spectral", epsilon, N, _clip(value), N / T_real, extra={"branch": branch})


def hoeffding_jsplit(Delta: float, Delta_J: float, N: int, jsplit: JSplit, pi_min: float) -> TailBound:
    """Tail bound at deviation ``2 (Delta_J + Delta)`` from a J-split.

    ``Delta_J`` must dominate ``Delta*_J``; ``Delta`` is the allowance for
    the eigenspaces outside ``J``.
    """
    if not Delta > 0 or Delta_J < 0:
        raise InputError("Delta must be positive and Delta_J nonnegative")
    if N < 1:
        raise InputError("N must be >= 1")
    if Delta_J < jsplit.Delta_J_star:
        raise PreconditionViolated(f"Delta_J={Delta_J:.4g} is below Delta*_J={jsplit.Delta_J_star:.4g}")
    root = math.sqrt(pi_min)
    s = Delta_J + Delta
    lam = jsplit.lambda_minus_J
    if Delta <= lam / root:
        L = math.log(1.0 / (Delta * root))
        T_real = L / (1.0 - lam)
        T_needed = max(1, math.ceil(T_real))
        if N < T_needed:
            raise InsufficientSamples(f"N={N} is below the J-split mixing bound {T_needed}")
        value = math.exp(-(s**2 / 2.0) * (1.0 - lam) * N / L)
        branch = "gap"
    else:
        T_real = 1.0
        value = math.exp(-(s**2) * N / 2.0)
        branch = "iid"
    return TailBound("jsplit", 2.0 * s, N, _clip(value), N / T_real, extra={"branch": branch})


def uniform_hoeffding(epsilon: float, N: int, gamma_0: float, one_sided: bool = False) -> TailBound:
    """Spectral-gap Hoeffding bound for a stationary start.

    Two-sided ``2 exp(-gamma_0 / (2 (2 - gamma_0)) eps^2 N)``; the
    one-sided version drops the factor 2.
    """
    _check_eps_N(epsilon, N)
    if not 0.0 < gamma_0 <= 1.0:
        raise InputError("gamma_0 must lie in (0, 1]")
    rate = gamma_0 / (2.0 * (2.0 - gamma_0))
    value = (1.0 if one_sided else 2.0) * math.exp(-rate * epsilon**2 * N)
    # N_eff: the iid-equivalent sample count under the exponent eps^2 N_eff / 2
    return TailBound("uniform", epsilon, N, _clip(value), 2.0 * rate * N, extra={"two_sided": not one_sided})


def _burnin_exponent(epsilon, n, gamma_0):
    if gamma_0 >= 1.0 - IID_GAMMA_TOL:
        return epsilon**2 * n / 2.0
    return gamma_0 / (2.0 * (1.0 - gamma_0)) * epsilon**2 * n


def uniform_hoeffding_burnin(epsilon: float, N: int, T0: int, gamma_0: float, dtv_at_T0: float) -> TailBound:
    """``d_TV(T0) + exp(-gamma_0 / (2 (1 - gamma_0)) eps^2 (N - T0))``."""
    _check_eps_N(epsilon, N)
    if not 0 <= T0 < N:
        raise InputError("burn-in must satisfy 0 <= T0 < N")
    if not 0.0 < gamma_0 <= 1.0:
        raise InputError("gamma_0 must lie in (0, 1]")
    value = dtv_at_T0 + math.exp(-_burnin_exponent(epsilon, N - T0, gamma_0))
    return TailBound("uniform_burnin", epsilon, N, _clip(value), float(N - T0), burnin=int(T0))


def optimize_burnin(epsilon: float, N: int, gamma_0: float, dtv_at, T0_range=None):
    """Scan burn-in lengths and keep the one minimizing the burn-in bound.

    Parameters
    ----------
    dtv_at : callable
        Vectorized ``T0 array -> d_TV`` (exact values or an upper bound).
    T0_range : (int, int), optional
        Inclusive scan range, default ``(0, min(N - 1, 10**5))``.

    Returns
    -------
    (int, TailBound)
    """
    _check_eps_N(epsilon, N)
    lo, hi = (0, min(N - 1, 10**5)) if T0_range is None else T0_range
    hi = min(hi, N - 1)
    if lo > hi:
        raise InputError("empty burn-in range")
    T0 = np.arange(lo, hi + 1)
    n = (N - T0).astype(float)
    if gamma_0 >= 1.0 - IID_GAMMA_TOL:
        expo = epsilon**2 * n / 2.0
    else:
        expo = gamma_0 / (2.0 * (1.0 - gamma_0)) * epsilon**2 * n
    vals = np.asarray(dtv_at(T0), dtype=float) + np.exp(-expo)
    best = int(T0[np.argmin(vals)])
    return best, uniform_hoeffding_burnin(epsilon, N, best, gamma_0, float(dtv_at(np.array([best]))[0]))
