"""Exact f-discrepancy and total-variation curves, and the mixing times they define.

Everything here is computed by repeated matrix-vector (or matrix-matrix)
products with ``P``; no eigendecomposition is involved, so these values
serve as the ground truth for the spectral bounds.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .chain import TransitionMatrix
from .errors import InputError, NotAttained, NotAttainedError

DEFAULT_N_MAX = 10**6
# absorbs accumulation rounding in "w(n) <= delta" comparisons
CROSSING_SLACK = 1e-13


def default_n_max() -> int:
    return int(os.environ.get("FNMIX_NMAX", DEFAULT_N_MAX))


@dataclass(frozen=True, eq=False)
class FunctionOnChain:
    values: np.ndarray
    mu: float
    sigma2_f: float

    @property
    def d(self) -> int:
        return self.values.shape[0]

    @property
    def second_moment(self) -> float:
        return self.sigma2_f + self.mu**2


def function_on_chain(chain: TransitionMatrix, values) -> FunctionOnChain:
    """Attach stationary mean and variance to a vector ``f: [d] -> [0, 1]``."""
    f = np.array(values, dtype=float).ravel()
    if f.shape != (chain.d,):
        raise InputError(f"function has {f.size} values, chain has {chain.d} states")
    if not np.all(np.isfinite(f)) or f.min() < 0.0 or f.max() > 1.0:
        raise InputError("function values must lie in [0, 1]")
    mu = float(chain.pi @ f)
    var = float(max(chain.pi @ (f - mu) ** 2, 0.0))
    return FunctionOnChain(values=f, mu=mu, sigma2_f=var)


@dataclass(frozen=True)
class DiscrepancyCurve:
    """Worst-start discrepancy ``w(n)`` for ``n = 1..n_max`` (``values[n-1]``)."""

    kind: str
    values: np.ndarray

    @property
    def n_max(self) -> int:
        return self.values.shape[0]

    def at(self, n: int) -> float:
        return float(self.values[n - 1])

    def first_crossing(self, delta: float):
        """Smallest ``n`` with ``w(n) <= delta``, or :class:`NotAttained`."""
        hits = np.flatnonzero(self.values <= delta + CROSSING_SLACK)
        if hits.size == 0:
            return NotAttained(self.n_max)
        return int(hits[0]) + 1

    def to_csv(self) -> str:
        lines = ["n,value"]
        lines += [f"{n},{v:.17g}" for n, v in enumerate(self.values, start=1)]
        return "\n".join(lines) + "\n"


def _values(f) -> np.ndarray:
    return f.values if isinstance(f, FunctionOnChain) else np.asarray(f, dtype=float)


def f_discrepancy(chain: TransitionMatrix, f, pi0, n: int) -> float:
    """``|pi0^T P^n f - mu|`` by ``n`` mat-vec products."""
    if n < 0:
        raise InputError("n must be >= 0")
    pi0 = np.asarray(pi0, dtype=float)
    if pi0.min() < 0.0 or abs(pi0.sum() - 1.0) > 1e-10:
        raise InputError("pi0 must be a probability vector")
    fv = _values(f)
    mu = chain.pi @ fv
    row = pi0.copy()
    for _ in range(n):
        row = row @ chain.P
    return float(abs(row @ fv - mu))


def worst_case_f_discrepancy(chain: TransitionMatrix, f, n: int) -> float:
    """``max_i |e_i^T P^n f - mu|``."""
    fv = _values(f)
    mu = chain.pi @ fv
    v = fv.copy()
    for _ in range(n):
        v = chain.P @ v
    return float(np.abs(v - mu).max())


def tv_discrepancy(chain: TransitionMatrix, pi0, n: int) -> float:
    row = np.asarray(pi0, dtype=float).copy()
    for _ in range(n):
        row = row @ chain.P
    return float(0.5 * np.abs(row - chain.pi).sum())


def worst_case_tv(chain: TransitionMatrix, n: int) -> float:
    M = np.eye(chain.d)
    for _ in range(n):
        M = M @ chain.P
    return float(0.5 * np.abs(M - chain.pi[None, :]).sum(axis=1).max())


def _f_curve_values(P, fv, mu, n_max, stop_below=None):
    out = np.empty(n_max)
    v = fv.copy()
    for n in range(n_max):
        v = P @ v
        out[n] = np.abs(v - mu).max()
        if stop_below is not None and out[n] <= stop_below:
            return out[: n + 1]
    return out


def _tv_curve_values(P, pi, n_max, stop_below=None):
    out = np.empty(n_max)
    M = np.eye(P.shape[0])
    for n in range(n_max):
        M = M @ P
        out[n] = 0.5 * np.abs(M - pi[None, :]).sum(axis=1).max()
        if stop_below is not None and out[n] <= stop_below:
            return out[: n + 1]
    return out


def discrepancy_curve(chain: TransitionMatrix, f=None, n_max: int = 100) -> DiscrepancyCurve:
    """Worst-start curve for ``f``, or for total variation when ``f`` is None."""
    if n_max < 1:
        raise InputError("n_max must be >= 1")
    if f is None:
        return DiscrepancyCurve("total-variation", _tv_curve_values(chain.P, chain.pi, n_max))
    fv = _values(f)
    return DiscrepancyCurve("f-discrepancy", _f_curve_values(chain.P, fv, chain.pi @ fv, n_max))


def f_mixing_time(chain: TransitionMatrix, f, delta: float, n_max: int | None = None):
    """First ``n >= 1`` with worst-start f-discrepancy ``<= delta``.

    This is the literal first crossing; the curve need not be monotone.
    Returns :class:`NotAttained` if no crossing occurs by ``n_max``.
    """
    if not 0.0 < delta < 1.0:
        raise InputError("delta must lie in (0, 1)")
    n_max = default_n_max() if n_max is None else n_max
    fv = _values(f)
    vals = _f_curve_values(chain.P, fv, chain.pi @ fv, n_max, stop_below=delta + CROSSING_SLACK)
    return DiscrepancyCurve("f-discrepancy", vals).first_crossing(delta)


def tv_mixing_time(chain: TransitionMatrix, delta: float, n_max: int | None = None):
    if not 0.0 < delta < 1.0:
        raise InputError("delta must lie in (0, 1)")
    n_max = default_n_max() if n_max is None else n_max
    vals = _tv_curve_values(chain.P, chain.pi, n_max, stop_below=delta + CROSSING_SLACK)
    return DiscrepancyCurve("total-variation", vals).first_crossing(delta)


class MixingTimeTable:
    """Callable ``delta -> T(delta)`` backed by one precomputed exact curve.

    The curve is extended on demand (doubling) up to ``n_max``. Queries
    that are not attained raise :class:`~fnmix.errors.NotAttainedError`,
    since the bounds that consume mixing times need an integer.
    """

    def __init__(self, chain: TransitionMatrix, f=None, n_max: int | None = None, initial: int = 256):
        self.chain = chain
        self.kind = "total-variation" if f is None else "f-discrepancy"
        self._f = None if f is None else _values(f)
        self.n_max = default_n_max() if n_max is None else n_max
        self._n = 0
        self._prefix_min = np.empty(0)
        self._state = None
        self._extend(min(initial, self.n_max))

    def _extend(self, n_new):
        P, pi = self.chain.P, self.chain.pi
        extra = n_new - self._n
        if extra <= 0:
            return
        vals = np.empty(extra)
        if self._f is not None:
            v = self._f.copy() if self._state is None else self._state
            mu = pi @ self._f
            for k in range(extra):
                v = P @ v
                vals[k] = np.abs(v - mu).max()
        else:
            v = np.eye(P.shape[0]) if self._state is None else self._state
            for k in range(extra):
                v = v @ P
                vals[k] = 0.5 * np.abs(v - pi[None, :]).sum(axis=1).max()
        self._state = v
        start = self._prefix_min[-1] if self._n else np.inf
        pm = np.minimum.accumulate(np.concatenate([[start], vals]))[1:]
        self._prefix_min = np.concatenate([self._prefix_min, pm])
        self._n = n_new

    def curve(self) -> np.ndarray:
        """Prefix minima of the curve computed so far."""
        return self._prefix_min.copy()

    def __call__(self, delta: float) -> int:
        target = delta + CROSSING_SLACK
        while True:
            hits = np.flatnonzero(self._prefix_min <= target)
            if hits.size:
                return int(hits[0]) + 1
            if self._n >= self.n_max:
                raise NotAttainedError(self.n_max)
            self._extend(min(2 * self._n, self.n_max))
