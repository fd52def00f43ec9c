"""Sequential tests of ``H0: mu >= r + delta`` against ``H1: mu <= r - delta``.

Three procedures are provided: a fixed-sample test, a sequential test
with a known indifference region, and a sequential test with none. Each
comes with parameters derived from the f-mixing time ("adaptive") or
from the spectral gap ("uniform").

Sample streams are pull-based: anything with a ``take(n)`` method that
returns up to ``n`` further values, or any iterable of floats.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, InsufficientSamples

DEFAULT_STREAM_CAP = 10**7
BISECTION_ITERS = 80

H0, H1, INDIFFERENCE, RUNNING = "H0", "H1", "Indifference", "Running"


class StreamExhausted(InsufficientSamples):
    """The stream ended before the fixed sample size was reached."""


class IterableStream:
    """Adapter exposing ``take(n)`` over an iterable of floats."""

    def __init__(self, iterable):
        self._it = iter(iterable)

    def take(self, n: int) -> np.ndarray:
        return np.fromiter(itertools.islice(self._it, n), dtype=float)


def as_stream(obj):
    return obj if hasattr(obj, "take") else IterableStream(obj)


class _Prefix:
    """Running sum of a stream, advanced to requested sample counts."""

    def __init__(self, stream, cap):
        self.stream = as_stream(stream)
        self.cap = cap
        self.n = 0
        self.total = 0.0

    def advance_to(self, target: int) -> bool:
        """Consume up to ``target`` samples; False if the stream or cap ends first."""
        if target > self.cap:
            return False
        while self.n < target:
            chunk = self.stream.take(target - self.n)
            if chunk.size == 0:
                return False
            self.total += float(np.sum(chunk))
            self.n += chunk.size
        return True

    @property
    def mean(self) -> float:
        return self.total / self.n


@dataclass
class SeqDecision:
    verdict: str
    stop_index: int
    k_stop: int
    trace: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "stop_index": self.stop_index, "k_stop": self.k_stop}


@dataclass(frozen=True)
class SeqTestConfig:
    """Parameters of one test.

    ``mode`` is ``"fix"``, ``"seq"`` or ``"diff"``. ``param_source`` is
    ``"adaptive"`` (``Tf_at`` required) or ``"uniform"`` (``gamma_0``
    required). ``M`` and ``N0`` are filled in by :func:`make_config`.
    """

    mode: str
    r: float
    delta: float
    alpha: float
    xi: float = 0.1
    param_source: str = "adaptive"
    Tf_at: object = None
    gamma_0: float | None = None
    M: float | None = None
    N0: int | None = None
    N_fix: int | None = None
    cap: int = DEFAULT_STREAM_CAP

    def schedule(self):
        return schedule(self.N0, self.xi)

    def epsilon_k(self, k: int, N_k: int) -> float:
        if self.param_source == "uniform":
            return algdiff_epsilon_k_uniform(self.alpha, k, N_k, self.gamma_0)
        return algdiff_epsilon_k(self.alpha, k, N_k, self.Tf_at)


def _check_common(r, delta, alpha, xi=None):
    if not 0.0 < r < 1.0:
        raise InputError("r must lie in (0, 1)")
    if delta < 0:
        raise InputError("delta must be nonnegative")
    if not 0.0 < alpha <= 0.4:
        raise InputError("alpha must lie in (0, 2/5]")
    if xi is not None and not 0.0 < xi < 0.4:
        raise InputError("xi must lie in (0, 2/5)")


def _source(Tf_at, gamma_0):
    if (Tf_at is None) == (gamma_0 is None):
        raise InputError("give exactly one of Tf_at (adaptive) or gamma_0 (uniform)")
    if gamma_0 is not None and not 0.0 < gamma_0 <= 1.0:
        raise InputError("gamma_0 must lie in (0, 1]")
    return "adaptive" if Tf_at is not None else "uniform"


def algfix_sample_size(delta: float, alpha: float, Tf_at=None, gamma_0: float | None = None) -> int:
    """``ceil(2 T_f(delta) log(1/alpha) / delta^2)`` or ``ceil(log(1/alpha) / (gamma_0 delta^2))``."""
    if not delta > 0:
        raise InputError("delta must be positive")
    if _source(Tf_at, gamma_0) == "adaptive":
        return math.ceil(2.0 * int(Tf_at(delta)) * math.log(1.0 / alpha) / delta**2)
    return math.ceil(math.log(1.0 / alpha) / (gamma_0 * delta**2))


def algfix_run(stream, r: float, delta: float, N: int) -> SeqDecision:
    """Average ``N`` samples and compare with ``r +/- delta``."""
    pre = _Prefix(stream, N)
    if not pre.advance_to(N):
        raise StreamExhausted(f"stream ended after {pre.n} of {N} samples")
    m = pre.mean
    verdict = H0 if m >= r + delta else H1 if m <= r - delta else INDIFFERENCE
    return SeqDecision(verdict, N, 0, [(N, m, delta)])


def algseq_margin(delta: float, alpha: float, xi: float, Tf_at=None, gamma_0: float | None = None) -> float:
    """Band constant ``M``: ``8 T_f(delta/2) L / delta`` or ``L / (gamma_0 delta)``, ``L = log(2/sqrt(alpha xi))``."""
    if not delta > 0:
        raise InputError("delta must be positive")
    L = math.log(2.0 / math.sqrt(alpha * xi))
    if _source(Tf_at, gamma_0) == "adaptive":
        return 8.0 * int(Tf_at(delta / 2)) * L / delta
    return L / (gamma_0 * delta)


def initial_decision_time(M: float, r: float) -> int:
    """``floor(M min(1/r, 1/(1-r)))``."""
    return math.floor(M * min(1.0 / r, 1.0 / (1.0 - r)))


def schedule(N0: int, xi: float):
    """Decision times ``N_1, N_2, ...`` with ``N_k = floor(N0 (1+xi)^k)``.

    Each time is bumped to at least one past its predecessor so the
    sequence is strictly increasing even when ``N0 xi < 1``.
    """
    if N0 < 1:
        raise InputError("N0 must be >= 1")
    prev = N0
    for k in itertools.count(1):
        nk = max(prev + 1, math.floor(N0 * (1.0 + xi) ** k))
        yield k, nk
        prev = nk


def algdiff_epsilon_k(alpha: float, k: int, N_k: int, Tf_at) -> float:
    """Smallest ``eps in (0, 1]`` with ``eps^2 / (8 T_f(eps/2)) >= (log(1/alpha) + 1 + 2 log k) / N_k``.

    Found by bisection; ``inf`` when even ``eps = 1`` fails.
    """
    if k < 1:
        raise InputError("k must be >= 1")
    target = (math.log(1.0 / alpha) + 1.0 + 2.0 * math.log(k)) / N_k

    def ok(eps):
        return eps**2 / (8.0 * int(Tf_at(eps / 2))) >= target

    if not ok(1.0):
        return math.inf
    lo, hi = 0.0, 1.0
    for _ in range(BISECTION_ITERS):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def algdiff_epsilon_k_uniform(alpha: float, k: int, N_k: int, gamma_0: float) -> float:
    """``sqrt((log(1/alpha) + 1 + 2 log k) / (gamma_0 N_k))``."""
    if k < 1:
        raise InputError("k must be >= 1")
    return math.sqrt((math.log(1.0 / alpha) + 1.0 + 2.0 * math.log(k)) / (gamma_0 * N_k))


def make_config(mode: str, r: float, delta: float, alpha: float, xi: float = 0.1, Tf_at=None,
                gamma_0: float | None = None, N0: int | None = None, cap: int = DEFAULT_STREAM_CAP) -> SeqTestConfig:
    """Validate inputs and derive ``M`` / ``N0`` / ``N`` for the chosen mode.

    For ``mode="diff"`` without ``N0`` the preset ``floor(100 / gamma_0)``
    is used, which needs ``gamma_0`` even for adaptive parameters; pass
    ``N0`` explicitly otherwise.
    """
    src = _source(Tf_at, gamma_0)
    _check_common(r, delta, alpha, xi if mode != "fix" else None)
    M = N_fix = None
    if mode == "fix":
        if not delta > 0:
            raise InputError("the fixed test needs delta > 0")
        N_fix = algfix_sample_size(delta, alpha, Tf_at, gamma_0)
    elif mode == "seq":
        if not delta > 0:
            raise InputError("the sequential test with indifference region needs delta > 0")
        M = algseq_margin(delta, alpha, xi, Tf_at, gamma_0)
        N0 = initial_decision_time(M, r)
    elif mode == "diff":
        if N0 is None:
            if gamma_0 is None:
                raise InputError("N0 is required for adaptive parameters")
            N0 = math.floor(100.0 / gamma_0)
    else:
        raise InputError(f"unknown mode {mode!r}")
    return SeqTestConfig(mode, r, delta, alpha, xi, src, Tf_at, gamma_0, M, N0, N_fix, cap)


def _band_run(stream, config, half_width_at) -> SeqDecision:
    pre = _Prefix(stream, config.cap)
    trace = []
    for k, nk in config.schedule():
        if not pre.advance_to(nk):
            return SeqDecision(RUNNING, pre.n, k - 1, trace)
        m = pre.mean
        w = half_width_at(k, nk)
        trace.append((nk, m, w))
        if m >= config.r + w:
            return SeqDecision(H0, nk, k, trace)
        if m <= config.r - w:
            return SeqDecision(H1, nk, k, trace)


def algseq_run(stream, config: SeqTestConfig) -> SeqDecision:
    """Stop at the first ``N_k`` (``k >= 1``) whose mean leaves ``(r - M/N_k, r + M/N_k)``."""
    if config.mode != "seq":
        raise InputError("config is not for the sequential test with indifference region")
    return _band_run(stream, config, lambda k, nk: config.M / nk)


def algdiff_run(stream, config: SeqTestConfig) -> SeqDecision:
    """Stop at the first ``N_k`` whose mean leaves ``(r - eps_k, r + eps_k)``."""
    if config.mode != "diff":
        raise InputError("config is not for the sequential test without indifference region")
    return _band_run(stream, config, config.epsilon_k)


def run(stream, config: SeqTestConfig) -> SeqDecision:
    if config.mode == "fix":
        return algfix_run(stream, config.r, config.delta, config.N_fix)
    if config.mode == "seq":
        return algseq_run(stream, config)
    return algdiff_run(stream, config)


def stopping_bound_seq(Delta: float, M: float, xi: float, Tf_at, delta: float) -> float:
    """``(1+xi) [M/D + (4/D) sqrt(2 T M / D + 8 T) + 1]`` with ``T = T_f(delta/2)``."""
    if not Delta > 0:
        raise InputError("Delta must be positive")
    T = int(Tf_at(delta / 2))
    return (1.0 + xi) * (M / Delta + 4.0 / Delta * math.sqrt(2.0 * T * M / Delta + 8.0 * T) + 1.0)


def stopping_bound_seq_uniform(Delta: float, M: float, xi: float, gamma_0: float) -> float:
    """``(1+xi) [M/D + (2/D) sqrt(M / (g0 D) + 4 / g0) + 1]``."""
    if not Delta > 0:
        raise InputError("Delta must be positive")
    return (1.0 + xi) * (M / Delta + 2.0 / Delta * math.sqrt(M / (gamma_0 * Delta) + 4.0 / gamma_0) + 1.0)


def first_small_epsilon(Delta: float, config: SeqTestConfig, k_max: int = 10**6):
    """``(k*_0, N*_0)``: first decision index with ``eps_k <= Delta / 2``."""
    for k, nk in config.schedule():
        if config.epsilon_k(k, nk) <= Delta / 2:
            return k, nk
        if k >= k_max:
            raise InputError("epsilon schedule never drops below Delta/2")


def stopping_bound_diff(Delta: float, config: SeqTestConfig) -> float:
    """``(1+xi)(N*_0 + 1) + 32 alpha T_f(Delta/4) / Delta^2`` (uniform: ``4 alpha / (g0 Delta^2)``)."""
    if not Delta > 0:
        raise InputError("Delta must be positive")
    _, n_star = first_small_epsilon(Delta, config)
    head = (1.0 + config.xi) * (n_star + 1)
    if config.param_source == "uniform":
        return head + 4.0 * config.alpha / (config.gamma_0 * Delta**2)
    return head + 32.0 * config.alpha * int(config.Tf_at(Delta / 4)) / Delta**2
