"""Seeded path simulation and Monte Carlo checks of the bounds.

Randomness is counter-based: replicates are processed in fixed blocks and
block ``b`` draws from a Philox generator keyed by ``(seed, b)``, so
results depend only on the plan, never on scheduling. Single streamed
paths use the key ``(seed, STREAM_TAG + rep)``.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

import numpy as np

from .chain import TransitionMatrix
from .errors import InputError

REP_BLOCK = 4096
STEP_CHUNK = 1024
STREAM_TAG = 1 << 62
# above this many states the per-row comparison is replaced by a flat search
_DENSE_LOOKUP_MAX_D = 64


@dataclass(frozen=True)
class SimPlan:
    """What to simulate.

    ``pi0`` is ``"stationary"``, an integer state (point mass) or a
    probability vector. Paths are ``X_1..X_N`` with ``X_0 ~ pi0``.
    """

    chain: TransitionMatrix
    f: np.ndarray
    pi0: object
    N: int
    reps: int
    seed: int

    def __post_init__(self):
        if self.reps < 1 or self.N < 1:
            raise InputError("reps and N must be >= 1")


@dataclass(frozen=True)
class MCEstimate:
    estimate: float
    std_error: float
    reps: int

    def to_json(self) -> dict:
        return {"estimate": self.estimate, "std_error": self.std_error, "reps": self.reps}


def frequency(hits) -> MCEstimate:
    hits = np.asarray(hits, dtype=bool)
    p = float(hits.mean())
    return MCEstimate(p, math.sqrt(p * (1.0 - p) / hits.size), int(hits.size))


def sample_mean(values) -> MCEstimate:
    v = np.asarray(values, dtype=float)
    se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else math.nan
    return MCEstimate(float(v.mean()), se, int(v.size))


def _rng(seed: int, counter: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[seed & (2**64 - 1), counter & (2**64 - 1)]))


def initial_law(chain: TransitionMatrix, pi0) -> np.ndarray:
    if isinstance(pi0, str):
        if pi0 != "stationary":
            raise InputError(f"unknown start {pi0!r}")
        return chain.pi
    if np.isscalar(pi0):
        i = int(pi0)
        if not 0 <= i < chain.d:
            raise InputError("start state out of range")
        law = np.zeros(chain.d)
        law[i] = 1.0
        return law
    law = np.asarray(pi0, dtype=float)
    if law.shape != (chain.d,) or law.min() < 0 or abs(law.sum() - 1) > 1e-10:
        raise InputError("pi0 must be a probability vector of length d")
    return law


class _Sampler:
    """Inverse-CDF transitions, vectorized over a batch of current states."""

    def __init__(self, chain: TransitionMatrix):
        cum = np.cumsum(chain.P, axis=1)
        cum[:, -1] = 1.0
        self.d = chain.d
        self.cum = cum
        self.rows = None
        if self.d > _DENSE_LOOKUP_MAX_D:
            self.flat = (cum + np.arange(self.d)[:, None]).ravel()

    def walk(self, state: int, u: np.ndarray, out: np.ndarray) -> np.ndarray:
        """Scalar loop for a single path; same index as :meth:`step` for equal ``u``."""
        if self.rows is None:
            self.rows = [list(r) for r in self.cum]
        rows = self.rows
        for t, ut in enumerate(u.tolist()):
            state = bisect.bisect_right(rows[state], ut)
            out[t] = state
        return np.array([state])

    def step(self, states: np.ndarray, u: np.ndarray) -> np.ndarray:
        if self.d <= _DENSE_LOOKUP_MAX_D:
            return (self.cum[states] <= u[:, None]).sum(axis=1)
        idx = np.searchsorted(self.flat, states + u, side="right") - states * self.d
        return np.minimum(idx, self.d - 1)


def _draw_initial(law, u):
    cum = np.cumsum(law)
    cum[-1] = 1.0
    return np.searchsorted(cum, u, side="right")


def iter_state_chunks(plan: SimPlan, block: int, chunk: int = STEP_CHUNK):
    """Yield ``(start, states)`` chunks, ``states`` shaped ``(reps_in_block, len)``.

    ``start`` is the 1-based index of the first column.
    """
    reps_here = min(REP_BLOCK, plan.reps - block * REP_BLOCK)
    rng = _rng(plan.seed, block)
    sampler = _Sampler(plan.chain)
    x = _draw_initial(initial_law(plan.chain, plan.pi0), rng.random(reps_here))
    n = 0
    while n < plan.N:
        m = min(chunk, plan.N - n)
        u = rng.random((m, reps_here))
        out = np.empty((reps_here, m), dtype=np.int64)
        if reps_here == 1:
            x = sampler.walk(int(x[0]), u[:, 0], out[0])
        else:
            for t in range(m):
                x = sampler.step(x, u[t])
                out[:, t] = x
        yield n + 1, out
        n += m


def _blocks(plan):
    return range(math.ceil(plan.reps / REP_BLOCK))


def sample_paths(plan: SimPlan) -> np.ndarray:
    """All paths as an integer array of shape ``(reps, N)``."""
    rows = []
    for b in _blocks(plan):
        rows.append(np.concatenate([s for _, s in iter_state_chunks(plan, b)], axis=1))
    return np.concatenate(rows, axis=0)


def sample_path(chain: TransitionMatrix, pi0, N: int, seed: int) -> np.ndarray:
    """One path ``X_1..X_N`` (state indices)."""
    return sample_paths(SimPlan(chain, np.zeros(chain.d), pi0, N, 1, seed))[0]


def path_sums(plan: SimPlan, burnin: int = 0) -> np.ndarray:
    """Per-replicate ``sum_{n > burnin} f(X_n)``."""
    if not 0 <= burnin < plan.N:
        raise InputError("burn-in must satisfy 0 <= burnin < N")
    f = np.asarray(plan.f, dtype=float)
    out = []
    for b in _blocks(plan):
        acc = None
        for start, states in iter_state_chunks(plan, b):
            lo = max(0, burnin - start + 1)
            part = f[states[:, lo:]].sum(axis=1)
            acc = part if acc is None else acc + part
        out.append(acc)
    return np.concatenate(out)


def path_means(plan: SimPlan, burnin: int = 0) -> np.ndarray:
    return path_sums(plan, burnin) / (plan.N - burnin)


def empirical_tail(plan: SimPlan, epsilon: float, burnin: int = 0, mu: float | None = None) -> MCEstimate:
    """Frequency of ``mean_{n > burnin} f(X_n) >= mu + epsilon``."""
    mu = float(plan.chain.pi @ plan.f) if mu is None else mu
    return frequency(path_means(plan, burnin) >= mu + epsilon)


def empirical_two_sided(plan: SimPlan, epsilon: float, burnin: int = 0, mu: float | None = None) -> MCEstimate:
    """Frequency of ``|mean - mu| >= epsilon``."""
    mu = float(plan.chain.pi @ plan.f) if mu is None else mu
    return frequency(np.abs(path_means(plan, burnin) - mu) >= epsilon)


def batch_means_variance(plan: SimPlan, batch: int = 1000) -> MCEstimate:
    """Batch-means estimate of the asymptotic variance, pooled over replicates.

    Each path is cut into ``N // batch`` batches; the estimate is
    ``batch * Var(batch means)`` with the stationary mean known exactly.
    """
    if plan.N < batch:
        raise InputError("N must be at least one batch")
    f = np.asarray(plan.f, dtype=float)
    mu = float(plan.chain.pi @ f)
    nb = plan.N // batch
    per_rep = []
    for b in _blocks(plan):
        sums = []
        for _, states in iter_state_chunks(plan, b, chunk=batch):
            if states.shape[1] == batch:
                sums.append(f[states].sum(axis=1))
        bm = np.stack(sums[:nb], axis=1) / batch
        per_rep.append(batch * ((bm - mu) ** 2).mean(axis=1))
    return sample_mean(np.concatenate(per_rep))


def empirical_coverage(plan: SimPlan, interval, alpha: float | None = None) -> MCEstimate:
    """Coverage frequency of ``interval(samples) -> ConfidenceInterval`` for ``mu``.

    ``alpha`` is only recorded by callers; the interval carries its own level.
    """
    mu = float(plan.chain.pi @ plan.f)
    f = np.asarray(plan.f, dtype=float)
    hits = []
    for b in _blocks(plan):
        states = np.concatenate([s for _, s in iter_state_chunks(plan, b)], axis=1)
        for row in states:
            hits.append(interval(f[row]).covers(mu))
    return frequency(hits)


class ChainStream:
    """Pull-based stream of ``f(X_1), f(X_2), ...`` for one replicate."""

    def __init__(self, chain: TransitionMatrix, f, pi0, seed: int, rep: int = 0, chunk: int = STEP_CHUNK):
        self.f = np.asarray(f, dtype=float)
        self.rows = [list(r) for r in np.cumsum(chain.P, axis=1)]
        for r in self.rows:
            r[-1] = 1.0
        self.rng = _rng(seed, STREAM_TAG + rep)
        law = initial_law(chain, pi0)
        self.state = int(_draw_initial(law, self.rng.random(1))[0])
        self.chunk = chunk
        self.buf = np.empty(0)
        self.count = 0

    def _refill(self):
        u = self.rng.random(self.chunk)
        out = np.empty(self.chunk, dtype=np.int64)
        s, rows = self.state, self.rows
        for t in range(self.chunk):
            s = bisect.bisect_right(rows[s], u[t])
            out[t] = s
        self.state = s
        self.buf = np.concatenate([self.buf, self.f[out]])

    def take(self, n: int) -> np.ndarray:
        while self.buf.size < n:
            self._refill()
        out, self.buf = self.buf[:n], self.buf[n:]
        self.count += n
        return out


def empirical_seqtest(chain: TransitionMatrix, f, pi0, config, reps: int, seed: int, truth: str | None = None):
    """Run a sequential test ``reps`` times on independent streams.

    Returns a dict with the error frequency (verdicts contradicting
    ``truth``, which defaults to the hypothesis implied by the true mean),
    the mean stopping index, and the number of runs that hit the cap.
    """
    from .seqtest import H0, H1, RUNNING, run

    mu = float(chain.pi @ np.asarray(f, dtype=float))
    if truth is None:
        truth = H0 if mu >= config.r + config.delta else H1 if mu <= config.r - config.delta else None
    wrong = {H0: H1, H1: H0}.get(truth)
    decisions = [run(ChainStream(chain, f, pi0, seed, rep), config) for rep in range(reps)]
    errors = [d.verdict == wrong for d in decisions]
    stops = [d.stop_index for d in decisions]
    return {
        "error": frequency(errors),
        "stopping_time": sample_mean(stops),
        "capped": sum(d.verdict == RUNNING for d in decisions),
        "decisions": decisions,
    }
