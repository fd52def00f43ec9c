"""Function-specific spectrum and spectral upper bounds on the f-discrepancy.

Eigen-indices are 1-based throughout this module: index 1 is the unit
eigenvalue and index ``k`` refers to ``decomp.eigenvalues[k - 1]``.

Every bound takes the initial discrepancies ``dtv0`` / ``df0`` as inputs
and defaults them to 1, their worst case over starting distributions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import SpectralDecomposition
from .discrepancy import CROSSING_SLACK, FunctionOnChain, default_n_max
from .errors import InputError, NotAttained

EIGEN_GROUP_TOL = 1e-9


@dataclass(frozen=True)
class FSpectrum:
    J_f: tuple
    lambda_f: float
    projections: np.ndarray
    tau_orth: float

    @property
    def gamma_f(self) -> float:
        return 1.0 - self.lambda_f


@dataclass(frozen=True)
class JSplit:
    J: tuple
    complement: tuple
    Delta_J_star: float
    lambda_J: float
    lambda_minus_J: float


def eigen_groups(eigenvalues, tol: float = EIGEN_GROUP_TOL) -> list:
    """Group 0-based positions of (descending) eigenvalues equal within ``tol``."""
    groups = [[0]]
    for k in range(1, len(eigenvalues)):
        if abs(eigenvalues[k] - eigenvalues[groups[-1][-1]]) <= tol:
            groups[-1].append(k)
        else:
            groups.append([k])
    return groups


def _fvals(f):
    return f.values if isinstance(f, FunctionOnChain) else np.asarray(f, dtype=float)


def f_spectrum(decomp: SpectralDecomposition, f, tau_orth: float | None = None) -> FSpectrum:
    """Indices whose eigenspace carries a non-negligible projection of ``f``.

    Membership is decided per eigenspace: the norm of the coefficients
    ``q_j^T f`` over a group of equal eigenvalues is compared to
    ``tau_orth`` (default ``1e-12 * ||f||_inf``), so the answer does not
    depend on how a repeated eigenspace happens to be rotated.
    """
    fv = _fvals(f)
    if tau_orth is None:
        tau_orth = 1e-12 * max(float(np.abs(fv).max()), 1e-300)
    if tau_orth <= 0:
        raise InputError("tau_orth must be positive")
    coef = decomp.projections(fv)
    lam = decomp.eigenvalues
    members = []
    for group in eigen_groups(lam):
        if abs(lam[group[0]] - 1.0) <= EIGEN_GROUP_TOL:
            continue
        if math.sqrt(float(np.sum(coef[group] ** 2))) > tau_orth:
            members.extend(k + 1 for k in group)
    J_f = tuple(sorted(members))
    lambda_f = float(max((abs(lam[j - 1]) for j in J_f), default=0.0))
    return FSpectrum(J_f=J_f, lambda_f=lambda_f, projections=np.abs(coef), tau_orth=tau_orth)


def j_split(decomp: SpectralDecomposition, fspec: FSpectrum, J) -> JSplit:
    """Summaries of the "bad" index set ``J`` (intersected with ``J_f``)."""
    J = tuple(sorted(set(int(j) for j in J) & set(fspec.J_f)))
    rest = tuple(j for j in fspec.J_f if j not in set(J))
    lam = np.abs(decomp.eigenvalues)
    if J:
        idx = np.array(J) - 1
        delta_star = 2 * len(J) * float(decomp.h_sup[idx].max()) * float(fspec.projections[idx].max())
        lambda_J = float(lam[idx].max())
    else:
        delta_star, lambda_J = 0.0, 0.0
    lambda_minus = float(lam[np.array(rest) - 1].max()) if rest else 0.0
    return JSplit(J=J, complement=rest, Delta_J_star=delta_star, lambda_J=lambda_J, lambda_minus_J=lambda_minus)


def _pow(base, n):
    # 0**0 == 1 in numpy; keeps the n = 0 limit of every geometric term
    return np.power(float(base), np.asarray(n, dtype=float))


def uniform_tv_bound(decomp: SpectralDecomposition, n, dtv0: float = 1.0):
    """``lambda_*^n * dtv0 / sqrt(pi_min)``."""
    return _pow(decomp.lambda_star, n) * dtv0 / math.sqrt(decomp.pi_min)


def _gap_constant(decomp, f):
    fv = _fvals(f)
    return math.sqrt(float(decomp.pi @ fv**2) / decomp.pi_min)


def f_gap_bound(decomp: SpectralDecomposition, fspec: FSpectrum, f, n, df0: float = 1.0):
    """``sqrt(E_pi[f^2] / pi_min) * lambda_f^n * df0``."""
    if not fspec.J_f:
        return np.zeros_like(np.asarray(n, dtype=float))
    return _gap_constant(decomp, f) * _pow(fspec.lambda_f, n) * df0


def sharper_bound(decomp, fspec: FSpectrum, jsplit: JSplit, f, n, dtv0: float = 1.0, df0: float = 1.0):
    """Split bound: ``Delta*_J lambda_J^n dtv0 + C lambda_{-J}^n df0``.

    An empty ``J_f \\ J`` contributes nothing (empty sum), and likewise for
    an empty ``J``.
    """
    n = np.asarray(n, dtype=float)
    out = np.zeros_like(n)
    if jsplit.J:
        out = out + jsplit.Delta_J_star * _pow(jsplit.lambda_J, n) * dtv0
    if jsplit.complement:
        out = out + _gap_constant(decomp, f) * _pow(jsplit.lambda_minus_J, n) * df0
    return out


def _hJ_matrix(decomp, f, J, ns):
    fv = _fvals(f)
    idx = np.asarray(J, dtype=int) - 1
    if idx.size == 0:
        return np.zeros((len(ns), decomp.d))
    coef = decomp.q[idx] @ fv
    lam = decomp.eigenvalues[idx]
    weights = coef[None, :] * np.power(lam[None, :], np.asarray(ns, dtype=float)[:, None])
    return weights @ decomp.h[idx]


def h_J(decomp: SpectralDecomposition, f, J, n) -> np.ndarray:
    """``h_J(n) = sum_{j in J} (q_j^T f) lambda_j^n h_j``.

    Scalar ``n`` gives a length-``d`` vector; an array of steps gives
    shape ``(len(n), d)``.
    """
    ns = np.atleast_1d(n)
    H = _hJ_matrix(decomp, f, J, ns)
    return H[0] if np.ndim(n) == 0 else H


def oracle_bound(decomp, fspec: FSpectrum, jsplit: JSplit, f, n, pi0=None, dtv0: float = 1.0, df0=None,
                 form: str = "sup"):
    """Oracle bound using the exact contribution of the ``J`` eigenspaces.

    With ``pi0`` given: ``|(pi0 - pi)^T h_J(n)| + C lambda_{-J}^n d_f(pi0, pi)``.
    The remainder term is only guaranteed with ``df0 = 1``; the
    ``d_f(pi0, pi)`` default can undershoot when ``pi0`` happens to have
    the right mean of ``f``.

    Without ``pi0`` the bound covers every start, with ``df0``
    defaulting to 1:

    - ``form="sup"``: ``2 dtv0 ||h_J(n)||_inf + C lambda_{-J}^n df0``.
    - ``form="pointmass"``: ``max_i |h_J(n)_i| + C lambda_{-J}^n df0``,
      the maximum over point-mass starts. It is never larger than the
      ``"sup"`` form because ``pi^T h_J(n) = 0``.
    """
    if form not in ("sup", "pointmass"):
        raise InputError(f"unknown worst-case form {form!r}")
    scalar = np.ndim(n) == 0
    ns = np.atleast_1d(np.asarray(n, dtype=float))
    out = np.zeros(ns.shape)
    fv = _fvals(f)
    # evaluate in blocks to bound memory at d x block
    block = max(1, 2_000_000 // max(decomp.d, 1))
    if pi0 is not None:
        pi0 = np.asarray(pi0, dtype=float)
        diff = pi0 - decomp.pi
        if df0 is None:
            df0 = abs(float(diff @ fv))
    elif df0 is None:
        df0 = 1.0
    if jsplit.J:
        for s in range(0, ns.size, block):
            H = _hJ_matrix(decomp, fv, jsplit.J, ns[s : s + block])
            if pi0 is not None:
                out[s : s + block] = np.abs(H @ diff)
            elif form == "sup":
                out[s : s + block] = 2.0 * dtv0 * np.abs(H).max(axis=1)
            else:
                out[s : s + block] = np.abs(H).max(axis=1)
    if jsplit.complement:
        out = out + _gap_constant(decomp, fv) * _pow(jsplit.lambda_minus_J, ns) * df0
    return float(out[0]) if scalar else out


def invert_geometric(c: float, lam: float, delta: float) -> int:
    """Smallest ``n >= 1`` with ``c * lam^n <= delta``."""
    if delta <= 0:
        raise InputError("delta must be positive")
    if c <= delta or lam <= 0.0:
        return 1
    if lam >= 1.0:
        return NotAttained(default_n_max())
    n = math.ceil(math.log(c / delta) / math.log(1.0 / lam))
    # guard the ceil against rounding on exact powers
    while n > 1 and c * lam ** (n - 1) <= delta:
        n -= 1
    while c * lam**n > delta:
        n += 1
    return max(n, 1)


def invert_bound_curve(bound, delta: float, n_max: int | None = None, block: int = 4096):
    """First ``n in 1..n_max`` with ``bound(n) <= delta``.

    ``bound`` maps an integer array of steps to bound values.
    """
    if delta <= 0:
        raise InputError("delta must be positive")
    n_max = default_n_max() if n_max is None else n_max
    start = 1
    while start <= n_max:
        ns = np.arange(start, min(start + block, n_max + 1))
        vals = np.asarray(bound(ns), dtype=float)
        hits = np.flatnonzero(vals <= delta + CROSSING_SLACK)
        if hits.size:
            return int(ns[hits[0]])
        start = int(ns[-1]) + 1
        block = min(block * 2, 1 << 18)
    return NotAttained(n_max)


def tv_mixing_lower_bound(gamma_star: float, delta: float) -> float:
    """``(1/gamma_* - 1) log(1/(2 delta))``."""
    if not 0.0 < gamma_star <= 1.0:
        raise InputError("gamma_star must lie in (0, 1]")
    if not 0.0 < delta < 0.5:
        raise InputError("delta must lie in (0, 1/2)")
    return (1.0 / gamma_star - 1.0) * math.log(1.0 / (2.0 * delta))


def parse_index_set(text: str) -> tuple:
    """Parse ``"2..140"`` (inclusive) or ``"2,5,9"`` into a tuple of ints."""
    text = text.strip()
    if not text:
        return ()
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return tuple(out)


BOUND_KINDS = ("uniform", "fgap", "sharper", "oracle")


def mixing_time_bound(decomp: SpectralDecomposition, f, delta: float, kind: str = "fgap", J=(),
                      n_max: int | None = None, form: str = "sup"):
    """Upper bound on ``T_f(delta)`` obtained by inverting one of the bounds.

    ``kind`` is ``"uniform"`` (total-variation bound), ``"fgap"``,
    ``"sharper"`` or ``"oracle"`` (worst-case form ``form``); the last two
    use the index set ``J``. Returns an int or :class:`NotAttained`.
    """
    fv = _fvals(f)
    if kind == "uniform":
        return invert_geometric(1.0 / math.sqrt(decomp.pi_min), decomp.lambda_star, delta)
    fspec = f_spectrum(decomp, fv)
    if not fspec.J_f:
        return 1
    if kind == "fgap":
        return invert_geometric(_gap_constant(decomp, fv), fspec.lambda_f, delta)
    js = j_split(decomp, fspec, J)
    if kind == "sharper":
        return invert_bound_curve(lambda n: sharper_bound(decomp, fspec, js, fv, n), delta, n_max)
    if kind == "oracle":
        return invert_bound_curve(lambda n: oracle_bound(decomp, fspec, js, fv, n, form=form), delta, n_max)
    raise InputError(f"unknown bound kind {kind!r}")


class BoundMixingTimes:
    """Callable ``delta -> int`` upper bound on ``T_f``, memoized per ``delta``.

    Raises :class:`~fnmix.errors.NotAttainedError` when the bound does not
    reach ``delta`` within ``n_max``.
    """

    def __init__(self, decomp, f, kind="fgap", J=(), n_max=None, form="sup"):
        self.args = (decomp, _fvals(f))
        self.kw = {"kind": kind, "J": tuple(J), "n_max": n_max, "form": form}
        self._memo = {}

    def __call__(self, delta: float) -> int:
        if delta not in self._memo:
            t = mixing_time_bound(*self.args, delta, **self.kw)
            if isinstance(t, NotAttained):
                t.unwrap()
            self._memo[delta] = int(t)
        return self._memo[delta]
