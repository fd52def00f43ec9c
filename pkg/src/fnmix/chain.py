"""Finite reversible Markov chains: validation and spectral decomposition."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg

from .errors import (
    EigensolverFailure,
    InputError,
    NoConvergence,
    NonPositivePi,
    NotReversible,
    NotStochastic,
    Periodic,
    Reducible,
)

ROW_SUM_TOL = 1e-12
REVERSIBILITY_RTOL = 1e-10
STATIONARITY_TOL = 1e-10
UNIT_EIGENVALUE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """A validated row-stochastic reversible chain and its stationary law.

    Build instances with :func:`validate_chain`; the constructor itself
    performs no checks.
    """

    P: np.ndarray
    pi: np.ndarray

    @property
    def d(self) -> int:
        return self.P.shape[0]

    @property
    def pi_min(self) -> float:
        return float(self.pi.min())

    def to_json(self) -> dict:
        return {"d": self.d, "P": self.P.ravel().tolist(), "pi": self.pi.tolist()}


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigensystem of a reversible chain.

    ``eigenvalues[k]`` is the eigenvalue with 1-based index ``k + 1``, so
    index 1 is the unit eigenvalue. Row ``k`` of ``h`` (``q``) is the right
    (left) eigenvector for that eigenvalue, scaled so that
    ``q[k] @ h[k] == 1`` and ``sum(pi * h[k]**2) == 1``.
    """

    chain: TransitionMatrix
    eigenvalues: np.ndarray
    h: np.ndarray
    q: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def d(self) -> int:
        return self.chain.d

    @property
    def pi(self) -> np.ndarray:
        return self.chain.pi

    @property
    def pi_min(self) -> float:
        return self.chain.pi_min

    @property
    def lambda_star(self) -> float:
        return float(max(self.eigenvalues[1], abs(self.eigenvalues[-1])))

    @property
    def lambda_0(self) -> float:
        return float(max(self.eigenvalues[1], 0.0))

    @property
    def gamma_star(self) -> float:
        return 1.0 - self.lambda_star

    @property
    def gamma_0(self) -> float:
        return 1.0 - self.lambda_0

    @property
    def h_sup(self) -> np.ndarray:
        """``||h_j||_inf`` for every eigen-index."""
        if "h_sup" not in self._cache:
            self._cache["h_sup"] = np.abs(self.h).max(axis=1)
        return self._cache["h_sup"]

    def projections(self, f) -> np.ndarray:
        """Signed coefficients ``q_j^T f`` for every eigen-index."""
        return self.q @ np.asarray(f, dtype=float)

    def reconstruct(self) -> np.ndarray:
        """``1 pi^T + sum_{j>=2} lambda_j h_j q_j^T``."""
        lam = self.eigenvalues[1:]
        return np.outer(np.ones(self.d), self.pi) + (self.h[1:].T * lam) @ self.q[1:]

    def reconstruction_error(self) -> float:
        return float(np.abs(self.chain.P - self.reconstruct()).max())

    def biorthogonality_error(self) -> float:
        G = self.q @ self.h.T
        return float(np.abs(G - np.eye(self.d)).max())


def _check_matrix(P) -> np.ndarray:
    P = np.array(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise InputError(f"transition matrix must be square, got shape {P.shape}")
    if P.shape[0] < 2:
        raise InputError("chain needs at least 2 states")
    if not np.all(np.isfinite(P)):
        raise InputError("transition matrix has non-finite entries")
    if P.min() < 0.0 or P.max() > 1.0:
        raise NotStochastic("entries must lie in [0, 1]")
    row_err = np.abs(P.sum(axis=1) - 1.0).max()
    if row_err > ROW_SUM_TOL:
        raise NotStochastic(f"row sums deviate from 1 by {row_err:.3e}")
    if np.any(np.diag(P) == 1.0):
        raise Reducible("absorbing state present")
    return P


def _symmetrized(P, pi) -> np.ndarray:
    s = np.sqrt(pi)
    A = (s[:, None] * P) / s[None, :]
    return 0.5 * (A + A.T)


def stationary_distribution(P) -> np.ndarray:
    """Stationary distribution of an irreducible row-stochastic matrix.

    A direct linear solve seeds ``pi``; it is then refined as the squared
    top eigenvector of the symmetrized matrix, which is exact for
    reversible chains.

    Raises
    ------
    NoConvergence
        If the result fails ``||pi P - pi||_inf <= 1e-10``.
    """
    P = np.asarray(P, dtype=float)
    d = P.shape[0]
    M = P.T - np.eye(d)
    M[-1, :] = 1.0
    rhs = np.zeros(d)
    rhs[-1] = 1.0
    try:
        pi = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"stationary solve failed: {exc}") from exc
    pi = np.clip(pi, 0.0, None)
    if pi.sum() <= 0.0:
        raise NoConvergence("stationary solve returned a non-positive vector")
    pi /= pi.sum()
    if np.all(pi > 0.0):
        try:
            _, vec = scipy.linalg.eigh(_symmetrized(P, pi), subset_by_index=[d - 1, d - 1])
            refined = vec[:, 0] ** 2
            refined /= refined.sum()
            if np.abs(refined @ P - refined).max() <= np.abs(pi @ P - pi).max():
                pi = refined
        except (np.linalg.LinAlgError, ValueError):
            pass
    if np.abs(pi @ P - pi).max() > STATIONARITY_TOL:
        raise NoConvergence("stationary distribution did not satisfy pi P = pi")
    return pi


def validate_chain(P, pi=None) -> TransitionMatrix:
    """Check the standing assumptions and return a :class:`TransitionMatrix`.

    Parameters
    ----------
    P : (d, d) array_like
        Row-stochastic transition matrix.
    pi : (d,) array_like, optional
        Stationary distribution if known in closed form; computed otherwise.

    Raises
    ------
    NotStochastic, NotReversible, Reducible, Periodic, NonPositivePi
    """
    P = _check_matrix(P)
    d = P.shape[0]
    if pi is None:
        try:
            pi = stationary_distribution(P)
        except NoConvergence as exc:
            raise Reducible(f"no unique stationary distribution: {exc}") from exc
    else:
        pi = np.array(pi, dtype=float)
        if pi.shape != (d,) or not np.all(np.isfinite(pi)):
            raise InputError("pi must be a finite vector of length d")
        if abs(pi.sum() - 1.0) > 1e-10:
            raise InputError(f"pi sums to {pi.sum():.12g}, not 1")
    if np.any(pi <= 0.0):
        raise NonPositivePi("stationary distribution must be strictly positive")

    flow = pi[:, None] * P
    imbalance = np.abs(flow - flow.T).max()
    if imbalance > REVERSIBILITY_RTOL * flow.max():
        raise NotReversible(f"detailed balance violated by {imbalance:.3e}")
    if np.abs(pi @ P - pi).max() > STATIONARITY_TOL:
        raise NotReversible("pi is not stationary for P")

    lam = scipy.linalg.eigvalsh(_symmetrized(P, pi))
    if lam[-2] > 1.0 - UNIT_EIGENVALUE_TOL:
        raise Reducible("unit eigenvalue has multiplicity > 1")
    if lam[0] < -1.0 + UNIT_EIGENVALUE_TOL:
        raise Periodic("eigenvalue -1 present")
    return TransitionMatrix(P=P, pi=pi)


def spectral_decompose(chain: TransitionMatrix) -> SpectralDecomposition:
    """Eigendecompose ``A = D P D^{-1}`` with ``D = diag(sqrt(pi))``.

    Right eigenvectors are ``h_j = D^{-1} u_j`` and left eigenvectors
    ``q_j = D u_j`` where ``u_j`` are orthonormal eigenvectors of ``A``.
    The unit eigenpair is pinned to ``(1, pi)`` exactly.
    """
    pi = chain.pi
    s = np.sqrt(pi)
    try:
        w, U = scipy.linalg.eigh(_symmetrized(chain.P, pi))
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigensolverFailure(str(exc)) from exc
    order = np.argsort(-w, kind="stable")
    w = w[order]
    U = U[:, order]
    w[0] = 1.0
    U[:, 0] = s
    # keep the remaining vectors orthogonal to sqrt(pi) after pinning
    U[:, 1:] -= np.outer(s, s @ U[:, 1:])
    U[:, 1:] /= np.linalg.norm(U[:, 1:], axis=0)
    h = (U / s[:, None]).T
    q = (U * s[:, None]).T
    return SpectralDecomposition(chain=chain, eigenvalues=w, h=h, q=q)


def load_chain(path) -> TransitionMatrix:
    """Read the chain JSON format ``{"d", "P" (row-major), "pi"?}``."""
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read chain file {path}: {exc}") from exc
    try:
        d = int(obj["d"])
        P = np.asarray(obj["P"], dtype=float).reshape(d, d)
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"malformed chain file {path}: {exc}") from exc
    return validate_chain(P, obj.get("pi"))


def save_chain(chain: TransitionMatrix, path) -> None:
    Path(path).write_text(json.dumps(chain.to_json()))
