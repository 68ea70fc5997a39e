"""Truncated Hamiltonians of tailed systems, initial states, dense eigensolves."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import GraphError, NumericalError, TruncationError
from .graph import FiniteGraph, OracleSpec, TailedSystem

POWER_TOL = 1e-12
POWER_MAXITER = 200_000


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class TruncatedHamiltonian:
    """Adjacency (plus loops and oracle) of a graph with ``tail_length`` tail sites kept.

    Row ``i`` corresponds to vertex label ``i + 1``; rows ``n .. n+L-1`` are
    tail sites ``n+1 .. n+L``. The last tail row is a hard wall.
    """

    n: int
    tail_length: int
    matrix: np.ndarray
    root: int

    @property
    def size(self) -> int:
        return self.n + self.tail_length

    @property
    def labels(self) -> np.ndarray:
        return np.arange(1, self.size + 1)


@dataclass(frozen=True)
class QuantumState:
    """Amplitudes on the rows of a :class:`TruncatedHamiltonian` (graph order ``n``)."""

    amplitudes: np.ndarray
    n: int

    @property
    def size(self) -> int:
        return len(self.amplitudes)

    @property
    def tail_length(self) -> int:
        return self.size - self.n

    @property
    def labels(self) -> np.ndarray:
        return np.arange(1, self.size + 1)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def require_unit(self, tol: float = 1e-12) -> None:
        if abs(self.norm() - 1.0) > tol:
            raise ValueError(f"state norm {self.norm():.16g} is not 1 within {tol}")


def assemble(sys: TailedSystem, oracle: OracleSpec | None = None, tail_length: int = 0) -> TruncatedHamiltonian:
    """Dense matrix of ``A + gamma * P_w`` with the tail cut after ``tail_length`` sites."""
    n = sys.n
    if sys.tail_present and tail_length < 1:
        raise TruncationError("a tailed system needs tail_length >= 1")
    if not sys.tail_present and tail_length != 0:
        raise ValueError("tail_length must be 0 when no tail is attached")
    size = n + tail_length
    H = np.zeros((size, size))
    H[:n, :n] = sys.graph.adjacency()
    if oracle is not None:
        oracle.check(n)
        H[oracle.w - 1, oracle.w - 1] += oracle.gamma
    if tail_length:
        H[sys.root - 1, n] = H[n, sys.root - 1] = 1.0
        k = np.arange(n, size - 1)
        H[k, k + 1] = H[k + 1, k] = 1.0
    return TruncatedHamiltonian(n, tail_length, _frozen(H), sys.root)


def basis_state(u: int, size: int, n: int) -> QuantumState:
    if not 1 <= u <= size:
        raise GraphError(f"site {u} outside 1..{size}")
    amp = np.zeros(size, dtype=complex)
    amp[u - 1] = 1.0
    return QuantumState(amp, n)


def perron_vector(A: np.ndarray, tol: float = POWER_TOL, maxiter: int = POWER_MAXITER) -> np.ndarray:
    """Top eigenvector of a connected non-negative symmetric matrix by power iteration.

    Iterates on ``A + s I`` with ``s`` the largest absolute row sum so the
    Perron root strictly dominates (bipartite graphs otherwise oscillate).
    Starts from all-ones; stops once ``||A v - (v.A v) v|| <= tol``.
    """
    shift = np.abs(A).sum(axis=1).max()
    B = A + shift * np.eye(len(A))
    v = np.ones(len(A)) / np.sqrt(len(A))
    for _ in range(maxiter):
        w = B @ v
        v = w / np.linalg.norm(w)
        Av = A @ v
        if np.linalg.norm(Av - (v @ Av) * v) <= tol:
            return v
    raise NumericalError(f"power iteration did not reach residual {tol} in {maxiter} steps")


def principal_state(g: FiniteGraph, size: int | None = None) -> QuantumState:
    """Principal eigenvector of ``g`` (loops ignored), zero-padded to ``size``."""
    size = g.n if size is None else size
    if size < g.n:
        raise ValueError(f"size {size} smaller than graph order {g.n}")
    if g.regular_degree() is not None:
        head = np.full(g.n, 1.0 / np.sqrt(g.n))
    else:
        A = np.zeros((g.n, g.n))
        for u, v in g.edges:
            A[u - 1, v - 1] = A[v - 1, u - 1] = 1.0
        head = perron_vector(A)
    amp = np.zeros(size, dtype=complex)
    amp[: g.n] = head
    return QuantumState(amp, g.n)


def spectral_decompose(H: TruncatedHamiltonian | np.ndarray, check: bool = True):
    """Ascending eigenvalues and orthonormal eigenvectors (columns) of ``H``."""
    M = H.matrix if isinstance(H, TruncatedHamiltonian) else np.asarray(H)
    try:
        lam, V = scipy.linalg.eigh(M)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"dense eigensolve failed: {exc}") from exc
    if check:
        scale = max(1.0, float(np.abs(M).sum(axis=1).max()))
        resid = np.linalg.norm(M @ V - V * lam, axis=0).max()
        ortho = np.abs(V.T @ V - np.eye(len(lam))).max()
        if resid > 1e-10 * scale or ortho > 1e-10:
            raise NumericalError(f"eigensolve inaccurate: residual {resid:.3g}, orthogonality {ortho:.3g}")
    return lam, V
