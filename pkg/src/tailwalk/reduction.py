"""Split a tailed graph Hamiltonian into a finite block and an eventually-free Jacobi matrix.

The Krylov space of the finite block generated by the root vertex, plus
the tail sites, is invariant under the full operator; on it the operator
is tridiagonal and equals the free Jacobi matrix past the root. Its
orthogonal complement inside the graph never touches the tail and is
diagonalized directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import JacobiError, NumericalError
from .graph import OracleSpec, TailedSystem
from .hamiltonian import QuantumState

BREAKDOWN_TOL = 1e-10
ORTHO_TOL = 1e-12


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class EventuallyFreeJacobi:
    """Semi-infinite Jacobi matrix, free (``b = 0``, ``a = 1``) past row ``K``.

    ``b`` holds ``b_1..b_K`` and ``a`` holds ``a_1..a_{K-1}``; ``a_K = 1``
    couples the last stored row to the free part.
    """

    b: np.ndarray
    a: np.ndarray

    def __post_init__(self):
        b, a = _frozen(self.b), _frozen(self.a)
        if b.ndim != 1 or len(b) < 1:
            raise JacobiError("need at least one diagonal entry")
        if len(a) != len(b) - 1:
            raise JacobiError(f"expected {len(b) - 1} off-diagonals, got {len(a)}")
        if not (np.all(np.isfinite(b)) and np.all(np.isfinite(a))):
            raise JacobiError("entries must be finite")
        if np.any(a <= 0):
            raise JacobiError("off-diagonal entries must be positive")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "a", a)

    @classmethod
    def free(cls) -> "EventuallyFreeJacobi":
        return cls([0.0], [])

    @property
    def K(self) -> int:
        return len(self.b)

    def diag(self, k: int) -> float:
        return float(self.b[k - 1]) if k <= self.K else 0.0

    def offdiag(self, k: int) -> float:
        """``a_k``, the entry coupling rows ``k`` and ``k+1`` (1-based)."""
        return float(self.a[k - 1]) if k < self.K else 1.0

    def matrix(self, size: int) -> np.ndarray:
        """Leading ``size x size`` block (hard wall at the cut)."""
        d, e = self.bands(size)
        return np.diag(d) + np.diag(e, 1) + np.diag(e, -1)

    def bands(self, size: int) -> tuple[np.ndarray, np.ndarray]:
        if size < self.K:
            raise ValueError(f"size {size} below horizon {self.K}")
        d = np.zeros(size)
        d[: self.K] = self.b
        e = np.ones(size - 1)
        e[: self.K - 1] = self.a
        return d, e

    def to_dict(self) -> dict:
        return {"K": self.K, "b": self.b.tolist(), "a": self.a.tolist()}


def lanczos(H: np.ndarray, start: np.ndarray, tol: float = BREAKDOWN_TOL):
    """Lanczos with full (two-pass) reorthogonalization until the Krylov space closes.

    Returns ``(V, alpha, beta)`` with the Lanczos vectors as rows of ``V``.
    Breakdown is declared when the residual norm drops below
    ``tol * max(1, ||H||_inf)``.
    """
    n = len(H)
    scale = max(1.0, float(np.abs(H).sum(axis=1).max()))
    vectors = [start / np.linalg.norm(start)]
    alpha: list[float] = []
    beta: list[float] = []
    while True:
        v = vectors[-1]
        w = H @ v
        alpha.append(float(v @ w))
        Q = np.array(vectors)
        for _ in range(2):
            w = w - Q.T @ (Q @ w)
        r = float(np.linalg.norm(w))
        if r < tol * scale or len(vectors) == n:
            break
        beta.append(r)
        vectors.append(w / r)
    V = np.array(vectors)
    drift = np.abs(V @ V.T - np.eye(len(V))).max()
    if drift > ORTHO_TOL:
        raise NumericalError(f"Lanczos lost orthogonality ({drift:.3g})")
    return V, np.array(alpha), np.array(beta)


def _fix_sign(columns: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    out = columns.copy()
    for j in range(out.shape[1]):
        nz = np.flatnonzero(np.abs(out[:, j]) > tol)
        if len(nz) and out[nz[0], j] < 0:
            out[:, j] = -out[:, j]
    return out


@dataclass(frozen=True)
class GolinskiiDecomposition:
    """Orthonormal change of basis ``H = blockdiag(complement, jacobi)``.

    ``krylov`` rows are the Jacobi basis vectors restricted to the graph,
    ordered by Jacobi index (the root is last, next to the tail).
    ``complement_vectors`` columns are eigenvectors of the finite block.
    """

    n: int
    root: int
    jacobi: EventuallyFreeJacobi
    krylov: np.ndarray
    complement_values: np.ndarray
    complement_vectors: np.ndarray

    @property
    def complement_dim(self) -> int:
        return len(self.complement_values)

    def basis(self, tail_length: int) -> np.ndarray:
        """Columns: complement eigenvectors, Jacobi vectors, then tail sites."""
        n, m, c = self.n, self.jacobi.K, self.complement_dim
        size = n + tail_length
        Q = np.zeros((size, size))
        Q[:n, :c] = self.complement_vectors
        Q[:n, c : c + m] = self.krylov.T
        Q[n:, c + m :] = np.eye(tail_length)
        return Q

    def block_form(self, tail_length: int) -> np.ndarray:
        """``blockdiag(diag(complement_values), truncated jacobi)`` in basis order."""
        c = self.complement_dim
        size = self.n + tail_length
        out = np.zeros((size, size))
        out[:c, :c] = np.diag(self.complement_values)
        out[c:, c:] = self.jacobi.matrix(size - c)
        return out

    def to_jacobi_coords(self, state: QuantumState) -> tuple[np.ndarray, np.ndarray]:
        if state.n != self.n:
            raise ValueError(f"state lives on a graph of order {state.n}, decomposition on {self.n}")
        head = state.amplitudes[: self.n]
        jac = np.concatenate([self.krylov @ head, state.amplitudes[self.n :]])
        return jac, self.complement_vectors.T @ head

    def from_jacobi_coords(self, jacobi_coords, complement_coords=None) -> QuantumState:
        """Inverse of :meth:`to_jacobi_coords`; the result has ``len(jacobi_coords) - K`` tail sites."""
        jacobi_coords = np.asarray(jacobi_coords)
        m = self.jacobi.K
        if len(jacobi_coords) < m:
            raise ValueError(f"need at least {m} Jacobi coordinates")
        head = self.krylov.T @ jacobi_coords[:m]
        if complement_coords is not None:
            head = head + self.complement_vectors @ np.asarray(complement_coords)
        amp = np.concatenate([head, jacobi_coords[m:]]).astype(complex)
        return QuantumState(amp, self.n)

    def to_dict(self) -> dict:
        def sparse(v):
            idx = np.flatnonzero(np.abs(v) > 1e-14)
            return {"support": (idx + 1).tolist(), "values": v[idx].tolist()}

        return {
            "n": self.n,
            "root": self.root,
            "jacobi": self.jacobi.to_dict(),
            "complement_eigenvalues": self.complement_values.tolist(),
            "jacobi_basis": [sparse(v) for v in self.krylov],
            "complement_basis": [sparse(v) for v in self.complement_vectors.T],
        }


def finite_block(sys: TailedSystem, oracle: OracleSpec | None = None) -> np.ndarray:
    H = sys.graph.adjacency()
    if oracle is not None:
        oracle.check(sys.n)
        H[oracle.w - 1, oracle.w - 1] += oracle.gamma
    return H


def reduce(sys: TailedSystem, oracle: OracleSpec | None = None) -> GolinskiiDecomposition:
    if not sys.tail_present:
        raise ValueError("reduction needs a tail attached to the root")
    n, root = sys.n, sys.root
    H = finite_block(sys, oracle)
    start = np.zeros(n)
    start[root - 1] = 1.0
    V, alpha, beta = lanczos(H, start)
    # Jacobi index 1 is the last Lanczos vector; the root sits at index K.
    jacobi = EventuallyFreeJacobi(alpha[::-1], beta[::-1])
    krylov = V[::-1]
    m = len(V)
    if m < n:
        Q, _ = np.linalg.qr(V.T, mode="complete")
        P = Q[:, m:]
        C = P.T @ H @ P
        vals, U = np.linalg.eigh((C + C.T) / 2)
        vecs = _fix_sign(P @ U)
    else:
        vals, vecs = np.zeros(0), np.zeros((n, 0))
    return GolinskiiDecomposition(n, root, jacobi, _frozen(krylov), _frozen(vals), _frozen(vecs))
