"""Jost polynomials, point spectrum and bound states of eventually-free Jacobi matrices.

For ``lambda = x + 1/x`` the Jost solution ``y_k(x)`` solves the
eigen-equation row by row and equals ``x**k`` once past the horizon.
Its zeroth component ``y_0`` is a polynomial whose zeros in ``(-1, 1)``
are exactly the eigenvalue parameters of the matrix.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import ConsistencyError, NumericalError
from .reduction import EventuallyFreeJacobi

log = logging.getLogger(__name__)

BOUNDARY_TOL = 1e-12
BISECT_WIDTH = 1e-14
RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class LaurentPoly:
    """``sum_i coeffs[i] * x**(min_degree + i)``, trimmed of zero end coefficients."""

    min_degree: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        nz = np.flatnonzero(c)
        if len(nz) == 0:
            lo, c = 0, np.zeros(0)
        else:
            lo, c = int(self.min_degree) + nz[0], c[nz[0] : nz[-1] + 1].copy()
        c.flags.writeable = False
        object.__setattr__(self, "min_degree", lo)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def monomial(cls, k: int, scale: float = 1.0) -> "LaurentPoly":
        return cls(k, [scale])

    @property
    def is_zero(self) -> bool:
        return len(self.coeffs) == 0

    @property
    def max_degree(self) -> int:
        return self.min_degree + len(self.coeffs) - 1

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return npoly.polyval(x, self.coeffs) * x**self.min_degree

    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        lo = min(self.min_degree, other.min_degree)
        hi = max(self.max_degree, other.max_degree)
        out = np.zeros(hi - lo + 1)
        out[self.min_degree - lo : self.max_degree - lo + 1] += self.coeffs
        out[other.min_degree - lo : other.max_degree - lo + 1] += other.coeffs
        return LaurentPoly(lo, out)

    def __mul__(self, scalar: float) -> "LaurentPoly":
        return LaurentPoly(self.min_degree, self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __sub__(self, other: "LaurentPoly") -> "LaurentPoly":
        return self + other * -1.0

    def times_spectral(self) -> "LaurentPoly":
        """Multiply by ``x + 1/x``."""
        return LaurentPoly(self.min_degree + 1, self.coeffs) + LaurentPoly(self.min_degree - 1, self.coeffs)

    def ascending(self) -> np.ndarray:
        """Ordinary polynomial coefficients from degree 0 upwards."""
        if self.min_degree < 0:
            raise ValueError("Laurent polynomial has negative powers")
        return np.concatenate([np.zeros(self.min_degree), self.coeffs])

    def to_dict(self) -> dict:
        return {"min_degree": self.min_degree, "coeffs": self.coeffs.tolist()}


def jost_polynomials(J: EventuallyFreeJacobi) -> list[LaurentPoly]:
    """``[y_0, ..., y_{K+1}]`` with ``y_k = x**k`` for ``k >= K`` and ``a_0 = 1``."""
    if np.any(J.a <= 0):
        raise ValueError("invalid Jacobi matrix: non-positive off-diagonal")
    K = J.K
    ys: list[LaurentPoly | None] = [None] * (K + 2)
    ys[K] = LaurentPoly.monomial(K)
    ys[K + 1] = LaurentPoly.monomial(K + 1)
    for k in range(K, 0, -1):
        below = J.offdiag(k - 1) if k > 1 else 1.0
        rhs = ys[k].times_spectral() - ys[k] * J.diag(k) - ys[k + 1] * J.offdiag(k)
        ys[k - 1] = rhs * (1.0 / below)
    if ys[0].min_degree < 0:
        raise ConsistencyError(f"y_0 kept a Laurent part (min degree {ys[0].min_degree})")
    return ys


def _bisect(coeffs: np.ndarray, lo: float, hi: float, flo: float) -> float:
    while hi - lo > BISECT_WIDTH:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        fmid = npoly.polyval(mid, coeffs)
        if fmid == 0.0:
            return mid
        if np.sign(fmid) == np.sign(flo):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def real_roots(coeffs: np.ndarray, lo: float = -1.0, hi: float = 1.0) -> list[float]:
    """All real roots of a polynomial (ascending coefficients) in ``[lo, hi]``.

    Sign changes are searched on a uniform grid of ``10*deg + 64`` points
    merged with the critical points (found recursively), so every pair of
    consecutive samples brackets at most one simple root. Each bracket is
    bisected to width 1e-14 and polished by one Newton step.
    """
    c = np.trim_zeros(np.asarray(coeffs, dtype=float), "b")
    deg = len(c) - 1
    if deg < 1:
        return []
    if deg == 1:
        with np.errstate(over="ignore", divide="ignore"):
            r = -c[0] / c[1]
        return [float(r)] if np.isfinite(r) and lo <= r <= hi else []
    dc = npoly.polyder(c)
    crit = real_roots(dc, lo, hi)
    pts = np.unique(np.concatenate([np.linspace(lo, hi, 10 * deg + 64), crit]))
    vals = npoly.polyval(pts, c)
    roots = [float(p) for p, v in zip(pts, vals) if v == 0.0]
    for i in np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0):
        a, b = pts[i], pts[i + 1]
        r = _bisect(c, a, b, vals[i])
        slope = npoly.polyval(r, dc)
        if slope != 0.0:
            polished = r - npoly.polyval(r, c) / slope
            if a <= polished <= b:
                r = polished
        roots.append(float(r))
    return sorted(roots)


@dataclass(frozen=True)
class BoundState:
    """Square-summable eigenvector of ``J`` with eigenvalue ``x + 1/x``.

    ``head`` holds the unnormalized Jost components ``y_1(x)..y_K(x)``;
    beyond ``K`` the components continue as ``x**k``.
    """

    x: float
    head: np.ndarray
    norm: float

    @property
    def lam(self) -> float:
        return self.x + 1.0 / self.x

    @property
    def tail_ratio(self) -> float:
        return self.x

    @property
    def K(self) -> int:
        return len(self.head)

    def components(self, length: int) -> np.ndarray:
        """Unnormalized ``y_1..y_length``."""
        out = np.empty(length)
        m = min(length, self.K)
        out[:m] = self.head[:m]
        if length > self.K:
            out[self.K :] = self.x ** np.arange(self.K + 1, length + 1)
        return out

    def vector(self, length: int) -> np.ndarray:
        """Normalized components ``1..length`` (of the infinite vector)."""
        return self.components(length) / self.norm

    def residual(self, J: EventuallyFreeJacobi) -> float:
        """``||(J - lam) y|| / ||y||``, exact: rows past ``K+1`` vanish identically."""
        y = self.vector(self.K + 2)
        d, e = J.bands(self.K + 2)
        Jy = d * y
        Jy[1:] += e * y[:-1]
        Jy[:-1] += e * y[1:]
        r = (Jy - self.lam * y)[: self.K + 1]
        return float(np.linalg.norm(r))

    def to_dict(self) -> dict:
        return {"x": self.x, "lambda": self.lam, "head": self.head.tolist(), "norm": self.norm}


def make_bound_state(J: EventuallyFreeJacobi, x: float, ys: Sequence[LaurentPoly] | None = None) -> BoundState:
    ys = jost_polynomials(J) if ys is None else ys
    K = J.K
    head = np.array([float(ys[k](x)) for k in range(1, K + 1)])
    tail = x ** (2 * (K + 1)) / (1.0 - x * x)
    return BoundState(float(x), head, math.sqrt(float(head @ head) + tail))


class JostRoots(NamedTuple):
    inside: list[float]
    boundary: list[float]


def jost_roots(J: EventuallyFreeJacobi) -> JostRoots:
    """Zeros of ``y_0`` in ``[-1, 1]``, split into interior and band-edge ones."""
    y0 = jost_polynomials(J)[0]
    coeffs = y0.ascending()
    if coeffs[0] == 0.0:
        raise ConsistencyError("y_0(0) = 0, impossible for an eventually-free Jacobi matrix")
    inside, boundary = [], []
    for r in real_roots(coeffs):
        (boundary if abs(r) >= 1.0 - BOUNDARY_TOL else inside).append(r)
    return JostRoots(inside, boundary)


def point_spectrum(J: EventuallyFreeJacobi) -> list[BoundState]:
    """Bound states of ``J`` sorted by eigenvalue, largest first."""
    ys = jost_polynomials(J)
    roots = jost_roots(J)
    if roots.boundary:
        log.warning("Jost roots at the band edge treated as unreliable: %s", roots.boundary)
    states = [make_bound_state(J, x, ys) for x in roots.inside]
    for s in states:
        res = s.residual(J)
        if res > RESIDUAL_TOL:
            raise NumericalError(f"bound state at x={s.x:.17g} has eigen-residual {res:.3g}")
    return sorted(states, key=lambda s: s.lam, reverse=True)


def sign_profile(J: EventuallyFreeJacobi, points: Sequence[float]) -> tuple[int, ...]:
    """Signs of ``y_0`` at ``points``, scaled so that ``y_0(0) > 0``."""
    y0 = jost_polynomials(J)[0]
    orient = np.sign(y0(0.0))
    return tuple(int(np.sign(orient * y0(p))) for p in points)


def bound_subspace_overlap(coords, states: Sequence[BoundState]) -> float:
    """Squared norm of the projection of ``coords`` (Jacobi basis) onto the bound states."""
    coords = np.asarray(coords)
    return float(sum(abs(np.vdot(s.vector(len(coords)), coords)) ** 2 for s in states))


def spectrum_to_dict(J: EventuallyFreeJacobi, states: Sequence[BoundState] | None = None) -> dict:
    ys = jost_polynomials(J)
    states = point_spectrum(J) if states is None else states
    return {
        "jacobi": J.to_dict(),
        "bound_states": [s.to_dict() for s in states],
        "jost_polynomials": [y.to_dict() for y in ys],
    }
