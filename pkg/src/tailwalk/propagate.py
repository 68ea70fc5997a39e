"""Unitary evolution on truncated systems with boundary-leakage control."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import TruncationError
from .graph import OracleSpec, TailedSystem
from .hamiltonian import QuantumState, TruncatedHamiltonian, assemble, principal_state, spectral_decompose

LEAKAGE_TOL = 1e-8
LEAKAGE_GUARD = 16
MAX_DOUBLINGS = 6
PEAK_TOL = 1e-6
DEFAULT_STEPS = 512


class Propagator:
    """``exp(-i t H)`` through one dense eigendecomposition, reused for every ``t``."""

    def __init__(self, H: TruncatedHamiltonian):
        self.H = H
        self.eigenvalues, self.eigenvectors = spectral_decompose(H)

    def _coefficients(self, psi0: QuantumState) -> np.ndarray:
        if psi0.size != self.H.size:
            raise ValueError(f"state size {psi0.size} does not match Hamiltonian size {self.H.size}")
        return self.eigenvectors.T @ psi0.amplitudes

    def trajectory(self, psi0: QuantumState, times) -> np.ndarray:
        """Evolved amplitudes, one column per time."""
        times = np.asarray(times, dtype=float)
        c = self._coefficients(psi0)
        phases = np.exp(-1j * np.outer(self.eigenvalues, times))
        out = self.eigenvectors @ (c[:, None] * phases)
        # identity at t = 0 exactly, not up to rounding
        out[:, times == 0.0] = psi0.amplitudes[:, None]
        return out

    def evolve(self, psi0: QuantumState, t: float) -> QuantumState:
        return QuantumState(self.trajectory(psi0, [t])[:, 0], psi0.n)

    def amplitude_fn(self, psi0: QuantumState, site: int) -> Callable[[float], complex]:
        """``t -> <e_site, exp(-i t H) psi0>``."""
        weights = self.eigenvectors[site - 1] * self._coefficients(psi0)
        lam = self.eigenvalues
        return lambda t: complex(weights @ np.exp(-1j * lam * t))


def evolve(H: TruncatedHamiltonian, psi0: QuantumState, t: float) -> QuantumState:
    if t < 0:
        raise ValueError("evolution time must be non-negative")
    return Propagator(H).evolve(psi0, t)


def min_truncation(t_max: float, n: int | None = None) -> int:
    """Tail length for walks up to ``t_max``: front speed 2 sites/time, margin 64.

    ``n`` is accepted for interface symmetry; the free tail dominates the
    estimate regardless of the graph.
    """
    if t_max < 0:
        raise ValueError("t_max must be non-negative")
    return math.ceil(4 * t_max) + 64


def leakage(psi: QuantumState | np.ndarray, guard: int = LEAKAGE_GUARD, n: int | None = None) -> float:
    """Probability mass on the last ``guard`` tail sites (clamped to the tail length)."""
    if isinstance(psi, QuantumState):
        amp, tail = psi.amplitudes, psi.tail_length
    else:
        amp, tail = np.asarray(psi), len(psi) - n
    g = min(guard, tail)
    if g <= 0:
        return 0.0
    return float(np.sum(np.abs(amp[-g:]) ** 2))


def _leakage_columns(states: np.ndarray, tail: int, guard: int) -> np.ndarray:
    g = min(guard, tail)
    if g <= 0:
        return np.zeros(states.shape[1])
    return np.sum(np.abs(states[-g:]) ** 2, axis=0)


class Run(NamedTuple):
    propagator: Propagator
    initial: QuantumState
    states: np.ndarray
    leakage: np.ndarray
    tail_length: int


def run_controlled(
    sys: TailedSystem,
    oracle: OracleSpec | None,
    initial: Callable[[int], QuantumState],
    times,
    tail_length: int | None = None,
    tol: float = LEAKAGE_TOL,
    guard: int = LEAKAGE_GUARD,
) -> Run:
    """Evolve ``initial(size)`` over ``times``, doubling the tail until leakage <= ``tol``."""
    times = np.asarray(times, dtype=float)
    if not sys.tail_present:
        L = 0
    else:
        L = tail_length if tail_length is not None else min_truncation(float(times.max(initial=0.0)), sys.n)
    for _ in range(MAX_DOUBLINGS + 1):
        H = assemble(sys, oracle, L)
        psi0 = initial(H.size)
        psi0.require_unit()
        prop = Propagator(H)
        states = prop.trajectory(psi0, times)
        leak = _leakage_columns(states, L, guard)
        if not sys.tail_present or leak.max(initial=0.0) <= tol:
            return Run(prop, psi0, states, leak, L)
        L *= 2
    raise TruncationError(f"leakage {leak.max():.3g} above {tol} even with tail length {L // 2}")


@dataclass(frozen=True)
class FidelityCurve:
    times: np.ndarray
    values: np.ndarray
    leakage: np.ndarray
    tail_length: int = 0
    norm_drift: float = 0.0
    evaluate: Callable[[float], float] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if len(t) > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,fidelity,leakage\n")
        for t, f, leak in zip(self.times, self.values, self.leakage):
            buf.write(f"{float(t)!r},{float(f)!r},{float(leak)!r}\n")
        return buf.getvalue()


def default_grid(t_pred: float, steps: int = DEFAULT_STEPS) -> np.ndarray:
    return np.linspace(0.0, 2.0 * t_pred, steps)


def fidelity_curve(
    sys: TailedSystem,
    oracle: OracleSpec | None,
    w: int,
    t_grid,
    initial: Callable[[int], QuantumState] | None = None,
    tail_length: int | None = None,
    leakage_tol: float = LEAKAGE_TOL,
) -> FidelityCurve:
    """``F(t) = |<e_w, exp(-i t H) psi0>|`` on ``t_grid``; ``psi0`` defaults to the principal state."""
    if not 1 <= w <= sys.n:
        raise ValueError(f"target vertex {w} outside 1..{sys.n}")
    t_grid = np.asarray(t_grid, dtype=float)
    if initial is None:
        initial = lambda size: principal_state(sys.graph, size)  # noqa: E731
    run = run_controlled(sys, oracle, initial, t_grid, tail_length, leakage_tol)
    amp = run.propagator.amplitude_fn(run.initial, w)
    drift = float(np.abs(np.linalg.norm(run.states, axis=0) - run.initial.norm()).max(initial=0.0))
    return FidelityCurve(
        times=t_grid,
        values=np.abs(run.states[w - 1]),
        leakage=run.leakage,
        tail_length=run.tail_length,
        norm_drift=drift,
        evaluate=lambda t: abs(amp(t)),
    )


class Peak(NamedTuple):
    t_star: float
    F_star: float
    degenerate: bool = False


def golden_max(f: Callable[[float], float], a: float, b: float, tol: float = PEAK_TOL) -> float:
    """Maximizer of a unimodal ``f`` on ``[a, b]`` by golden-section search."""
    r = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = b - r * (b - a), a + r * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - r * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + r * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def peak(curve: FidelityCurve, tol: float = PEAK_TOL) -> Peak:
    """Grid argmax of ``curve``, refined inside its neighbouring cells when an evaluator is attached."""
    values = np.asarray(curve.values)
    if len(values) == 0:
        raise ValueError("empty curve")
    i = int(np.argmax(values))
    t_best, f_best = float(curve.times[i]), float(values[i])
    if f_best == 0.0:
        return Peak(t_best, 0.0, degenerate=True)
    if curve.evaluate is not None and len(values) > 1:
        lo = float(curve.times[max(i - 1, 0)])
        hi = float(curve.times[min(i + 1, len(values) - 1)])
        t_ref = golden_max(curve.evaluate, lo, hi, tol)
        f_ref = float(curve.evaluate(t_ref))
        if f_ref >= f_best:
            t_best, f_best = t_ref, f_ref
    return Peak(t_best, f_best)
