"""Search, obliviousness and lower-bound experiments, plus n-sweeps.

Placements
----------
``clique-vertex``
    K_n with the tail at vertex n and the oracle at vertex 1.
``root``
    Same graph, oracle at the attachment vertex n.
``no-tail``
    The finite K_n with the oracle at vertex 1.

Times are in units of the unnormalized adjacency matrix; the predicted
peak time for gamma = n is pi / (2 sqrt(n)).
"""

from __future__ import annotations

import io
import logging
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import GraphError, TailwalkError
from .graph import FiniteGraph, OracleSpec, RootedGraph, attach_tail, make_complete, make_cone, without_tail
from .hamiltonian import QuantumState, assemble, basis_state, principal_state, spectral_decompose
from .jost import BoundState, bound_subspace_overlap, point_spectrum
from .propagate import DEFAULT_STEPS, LEAKAGE_TOL, FidelityCurve, Peak, default_grid, fidelity_curve, peak, run_controlled
from .reduction import GolinskiiDecomposition, reduce

log = logging.getLogger(__name__)

PLACEMENTS = ("clique-vertex", "root", "no-tail")


def parse_gamma_rule(rule: str | float | Callable[[int], float]) -> Callable[[int], float]:
    """``"n"``, ``"n+c"``, ``"n-c"`` or a literal number, as a function of n."""
    if callable(rule):
        return rule
    if isinstance(rule, (int, float)):
        value = float(rule)
        return lambda n: value
    text = rule.replace(" ", "")
    if text == "n":
        return lambda n: float(n)
    if text.startswith("n") and text[1:2] in ("+", "-"):
        try:
            c = float(text[1:])
        except ValueError:
            raise ValueError(f"bad gamma rule {rule!r}") from None
        return lambda n: n + c
    try:
        value = float(text)
    except ValueError:
        raise ValueError(f"bad gamma rule {rule!r}; use 'n', 'n+c' or a number") from None
    return lambda n: value


def predicted_time(n: int) -> float:
    return math.pi / (2.0 * math.sqrt(n))


@dataclass
class SearchReport:
    """Outcome of one search run.

    ``lambda_plus``/``lambda_minus`` are the two largest bound-state
    eigenvalues; ``x_plus``/``x_minus`` the larger/smaller Jost roots, so
    ``lambda_plus = x_minus + 1/x_minus``. For ``no-tail`` they come from the
    finite matrix and the roots are absent.
    """

    n: int
    gamma: float
    placement: str
    t_star: float
    F_star: float
    predicted_t: float
    t_ratio: float
    lambda_plus: float | None
    lambda_minus: float | None
    x_plus: float | None
    x_minus: float | None
    overlap_initial: float | None
    overlap_target: float | None
    epsilon1: float
    tail_length: int
    max_leakage: float
    norm_drift: float
    experiment: str = "search"

    def to_dict(self) -> dict:
        d = asdict(self)
        return {"experiment": d.pop("experiment"), **d}


def _search_system(n: int, gamma: float, placement: str):
    if placement not in PLACEMENTS:
        raise ValueError(f"unknown placement {placement!r}; choose from {PLACEMENTS}")
    rooted = RootedGraph(make_complete(n))
    w = n if placement == "root" else 1
    sys = without_tail(rooted) if placement == "no-tail" else attach_tail(rooted)
    return sys, OracleSpec(w, gamma)


def run_search(
    n: int,
    gamma: float,
    placement: str = "clique-vertex",
    t_steps: int = DEFAULT_STEPS,
    t_max: float | None = None,
    tail_length: int | None = None,
    leakage_tol: float = LEAKAGE_TOL,
) -> tuple[SearchReport, FidelityCurve]:
    """Run spatial search on K_n (tailed or not). Returns ``(report, curve)``."""
    if n < 4:
        raise ValueError("search experiments need n >= 4")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    sys, oracle = _search_system(n, gamma, placement)
    w = oracle.w
    t_pred = predicted_time(n)
    grid = default_grid(t_pred, t_steps) if t_max is None else np.linspace(0.0, t_max, t_steps)
    curve = fidelity_curve(sys, oracle, w, grid, tail_length=tail_length, leakage_tol=leakage_tol)
    pk = peak(curve)
    size = n + curve.tail_length
    z1 = principal_state(sys.graph, size)
    target = basis_state(w, size, n)
    epsilon1 = abs(np.vdot(target.amplitudes, z1.amplitudes))

    x_plus = x_minus = None
    if sys.tail_present:
        dec = reduce(sys, oracle)
        states = point_spectrum(dec.jacobi)[:2]
        lams = [s.lam for s in states] + [None, None]
        roots = sorted(s.x for s in states)
        if len(roots) == 2:
            x_minus, x_plus = roots
        overlap_initial = bound_subspace_overlap(dec.to_jacobi_coords(z1)[0], states)
        overlap_target = bound_subspace_overlap(dec.to_jacobi_coords(target)[0], states)
    else:
        lam, V = spectral_decompose(assemble(sys, oracle, 0))
        top = V[:, -2:]
        lams = [float(lam[-1]), float(lam[-2])]
        overlap_initial = float(np.sum(np.abs(top.T @ z1.amplitudes) ** 2))
        overlap_target = float(np.sum(np.abs(top.T @ target.amplitudes) ** 2))

    report = SearchReport(
        n=n,
        gamma=float(gamma),
        placement=placement,
        t_star=pk.t_star,
        F_star=pk.F_star,
        predicted_t=t_pred,
        t_ratio=pk.t_star / t_pred,
        lambda_plus=lams[0],
        lambda_minus=lams[1],
        x_plus=x_plus,
        x_minus=x_minus,
        overlap_initial=overlap_initial,
        overlap_target=overlap_target,
        epsilon1=float(epsilon1),
        tail_length=curve.tail_length,
        max_leakage=float(np.max(curve.leakage)),
        norm_drift=curve.norm_drift,
    )
    return report, curve


def run_oblivious(n: int, gamma: float, t_steps: int = DEFAULT_STEPS) -> dict:
    """All three placements at equal (n, gamma), with deviations relative to clique-vertex."""
    if n < 8:
        raise ValueError("the obliviousness comparison needs n >= 8")
    reports = {p: run_search(n, gamma, p, t_steps)[0] for p in PLACEMENTS}
    ref = reports["clique-vertex"]
    rel = {}
    for p in ("root", "no-tail"):
        rel[p] = {
            "t_star_rel": abs(reports[p].t_star - ref.t_star) / ref.t_star,
            "F_star_diff": abs(reports[p].F_star - ref.F_star),
        }
    return {
        "experiment": "oblivious",
        "n": n,
        "gamma": float(gamma),
        "reports": {p: r.to_dict() for p, r in reports.items()},
        "relative_to_clique_vertex": rel,
    }


@dataclass
class LowerBoundReport:
    n: int
    d: int
    gamma: float
    w: int
    t0: float
    F0: float
    epsilon1: float
    lambda1: float
    beta_distance: float
    times: np.ndarray = field(repr=False)
    M: np.ndarray = field(repr=False)
    M_t0: float
    max_derivative: float
    bound_rhs: float
    product: float
    inv_gamma_epsilon: float
    tail_length: int
    max_leakage: float
    norm_drift: float

    @property
    def checks(self) -> dict[str, bool]:
        return {
            "M0_zero": float(self.M[0]) == 0.0,
            "M_bounded": bool(np.all(self.M <= 4.0 + 1e-12)),
            "derivative_bound": self.max_derivative <= self.bound_rhs + 1e-6,
            "M_t0_lower": self.M_t0 >= 2 * (1 - self.epsilon1) - 0.05,
            "product_lower": self.product >= 1 - self.epsilon1 - 0.05,
        }

    def to_dict(self) -> dict:
        d = asdict(self)
        d["times"] = self.times.tolist()
        d["M"] = self.M.tolist()
        return {"experiment": "lowerbound", **d, "checks": self.checks}

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,M\n")
        for t, m in zip(self.times, self.M):
            buf.write(f"{float(t)!r},{float(m)!r}\n")
        return buf.getvalue()


def top_bound_state(g: FiniteGraph, tail_length: int):
    """Top bound eigenstate of the tailed cone over ``g`` (no oracle), in vertex coordinates.

    Returns ``(state, bound_state)``; the phase makes ``<state, z1> >= 0``.
    """
    cone = attach_tail(make_cone(g))
    dec = reduce(cone, None)
    states = point_spectrum(dec.jacobi)
    if not states:
        raise TailwalkError("cone operator has no bound state")
    top = states[0]
    beta = dec.from_jacobi_coords(top.vector(dec.jacobi.K + tail_length))
    z1 = principal_state(g, cone.n + tail_length)
    amp = beta.amplitudes / np.linalg.norm(beta.amplitudes)
    if np.real(np.vdot(z1.amplitudes, amp)) < 0:
        amp = -amp
    return QuantumState(amp, beta.n), top


def run_lower_bound(g: FiniteGraph, gamma: float, w: int = 1, t_steps: int = DEFAULT_STEPS) -> LowerBoundReport:
    """Compare evolutions of the top bound state with and without the oracle on the tailed cone."""
    d = g.regular_degree()
    if d is None:
        raise GraphError("lower-bound experiment needs a regular graph")
    if not 1 <= w <= g.n:
        raise GraphError(f"oracle vertex {w} outside 1..{g.n}")
    if d < 2 * math.sqrt(g.n):
        warnings.warn(f"degree {d} below 2*sqrt(n) = {2 * math.sqrt(g.n):.3g}; outside the d >> sqrt(n) regime")
    cone = attach_tail(make_cone(g))
    oracle = OracleSpec(w, gamma)
    t_pred = math.pi * math.sqrt(g.n) / (2.0 * gamma)
    times = default_grid(t_pred, t_steps)

    cache: dict[int, tuple] = {}

    def initial(size: int):
        state, top = top_bound_state(g, size - cone.n)
        cache[size] = (state, top)
        return state

    run = run_controlled(cone, oracle, initial, times)
    beta, top = cache[run.initial.size]
    z1 = principal_state(g, run.initial.size)
    epsilon1 = float(abs(z1.amplitudes[w - 1]))
    lam1 = top.lam

    def M_at(psi_w: np.ndarray, t) -> np.ndarray:
        psi0 = beta.amplitudes[:, None] * np.exp(-1j * lam1 * np.atleast_1d(t))[None, :]
        return np.sum(np.abs(psi_w - psi0) ** 2, axis=0)

    M = M_at(run.states, times)
    fid = np.abs(run.states[w - 1])
    amp = run.propagator.amplitude_fn(run.initial, w)
    curve_peak = _refined_peak(times, fid, lambda t: abs(amp(t)))
    t0 = curve_peak.t_star
    M_t0 = float(M_at(run.propagator.trajectory(run.initial, [t0]), t0)[0])
    slopes = np.diff(M) / np.diff(times)
    return LowerBoundReport(
        n=g.n,
        d=d,
        gamma=float(gamma),
        w=w,
        t0=t0,
        F0=curve_peak.F_star,
        epsilon1=epsilon1,
        lambda1=lam1,
        beta_distance=float(np.linalg.norm(beta.amplitudes - z1.amplitudes)),
        times=times,
        M=M,
        M_t0=M_t0,
        max_derivative=float(slopes.max()),
        bound_rhs=2.0 * gamma * epsilon1,
        product=gamma * t0 * epsilon1,
        inv_gamma_epsilon=1.0 / (gamma * epsilon1),
        tail_length=run.tail_length,
        max_leakage=float(run.leakage.max()),
        norm_drift=float(np.abs(np.linalg.norm(run.states, axis=0) - 1.0).max()),
    )


def _refined_peak(times, values, f) -> Peak:
    return peak(FidelityCurve(times, values, np.zeros_like(values), evaluate=f))


@dataclass
class SweepRow:
    n: int
    report: SearchReport | None
    error: str | None = None

    def trend(self) -> dict:
        if self.report is None:
            return {"n": self.n, "error": self.error}
        r = self.report
        scale = self.n**1.5
        return {
            "n": self.n,
            "gamma": r.gamma,
            "t_star": r.t_star,
            "F_star": r.F_star,
            "t_star_sqrt_n": r.t_star * math.sqrt(self.n),
            "x_plus_scaled": None if r.x_plus is None else (r.x_plus - 1 / self.n) * scale,
            "x_minus_scaled": None if r.x_minus is None else (r.x_minus - 1 / self.n) * scale,
            "lambda_plus": r.lambda_plus,
            "lambda_minus": r.lambda_minus,
            "error": None,
        }


SWEEP_COLUMNS = (
    "n", "gamma", "t_star", "F_star", "t_star_sqrt_n",
    "x_plus_scaled", "x_minus_scaled", "lambda_plus", "lambda_minus", "error",
)


@dataclass
class SweepTable:
    placement: str
    rows: list[SweepRow]

    def to_dict(self) -> dict:
        return {
            "experiment": "sweep",
            "placement": self.placement,
            "rows": [r.trend() for r in self.rows],
            "reports": [r.report.to_dict() if r.report else None for r in self.rows],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(SWEEP_COLUMNS) + "\n")
        for row in self.rows:
            t = row.trend()
            cells = []
            for col in SWEEP_COLUMNS:
                v = t.get(col)
                cells.append("" if v is None else (repr(float(v)) if isinstance(v, float) else str(v)))
            buf.write(",".join(cells) + "\n")
        return buf.getvalue()


def thread_cap() -> int:
    try:
        return max(1, int(os.environ.get("TAILWALK_THREADS", "1")))
    except ValueError:
        return 1


def sweep(
    n_list: Sequence[int],
    gamma_rule="n",
    placement: str = "clique-vertex",
    t_steps: int = DEFAULT_STEPS,
    workers: int | None = None,
) -> SweepTable:
    """One search per n; failures are recorded per row and the sweep continues."""
    n_list = list(n_list)
    if not n_list:
        raise ValueError("n_list is empty")
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("n_list must be strictly increasing")
    rule = parse_gamma_rule(gamma_rule)

    def one(n: int) -> SweepRow:
        try:
            return SweepRow(n, run_search(n, rule(n), placement, t_steps)[0])
        except (TailwalkError, ValueError) as exc:
            log.warning("sweep entry n=%d failed: %s", n, exc)
            return SweepRow(n, None, f"{type(exc).__name__}: {exc}")

    workers = thread_cap() if workers is None else workers
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(one, n_list))
    return SweepTable(placement, rows)


def bound_states_for(n: int, gamma: float, placement: str) -> tuple[GolinskiiDecomposition, list[BoundState]]:
    sys, oracle = _search_system(n, gamma, placement)
    if not sys.tail_present:
        raise ValueError("no-tail placement has no Jacobi reduction")
    dec = reduce(sys, oracle)
    return dec, point_spectrum(dec.jacobi)
