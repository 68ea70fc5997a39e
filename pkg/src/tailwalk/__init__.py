"""Continuous-time quantum-walk search on finite graphs with a semi-infinite tail."""

from .errors import (
    ConsistencyError,
    GraphError,
    GraphParseError,
    JacobiError,
    NumericalError,
    TailwalkError,
    TruncationError,
)
from .graph import (
    FiniteGraph,
    OracleSpec,
    RootedGraph,
    TailedSystem,
    attach_tail,
    lollipop,
    make_complete,
    make_cone,
    parse_graph,
    serialize_graph,
)
from .hamiltonian import QuantumState, TruncatedHamiltonian, assemble, principal_state, spectral_decompose
from .jost import BoundState, LaurentPoly, bound_subspace_overlap, jost_polynomials, point_spectrum, sign_profile
from .propagate import FidelityCurve, evolve, fidelity_curve, leakage, min_truncation, peak
from .reduction import EventuallyFreeJacobi, GolinskiiDecomposition, reduce

__version__ = "0.1.0"
