import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tailwalk.errors import JacobiError
from tailwalk.graph import FiniteGraph, OracleSpec, RootedGraph, attach_tail, lollipop, make_complete, make_cone, make_cycle
from tailwalk.hamiltonian import assemble, basis_state, principal_state
from tailwalk.reduction import EventuallyFreeJacobi, lanczos, reduce


def clique_vertex_entries(n, g):
    """Jacobi block for the oracle on a clique vertex, written out by hand."""
    b = [g * (n - 2) / (n - 1) - 1, n - 2 + g / (n - 1), 0.0]
    a = [g * np.sqrt(n - 2) / (n - 1), np.sqrt(n - 1)]
    return b, a


def test_clique_vertex_numbers_n5():
    J = reduce(lollipop(5), OracleSpec(1, 5.0)).jacobi
    np.testing.assert_allclose(J.b, [2.75, 4.25, 0.0], atol=1e-12)
    np.testing.assert_allclose(J.a, [5 * np.sqrt(3) / 4, 2.0], atol=1e-12)
    assert J.K == 3
    assert J.offdiag(3) == 1.0 and J.diag(4) == 0.0


@pytest.mark.parametrize("n", [4, 7, 16, 64])
@pytest.mark.parametrize("g", [0.5, 3.0, 64.0])
def test_clique_vertex_closed_form(n, g):
    dec = reduce(lollipop(n), OracleSpec(1, g))
    b, a = clique_vertex_entries(n, g)
    np.testing.assert_allclose(dec.jacobi.b, b, atol=1e-10 * n)
    np.testing.assert_allclose(dec.jacobi.a, a, atol=1e-10 * n)
    assert dec.complement_dim == n - 3
    np.testing.assert_allclose(dec.complement_values, -1.0, atol=1e-10)


@pytest.mark.parametrize("n", [4, 16, 64])
def test_root_placement_rank_two(n):
    g = float(n)
    J = reduce(lollipop(n), OracleSpec(n, g)).jacobi
    np.testing.assert_allclose(J.b, [n - 2, g], atol=1e-10 * n)
    np.testing.assert_allclose(J.a, [np.sqrt(n - 1)], atol=1e-12 * n)


@pytest.mark.parametrize("base", [make_cycle(8), make_complete(6), make_cycle(5)])
def test_cone_of_regular_graph(base):
    d = base.regular_degree()
    dec = reduce(attach_tail(make_cone(base)), None)
    np.testing.assert_allclose(dec.jacobi.b, [d, 0.0], atol=1e-12)
    np.testing.assert_allclose(dec.jacobi.a, [np.sqrt(base.n)], atol=1e-12)


def _check_decomposition(sys, oracle, L):
    dec = reduce(sys, oracle)
    Q = dec.basis(L)
    H = assemble(sys, oracle, L).matrix
    gram = Q.T @ Q
    assert np.abs(gram - np.eye(len(Q))).max() <= 1e-12
    assert np.abs(Q.T @ H @ Q - dec.block_form(L)).max() <= 1e-10 * max(1.0, np.abs(H).max())
    assert dec.complement_dim + dec.jacobi.K == sys.n
    return dec


@pytest.mark.parametrize("n", [4, 16, 64, 256])
def test_orthogonality_and_block_form(n):
    _check_decomposition(lollipop(n), OracleSpec(1, float(n)), 64)


def test_eigenvalues_outside_band_partition():
    n = 32
    sys, oracle = lollipop(n), OracleSpec(1, float(n))
    dec = reduce(sys, oracle)
    from tailwalk.jost import point_spectrum

    lam = np.linalg.eigvalsh(assemble(sys, oracle, 4 * n).matrix)
    outside = np.sort(lam[np.abs(lam) > 2.0 + 1e-6])
    ours = [v for v in dec.complement_values if abs(v) > 2.0] + [s.lam for s in point_spectrum(dec.jacobi)]
    np.testing.assert_allclose(outside, np.sort(ours), atol=1e-6)


@st.composite
def tailed_graphs(draw):
    n = draw(st.integers(2, 10))
    edges = {(draw(st.integers(1, k - 1)), k) for k in range(2, n + 1)}
    extra = draw(st.lists(st.tuples(st.integers(1, n), st.integers(1, n)), max_size=15))
    edges |= {(min(u, v), max(u, v)) for u, v in extra if u != v}
    root = draw(st.integers(1, n))
    w = draw(st.integers(1, n))
    gamma = draw(st.floats(0.0, 20.0))
    return attach_tail(RootedGraph(FiniteGraph(n, frozenset(edges)), root)), OracleSpec(w, gamma)


@settings(max_examples=60, deadline=None)
@given(tailed_graphs())
def test_decomposition_on_random_graphs(case):
    sys, oracle = case
    dec = _check_decomposition(sys, oracle, 12)
    assert np.all(dec.jacobi.a > 0)
    # the root is the Jacobi vector next to the tail
    np.testing.assert_allclose(np.abs(dec.krylov[-1]), np.eye(sys.n)[sys.root - 1])


def test_jacobi_basis_matches_hand_construction():
    n = 10
    dec = reduce(lollipop(n), OracleSpec(1, float(n)))
    uniform = np.r_[np.ones(n - 1), 0.0] / np.sqrt(n - 1)
    e1 = np.eye(n)[0]
    interior = (np.sqrt(n - 1) * e1 - uniform) / np.sqrt(n - 2)
    np.testing.assert_allclose(dec.krylov, [interior, uniform, np.eye(n)[-1]], atol=1e-12)


def test_jacobi_coords_of_target_and_initial_clique_vertex():
    n = 10
    sys = lollipop(n)
    dec = reduce(sys, OracleSpec(1, float(n)))
    L = 5
    jac, comp = dec.to_jacobi_coords(basis_state(1, n + L, n))
    # <e_1, uniform on 1..n-1> = (n-1)^(-1/2) fixes the split
    np.testing.assert_allclose(jac[:3], [np.sqrt((n - 2) / (n - 1)), np.sqrt(1 / (n - 1)), 0.0], atol=1e-12)
    np.testing.assert_allclose(np.linalg.norm(comp), 0.0, atol=1e-12)
    z1 = principal_state(sys.graph, n + L)
    jac, comp = dec.to_jacobi_coords(z1)
    np.testing.assert_allclose(jac[:3], [0.0, np.sqrt((n - 1) / n), np.sqrt(1 / n)], atol=1e-12)
    u = np.zeros(n + L, dtype=complex)
    u[: n - 1] = 1 / np.sqrt(n - 1)
    from tailwalk.hamiltonian import QuantumState

    jac, _ = dec.to_jacobi_coords(QuantumState(u, n))
    np.testing.assert_allclose(jac, np.eye(n + L - dec.complement_dim)[1], atol=1e-12)


def test_jacobi_coords_root_placement():
    n = 9
    dec = reduce(lollipop(n), OracleSpec(n, float(n)))
    z1 = principal_state(make_complete(n), n + 3)
    jac, comp = dec.to_jacobi_coords(z1)
    np.testing.assert_allclose(jac, [np.sqrt((n - 1) / n), np.sqrt(1 / n), 0, 0, 0], atol=1e-12)
    assert np.linalg.norm(comp) < 1e-12


def test_coords_preserve_norm_and_roundtrip():
    rng = np.random.default_rng(7)
    sys = attach_tail(make_cone(make_cycle(6)))
    dec = reduce(sys, OracleSpec(2, 3.0))
    from tailwalk.hamiltonian import QuantumState

    amp = rng.normal(size=sys.n + 6) + 1j * rng.normal(size=sys.n + 6)
    psi = QuantumState(amp / np.linalg.norm(amp), sys.n)
    jac, comp = dec.to_jacobi_coords(psi)
    assert abs(np.vdot(jac, jac).real + np.vdot(comp, comp).real - 1.0) <= 1e-12
    back = dec.from_jacobi_coords(jac, comp)
    np.testing.assert_allclose(back.amplitudes, psi.amplitudes, atol=1e-12)
    with pytest.raises(ValueError):
        dec.to_jacobi_coords(QuantumState(amp, sys.n + 1))


def test_lanczos_breakdown_on_clique():
    H = make_complete(20).adjacency()
    start = np.eye(20)[-1]
    V, alpha, beta = lanczos(H, start)
    assert len(V) == 2


def test_jacobi_validation():
    with pytest.raises(JacobiError):
        EventuallyFreeJacobi([0.0, 1.0], [-1.0])
    with pytest.raises(JacobiError):
        EventuallyFreeJacobi([0.0, 1.0], [])
    with pytest.raises(JacobiError):
        EventuallyFreeJacobi([np.inf], [])
    J = EventuallyFreeJacobi([1.0, 2.0], [0.5])
    np.testing.assert_array_equal(J.matrix(4), [[1, 0.5, 0, 0], [0.5, 2, 1, 0], [0, 1, 0, 1], [0, 0, 1, 0]])


def test_decomposition_export():
    d = reduce(lollipop(5), OracleSpec(1, 5.0)).to_dict()
    assert d["jacobi"]["K"] == 3
    assert d["jacobi_basis"][-1] == {"support": [5], "values": [1.0]}
    assert len(d["complement_eigenvalues"]) == 2
