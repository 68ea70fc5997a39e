import logging

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import eigvalsh_tridiagonal

from tailwalk.errors import ConsistencyError
from tailwalk.graph import OracleSpec, lollipop
from tailwalk.jost import (
    LaurentPoly,
    bound_subspace_overlap,
    jost_polynomials,
    jost_roots,
    make_bound_state,
    point_spectrum,
    real_roots,
    sign_profile,
    spectrum_to_dict,
)
from tailwalk.reduction import EventuallyFreeJacobi, reduce

FREE = EventuallyFreeJacobi([0.0], [])


def lollipop_jacobi(n, gamma=None, placement="clique-vertex"):
    gamma = float(n) if gamma is None else gamma
    w = n if placement == "root" else 1
    return reduce(lollipop(n), OracleSpec(w, gamma)).jacobi


def quartic(n, g):
    """Clique-vertex y_0, descending powers, up to a positive factor."""
    return np.array([2 - n, (n - 3) * g + 4 - 2 * n, (n - 3) * g + 5 - 2 * n, 3 - n - g, 1.0])


def cubic(n, g):
    """Root-placement y_0, descending powers, up to a positive factor."""
    return np.array([-g, (n - 2) * (g - 1), 2 - n - g, 1.0])


def y0_descending(J):
    return jost_polynomials(J)[0].ascending()[::-1]


def test_laurent_arithmetic():
    p = LaurentPoly(-1, [1.0, 0.0, 2.0])  # 1/x + 2x
    assert p.min_degree == -1 and p.max_degree == 1
    np.testing.assert_allclose(p(2.0), 0.5 + 4.0)
    q = p.times_spectral()  # (1/x + 2x)(x + 1/x) = 1 + x^-2 + 2x^2 + 2
    assert q.min_degree == -2
    np.testing.assert_allclose(q.coeffs, [1, 0, 3, 0, 2])
    assert (p - p).is_zero
    r = LaurentPoly(0, [0.0, 0.0, 1.0, 0.0])
    assert r.min_degree == 2 and list(r.coeffs) == [1.0]
    np.testing.assert_array_equal((3 * r).ascending(), [0, 0, 3])
    with pytest.raises(ValueError):
        p.ascending()


def test_free_matrix():
    ys = jost_polynomials(FREE)
    np.testing.assert_array_equal(ys[0].ascending(), [1.0])
    assert point_spectrum(FREE) == []
    assert sign_profile(FREE, [-1, 0.5, 1]) == (1, 1, 1)


def test_degree_condition():
    J = lollipop_jacobi(7)
    ys = jost_polynomials(J)
    assert len(ys) == J.K + 2
    for k in (J.K, J.K + 1):
        assert ys[k].min_degree == k and list(ys[k].coeffs) == [1.0]


def test_n4_closed_forms():
    y = y0_descending(lollipop_jacobi(4, placement="root"))
    np.testing.assert_allclose(y / y[0], np.array([-4, 6, -6, 1]) / -4, atol=1e-12)
    y = y0_descending(lollipop_jacobi(4))
    np.testing.assert_allclose(y / y[0], np.array([-2, 0, 1, -5, 1]) / -2, atol=1e-12)


@pytest.mark.parametrize("n", [4, 8, 16, 32, 64])
def test_closed_form_match(n):
    for placement, form in (("clique-vertex", quartic), ("root", cubic)):
        y = y0_descending(lollipop_jacobi(n, placement=placement))
        ref = form(n, float(n))
        assert len(y) == len(ref)
        np.testing.assert_allclose(y / y[0], ref / ref[0], atol=1e-10)
        # prefactor is positive, so signs agree as well
        assert np.sign(y[-1]) == np.sign(ref[-1])


def scalar_y0(J, x):
    """Independent scalar evaluation of the downward recurrence."""
    lam = x + 1 / x
    K = J.K
    y_next, y = x ** (K + 1), x**K
    for k in range(K, 0, -1):
        below = J.offdiag(k - 1) if k > 1 else 1.0
        y_next, y = y, ((lam - J.diag(k)) * y - J.offdiag(k) * y_next) / below
    return y


@pytest.mark.parametrize("x", [-0.9, -0.3, 0.05, 0.4, 0.99])
def test_polynomial_matches_scalar_recurrence(x):
    J = EventuallyFreeJacobi([0.3, -1.2, 2.0, 0.5], [0.7, 1.4, 0.9])
    y0 = jost_polynomials(J)[0]
    np.testing.assert_allclose(y0(x), scalar_y0(J, x), rtol=1e-10, atol=1e-12)


def truncated_outside(J, L, cut=2.05):
    d, e = J.bands(J.K + L)
    lam = eigvalsh_tridiagonal(d, e)
    return np.sort(lam[np.abs(lam) > cut])


@pytest.mark.parametrize("n", [16, 64, 256])
@pytest.mark.parametrize("placement", ["clique-vertex", "root"])
def test_spectrum_matches_dense_truncation(n, placement):
    J = lollipop_jacobi(n, placement=placement)
    states = point_spectrum(J)
    assert len(states) == 2
    assert states[0].lam > states[1].lam
    np.testing.assert_allclose(sorted(s.lam for s in states), truncated_outside(J, 4 * n), atol=1e-6)
    for s in states:
        assert abs(s.lam - (s.x + 1 / s.x)) == 0.0
        assert 0 < s.x < 1
        assert s.residual(J) <= 1e-8


def test_roots_match_numpy_roots():
    J = lollipop_jacobi(32)
    c = jost_polynomials(J)[0].ascending()
    ref = np.roots(c[::-1])
    ref = np.sort(ref[(np.abs(ref.imag) < 1e-9) & (np.abs(ref.real) < 1)].real)
    np.testing.assert_allclose(real_roots(c), ref, atol=1e-12)


def test_real_roots_close_pair():
    # two roots 1e-6 apart would slip between uniform grid points
    c = np.polynomial.polynomial.polyfromroots([0.3, 0.3 + 1e-6, -0.7, 4.0])
    np.testing.assert_allclose(real_roots(c), [-0.7, 0.3, 0.3 + 1e-6], atol=1e-12)
    assert real_roots([1.0]) == []
    assert real_roots([0.5, -1.0]) == [0.5]


@st.composite
def jacobi_matrices(draw):
    K = draw(st.integers(1, 6))
    b = draw(st.lists(st.floats(-6, 6), min_size=K, max_size=K))
    a = draw(st.lists(st.floats(0.2, 4), min_size=K - 1, max_size=K - 1))
    return EventuallyFreeJacobi(b, a)


@settings(max_examples=80, deadline=None)
@given(jacobi_matrices())
def test_random_jacobi_against_truncation(J):
    try:
        states = point_spectrum(J)
    except ConsistencyError:
        return
    # only states well away from the band are resolved by a finite truncation
    clear = sorted(s.lam for s in states if abs(s.x) < 0.9)
    lam = truncated_outside(J, 400, cut=2.0)
    for v in clear:
        assert np.min(np.abs(lam - v)) <= 1e-6
    # at most one bound state per Jacobi row on each side of the band
    assert len([s for s in states if s.lam > 2]) <= J.K
    assert len([s for s in states if s.lam < -2]) <= J.K
    for s in states:
        assert s.residual(J) <= 1e-8


@pytest.mark.parametrize("n", [16, 64, 256])
def test_sign_profile_table(n):
    J = lollipop_jacobi(n)
    assert sign_profile(J, [-1.0, 1.0 / n, 1.0]) == (1, -1, 1)


def test_sign_profile_closed_form_values():
    n = 64
    J = lollipop_jacobi(n)
    y0 = jost_polynomials(J)[0]
    # y_0(-1) : y_0(1) = (gamma + 1) : (2n - 7)gamma + 15 - 6n
    ratio = y0(-1.0) / y0(1.0)
    np.testing.assert_allclose(ratio, (n + 1) / ((2 * n - 7) * n + 15 - 6 * n), rtol=1e-10)


def test_root_asymptotics():
    dev = {}
    for n in (64, 256, 1024):
        states = point_spectrum(lollipop_jacobi(n))
        xs = sorted(s.x for s in states)
        scaled = [(x - 1 / n) * n**1.5 for x in xs]
        assert scaled[0] < 0 < scaled[1]
        dev[n] = max(abs(scaled[1] - 1), abs(scaled[0] + 1))
        if n == 64:
            assert all(0.5 <= abs(s) <= 1.5 for s in scaled)
    assert dev[1024] < dev[256] < dev[64]


@pytest.mark.parametrize("n", [16, 64, 256, 1024])
def test_eigenvalue_law(n):
    lams = [s.lam for s in point_spectrum(lollipop_jacobi(n))]
    np.testing.assert_allclose(lams, [n + np.sqrt(n), n - np.sqrt(n)], atol=3.0)


def test_recurrence_identity_and_tail_decay():
    J = lollipop_jacobi(64)
    for s in point_spectrum(J):
        length = J.K + 30
        y = s.components(length)
        d, e = J.bands(length)
        for k in range(1, length - 1):  # rows 2..length-1 (0-based k)
            row = e[k - 1] * y[k - 1] + d[k] * y[k] + e[k] * y[k + 1] - s.lam * y[k]
            assert abs(row) <= 1e-10 * np.abs(y).max()
        ks = np.arange(J.K + 1, length + 1)
        np.testing.assert_allclose(y[J.K :], s.x**ks, rtol=1e-14)
        np.testing.assert_allclose(np.linalg.norm(s.vector(length)), 1.0, atol=1e-12)


def test_norm_includes_geometric_tail():
    J = EventuallyFreeJacobi([3.0], [])
    (s,) = point_spectrum(J)
    # single diagonal defect: x = 1/3 exactly
    np.testing.assert_allclose(s.x, 1 / 3, atol=1e-14)
    v = s.vector(200)
    np.testing.assert_allclose(v @ v, 1.0, atol=1e-14)


def test_overlap_trivial_cases():
    J = lollipop_jacobi(64)
    states = point_spectrum(J)
    L = J.K + 40
    assert abs(bound_subspace_overlap(states[0].vector(L), states) - 1.0) <= 1e-12
    v = states[0].vector(L)
    w = states[1].vector(L)
    r = np.random.default_rng(0).normal(size=L)
    r -= (r @ v) * v + (r @ w) * w
    r /= np.linalg.norm(r)
    assert bound_subspace_overlap(r, states) <= 1e-20


def test_overlap_with_uniform_clique_state_increases():
    vals = []
    for n in (16, 64, 256):
        J = lollipop_jacobi(n)
        coords = np.eye(J.K + 40)[1]  # uniform state on the unmarked clique vertices
        vals.append(bound_subspace_overlap(coords, point_spectrum(J)))
    assert vals[0] < vals[1] < vals[2] <= 1 + 1e-12
    assert vals[2] >= 0.95


def test_boundary_root_is_flagged(caplog):
    # b_1 = 1 sits at the threshold for a bound state: root exactly at x = 1
    J = EventuallyFreeJacobi([1.0], [])
    roots = jost_roots(J)
    assert roots.inside == []
    assert roots.boundary == pytest.approx([1.0])
    with caplog.at_level(logging.WARNING):
        assert point_spectrum(J) == []
    assert "band edge" in caplog.text


def test_negative_bound_state():
    (s,) = point_spectrum(EventuallyFreeJacobi([-3.0], []))
    assert s.x < 0 and s.lam < -2


def test_make_bound_state_and_export():
    J = lollipop_jacobi(16)
    s = point_spectrum(J)[0]
    again = make_bound_state(J, s.x)
    np.testing.assert_array_equal(again.head, s.head)
    d = spectrum_to_dict(J)
    assert len(d["bound_states"]) == 2
    assert set(d["bound_states"][0]) == {"x", "lambda", "head", "norm"}
    assert len(d["jost_polynomials"]) == J.K + 2
