import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import eval_chebyt, eval_gegenbauer

from sphereflow.errors import NotPositiveSemidefiniteError
from sphereflow.kernels import exponential_kernel_coeffs, heat_family, heat_kernel_coeffs
from sphereflow.spectral import (
    ZonalCoefficients,
    ZonalFunction,
    build_quadrature,
    check_admissibility,
    check_sqrt_positivity,
    convolve,
    decompose_kernel,
    delta_approx_error,
    dirichlet_identity_check,
    gegenbauer_eval,
    heat_semigroup_apply,
    l2_norm_squared,
    laplacian_eigenvalue,
    reconstruct_derivative,
    reconstruct_kernel,
    sqrt_kernel,
    uniform_approx_error,
    zonal_derivative_table,
    zonal_harmonic_eval,
    zonal_norms,
    zonal_table,
)

from oracles import direct_convolution

DIMS = (2, 3, 5)


def test_gegenbauer_matches_scipy():
    t = np.linspace(-1, 1, 41)
    for lam in (0.5, 1.0, 1.5, 3.0):
        for l in range(0, 25):
            np.testing.assert_allclose(gegenbauer_eval(lam, l, t), eval_gegenbauer(l, lam, t),
                                       rtol=1e-12, atol=1e-12 * eval_gegenbauer(l, lam, 1.0))


def test_gegenbauer_rejects_nonpositive_parameter():
    with pytest.raises(ValueError):
        gegenbauer_eval(0.0, 2, 0.3)


def test_zonal_harmonic_examples():
    assert zonal_harmonic_eval(3, 2, 0.5) == pytest.approx(-0.625, abs=1e-15)
    assert zonal_harmonic_eval(2, 3, 0.0) == 0.0
    assert zonal_harmonic_eval(2, 0, 0.3) == 1.0
    t = np.linspace(-1, 1, 11)
    np.testing.assert_allclose(zonal_harmonic_eval(2, 4, t), 2 * eval_chebyt(4, t), atol=1e-14)
    # n = 3: Z_l = (2l+1) P_l
    np.testing.assert_allclose(zonal_harmonic_eval(3, 5, t), 11 * eval_gegenbauer(5, 0.5, t), atol=1e-13)


def test_zonal_norms_are_harmonic_space_dimensions():
    from math import comb

    for n in DIMS:
        for l in range(1, 12):
            dim = comb(l + n - 1, n - 1) - comb(l + n - 3, n - 1)
            assert zonal_norms(n, 12)[l] == pytest.approx(dim)


def test_quadrature_moments():
    for n in (2, 3, 4, 7):
        g = build_quadrature(n, 20)
        assert g.integrate(np.ones(g.M)) == pytest.approx(1.0, abs=1e-14)
        assert g.integrate(g.nodes**2) == pytest.approx(1.0 / n, abs=1e-14)
        assert g.integrate(g.nodes**3) == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("n", DIMS)
def test_zonal_orthogonality(n):
    L = 20
    g = build_quadrature(n, 2 * L + 8)
    Z = zonal_table(n, L, g.nodes)
    G = (Z * g.weights) @ Z.T
    np.testing.assert_allclose(G, np.diag(zonal_norms(n, L)), atol=1e-10)


@pytest.mark.parametrize("n", DIMS)
def test_derivative_table_matches_finite_differences(n):
    t = np.linspace(-0.9, 0.9, 13)
    h = 1e-6
    fd = (zonal_table(n, 10, t + h) - zonal_table(n, 10, t - h)) / (2 * h)
    np.testing.assert_allclose(zonal_derivative_table(n, 10, t), fd, rtol=1e-6, atol=1e-5)


def test_laplacian_eigenvalues_on_finite_differences():
    # Δ f = f'' + (n-2) cot θ f' for zonal f(θ)
    for n in (3, 5):
        for l in (1, 2, 5):
            th, h = 0.8, 1e-4
            f = lambda s: zonal_harmonic_eval(n, l, np.cos(s))
            d1 = (f(th + h) - f(th - h)) / (2 * h)
            d2 = (f(th + h) - 2 * f(th) + f(th - h)) / h**2
            assert d2 + (n - 2) / np.tan(th) * d1 == pytest.approx(laplacian_eigenvalue(n, l) * f(th), rel=1e-5, abs=1e-5)


@pytest.mark.parametrize("n", DIMS)
def test_decompose_reconstruct_round_trip(n):
    f = lambda t: np.exp(1.3 * t) * (1 + t**2)
    c = decompose_kernel(f, n, 40)
    t = np.linspace(-1, 1, 101)
    np.testing.assert_allclose(reconstruct_kernel(c, t), f(t), atol=1e-12)
    df = lambda t: np.exp(1.3 * t) * (1.3 * (1 + t**2) + 2 * t)
    np.testing.assert_allclose(reconstruct_derivative(c, t), df(t), atol=1e-10)


def test_zonal_function_detects_inconsistent_coeffs():
    c = ZonalCoefficients(3, [1.0, 0.5])
    g = build_quadrature(3, 10)
    with pytest.raises(ValueError):
        ZonalFunction(g, np.zeros(10), c)
    assert ZonalFunction.from_coeffs(c, g).values.shape == (10,)


def test_coefficients_csv_round_trip():
    c = exponential_kernel_coeffs(3, 0.3, 12)
    text = c.to_csv()
    assert text.splitlines()[0] == "n,L"
    assert ZonalCoefficients.from_csv(text) == c
    bad = text.replace("\n4,", "\n9,", 1)
    with pytest.raises(ValueError):
        ZonalCoefficients.from_csv(bad)


def test_degree_limits():
    with pytest.raises(ValueError):
        zonal_norms(3, 10_000)
    with pytest.raises(ValueError):
        zonal_table(1, 3, 0.0)


def test_convolution_dimension_mismatch():
    with pytest.raises(ValueError):
        convolve(ZonalCoefficients(2, [1.0]), ZonalCoefficients(3, [1.0]))


def test_funk_hecke_example_on_circle():
    # V(t) = t, f(t) = t on S^1: (V*f)(x) = <x, p>/2
    V = decompose_kernel(lambda t: t, 2, 4)
    f = decompose_kernel(lambda t: t, 2, 4)
    t = np.linspace(-1, 1, 9)
    np.testing.assert_allclose(reconstruct_kernel(convolve(V, f), t), t / 2, atol=1e-14)


@pytest.mark.parametrize("n", DIMS)
def test_convolution_matches_direct_quadrature(n):
    rng = np.random.default_rng(n)
    a, b, c = rng.uniform(-2, 2, 3)
    V = lambda t: np.exp(a * t) + b * t**3
    f = lambda t: np.cos(c * t) + t
    L = 32
    h = convolve(decompose_kernel(V, n, L, 72), decompose_kernel(f, n, L, 72))
    th = np.linspace(0, np.pi, 7)
    ref = direct_convolution(V, f, n, th)
    np.testing.assert_allclose(reconstruct_kernel(h, np.cos(th)), ref, rtol=1e-10, atol=1e-12)


def test_sqrt_kernel_rejects_negative():
    with pytest.raises(NotPositiveSemidefiniteError):
        sqrt_kernel(ZonalCoefficients(3, [1.0, -0.1]))
    # tiny negative round-off is clamped
    assert sqrt_kernel(ZonalCoefficients(3, [1.0, -1e-13])).coeffs[1] == 0.0


def test_heat_semigroup_composition_exact():
    f = decompose_kernel(lambda t: np.exp(t), 3, 20)
    a = heat_semigroup_apply(heat_semigroup_apply(f, 0.1), 0.25)
    b = heat_semigroup_apply(f, 0.35)
    np.testing.assert_allclose(a.coeffs, b.coeffs, rtol=1e-13, atol=0)
    with pytest.raises(ValueError):
        heat_semigroup_apply(f, -1.0)


def test_l2_norm_matches_quadrature():
    for n in DIMS:
        f = lambda t: np.sin(2 * t) + 1
        c = decompose_kernel(f, n, 30)
        g = build_quadrature(n, 80)
        assert l2_norm_squared(c) == pytest.approx(g.integrate(f(g.nodes) ** 2), rel=1e-12)


@pytest.mark.parametrize("n", (2, 3))
def test_dirichlet_identity(n):
    u = decompose_kernel(lambda t: np.exp(0.7 * t) - t**2, n, 32)
    V = heat_kernel_coeffs(n, 0.05, 32)
    lhs, rhs = dirichlet_identity_check(u, V)
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_delta_approx_error_decreases():
    u = decompose_kernel(lambda t: np.exp(t), 3, 32)
    errs = [delta_approx_error(u, heat_kernel_coeffs(3, e, 32)) for e in (0.2, 0.1, 0.05, 0.025)]
    assert all(a > b for a, b in zip(errs, errs[1:]))


def test_uniform_approx_error():
    g = build_quadrature(3, 72)
    u = ZonalFunction.from_callable(lambda t: np.exp(t), g)
    r1 = uniform_approx_error(u, exponential_kernel_coeffs(3, 0.1, 32))
    r2 = uniform_approx_error(u, exponential_kernel_coeffs(3, 0.02, 96), L=32)
    assert r2.error < r1.error
    assert r1.positivity_ok and r2.positivity_ok
    # an under-resolved truncation is flagged
    assert not uniform_approx_error(u, exponential_kernel_coeffs(3, 0.02, 32)).positivity_ok


def test_admissibility_detects_failures():
    bad = lambda eps: ZonalCoefficients(3, np.r_[1.0, -0.1, np.ones(10) * eps])
    rep = check_admissibility(bad, [0.5, 0.1], 11)
    assert not rep.passed
    assert any("nonnegative" in f for f in rep.failures())
    assert any("summable" in f for f in rep.failures())


def test_admissibility_passes_heat():
    fam = heat_family(3)
    rep = check_admissibility(lambda e: fam(e, 64), [0.5, 0.2, 0.1, 0.05], 64)
    assert rep.passed, rep.failures()


coef_lists = st.lists(st.floats(-2, 2, allow_nan=False), min_size=1, max_size=12)


@settings(max_examples=100, deadline=None)
@given(coef_lists, coef_lists, st.sampled_from(DIMS))
def test_convolution_commutes(a, b, n):
    A, B = ZonalCoefficients(n, a), ZonalCoefficients(n, b)
    np.testing.assert_array_equal(convolve(A, B).coeffs, convolve(B, A).coeffs)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0, 3, allow_nan=False), min_size=1, max_size=12), st.sampled_from(DIMS))
def test_sqrt_square_identity(a, n):
    V = ZonalCoefficients(n, a)
    s = sqrt_kernel(V)
    np.testing.assert_allclose(convolve(s, s).coeffs, V.coeffs, rtol=1e-15, atol=1e-300)


@settings(max_examples=50, deadline=None)
@given(coef_lists, st.sampled_from(DIMS), st.floats(0.0, 1.0))
def test_heat_semigroup_contracts_l2(a, n, s):
    f = ZonalCoefficients(n, a)
    assert l2_norm_squared(heat_semigroup_apply(f, s)) <= l2_norm_squared(f) * (1 + 1e-14)


def test_sqrt_positivity_of_heat_kernel():
    assert check_sqrt_positivity(heat_kernel_coeffs(2, 0.1, 64)) > -1e-10
