import json
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, special

from helpers import integrate_with_l1
from linrx.ensembles import (
    CorrelationSpec,
    EnsembleSpec,
    GenericKernel,
    dump_ensemble_json,
    kernel_handle,
    kernel_K,
    kernel_K0,
    kernel_K0_leibniz,
    load_ensemble_json,
    mellin_omega,
    mellin_omega_exact,
    normalization_alpha,
    normalization_alpha_mc,
    poly_coefficients,
    poly_p,
    sample_factors_product,
    weight_omega,
    weight_q,
)
from linrx.errors import ConfigError, InadmissibleParameters
from linrx.linalg_rng import make_rng
from linrx.quadrature import quad_adaptive

G1 = EnsembleSpec.gaussian(3, (0,))

# ---------------------------------------------------------------- validation


@pytest.mark.parametrize(
    "build, field",
    [
        (lambda: EnsembleSpec.gaussian(1, (0,)), "n_t"),
        (lambda: EnsembleSpec.gaussian(4, (1, -2)), "nu[1]"),
        (lambda: EnsembleSpec.gaussian(4, ()), "nu"),
        (lambda: EnsembleSpec.gaussian(4, (1.5,)), "nu[0]"),
        (lambda: EnsembleSpec.jacobi(4, (2, 3), (3, 2)), "mu[1]"),
        (lambda: EnsembleSpec.jacobi(4, (2,), (1,)), "mu[0]"),
        (lambda: EnsembleSpec.jacobi(4, (2,), (2,)), "mu"),
        (lambda: EnsembleSpec.jacobi(4, (2, 3), (3,)), "mu"),
        (lambda: EnsembleSpec("wishart", 4, (1,)), "kind"),
    ],
)
def test_invalid_specs_name_the_field(build, field):
    with pytest.raises(ConfigError) as info:
        build()
    assert info.value.field == field


def test_dimensions():
    spec = EnsembleSpec.gaussian(8, (5, 2, 2))
    assert spec.M == 3 and spec.n_r == 10
    assert EnsembleSpec.jacobi(4, (1, 3), (2, 5)).support == 1.0


def test_json_round_trip():
    spec = EnsembleSpec.jacobi(4, (1, 3), (2, 5))
    corr = CorrelationSpec(4, np.diag([1.0, 2.0, 3.0, 4.0]))
    spec2, corr2 = load_ensemble_json(dump_ensemble_json(spec, corr))
    assert spec2 == spec
    assert np.allclose(corr2.matrix, corr.matrix)
    assert corr2.sigma_k == pytest.approx((1.0, 0.5, 1 / 3, 0.25))


def test_json_complex_correlation_and_errors():
    doc = {"kind": "gaussian", "n_t": 2, "M": 1, "nu": [0], "sigma_t": [[2, [0, 1]], [[0, -1], 2]]}
    spec, corr = load_ensemble_json(json.dumps(doc))
    assert corr.sigma_k == pytest.approx((2 / 3, 2 / 3))
    with pytest.raises(ConfigError):
        load_ensemble_json("{not json")
    with pytest.raises(ConfigError) as info:
        load_ensemble_json(json.dumps({"kind": "gaussian", "n_t": 2, "M": 2, "nu": [0]}))
    assert info.value.field == "M"


@pytest.mark.parametrize(
    "matrix",
    [
        [[1.0, 0.5], [0.4, 1.0]],  # not Hermitian
        [[1.0, 2.0], [2.0, 1.0]],  # indefinite
        [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],  # wrong size
    ],
)
def test_bad_correlation_rejected(matrix):
    with pytest.raises(ConfigError) as info:
        CorrelationSpec(2, matrix)
    assert info.value.field == "sigma_t"


def test_identity_correlation():
    corr = CorrelationSpec.identity(3)
    assert corr.is_identity and corr.sigma_k == (1.0, 1.0, 1.0) and corr.sqrt() is None


# ---------------------------------------------------------------- weight


def test_weight_examples():
    assert weight_omega(EnsembleSpec.gaussian(2, (0,)), 1.0) == pytest.approx(math.exp(-1), rel=1e-14)
    assert weight_omega(EnsembleSpec.gaussian(2, (3,)), 2.0) == pytest.approx(8 * math.exp(-2), rel=1e-14)
    ref, _ = integrate.quad(lambda t: math.exp(-t) * math.exp(-1 / t) / t, 0, np.inf, epsabs=0, epsrel=1e-12)
    v = weight_omega(EnsembleSpec.gaussian(2, (0, 0)), 1.0)
    assert abs(v - ref) < 1e-10
    assert abs(v - 2 * special.k0(2.0)) < 1e-12


def test_jacobi_weight_vanishes_on_and_beyond_support():
    spec = EnsembleSpec.jacobi(2, (0, 1), (2, 3))
    assert np.all(weight_omega(spec, np.array([1.0, 1.5, 10.0])) == 0.0)
    assert weight_omega(spec, 0.5) > 0


@pytest.mark.parametrize(
    "spec",
    [EnsembleSpec.gaussian(2, (0, 3)), EnsembleSpec.gaussian(2, (1, 1, 2)), EnsembleSpec.jacobi(2, (1, 2), (3, 4))],
)
def test_weight_mass_is_mellin_at_one(spec):
    v, _ = integrate_with_l1(spec, lambda x: weight_omega(spec, x))
    assert v == pytest.approx(mellin_omega(spec, 1.0), rel=1e-9)


def test_mellin_exact_matches_float():
    spec = EnsembleSpec.jacobi(3, (1, 2), (3, 4))
    for k in range(1, 6):
        assert float(mellin_omega_exact(spec, k)) == pytest.approx(mellin_omega(spec, k), rel=1e-14)


# ---------------------------------------------------------------- polynomials and q_l


def test_poly_examples():
    assert poly_p(G1, 0, 17.3) == 1.0
    assert poly_p(G1, 1, 3.0) == 2.0
    assert poly_p(G1, 2, 0.0) == 2.0
    assert poly_coefficients(G1, 2) == (Fraction(2), Fraction(-4), Fraction(1))


def test_poly_coefficients_are_exact_fractions():
    spec = EnsembleSpec.gaussian(6, (5, 2, 2))
    for l in range(6):
        coeffs = poly_coefficients(spec, l)
        assert all(isinstance(c, Fraction) for c in coeffs)
        assert coeffs[-1] == 1


def test_poly_large_degree_survives_cancellation():
    # n_t = 32: the alternating sum cancels badly near the roots
    spec = EnsembleSpec.gaussian(32, (0,))
    coeffs = poly_coefficients(spec, 31)
    for x in [0.5, 3.3, 17.0, 60.0, 110.0]:
        with mpmath.workdps(80):
            ref = mpmath.mpf(0)
            for c in reversed(coeffs):
                ref = ref * mpmath.mpf(x) + mpmath.mpf(c.numerator) / c.denominator
        assert poly_p(spec, 31, x) == pytest.approx(float(ref), rel=1e-10)


def test_weight_q_examples():
    spec = EnsembleSpec.gaussian(3, (2, 1))
    x = np.array([0.3, 1.0, 4.0])
    assert np.allclose(weight_q(spec, 0, x), weight_omega(spec, x) / mellin_omega(spec, 1), rtol=1e-13)
    assert abs(weight_q(G1, 1, 1.0)) < 1e-14
    x = np.linspace(0.1, 8, 9)
    assert np.allclose(weight_q(G1, 1, x), (x - 1) * np.exp(-x), rtol=1e-12, atol=1e-15)


def test_p2_q1_orthogonal():
    v, l1 = integrate_with_l1(G1, lambda x: poly_p(G1, 2, x) * weight_q(G1, 1, x))
    assert abs(v) < 1e-12 * max(1, l1)


def test_biorthogonality_gaussian_two_layers():
    spec = EnsembleSpec.gaussian(5, (1, 2))
    for a in range(5):
        for b in range(5):
            v, l1 = integrate_with_l1(spec, lambda x: poly_p(spec, a, x) * weight_q(spec, b, x))
            assert abs(v - (a == b)) < 1e-8 * max(1.0, l1), (a, b, v)


def test_jacobi_q_beyond_smoothness_raises():
    spec = EnsembleSpec.jacobi(4, (0,), (2,))
    with pytest.raises(InadmissibleParameters):
        weight_q(spec, 2, 0.5)
    with pytest.raises(InadmissibleParameters):
        kernel_K0(spec, 0.5)


# ---------------------------------------------------------------- kernel


def test_k0_example_and_closed_form():
    spec = EnsembleSpec.gaussian(2, (0,))
    assert kernel_K0(spec, 1.0) == pytest.approx(math.exp(-1), rel=1e-13)
    y = np.linspace(0.05, 9, 15)
    assert np.allclose(kernel_K0(spec, y), (2 - y) * np.exp(-y), rtol=1e-12, atol=1e-15)


def test_k0_normalisation_and_monomials():
    spec = EnsembleSpec.gaussian(4, (5, 2, 2))
    v, _ = integrate_with_l1(spec, lambda y: kernel_K0(spec, y))
    assert abs(v - 1) < 1e-7
    for m in range(1, 4):
        v, l1 = integrate_with_l1(spec, lambda y: y**m * kernel_K0(spec, y))
        assert abs(v) < 1e-7 * l1, m


def test_k0_two_routes():
    for spec in [EnsembleSpec.gaussian(5, (5, 2, 2)), EnsembleSpec.jacobi(3, (1, 2), (4, 6))]:
        y = np.linspace(0.02, 0.98, 11) * (1 if spec.support == 1 else 40)
        direct, leibniz = kernel_K0(spec, y), kernel_K0_leibniz(spec, y)
        # the Leibniz sum cancels near the Jacobi edge: compare on the kernel's scale
        assert np.max(np.abs(direct - leibniz)) < 1e-9 * np.max(np.abs(direct))


def test_k0_at_jacobi_edge_against_mpmath():
    spec = EnsembleSpec.jacobi(3, (1, 2), (4, 6))
    pref = 1 / (math.factorial(2) * mellin_omega(spec, 1))
    with mpmath.workdps(40):
        ref = float(pref * mpmath.meijerg([[-3], [4, 6]], [[1, 2], [-1]], 0.98))
    assert kernel_K0(spec, 0.98) == pytest.approx(ref, rel=1e-10)


def test_kernel_sum_matches_integral_form():
    assert kernel_K(G1, 0.5, 1.5, "polya") == pytest.approx(kernel_K(G1, 0.5, 1.5, "sum"), abs=1e-8)


def test_kernel_at_zero_matches_k0():
    spec = EnsembleSpec.gaussian(4, (1, 2))
    y = np.geomspace(0.05, 80, 20)
    assert np.allclose(kernel_K(spec, 0.0, y, "sum"), kernel_K0(spec, y), rtol=0, atol=1e-8)
    for yy in y[::4]:
        assert kernel_K(spec, 0.0, yy, "polya") == pytest.approx(kernel_K0(spec, yy), abs=1e-8)


@pytest.mark.parametrize("spec", [EnsembleSpec.gaussian(3, (1, 2)), EnsembleSpec.jacobi(3, (0, 1), (3, 4))])
def test_kernel_representations_agree_on_grid(spec):
    top = 1.0 if spec.support == 1 else 30.0
    for x in [-2.0, 0.0, 0.3 * top, 0.8 * top]:
        for y in np.array([0.05, 0.3, 0.6, 0.9]) * top:
            a = kernel_K(spec, x, y, "polya")
            b = kernel_K(spec, x, y, "sum")
            assert abs(a - b) < 1e-7 * max(1.0, abs(b)), (x, y, a, b)


def test_kernel_reproducing_property():
    spec = EnsembleSpec.gaussian(2, (1,))
    for x, y in [(0.5, 1.5), (2.0, 0.7), (0.0, 3.0)]:
        v, _ = quad_adaptive(lambda t: kernel_K(spec, x, t, "sum") * kernel_K(spec, t, y, "sum"), 0, math.inf, 1e-10)
        assert v == pytest.approx(kernel_K(spec, x, y, "sum"), abs=1e-6)


def test_kernel_handle_views():
    spec = EnsembleSpec.gaussian(3, (1,))
    h = kernel_handle(spec)
    assert h.n_t == 3
    assert h.K0(2.0) == pytest.approx(kernel_K0(spec, 2.0))
    assert h.K_shift(0.5, 2.0) == pytest.approx(kernel_K(spec, -2.0, 2.0, "sum"))


def test_generic_kernel_from_table():
    spec = EnsembleSpec.gaussian(2, (0,))
    y = np.linspace(0, 40, 4001)
    g = GenericKernel.from_table(y, kernel_K0(spec, y), {1.0: kernel_K(spec, -1.0, y, "sum")})
    t = np.array([0.33, 2.71, 9.9])
    assert np.allclose(g.k0(t), (2 - t) * np.exp(-t), atol=1e-9)
    assert g.k0(np.array([50.0]))[0] == 0.0
    with pytest.raises(ConfigError):
        g.k_shift(2.0, t)
    with pytest.raises(ConfigError):
        GenericKernel.from_table([0.1, 1, 2, 3], [1, 1, 1, 1])
    generic = EnsembleSpec.generic(2, g)
    assert generic.support == 40.0
    with pytest.raises(ConfigError):
        generic.to_dict()


# ---------------------------------------------------------------- normalisation and sampling


def test_alpha_closed_forms():
    assert normalization_alpha(EnsembleSpec.gaussian(4, (0,))) == 1.0
    spec = EnsembleSpec.gaussian(8, (5, 2, 2))
    assert normalization_alpha(spec) / 8 == pytest.approx(10 / (8 * 13 * 10 * 10), rel=1e-15)


def test_alpha_closed_form_confirmed_by_mc():
    spec = EnsembleSpec.gaussian(8, (5, 2, 2))
    mc, _ = normalization_alpha_mc(spec, samples=10_000, seed=3)
    assert abs(mc / normalization_alpha(spec) - 1) < 0.02


def test_jacobi_alpha_reproducible_and_near_exact():
    spec = EnsembleSpec.jacobi(2, (0,), (1,))
    a1 = normalization_alpha(spec, seed=11)
    assert a1 == normalization_alpha(spec, seed=11)
    mc, se = normalization_alpha_mc(spec, seed=11)
    # E tr H^dagger H = n_t prod (n + nu_j)/(n + mu_j)
    exact = spec.n_t * spec.n_r / (2 * 2 / 3)
    assert abs(mc - exact) < 4 * se


def test_sampled_shapes_and_trace_moment():
    spec = EnsembleSpec.gaussian(8, (5, 2, 2))
    h = sample_factors_product(spec, make_rng(5), size=10_000)
    assert h.shape == (10_000, 10, 8)
    tr = np.sum(np.abs(h) ** 2, axis=(-2, -1))
    assert tr.mean() == pytest.approx(8 * 13 * 10 * 10, rel=0.02)


def test_jacobi_sample_dimensions_and_contraction():
    spec = EnsembleSpec.jacobi(3, (1, 2), (2, 4))
    h = sample_factors_product(spec, make_rng(1), size=200)
    assert h.shape == (200, 5, 3)
    assert np.linalg.norm(h, ord=2, axis=(-2, -1)).max() <= 1 + 1e-12


# ---------------------------------------------------------------- properties

_small_gauss = st.builds(
    lambda n, nu: EnsembleSpec.gaussian(n, nu),
    st.integers(2, 6),
    st.lists(st.integers(0, 6), min_size=1, max_size=3),
)


@given(_small_gauss, st.integers(0, 5), st.floats(-3, 50))
def test_poly_is_monic_with_exact_coefficients(spec, l, x):
    l = min(l, spec.n_t)
    coeffs = poly_coefficients(spec, l)
    assert coeffs[-1] == 1
    exact = sum(c * Fraction(x) ** k for k, c in enumerate(coeffs))
    scale = sum(abs(c) * abs(Fraction(x)) ** k for k, c in enumerate(coeffs))
    assert abs(Fraction(poly_p(spec, l, x)) - exact) <= Fraction(1, 10**8) * max(abs(exact), Fraction(1)) + scale * Fraction(1, 10**15)


@given(_small_gauss)
def test_mellin_ratios_are_factorial_ratios(spec):
    for k in range(1, 4):
        expected = Fraction(math.prod(math.factorial(k + v - 1) for v in spec.nu))
        assert mellin_omega_exact(spec, k) == expected


def test_k0_error_estimates_cover_mpmath():
    spec = EnsembleSpec.jacobi(4, (1,), (12,))
    y = np.array([0.3, 0.7, 0.9])
    v, err = kernel_K0(spec, y, with_error=True)
    assert np.array_equal(v, kernel_K0(spec, y))
    pref = 1 / (math.factorial(3) * mellin_omega(spec, 1))
    for yi, vi, ei in zip(y, v, err):
        with mpmath.workdps(30):
            ref = float(pref * mpmath.meijerg([[-4], [12]], [[1], [-1]], yi))
        assert abs(vi - ref) <= ei
    h = kernel_handle(spec)
    hv, he = h.K0_with_error(y)
    assert np.array_equal(hv, v) and np.array_equal(he, err)
