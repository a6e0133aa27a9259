"""Tests for the sampled ARMA representation and spectral factorization."""
import math

import numpy as np
import pytest
from scipy.signal import lfilter

from carmahf import (
    ASYMPTOTIC,
    EXACT_FACTORIZATION,
    CarmaModel,
    InvalidCovariance,
    ModelStructureError,
    NonInvertibleLimit,
    NonInvertibleModel,
    SampledArma,
    ar_polynomial,
    asymptotic_arma,
    autocovariance,
    eta_values,
    filtered_autocovariance,
    kernel,
    sampled_arma,
    simulate_batch,
    spectral_factorize,
    wold_coefficients,
)
from carmahf.levy import BrownianMotion
from helpers import ma_autocovariances, random_carma


def test_sampled_arma_validation():
    with pytest.raises(ModelStructureError):
        SampledArma(0.1, [2.0, 0.5], [1.0], 1.0, EXACT_FACTORIZATION)
    with pytest.raises(ModelStructureError):
        SampledArma(0.1, [1.0, 0.5], [1.0], -1.0, EXACT_FACTORIZATION)
    with pytest.raises(ModelStructureError):
        SampledArma(0.1, [1.0], [1.0], 1.0, "guess")
    with pytest.raises(ModelStructureError):
        SampledArma(-0.1, [1.0], [1.0], 1.0, EXACT_FACTORIZATION)


def test_sampled_arma_properties_and_json():
    arma = SampledArma(0.5, [1.0, -0.3], [1.0, 0.25], 2.0, ASYMPTOTIC)
    assert arma.p == 1
    assert arma.is_min_phase()
    np.testing.assert_allclose(arma.ma_roots(), [-4.0], rtol=1e-12)
    assert abs(arma.innovation_scale() - math.sqrt(2.0)) < 1e-15
    back = SampledArma.from_json(arma.to_json())
    assert back.delta == arma.delta
    np.testing.assert_array_equal(back.phi, arma.phi)
    np.testing.assert_array_equal(back.theta, arma.theta)
    assert back.provenance == ASYMPTOTIC
    assert abs(back.sigma2_delta - 2.0) < 1e-15
    flat = SampledArma(0.5, [1.0, -0.3], [1.0], 2.0, ASYMPTOTIC)
    assert flat.ma_roots().size == 0
    assert flat.is_min_phase()
    deep = SampledArma(0.5, [1.0, -0.3], [1.0, -2.0], 2.0, EXACT_FACTORIZATION)
    assert not deep.is_min_phase()


def test_ar_polynomial_car2():
    m = CarmaModel([-0.7, -1.2])
    delta = 0.3
    e1, e2 = math.exp(-0.7 * delta), math.exp(-1.2 * delta)
    np.testing.assert_allclose(
        ar_polynomial(m, delta), [1.0, -(e1 + e2), e1 * e2], rtol=1e-14
    )
    with pytest.raises(ModelStructureError):
        ar_polynomial(m, 0.0)


def test_ar_polynomial_complex_pair_is_real():
    m = CarmaModel([-0.5 + 1.5j, -0.5 - 1.5j])
    phi = ar_polynomial(m, 0.4)
    assert phi.dtype == np.float64
    # prod(1 - f z) carries the same coefficients as the monic prod(z - f)
    np.testing.assert_allclose(
        phi, np.poly(np.exp(0.4 * m.ar_roots)).real, rtol=1e-13
    )


def test_filtered_autocovariance_car1():
    lam, sigma, delta = -0.9, 1.3, 0.4
    m = CarmaModel([lam], sigma=sigma)
    out = filtered_autocovariance(m, delta)
    expected = sigma**2 * (1.0 - math.exp(2 * lam * delta)) / (-2.0 * lam)
    assert out.shape == (1,)
    assert abs(out[0] - expected) < 1e-13 * expected


def test_filtered_autocovariance_matches_float_route():
    # at moderate delta the double sum is stable in float arithmetic
    m = CarmaModel([-0.7, -1.2, -2.6], ma_mu=[3.0], sigma=1.1)
    delta = 1.0
    phi = ar_polynomial(m, delta)
    p = m.p
    direct = np.empty(p)
    for k in range(p):
        acc = 0.0
        for i in range(p + 1):
            for j in range(p + 1):
                acc += phi[i] * phi[j] * autocovariance(m, (k + i - j) * delta)
        direct[k] = acc
    out = filtered_autocovariance(m, delta)
    np.testing.assert_allclose(out, direct, rtol=1e-10)


def test_filtered_autocovariance_repeated_roots():
    # quadrature fallback against the closed form for a double root at -1
    sigma, delta = 1.2, 0.7
    m = CarmaModel([-1.0, -1.0], sigma=sigma)

    def gamma(t):
        return sigma**2 * math.exp(-abs(t)) * (1.0 + abs(t)) / 4.0

    phi = ar_polynomial(m, delta)
    direct = np.empty(2)
    for k in range(2):
        acc = 0.0
        for i in range(3):
            for j in range(3):
                acc += phi[i] * phi[j] * gamma((k + i - j) * delta)
        direct[k] = acc
    out = filtered_autocovariance(m, delta)
    np.testing.assert_allclose(out, direct, rtol=1e-8)


def test_filtered_autocovariance_rejects_bad_model():
    with pytest.raises(ModelStructureError):
        filtered_autocovariance(CarmaModel([0.2, -1.0]), 0.5)
    with pytest.raises(ModelStructureError):
        filtered_autocovariance(CarmaModel([-1.0]), -0.5)


def test_spectral_factorize_ma1_by_hand():
    # sigma2 (1 + theta^2) = 2.5, sigma2 theta = -1  ->  theta = -0.5, sigma2 = 2
    theta, sigma2 = spectral_factorize([2.5, -1.0])
    np.testing.assert_allclose(theta, [1.0, -0.5], atol=1e-12)
    assert abs(sigma2 - 2.0) < 1e-12


def test_spectral_factorize_ma2_round_trip():
    target = np.array([1.0, 0.4, 0.1])
    gamma = 1.7 * ma_autocovariances(target)
    theta, sigma2 = spectral_factorize(gamma)
    np.testing.assert_allclose(theta, target, rtol=1e-10)
    assert abs(sigma2 - 1.7) < 1e-10


def test_spectral_factorize_flips_roots_inside_circle():
    # the sequence of (1, -3) is matched by the minimum-phase (1, -1/3)
    gamma = ma_autocovariances([1.0, -3.0])
    theta, sigma2 = spectral_factorize(gamma)
    np.testing.assert_allclose(theta, [1.0, -1.0 / 3.0], rtol=1e-12)
    assert abs(sigma2 - 9.0) < 1e-10
    recon = sigma2 * ma_autocovariances(theta)
    np.testing.assert_allclose(recon, gamma, rtol=1e-12)


def test_spectral_factorize_white_noise():
    theta, sigma2 = spectral_factorize([3.0])
    np.testing.assert_array_equal(theta, [1.0])
    assert sigma2 == 3.0
    theta, sigma2 = spectral_factorize([3.0, 0.0, 0.0])
    np.testing.assert_array_equal(theta, [1.0])
    assert sigma2 == 3.0


def test_spectral_factorize_invalid_inputs():
    with pytest.raises(InvalidCovariance):
        spectral_factorize([])
    with pytest.raises(InvalidCovariance):
        spectral_factorize([-1.0, 0.2])
    with pytest.raises(InvalidCovariance):
        spectral_factorize([1.0, 0.9])  # density negative near omega = pi
    with pytest.raises(NonInvertibleLimit):
        spectral_factorize([2.0, 1.0])  # root exactly on the unit circle


def test_sampled_car1_is_white_after_filtering():
    lam, sigma, delta = -0.9, 1.3, 0.4
    m = CarmaModel([lam], sigma=sigma)
    arma = sampled_arma(m, delta)
    assert arma.p == 1
    np.testing.assert_allclose(arma.phi, [1.0, -math.exp(lam * delta)], rtol=1e-13)
    np.testing.assert_array_equal(arma.theta, [1.0])
    expected = sigma**2 * (1.0 - math.exp(2 * lam * delta)) / (-2.0 * lam)
    assert abs(arma.sigma2_delta - expected) < 1e-12 * expected


def test_sampled_arma_car2_shape_and_phase():
    m = CarmaModel([-0.7, -1.2])
    arma = sampled_arma(m, 0.125)
    assert arma.provenance == EXACT_FACTORIZATION
    assert arma.phi.size == 3 and arma.theta.size == 2
    assert arma.is_min_phase()
    assert arma.sigma2_delta > 0


def test_sampled_arma_reproduces_observation_autocovariance():
    # Phi and Theta together must reproduce gamma_Y on the grid: the ARMA
    # autocovariances from the Wold expansion match the model values
    m = CarmaModel([-0.7, -1.2], ma_mu=[3.0], sigma=1.2)
    delta = 0.25
    arma = sampled_arma(m, delta)
    psi = wold_coefficients(arma, 400)
    for k in range(4):
        approx = arma.sigma2_delta * np.dot(psi[: 400 - k], psi[k:])
        exact = autocovariance(m, k * delta)
        assert abs(approx - exact) < 1e-9 * exact


def test_asymptotic_arma_car2():
    m = CarmaModel([-0.7, -1.2], sigma=1.4)
    delta = 1e-3
    arma = asymptotic_arma(m, delta)
    assert arma.provenance == ASYMPTOTIC
    e = 2.0 - math.sqrt(3.0)
    np.testing.assert_allclose(arma.theta, [1.0, e], rtol=1e-12)
    expected = 1.4**2 * delta**3 / (6.0 * e)
    assert abs(arma.sigma2_delta - expected) < 1e-12 * expected


def test_asymptotic_arma_includes_model_ma_roots():
    mu, delta = 3.0, 0.01
    m = CarmaModel([-0.7, -1.2, -2.6], ma_mu=[mu])
    arma = asymptotic_arma(m, delta)
    roots = arma.ma_roots()
    zeta = 1.0 - mu * delta
    etas = eta_values(1)
    expected = np.sort([-1.0 / etas[0], 1.0 / zeta])
    np.testing.assert_allclose(np.sort(roots.real), expected, rtol=1e-10)


def test_asymptotic_arma_rejects_noninvertible():
    m = CarmaModel([-0.7, -1.2], ma_mu=[-1.0])
    with pytest.raises(NonInvertibleModel):
        asymptotic_arma(m, 0.01)
    with pytest.raises(ModelStructureError):
        asymptotic_arma(CarmaModel([-0.7, -1.2]), 0.0)


def test_exact_factorization_converges_to_asymptotic_form():
    for model in (
        CarmaModel([-0.7, -1.2], ma_mu=[2.0]),
        CarmaModel([-0.7, -1.2]),
        CarmaModel([-0.7, -1.2, -2.6]),
    ):
        errs = []
        ratios = []
        for k in (2, 4, 6, 8, 9):
            delta = 2.0**-k
            exact = sampled_arma(model, delta)
            asym = asymptotic_arma(model, delta)
            errs.append(float(np.max(np.abs(exact.theta - asym.theta))))
            ratios.append(exact.sigma2_delta / asym.sigma2_delta)
        assert errs[-1] < errs[0] / 10.0
        assert abs(ratios[-1] - 1.0) < 0.05


def test_wold_coefficients_ar1():
    arma = SampledArma(0.1, [1.0, -0.5], [1.0], 1.0, EXACT_FACTORIZATION)
    psi = wold_coefficients(arma, 12)
    np.testing.assert_array_equal(psi, 0.5 ** np.arange(12))
    with pytest.raises(ModelStructureError):
        wold_coefficients(arma, 0)


def test_wold_identity_and_square_summability():
    m = CarmaModel([-0.7, -1.2, -2.6], ma_mu=[3.0])
    arma = sampled_arma(m, 0.2)
    n = 300
    psi = wold_coefficients(arma, n)
    conv = np.convolve(arma.phi, psi)[:n]
    target = np.zeros(n)
    target[: arma.theta.size] = arma.theta
    np.testing.assert_allclose(conv, target, atol=1e-12)
    tail = np.cumsum(psi[::-1] ** 2)[::-1]
    assert tail[n // 2] < 1e-12 * tail[0]


def test_wold_kernel_estimates_track_kernel():
    m = CarmaModel([-0.7, -1.2], sigma=1.0)
    delta = 2.0**-6
    arma = sampled_arma(m, delta)
    psi = wold_coefficients(arma, 8)
    hbar = (3.0 + math.sqrt(3.0)) / 6.0
    scale = math.sqrt(arma.sigma2_delta / delta)
    for j in range(8):
        g = kernel(m, (j + hbar) * delta)
        assert abs(scale * psi[j] - g) < 0.02 * g


def test_sampled_arma_against_simulation():
    # the filtered series U_n = Phi(B) Y_n of a simulated path must show
    # the predicted covariances at lags 0..p-1 and none beyond
    m = CarmaModel([-0.7, -1.2], sigma=1.0)
    delta = 0.25
    gamma_u = filtered_autocovariance(m, delta)
    n_paths, n_steps = 16, 125_000
    y, _ = simulate_batch(
        m, BrownianMotion(), delta, n_steps, n_paths, np.random.default_rng(77)
    )
    phi = ar_polynomial(m, delta)
    u = lfilter(phi, [1.0], y, axis=1)[:, m.p :]
    ests = np.empty((n_paths, 3))
    for i in range(n_paths):
        x = u[i] - u[i].mean()
        for k in range(3):
            ests[i, k] = np.dot(x[: x.size - k], x[k:]) / x.size
    mean = ests.mean(axis=0)
    stderr = ests.std(axis=0, ddof=1) / math.sqrt(n_paths)
    assert abs(mean[0] - gamma_u[0]) < 5.0 * stderr[0]
    assert abs(mean[1] - gamma_u[1]) < 5.0 * stderr[1]
    assert abs(mean[2]) < 5.0 * stderr[2]
