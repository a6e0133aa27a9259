"""Tests for driving-noise recovery and the recovery-error analysis."""
import math

import numpy as np
import pytest
from scipy.signal import lfilter

from carmahf import (
    BrownianMotion,
    CarmaModel,
    ConfigError,
    DistinctRootsRequired,
    EXACT_FACTORIZATION,
    ModelStructureError,
    NonInvertibleModel,
    PathGrid,
    SampledArma,
    UnsupportedOrder,
    VarianceGamma,
    carma2_error_closed_form,
    estimate_kernel,
    generate_increments,
    inversion_burn_in,
    invert,
    kernel,
    recovery_error_mc,
    sampled_arma,
    simulate_path,
)
from carmahf.recovery import _sample_autocovariance, _trimmed_theta
from carmahf.spectral import lag_poly_from_factors

from helpers import stable_lag_factors

CAR2 = CarmaModel([-0.7, -1.2], sigma=1.0)
INV21 = CarmaModel([-0.7, -1.2], ma_mu=[1.0], sigma=1.0)
NON21 = CarmaModel([-0.7, -1.2], ma_mu=[-1.0], sigma=1.0)


def g_integral(model, t):
    """Integral of the kernel over (0, t] via the residue expansion."""
    lam = model.ar_roots
    c = np.array(
        [model.sigma * model.b_at(l) / model.a_prime_at(l) for l in lam]
    )
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros(t.shape, dtype=complex)
    pos = t > 0
    if np.any(pos):
        tp = t[pos][:, None]
        out[pos] = np.sum(c * (np.exp(lam * tp) - 1.0) / lam, axis=1)
    return out.real


def mse_oracle(model, delta, t):
    """Recovery MSE from second-order theory alone.

    The recovered sum is a linear functional of the observations, so its
    mean square distance to L((0, t]) only needs Var(sum Lbar) = t (the
    scaled innovations are white), Var(L((0, t])) = t, and the cross
    covariances Cov(Y_s, L((0, t])) = G(s) - G(s - t) with G the kernel
    integral. This shares no code with the closed form under test.
    """
    arma = sampled_arma(model, delta)
    K = int(round(t / delta))
    theta = arma.theta
    roots = np.roots(theta[::-1])
    rho = max(abs(1.0 / r) for r in roots) if roots.size else 0.0
    M = 64 if rho == 0.0 else int(math.ceil(math.log(1e-18) / math.log(rho)))
    imp = np.zeros(M + 1)
    imp[0] = 1.0
    pi = lfilter(arma.phi, theta, imp)
    n = np.arange(-M, K + 1)
    diff = g_integral(model, n * delta) - g_integral(model, (n - K) * delta)
    cross = 0.0
    for i in range(1, K + 1):
        cross += np.dot(pi, diff[(i - np.arange(M + 1)) + M])
    return 2.0 * K * delta - 2.0 * math.sqrt(delta / arma.sigma2_delta) * cross


def test_inversion_burn_in_values():
    arma = SampledArma(
        delta=0.5,
        phi=np.array([1.0, -0.3]),
        theta=np.array([1.0, -0.5]),
        sigma2_delta=1.0,
        provenance=EXACT_FACTORIZATION,
    )
    # slowest mode decays like 0.5^k; 0.5^40 < 1e-12 <= 0.5^39
    assert inversion_burn_in(arma) == 40
    white = SampledArma(
        delta=0.5,
        phi=np.array([1.0, -0.3]),
        theta=np.array([1.0]),
        sigma2_delta=1.0,
        provenance=EXACT_FACTORIZATION,
    )
    assert inversion_burn_in(white) == 0
    bad = SampledArma(
        delta=0.5,
        phi=np.array([1.0, -0.3]),
        theta=np.array([1.0, -2.0]),
        sigma2_delta=1.0,
        provenance=EXACT_FACTORIZATION,
    )
    with pytest.raises(NonInvertibleModel):
        inversion_burn_in(bad)


def test_invert_round_trip_on_sampled_path():
    delta = 0.25
    inc = generate_increments(BrownianMotion(), 9, delta, 4000)
    path = simulate_path(CAR2, inc)
    arma = sampled_arma(CAR2, delta)
    rec = invert(path, arma)
    assert rec.delta == delta
    z = rec.values / math.sqrt(delta / arma.sigma2_delta)
    back = lfilter(_trimmed_theta(arma), arma.phi, z)
    np.testing.assert_allclose(back, path.y_values, rtol=0, atol=1e-10)


def test_invert_round_trip_random_filters():
    rng = np.random.default_rng(17)
    for _ in range(100):
        p = int(rng.integers(1, 5))
        phi = lag_poly_from_factors(stable_lag_factors(rng, p))
        ma = stable_lag_factors(rng, p - 1)
        theta = lag_poly_from_factors(ma) if ma.size else np.array([1.0])
        arma = SampledArma(
            delta=0.5,
            phi=phi,
            theta=np.concatenate([theta, np.zeros(p - theta.size + 1)]),
            sigma2_delta=float(rng.uniform(0.5, 2.0)),
            provenance=EXACT_FACTORIZATION,
        )
        y = PathGrid(delta=0.5, y_values=rng.normal(size=600))
        rec = invert(y, arma)
        z = rec.values / math.sqrt(0.5 / arma.sigma2_delta)
        back = lfilter(_trimmed_theta(arma), phi, z)
        np.testing.assert_allclose(back, y.y_values, rtol=0, atol=1e-10)


def test_invert_validation():
    arma = sampled_arma(CAR2, 0.25)
    y = PathGrid(delta=0.125, y_values=np.zeros(100))
    with pytest.raises(ConfigError):
        invert(y, arma)
    short = PathGrid(delta=0.25, y_values=np.zeros(inversion_burn_in(arma)))
    with pytest.raises(ConfigError):
        invert(short, arma)
    bad = SampledArma(
        delta=0.25,
        phi=np.array([1.0, -0.3]),
        theta=np.array([1.0, -2.0]),
        sigma2_delta=1.0,
        provenance=EXACT_FACTORIZATION,
    )
    with pytest.raises(NonInvertibleModel):
        invert(PathGrid(delta=0.25, y_values=np.zeros(100)), bad)


def test_recovered_increments_are_white_with_variance_delta():
    delta = 2.0**-4
    n = 40_000
    inc = generate_increments(BrownianMotion(), 3, delta, n)
    path = simulate_path(CAR2, inc)
    rec = invert(path, sampled_arma(CAR2, delta))
    lb = rec.trusted
    assert lb.size == n - rec.burn_in
    # scaled innovations of the exact sampled model: Var = delta
    assert abs(np.var(lb) / delta - 1.0) < 0.04
    for k in range(1, 6):
        r = np.corrcoef(lb[:-k], lb[k:])[0, 1]
        assert abs(r) < 5.0 / math.sqrt(lb.size)


LADDER = {
    # model, t, {delta exponent: mse}
    "car2": (CAR2, 1.0, {-6: 0.008943929110307725,
                         -8: 0.0022504447556885854,
                         -10: 0.0005635166601443142}),
    "inv21": (INV21, 1.0, {-6: 1.5697832349781393e-05,
                           -8: 9.81125584997855e-07,
                           -10: 6.125769846931917e-08}),
    "non21": (NON21, 1.0, {-10: 1.4715179561457474}),
}


@pytest.mark.parametrize("name", sorted(LADDER))
def test_closed_form_frozen_values(name):
    model, t, rungs = LADDER[name]
    for k, expected in rungs.items():
        got = carma2_error_closed_form(model, 2.0**k, t)
        assert abs(got - expected) < 1e-12 * abs(expected)


def test_closed_form_decreases_with_delta():
    for model in (CAR2, INV21):
        vals = [carma2_error_closed_form(model, 2.0**-k, 1.0) for k in (6, 8, 10)]
        assert vals[0] > vals[1] > vals[2] > 0.0


@pytest.mark.parametrize("model", [CAR2, INV21, NON21])
@pytest.mark.parametrize("delta,t", [(2.0**-4, 0.5), (2.0**-6, 1.0)])
def test_closed_form_against_covariance_oracle(model, delta, t):
    cf = carma2_error_closed_form(model, delta, t)
    assert abs(cf - mse_oracle(model, delta, t)) < 1e-8 * abs(cf)


def test_closed_form_limits():
    for t in (1.0, 2.0):
        lim = carma2_error_closed_form(NON21, None, t)
        assert abs(lim - 4.0 * (math.exp(-t) + t - 1.0)) < 1e-12
    assert carma2_error_closed_form(CAR2, None, 1.0) == 0.0
    assert carma2_error_closed_form(INV21, None, 1.0) == 0.0
    # finite-delta value approaches the limit for the non-invertible model
    gap = abs(
        carma2_error_closed_form(NON21, 2.0**-10, 1.0)
        - carma2_error_closed_form(NON21, None, 1.0)
    )
    assert gap < 1e-5


def test_closed_form_validation():
    with pytest.raises(UnsupportedOrder):
        carma2_error_closed_form(CarmaModel([-0.7, -1.2, -2.6]), 0.25, 1.0)
    with pytest.raises(ConfigError):
        carma2_error_closed_form(CAR2, 0.25, 0.0)
    with pytest.raises(DistinctRootsRequired):
        carma2_error_closed_form(CarmaModel([-1.0, -1.0]), 0.25, 1.0)


def test_recovery_error_mc_deterministic_across_workers():
    a = recovery_error_mc(CAR2, 2.0**-4, 0.25, 60, seed=4)
    b = recovery_error_mc(CAR2, 2.0**-4, 0.25, 60, seed=4)
    c = recovery_error_mc(CAR2, 2.0**-4, 0.25, 60, seed=4, workers=2)
    assert a.mean_sq_error == b.mean_sq_error == c.mean_sq_error
    assert a.mc_stderr == c.mc_stderr
    d = recovery_error_mc(CAR2, 2.0**-4, 0.25, 60, seed=5)
    assert d.mean_sq_error != a.mean_sq_error
    out = a.to_dict()
    assert out["n_paths"] == 60 and out["t"] == 0.25


def test_recovery_error_mc_validation():
    with pytest.raises(ConfigError):
        recovery_error_mc(CAR2, 2.0**-4, 0.0, 60)
    with pytest.raises(ConfigError):
        recovery_error_mc(CAR2, 0.5, 0.25, 60)
    with pytest.raises(ConfigError):
        recovery_error_mc(CAR2, 2.0**-4, 0.25, 1)
    # a non-invertible model is fine: the exact factorization used for the
    # inversion is minimum-phase by construction
    est = recovery_error_mc(NON21, 2.0**-4, 0.25, 12, seed=1)
    assert est.mean_sq_error > 0.0


def test_recovery_error_mc_matches_closed_form():
    est = recovery_error_mc(CAR2, 2.0**-6, 0.5, 600, seed=11)
    cf = carma2_error_closed_form(CAR2, 2.0**-6, 0.5)
    assert abs(est.mean_sq_error - cf) < 4.0 * est.mc_stderr
    assert est.mc_stderr < 0.2 * cf


def test_recovery_error_is_driver_agnostic():
    # second-order result: a centered jump driver gives the same MSE
    est = recovery_error_mc(
        CAR2, 2.0**-5, 0.5, 600, driver=VarianceGamma(0.5), seed=7
    )
    cf = carma2_error_closed_form(CAR2, 2.0**-5, 0.5)
    assert abs(est.mean_sq_error - cf) < 5.0 * est.mc_stderr


def test_estimate_kernel_theoretical_mode():
    delta = 2.0**-6
    hbar = (3.0 + math.sqrt(3.0)) / 6.0
    t_grid = delta * np.arange(8)
    ghat = estimate_kernel(CAR2, delta, t_grid)
    target = kernel(CAR2, t_grid + hbar * delta)
    assert np.max(np.abs(ghat - target) / np.abs(target)) < 0.02


def test_estimate_kernel_empirical_mode():
    delta = 0.25
    hbar = (3.0 + math.sqrt(3.0)) / 6.0
    inc = generate_increments(BrownianMotion(), 5, delta, 400_000)
    path = simulate_path(CAR2, inc)
    t_grid = delta * np.arange(6)
    ghat = estimate_kernel(path, delta, t_grid, ar_order=2)
    target = kernel(CAR2, t_grid + hbar * delta)
    assert np.max(np.abs(ghat - target) / np.abs(target)) < 0.12


def test_estimate_kernel_validation():
    with pytest.raises(ConfigError):
        estimate_kernel(CAR2, 0.25, [-0.25, 0.0])
    path = PathGrid(delta=0.5, y_values=np.zeros(100))
    with pytest.raises(ConfigError):
        estimate_kernel(path, 0.25, [0.0], ar_order=2)
    with pytest.raises(ConfigError):
        estimate_kernel(path, 0.5, [0.0])
    with pytest.raises(ConfigError):
        estimate_kernel("not a model", 0.25, [0.0])


def test_sample_autocovariance_needs_enough_data():
    values = np.arange(10.0)
    got = _sample_autocovariance(values, 3)
    centered = values - values.mean()
    for k in range(4):
        assert abs(got[k] - np.dot(centered[: 10 - k], centered[k:]) / 10.0) < 1e-12
    with pytest.raises(ConfigError):
        _sample_autocovariance(values, 10)
