"""Recovery of driving-noise increments from sampled CARMA observations.

For an invertible model the innovations Z of the sampled ARMA
representation, rescaled to L-bar_n = (sqrt(delta)/sigma_delta) Z_n,
satisfy sum_{i<=floor(t/delta)} L-bar_i -> L_t in L2 as delta -> 0.
For CARMA(2,q) the mean-square error of that partial sum has a closed
form, including its non-vanishing limit when the model is not
invertible. The same machinery yields the kernel estimator
g-hat(t) = (sigma_delta/sqrt(delta)) psi_{floor(t/delta)}.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.signal import lfilter

from .errors import (
    ConfigError,
    DistinctRootsRequired,
    ModelStructureError,
    NonInvertibleModel,
    UnsupportedOrder,
)
from .levy import BrownianMotion, Driver, PathGrid, simulate_batch
from .model import CarmaModel, validate
from .spectral import SampledArma, sampled_arma, spectral_factorize, wold_coefficients

__all__ = [
    "RecoveredIncrements",
    "inversion_burn_in",
    "invert",
    "McErrorEstimate",
    "recovery_error_mc",
    "carma2_error_closed_form",
    "estimate_kernel",
]

_MC_BATCH = 250


@dataclass(frozen=True)
class RecoveredIncrements:
    """Rescaled innovations L-bar estimating the driving increments.

    ``values[i]`` estimates the increment over ((n-1) delta, n delta]
    for the observation aligned with it; the first ``burn_in`` entries
    still carry the zero-initialization transient of the inversion
    filter and should be discarded.
    """

    delta: float
    values: np.ndarray
    burn_in: int
    source_arma: SampledArma

    @property
    def trusted(self) -> np.ndarray:
        return self.values[self.burn_in :]


def _trimmed_theta(arma: SampledArma) -> np.ndarray:
    theta = arma.theta
    k = theta.size
    while k > 1 and theta[k - 1] == 0.0:
        k -= 1
    return theta[:k]


def inversion_burn_in(arma: SampledArma, tol: float = 1e-12) -> int:
    """Steps until the zero-start transient of 1/Theta decays below tol.

    The transient decays like rho^n with rho the largest inverse root
    modulus of Theta; minimum-phase means rho < 1.
    """
    theta = _trimmed_theta(arma)
    if theta.size < 2:
        return 0
    rho = float(np.max(1.0 / np.abs(np.roots(theta[::-1]))))
    if rho >= 1.0:
        raise NonInvertibleModel(
            f"MA polynomial has a root inside or on the unit circle "
            f"(decay rate {rho:.6f}); inversion diverges"
        )
    return int(math.ceil(math.log(tol) / math.log(rho)))


def invert(y: PathGrid, arma: SampledArma) -> RecoveredIncrements:
    """Recover rescaled innovations from a sampled path.

    Runs the recursion Theta(B) Z_n = Phi(B) Y_n with zero initial
    conditions and rescales to L-bar = (sqrt(delta)/sigma_delta) Z. The
    ARMA representation must be strictly minimum-phase.
    """
    theta = _trimmed_theta(arma)
    if theta.size >= 2:
        mods = np.abs(np.roots(theta[::-1]))
        if np.any(mods <= 1.0):
            raise NonInvertibleModel(
                "MA roots with modulus <= 1; the inversion filter is unstable"
            )
    if abs(y.delta - arma.delta) > 1e-12 * arma.delta:
        raise ConfigError(
            f"path step {y.delta} does not match ARMA step {arma.delta}"
        )
    burn = inversion_burn_in(arma)
    if y.y_values.size <= burn:
        raise ConfigError(
            f"path has {y.y_values.size} observations but the inversion "
            f"transient needs {burn}"
        )
    z = lfilter(arma.phi, theta, y.y_values)
    lbar = math.sqrt(arma.delta / arma.sigma2_delta) * z
    return RecoveredIncrements(
        delta=arma.delta, values=lbar, burn_in=burn, source_arma=arma
    )


@dataclass(frozen=True)
class McErrorEstimate:
    mean_sq_error: float
    mc_stderr: float
    n_paths: int
    delta: float
    t: float

    def to_dict(self) -> dict:
        return {
            "mean_sq_error": self.mean_sq_error,
            "mc_stderr": self.mc_stderr,
            "n_paths": self.n_paths,
            "delta": self.delta,
            "t": self.t,
        }


def _mc_batch(args) -> np.ndarray:
    (model, driver, delta, n_steps, n_batch, seed, index, subgrid, phi, theta,
     sigma2, start, count) = args
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    )
    y, dl = simulate_batch(
        model, driver, delta, n_steps, n_batch, rng, subgrid_factor=subgrid
    )
    z = lfilter(phi, theta, y, axis=1)
    lbar = math.sqrt(delta / sigma2) * z
    diff = lbar[:, start : start + count] - dl[:, start : start + count]
    d = diff.sum(axis=1)
    return d * d


def recovery_error_mc(
    model: CarmaModel,
    delta: float,
    t: float,
    n_paths: int,
    driver: Driver = BrownianMotion(),
    seed: int = 0,
    workers: Optional[int] = None,
    subgrid_factor: Optional[int] = None,
) -> McErrorEstimate:
    """Monte Carlo estimate of E[(sum_{i<=floor(t/delta)} L-bar_i - L_t)^2].

    Simulates stationary paths jointly with their driving increments,
    inverts the exact sampled-ARMA representation, and compares partial
    sums over the window of floor(t/delta) steps placed after the
    inversion transient. Results are deterministic in (seed, n_paths)
    and independent of the worker count: paths are drawn in fixed-size
    batches with one RNG stream per batch.
    """
    if not t > 0:
        raise ConfigError("t must be positive")
    if n_paths < 2:
        raise ConfigError("need at least 2 paths for a standard error")
    arma = sampled_arma(model, delta)
    theta = _trimmed_theta(arma)
    if theta.size >= 2 and np.any(np.abs(np.roots(theta[::-1])) <= 1.0):
        raise NonInvertibleModel("sampled ARMA is not minimum-phase")
    burn = inversion_burn_in(arma)
    K = int(math.floor(t / delta + 1e-9))
    if K < 1:
        raise ConfigError(f"t = {t} is below one step delta = {delta}")
    n_steps = burn + K

    jobs = []
    done = 0
    index = 0
    while done < n_paths:
        nb = min(_MC_BATCH, n_paths - done)
        jobs.append(
            (model, driver, delta, n_steps, nb, seed, index, subgrid_factor,
             arma.phi, theta, arma.sigma2_delta, burn, K)
        )
        done += nb
        index += 1

    if workers is not None and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_mc_batch, jobs))
    else:
        parts = [_mc_batch(job) for job in jobs]
    d2 = np.concatenate(parts)
    return McErrorEstimate(
        mean_sq_error=float(np.mean(d2)),
        mc_stderr=float(np.std(d2, ddof=1) / math.sqrt(d2.size)),
        n_paths=int(d2.size),
        delta=float(delta),
        t=float(t),
    )


def carma2_error_closed_form(
    model: CarmaModel, delta: Optional[float], t: float
) -> float:
    """Exact mean-square recovery error for CARMA(2,q), q in {0,1}.

    With K = floor(t/delta), theta the (sign-flipped) MA coefficient of
    the exact sampled representation and the kernel integrals
    I0 = int_0^delta g and I1 = int_0^delta [g(delta+s) -
    (e^{l1 delta}+e^{l2 delta}-theta) g(s)] ds, the error is

        2 K delta - (2 sqrt(delta)/sigma_delta)
            [K I0 + I1 (theta^K + K(1-theta) - 1)/(1-theta)^2].

    ``delta=None`` returns the small-delta limit: 0 for q=0 or an
    invertible MA root, and 2(e^{-sgn(b) b t} + sgn(b) b t - 1)
    (sgn(b)-1)/b for q=1 with b = mu_1.
    """
    if model.p != 2 or model.q > 1:
        raise UnsupportedOrder(
            f"closed form covers CARMA(2,0) and CARMA(2,1); got "
            f"p={model.p}, q={model.q}"
        )
    if not t > 0:
        raise ConfigError("t must be positive")
    if delta is None:
        if model.q == 0:
            return 0.0
        b = model.ma_mu[0].real
        s = math.copysign(1.0, b)
        return 2.0 * (math.exp(-s * b * t) + s * b * t - 1.0) * (s - 1.0) / b
    if not model.has_distinct_ar_roots():
        raise DistinctRootsRequired("closed form uses the residue kernel form")
    arma = sampled_arma(model, delta)
    th = -float(arma.theta[1])
    K = int(math.floor(t / delta + 1e-9))
    lam = model.ar_roots
    c = model.sigma * model.b_at(lam) / model.a_prime_at(lam)
    e_lam = np.exp(lam * delta)
    i0 = np.sum(c * (e_lam - 1.0) / lam)
    shifted = np.sum(c * e_lam * (e_lam - 1.0) / lam)
    i1 = shifted - (np.sum(e_lam) - th) * i0
    geom = (th**K + K * (1.0 - th) - 1.0) / (1.0 - th) ** 2
    total = 2.0 * K * delta - (
        2.0 * math.sqrt(delta) / math.sqrt(arma.sigma2_delta)
    ) * (K * i0 + i1 * geom)
    if abs(total.imag) > 1e-9 * max(1.0, abs(total.real)):
        raise ModelStructureError(
            "closed-form error came out complex; roots are inconsistent"
        )
    return float(total.real)


def _sample_autocovariance(values: np.ndarray, max_lag: int) -> np.ndarray:
    """Biased (divisor n) sample autocovariances at lags 0..max_lag."""
    x = np.asarray(values, dtype=float)
    n = x.size
    if max_lag >= n:
        raise ConfigError(f"need more than {max_lag} observations")
    x = x - x.mean()
    return np.array([np.dot(x[: n - k], x[k:]) / n for k in range(max_lag + 1)])


def _empirical_arma(path: PathGrid, p: int) -> SampledArma:
    """Fit the sampled ARMA(p, p-1) from one path's sample autocovariances.

    The AR part comes from the Yule-Walker equations at lags p..2p-1
    (where the MA side no longer contributes); the MA part from
    factorizing the implied filtered covariances.
    """
    gamma = _sample_autocovariance(path.y_values, 2 * p)
    M = np.empty((p, p))
    rhs = np.empty(p)
    for r in range(p):
        k = p + r
        rhs[r] = -gamma[k]
        for i in range(1, p + 1):
            M[r, i - 1] = gamma[k - i]
    phi = np.concatenate([[1.0], np.linalg.solve(M, rhs)])
    gamma_u = np.empty(p)
    for k in range(p):
        acc = 0.0
        for i in range(p + 1):
            for j in range(p + 1):
                acc += phi[i] * phi[j] * gamma[abs(k + i - j)]
        gamma_u[k] = acc
    theta, sigma2 = spectral_factorize(gamma_u)
    if theta.size < p:
        theta = np.concatenate([theta, np.zeros(p - theta.size)])
    return SampledArma(
        delta=path.delta,
        phi=phi,
        theta=theta,
        sigma2_delta=sigma2,
        provenance="ExactFactorization",
    )


def estimate_kernel(
    source: Union[CarmaModel, PathGrid],
    delta: float,
    t_grid,
    ar_order: Optional[int] = None,
) -> np.ndarray:
    """Kernel estimates g-hat(t) = (sigma_delta/sqrt(delta)) psi_{floor(t/delta)}.

    ``source`` selects the autocovariance input: a CarmaModel uses the
    exact theoretical autocovariances (and the exact AR polynomial),
    a PathGrid uses sample autocovariances, in which case ``ar_order``
    must give the AR order to fit.
    """
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if np.any(t_grid < 0):
        raise ConfigError("t_grid times must be nonnegative")
    if isinstance(source, CarmaModel):
        arma = sampled_arma(source, delta)
    elif isinstance(source, PathGrid):
        if abs(source.delta - delta) > 1e-12 * delta:
            raise ConfigError(
                f"path step {source.delta} does not match delta {delta}"
            )
        if ar_order is None:
            raise ConfigError("empirical mode needs ar_order")
        arma = _empirical_arma(source, int(ar_order))
    else:
        raise ConfigError(
            f"source must be a CarmaModel or PathGrid, got {type(source).__name__}"
        )
    idx = np.floor(t_grid / delta + 1e-9).astype(int)
    psi = wold_coefficients(arma, int(idx.max()) + 1)
    return math.sqrt(arma.sigma2_delta / delta) * psi[idx]
