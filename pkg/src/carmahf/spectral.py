"""ARMA structure of a CARMA process sampled on a grid of step delta.

The sampled sequence Y_{n delta} satisfies a weak ARMA(p, p-1) equation
whose AR polynomial is exactly prod(1 - exp(delta lambda_i) z) and whose
MA polynomial Theta_delta is obtained by spectral factorization of the
autocovariances of the filtered process U_n = Phi_delta(B) Y_{n delta},
which is (p-1)-dependent. For small delta the minimum-phase factor has
a closed asymptotic form built from eta(xi_i) and from the moving-average
roots of the model.

The filtered autocovariances gamma_U(k) shrink like delta^(2(p-q)-1)
relative to gamma_Y(0), so forming them in double precision loses all
accuracy long before the deltas of interest; they are therefore computed
with mpmath at a precision chosen from the expected cancellation.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import mpmath as mp
import numpy as np
from scipy.signal import lfilter

from . import alpha as alpha_mod
from ._poly import conjugate_pair_up, lag_poly_from_factors, realify
from .errors import (
    InternalConsistencyError,
    InvalidCovariance,
    ModelStructureError,
    NonInvertibleLimit,
    NonInvertibleModel,
)
from .model import CarmaModel, validate

__all__ = [
    "SampledArma",
    "ar_polynomial",
    "filtered_autocovariance",
    "spectral_factorize",
    "sampled_arma",
    "asymptotic_arma",
    "wold_coefficients",
    "EXACT_FACTORIZATION",
    "ASYMPTOTIC",
]

EXACT_FACTORIZATION = "ExactFactorization"
ASYMPTOTIC = "Asymptotic"

_UNIT_CIRCLE_TOL = 1e-8


@dataclass(frozen=True)
class SampledArma:
    """ARMA(p, p-1) representation of a sampled CARMA process.

    ``phi`` are the ascending coefficients of the AR lag polynomial
    Phi(z) = 1 + phi_1 z + ... + phi_p z^p and ``theta`` those of the MA
    lag polynomial with theta[0] = 1. ``sigma2_delta`` is the innovation
    variance. ``provenance`` records whether the MA side came from exact
    spectral factorization or from the small-delta closed form.
    """

    delta: float
    phi: np.ndarray
    theta: np.ndarray
    sigma2_delta: float
    provenance: str

    def __post_init__(self):
        phi = np.atleast_1d(np.asarray(self.phi, dtype=float))
        theta = np.atleast_1d(np.asarray(self.theta, dtype=float))
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "theta", theta)
        if not self.delta > 0:
            raise ModelStructureError("delta must be positive")
        if phi[0] != 1.0 or theta[0] != 1.0:
            raise ModelStructureError("phi and theta must be normalized to 1 at z^0")
        if not self.sigma2_delta > 0:
            raise ModelStructureError("sigma2_delta must be positive")
        if self.provenance not in (EXACT_FACTORIZATION, ASYMPTOTIC):
            raise ModelStructureError(f"unknown provenance {self.provenance!r}")
        phi.flags.writeable = False
        theta.flags.writeable = False

    @property
    def p(self) -> int:
        return self.phi.size - 1

    def ma_roots(self) -> np.ndarray:
        """Roots of Theta(z), empty when Theta is constant."""
        if self.theta.size < 2:
            return np.empty(0, dtype=complex)
        return np.roots(self.theta[::-1])

    def is_min_phase(self, tol: float = 0.0) -> bool:
        r = self.ma_roots()
        return bool(np.all(np.abs(r) > 1.0 + tol)) if r.size else True

    def innovation_scale(self) -> float:
        return math.sqrt(self.sigma2_delta)

    def to_dict(self) -> dict:
        return {
            "delta": self.delta,
            "phi": [float(v) for v in self.phi],
            "theta": [float(v) for v in self.theta],
            "sigma2_delta": float(self.sigma2_delta),
            "provenance": self.provenance,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, d: dict) -> "SampledArma":
        return cls(
            delta=float(d["delta"]),
            phi=np.asarray(d["phi"], dtype=float),
            theta=np.asarray(d["theta"], dtype=float),
            sigma2_delta=float(d["sigma2_delta"]),
            provenance=str(d["provenance"]),
        )

    @classmethod
    def from_json(cls, text: str) -> "SampledArma":
        return cls.from_dict(json.loads(text))


def ar_polynomial(model: CarmaModel, delta: float) -> np.ndarray:
    """Ascending coefficients of prod_i (1 - exp(delta lambda_i) z)."""
    if not delta > 0:
        raise ModelStructureError("delta must be positive")
    return lag_poly_from_factors(np.exp(delta * model.ar_roots))


def _working_dps(model: CarmaModel, delta: float) -> int:
    # gamma_U(k) ~ delta^(2(p-q)-1) gamma_Y(0): every lost order is a
    # cancellation digit; keep a wide margin on top
    drop = (2 * (model.p - model.q) - 1) * max(0.0, -math.log10(delta))
    return min(400, 50 + int(2 * drop))


def _autocov_weights_mp(model: CarmaModel):
    """Residue weights w_l with gamma_Y(t) = sum_l w_l exp(lambda_l |t|)."""
    lam = [mp.mpc(v) for v in model.ar_roots]
    mus = [mp.mpc(v) for v in model.ma_mu]
    s2 = mp.mpf(model.sigma) ** 2

    def b_at(z):
        out = mp.mpc(1)
        for mu in mus:
            out *= z + mu
        return out

    def a_at(z):
        out = mp.mpc(1)
        for l in lam:
            out *= z - l
        return out

    weights = []
    for i, l in enumerate(lam):
        aprime = mp.mpc(1)
        for j, other in enumerate(lam):
            if j != i:
                aprime *= l - other
        weights.append(s2 * b_at(l) * b_at(-l) / (aprime * a_at(-l)))
    return lam, weights


def _autocov_mp_quad(model: CarmaModel, lags):
    """Quadrature fallback for repeated AR roots: integrate g(s) g(s+t)."""
    p = model.p
    A = mp.matrix(p, p)
    for j in range(p - 1):
        A[j, j + 1] = 1
    acoef = model.ar_coefficients()
    for j in range(p):
        A[p - 1, j] = -acoef[p - j]
    b = model.ma_coefficients()

    def g(s):
        if s <= 0:
            return mp.mpf(0)
        E = mp.expm(A * mp.mpf(s))
        return mp.mpf(model.sigma) * mp.fsum(
            mp.mpf(b[j]) * E[j, p - 1] for j in range(p)
        )

    horizon = 60.0 / float(np.min(np.abs(model.ar_roots.real)))
    out = []
    for t in lags:
        tt = abs(mp.mpf(t))
        out.append(mp.quad(lambda s: g(s) * g(s + tt), [0, horizon]))
    return out


def filtered_autocovariance(model: CarmaModel, delta: float) -> np.ndarray:
    """Autocovariances gamma_U(0..p-1) of U_n = Phi_delta(B) Y_{n delta}.

    gamma_U(k) = sum_{i,j} phi_i phi_j gamma_Y((k+i-j) delta). The lags
    k = p and p+1 must vanish by (p-1)-dependence and are evaluated as a
    cancellation self-check (tolerance 1e-9 gamma_U(0)).
    """
    report = validate(model)
    if not report.ok:
        raise ModelStructureError(f"invalid model: {report.violations}")
    if not delta > 0:
        raise ModelStructureError("delta must be positive")
    p = model.p
    distinct = model.has_distinct_ar_roots()
    with mp.workdps(_working_dps(model, delta)):
        d = mp.mpf(delta)
        # AR coefficients of prod(1 - e^{delta lambda} z), ascending
        phi = [mp.mpc(1)]
        for lam in model.ar_roots:
            f = mp.e ** (d * mp.mpc(lam))
            nxt = [mp.mpc(0)] * (len(phi) + 1)
            for i, c in enumerate(phi):
                nxt[i] += c
                nxt[i + 1] -= f * c
            phi = nxt
        if distinct:
            lam, weights = _autocov_weights_mp(model)

            def gamma_y(t):
                tt = abs(t)
                return mp.fsum(
                    w * mp.e ** (l * tt) for l, w in zip(lam, weights)
                )

            cache = {}

            def gamma_cached(kk: int):
                if kk not in cache:
                    cache[kk] = gamma_y(kk * d)
                return cache[kk]
        else:
            needed = range(0, (p + 1) + p + 1)
            vals = _autocov_mp_quad(model, [k * float(delta) for k in needed])
            table = dict(zip(needed, vals))

            def gamma_cached(kk: int):
                return table[abs(kk)]

        out = []
        for k in range(p + 2):
            acc = mp.mpf(0)
            for i in range(p + 1):
                for j in range(p + 1):
                    acc += (phi[i] * phi[j] * gamma_cached(abs(k + i - j))).real
            out.append(acc)
        g0 = out[0]
        if not g0 > 0:
            raise InvalidCovariance(f"gamma_U(0) = {float(g0)} is not positive")
        for k in (p, p + 1):
            if abs(out[k]) > mp.mpf("1e-9") * g0:
                raise InternalConsistencyError(
                    f"(p-1)-dependence self-check failed: |gamma_U({k})| = "
                    f"{float(abs(out[k]))} vs gamma_U(0) = {float(g0)}; "
                    "working precision too low for this delta"
                )
        return np.array([float(v) for v in out[:p]])


def spectral_factorize(gamma_u) -> Tuple[np.ndarray, float]:
    """Minimum-phase MA representation of a finite covariance sequence.

    Given gamma_u = (gamma(0), ..., gamma(p-1)) of a (p-1)-dependent
    stationary sequence, returns ascending coefficients theta (theta[0]=1,
    all roots of modulus > 1) and the innovation variance sigma2 such
    that sigma2 * sum_j theta_j theta_{j+k} = gamma(k).

    Raises InvalidCovariance when the covariance generating function is
    negative somewhere on the unit circle and NonInvertibleLimit when a
    root sits on the circle within 1e-8 (no strict minimum-phase choice).
    """
    g = np.atleast_1d(np.asarray(gamma_u, dtype=float))
    if g.size == 0:
        raise InvalidCovariance("empty covariance sequence")
    if not g[0] > 0:
        raise InvalidCovariance(f"gamma(0) = {g[0]} must be positive")
    # drop numerically-zero trailing lags so white noise factorizes as order 0
    m = g.size - 1
    while m > 0 and abs(g[m]) <= 1e-12 * g[0]:
        m -= 1
    g = g[: m + 1]
    if m == 0:
        return np.array([1.0]), float(g[0])

    # c(omega) = gamma(0) + 2 sum_k gamma(k) cos(k omega) must be >= 0
    omega = np.linspace(0.0, math.pi, 4096)
    dens = g[0] + 2.0 * np.sum(
        g[1:, None] * np.cos(np.outer(np.arange(1, m + 1), omega)), axis=0
    )
    if np.min(dens) < -1e-10 * g[0]:
        raise InvalidCovariance(
            f"covariance generating function dips to {np.min(dens):.3e} "
            "on the unit circle; not a valid MA covariance"
        )

    # roots of z^m c(z); palindromic coefficients [g_m..g_1 g_0 g_1..g_m]
    coeff = np.concatenate([g[::-1], g[1:]])
    roots = np.roots(coeff[::-1])
    mods = np.abs(roots)
    near = np.abs(mods - 1.0) <= _UNIT_CIRCLE_TOL
    if np.any(near):
        raise NonInvertibleLimit(
            "covariance generating function has a root on the unit circle "
            f"(|root| = {mods[near][0]:.12f}); minimum-phase factor is not "
            "strictly invertible"
        )
    outside = roots[mods > 1.0]
    if outside.size != m:
        raise InternalConsistencyError(
            f"expected {m} roots outside the unit circle, found {outside.size}"
        )
    outside = conjugate_pair_up(outside)
    theta = lag_poly_from_factors(1.0 / outside)
    sigma2 = float(g[0] / np.sum(theta**2))

    recon = sigma2 * np.array(
        [np.dot(theta[: theta.size - k], theta[k:]) for k in range(m + 1)]
    )
    err = np.max(np.abs(recon - g)) / g[0]
    if err > 1e-8:
        raise InternalConsistencyError(
            f"factorization reconstruction error {err:.3e} exceeds 1e-8"
        )
    return theta, sigma2


def sampled_arma(model: CarmaModel, delta: float) -> SampledArma:
    """Exact ARMA(p, p-1) representation of the sampled process."""
    gamma_u = filtered_autocovariance(model, delta)
    theta, sigma2 = spectral_factorize(gamma_u)
    if theta.size < model.p:
        theta = np.concatenate([theta, np.zeros(model.p - theta.size)])
    return SampledArma(
        delta=float(delta),
        phi=ar_polynomial(model, delta),
        theta=theta,
        sigma2_delta=sigma2,
        provenance=EXACT_FACTORIZATION,
    )


def asymptotic_arma(model: CarmaModel, delta: float) -> SampledArma:
    """Small-delta closed form of the sampled ARMA representation.

    Theta(z) = prod_{i<p-q} (1 + eta(xi_i) z) * prod_k (1 - zeta_k z)
    with zeta_k = 1 - sgn(Re mu_k) mu_k delta, and innovation variance
    sigma^2 delta^(2(p-q)-1) / ((2(p-q)-1)! prod eta(xi_i)). Only defined
    for invertible models; the exact factorization handles the rest.
    """
    report = validate(model)
    if not report.ok:
        raise ModelStructureError(f"invalid model: {report.violations}")
    if not model.is_invertible:
        raise NonInvertibleModel(
            "asymptotic MA form requires an invertible model (all Re mu > 0); "
            "use sampled_arma for the exact minimum-phase factorization"
        )
    if not delta > 0:
        raise ModelStructureError("delta must be positive")
    m = model.p - model.q
    etas = alpha_mod.eta_values(m - 1) if m >= 2 else np.empty(0)
    factors = list(-etas)  # (1 + eta z) = (1 - (-eta) z)
    for mu in model.ma_mu:
        factors.append(1.0 - math.copysign(1.0, mu.real) * mu * delta)
    theta = lag_poly_from_factors(np.asarray(factors)) if factors else np.array([1.0])
    if theta.size < model.p:
        theta = np.concatenate([theta, np.zeros(model.p - theta.size)])
    sigma2 = (
        model.sigma**2
        * delta ** (2 * m - 1)
        / (math.factorial(2 * m - 1) * float(np.prod(etas)))
    )
    return SampledArma(
        delta=float(delta),
        phi=ar_polynomial(model, delta),
        theta=theta,
        sigma2_delta=sigma2,
        provenance=ASYMPTOTIC,
    )


def wold_coefficients(arma: SampledArma, n: int) -> np.ndarray:
    """First n coefficients of Theta(z)/Phi(z) (psi_0 = 1)."""
    if n < 1:
        raise ModelStructureError("n must be positive")
    impulse = np.zeros(n)
    impulse[0] = 1.0
    return lfilter(arma.theta, arma.phi, impulse)
