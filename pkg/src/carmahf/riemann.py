"""Approximating Riemann sums of a CARMA process and their ARMA structure.

The sum with rule h replaces the moving-average integral by
Y~_n = sum_{j>=0} g(delta (j+h)) dL_{n-j}. Filtering with the exact AR
polynomial leaves an MA(p-1) whose coefficients theta~_k have a closed
form in the AR roots; their leading-order roots chi depend only on p-q
and h, which is what singles out the rules h matching the sampled
process itself.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq
from scipy.signal import fftconvolve

from . import alpha as alpha_mod
from ._poly import elementary_symmetric, lag_poly_from_factors, realify
from .errors import (
    ConfigError,
    DistinctRootsRequired,
    InternalConsistencyError,
    UnsupportedOrder,
)
from .levy import IncrementSeries, PathGrid
from .model import CarmaModel, kernel

__all__ = [
    "RiemannArma",
    "simulate_riemann",
    "riemann_arma_coefficients",
    "chi_roots",
    "optimal_rules",
    "match_h_numerically",
]


@dataclass(frozen=True)
class RiemannArma:
    """MA(p-1) structure of the AR-filtered Riemann-sum process.

    ``theta_tilde`` holds theta~_0..theta~_{p-1} of the representation
    Phi_delta(B) Y~_n = sum_k (-1)^k theta~_k dL_{n-k}; the values absorb
    sigma, so theta~_0 = g(h delta). The driving increments have variance
    delta. ``derived_roots`` are the roots of the alternating-sign MA
    polynomial; ``invertible_flag`` says whether they all lie outside the
    unit circle.
    """

    delta: float
    h: float
    theta_tilde: np.ndarray
    derived_roots: np.ndarray
    invertible_flag: bool

    def ma_polynomial(self) -> np.ndarray:
        """Ascending coefficients (-1)^k theta~_k of the MA lag polynomial."""
        signs = (-1.0) ** np.arange(self.theta_tilde.size)
        return signs * self.theta_tilde

    def to_dict(self) -> dict:
        return {
            "delta": self.delta,
            "h": self.h,
            "theta_tilde": [float(v) for v in self.theta_tilde],
            "derived_roots": [[float(r.real), float(r.imag)] for r in self.derived_roots],
            "invertible": bool(self.invertible_flag),
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def simulate_riemann(
    model: CarmaModel,
    increments: IncrementSeries,
    h: float,
    truncation: Optional[int] = None,
) -> PathGrid:
    """Truncated Riemann-sum path Y~_n = sum_{j=0}^{N} g(delta (j+h)) dL_{n-j}.

    The default truncation N = ceil(delta^{-1.1}) makes the neglected
    tail vanish faster than any power of delta. The first N outputs need
    increments from before the start and are dropped, so the result has
    ``increments.n_coarse - N`` observations, aligned like simulate_path
    output with burn_in = N.
    """
    if not 0.0 <= h <= 1.0:
        raise ConfigError(f"rule h must lie in [0, 1], got {h}")
    delta = increments.delta
    dl = increments.coarse_values()
    n = dl.size
    N = int(math.ceil(delta ** -1.1)) if truncation is None else int(truncation)
    if N < 1:
        raise ConfigError("truncation must be at least 1")
    if N >= n:
        raise ConfigError(
            f"truncation {N} needs more than the {n} increments available"
        )
    ts = delta * (np.arange(N + 1) + h)
    w = kernel(model, ts)
    if h == 0.0:
        # right limit at the interval edge, consistent with theta~_0
        w[0] = model.sigma * model.ma_coefficients()[-1]
    y = fftconvolve(dl, w, mode="full")[N:n]
    return PathGrid(delta=delta, y_values=y, increments=increments, burn_in=N)


def riemann_arma_coefficients(model: CarmaModel, delta: float, h: float) -> RiemannArma:
    """Closed-form MA(p-1) coefficients of the filtered Riemann sum.

    theta~_k = sigma sum_l (b(lambda_l)/a'(lambda_l)) e^{h delta lambda_l}
               e_k({e^{delta lambda_j}}_{j != l})

    with e_k the elementary symmetric polynomials. Requires distinct AR
    roots (the weights b/a' are residues at simple poles).
    """
    if not 0.0 <= h <= 1.0:
        raise ConfigError(f"rule h must lie in [0, 1], got {h}")
    if not delta > 0:
        raise ConfigError("delta must be positive")
    if not model.has_distinct_ar_roots():
        raise DistinctRootsRequired(
            "Riemann-sum MA coefficients need distinct AR roots"
        )
    lam = model.ar_roots
    p = model.p
    factors = np.exp(delta * lam)
    theta = np.zeros(p, dtype=complex)
    for l in range(p):
        w = model.b_at(lam[l]) / model.a_prime_at(lam[l])
        front = w * np.exp(h * delta * lam[l])
        others = np.delete(factors, l)
        esym = elementary_symmetric(others)
        theta += front * esym
    theta = model.sigma * realify(theta, tol=1e-7)

    ma = ((-1.0) ** np.arange(p)) * theta
    scale = float(np.max(np.abs(ma)))
    if scale == 0.0:
        raise InternalConsistencyError("all Riemann MA coefficients vanished")
    # degree drops (h = 1 kills theta~_{p-1}) leave a numerically-zero
    # trailing coefficient; trim it before root finding
    k = ma.size
    while k > 1 and abs(ma[k - 1]) <= 1e-12 * scale:
        k -= 1
    trimmed = ma[:k]
    if trimmed.size >= 2:
        roots = np.roots(trimmed[::-1])
    else:
        roots = np.empty(0, dtype=complex)
    invertible = bool(
        abs(ma[0]) > 1e-12 * scale and np.all(np.abs(roots) > 1.0)
    )
    return RiemannArma(
        delta=float(delta),
        h=float(h),
        theta_tilde=theta,
        derived_roots=roots,
        invertible_flag=invertible,
    )


def chi_roots(p_minus_q: int, h: float) -> np.ndarray:
    """Leading-order MA roots chi of the filtered Riemann sum.

    Closed forms exist for p-q = 2 and 3; the roots depend on h only.
    For p-q = 3 the two roots multiply to ((1-h)/h)^2, so at most one of
    them can leave the unit circle for any rule.
    """
    if p_minus_q not in (2, 3):
        raise UnsupportedOrder(
            f"chi roots are available for p-q in {{2, 3}}, got {p_minus_q}"
        )
    if not 0.0 < h < 1.0:
        raise ConfigError(f"rule h must lie in (0, 1) for asymptotics, got {h}")
    if p_minus_q == 2:
        return np.array([(h - 1.0) / h])
    disc = math.sqrt(1.0 - 4.0 * (h - 1.0) * h)
    num = 2.0 * (h - 1.0) ** 2
    return np.array(
        [
            num / (2.0 * (h - 1.0) * h - 1.0 + disc),
            num / (2.0 * (h - 1.0) * h - 1.0 - disc),
        ]
    )


def optimal_rules(p_minus_q: int) -> dict:
    """Rules h whose Riemann sum matches the sampled-process asymptotics.

    Returns {"matching_h": ..., "invertible_matching_h": ...}. For
    p-q = 1 every h in (0,1) matches, represented by the string "(0,1)";
    otherwise the values are lists of floats (possibly empty).
    """
    if p_minus_q < 1:
        raise ConfigError("p - q must be at least 1")
    if p_minus_q == 1:
        return {"matching_h": "(0,1)", "invertible_matching_h": "(0,1)"}
    if p_minus_q == 2:
        lo = (3.0 - math.sqrt(3.0)) / 6.0
        hi = (3.0 + math.sqrt(3.0)) / 6.0
        return {"matching_h": [lo, hi], "invertible_matching_h": [hi]}
    if p_minus_q == 3:
        root = math.sqrt(225.0 - 30.0 * math.sqrt(30.0))
        lo = (15.0 - root) / 30.0
        hi = (15.0 + root) / 30.0
        return {"matching_h": [lo, hi], "invertible_matching_h": []}
    raise UnsupportedOrder(
        f"no closed-form matching rules for p-q = {p_minus_q}"
    )


def _ma_covariances(coeffs: np.ndarray) -> np.ndarray:
    c = np.asarray(coeffs, dtype=float)
    return np.array([np.dot(c[: c.size - k], c[k:]) for k in range(c.size)])


def _moment_system(m: int):
    """Leading-order matching equations, scaled free of sigma and delta.

    Left side: MA covariances of prod(1+eta z) over (2m-1)! prod(eta).
    Right side at rule h: h^(2(m-1))/((m-1)!)^2 times the MA covariances
    of prod(1-chi(h) z). Returns (target, rhs(h)) with arrays of length m.
    """
    etas = alpha_mod.eta_values(m - 1)
    asym = lag_poly_from_factors(-etas)
    target = _ma_covariances(asym) / (
        math.factorial(2 * m - 1) * float(np.prod(etas))
    )

    scale0 = (1.0 / math.factorial(m - 1)) ** 2

    def rhs(h: float) -> np.ndarray:
        poly = lag_poly_from_factors(chi_roots(m, h))
        return h ** (2 * (m - 1)) * scale0 * _ma_covariances(poly)

    return target, rhs


def match_h_numerically(p_minus_q: int) -> list:
    """Solve the leading-order moment-matching system for h by root finding.

    Scans (0,1) for sign changes of the highest-lag equation, refines by
    Brent's method, then verifies every equation of the system at the
    found rules (residual below 1e-10 of the target scale).
    """
    if p_minus_q not in (2, 3):
        raise UnsupportedOrder(
            f"numeric matching implemented for p-q in {{2, 3}}, got {p_minus_q}"
        )
    m = p_minus_q
    target, rhs = _moment_system(m)

    def f(h: float) -> float:
        return rhs(h)[m - 1] - target[m - 1]

    grid = np.linspace(1e-4, 1.0 - 1e-4, 1001)
    vals = np.array([f(h) for h in grid])
    roots = []
    for i in range(grid.size - 1):
        if vals[i] == 0.0:
            roots.append(grid[i])
        elif vals[i] * vals[i + 1] < 0.0:
            roots.append(brentq(f, grid[i], grid[i + 1], xtol=1e-14, rtol=1e-15))
    scale = float(np.max(np.abs(target)))
    for h in roots:
        resid = float(np.max(np.abs(rhs(h) - target)))
        if resid > 1e-10 * max(scale, 1.0):
            raise InternalConsistencyError(
                f"matching system residual {resid:.3e} at h = {h} exceeds "
                "tolerance; moment equations are inconsistent"
            )
    return sorted(roots)
