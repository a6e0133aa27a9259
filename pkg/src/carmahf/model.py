"""Continuous-time ARMA (CARMA) models and their second-order quantities.

A CARMA(p, q) process driven by a zero-mean, unit-variance Levy process L
is the stationary solution of ``a(D) Y = sigma * b(D) D L`` where

    a(z) = z**p + a_1 z**(p-1) + ... + a_p = prod_i (z - lambda_i),
    b(z) = b_0 + b_1 z + ... + b_q z**q  = prod_j (z + mu_j),  b_q = 1.

The model is parametrized directly by the autoregressive roots
``lambda_i`` and the moving-average quantities ``mu_j`` (the MA roots are
``-mu_j``), so root-sensitive formulas never have to re-factor
polynomials. The state-space form uses the companion matrix A with
eigenvalues ``lambda_i``, ``Y = sigma * b' X``, ``dX = A X dt + e_p dL``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import quad
from scipy.linalg import expm

from ._poly import is_conjugate_closed, realify
from .errors import DistinctRootsRequired, ModelStructureError

__all__ = [
    "CarmaModel",
    "ValidationReport",
    "Violation",
    "validate",
    "kernel",
    "transfer",
    "autocovariance",
    "model_to_dict",
    "model_from_dict",
    "model_to_json",
    "model_from_json",
]

_CONJ_TOL = 1e-12


@dataclass(frozen=True)
class CarmaModel:
    """A CARMA(p, q) model given by its roots.

    Parameters
    ----------
    ar_roots : sequence of complex
        The p autoregressive roots ``lambda_1, ..., lambda_p``. Must be
        closed under conjugation.
    ma_mu : sequence of complex, optional
        The q quantities ``mu_1, ..., mu_q`` with ``b(z) = prod (z + mu_j)``,
        so the moving-average roots are ``-mu_j``. Must be closed under
        conjugation. Empty for a pure autoregression.
    sigma : float
        Scale of the driving noise, ``sigma > 0``.
    """

    ar_roots: np.ndarray
    ma_mu: np.ndarray = field(default_factory=lambda: np.array([], dtype=complex))
    sigma: float = 1.0

    def __post_init__(self):
        lam = np.atleast_1d(np.asarray(self.ar_roots, dtype=complex))
        mu = np.asarray(self.ma_mu, dtype=complex).reshape(-1)
        if lam.size < 1:
            raise ModelStructureError("need at least one autoregressive root")
        if mu.size >= lam.size:
            raise ModelStructureError(
                f"moving-average order q={mu.size} must be smaller than p={lam.size}"
            )
        sigma = float(self.sigma)
        if not sigma > 0.0:
            raise ModelStructureError(f"sigma must be positive, got {sigma}")
        if not is_conjugate_closed(lam, _CONJ_TOL):
            raise ModelStructureError("ar_roots are not closed under conjugation")
        if mu.size and not is_conjugate_closed(mu, _CONJ_TOL):
            raise ModelStructureError("ma_mu is not closed under conjugation")
        lam = lam.copy()
        mu = mu.copy()
        lam.setflags(write=False)
        mu.setflags(write=False)
        object.__setattr__(self, "ar_roots", lam)
        object.__setattr__(self, "ma_mu", mu)
        object.__setattr__(self, "sigma", sigma)

    @property
    def p(self) -> int:
        return self.ar_roots.size

    @property
    def q(self) -> int:
        return self.ma_mu.size

    @property
    def is_invertible(self) -> bool:
        """True when every mu_j has positive real part (vacuous for q=0)."""
        return bool(np.all(self.ma_mu.real > 0)) if self.q else True

    def ar_coefficients(self) -> np.ndarray:
        """Coefficients (1, a_1, ..., a_p) of a(z) in descending powers."""
        return realify(np.poly(self.ar_roots))

    def ma_coefficients(self) -> np.ndarray:
        """Coefficients (b_0, ..., b_{p-1}) of b(z), zero-padded above q."""
        mono = realify(np.poly(-self.ma_mu)) if self.q else np.array([1.0])
        b = np.zeros(self.p)
        b[: self.q + 1] = mono[::-1]
        return b

    def companion_matrix(self) -> np.ndarray:
        """The p-by-p companion matrix A with eigenvalues ``ar_roots``."""
        p = self.p
        a = self.ar_coefficients()
        A = np.zeros((p, p))
        if p > 1:
            A[:-1, 1:] = np.eye(p - 1)
        A[-1, :] = -a[1:][::-1]
        return A

    def a_at(self, z):
        """Evaluate a(z) as a product over the roots."""
        z = np.asarray(z, dtype=complex)
        out = np.ones_like(z)
        for lam in self.ar_roots:
            out = out * (z - lam)
        return out

    def a_prime_at(self, z):
        """Evaluate a'(z); for a root lambda_l this is prod_{j!=l}(lambda_l - lambda_j)."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for l in range(self.p):
            term = np.ones_like(z)
            for j, lam in enumerate(self.ar_roots):
                if j != l:
                    term = term * (z - lam)
            out = out + term
        return out

    def b_at(self, z):
        """Evaluate b(z) as a product over the mu quantities."""
        z = np.asarray(z, dtype=complex)
        out = np.ones_like(z)
        for mu in self.ma_mu:
            out = out * (z + mu)
        return out

    def has_distinct_ar_roots(self, tol: float = 1e-8) -> bool:
        lam = self.ar_roots
        scale = max(np.max(np.abs(lam)), 1.0)
        for i in range(lam.size):
            for j in range(i + 1, lam.size):
                if abs(lam[i] - lam[j]) <= tol * scale:
                    return False
        return True


@dataclass(frozen=True)
class Violation:
    code: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple

    @property
    def ok(self) -> bool:
        return not self.violations

    def __iter__(self):
        return iter(self.violations)


def validate(model: CarmaModel, tol: float = 1e-8) -> ValidationReport:
    """Check the standing assumptions on a structurally well-formed model.

    Returns a report whose violations distinguish three failure modes:
    ``noncausal_ar_root`` (some Re lambda >= 0), ``unit_axis_ma_root``
    (some Re mu == 0) and ``common_root`` (a(z) and b(z) share a zero).
    An empty report means the model is causal, has no purely imaginary
    MA root and the polynomials are coprime.
    """
    viol = []
    for lam in model.ar_roots:
        if lam.real >= 0:
            viol.append(
                Violation("noncausal_ar_root", f"autoregressive root {lam} has Re >= 0")
            )
    for mu in model.ma_mu:
        if mu.real == 0:
            viol.append(
                Violation("unit_axis_ma_root", f"mu = {mu} lies on the imaginary axis")
            )
    scale = max(np.max(np.abs(model.ar_roots)), 1.0)
    for lam in model.ar_roots:
        for mu in model.ma_mu:
            if abs(lam + mu) <= tol * scale:
                viol.append(
                    Violation(
                        "common_root",
                        f"a and b share the root {lam} (lambda = {lam}, -mu = {-mu})",
                    )
                )
    return ValidationReport(tuple(viol))


def _residue_weights(model: CarmaModel) -> np.ndarray:
    """The residues sigma * b(lambda_l) / a'(lambda_l) of the kernel."""
    lam = model.ar_roots
    return model.sigma * model.b_at(lam) / model.a_prime_at(lam)


def kernel(model: CarmaModel, t, method: str = "auto"):
    """Evaluate the kernel g with ``Y_t = int g(t - s) dL_s``.

    ``g(t) = sigma * b' expm(A t) e_p`` for t > 0 and 0 otherwise. With
    distinct autoregressive roots this equals the residue sum
    ``sigma * sum_l b(lambda_l)/a'(lambda_l) * exp(lambda_l t)``.

    Parameters
    ----------
    model : CarmaModel
    t : array_like
        Evaluation points; nonpositive points give 0.
    method : {"auto", "residue", "state_space"}
        "residue" requires distinct roots; "state_space" computes a
        matrix exponential per point; "auto" prefers the residue form
        and falls back to the state-space form for repeated roots.

    Returns
    -------
    ndarray or float
        g evaluated at ``t``, with the shape of the input.
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if method == "auto":
        method = "residue" if model.has_distinct_ar_roots() else "state_space"
    if method == "residue":
        if not model.has_distinct_ar_roots():
            raise DistinctRootsRequired(
                "residue form of the kernel needs distinct autoregressive roots"
            )
        w = _residue_weights(model)
        out = np.where(
            t_arr > 0,
            (np.exp(np.multiply.outer(t_arr, model.ar_roots)) @ w).real,
            0.0,
        )
    elif method == "state_space":
        A = model.companion_matrix()
        b = model.ma_coefficients()
        out = np.zeros_like(t_arr)
        for i, ti in enumerate(t_arr):
            if ti > 0:
                out[i] = model.sigma * (b @ expm(A * ti))[-1]
    else:
        raise ValueError(f"unknown kernel method {method!r}")
    return out if np.ndim(t) else float(out[0])


def transfer(model: CarmaModel, omega):
    """Fourier transform of the kernel, ``sigma * b(-i w) / a(-i w)``."""
    z = -1j * np.asarray(omega, dtype=float)
    return model.sigma * model.b_at(z) / model.a_at(z)


def autocovariance(model: CarmaModel, lags):
    """Autocovariance function of the stationary process at the given lags.

    With distinct autoregressive roots this uses the residue form

        gamma(t) = sigma**2 * sum_l  b(lambda_l) b(-lambda_l)
                   / (a'(lambda_l) a(-lambda_l)) * exp(lambda_l |t|),

    and otherwise falls back to numerical quadrature of
    ``int_0^inf g(s) g(s + |t|) ds``.
    """
    t_arr = np.abs(np.atleast_1d(np.asarray(lags, dtype=float)))
    if model.has_distinct_ar_roots():
        lam = model.ar_roots
        w = (
            model.sigma**2
            * model.b_at(lam)
            * model.b_at(-lam)
            / (model.a_prime_at(lam) * model.a_at(-lam))
        )
        out = (np.exp(np.multiply.outer(t_arr, lam)) @ w).real
    else:
        out = np.empty_like(t_arr)
        horizon = 60.0 / max(1e-12, -np.max(model.ar_roots.real))
        for i, ti in enumerate(t_arr):
            val, _ = quad(
                lambda s, ti=ti: kernel(model, s, "state_space")
                * kernel(model, s + ti, "state_space"),
                0.0,
                horizon,
                limit=400,
            )
            out[i] = val
    return out if np.ndim(lags) else float(out[0])


def model_to_dict(model: CarmaModel) -> dict:
    return {
        "p": model.p,
        "q": model.q,
        "ar_roots": [[z.real, z.imag] for z in model.ar_roots],
        "ma_mu": [[z.real, z.imag] for z in model.ma_mu],
        "sigma": model.sigma,
    }


def model_from_dict(d: dict) -> CarmaModel:
    try:
        lam = np.array([complex(re, im) for re, im in d["ar_roots"]])
        mu = np.array([complex(re, im) for re, im in d.get("ma_mu", [])], dtype=complex)
        sigma = float(d.get("sigma", 1.0))
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelStructureError(f"malformed model dictionary: {exc}") from exc
    model = CarmaModel(lam, mu, sigma)
    for key, want in (("p", model.p), ("q", model.q)):
        if key in d and int(d[key]) != want:
            raise ModelStructureError(
                f"declared {key}={d[key]} does not match {want} roots"
            )
    return model


def model_to_json(model: CarmaModel, **kwargs) -> str:
    return json.dumps(model_to_dict(model), **kwargs)


def model_from_json(text: str) -> CarmaModel:
    return model_from_dict(json.loads(text))
