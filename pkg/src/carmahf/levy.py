"""Levy driving noise and state-space simulation of CARMA sample paths.

All drivers are normalized so the driving process has mean 0 and
variance 1 at unit time; an increment over a step d therefore has mean 0
and variance d. Sample paths follow the exact state recursion

    X_{t+d} = expm(A d) X_t + int_0^d expm(A (d-s)) e_p dL_{t+s},

where the stochastic integral is realized exactly for Brownian driving
noise (jointly with the given increments, by conditional Gaussian
sampling) and by an Euler scheme on a refined subgrid for jump drivers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.linalg import expm, solve_continuous_lyapunov

from .errors import ConfigError, ModelStructureError
from .model import CarmaModel

__all__ = [
    "BrownianMotion",
    "CompoundPoissonNormal",
    "GammaCentered",
    "VarianceGamma",
    "Driver",
    "driver_from_spec",
    "driver_spec_string",
    "IncrementSeries",
    "PathGrid",
    "generate_increments",
    "simulate_path",
    "simulate_batch",
    "stationary_state_covariance",
    "default_burn_in",
    "export_path_csv",
]

# coarse steps simulated per block; fixed so that random-number draws do
# not depend on path length bookkeeping
_BLOCK = 2048

_DEFAULT_SUBGRID = 16


@dataclass(frozen=True)
class BrownianMotion:
    """Standard Brownian motion."""

    def sample(self, rng, delta, size):
        return rng.normal(0.0, math.sqrt(delta), size)


@dataclass(frozen=True)
class CompoundPoissonNormal:
    """Compound Poisson process with normal jumps, normalized to unit variance.

    Jumps arrive at the given rate; the jump law is N(0, 1/rate) so that
    the process variance at unit time is 1.
    """

    rate: float = 1.0

    def __post_init__(self):
        if not self.rate > 0:
            raise ConfigError("compound Poisson rate must be positive")

    def sample(self, rng, delta, size):
        counts = rng.poisson(self.rate * delta, size)
        return rng.standard_normal(size) * np.sqrt(counts / self.rate)


@dataclass(frozen=True)
class GammaCentered:
    """Centered gamma subordinator scaled to unit variance at unit time."""

    shape: float = 1.0
    scale: float = 1.0

    def __post_init__(self):
        if not (self.shape > 0 and self.scale > 0):
            raise ConfigError("gamma shape and scale must be positive")

    def sample(self, rng, delta, size):
        raw = rng.gamma(self.shape * delta, self.scale, size)
        centered = raw - self.shape * self.scale * delta
        return centered / (math.sqrt(self.shape) * self.scale)


@dataclass(frozen=True)
class VarianceGamma:
    """Symmetric variance-gamma process; nu is the variance of the gamma clock."""

    nu: float = 1.0

    def __post_init__(self):
        if not self.nu > 0:
            raise ConfigError("variance-gamma nu must be positive")

    def sample(self, rng, delta, size):
        clock = rng.gamma(delta / self.nu, self.nu, size)
        return rng.standard_normal(size) * np.sqrt(clock)


Driver = Union[BrownianMotion, CompoundPoissonNormal, GammaCentered, VarianceGamma]


def driver_from_spec(spec: str) -> Driver:
    """Parse a driver description like ``brownian``, ``cpn:5.0``,
    ``gamma:2.0:1.5`` or ``vg:0.5``."""
    parts = spec.split(":")
    name, args = parts[0].lower(), parts[1:]
    try:
        if name in ("brownian", "bm"):
            if args:
                raise ConfigError("brownian takes no parameters")
            return BrownianMotion()
        if name in ("cpn", "compound-poisson"):
            return CompoundPoissonNormal(float(args[0])) if args else CompoundPoissonNormal()
        if name == "gamma":
            if len(args) == 2:
                return GammaCentered(float(args[0]), float(args[1]))
            if not args:
                return GammaCentered()
            raise ConfigError("gamma takes two parameters: shape:scale")
        if name in ("vg", "variance-gamma"):
            return VarianceGamma(float(args[0])) if args else VarianceGamma()
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"malformed driver spec {spec!r}: {exc}") from exc
    raise ConfigError(f"unknown driver {name!r}")


def driver_spec_string(driver: Driver) -> str:
    if isinstance(driver, BrownianMotion):
        return "brownian"
    if isinstance(driver, CompoundPoissonNormal):
        return f"cpn:{driver.rate:g}"
    if isinstance(driver, GammaCentered):
        return f"gamma:{driver.shape:g}:{driver.scale:g}"
    if isinstance(driver, VarianceGamma):
        return f"vg:{driver.nu:g}"
    raise ConfigError(f"unknown driver object {driver!r}")


@dataclass(frozen=True)
class IncrementSeries:
    """Increments of a driving Levy process on a (possibly refined) grid.

    ``delta`` is the coarse grid step at which paths will be observed;
    ``values`` holds increments at step ``delta / subgrid_factor`` and
    has length ``n * subgrid_factor`` for n coarse steps.
    """

    delta: float
    values: np.ndarray
    driver: Driver
    seed: Optional[int] = None
    subgrid_factor: int = 1

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if not self.delta > 0:
            raise ConfigError("delta must be positive")
        if self.subgrid_factor < 1:
            raise ConfigError("subgrid_factor must be a positive integer")
        if values.size % self.subgrid_factor:
            raise ConfigError(
                "length of values must be a multiple of subgrid_factor"
            )

    @property
    def n_coarse(self) -> int:
        return self.values.size // self.subgrid_factor

    @property
    def fine_step(self) -> float:
        return self.delta / self.subgrid_factor

    def coarse_values(self) -> np.ndarray:
        """Increments aggregated to the coarse grid."""
        m = self.subgrid_factor
        if m == 1:
            return self.values
        return self.values.reshape(self.n_coarse, m).sum(axis=1)


@dataclass(frozen=True)
class PathGrid:
    """An equally spaced sample path.

    ``y_values[i]`` is the observation at time ``(burn_in + i + 1) * delta``;
    the first ``burn_in`` outputs of the underlying recursion were
    discarded. ``x_states`` (optional) holds the state vectors aligned
    with ``y_values``.
    """

    delta: float
    y_values: np.ndarray
    increments: Optional[IncrementSeries] = None
    x_states: Optional[np.ndarray] = None
    burn_in: int = 0

    @property
    def times(self) -> np.ndarray:
        return self.delta * (self.burn_in + 1 + np.arange(self.y_values.size))


def _rng_for(seed, stream: int):
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(stream,)))


def generate_increments(
    driver: Driver,
    seed: int,
    delta: float,
    n: int,
    subgrid_factor: Optional[int] = None,
) -> IncrementSeries:
    """Draw increments for ``n`` coarse steps of size ``delta``.

    ``subgrid_factor`` defaults to 1 for Brownian motion and to 16 for
    jump drivers (whose paths are simulated by subgrid Euler stepping).
    Increments are reproducible functions of (driver, seed, delta, n).
    """
    if subgrid_factor is None:
        subgrid_factor = 1 if isinstance(driver, BrownianMotion) else _DEFAULT_SUBGRID
    if n < 1:
        raise ConfigError("n must be positive")
    rng = _rng_for(seed, 0)
    values = driver.sample(rng, delta / subgrid_factor, n * subgrid_factor)
    return IncrementSeries(
        delta=float(delta),
        values=values,
        driver=driver,
        seed=seed,
        subgrid_factor=int(subgrid_factor),
    )


def stationary_state_covariance(model: CarmaModel) -> np.ndarray:
    """Solve A S + S A' = -e_p e_p' for the stationary state covariance.

    This is the covariance of the (sigma-free) state vector X; the
    observation variance is ``sigma**2 * b' S b``.
    """
    rep = [lam for lam in model.ar_roots if lam.real >= 0]
    if rep:
        raise ModelStructureError(
            f"stationary covariance needs all Re(lambda) < 0, got {rep}"
        )
    p = model.p
    ep = np.zeros(p)
    ep[-1] = 1.0
    return solve_continuous_lyapunov(model.companion_matrix(), -np.outer(ep, ep))


def default_burn_in(model: CarmaModel, delta: float) -> int:
    """Steps until the zero-start transient is negligible: ceil(20 / (min |Re lambda| delta))."""
    rate = np.min(np.abs(model.ar_roots.real))
    return int(math.ceil(20.0 / (rate * delta)))


def _discrete_transition(A: np.ndarray, d: float):
    """Exact one-step quantities for step size d.

    Returns (E, c, S) with ``E = expm(A d)``, ``c = int_0^d expm(A u) e_p du``
    and ``S = int_0^d expm(A u) e_p e_p' expm(A' u) du``, computed from
    block matrix exponentials.
    """
    p = A.shape[0]
    ep = np.zeros(p)
    ep[-1] = 1.0
    E = expm(A * d)
    M = np.zeros((2 * p, 2 * p))
    M[:p, :p] = A
    M[:p, p:] = np.outer(ep, ep)
    M[p:, p:] = -A.T
    S = expm(M * d)[:p, p:] @ E.T
    S = 0.5 * (S + S.T)
    N = np.zeros((p + 1, p + 1))
    N[:p, :p] = A
    N[:p, p] = ep
    c = expm(N * d)[:p, p]
    return E, c, S


def _gaussian_noise_factor(S: np.ndarray, c: np.ndarray, d: float) -> np.ndarray:
    """Square root of the state-noise covariance conditional on the increment."""
    C = S - np.outer(c, c) / d
    w, V = np.linalg.eigh(0.5 * (C + C.T))
    return V @ np.diag(np.sqrt(np.clip(w, 0.0, None)))


def _euler_aggregation_weights(E_fine: np.ndarray, m: int) -> np.ndarray:
    """Weights W with coarse-step Euler noise ``xi = sum_i W[:, i] u_i``.

    Column i propagates the i-th subgrid increment of a coarse interval
    to the end of the interval: ``W[:, i] = E_fine**(m-1-i) e_p``.
    """
    p = E_fine.shape[0]
    W = np.empty((p, m))
    v = np.zeros(p)
    v[-1] = 1.0
    for i in range(m - 1, -1, -1):
        W[:, i] = v
        if i:
            v = E_fine @ v
    return W


def simulate_path(
    model: CarmaModel,
    increments: IncrementSeries,
    init: str = "stationary",
    burn_in: Optional[int] = None,
    keep_states: bool = False,
    rng: Optional[np.random.Generator] = None,
) -> PathGrid:
    """Simulate the CARMA path driven by the given increments.

    Parameters
    ----------
    model : CarmaModel
    increments : IncrementSeries
        Driving increments. For Brownian motion the state noise is drawn
        exactly, jointly consistent with these increments; for jump
        drivers the subgrid Euler scheme is used, so the path is a
        deterministic function of the increments.
    init : {"stationary", "zero", "burnin"}
        Initial state: a draw from the stationary Gaussian law (matches
        second moments for any unit-variance driver), the zero vector,
        or zero followed by discarding ``burn_in`` outputs.
    burn_in : int, optional
        Number of leading outputs to discard when ``init="burnin"``;
        defaults to ``default_burn_in(model, delta)``.
    keep_states : bool
        Also record the state vectors.
    rng : numpy Generator, optional
        Source for the auxiliary randomness (exact Gaussian state noise,
        stationary initial state). Defaults to streams derived from
        ``increments.seed``; required if that seed is None and auxiliary
        randomness is needed.

    Returns
    -------
    PathGrid
        Observations ``y_values[i] = Y((burn_in + i + 1) delta)``.
    """
    if init not in ("stationary", "zero", "burnin"):
        raise ConfigError(f"unknown init {init!r}")
    p = model.p
    delta = increments.delta
    m = increments.subgrid_factor
    n = increments.n_coarse
    d_fine = increments.fine_step
    A = model.companion_matrix()
    bvec = model.ma_coefficients()
    exact = isinstance(increments.driver, BrownianMotion)

    def _aux(stream):
        nonlocal rng
        if rng is not None:
            return rng
        if increments.seed is None:
            raise ConfigError(
                "increments carry no seed; pass rng= for auxiliary randomness"
            )
        rng = _rng_for(increments.seed, stream)
        return rng

    # the stored state absorbs sigma, so y = b' X exactly
    if init == "stationary":
        L = np.linalg.cholesky(
            stationary_state_covariance(model) + 1e-15 * np.eye(p)
        )
        X = model.sigma * (L @ _aux(2).standard_normal((p, 1)))[:, 0]
        discard = 0
    else:
        X = np.zeros(p)
        if init == "burnin":
            discard = default_burn_in(model, delta) if burn_in is None else int(burn_in)
            if discard >= n:
                raise ConfigError(
                    f"burn-in of {discard} steps leaves no output from {n} steps"
                )
        else:
            discard = 0

    y = np.empty(n)
    states = np.empty((n, p)) if keep_states else None
    if exact:
        E, c, S = _discrete_transition(A, d_fine)
        F = model.sigma * _gaussian_noise_factor(S, c, d_fine)
        cw = model.sigma * c / d_fine
        u = increments.values
        gen = _aux(1)
        for k in range(n * m):
            X = E @ X + cw * u[k] + F @ gen.standard_normal(p)
            if (k + 1) % m == 0:
                j = (k + 1) // m - 1
                y[j] = bvec @ X
                if keep_states:
                    states[j] = X
    else:
        E_fine = expm(A * d_fine)
        E = np.linalg.matrix_power(E_fine, m)
        W = _euler_aggregation_weights(E_fine, m)
        u = increments.values.reshape(n, m)
        xi = model.sigma * (u @ W.T)
        for j in range(n):
            X = E @ X + xi[j]
            y[j] = bvec @ X
            if keep_states:
                states[j] = X
    return PathGrid(
        delta=delta,
        y_values=y[discard:],
        increments=increments,
        x_states=states[discard:] if keep_states else None,
        burn_in=discard,
    )


def simulate_batch(
    model: CarmaModel,
    driver: Driver,
    delta: float,
    n_steps: int,
    n_paths: int,
    rng: np.random.Generator,
    subgrid_factor: Optional[int] = None,
    init: str = "stationary",
):
    """Vectorized simulation of many stationary paths with their increments.

    Returns ``(y, dl)`` of shape (n_paths, n_steps): observations on the
    coarse grid and the coarse-grid driving increments, jointly
    distributed as in the model (exactly for Brownian motion, to first
    order in the subgrid step for jump drivers).
    """
    if subgrid_factor is None:
        subgrid_factor = 1 if isinstance(driver, BrownianMotion) else _DEFAULT_SUBGRID
    m = int(subgrid_factor)
    p = model.p
    A = model.companion_matrix()
    bvec = model.ma_coefficients() * model.sigma
    d_fine = delta / m

    if init == "stationary":
        L = np.linalg.cholesky(stationary_state_covariance(model) + 1e-15 * np.eye(p))
        X = L @ rng.standard_normal((p, n_paths))
    elif init == "zero":
        X = np.zeros((p, n_paths))
    else:
        raise ConfigError(f"unknown init {init!r} for batch simulation")

    y = np.empty((n_paths, n_steps))
    dl = np.empty((n_paths, n_steps))
    exact = isinstance(driver, BrownianMotion)
    if exact and m == 1:
        E, c, S = _discrete_transition(A, delta)
        F = _gaussian_noise_factor(S, c, delta)
        Mc = c / delta
        for s0 in range(0, n_steps, _BLOCK):
            sn = min(_BLOCK, n_steps - s0)
            dw = driver.sample(rng, delta, (sn, n_paths))
            z = rng.standard_normal((sn, p, n_paths))
            for i in range(sn):
                X = E @ X + np.outer(Mc, dw[i]) + F @ z[i]
                y[:, s0 + i] = bvec @ X
            dl[:, s0 : s0 + sn] = dw.T
    else:
        E_fine = expm(A * d_fine)
        E = np.linalg.matrix_power(E_fine, m)
        if exact:
            # exact conditional stepping on the fine grid, aggregated output
            Ef, cf, Sf = _discrete_transition(A, d_fine)
            F = _gaussian_noise_factor(Sf, cf, d_fine)
            Mc = cf / d_fine
            for s0 in range(0, n_steps, _BLOCK):
                sn = min(_BLOCK, n_steps - s0)
                dw = driver.sample(rng, d_fine, (sn * m, n_paths))
                z = rng.standard_normal((sn * m, p, n_paths))
                for i in range(sn * m):
                    X = Ef @ X + np.outer(Mc, dw[i]) + F @ z[i]
                    if (i + 1) % m == 0:
                        y[:, s0 + (i + 1) // m - 1] = bvec @ X
                dl[:, s0 : s0 + sn] = dw.reshape(sn, m, n_paths).sum(axis=1).T
        else:
            W = _euler_aggregation_weights(E_fine, m)
            for s0 in range(0, n_steps, _BLOCK):
                sn = min(_BLOCK, n_steps - s0)
                u = driver.sample(rng, d_fine, (n_paths, sn, m))
                xi = np.einsum("pm,csm->cps", W, u.swapaxes(0, 1))
                for i in range(sn):
                    X = E @ X + xi[i]
                    y[:, s0 + i] = bvec @ X
                dl[:, s0 : s0 + sn] = u.sum(axis=2)
    return y, dl


def export_path_csv(path: PathGrid, where, metadata: Optional[dict] = None) -> None:
    """Write a path as CSV with '#'-prefixed metadata header lines.

    Columns: index, t, y, then x1..xp when states were recorded, then dl
    (the coarse driving increment of each step) when increments are
    available.
    """
    meta = dict(metadata or {})
    cols = ["index", "t", "y"]
    p = path.x_states.shape[1] if path.x_states is not None else 0
    cols += [f"x{i+1}" for i in range(p)]
    dl = None
    if path.increments is not None:
        coarse = path.increments.coarse_values()
        dl = coarse[path.burn_in : path.burn_in + path.y_values.size]
        cols.append("dl")

    def _write(fh):
        for key, val in meta.items():
            fh.write(f"# {key}: {val}\n")
        fh.write(",".join(cols) + "\n")
        times = path.times
        for i in range(path.y_values.size):
            row = [str(i), repr(float(times[i])), repr(float(path.y_values[i]))]
            if p:
                row += [repr(float(v)) for v in path.x_states[i]]
            if dl is not None:
                row.append(repr(float(dl[i])))
            fh.write(",".join(row) + "\n")

    if hasattr(where, "write"):
        _write(where)
    else:
        with open(where, "w") as fh:
            _write(fh)
