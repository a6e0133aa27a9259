"""Coefficients of the odd power series of ``sinh(z) / (cosh(z) - 1 + x)``.

For fixed x != 0 the function is odd in z and analytic near 0, so

    sinh(z) / (cosh(z) - 1 + x) = sum_{k>=0} alpha_k(x) z**(2k+1).

Each coefficient is a rational function ``alpha_n(x) = P_n(x) /
((2n+1)! x**(n+1))`` with an integer polynomial P_n of degree n whose
leading coefficient is 1 and whose constant term is (-2)**(-n) (2n+1)!.
All n zeros of P_n are real, distinct and greater than 2; they control
the moving-average roots that pure sampling introduces into a sampled
continuous-time autoregression. The map ``eta`` sends such a zero xi to
the magnitude eta(xi) in (0, 1) of the corresponding spurious root.

Three independent constructions of P_n are provided: a differential
recursion (fast, the default), a power-series matching route, and an
explicit double sum over Stirling numbers (small n only). They agree
exactly in integer arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

import numpy as np

from ._poly import polyval_ascending
from .errors import UnsupportedOrder

__all__ = [
    "AlphaFunction",
    "alpha_by_recursion",
    "alpha_by_series",
    "alpha_by_formula",
    "xi_roots",
    "eta",
    "eta_values",
]


@dataclass(frozen=True)
class AlphaFunction:
    """The rational function ``alpha_n(x) = P_n(x) / ((2n+1)! x**(n+1))``.

    ``numerator`` holds the exact integer coefficients of P_n in
    ascending order; the denominator is ``(2n+1)! * x**(n+1)``.
    """

    n: int
    numerator: tuple

    @property
    def denominator_factorial(self) -> int:
        return factorial(2 * self.n + 1)

    def __call__(self, x):
        """Evaluate alpha_n at a float (or array of floats)."""
        x = np.asarray(x, dtype=float)
        num = polyval_ascending(np.array(self.numerator, dtype=float), x)
        val = num / (self.denominator_factorial * x ** (self.n + 1))
        return val if val.ndim else float(val)

    def evaluate_exact(self, x) -> Fraction:
        """Evaluate alpha_n at a Fraction, exactly."""
        x = Fraction(x)
        num = Fraction(0)
        for c in reversed(self.numerator):
            num = num * x + c
        return num / (self.denominator_factorial * x ** (self.n + 1))

    def numerator_at(self, x):
        """Evaluate P_n alone; exact when ``x`` is an int or Fraction."""
        if isinstance(x, (int, Fraction)):
            acc = x * 0
            for c in reversed(self.numerator):
                acc = acc * x + c
            return acc
        return polyval_ascending(np.array(self.numerator, dtype=float), x)


@lru_cache(maxsize=None)
def _numerators_by_recursion(n: int) -> tuple:
    """Integer coefficient tuples of P_0, ..., P_n via the differential recursion.

    The generating function solves the partial differential equation
    ``d^2 f / dz^2 = (x - 1) df/dx + x (x - 2) d^2 f / dx^2``; matching
    the coefficient of z**(2m+1) on both sides gives

        (2m+3)(2m+2) alpha_{m+1} = (x-1) alpha_m' + x(x-2) alpha_m'',

    which in numerator form becomes the integer recursion implemented
    here. (A published form of this recursion carries the factor
    (2m+3)(2m+1) instead; that normalization contradicts both the first
    coefficients alpha_1, alpha_2 and the series expansion, so the
    series-consistent constant is used.)
    """
    polys = [(1,)]
    for m in range(n):
        P = polys[-1]
        deg = len(P) - 1
        d1 = tuple(P[i] * i for i in range(1, len(P)))
        d2 = tuple(d1[i] * i for i in range(1, len(d1)))
        out = [0] * (deg + 3)

        def _add(scale, shift, poly):
            for i, v in enumerate(poly):
                out[i + shift] += scale * v

        # (x - 1) * (x P' - (m+1) P)
        t1 = [0] * (deg + 1)
        for i, v in enumerate(d1):
            t1[i + 1] += v
        for i, v in enumerate(P):
            t1[i] -= (m + 1) * v
        _add(1, 1, t1)
        _add(-1, 0, t1)
        # (x - 2) * (x^2 P'' - (2m+2) x P' + (m+1)(m+2) P)
        t2 = [0] * (deg + 1)
        for i, v in enumerate(d2):
            t2[i + 2] += v
        for i, v in enumerate(d1):
            t2[i + 1] -= (2 * m + 2) * v
        for i, v in enumerate(P):
            t2[i] += (m + 1) * (m + 2) * v
        _add(1, 1, t2)
        _add(-2, 0, t2)
        while len(out) > 1 and out[-1] == 0:
            out.pop()
        polys.append(tuple(out))
    return tuple(polys)


def alpha_by_recursion(n: int) -> AlphaFunction:
    """alpha_n from the differential recursion, with exact integer numerator."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return AlphaFunction(n, _numerators_by_recursion(n)[n])


@lru_cache(maxsize=None)
def _numerators_by_series(n: int) -> tuple:
    """Integer coefficient tuples of P_0, ..., P_n by power-series division.

    Writing the series identity ``sinh(z) = (cosh(z) - 1 + x) * sum_k
    alpha_k(x) z**(2k+1)`` and matching the coefficient of z**(2m+1)
    gives ``alpha_m x = 1/(2m+1)! - sum_{k<m} alpha_k / (2(m-k))!``;
    clearing denominators turns this into the integer recursion

        P_m = x**m - sum_{k<m} C(2m+1, 2k+1) P_k x**(m-1-k).
    """
    polys = [(1,)]
    for m in range(1, n + 1):
        out = [0] * (m + 1)
        out[m] = 1
        for k in range(m):
            c = comb(2 * m + 1, 2 * k + 1)
            for i, v in enumerate(polys[k]):
                out[i + m - 1 - k] -= c * v
        polys.append(tuple(out))
    return tuple(polys)


def alpha_by_series(n: int) -> AlphaFunction:
    """alpha_n from truncated power-series division, independent of the recursion."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return AlphaFunction(n, _numerators_by_series(n)[n])


def _stirling2(n: int, k: int) -> int:
    if k == 0:
        return 1 if n == 0 else 0
    if k > n:
        return 0
    row = [1] + [0] * k
    for i in range(1, n + 1):
        new = [0] * (k + 1)
        new[0] = 1 if i == 0 else 0
        for j in range(1, min(i, k) + 1):
            new[j] = j * row[j] + row[j - 1]
        row = new
    return row[k]


def alpha_by_formula(n: int) -> AlphaFunction:
    """alpha_n from the explicit double sum over Stirling numbers.

    Exact but combinatorially heavy; supported for n <= 4 as an
    independent cross-check of the other two constructions.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n > 4:
        raise UnsupportedOrder("explicit double-sum form implemented for n <= 4 only")
    coef = [Fraction(0)] * (n + 1)
    for j in range(n + 1):
        tot = Fraction(0)
        for k in range(j + 1, n + 1):
            inner = sum(
                comb(i + 1, j + 1) * comb(2 * k, 2 * i + 1)
                - comb(i, j + 1) * comb(2 * k, 2 * i)
                for i in range(j, k + 1)
            )
            tot += (
                factorial(2 * k)
                * _stirling2(2 * n + 1, 2 * k)
                * inner
                * Fraction(-2) ** (j + 1 - 2 * k)
            )
        for k in range(j, n + 1):
            inner = sum(
                comb(i + 1, j + 1) * comb(2 * k + 1, 2 * i + 1)
                - comb(i, j + 1) * comb(2 * k + 1, 2 * i)
                for i in range(j, k + 1)
            )
            tot += (
                factorial(2 * k + 1)
                * _stirling2(2 * n + 1, 2 * k + 1)
                * inner
                * Fraction(-2) ** (j - 2 * k)
            )
        coef[n - j] = tot
    ints = []
    for c in coef:
        if c.denominator != 1:
            raise UnsupportedOrder(f"double-sum form produced a non-integer coefficient {c}")
        ints.append(int(c))
    return AlphaFunction(n, tuple(ints))


def xi_roots(n: int, tol: float = 1e-13) -> np.ndarray:
    """All n zeros of P_n, sorted increasingly; each lies in (2, inf).

    Roots are isolated by sign changes of P_n on a geometric grid over
    (2, B], with B doubled (and the grid refined) until the sign at B
    matches the leading coefficient and exactly n sign changes appear.
    Each bracket is then bisected to relative width ``tol`` and polished
    with one Newton step.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return np.array([])
    coeffs = np.array(alpha_by_recursion(n).numerator, dtype=float)
    deriv = coeffs[1:] * np.arange(1, n + 1)

    def f(x):
        return polyval_ascending(coeffs, x)

    B = 8.0
    density = max(64, 32 * n)
    for _ in range(64):
        grid = 2.0 + (B - 2.0) * (np.geomspace(1.0, 1e4, density) - 1.0) / (1e4 - 1.0)
        vals = f(grid)
        signs = np.sign(vals)
        changes = np.nonzero(signs[:-1] * signs[1:] < 0)[0]
        if len(changes) == n and signs[-1] > 0:
            break
        B *= 2.0
        density *= 2
    else:
        raise RuntimeError(f"failed to isolate the {n} roots of P_{n}")

    roots = np.empty(n)
    for idx, c in enumerate(changes):
        lo, hi = grid[c], grid[c + 1]
        flo = f(lo)
        while hi - lo > tol * hi:
            mid = 0.5 * (lo + hi)
            fm = f(mid)
            if fm == 0.0:
                lo = hi = mid
                break
            if flo * fm < 0:
                hi = mid
            else:
                lo, flo = mid, fm
        x = 0.5 * (lo + hi)
        d = polyval_ascending(deriv, x)
        if d != 0.0:
            x = x - f(x) / d
        roots[idx] = x
    return roots


def eta(xi):
    """Spurious-root magnitude ``xi - 1 - sqrt((xi - 1)**2 - 1)`` for xi > 2.

    Strictly decreasing on (2, inf) with values in (0, 1).
    """
    arr = np.asarray(xi, dtype=float)
    if np.any(arr <= 2.0):
        raise ValueError("eta is defined for xi > 2")
    val = arr - 1.0 - np.sqrt((arr - 1.0) ** 2 - 1.0)
    return val if val.ndim else float(val)


def eta_values(n: int) -> np.ndarray:
    """eta at every zero of P_n, ordered by increasing xi.

    Since eta is strictly decreasing, the returned magnitudes are in
    decreasing order.
    """
    xs = xi_roots(n)
    return eta(xs) if xs.size else np.array([])
