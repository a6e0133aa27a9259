"""Small polynomial helpers used by several modules.

Coefficient arrays are ascending in the lag operator / indeterminate:
``c[k]`` multiplies ``z**k``.
"""
from __future__ import annotations

import numpy as np


def lag_poly_from_factors(factors) -> np.ndarray:
    """Expand ``prod_i (1 - f_i z)`` into ascending coefficients.

    The factor multiset must be closed under conjugation; the result is
    returned as a real array.
    """
    c = np.array([1.0 + 0.0j])
    for f in np.atleast_1d(np.asarray(factors, dtype=complex)):
        c = np.convolve(c, np.array([1.0, -f]))
    return realify(c)


def elementary_symmetric(values) -> np.ndarray:
    """All elementary symmetric functions e_0, ..., e_n of ``values``.

    Computed by sequentially convolving the factors of
    ``prod_i (1 + v_i y)``, so no subset enumeration is needed.
    """
    c = np.array([1.0 + 0.0j])
    for v in np.atleast_1d(np.asarray(values, dtype=complex)):
        c = np.convolve(c, np.array([1.0, v]))
    return c


def realify(c: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Drop a negligible imaginary part, complaining if it is not negligible."""
    c = np.asarray(c)
    if not np.iscomplexobj(c):
        return c
    scale = np.max(np.abs(c)) or 1.0
    resid = np.max(np.abs(c.imag)) / scale
    if resid > tol:
        raise ValueError(
            f"coefficients have non-negligible imaginary part (relative size {resid:.2e}); "
            "roots are probably not closed under conjugation"
        )
    return c.real.copy()


def is_conjugate_closed(roots, tol: float = 1e-12) -> bool:
    """Check that a root multiset is closed under complex conjugation."""
    roots = np.atleast_1d(np.asarray(roots, dtype=complex))
    pend = list(roots[np.abs(roots.imag) > 0])
    scale = max(np.max(np.abs(roots), initial=0.0), 1.0)
    while pend:
        r = pend.pop()
        dist = [abs(r.conjugate() - s) for s in pend]
        if not dist or min(dist) > tol * scale:
            return False
        pend.pop(int(np.argmin(dist)))
    return True


def conjugate_pair_up(roots, tol: float = 1e-8) -> np.ndarray:
    """Re-symmetrize an almost conjugate-closed multiset of roots.

    Each root with significant imaginary part is matched to its nearest
    conjugate partner and both are replaced by the exact pair
    ``(m, conj(m))`` with ``m`` the average of the two estimates. Roots
    with tiny imaginary part are projected onto the real axis.
    """
    roots = np.atleast_1d(np.asarray(roots, dtype=complex))
    scale = max(np.max(np.abs(roots), initial=0.0), 1.0)
    out = []
    pend = [complex(r) for r in roots]
    while pend:
        r = pend.pop()
        if abs(r.imag) <= tol * scale:
            out.append(complex(r.real, 0.0))
            continue
        dist = [abs(r.conjugate() - s) for s in pend]
        if not dist:
            raise ValueError("unpaired complex root; cannot re-symmetrize")
        j = int(np.argmin(dist))
        s = pend.pop(j)
        m = 0.5 * (r + s.conjugate())
        out.extend([m, m.conjugate()])
    return np.array(out)


def polyval_ascending(c, z):
    """Evaluate a polynomial with ascending coefficients at ``z`` (Horner)."""
    c = np.asarray(c)
    z = np.asarray(z)
    acc = np.zeros_like(z, dtype=np.result_type(c.dtype, z.dtype, float))
    for ck in c[::-1]:
        acc = acc * z + ck
    return acc
