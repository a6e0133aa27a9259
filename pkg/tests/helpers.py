"""Shared test utilities: random model generation and small oracles."""
import numpy as np

from carmahf import CarmaModel


def _draw_roots(rng, count, re_range, im_range, min_sep):
    """Conjugate-closed points with Re in re_range, pairwise separation >= min_sep."""
    for _ in range(200):
        n_pairs = rng.integers(0, count // 2 + 1)
        n_real = count - 2 * n_pairs
        roots = []
        for _ in range(n_real):
            roots.append(complex(rng.uniform(*re_range), 0.0))
        for _ in range(n_pairs):
            z = complex(rng.uniform(*re_range), rng.uniform(*im_range))
            roots.extend([z, z.conjugate()])
        roots = np.array(roots, dtype=complex)
        ok = True
        for i in range(count):
            for j in range(i + 1, count):
                if abs(roots[i] - roots[j]) < min_sep:
                    ok = False
        if ok:
            return roots
    raise RuntimeError("failed to draw separated roots")


def random_carma(rng, p=None, q=None, invertible=True, max_p=4):
    """A random well-posed model with distinct AR roots.

    ``invertible=True`` keeps every Re(mu) positive, ``False`` flips at
    least one sign, ``None`` flips each sign with probability 1/2.
    """
    if p is None:
        p = int(rng.integers(1, max_p + 1))
    if q is None:
        q = int(rng.integers(0, p))
    for _ in range(200):
        lam = _draw_roots(rng, p, (-2.5, -0.25), (0.3, 2.0), 0.15)
        if q:
            mu = _draw_roots(rng, q, (0.25, 2.5), (0.3, 2.0), 0.1)
            # sign flips act on whole conjugate pairs so the set stays closed
            flip = np.zeros(q, dtype=bool)
            if invertible is not True:
                i = 0
                first = True
                while i < q:
                    width = 2 if mu[i].imag else 1
                    if invertible is None:
                        flip[i : i + width] = rng.random() < 0.5
                    else:
                        flip[i : i + width] = first or rng.random() < 0.5
                    first = False
                    i += width
            mu = np.where(flip, -mu.conjugate(), mu)
        else:
            mu = np.array([], dtype=complex)
        # coprimality: a and b must not share a zero (lambda = -mu)
        if q and np.min(np.abs(lam[:, None] + mu[None, :])) < 0.1:
            continue
        sigma = float(rng.uniform(0.5, 2.0))
        return CarmaModel(lam, mu, sigma)
    raise RuntimeError("failed to draw a well-posed model")


def ma_autocovariances(coeffs):
    """gamma(k) = sum_j c_j c_{j+k} for an MA polynomial, k = 0..len-1."""
    c = np.asarray(coeffs, dtype=float)
    return np.array([np.dot(c[: c.size - k], c[k:]) for k in range(c.size)])


def stable_lag_factors(rng, count, max_modulus=0.9):
    """Conjugate-closed factors f for a lag polynomial prod(1 - f z), all
    with |f| below max_modulus so the polynomial keeps its roots outside
    the unit circle."""
    if count == 0:
        return np.array([], dtype=complex)
    for _ in range(200):
        f = _draw_roots(rng, count, (-max_modulus, max_modulus), (0.05, 0.7), 0.02)
        if np.max(np.abs(f)) < max_modulus:
            return f
    raise RuntimeError("failed to draw factors inside the modulus bound")
