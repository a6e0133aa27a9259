"""Quadrature rules for the approximating Riemann sum.

Discretizing Y_t = int g(t-u) dL_u with node offset h in [0, 1] gives an
MA(infinity) series whose AR-filtered version is (p-1)-dependent, so it
carries an exact MA(p-1) signature with computable coefficients. The
offset decides invertibility: for p - q = 2 only h = (3+sqrt(3))/6 makes
the Riemann sum's MA root match the sampled process's spurious root.
"""
import math

import numpy as np

from carmahf import (
    CarmaModel,
    chi_roots,
    eta_values,
    match_h_numerically,
    optimal_rules,
    riemann_arma_coefficients,
)


def main():
    model = CarmaModel([-0.7, -1.2], sigma=1.0)
    delta = 2.0**-6

    print(f"MA roots of the Riemann sum for a CAR(2), delta = {delta}:\n")
    print(f"{'h':>6} {'theta~_0':>12} {'theta~_1':>12} {'root':>10} "
          f"{'invertible':>11}")
    for h in (0.0, 0.25, 0.5, 0.75, 1.0):
        arma = riemann_arma_coefficients(model, delta, h)
        root = arma.derived_roots[0].real if arma.derived_roots.size else math.inf
        print(f"{h:>6.2f} {arma.theta_tilde[0]:>12.4e} "
              f"{arma.theta_tilde[1]:>12.4e} {root:>10.4f} "
              f"{str(arma.invertible_flag):>11}")

    print("\nh = 0 and h = 1 drop the degree (left/right endpoint rules);")
    print("between them the root crosses the unit circle.\n")

    rules = optimal_rules(2)
    hbar = rules["invertible_matching_h"][0]
    print(f"matching offsets for p-q=2: {rules['matching_h']}")
    print(f"numerically recovered:      {match_h_numerically(2)}")
    print(f"invertible choice h_bar = (3+sqrt(3))/6 = {hbar:.12f}")
    print(f"chi_2(h_bar) = {chi_roots(2, hbar)[0]:.12f} "
          f"= sqrt(3) - 2 = {math.sqrt(3.0) - 2.0:.12f}")

    eta = eta_values(1)[0]
    print(f"\nRiemann MA root at h_bar vs sampled spurious root -1/eta:")
    for k in (4, 6, 8, 10):
        arma = riemann_arma_coefficients(model, 2.0**-k, hbar)
        print(f"  delta=2^-{k:<2d}  root {arma.derived_roots[0].real:+.6f}   "
              f"-1/eta {-1.0 / eta:+.6f}")


if __name__ == "__main__":
    main()
