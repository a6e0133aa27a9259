"""The sampled process is ARMA(p, p-1); watch its MA side converge.

Sampling a CAR(2) on a grid of step delta produces a weak ARMA(2,1)
whose MA coefficient does not vanish as delta -> 0: it converges to
2 - sqrt(3), i.e. the root of the MA polynomial tends to a spurious
limit determined only by p - q. The innovation variance collapses like
delta^3 with a known constant. Both limits come out of the asymptotic
form, and exact spectral factorization agrees with them already at
moderate delta.
"""
import math

import numpy as np

from carmahf import CarmaModel, asymptotic_arma, eta_values, sampled_arma


def main():
    model = CarmaModel([-0.7, -1.2], sigma=1.0)
    eta = eta_values(1)[0]
    print(f"spurious MA coefficient limit: 2 - sqrt(3) = {eta:.12f}\n")

    print(f"{'delta':>10} {'theta_1 (exact)':>16} {'theta_1 (asym)':>15} "
          f"{'sigma2 ratio':>13}")
    for k in (2, 4, 6, 8, 10):
        delta = 2.0**-k
        exact = sampled_arma(model, delta)
        asym = asymptotic_arma(model, delta)
        ratio = exact.sigma2_delta / (delta**3 / (6.0 * eta))
        print(f"{delta:>10.6f} {exact.theta[1]:>16.10f} "
              f"{asym.theta[1]:>15.10f} {ratio:>13.6f}")

    delta = 2.0**-6
    exact = sampled_arma(model, delta)
    print(f"\nat delta = {delta}:")
    print(f"  AR roots  {np.sort(np.roots(exact.phi[::-1]))}")
    print(f"  MA root   {exact.ma_roots()[0]:.8f}  (minimum phase: "
          f"{exact.is_min_phase()})")
    print(f"  -1/eta    {-1.0 / eta:.8f}")
    print("\nthe sampled MA root converges to -1/eta, not to infinity: the")
    print("sampled representation of a CAR process is never white noise.")


if __name__ == "__main__":
    main()
