"""What the Wold coefficients of the sampled process estimate.

Scaled Wold coefficients (sigma_delta / sqrt(delta)) psi_j look like a
kernel estimator on the grid t_j = j delta. But which kernel values? For
p - q = 2 they line up with g evaluated at the offset grid
t_j + h_bar delta, h_bar = (3+sqrt(3))/6. For p - q = 3 no constant
offset explains them at finite delta: the estimator carries a bias that
no single quadrature rule removes.

Run the CLI companion for CSV artifacts:
    carmahf kernel-study --out study_out
"""
import math

import numpy as np

from carmahf import CarmaModel, estimate_kernel, kernel


def show(model, name, offsets, delta=2.0**-6, points=8):
    t = delta * np.arange(points)
    ghat = estimate_kernel(model, delta, t)
    print(f"{name}, delta = {delta}")
    header = f"{'j':>3} {'ghat_j':>12}"
    for label, _ in offsets:
        header += f" {'g@' + label:>12}"
    print(header)
    for j in range(points):
        row = f"{j:>3} {ghat[j]:>12.6f}"
        for _, h in offsets:
            row += f" {kernel(model, t[j] + h * delta):>12.6f}"
        print(row)
    for label, h in offsets:
        g = kernel(model, t + h * delta)
        with np.errstate(divide="ignore"):
            rel = np.where(g == 0.0, np.inf, np.abs(ghat - g) / np.abs(g))
        print(f"  max relative gap vs {label}: {np.max(rel):.2%}")
    print()


def main():
    hbar = (3.0 + math.sqrt(3.0)) / 6.0
    show(
        CarmaModel([-0.7, -1.2], sigma=1.0), "CAR(2)",
        [("h=0.5", 0.5), ("h_bar", hbar)],
    )
    show(
        CarmaModel([-0.7, -1.2, -2.6], sigma=1.0), "CAR(3)",
        [("h=0.5", 0.5), ("h=1", 1.0)],
    )
    print("CAR(2): the h_bar column matches to a fraction of a percent.")
    print("CAR(3): every fixed offset leaves a visible bias near t = 0.")


if __name__ == "__main__":
    main()
