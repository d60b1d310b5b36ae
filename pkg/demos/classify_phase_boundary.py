"""Where the mixed-type system loses hyperbolicity.

Sweeps the base state u across the spinodal and prints the symbol verdict
with the amplification rate gamma0 = sqrt(max(-p'(u), 0)).  The elliptic
window is exactly |u| < 1/sqrt(3): inside it every frequency-xi
perturbation grows like e^{gamma0 |xi| t}, so the data-to-solution map is
discontinuous in every Sobolev norm.
"""

import numpy as np

from cauchylab import symbol as sym


def main():
    system = sym.vdw_system()
    spinodal = 1.0 / np.sqrt(3.0)
    print(f"spinodal at |u| = 1/sqrt(3) = {spinodal:.6f}")
    print()
    print(f"{'u':>7}  {'pprime':>8}  {'verdict':<14}  {'gamma0':>7}")
    for u0 in np.linspace(-1.2, 1.2, 25):
        M = sym.principal_symbol(
            system, 0.0, 0.0, np.array([u0, 0.0]), np.array([1.0])
        )
        spec = sym.spectrum_classify(M)
        verdict = "hyperbolic" if spec.hyperbolic else "NON-hyperbolic"
        print(f"{u0:7.2f}  {3 * u0 * u0 - 1:8.4f}  {verdict:<14}  {spec.gamma0:7.4f}")

    print()
    print("frequency scaling at u = 0 (gamma0 is the rate PER unit frequency):")
    for xi in (1.0, 2.0, 4.0, 8.0):
        M = sym.principal_symbol(
            system, 0.0, 0.0, np.array([0.0, 0.0]), np.array([xi])
        )
        spec = sym.spectrum_classify(M)
        print(f"  |xi| = {xi:3.0f}: max |Im lambda| = {spec.gamma0:6.3f}"
              f"  -> growth e^{{{spec.gamma0:.0f} t}}")
    print()
    print("the exponent is linear in |xi|: no amount of Sobolev smoothing")
    print("absorbs e^{t |xi|}, which is the Hadamard instability mechanism.")


if __name__ == "__main__":
    main()
