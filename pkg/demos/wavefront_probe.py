"""Detecting analytic directions with the Gaussian transform.

The transform T h(y, lam) decays like e^{-lam eps1} at complexified
y = xbar - i t xi exactly when h is analytic near xbar.  Fitting
D(lam) = lam q(Im y) - ln |T h| against a lam + b ln lam + c and
comparing the slope a to a margin separates analytic signals from kinked
ones.  The second half feeds boundary data into the model equation
(d_x + i d_y) u = u^2, whose solvability needs analytic data: Fourier
coefficients of 1/h must decay fast enough to extend holomorphically.
"""

import numpy as np

from cauchylab import fbi


def main():
    chi = fbi.ChiCutoff(center=np.array([0.0]), r_in=0.4, r_out=1.0)
    spec = fbi.GaussianTransformSpec(
        Q=np.array([[1.0]]), chi=chi, lambdas=2.0 ** np.arange(4, 11)
    )

    signals = {
        "gaussian  exp(-x^2)": lambda x: np.exp(-(x**2)),
        "cosine    1+0.3cos2x": lambda x: 1.0 + 0.3 * np.cos(2.0 * x),
        "lorentz   1/(1+x^2)": lambda x: 1.0 / (1.0 + x * x),
        "abs       |x|": lambda x: np.abs(x),
        "ramp_sq   max(x,0)^2": lambda x: np.maximum(x, 0.0) ** 2,
        "abs_cube  |x|^3": lambda x: np.abs(x) ** 3,
    }
    print("decay classification at xbar = 0, probe depth t = 0.25:")
    print(f"{'signal':<22} {'eps1_hat':>10} {'margin':>9}  verdict")
    for name, h in signals.items():
        rep = fbi.decay_classify(h, 0.0, 1.0, spec)
        print(f"{name:<22} {rep.eps1_hat:10.5f} {rep.margin:9.5f}  {rep.verdict}")
    print("  the three smooth-but-kinked signals sit an order of magnitude")
    print("  below the margin; the analytic ones an order above it.")

    print()
    print("model equation (d_x + i d_y) u = u^2 from boundary data h:")
    ys = np.linspace(0.0, 2.0 * np.pi, 256, endpoint=False)
    sol = fbi.model_cr_solver(0.5 + 0.05 * np.cos(ys), x_max=0.5)
    print(f"  h = 0.5 + 0.05 cos y : {sol.verdict}, PDE residual {sol.residual:.2e}")

    ywrap = np.mod(ys + np.pi, 2.0 * np.pi) - np.pi
    sol2 = fbi.model_cr_solver(1.0 + 0.3 * np.abs(ywrap), x_max=0.5)
    print(f"  h = 1 + 0.3|y|       : {sol2.verdict}"
          f" (positive-frequency decay slope {sol2.decay_slope:+.4f},"
          f" needs < -0.75)")
    print()
    print("both halves agree with the classical picture: analyticity of the")
    print("data is exactly what solvability of the model problem costs.")


if __name__ == "__main__":
    main()
