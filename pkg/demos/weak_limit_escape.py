"""Filtered solutions that converge to the wrong dynamics.

For heavy-tailed (Sobolev-type) data the filtered runs satisfy the bound
1 - U(t) <= (mu(lam) + K) / (t lam) with mu(lam)/lam -> 0, so U -> 1 and
the weak limit is the data frozen in time: the limit does not solve the
formal PDE at all.  Analytic-type single-pair data has mu(lam)/lam
bounded below, the bound degenerates, and the state genuinely moves:
A(t) saturates at ln(1 + sqrt 2) and the low modes keep order-one energy.
"""

import numpy as np

from cauchylab import kirchhoff as kh


def main():
    lambdas = [16, 32, 64, 128]
    data = kh.power_law_weights(s=4.0, norm=0.5, nmax=4096)
    print("power-law data (heavy tail), t = 1:")
    print(f"{'lam':>5} {'mu/lam':>9} {'1-U':>10} {'bound rhs':>10} {'res_u':>8}")
    for row in kh.verify_bound_and_limit(data, lambdas, t=1.0, dt=1e-3):
        print(
            f"{row.lam:5d} {row.mu / row.lam:9.4f} {row.bound_lhs:10.2e}"
            f" {row.bound_rhs:10.2e} {row.residual_u:8.2e}"
        )
    print("  residuals shrink with lam: the weak limit is the frozen data.")

    print()
    pair = kh.single_pair_weights(n=1, w=1.0)
    print("single-pair data (analytic-like): mu(lam)/lam never decays,")
    diag = kh.mu_diagnostic(pair, lambdas)
    ratios = ["inf" if np.isinf(r) else f"{r:.4f}" for r in diag.ratio]
    print(f"  mu/lam over the sweep: {ratios} (infinite for a pure pair)")
    traj = kh.integrate_A(pair, 128, 12.0, dt=1e-3)
    a_star = float(np.log(1.0 + np.sqrt(2.0)))
    print(f"  A(12) = {traj.A[-1]:.9f}, ln(1+sqrt2) = {a_star:.9f}")
    rows = kh.verify_bound_and_limit(pair, lambdas, t=1.0, dt=1e-3)
    print(f"  low-mode residuals across lam: {[round(r.residual_u, 4) for r in rows]}")
    print("  identical for every lam and far from zero: no escape to the")
    print("  frozen state, the dynamics saturates at its own equilibrium.")


if __name__ == "__main__":
    main()
