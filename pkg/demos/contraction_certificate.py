"""When the majorant fixed point certifies a solution, and when it cannot.

The weighted-norm contraction argument needs the smallness condition
K_gamma (1/R + 4 ||f|| + R/rho) < 1/2.  At eps = 1e-2 the schedule puts
the free-data norm near eps^M e^{kappa} ~ 5, so the certificate is
infeasible by a factor of ~400, even though Picard iteration converges
numerically in a handful of steps.  Deep in the schedule (eps = 1e-12)
the certificate holds outright: positive margin, geometric convergence
below the theoretical ratio, and the a-posteriori distance bound.
"""

import numpy as np

from cauchylab import instability as ins
from cauchylab import majorant as mj

ABAR = np.array([[0.0, -1.0], [1.0, 0.0]])
RBAR = np.array([1.0, 1.0j]) / np.sqrt(2.0)


def norm_params(eps, npts=97, s_frac=0.5):
    sched = ins.make_params(eps)
    s = np.linspace(0.0, s_frac * sched.sbar, npts)
    return mj.NormParams(
        gamma=sched.gamma, kappa=sched.kappa, eps=eps,
        R=sched.R, rho=sched.rho, sgrid=s,
    )


def main():
    c0, c1 = mj.compute_constants()
    c2 = mj.mixed_constant()
    print(f"majorant constants: c0 = {c0:.6f}, c1 = {c1:.6f}, c2 = {c2:.6f}")
    print()

    for eps in (1e-2, 1e-12):
        p = norm_params(eps)
        f = mj.free_profile_series(ABAR, RBAR, eps**3 / 2.0, p, K=8)
        res = mj.contraction_solve(
            mj.vdw_profile_nonlinearity(), ABAR, f, p, K=8,
            enforce_feasibility=False,
        )
        print(f"eps = {eps:.0e}:")
        print(f"  ||f||        = {res.fnorm:.6g}")
        print(f"  K_gamma      = {res.kgamma:.6g}  (K1 = {res.K1:.4g}, K2 = {res.K2:.4g})")
        print(f"  theory ratio = {res.theory_ratio:.6g}  (needs < 0.5)")
        print(f"  margin       = {res.margin:.6g}  -> "
              f"{'FEASIBLE' if res.feasible else 'infeasible'}")
        print(f"  Picard: {res.iterations} iterations, residual {res.residual:.2e},"
              f" converged = {res.converged}")
        if res.ratios:
            print(f"  measured contraction ratio: {max(res.ratios):.3e}")
        if res.feasible:
            print(f"  a-posteriori |u - f| <= ratio * |f|: "
                  f"{res.aposteriori_lhs:.3e} <= {res.aposteriori_rhs:.3e}"
                  f" ({'ok' if res.aposteriori_ok else 'VIOLATED'})")
        print()

    print("the eps = 1e-2 run converges but carries no certificate; the")
    print("certificate is an asymptotic statement and becomes available")
    print("once eps^M e^{kappa} is genuinely small.")


if __name__ == "__main__":
    main()
