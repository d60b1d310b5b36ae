"""The Hoelder quotient that no well-posedness estimate can cap.

Oscillatory data of amplitude eps^M and frequency 1/eps feeds the profile
solver; the ratio ||u||_{L2(lens)} / ||h||_{H^m}^alpha then grows as eps
shrinks, which is exactly the failure of Hoelder continuity of the
data-to-solution map.  On the cube observable the ratio follows a clean
power law whose exponent is known in closed form; the lens observable
shows the same divergence but mixes the two branches of
sbar = min(kappa/gamma, 1/(eps rho)) across a wide eps sweep, so its
fitted slope is steeper than the single-branch prediction.
"""

import numpy as np

from cauchylab import instability as ins
from cauchylab import symbol as sym


def main():
    system = sym.vdw_system()
    eps_list = [1e-2, 1e-3, 1e-4]
    template = dict(M=3.0, beta=0.1)

    print("schedule (M = 3, beta = 0.1):")
    print(f"{'eps':>8} {'kappa1':>9} {'sbar':>8} {'branch':>12} {'t_eps':>9}")
    for eps in eps_list:
        p = ins.make_params(eps, **template)
        branch = "kappa/gamma" if p.sbar == p.kappa / p.gamma else "1/(eps rho)"
        print(f"{eps:8.0e} {p.kappa1:9.3f} {p.sbar:8.3f} {branch:>12} {p.t_eps:9.2e}")

    print()
    rep = ins.hoelder_ratio_sweep(system, template, eps_list, K=16)
    print("lens observable:")
    print(f"{'eps':>8} {'l2(lens)':>11} {'||h||_Hm':>11} {'ratio':>11}")
    for r in rep.rows:
        print(f"{r.eps:8.0e} {r.l2_norm:11.4e} {r.hm_norm:11.4e} {r.ratio:11.4e}")
    print(f"  predicted single-branch exponent: {rep.predicted_exponent:+.4f}")
    print(f"  fitted slope over the mixed sweep: {rep.fitted_slope:+.4f}")
    print("  the ratio grows by ~4 decades per eps decade: divergence.")

    print()
    # branch-pure eps values (all on kappa/gamma); the cube has no
    # shrinking width, so its ratio is an exact power law there
    pure = [10.0**-3.5, 1e-4, 10.0**-4.5]
    crep = ins.cube_exponent_check(system, template, pure, K=8)
    exact = 3.0 * (1.0 - ins.make_params(1e-4, **template).sigma) + 2.0 - 3.0
    print("cube observable on the kappa-branch (exact power law):")
    for r in crep.rows:
        print(f"{r.eps:8.1e}  ratio = {r.ratio:11.4e}")
    print(f"  fitted slope {crep.slope:+.6f} vs closed form {exact:+.6f}")
    print(f"  mismatch {abs(crep.slope - exact):.2e}")


if __name__ == "__main__":
    main()
