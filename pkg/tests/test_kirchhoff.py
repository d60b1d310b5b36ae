"""Tests for the nonlocal (Kirchhoff-type) mode system.

All modes couple only through the scalar a(t) = ||u(t)||^2 - 1, so the
run collapses to one autonomous ODE A' = 1 - Phi(A).  That scalar
reduction plus the per-mode closed form is the oracle for the direct
self-consistent mode integration, and two exact identities pin the
bookkeeping:

    ||v(t)||^2 - ||u(t)||^2 = ||S_lam h||^2        (cosh^2 - sinh^2 = 1)
    E(t) = ||v||^2 + |U - 1| = ||S_lam h||^2 + 1    (while U < 1)

For a single excited pair, Phi(A) = w sinh^2(A) and the saturation level
A* = arcsinh(1) = ln(1 + sqrt(2)) is known analytically.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cauchylab import kirchhoff as kh

ASINH1 = 0.8813735870195430


def test_weight_families():
    d = kh.single_pair_weights(n=1, w=1.0)
    assert d.weights == {1: 0.5, -1: 0.5}
    assert d.total == 1.0

    d = kh.power_law_weights(s=4.0, norm=0.5, nmax=256)
    # ratio test against the defining formula w_n = c (1 + |n|)^{-s}
    assert abs(d.weights[3] / d.weights[1] - (2.0 / 4.0) ** 4) <= 1e-12
    assert d.weights[5] == d.weights[-5]
    # materialized mass is below the exact full-series normalization
    assert sum(d.weights.values()) < d.total <= sum(d.weights.values()) + 1e-6

    d = kh.exponential_weights(a=1.0, norm=1.0, nmax=256)
    assert abs(d.weights[4] / d.weights[2] - np.exp(-2.0)) <= 1e-12
    assert abs(sum(d.weights.values()) - 1.0) <= 1e-12


def test_u_of_a_small_cases():
    pair = kh.single_pair_weights(n=1, w=1.0)
    assert kh.u_of_a(pair, 4, 0.0) == 0.0
    assert abs(kh.u_of_a(pair, 4, ASINH1) - 1.0) <= 1e-12
    # two pairs, brute-force summation oracle
    d = kh.SpectrumData({1: 0.25, -1: 0.25, 2: 0.25, -2: 0.25}, total=1.0)
    want = 2 * 0.25 * np.sinh(0.5) ** 2 + 2 * 0.25 * np.sinh(1.0) ** 2
    assert abs(kh.u_of_a(d, 4, 0.5) - want) <= 1e-14


def test_saturation_guard():
    d = kh.SpectrumData({1000: 0.5, -1000: 0.5}, total=1.0)
    with pytest.raises(kh.SaturationError):
        kh.u_of_a(d, 1024, 1.0)


def test_zero_data_gives_linear_A():
    traj = kh.integrate_A(kh.SpectrumData({}, 0.0), lam=4, t_end=2.0, dt=1e-3)
    assert np.abs(traj.A - traj.t).max() <= 1e-12
    assert np.all(traj.U == 0.0)


def test_single_pair_saturates_at_asinh1():
    traj = kh.integrate_A(kh.single_pair_weights(1, 1.0), lam=4, t_end=10.0, dt=1e-4)
    assert abs(traj.A[-1] - ASINH1) <= 1e-6
    assert np.all(np.diff(traj.U) >= 0.0)
    assert traj.U[-1] < 1.0
    # A' = 1 - U, so t (1 - U(t)) <= A(t) <= t
    assert np.all(traj.A <= traj.t + 1e-12)
    assert np.all(traj.A >= traj.t * (1.0 - traj.U) - 1e-12)


def test_interpolated_A_matches_fine_run():
    d = kh.power_law_weights(s=4.0, norm=0.5, nmax=64)
    coarse = kh.integrate_A(d, lam=16, t_end=1.0, dt=1e-3)
    fine = kh.integrate_A(d, lam=16, t_end=1.0, dt=1e-4)
    for t in (0.123, 0.5117, 0.987):
        i = int(round(t / 1e-4))
        assert abs(coarse.A_at(t) - fine.A[i]) <= 1e-9


@pytest.mark.parametrize("swap", [False, True])
def test_closed_form_matches_direct_ode(swap):
    d = kh.power_law_weights(s=4.0, norm=0.5, nmax=64)
    lam, dt = 64, 1e-4
    traj = kh.integrate_A(d, lam=lam, t_end=2.0, dt=dt, swap_roles=swap)
    run = kh.direct_mode_ode(
        d, lam=lam, t_end=2.0, dt=dt, record_times=(0.5, 1.0, 2.0), swap_roles=swap
    )
    assert not run.diverged
    sup = 0.0
    for i, t in enumerate(run.times):
        ns, uc, vc = kh.closed_form_state(traj, d, t, swap_roles=swap)
        sup = max(sup, np.abs(run.uhat[i] - uc).max(), np.abs(run.vhat[i] - vc).max())
    assert sup <= 1e-8
    # conserved quantities of the direct run
    assert run.energy_drift <= 1e-6
    assert run.parseval_defect <= 1e-10


def test_closed_form_identities():
    d = kh.power_law_weights(s=4.0, norm=0.5, nmax=64)
    traj = kh.integrate_A(d, lam=32, t_end=1.0, dt=1e-3)
    ns, u0, v0 = kh.closed_form_state(traj, d, 0.0)
    assert np.abs(u0).max() == 0.0
    hhat = np.sqrt([d.weights.get(int(n), 0.0) for n in ns])
    assert np.abs(v0 - hhat).max() <= 1e-12
    ns, u1, v1 = kh.closed_form_state(traj, d, 1.0)
    mass = sum(w for n, w in d.weights.items() if abs(n) <= 32)
    defect = np.sum(np.abs(v1) ** 2 - np.abs(u1) ** 2) - mass
    assert abs(defect) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(
    st.dictionaries(
        st.integers(1, 8), st.floats(1e-6, 0.5), min_size=1, max_size=4
    ),
    st.floats(0.0, 2.0),
)
def test_parseval_identity_random_data(half_weights, A):
    weights = {}
    for n, w in half_weights.items():
        weights[n] = w / 2.0
        weights[-n] = w / 2.0
    d = kh.SpectrumData(weights, total=sum(weights.values()))
    traj = kh.KirchhoffTrajectory(
        lam=8, t=np.array([0.0, 1.0]), A=np.array([0.0, A]), U=np.array([0.0, 0.5])
    )
    ns, u, v = kh.closed_form_state(traj, d, 1.0)
    # the identity is exact in exact arithmetic; in floats the cancellation
    # error scales with the magnitudes being subtracted
    scale = 1.0 + float(np.sum(np.abs(v) ** 2))
    assert abs(np.sum(np.abs(v) ** 2 - np.abs(u) ** 2) - d.total) <= 1e-13 * scale


def test_mu_diagnostic_families():
    lams = [16, 32, 64, 128]
    pl = kh.mu_diagnostic(kh.power_law_weights(4.0, 0.5, nmax=512), lams)
    # annulus mass ~ lam^{-3}, so mu grows like 3 ln lam and mu/lam -> 0
    steps = np.diff(pl.mu)
    assert np.all(np.abs(steps - 3.0 * np.log(2.0)) <= 0.3)
    assert np.all(np.diff(pl.ratio) < 0.0)

    ex = kh.mu_diagnostic(kh.exponential_weights(1.0, 1.0, nmax=512), lams)
    # analytic-type data: mu/lam stays near 1/2 instead of vanishing
    assert abs(ex.ratio[-1] - 0.5) <= 0.1

    sp = kh.mu_diagnostic(kh.single_pair_weights(1, 1.0), [4, 8])
    assert np.all(np.isinf(sp.mu))


def test_bound_report_power_law():
    d = kh.power_law_weights(s=4.0, norm=0.5, nmax=512)
    rows = kh.verify_bound_and_limit(d, [16, 32, 64, 128], t=1.0, dt=1e-4, n0=4)
    assert all(r.passed for r in rows)
    assert all(r.bound_lhs <= 1e-6 for r in rows)
    rhs = [r.bound_rhs for r in rows]
    assert all(a > b for a, b in zip(rhs, rhs[1:]))
    # regression pin, hand-checked: mu(16) = -ln(2c sum_{8..16}(1+n)^-4),
    # K = ln(8 pi 1.5) = 3.6296..., rhs = (mu + K)/16 = 0.714...
    assert abs(rows[0].bound_rhs - 0.7144) <= 2e-3
    assert abs(kh.bound_constant(d) - 3.6296365356374003) <= 1e-12
    ru = [r.residual_u for r in rows]
    rv = [r.residual_v for r in rows]
    assert all(a > b for a, b in zip(ru, ru[1:]))
    assert all(a > b for a, b in zip(rv, rv[1:]))


def test_bound_report_single_pair_contrast():
    # analytic-like data: A saturates at A* > 0 and the low-mode residual
    # |u(1, n=1)| stays bounded away from zero along the sweep
    d = kh.single_pair_weights(1, 1.0)
    rows = kh.verify_bound_and_limit(d, [16, 32, 64], t=1.0, dt=1e-4, n0=1)
    for r in rows:
        assert np.isinf(r.bound_rhs) and r.passed
        # A(1) is already most of the way to A* = arcsinh(1), so the
        # low-mode amplitude sinh(A) sqrt(w) sits well above zero
        assert r.residual_u >= 0.5
    # and it is the same run for every lam (the pair is inside all cutoffs)
    ru = [r.residual_u for r in rows]
    assert max(ru) - min(ru) <= 1e-9


def test_trajectory_validation_catches_bad_runs():
    bad = kh.KirchhoffTrajectory(
        lam=4,
        t=np.array([0.0, 1.0]),
        A=np.array([0.0, 0.5]),
        U=np.array([0.0, 1.5]),
    )
    with pytest.raises(kh.TrajectoryInvariantError):
        bad.validate()
