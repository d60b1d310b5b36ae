"""Tests for the weighted majorant-series machinery.

Oracles:

* the constants c0, c1, c2 are defined by explicit convolution
  inequalities, so independent direct convolutions (np.convolve here,
  FFT-free) re-verify them coefficient by coefficient;
* phi Taylor factors are checked against high-precision differentiation
  of the series with mpmath;
* the Duhamel operator has closed forms for n = 0 (plain integration)
  and for resonant forcing f_n(s) = exp(i n s Abar) c (answer s f_n(s)),
  both checked directly;
* norm inequalities are checked on seeded random series, and one explicit
  instance documents why the operator bound needs the rate-optimized
  constant K1 rather than the bare semigroup constant.
"""

import mpmath as mp
import numpy as np
import pytest

from cauchylab import majorant as mj

ABAR = np.array([[0.0, -1.0], [1.0, 0.0]])  # skew model generator, rate 1


def default_params(s_end=0.9, npts=61, kappa=3.0):
    s = np.linspace(0.0, s_end, npts)
    return mj.NormParams(gamma=1.1, kappa=kappa, eps=0.01, R=2.0, rho=100.0, sgrid=s)


def random_series(rng, p, ncomp=2, K=5, T=2, scale=1.0):
    shape = (ncomp, 2 * K + 1, T + 1, p.sgrid.size)
    ns = np.arange(-K, K + 1).reshape(1, -1, 1, 1)
    ks = np.arange(T + 1).reshape(1, 1, -1, 1)
    mag = 10.0 ** rng.uniform(-6.0, 0.0, size=shape)
    c = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * mag
    c *= np.exp(-0.3 * np.abs(ns) - 0.7 * ks) * scale
    return mj.ProfileSeries(coeff=c, s_grid=p.sgrid)


# --- brackets and constants ----------------------------------------------


def test_weight_bracket_values_and_subadditivity():
    assert mj.weight_bracket(0) == 2
    assert mj.weight_bracket(-5) == 5
    rng = np.arange(-100, 101)
    br = np.where(rng == 0, 2, np.abs(rng))
    for p in rng:
        q = rng
        s = p + q
        bs = np.where(s == 0, 2, np.abs(s))
        assert np.all(bs <= br[p + 100] + br)


def test_constants_brute_force_values():
    c0, c1 = mj.compute_constants()
    # candidate at n=1 is 1/((1+1) * 1) = 0.5 (two-term hand sum)
    assert abs(mj.c0_candidates(4)[1] - 0.5) <= 1e-14
    # brute-force infimum sits at n = 9, well below the n -> inf limit
    # candidate 1/(2 sum 1/(p^2+1)) ~ 0.2408; trusting the limit would
    # overestimate c0 and break phi^2 << phi around n = 9
    assert abs(c0 - 0.21133506488350906) <= 1e-12
    # the c1 scan increases toward its limit, so the limit candidate binds
    c1_exact = float(1.0 / (2.0 * mp.pi * mp.coth(mp.pi)))
    assert abs(c1 - c1_exact) <= 1e-12
    assert 0.15 <= c1 <= 0.16
    c2 = mj.mixed_constant()
    assert 0.5 <= c2 <= 0.65
    assert abs(c2 - 0.5626960151002243) <= 1e-12  # regression pin, scan peak at n=6


def test_phi_squared_dominated_by_phi():
    c0, _ = mj.compute_constants()
    T = 200
    phi = mj.phi_series(T)
    assert phi.coeffs[0] == c0
    sq = np.convolve(phi.coeffs, phi.coeffs)[: T + 1]
    assert mj.dominates(mj.MajorantSeries(sq), phi)
    assert mj.dominates(phi, phi)
    assert mj.dominates(mj.MajorantSeries(np.zeros(T + 1)), phi)
    assert not mj.dominates(mj.MajorantSeries(2.0 * phi.coeffs), phi)


def test_c1_convolution_inequality_direct():
    _, c1 = mj.compute_constants()
    P = 4000
    ns = np.arange(-P, P + 1)
    w = c1 / (ns.astype(float) ** 2 + 1.0)
    conv = np.convolve(w, w)
    mid = 2 * P
    for n in range(0, 201):
        # truncation only discards positive terms, so conv underestimates;
        # the inequality must still hold with the tail allowance
        tail = 2.0 * c1 * c1 / (P - 200.0)
        assert conv[mid + n] <= c1 / (n * n + 1.0) + tail


def test_phi_taylor_factors_match_mpmath():
    c0, _ = mj.compute_constants()

    def phi_mp(z):
        return c0 * mp.nsum(lambda n: z**n / (n * n + 1), [0, mp.inf])

    for k in (0, 1, 3):
        for z in (0.0, 0.3, 0.9):
            want = float(mp.diff(phi_mp, z, k) / mp.factorial(k))
            got = mj.phi_taylor_factor(k, z)
            assert abs(got - want) <= 1e-10 * max(1.0, abs(want))
    # phi(0) = c0 and phi'(0) = c0/2 from the first two series terms
    assert abs(mj.phi_taylor_factor(0, 0.0) - c0) <= 1e-15
    assert abs(mj.phi_taylor_factor(1, 0.0) - c0 / 2.0) <= 1e-15


def test_phi_near_radius_edge():
    # k = 0 stays finite at z -> 1 (sum 1/(n^2+1)); k = 1 diverges there
    c0, _ = mj.compute_constants()
    lim = float(c0 * (mp.nsum(lambda n: 1 / (n * n + 1), [0, mp.inf])))
    val = mj.phi_taylor_factor(0, 1.0 - 1e-9)
    assert abs(val - lim) <= 1e-6 * lim
    assert mj.phi_taylor_factor(1, 1.0) == np.inf


# --- norms ----------------------------------------------------------------


def test_enorm_of_weight_function_is_one():
    p = default_params()
    K, T = 4, 2
    c = np.zeros((1, 2 * K + 1, T + 1, p.sgrid.size), dtype=complex)
    n, k = 3, 1
    c[0, n + K, k, :] = np.exp(mj.log_weight(n, k, p.sgrid, p, "plain"))
    u = mj.ProfileSeries(coeff=c, s_grid=p.sgrid)
    assert abs(mj.enorm(u, p) - 1.0) <= 1e-12
    u2 = mj.ProfileSeries(coeff=2.0 * c, s_grid=p.sgrid)
    assert abs(mj.enorm(u2, p) - 2.0) <= 1e-12


def test_enorm_log_domain_survives_huge_kappa():
    p = default_params(kappa=500.0)
    K = 3
    c = np.zeros((1, 2 * K + 1, 1, p.sgrid.size), dtype=complex)
    c[0, 1 + K, 0, :] = 0.5 * np.exp(mj.log_weight(1, 0, p.sgrid, p, "plain"))
    u = mj.ProfileSeries(coeff=c, s_grid=p.sgrid)
    v = mj.enorm(u, p)
    assert np.isfinite(v)
    assert abs(v - 0.5) <= 1e-12


def test_enorm_grid_refinement_monotone():
    p_coarse = default_params(npts=16)
    p_fine = default_params(npts=121)

    def build(p):
        K = 3
        ns = np.arange(-K, K + 1).reshape(-1, 1, 1)
        s = p.sgrid.reshape(1, 1, -1)
        c = (np.exp(-np.abs(ns) + 0.3 * s) * (1.0 + 0.2j))[None, :, :, :]
        return mj.ProfileSeries(coeff=c.astype(complex), s_grid=p.sgrid)

    # same smooth coefficient function sampled on nested grids: the sup
    # can only grow under refinement
    assert mj.enorm(build(p_fine), p_fine) >= mj.enorm(build(p_coarse), p_coarse) - 1e-15


def test_norm_domain_guard():
    s = np.linspace(0.0, 5.0, 11)  # beyond kappa/gamma = 3/1.1
    with pytest.raises(mj.NormDomainError):
        mj.NormParams(gamma=1.1, kappa=3.0, eps=0.01, R=2.0, rho=100.0, sgrid=s)


def test_algebra_submultiplicative_100_seeds():
    p = default_params()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        u = random_series(rng, p)
        v = random_series(rng, p)
        uv = mj.series_multiply(u, v)
        lhs = mj.enorm(uv, p)
        rhs = mj.enorm(u, p) * mj.enorm(v, p)
        worst = max(worst, lhs / rhs)
        assert lhs <= rhs * (1.0 + 1e-12)
    assert worst <= 1.0 + 1e-12


def test_algebra_mixed_bounds_50_seeds():
    p = default_params()
    c2 = mj.mixed_constant()
    rng = np.random.default_rng(77)
    for _ in range(50):
        u = random_series(rng, p)
        v = random_series(rng, p)
        uv = mj.series_multiply(u, v)
        assert 2.0 * mj.enorm(uv, p, "prime") <= (
            mj.enorm(u, p) * mj.enorm(v, p, "prime") * (1.0 + 1e-12)
        )
        assert mj.enorm(uv, p, "one") <= (
            c2 * mj.enorm(u, p) * mj.enorm(v, p, "one") * (1.0 + 1e-12)
        )


# --- semigroup and Duhamel -------------------------------------------------


def test_semigroup_bound_skew_generator():
    # normal generator with spectral rate 1: the weighted bound is exactly 1
    # for gamma >= 1 and grows like exp((1 - gamma) tau) otherwise
    k = mj.semigroup_bound_check(ABAR, gamma=1.1, nmax=16, s_end=4.0)
    assert abs(k - 1.0) <= 1e-9
    k_low = mj.semigroup_bound_check(ABAR, gamma=0.5, nmax=16, s_end=4.0)
    assert k_low > np.exp(0.5 * 16 * 4.0 * 0.95)


def test_semigroup_bound_nilpotent_generator():
    N = np.array([[0.0, 1.0], [0.0, 0.0]])
    # exp(i tau N) = I + i tau N: polynomial growth, so any gamma > 0 caps it
    k = mj.semigroup_bound_check(N, gamma=0.5, nmax=8, s_end=4.0)
    assert 1.0 <= k <= np.max((1.0 + np.linspace(0, 32, 5000)) * np.exp(-0.5 * np.linspace(0, 32, 5000))) + 1e-6


def test_duhamel_zero_and_polynomial_integration():
    s = np.linspace(0.0, 1.0, 10001)
    p = mj.NormParams(gamma=1.1, kappa=3.0, eps=0.01, R=2.0, rho=100.0, sgrid=s)
    K = 2
    z = np.zeros((2, 2 * K + 1, 1, s.size), dtype=complex)
    f = mj.ProfileSeries(coeff=z, s_grid=s)
    out = mj.duhamel_apply(f, ABAR, p)
    assert np.all(out.coeff == 0.0)

    # n = 0 is plain integration: f0 = (1 + 2s + 3s^2, 0) has the exact
    # antiderivative s + s^2 + s^3 (trapezoid error is the grid premise)
    c = z.copy()
    c[0, K, 0, :] = 1.0 + 2.0 * s + 3.0 * s * s
    out = mj.duhamel_apply(mj.ProfileSeries(coeff=c, s_grid=s), ABAR, p)
    want = s + s * s + s**3
    assert np.abs(out.coeff[0, K, 0, :] - want).max() <= 1e-8


def test_duhamel_resonant_closed_form():
    # f_n(s) = exp(i n s Abar) w integrates exactly to s exp(i n s Abar) w:
    # the transformed integrand is constant, so the exact-propagator
    # trapezoid recursion reproduces it to rounding
    s = np.linspace(0.0, 2.0, 201)
    p = mj.NormParams(gamma=1.1, kappa=3.0, eps=0.001, R=2.0, rho=100.0, sgrid=s)
    K, n = 3, 2
    w = np.array([0.3 + 0.1j, -0.7j])
    c = np.zeros((2, 2 * K + 1, 1, s.size), dtype=complex)
    props = mj.mode_propagators(ABAR, n, s)
    fvals = np.einsum("sij,j->si", props, w)
    c[:, n + K, 0, :] = fvals.T
    out = mj.duhamel_apply(mj.ProfileSeries(coeff=c, s_grid=s), ABAR, p)
    want = s[None, :] * fvals.T
    assert np.abs(out.coeff[:, n + K, 0, :] - want).max() <= 1e-12 * np.abs(want).max()


def test_duhamel_norm_bounds_with_operator_constants():
    p = default_params()
    dc = mj.duhamel_constants(ABAR, p, nmax=5)
    assert dc.K1 >= 1.0 / (2.0 * p.gamma)
    rng = np.random.default_rng(11)
    # constants certify the continuum integral; the discrete trapezoid can
    # overshoot it by O(ds^2), hence the relative slack
    for _ in range(50):
        f = random_series(rng, p, K=5, T=2)
        jf = mj.duhamel_apply(f, ABAR, p)
        assert mj.enorm(jf, p) <= dc.K1 * mj.enorm(f, p, "one") * (1.0 + 1e-3)
        assert mj.enorm(jf, p) <= (
            dc.K2 / (p.eps * p.rho) * mj.enorm(f, p, "prime") * (1.0 + 1e-3)
        )


def test_bare_semigroup_constant_is_not_enough():
    # resonant low-mode forcing accumulates a secular factor s, so the
    # bare semigroup constant (= 1 for the skew generator) cannot bound
    # ||J f|| / ||f||_1; this is why duhamel_constants optimizes over an
    # intermediate rate gamma_1
    s_end = 5.0
    s = np.linspace(0.0, s_end, 501)
    p = mj.NormParams(gamma=1.1, kappa=6.0, eps=0.001, R=2.0, rho=100.0, sgrid=s)
    ksg = mj.semigroup_bound_check(ABAR, p.gamma, nmax=2, s_end=s_end)
    K, n = 2, 1
    # growing eigendirection of exp(i s Abar), so the resonance is secular
    w = np.array([1.0, 1.0j]) / np.sqrt(2.0)
    c = np.zeros((2, 2 * K + 1, 1, s.size), dtype=complex)
    props = mj.mode_propagators(ABAR, n, s)
    c[:, n + K, 0, :] = np.einsum("sij,j->si", props, w).T
    f = mj.ProfileSeries(coeff=c, s_grid=s)
    ratio = mj.enorm(mj.duhamel_apply(f, ABAR, p), p) / mj.enorm(f, p, "one")
    assert ratio >= 1.5 * ksg
    dc = mj.duhamel_constants(ABAR, p, nmax=2)
    assert ratio <= dc.K1 * (1.0 + 1e-3)


# --- contraction ------------------------------------------------------------


def schedule_params(eps, M=3.0, beta=0.1, gamma0=1.0, npts=129, s_frac=0.5):
    kappa1 = M * abs(np.log(eps))
    gamma = (1.0 + beta) * gamma0
    kappa = (1.0 - beta) * kappa1
    R = eps ** (-beta * M)
    rho = eps ** (-2.0 * beta * M)
    sbar = min(kappa / gamma, 1.0 / (eps * rho))
    s = np.linspace(0.0, s_frac * sbar, npts)
    return mj.NormParams(gamma=gamma, kappa=kappa, eps=eps, R=R, rho=rho, sgrid=s)


def test_contraction_trivial_for_zero_nonlinearity():
    p = schedule_params(1e-2)
    f = mj.free_profile_series(ABAR, np.array([1.0, 1j]) / np.sqrt(2), 1e-6, p, K=8)
    res = mj.contraction_solve(
        lambda u: mj.series_zeros_like(u), ABAR, f, p, enforce_feasibility=False
    )
    assert res.iterations == 1
    assert res.residual <= 1e-14
    assert np.abs(res.series.coeff - f.coeff).max() == 0.0


def test_contraction_infeasible_at_moderate_eps():
    # the schedule at eps = 1e-2 puts ||f|| near 5, so the smallness
    # condition fails by a wide margin and must be reported, not patched
    p = schedule_params(1e-2)
    rbar = np.array([1.0, 1j]) / np.sqrt(2.0)
    f = mj.free_profile_series(ABAR, rbar, (1e-2) ** 3 / 2.0, p, K=8)
    with pytest.raises(mj.ContractionInfeasibleError) as ei:
        mj.contraction_solve(mj.vdw_profile_nonlinearity(), ABAR, f, p, K=8)
    assert ei.value.margin < 0.0


def test_contraction_certificate_small_amplitude():
    # deep in the schedule (eps = 1e-12) the free profile is small enough
    # that the full certificate holds: positive margin, geometric Picard
    # convergence, and the a-posteriori distance bound
    eps = 1e-12
    p = schedule_params(eps, npts=97)
    rbar = np.array([1.0, 1j]) / np.sqrt(2.0)
    f = mj.free_profile_series(ABAR, rbar, eps**3 / 2.0, p, K=8)
    res = mj.contraction_solve(mj.vdw_profile_nonlinearity(), ABAR, f, p, K=8)
    assert res.margin > 0.0
    assert res.iterations <= 30
    assert res.residual <= 1e-10
    assert all(r <= res.theory_ratio * (1.0 + 1e-9) for r in res.ratios)
    assert res.aposteriori_lhs <= res.aposteriori_rhs * (1.0 + 1e-12)
