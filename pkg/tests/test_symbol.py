"""Tests for pointwise symbol classification.

Oracle: the model symbols here are 2x2, so the spectrum is available in
closed form from the characteristic polynomial.  For the van der Waals
symbol M(u, xi) = xi * [[0, -1], [-p'(u), 0]] the eigenvalues satisfy
lambda^2 = xi^2 p'(u), hence

    p'(u) >= 0  ->  lambda = +-|xi| sqrt(p'(u))      (real, hyperbolic)
    p'(u) <  0  ->  lambda = +-i |xi| sqrt(-p'(u))   (elliptic)

Every classifier output is checked against these formulas rather than
against another eigensolver call.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cauchylab import symbol as sym


def vdw_symbol(u, xi):
    return np.array([[0.0, -xi], [-xi * (3.0 * u * u - 1.0), 0.0]])


def test_vdw_verdicts_match_quadratic_formula():
    sys = sym.vdw_system()
    for u in np.arange(-1.0, 1.01, 0.1):
        for xi in (1.0, -1.0, 2.0, -2.0):
            M = sym.principal_symbol(sys, 0.0, 0.0, np.array([u, 0.0]), xi)
            assert np.allclose(M, vdw_symbol(u, xi))
            sp = sym.spectrum_classify(M)
            dp = 3.0 * u * u - 1.0
            if dp >= 0.0:
                assert sp.hyperbolic
                assert sp.gamma0 == 0.0
                assert sp.lambda0 is None
            else:
                assert not sp.hyperbolic
                exact = abs(xi) * np.sqrt(-dp)
                assert abs(sp.gamma0 - exact) <= 1e-12 * exact


def test_upper_eigenpair_residual_and_phase():
    sys = sym.vdw_system()
    M = sym.principal_symbol(sys, 0.0, 0.0, np.array([0.25, 0.0]), 2.0)
    sp = sym.spectrum_classify(M)
    assert sp.lambda0.imag > 0
    r = sp.rbar
    assert abs(np.linalg.norm(r) - 1.0) <= 1e-13
    # residual of the returned pair, checked by direct multiplication
    resid = np.linalg.norm(M @ r - sp.lambda0 * r)
    assert resid <= 1e-8 * (1.0 + np.linalg.norm(M, 2))
    # leading entry is rotated to the positive real axis
    lead = r[np.argmax(np.abs(r) > 1e-12 * np.abs(r).max())]
    assert abs(lead.imag) <= 1e-13 and lead.real > 0


def test_projector_closed_form_rotation_block():
    # M = [[0,-1],[1,0]] has eigenpairs (+-i, (1, -+i)/sqrt(2)); the
    # projector onto the +i eigenspace is rr* = [[1, i], [-i, 1]] / 2.
    M = np.array([[0.0, -1.0], [1.0, 0.0]])
    P = sym.projector_upper(M)
    P_exact = 0.5 * np.array([[1.0, 1j], [-1j, 1.0]])
    assert np.allclose(P, P_exact, atol=1e-12)


def test_projector_invariants_on_elliptic_states():
    sys = sym.vdw_system()
    for u in (0.0, 0.3, -0.5, 0.55):
        M = sym.principal_symbol(sys, 0.0, 0.0, np.array([u, 0.0]), 1.0)
        P = sym.projector_upper(M)
        assert np.linalg.norm(P @ P - P) <= 1e-10
        assert np.linalg.norm(M @ P - P @ M) <= 1e-10
        assert abs(np.trace(P) - 1.0) <= 1e-10


def test_projector_of_hyperbolic_symbol_is_zero():
    M = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert np.allclose(sym.projector_upper(M), 0.0)


def test_ambiguous_band_raises():
    # exact complex diagonal: |Im| = 1.2e-9 sits inside (tol/2, 2 tol)
    M = np.diag([1.2e-9j, -1.2e-9j])
    with pytest.raises(sym.AmbiguousSpectrumError):
        sym.spectrum_classify(M)


def test_tiny_real_coupling_stays_decidable():
    # eigenvalues +-1e-6 (real) and +-1e-6 i: both far outside the band
    sp = sym.spectrum_classify(np.array([[0.0, 1.0], [1e-12, 0.0]]))
    assert sp.hyperbolic
    sp = sym.spectrum_classify(np.array([[0.0, 1.0], [-1e-12, 0.0]]))
    assert not sp.hyperbolic
    assert abs(sp.gamma0 - 1e-6) <= 1e-14


def test_complex_burgers_states():
    sys = sym.named_system("complex-burgers")
    M = sym.principal_symbol(sys, 0.0, 0.0, np.array([0.0, 1.0]), 1.0)
    assert np.allclose(M, [[0.0, -1.0], [1.0, 0.0]])
    sp = sym.spectrum_classify(M)
    assert not sp.hyperbolic
    assert abs(sp.lambda0 - 1j) <= 1e-12
    # real states are genuinely hyperbolic (eigenvalue u, twice)
    sp = sym.spectrum_classify(
        sym.principal_symbol(sys, 0.0, 0.0, np.array([0.7, 0.0]), 1.0)
    )
    assert sp.hyperbolic


def test_symbol_input_validation():
    sys = sym.vdw_system()
    with pytest.raises(ValueError):
        sym.principal_symbol(sys, 0.0, 0.0, np.array([0.0, 0.0]), [1.0, 2.0])
    bad = sym.FirstOrderSystem(
        "bad", 2, 1, lambda t, x, u: [np.array([[np.nan, 0.0], [0.0, 0.0]])]
    )
    with pytest.raises(sym.SymbolError):
        sym.principal_symbol(bad, 0.0, 0.0, np.zeros(2), 1.0)


def test_unknown_system_name():
    with pytest.raises(KeyError):
        sym.named_system("kdv")


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-10.0, 10.0), min_size=4, max_size=4))
def test_gamma0_matches_companion_roots(entries):
    # independent spectrum via the characteristic polynomial roots; near a
    # double root that oracle is only sqrt(eps)-accurate, so compare at a
    # tolerance both methods can meet
    M = np.array(entries).reshape(2, 2)
    roots = np.roots([1.0, -np.trace(M), np.linalg.det(M)])
    try:
        sp = sym.spectrum_classify(M)
    except sym.AmbiguousSpectrumError:
        return
    gamma_ref = float(np.max(np.abs(roots.imag)))
    scale = 1.0 + np.linalg.norm(M, 2)
    if gamma_ref > 1e-6 * scale:
        assert not sp.hyperbolic
        assert abs(sp.gamma0 - gamma_ref) <= 1e-6 * scale
    else:
        assert sp.gamma0 <= 1e-6 * scale
