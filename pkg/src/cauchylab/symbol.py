"""Pointwise spectral analysis of first order quasilinear systems.

Systems have the form

    d_t u = sum_j A_j(t, x, u) d_{x_j} u + F(t, x, u),

and the object of interest is the principal symbol

    M(t, x, u, xi) = sum_j xi_j A_j(t, x, u).

Sobolev well-posedness of the Cauchy problem hinges on M having real
spectrum: a single eigenvalue with Im lambda = gamma0 > 0 at a reachable
state feeds oscillations at spatial frequency lam an amplification factor
exp(gamma0 * lam * t), which defeats every finite number of derivatives.
The routines here classify states, extract the dominant complex eigenpair
that drives that growth, and build the spectral projector onto the
unstable part of the symbol.

Verdicts are conservative.  Tolerances scale with the matrix norm, and a
spectrum falling inside the undecidable band raises AmbiguousSpectrumError
instead of guessing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "SymbolError",
    "AmbiguousSpectrumError",
    "FirstOrderSystem",
    "SymbolSpectrum",
    "vdw_pressure",
    "vdw_pressure_deriv",
    "vdw_pressure_potential",
    "vdw_spinodal",
    "vdw_system",
    "complex_burgers_system",
    "named_system",
    "principal_symbol",
    "spectrum_classify",
    "projector_upper",
]


class SymbolError(RuntimeError):
    """Numerical failure while analyzing a symbol."""


class AmbiguousSpectrumError(SymbolError):
    """Spectrum falls inside the tolerance band; the verdict cannot be certified."""


CoeffFn = Callable[[float, np.ndarray, np.ndarray], Sequence[np.ndarray]]


@dataclass(frozen=True)
class FirstOrderSystem:
    """Quasilinear system d_t u = sum_j A_j(t, x, u) d_j u + F(t, x, u).

    coeff(t, x, u) returns the list [A_1, ..., A_d] of (nfields, nfields)
    arrays; source is optional and defaults to zero.
    """

    name: str
    nfields: int
    dim: int
    coeff: CoeffFn
    source: Optional[Callable[[float, np.ndarray, np.ndarray], np.ndarray]] = None


# --- van der Waals model -------------------------------------------------
#
# Lagrangian isothermal gas dynamics  u_t + v_x = 0,  v_t + p(u)_x = 0
# with the cubic pressure p(u) = u^3 - u.  Written as U_t = A(U) U_x this
# gives A = [[0, -1], [-p'(u), 0]]; the symbol has eigenvalues
# +-xi sqrt(p'(u)), so the system changes type across |u| = 1/sqrt(3).


def vdw_pressure(u):
    """Cubic non-monotone pressure p(u) = u^3 - u."""
    u = np.asarray(u, dtype=float)
    return u * (u * u - 1.0)


def vdw_pressure_deriv(u):
    """p'(u) = 3u^2 - 1, negative exactly on the spinodal interval |u| < 1/sqrt(3)."""
    u = np.asarray(u, dtype=float)
    return 3.0 * u * u - 1.0


def vdw_pressure_potential(u):
    """Antiderivative P(u) = u^4/4 - u^2/2 of p, normalized by P(0) = 0."""
    u = np.asarray(u, dtype=float)
    return 0.25 * u * u * (u * u - 2.0)


def vdw_spinodal(u):
    """True where the vdW symbol is elliptic, i.e. p'(u) < 0."""
    return vdw_pressure_deriv(u) < 0.0


def _vdw_coeff(t, x, u):
    u0 = float(np.asarray(u, dtype=float).reshape(-1)[0])
    return [np.array([[0.0, -1.0], [-vdw_pressure_deriv(u0), 0.0]])]


def vdw_system() -> FirstOrderSystem:
    """Van der Waals gas dynamics as a 2x2 first order system in (u, v)."""
    return FirstOrderSystem("vdw", nfields=2, dim=1, coeff=_vdw_coeff)


def _complex_burgers_coeff(t, x, w):
    a, b = (float(z) for z in np.asarray(w, dtype=float).reshape(-1)[:2])
    return [np.array([[a, -b], [b, a]])]


def complex_burgers_system() -> FirstOrderSystem:
    """Complex Burgers equation w_t = w w_x in real coordinates (Re w, Im w).

    The symbol xi * [[u, -v], [v, u]] has eigenvalues xi (u +- i v): the
    problem is hyperbolic exactly on the real line v = 0 and elliptic
    everywhere else.
    """
    return FirstOrderSystem("complex-burgers", nfields=2, dim=1, coeff=_complex_burgers_coeff)


_SYSTEMS = {
    "vdw": vdw_system,
    "complex-burgers": complex_burgers_system,
}


def named_system(name: str) -> FirstOrderSystem:
    """Look up one of the bundled model systems by name."""
    try:
        factory = _SYSTEMS[name]
    except KeyError:
        raise KeyError(
            f"unknown system {name!r}; available: {sorted(_SYSTEMS)}"
        ) from None
    return factory()


def principal_symbol(system: FirstOrderSystem, t, x, u, xi) -> np.ndarray:
    """Evaluate M(t, x, u, xi) = sum_j xi_j A_j(t, x, u)."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if xi.shape != (system.dim,):
        raise ValueError(f"xi must have shape ({system.dim},), got {xi.shape}")
    mats = system.coeff(t, np.asarray(x, dtype=float), np.asarray(u, dtype=float))
    if len(mats) != system.dim:
        raise SymbolError(f"coeff returned {len(mats)} matrices for dim {system.dim}")
    M = np.zeros((system.nfields, system.nfields))
    for c, A in zip(xi, mats):
        M = M + c * np.asarray(A, dtype=float)
    if not np.all(np.isfinite(M)):
        raise SymbolError("symbol has non-finite entries")
    return M


@dataclass(frozen=True)
class SymbolSpectrum:
    """Classification verdict for one symbol matrix.

    eigenvalues are sorted by (Im, Re).  For elliptic symbols lambda0 is
    the eigenvalue with the largest imaginary part (ties broken by larger
    real part) and rbar its unit eigenvector, rotated so that the first
    significant entry is real positive; both are None when hyperbolic.
    gamma0 = max |Im lambda| is the amplification rate per unit frequency
    and is exactly 0.0 for hyperbolic verdicts.
    """

    eigenvalues: np.ndarray
    gamma0: float
    hyperbolic: bool
    tol: float
    lambda0: Optional[complex] = None
    rbar: Optional[np.ndarray] = None


def spectrum_classify(M, tol_scale: float = 1e-9) -> SymbolSpectrum:
    """Decide whether the symbol M has real spectrum.

    The verdict tolerance is tol = tol_scale * (1 + ||M||_2).  Eigenvalues
    with |Im| <= tol count as real.  If any |Im| falls strictly inside
    (tol/2, 2 tol), the verdict would depend on the tolerance itself and
    AmbiguousSpectrumError is raised.  Returned eigenpairs are residual
    checked at 1e-8 relative.
    """
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise SymbolError("symbol has non-finite entries")
    scale = 1.0 + np.linalg.norm(M, 2)
    tol = tol_scale * scale
    w, V = np.linalg.eig(M)
    im = np.abs(w.imag)
    inside = (im > 0.5 * tol) & (im < 2.0 * tol)
    if inside.any():
        raise AmbiguousSpectrumError(
            f"eigenvalue imaginary parts {w.imag[inside]} fall inside the "
            f"undecidable band ({0.5 * tol:.3e}, {2.0 * tol:.3e})"
        )
    order = np.lexsort((w.real, w.imag))
    eigs = w[order]
    if im.max(initial=0.0) <= tol:
        return SymbolSpectrum(eigenvalues=eigs, gamma0=0.0, hyperbolic=True, tol=tol)

    # dominant upper eigenvalue: max Im, then max Re
    upper = np.lexsort((w.real, w.imag))[-1]
    lam0 = complex(w[upper])
    r = V[:, upper].astype(complex)
    r = r / np.linalg.norm(r)
    sig = np.abs(r) > 1e-12 * np.abs(r).max()
    lead = r[np.argmax(sig)]
    r = r * (np.conj(lead) / abs(lead))
    resid = np.linalg.norm(M @ r - lam0 * r)
    if resid > 1e-8 * scale:
        raise SymbolError(f"eigenpair residual {resid:.3e} exceeds 1e-8 relative")
    return SymbolSpectrum(
        eigenvalues=eigs,
        gamma0=float(im.max()),
        hyperbolic=False,
        tol=tol,
        lambda0=lam0,
        rbar=r,
    )


def projector_upper(M, tol_scale: float = 1e-9) -> np.ndarray:
    """Spectral projector onto the span of eigenspaces with Im lambda > 0.

    Built from the eigendecomposition as V 1_upper V^{-1}.  Idempotency,
    commutation with M and the trace (= number of upper eigenvalues) are
    verified at 1e-8 relative; violations raise SymbolError.  For a
    hyperbolic symbol the projector is zero.
    """
    sp = spectrum_classify(M, tol_scale=tol_scale)
    M = np.asarray(M)
    w, V = np.linalg.eig(M)
    sel = w.imag > sp.tol
    if not sel.any():
        return np.zeros_like(V, dtype=complex)
    P = V @ np.diag(sel.astype(complex)) @ np.linalg.inv(V)
    scale = 1.0 + np.linalg.norm(M, 2)
    if np.linalg.norm(P @ P - P) > 1e-8 * scale:
        raise SymbolError("projector failed the idempotency check")
    if np.linalg.norm(M @ P - P @ M) > 1e-8 * scale * scale:
        raise SymbolError("projector does not commute with the symbol")
    if abs(np.trace(P) - sel.sum()) > 1e-8 * scale:
        raise SymbolError("projector rank disagrees with the eigenvalue count")
    return P
