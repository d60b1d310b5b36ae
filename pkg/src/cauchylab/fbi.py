"""Gaussian-phase analyticity detector and the model boundary problem.

The transform Th(y, lambda) = (lambda/pi)^{d/2} int e^{-lambda q(x-y)} h chi dx
with q(w) = <Qw, w> extended bilinearly to complex arguments satisfies
|Th| <= C e^{lambda q(Im y)} always, and decays below that ceiling by a
factor e^{-lambda eps1}, eps1 > 0, exactly when h is analytic at the base
point in the probed direction.  decay_classify fits that exponent over a
dyadic lambda ladder and reports the verdict.

The model solver treats (d_x + i d_y) u = u^2 on x > 0 with periodic
boundary data u(0, y) = h(y): writing 1/u = G(z) - x with G holomorphic
reduces it to holomorphic extension of 1/h off the boundary line, which
exists iff the positive-frequency coefficients of 1/h decay exponentially.
That one-sided decay test is a computable surrogate for analyticity of h
in the +1 direction, not a full wave-front computation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class ResolutionError(ValueError):
    """Sample grid too coarse or too short for the requested Gaussian width."""


# --- cutoff and transform spec --------------------------------------------------


@dataclass(frozen=True)
class ChiCutoff:
    """Radial bump: 1 inside r_in, 0 outside r_out, smooth shoulder between."""

    center: np.ndarray
    r_in: float
    r_out: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.atleast_1d(np.asarray(self.center, dtype=float)))
        if not 0.0 < self.r_in < self.r_out:
            raise ValueError("need 0 < r_in < r_out")

    def __call__(self, *coords) -> np.ndarray:
        if len(coords) != self.center.size:
            raise ValueError(f"cutoff expects {self.center.size} coordinate arrays")
        r2 = np.zeros_like(np.asarray(coords[0], dtype=float))
        for c, x in zip(self.center, coords):
            r2 = r2 + (np.asarray(x, dtype=float) - c) ** 2
        r = np.sqrt(r2)
        out = np.zeros_like(r)
        out[r <= self.r_in] = 1.0
        mid = (r > self.r_in) & (r < self.r_out)
        s = (r[mid] - self.r_in) / (self.r_out - self.r_in)
        out[mid] = np.exp(-s * s / (1.0 - s * s))
        return out


@dataclass(frozen=True)
class GaussianTransformSpec:
    Q: np.ndarray
    chi: ChiCutoff | None
    lambdas: tuple

    def __post_init__(self):
        Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
        object.__setattr__(self, "Q", Q)
        if Q.shape[0] != Q.shape[1] or not np.allclose(Q, Q.T, rtol=0, atol=1e-14):
            raise ValueError("Q must be symmetric")
        try:
            np.linalg.cholesky(Q)
        except np.linalg.LinAlgError as exc:
            raise ValueError("Q must be positive definite") from exc
        lams = tuple(float(v) for v in self.lambdas)
        object.__setattr__(self, "lambdas", lams)
        if not lams or lams[0] <= 0.0 or any(b <= a for a, b in zip(lams, lams[1:])):
            raise ValueError("lambdas must be positive and increasing")
        if self.chi is not None and self.chi.center.size != Q.shape[0]:
            raise ValueError("cutoff dimension does not match Q")

    @property
    def dim(self) -> int:
        return self.Q.shape[0]


def _required_spacing(lam: float) -> float:
    return 1.0 / (8.0 * math.sqrt(lam))


def _qform(Q: np.ndarray, *ws):
    """Bilinear (not sesquilinear) quadratic form, pointwise on arrays."""
    out = 0.0
    for i, wi in enumerate(ws):
        for j, wj in enumerate(ws):
            out = out + Q[i, j] * wi * wj
    return out


def gaussian_transform(h, spec: GaussianTransformSpec, y, lam: float) -> complex:
    """(lam/pi)^{d/2} int e^{-lam q(x - y)} h(x) chi(x) dx by trapezoid rule.

    h is a callable (d=1: h(x); d=2: h(X1, X2)) or, for d=1, a pair
    (x, values) of uniform samples.  Callables are evaluated on an
    internally built grid meeting the resolution bound spacing <=
    1/(8 sqrt(lam)); samples that violate it raise ResolutionError.
    """
    d = spec.dim
    y = np.atleast_1d(np.asarray(y, dtype=complex))
    if y.size != d:
        raise ValueError(f"y must have {d} components")
    req = _required_spacing(lam)
    pref = (lam / math.pi) ** (d / 2.0)

    if isinstance(h, tuple):
        if d != 1:
            raise ValueError("sampled signals are supported in d = 1 only")
        x, vals = h
        x = np.asarray(x, dtype=float)
        vals = np.asarray(vals)
        dxs = np.diff(x)
        dx = float(dxs[0])
        if not np.allclose(dxs, dx, rtol=1e-9, atol=0):
            raise ValueError("sample grid must be uniform")
        if dx > req * (1.0 + 1e-9):
            raise ResolutionError(
                f"sample spacing {dx:.4g} exceeds the required {req:.4g} at lambda = {lam:g}"
            )
        if spec.chi is not None:
            lo = spec.chi.center[0] - spec.chi.r_out
            hi = spec.chi.center[0] + spec.chi.r_out
            if x[0] > lo + 1e-12 or x[-1] < hi - 1e-12:
                raise ResolutionError(
                    f"samples on [{x[0]:.4g}, {x[-1]:.4g}] do not cover the cutoff support "
                    f"[{lo:.4g}, {hi:.4g}]"
                )
            vals = vals * spec.chi(x)
        integrand = np.exp(-lam * _qform(spec.Q, x - y[0])) * vals
        return complex(pref * np.trapezoid(integrand, x))

    # callable path: build axis grids over the cutoff support, or over a
    # window around Re y wide enough that the Gaussian tail is below 1e-60
    if spec.chi is not None:
        los = spec.chi.center - spec.chi.r_out
        his = spec.chi.center + spec.chi.r_out
    else:
        qmin = float(np.linalg.eigvalsh(spec.Q)[0])
        L = 12.0 / math.sqrt(lam * qmin)
        los = y.real - L
        his = y.real + L
    axes = []
    for lo, hi in zip(los, his):
        n = max(33, int(math.ceil((hi - lo) / req)) + 1)
        axes.append(np.linspace(lo, hi, n))
    if d == 1:
        x = axes[0]
        f = np.asarray(h(x))
        if spec.chi is not None:
            f = f * spec.chi(x)
        integrand = np.exp(-lam * _qform(spec.Q, x - y[0])) * f
        return complex(pref * np.trapezoid(integrand, x))
    if d == 2:
        X1, X2 = np.meshgrid(axes[0], axes[1], indexing="ij")
        f = np.asarray(h(X1, X2))
        if spec.chi is not None:
            f = f * spec.chi(X1, X2)
        integrand = np.exp(-lam * _qform(spec.Q, X1 - y[0], X2 - y[1])) * f
        inner = np.trapezoid(integrand, axes[1], axis=1)
        return complex(pref * np.trapezoid(inner, axes[0]))
    raise ValueError("only d = 1 and d = 2 are supported")


# --- decay classification --------------------------------------------------------


def decay_profile(h, spec: GaussianTransformSpec, y) -> np.ndarray:
    """D(lam) = lam q(Im y) - ln|Th(y, lam)| over spec.lambdas; +inf on underflow."""
    y = np.atleast_1d(np.asarray(y, dtype=complex))
    qim = float(np.real(_qform(spec.Q, *(y.imag))))  # real vector: form is real
    out = np.empty(len(spec.lambdas))
    for i, lam in enumerate(spec.lambdas):
        a = abs(gaussian_transform(h, spec, y, lam))
        out[i] = lam * qim - math.log(a) if a > 0.0 else math.inf
    return out


def _fit_decay_exponent(lambdas, profile) -> float | None:
    """Linear coefficient of D ~ a lam + b ln lam + c.

    The ln-term absorbs the algebraic prefactor of non-analytic signals
    (polynomial FBI decay); without it a pure lam^{-k} profile leaks
    ~ln(lam_max)/lam_max into the slope, above the verdict margin.
    """
    lams = np.asarray(lambdas, dtype=float)
    prof = np.asarray(profile, dtype=float)
    mask = np.isfinite(prof)
    if mask.sum() < 3:
        return None
    A = np.column_stack([lams[mask], np.log(lams[mask]), np.ones(int(mask.sum()))])
    coef, *_ = np.linalg.lstsq(A, prof[mask], rcond=None)
    return float(coef[0])


@dataclass(frozen=True)
class DecayReport:
    xi: np.ndarray
    y: np.ndarray
    t: float
    lambdas: tuple
    profile: np.ndarray
    eps1_hat: float
    margin: float
    verdict: str


def decay_classify(
    h,
    xbar,
    xi,
    spec: GaussianTransformSpec,
    t: float = 0.25,
    rho: float = 0.05,
    decay_margin: float | None = None,
    y=None,
) -> DecayReport:
    """Probe direction xi at base point xbar: y = xbar - i t a with Qa = xi
    (a unit-normalized), then fit the decay exponent of Th(y, .).

    Verdict is AnalyticDirection iff eps1_hat >= margin (default
    0.05 q(Im y)); total underflow of the transform counts as decay with
    eps1_hat = +inf.  Evaluation points must satisfy |Re y - xbar| <=
    rho t, the working-neighborhood constraint of the estimate.

    Probe depth t = 0.25: shallower probes leave the endpoint and saddle
    contributions of kink-type signals comparable through most of the
    lambda ladder, and the interference beats leak into the fitted
    exponent above the verdict margin (t = 0.1 misclassifies C^1 and C^2
    kinks); t much past 0.25 runs into the cutoff cap r_in^2 - t^2 and
    compresses the analytic/singular separation instead.
    """
    xbar = np.atleast_1d(np.asarray(xbar, dtype=float))
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if xbar.size != spec.dim or xi.size != spec.dim:
        raise ValueError("xbar and xi must match the dimension of Q")
    nrm = float(np.linalg.norm(xi))
    if nrm == 0.0:
        raise ValueError("xi must be nonzero")
    if spec.chi is not None and t >= spec.chi.r_in:
        raise ValueError(
            f"probe depth t = {t:g} must stay below the cutoff inner radius "
            f"r_in = {spec.chi.r_in:g}; outside it the decay cap r_in^2 - t^2 vanishes"
        )
    a = np.linalg.solve(spec.Q, xi)
    a = a / np.linalg.norm(a)
    if y is None:
        y = xbar - 1j * t * a
    y = np.atleast_1d(np.asarray(y, dtype=complex))
    off = float(np.linalg.norm(y.real - xbar))
    if off > rho * t + 1e-15:
        raise ValueError(
            f"|Re y - xbar| = {off:.4g} violates the neighborhood bound rho*t = {rho * t:.4g}"
        )
    qim = float(np.real(_qform(spec.Q, *(y.imag))))
    margin = 0.05 * qim if decay_margin is None else float(decay_margin)
    profile = decay_profile(h, spec, y)
    eps1 = _fit_decay_exponent(spec.lambdas, profile)
    if eps1 is None:
        eps1 = math.inf
    verdict = "AnalyticDirection" if eps1 >= margin else "NotDetected"
    return DecayReport(
        xi=xi, y=y, t=t, lambdas=spec.lambdas, profile=profile,
        eps1_hat=eps1, margin=margin, verdict=verdict,
    )


# --- model Cauchy-Riemann boundary problem ----------------------------------------


@dataclass(frozen=True)
class CRSolution:
    verdict: str
    x: np.ndarray | None
    y: np.ndarray
    u: np.ndarray | None
    residual: float
    decay_slope: float
    modes: np.ndarray
    logmag: np.ndarray


def _d4(f: np.ndarray, step: float, axis: int, periodic: bool) -> np.ndarray:
    """Fourth-order central first derivative; non-periodic axes lose 2 rows."""
    if periodic:
        fp1, fp2 = np.roll(f, -1, axis), np.roll(f, -2, axis)
        fm1, fm2 = np.roll(f, 1, axis), np.roll(f, 2, axis)
        return (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * step)
    sl = [slice(None)] * f.ndim

    def at(k):
        s = list(sl)
        s[axis] = slice(2 + k, f.shape[axis] - 2 + k or None)
        return f[tuple(s)]

    return (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * step)


def model_cr_solver(
    h,
    x_max: float = 0.5,
    nx: int = 256,
    slope_factor: float = 1.5,
    floor: float = 1e-14,
) -> CRSolution:
    """Solve (d_x + i d_y) u = u^2 on 0 < x <= x_max from u(0, y) = h(y).

    h: samples on the uniform periodic grid y_k = 2 pi k / ny.  The
    solution, when it exists, is u = 1/(G(z) - x) with G the holomorphic
    extension of 1/h; its positive-frequency coefficients must decay like
    e^{-n s}, s > slope_factor * x_max, for the extension to reach x_max
    with margin.  A failed decay test returns verdict NoSolution together
    with the measured positive-frequency log-magnitudes.
    """
    vals = np.asarray(h)
    ny = vals.size
    ys = np.linspace(0.0, 2.0 * np.pi, ny, endpoint=False)
    if np.min(np.abs(vals)) <= 1e-12 * np.max(np.abs(vals)):
        raise ValueError("h must be nonvanishing on the boundary interval")
    g = 1.0 / vals.astype(complex)
    c = np.fft.fft(g) / ny
    ns = np.fft.fftfreq(ny, d=1.0 / ny).astype(int)
    keep = np.abs(c) >= floor * np.abs(c).max()
    pos = keep & (ns > 0)
    order = np.argsort(ns[pos])
    modes = ns[pos][order]
    logmag = np.log(np.abs(c[pos][order])) if modes.size else np.empty(0)
    if modes.size >= 3:
        slope = float(np.polyfit(modes.astype(float), logmag, 1)[0])
    else:
        slope = -math.inf  # no positive-frequency content above the floor
    if slope > -slope_factor * x_max:
        return CRSolution(
            verdict="NoSolution", x=None, y=ys, u=None, residual=math.nan,
            decay_slope=slope, modes=modes, logmag=logmag,
        )
    xs = (np.arange(nx) + 1) * (x_max / nx)
    nk = ns[keep]
    ck = c[keep]
    G = (np.exp(np.outer(xs, nk)) * ck[None, :]) @ np.exp(1j * np.outer(nk, ys))
    den = G - xs[:, None]
    if float(np.abs(den).min()) < 1e-9:
        raise RuntimeError("reconstruction degenerate: 1/u vanishes on the grid")
    u = 1.0 / den
    ux = _d4(u, x_max / nx, axis=0, periodic=False)
    uy = _d4(u, 2.0 * np.pi / ny, axis=1, periodic=True)[2:-2, :]
    resid = float(np.abs(ux + 1j * uy - u[2:-2, :] ** 2).max())
    return CRSolution(
        verdict="Solvable", x=xs, y=ys, u=u, residual=resid,
        decay_slope=slope, modes=modes, logmag=logmag,
    )
