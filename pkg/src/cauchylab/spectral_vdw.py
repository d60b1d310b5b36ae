"""Fourier-filtered pseudospectral runs of the van der Waals system.

The model is Lagrangian isothermal gas dynamics on the torus,

    u_t + v_x = 0,    v_t + p(u)_x = 0,    p(u) = u^3 - u,

projected onto modes |n| <= lam by the sharp filter S_lam.  The filtered
dynamics is a finite ODE system, so runs are well defined even where the
PDE is elliptic (p'(u) < 0): the filter caps the frequency content and
converts the frequency-indexed amplification exp(|n| sqrt(-p'(u)) t) into
plain exponential growth of the retained modes.  Overflow of a run is an
expected experimental outcome and is reported with the last finite time,
not raised.  (For this particular pressure law the conserved energy is
coercive, P quartic and bounded below, so the filtered flow is actually
global in time; small seeds grow exponentially and then saturate.  The
overflow report matters for modified pressure laws and for runs driven
past the amplitude threshold.)

Numerical contract:

* coefficients c_n with field(x_j) = sum_n c_n exp(i n x_j) on the
  uniform grid of nmodes = 2^k >= 4 lam points;
* products are evaluated on a 2x zero-padded grid (>= 8 lam points), so
  the cubic pressure of a filtered field is alias-free and exact;
* the energy E = int (v^2/2 + P(u)) dx, P' = p, is a quartic and is
  integrated exactly on the padded grid; it is conserved by the filtered
  semi-discrete flow, so any drift measures pure time-stepping error;
* time stepping is fixed-step RK4 guarded by dt * lam * max speed <= 1/2,
  with the sound speed sqrt(max(p'(u), 0)) evaluated on the initial data.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .symbol import vdw_pressure_deriv, vdw_pressure_potential

__all__ = [
    "SpectralCFLError",
    "GrowthWindowError",
    "FilteredState",
    "RunResult",
    "GrowthFit",
    "default_nmodes",
    "grid_points",
    "wavenumbers",
    "filter_mask",
    "state_from_fields",
    "seeded_elliptic_state",
    "to_fields",
    "filtered_pressure_modes",
    "rhs",
    "energy",
    "integrate",
    "growth_fit",
    "predicted_growth_rate",
]


class SpectralCFLError(RuntimeError):
    """Time step too large for the retained frequencies."""


class GrowthWindowError(RuntimeError):
    """Not enough samples inside the clean-growth amplitude window."""


def default_nmodes(lam: int) -> int:
    """Smallest power of two >= 4 lam (>= 8)."""
    n = 8
    while n < 4 * lam:
        n *= 2
    return n


def grid_points(nmodes: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(nmodes) / nmodes


def wavenumbers(nmodes: int) -> np.ndarray:
    """Integer wavenumbers in FFT order."""
    return np.fft.fftfreq(nmodes, d=1.0 / nmodes).astype(int)


def filter_mask(nmodes: int, lam: int) -> np.ndarray:
    return np.abs(wavenumbers(nmodes)) <= lam


@dataclass
class FilteredState:
    """Spectral state: coefficient arrays in FFT order, support |n| <= lam."""

    lam: int
    nmodes: int
    t: float
    uhat: np.ndarray
    vhat: np.ndarray


def state_from_fields(u, v, lam: int, t: float = 0.0) -> FilteredState:
    """Project grid samples of (u, v) onto modes |n| <= lam."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    nmodes = u.size
    if v.size != nmodes:
        raise ValueError("u and v must be sampled on the same grid")
    if nmodes & (nmodes - 1) or nmodes < 4 * lam:
        raise ValueError(f"grid size {nmodes} must be a power of two >= 4 lam")
    mask = filter_mask(nmodes, lam)
    uhat = np.where(mask, np.fft.fft(u) / nmodes, 0.0)
    vhat = np.where(mask, np.fft.fft(v) / nmodes, 0.0)
    return FilteredState(lam=lam, nmodes=nmodes, t=t, uhat=uhat, vhat=vhat)


def seeded_elliptic_state(lam: int, u0: float, n: int, amp: float) -> FilteredState:
    """Constant state u0 plus amp times the unstable eigenvector at mode n.

    For p'(u0) < 0 the frozen-coefficient mode matrix [[0, -in], [-in p', 0]]
    has the growing eigenvector (1, i sigma / n) with sigma = |n| sqrt(-p');
    seeding it makes the tracked amplitudes clean exponentials from t = 0.
    """
    dp = float(vdw_pressure_deriv(u0))
    if dp >= 0.0:
        raise ValueError(f"u0 = {u0} is not in the elliptic region")
    sigma = abs(n) * np.sqrt(-dp)
    x = grid_points(default_nmodes(lam))
    u = u0 + amp * np.cos(n * x)
    v = -(sigma / n) * amp * np.sin(n * x)
    return state_from_fields(u, v, lam)


def to_fields(state: FilteredState) -> Tuple[np.ndarray, np.ndarray]:
    u = np.fft.ifft(state.uhat) * state.nmodes
    v = np.fft.ifft(state.vhat) * state.nmodes
    return u.real, v.real


def _pad(c: np.ndarray) -> np.ndarray:
    m = c.size
    out = np.zeros(2 * m, dtype=complex)
    half = m // 2
    out[:half] = c[:half]
    out[-half:] = c[-half:]
    return out


def _unpad(c: np.ndarray, nmodes: int) -> np.ndarray:
    half = nmodes // 2
    out = np.empty(nmodes, dtype=complex)
    out[:half] = c[:half]
    out[half:] = c[-half:]
    return out


def filtered_pressure_modes(uhat: np.ndarray, lam: int) -> np.ndarray:
    """Coefficients of S_lam p(u) via the 2x padded grid (alias-free for cubics)."""
    nmodes = uhat.size
    up = _pad(uhat)
    u = (np.fft.ifft(up) * up.size).real
    ph = np.fft.fft(u * u * u - u) / up.size
    return np.where(filter_mask(nmodes, lam), _unpad(ph, nmodes), 0.0)


def rhs(uhat: np.ndarray, vhat: np.ndarray, lam: int) -> Tuple[np.ndarray, np.ndarray]:
    """Semi-discrete right-hand side: u_t = -v_x, v_t = -S_lam p(u)_x."""
    ns = wavenumbers(uhat.size)
    du = -1j * ns * vhat
    dv = -1j * ns * filtered_pressure_modes(uhat, lam)
    return du, dv


def energy(state: FilteredState) -> float:
    """E = int (v^2/2 + P(u)) dx, exact quadrature on the padded grid."""
    pad = 2 * state.nmodes
    u = (np.fft.ifft(_pad(state.uhat)) * pad).real
    v = (np.fft.ifft(_pad(state.vhat)) * pad).real
    return 2.0 * np.pi * float(np.mean(0.5 * v * v + vdw_pressure_potential(u)))


@dataclass
class RunResult:
    state: FilteredState
    times: np.ndarray
    energy: np.ndarray
    drift: np.ndarray
    tracked_u: Dict[int, np.ndarray]
    tracked_v: Dict[int, np.ndarray]
    blown_up: bool
    t_blowup: Optional[float]


def integrate(
    state: FilteredState,
    dt: float,
    t_end: float,
    record_every: int = 1,
    tracked_modes: Sequence[int] = (),
    blowup_threshold: float = 1e8,
) -> RunResult:
    """Fixed-step RK4 run of the filtered system up to t_end.

    The CFL guard dt * lam * max(sound speed) <= 1/2 is evaluated on the
    initial data; in the elliptic regime the real sound speed is zero and
    amplitude growth is the expected physics, so runaway amplitudes are
    handled by the blow-up report instead.  When a step produces a
    non-finite value or exceeds blowup_threshold, the run stops and the
    last finite state and time are returned with blown_up = True.
    """
    lam, nmodes = state.lam, state.nmodes
    u0, _ = to_fields(state)
    speed = float(np.sqrt(np.maximum(vdw_pressure_deriv(u0), 0.0)).max())
    if dt * lam * speed > 0.5:
        raise SpectralCFLError(
            f"dt * lam * speed = {dt * lam * speed:.3f} > 0.5 "
            f"(dt={dt}, lam={lam}, speed={speed:.3f})"
        )

    nsteps = int(round(t_end / dt))
    uhat = state.uhat.astype(complex).copy()
    vhat = state.vhat.astype(complex).copy()
    t = state.t
    idx = {n: int(np.argmax(wavenumbers(nmodes) == n)) for n in tracked_modes}

    times = [t]
    e0 = energy(state)
    energies = [e0]
    tr_u = {n: [uhat[i]] for n, i in idx.items()}
    tr_v = {n: [vhat[i]] for n, i in idx.items()}
    blown_up = False
    t_blowup: Optional[float] = None

    def record(tt, uu, vv):
        times.append(tt)
        energies.append(energy(FilteredState(lam, nmodes, tt, uu, vv)))
        for n, i in idx.items():
            tr_u[n].append(uu[i])
            tr_v[n].append(vv[i])

    for k in range(1, nsteps + 1):
        du1, dv1 = rhs(uhat, vhat, lam)
        du2, dv2 = rhs(uhat + 0.5 * dt * du1, vhat + 0.5 * dt * dv1, lam)
        du3, dv3 = rhs(uhat + 0.5 * dt * du2, vhat + 0.5 * dt * dv2, lam)
        du4, dv4 = rhs(uhat + dt * du3, vhat + dt * dv3, lam)
        nu = uhat + dt * (du1 + 2.0 * du2 + 2.0 * du3 + du4) / 6.0
        nv = vhat + dt * (dv1 + 2.0 * dv2 + 2.0 * dv3 + dv4) / 6.0
        bad = not (np.all(np.isfinite(nu)) and np.all(np.isfinite(nv)))
        if not bad:
            bad = max(np.abs(nu).max(), np.abs(nv).max()) > blowup_threshold
        if bad:
            blown_up = True
            t_blowup = t
            break
        uhat, vhat = nu, nv
        t = state.t + k * dt
        if k % record_every == 0 or k == nsteps:
            record(t, uhat, vhat)

    if times[-1] != t:
        record(t, uhat, vhat)

    energies = np.array(energies)
    final = FilteredState(lam, nmodes, t, uhat, vhat)
    return RunResult(
        state=final,
        times=np.array(times),
        energy=energies,
        drift=np.abs(energies - e0) / max(1.0, abs(e0)),
        tracked_u={n: np.array(a) for n, a in tr_u.items()},
        tracked_v={n: np.array(a) for n, a in tr_v.items()},
        blown_up=blown_up,
        t_blowup=t_blowup,
    )


@dataclass(frozen=True)
class GrowthFit:
    rate: float
    log_amp0: float
    t_lo: float
    t_hi: float
    n_samples: int


def growth_fit(
    times,
    amps,
    lo_factor: float = 10.0,
    hi_factor: float = 1e-3,
    min_samples: int = 10,
) -> GrowthFit:
    """Least-squares exponential rate over the clean-growth window.

    The window keeps samples with amplitude in [lo_factor * a_init,
    hi_factor * max], which excludes the seeding transient at the bottom
    and saturation effects at the top; a_init is the first positive
    amplitude.  Fewer than min_samples surviving points raises
    GrowthWindowError.
    """
    times = np.asarray(times, dtype=float)
    amps = np.asarray(amps, dtype=float)
    pos = amps > 0.0
    if not pos.any():
        raise GrowthWindowError("no positive amplitudes to fit")
    a_init = amps[np.argmax(pos)]
    lo = lo_factor * a_init
    hi = hi_factor * amps.max()
    mask = pos & (amps >= lo) & (amps <= hi)
    if mask.sum() < min_samples:
        raise GrowthWindowError(
            f"only {int(mask.sum())} samples in amplitude window "
            f"[{lo:.3e}, {hi:.3e}]; need {min_samples}"
        )
    rate, intercept = np.polyfit(times[mask], np.log(amps[mask]), 1)
    return GrowthFit(
        rate=float(rate),
        log_amp0=float(intercept),
        t_lo=float(times[mask].min()),
        t_hi=float(times[mask].max()),
        n_samples=int(mask.sum()),
    )


def predicted_growth_rate(u0: float, n: int) -> float:
    """Frozen-coefficient growth rate |n| sqrt(max(-p'(u0), 0)) at mode n."""
    return abs(n) * float(np.sqrt(max(-vdw_pressure_deriv(u0), 0.0)))
