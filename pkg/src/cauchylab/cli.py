"""Config-driven experiment runner.

Every experiment is an ExperimentConfig: a command name, a flat parameter
dict validated against the command's schema, an output directory and a
seed.  A run emits three files into the output directory:

  results.csv   tabular rows, schema fixed per command/mode
  report.json   scalar summary (verdicts, fitted rates, margins)
  manifest.json config echo + library versions + wall time

Runs are deterministic: identical config and seed reproduce results.csv
and report.json byte for byte (floats are written with repr, JSON keys
are sorted, line endings are pinned to "\\n").  The manifest is the one
file excluded from that guarantee, since it records the wall time; rerun
consumes a manifest and replays its config into a fresh directory.

Exit codes: 0 success, 2 usage/config error, 3 expected numerical outcome
(recorded blow-up, infeasible contraction certificate, violated CFL
guard), 4 internal error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import scipy

from . import __version__
from . import fbi
from . import instability as ins
from . import kirchhoff as kh
from . import majorant as mj
from . import spectral_vdw as spv
from . import symbol as sym


class UsageError(ValueError):
    """Malformed invocation: bad config shape, unknown field, bad value."""


_NUMERICAL_ERRORS = (
    mj.ContractionInfeasibleError,
    mj.NormDomainError,
    ins.ParameterInfeasibleError,
    ins.ProfileCFLError,
    spv.SpectralCFLError,
    spv.GrowthWindowError,
    kh.SaturationError,
    sym.AmbiguousSpectrumError,
)


# --- parameter schemas -------------------------------------------------------

_REQUIRED = object()


def _num(x):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ValueError("expected a number")
    return float(x)


def _int(x):
    if isinstance(x, bool) or not isinstance(x, int):
        raise ValueError("expected an integer")
    return int(x)


def _bool(x):
    if not isinstance(x, bool):
        raise ValueError("expected true or false")
    return x


def _str(x):
    if not isinstance(x, str):
        raise ValueError("expected a string")
    return x


def _choice(*options):
    def check(x):
        if x not in options:
            raise ValueError(f"expected one of {sorted(options)}, got {x!r}")
        return x

    return check


def _num_list(x):
    if not isinstance(x, list) or not x:
        raise ValueError("expected a non-empty list of numbers")
    return [_num(v) for v in x]


def _int_list(x):
    if not isinstance(x, list) or not x:
        raise ValueError("expected a non-empty list of integers")
    return [_int(v) for v in x]


def _mode_list(x):
    if not isinstance(x, list):
        raise ValueError("expected a list of [n, re, im] triples")
    out = []
    for item in x:
        if not isinstance(item, list) or len(item) != 3:
            raise ValueError("expected [n, re, im] triples")
        out.append([_int(item[0]), _num(item[1]), _num(item[2])])
    return out


def _optional(inner):
    def check(x):
        return None if x is None else inner(x)

    return check


SCHEMAS: Dict[str, Dict[str, Tuple[Callable, object]]] = {
    "classify": {
        "system": (_choice("vdw", "complex-burgers"), "vdw"),
        "u": (_num_list, [0.0, 0.0]),
        "xi": (_num_list, [1.0]),
        "t": (_num, 0.0),
        "x": (_num, 0.0),
        "tol_scale": (_num, 1e-9),
        "scan": (_bool, False),
        "scan_count": (_int, 1000),
        "scan_min": (_num, -2.0),
        "scan_max": (_num, 2.0),
        "scan_exclude": (_num, 1e-6),
    },
    "vdw": {
        "mode": (_choice("energy", "growth"), "energy"),
        "lam": (_int, 16),
        "dt": (_num, 1e-3),
        "t_end": (_num, 1.0),
        "record_every": (_int, 5),
        "blowup_threshold": (_num, 1e8),
        "base_u": (_num, 0.8),
        "u_modes": (_mode_list, [[1, 0.01, 0.0]]),
        "v_modes": (_mode_list, []),
        "convergence": (_bool, False),
        "u0": (_num, 0.0),
        "n": (_int, 4),
        "amp": (_num, 2e-8),
    },
    "kirchhoff": {
        "mode": (_choice("sweep", "contrast", "oracle"), "sweep"),
        "weights": (_choice("power", "exponential", "single"), "power"),
        "s": (_num, 4.0),
        "a": (_num, 1.0),
        "norm": (_num, 0.5),
        "nmax": (_int, 4096),
        "n": (_int, 1),
        "w": (_num, 1.0),
        "lambdas": (_int_list, [16, 32, 64, 128]),
        "t": (_num, 1.0),
        "dt": (_num, 1e-4),
        "n0": (_int, 4),
        "t_sat": (_num, 12.0),
        "lam": (_int, 64),
        "t_end": (_num, 2.0),
        "nrecords": (_int, 4),
    },
    "instability": {
        "system": (_choice("vdw", "complex-burgers"), "vdw"),
        "observable": (_choice("lens", "cube"), "lens"),
        "eps_list": (_num_list, [1e-2, 1e-3, 1e-4]),
        "M": (_num, 3.0),
        "beta": (_num, 0.1),
        "gamma0": (_num, 1.0),
        "m": (_num, 1.0),
        "alpha": (_num, 1.0),
        "d": (_num, 1.0),
        "delta": (_num, 1.0),
        "r0": (_num, 1.0),
        "K": (_int, 16),
        "ds": (_optional(_num), None),
        "xibar": (_int, 1),
        "ubase": (_num_list, [0.0, 0.0]),
    },
    "majorant": {
        "mode": (_choice("constants", "contraction"), "constants"),
        "T": (_int, 2048),
        "nmax": (_int, 20000),
        "eps": (_num, 1e-2),
        "M": (_num, 3.0),
        "beta": (_num, 0.1),
        "gamma0": (_num, 1.0),
        "K": (_int, 8),
        "npts": (_int, 129),
        "s_frac": (_num, 0.5),
        "amp_scale": (_num, 1.0),
        "ubase": (_num_list, [0.0, 0.0]),
        "tol": (_num, 1e-10),
        "max_iter": (_int, 200),
        "allow_infeasible": (_bool, False),
        "cross_check": (_bool, True),
    },
    "fbi": {
        "mode": (_choice("classify", "corpus", "cr"), "classify"),
        "signal": (_str, "gaussian"),
        "xbar": (_num, 0.0),
        "xi_list": (_num_list, [1.0, -1.0]),
        "r_in": (_num, 0.4),
        "r_out": (_num, 1.0),
        "q": (_num, 1.0),
        "probe_depth": (_num, 0.25),
        "rho": (_num, 0.05),
        "lambda_pows": (_int_list, [4, 5, 6, 7, 8, 9, 10]),
        "data": (_choice("constant", "cosine", "abs"), "cosine"),
        "c": (_num, 0.5),
        "amp": (_num, 0.05),
        "nx": (_int, 256),
        "ny": (_int, 256),
        "x_max": (_num, 0.5),
        "slope_factor": (_num, 1.5),
        "grid_stride": (_int, 4),
    },
}


def validate_parameters(command: str, raw: dict) -> dict:
    if command not in SCHEMAS:
        raise UsageError(f"unknown command {command!r}")
    if not isinstance(raw, dict):
        raise UsageError("parameters: expected an object")
    schema = SCHEMAS[command]
    for key in raw:
        if key not in schema:
            raise UsageError(
                f"parameters.{key}: unknown parameter for command {command!r}"
            )
    params = {}
    for key, (check, default) in schema.items():
        if key in raw:
            try:
                params[key] = check(raw[key])
            except ValueError as exc:
                raise UsageError(f"parameters.{key}: {exc}") from None
        elif default is _REQUIRED:
            raise UsageError(f"parameters.{key}: required")
        else:
            params[key] = default
    return params


# --- artifact writing --------------------------------------------------------


def _fmt_cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    return v


def write_csv(path: Path, header: List[str], rows: List[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt_cell(v) for v in row])


def write_json(path: Path, obj) -> None:
    text = json.dumps(_jsonable(obj), indent=2, sort_keys=True)
    path.write_text(text + "\n", encoding="utf-8")


def _versions() -> dict:
    return {
        "python": ".".join(str(n) for n in sys.version_info[:3]),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "cauchylab": __version__,
    }


# --- command runners ---------------------------------------------------------
# Each runner returns (exit_code, csv_header, csv_rows, report_dict).  Raising
# is reserved for failures with nothing reportable; expected outcomes such as
# a recorded blow-up or an infeasible certificate return code 3 with full
# artifacts.


def _named_system(name: str) -> sym.FirstOrderSystem:
    try:
        return sym.named_system(name)
    except KeyError as exc:
        raise UsageError(str(exc)) from None


def _run_classify(p: dict):
    system = _named_system(p["system"])
    if p["scan"]:
        if p["system"] != "vdw":
            raise UsageError(
                "parameters.scan: the pressure-law scan is defined for system 'vdw'"
            )
        us = np.linspace(p["scan_min"], p["scan_max"], p["scan_count"])
        xi = np.asarray(p["xi"], dtype=float)
        rows = []
        max_err = 0.0
        n_elliptic = 0
        all_ok = True
        for u0 in us:
            if abs(u0 * u0 - 1.0 / 3.0) < p["scan_exclude"]:
                continue
            dp = float(sym.vdw_pressure_deriv(u0))
            M = sym.principal_symbol(system, p["t"], p["x"], np.array([u0, 0.0]), xi)
            spec = sym.spectrum_classify(M, tol_scale=p["tol_scale"])
            verdict = "Hyperbolic" if spec.hyperbolic else "NonHyperbolic"
            predicted = float(np.linalg.norm(xi)) * np.sqrt(max(-dp, 0.0))
            err = abs(spec.gamma0 - predicted)
            ok = (not spec.hyperbolic) == (dp < 0.0) and err <= 1e-10
            max_err = max(max_err, err)
            all_ok = all_ok and ok
            n_elliptic += int(not spec.hyperbolic)
            rows.append([float(u0), dp, verdict, spec.gamma0, predicted, ok])
        header = ["u", "pprime", "verdict", "gamma0", "gamma0_predicted", "consistent"]
        report = {
            "system": p["system"],
            "count": len(rows),
            "n_elliptic": n_elliptic,
            "n_hyperbolic": len(rows) - n_elliptic,
            "all_consistent": all_ok,
            "max_gamma0_err": max_err,
        }
        return 0, header, rows, report

    u = np.asarray(p["u"], dtype=float)
    xi = np.asarray(p["xi"], dtype=float)
    M = sym.principal_symbol(system, p["t"], p["x"], u, xi)
    spec = sym.spectrum_classify(M, tol_scale=p["tol_scale"])
    verdict = "Hyperbolic" if spec.hyperbolic else "NonHyperbolic"
    report = {
        "system": p["system"],
        "u": p["u"],
        "xi": p["xi"],
        "verdict": verdict,
        "gamma0": spec.gamma0,
        "tol": spec.tol,
        "eigenvalues": [[float(l.real), float(l.imag)] for l in spec.eigenvalues],
        "lambda0": None if spec.lambda0 is None else spec.lambda0,
        "rbar": None if spec.rbar is None else spec.rbar,
    }
    rows = [[
        p["system"],
        ";".join(repr(v) for v in p["u"]),
        ";".join(repr(v) for v in p["xi"]),
        verdict,
        spec.gamma0,
    ]]
    return 0, ["system", "u", "xi", "verdict", "gamma0"], rows, report


def _vdw_energy_state(p: dict) -> spv.FilteredState:
    x = spv.grid_points(spv.default_nmodes(p["lam"]))
    u = np.full_like(x, p["base_u"])
    v = np.zeros_like(x)
    for n, re, im in p["u_modes"]:
        u += 2.0 * (re * np.cos(n * x) - im * np.sin(n * x))
    for n, re, im in p["v_modes"]:
        v += 2.0 * (re * np.cos(n * x) - im * np.sin(n * x))
    return spv.state_from_fields(u, v, p["lam"])


def _run_vdw(p: dict):
    if p["mode"] == "growth":
        state = spv.seeded_elliptic_state(p["lam"], p["u0"], p["n"], p["amp"])
        res = spv.integrate(
            state,
            p["dt"],
            p["t_end"],
            record_every=p["record_every"],
            tracked_modes=(p["n"],),
            blowup_threshold=p["blowup_threshold"],
        )
        amps_u = np.abs(res.tracked_u[p["n"]])
        amps_v = np.abs(res.tracked_v[p["n"]])
        rows = [[t, au, av] for t, au, av in zip(res.times, amps_u, amps_v)]
        predicted = spv.predicted_growth_rate(p["u0"], p["n"])
        rate = rel_err = None
        if not res.blown_up:
            try:
                fit = spv.growth_fit(res.times, amps_u)
                rate = fit.rate
                rel_err = abs(rate - predicted) / predicted
            except spv.GrowthWindowError:
                pass
        report = {
            "mode": "growth",
            "lam": p["lam"],
            "u0": p["u0"],
            "n": p["n"],
            "amp": p["amp"],
            "dt": p["dt"],
            "t_end": p["t_end"],
            "predicted_rate": predicted,
            "fitted_rate": rate,
            "rel_err": rel_err,
            "blown_up": res.blown_up,
            "t_blowup": res.t_blowup,
        }
        code = 3 if res.blown_up else 0
        return code, ["t", "amp_u", "amp_v"], rows, report

    state = _vdw_energy_state(p)
    res = spv.integrate(
        state,
        p["dt"],
        p["t_end"],
        record_every=p["record_every"],
        blowup_threshold=p["blowup_threshold"],
    )
    rows = [[t, e, d] for t, e, d in zip(res.times, res.energy, res.drift)]
    ratio = None
    if p["convergence"]:
        # successive dt-halving differences; a fourth-order step shrinks the
        # increment by ~16x, so the ratio certifies the order without an
        # exact reference solution
        finals = []
        for dt_k in (p["dt"], p["dt"] / 2.0, p["dt"] / 4.0):
            r = spv.integrate(
                _vdw_energy_state(p), dt_k, p["t_end"],
                record_every=10**9, blowup_threshold=p["blowup_threshold"],
            )
            finals.append(np.concatenate([r.state.uhat, r.state.vhat]))
        e1 = float(np.linalg.norm(finals[0] - finals[1]))
        e2 = float(np.linalg.norm(finals[1] - finals[2]))
        ratio = e1 / e2 if e2 > 0.0 else float("inf")
    report = {
        "mode": "energy",
        "lam": p["lam"],
        "dt": p["dt"],
        "t_end": p["t_end"],
        "base_u": p["base_u"],
        "energy0": float(res.energy[0]),
        "drift_max": float(np.abs(res.drift).max()),
        "blown_up": res.blown_up,
        "t_blowup": res.t_blowup,
        "convergence_ratio": ratio,
    }
    code = 3 if res.blown_up else 0
    return code, ["t", "energy", "drift"], rows, report


def _kirchhoff_data(p: dict) -> kh.SpectrumData:
    if p["weights"] == "power":
        return kh.power_law_weights(s=p["s"], norm=p["norm"], nmax=p["nmax"])
    if p["weights"] == "exponential":
        return kh.exponential_weights(a=p["a"], norm=p["norm"], nmax=p["nmax"])
    return kh.single_pair_weights(n=p["n"], w=p["w"])


_BOUND_HEADER = [
    "lambda", "t", "A", "U", "mu",
    "bound_lhs", "bound_rhs", "residual_u", "residual_v", "pass",
]


def _bound_rows(rows) -> List[list]:
    return [
        [r.lam, r.t, r.A, r.U, r.mu, r.bound_lhs, r.bound_rhs,
         r.residual_u, r.residual_v, r.passed]
        for r in rows
    ]


def _run_kirchhoff(p: dict):
    if p["mode"] == "oracle":
        data = _kirchhoff_data(p)
        times = [p["t_end"] * (k + 1) / p["nrecords"] for k in range(p["nrecords"])]
        run = kh.direct_mode_ode(
            data, p["lam"], p["t_end"], dt=p["dt"], record_times=times
        )
        traj = kh.integrate_A(data, p["lam"], p["t_end"], dt=p["dt"])
        rows = []
        sup_err = 0.0
        for k, t in enumerate(run.times):
            _, uhat, vhat = kh.closed_form_state(traj, data, float(t))
            eu = float(np.abs(run.uhat[k] - uhat).max())
            ev = float(np.abs(run.vhat[k] - vhat).max())
            sup_err = max(sup_err, eu, ev)
            rows.append([float(t), eu, ev])
        report = {
            "mode": "oracle",
            "lam": p["lam"],
            "dt": p["dt"],
            "t_end": p["t_end"],
            "sup_mode_err": sup_err,
            "energy_drift": run.energy_drift,
            "parseval_defect": run.parseval_defect,
            "max_inconsistency": run.max_inconsistency,
            "diverged": run.diverged,
        }
        return (3 if run.diverged else 0), ["t", "err_u", "err_v"], rows, report

    if p["mode"] == "contrast":
        data = kh.single_pair_weights(n=p["n"], w=p["w"])
        rows = kh.verify_bound_and_limit(
            data, p["lambdas"], t=p["t"], dt=p["dt"], n0=p["n0"]
        )
        traj = kh.integrate_A(data, max(p["lambdas"]), p["t_sat"], dt=p["dt"])
        a_star = float(traj.A[-1])
        expected = float(np.log(1.0 + np.sqrt(2.0)))
        report = {
            "mode": "contrast",
            "A_star": a_star,
            "A_star_expected": expected,
            "A_star_err": abs(a_star - expected),
            "residual_u_min": min(r.residual_u for r in rows),
            "all_bound_rhs_infinite": all(np.isinf(r.bound_rhs) for r in rows),
            "K": kh.bound_constant(data),
        }
        return 0, _BOUND_HEADER, _bound_rows(rows), report

    data = _kirchhoff_data(p)
    rows = kh.verify_bound_and_limit(
        data, p["lambdas"], t=p["t"], dt=p["dt"], n0=p["n0"]
    )
    ru = [r.residual_u for r in rows]
    rv = [r.residual_v for r in rows]
    report = {
        "mode": "sweep",
        "weights": p["weights"],
        "t": p["t"],
        "K": kh.bound_constant(data),
        "all_passed": all(r.passed for r in rows),
        "residual_u": ru,
        "residual_v": rv,
        "residual_u_decreasing": all(b < a for a, b in zip(ru, ru[1:])),
        "one_minus_U": [1.0 - r.U for r in rows],
        "mu_over_lambda": [r.mu / r.lam for r in rows],
    }
    code = 0 if report["all_passed"] else 3
    return code, _BOUND_HEADER, _bound_rows(rows), report


_INSTABILITY_HEADER = [
    "eps", "kappa1", "sbar", "t_eps", "r_eps", "l2_norm", "hm_norm",
    "ratio", "predicted_exponent", "fitted_slope", "truncated_flag",
]


def _run_instability(p: dict):
    system = _named_system(p["system"])
    template = {k: p[k] for k in ("M", "beta", "gamma0", "m", "alpha", "d", "delta", "r0")}
    ubase = np.asarray(p["ubase"], dtype=float)
    common = dict(K=p["K"], ds=p["ds"], ubase=ubase, xibar=p["xibar"])
    if p["observable"] == "lens":
        rep = ins.hoelder_ratio_sweep(system, template, p["eps_list"], **common)
        rows = [
            [r.eps, r.kappa1, r.sbar, r.t_eps, r.r_eps, r.l2_norm, r.hm_norm,
             r.ratio, r.predicted_exponent, r.fitted_slope, r.truncated_flag]
            for r in rep.rows
        ]
        ratios = [r.ratio for r in rep.rows]
        predicted = rep.predicted_exponent
        fitted = rep.fitted_slope
        truncated_any = any(r.truncated_flag for r in rep.rows)
    else:
        crep = ins.cube_exponent_check(system, template, p["eps_list"], **common)
        rows = []
        for r in crep.rows:
            sched = ins.make_params(eps=r.eps, **template)
            predicted = sched.M * (1.0 - sched.sigma) + 2.0 - sched.M
            rows.append(
                [r.eps, sched.kappa1, sched.sbar, sched.t_eps, sched.r_eps,
                 r.cube_l2, r.hm_norm, r.ratio, predicted, crep.slope, False]
            )
        ratios = [r.ratio for r in crep.rows]
        predicted = rows[0][8] if rows else float("nan")
        fitted = crep.slope
        truncated_any = False
    report = {
        "observable": p["observable"],
        "eps_list": p["eps_list"],
        "predicted_exponent": predicted,
        "fitted_slope": fitted,
        "slope_rel_err": abs(fitted - predicted) / abs(predicted)
        if np.isfinite(fitted) and predicted != 0.0
        else None,
        "ratios": ratios,
        "ratios_increasing": all(b > a for a, b in zip(ratios, ratios[1:])),
        "truncated_any": truncated_any,
    }
    return 0, _INSTABILITY_HEADER, rows, report


def _run_majorant(p: dict):
    if p["mode"] == "constants":
        c0, c1 = mj.compute_constants(T=p["T"], nmax=p["nmax"])
        c2 = mj.mixed_constant(nmax=p["nmax"])
        report = {"c0": c0, "c1": c1, "c2": c2, "T": p["T"], "nmax": p["nmax"]}
        return 0, ["c0", "c1", "c2"], [[c0, c1, c2]], report

    sched = ins.make_params(
        eps=p["eps"], M=p["M"], beta=p["beta"], gamma0=p["gamma0"]
    )
    sgrid = np.linspace(0.0, p["s_frac"] * sched.sbar, p["npts"])
    norm_p = mj.NormParams(
        gamma=sched.gamma, kappa=sched.kappa, eps=sched.eps,
        R=sched.R, rho=sched.rho, sgrid=sgrid,
    )
    system = _named_system("vdw")
    ubase = np.asarray(p["ubase"], dtype=float)
    Abar = sym.principal_symbol(system, 0.0, 0.0, ubase, np.array([1.0]))
    spec = sym.spectrum_classify(Abar)
    amp_free = 0.5 * p["amp_scale"] * p["eps"] ** p["M"]
    f = mj.free_profile_series(Abar, spec.rbar, amp_free, norm_p, K=p["K"])
    nonlin = mj.vdw_profile_nonlinearity(u0=float(ubase[0]))

    header = ["s", "contraction_amp", "profile_amp", "abs_diff"]
    report = {
        "mode": "contraction",
        "eps": p["eps"],
        "M": p["M"],
        "beta": p["beta"],
        "K": p["K"],
        "s_end": float(sgrid[-1]),
        "sbar": sched.sbar,
    }
    try:
        res = mj.contraction_solve(
            nonlin, Abar, f, norm_p, K=p["K"], tol=p["tol"],
            max_iter=p["max_iter"],
            enforce_feasibility=not p["allow_infeasible"],
        )
    except mj.ContractionInfeasibleError as exc:
        report.update(
            feasible=False, margin=exc.margin, theory_ratio=exc.theory_ratio,
            converged=False, iterations=0,
        )
        return 3, header, [], report

    report.update(
        feasible=res.feasible,
        margin=res.margin,
        theory_ratio=res.theory_ratio,
        kgamma=res.kgamma,
        K1=res.K1,
        K2=res.K2,
        fnorm=res.fnorm,
        iterations=res.iterations,
        converged=res.converged,
        residual=res.residual,
        max_picard_ratio=max(res.ratios) if res.ratios else None,
        ratio_bound_ok=all(r <= res.theory_ratio * (1.0 + 1e-9) for r in res.ratios),
        aposteriori_lhs=res.aposteriori_lhs,
        aposteriori_rhs=res.aposteriori_rhs,
        aposteriori_ok=res.aposteriori_ok,
        cross_check_sup_diff=None,
    )

    rows: List[list] = []
    if p["cross_check"]:
        # independent check: the pseudodifferential profile solver, seeded
        # with the same single-mode data, must agree with the fixed point
        traj = ins.solve_profile(
            system, sched, K=p["K"], ubase=ubase, xibar=1,
            s_end=float(sgrid[-1]), amp=2.0 * amp_free, rbar=spec.rbar,
        )
        K = p["K"]
        step = max(1, (p["npts"] - 1) // 16)
        sup = 0.0
        for si in range(0, p["npts"], step):
            s_val = float(sgrid[si])
            modes_p = traj.eval_modes(s_val)
            diff = 0.0
            for n in range(-(K - 1), K):
                c_n = res.series.coeff[:, n + K, 0, si]
                b_n = modes_p[:, n % (2 * K)]
                diff = max(diff, float(np.abs(c_n - b_n).max()))
            sup = max(sup, diff)
            c1 = float(np.abs(res.series.coeff[:, K + 1, 0, si]).max())
            b1 = float(np.abs(modes_p[:, 1]).max())
            rows.append([s_val, c1, b1, diff])
        report["cross_check_sup_diff"] = sup
        report["profile_blown_up"] = traj.blown_up
    return 0, header, rows, report


_SIGNALS = {
    "gaussian": lambda x: np.exp(-(x**2)),
    "cosine": lambda x: 1.0 + 0.3 * np.cos(2.0 * x),
    "lorentzian": lambda x: 1.0 / (1.0 + x * x),
    "abs": lambda x: np.abs(x),
    "ramp_sq": lambda x: np.maximum(x, 0.0) ** 2,
    "abs_cube": lambda x: np.abs(x) ** 3,
}
_SIGNAL_ANALYTIC = {
    "gaussian": True,
    "cosine": True,
    "lorentzian": True,
    "abs": False,
    "ramp_sq": False,
    "abs_cube": False,
}


def _fbi_spec(p: dict) -> fbi.GaussianTransformSpec:
    chi = fbi.ChiCutoff(center=np.atleast_1d(p["xbar"]), r_in=p["r_in"], r_out=p["r_out"])
    lambdas = np.array([2.0**k for k in p["lambda_pows"]])
    return fbi.GaussianTransformSpec(Q=np.atleast_2d(p["q"]), chi=chi, lambdas=lambdas)


def _cr_data(p: dict):
    if p["data"] == "constant":
        c = p["c"]
        return lambda y: np.full_like(np.asarray(y, dtype=float), c)
    if p["data"] == "cosine":
        c, amp = p["c"], p["amp"]
        return lambda y: c + amp * np.cos(y)

    def h(y):
        wrapped = np.mod(np.asarray(y, dtype=float) + np.pi, 2.0 * np.pi) - np.pi
        return 1.0 + 0.3 * np.abs(wrapped)

    return h


def _run_fbi(p: dict):
    if p["mode"] == "cr":
        ys = np.linspace(0.0, 2.0 * np.pi, p["ny"], endpoint=False)
        sol = fbi.model_cr_solver(
            _cr_data(p)(ys), x_max=p["x_max"], nx=p["nx"],
            slope_factor=p["slope_factor"],
        )
        report = {
            "mode": "cr",
            "data": p["data"],
            "verdict": sol.verdict,
            "residual": sol.residual,
            "decay_slope": sol.decay_slope,
            "n_modes": int(sol.modes.size),
        }
        if sol.verdict == "Solvable":
            sx = max(1, p["nx"] // 64)
            sy = max(1, sol.y.size // 64)
            rows = [
                [float(sol.x[i]), float(sol.y[j]),
                 float(sol.u[i, j].real), float(sol.u[i, j].imag)]
                for i in range(0, sol.x.size, sx)
                for j in range(0, sol.y.size, sy)
            ]
            report["max_abs_u"] = float(np.abs(sol.u).max())
            return 0, ["x", "y", "re_u", "im_u"], rows, report
        rows = [[int(n), float(lm)] for n, lm in zip(sol.modes, sol.logmag)]
        return 0, ["n", "log_abs_coeff"], rows, report

    spec = _fbi_spec(p)
    names = list(_SIGNALS) if p["mode"] == "corpus" else [p["signal"]]
    if p["mode"] != "corpus" and p["signal"] not in _SIGNALS:
        raise UsageError(
            f"parameters.signal: unknown signal {p['signal']!r};"
            f" available: {sorted(_SIGNALS)}"
        )
    rows = []
    reports = {}
    for name in names:
        for xi in p["xi_list"]:
            rep = fbi.decay_classify(
                _SIGNALS[name], p["xbar"], float(xi), spec,
                t=p["probe_depth"], rho=p["rho"],
            )
            rows.append([name, float(xi), rep.t, rep.eps1_hat, rep.margin, rep.verdict])
            reports[(name, float(xi))] = rep
    header = ["signal", "xi", "t", "eps1_hat", "margin", "verdict"]
    margin = rows[0][4]
    if p["mode"] == "corpus":
        analytic = [
            r.eps1_hat for (n, _), r in reports.items() if _SIGNAL_ANALYTIC[n]
        ]
        singular = [
            r.eps1_hat for (n, _), r in reports.items() if not _SIGNAL_ANALYTIC[n]
        ]
        correct = all(
            (r.verdict == "AnalyticDirection") == _SIGNAL_ANALYTIC[n]
            for (n, _), r in reports.items()
        )
        finite_analytic = [e for e in analytic if np.isfinite(e)] or analytic
        separation = float(min(finite_analytic) - max(singular))
        report = {
            "mode": "corpus",
            "signals": names,
            "margin": margin,
            "min_analytic_eps1": float(min(analytic)),
            "max_singular_eps1": float(max(singular)),
            "separation": separation,
            "separation_ok": bool(separation >= 4.0 * margin),
            "all_verdicts_correct": correct,
        }
    else:
        report = {
            "mode": "classify",
            "signal": p["signal"],
            "margin": margin,
            "verdicts": {str(xi): rep.verdict for (_, xi), rep in reports.items()},
            "eps1": {str(xi): rep.eps1_hat for (_, xi), rep in reports.items()},
        }
    return 0, header, rows, report


RUNNERS = {
    "classify": _run_classify,
    "vdw": _run_vdw,
    "kirchhoff": _run_kirchhoff,
    "instability": _run_instability,
    "majorant": _run_majorant,
    "fbi": _run_fbi,
}


# --- run orchestration ---------------------------------------------------------


def run_experiment(
    command: str, raw_parameters: dict, outdir: Path, seed: int
) -> Tuple[int, List[str], List[list]]:
    """Validate, execute, and write the three artifacts.  Returns the exit
    code plus the formatted rows so sweep can merge without re-reading."""
    params = validate_parameters(command, raw_parameters)
    t0 = time.perf_counter()
    code, header, rows, report = RUNNERS[command](params)
    wall = time.perf_counter() - t0
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    formatted = [[_fmt_cell(v) for v in row] for row in rows]
    write_csv(outdir / "results.csv", header, formatted)
    write_json(outdir / "report.json", report)
    write_json(
        outdir / "manifest.json",
        {
            "command": command,
            "parameters": params,
            "seed": seed,
            "versions": _versions(),
            "wall_time_s": round(wall, 6),
        },
    )
    return code, header, formatted


def _load_json(path: Path, what: str) -> dict:
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"{what} file not found: {path}")
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise UsageError(f"{what} {path} is not valid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise UsageError(f"{what} {path} must contain a JSON object")
    return obj


def _load_config(path: Path) -> Tuple[str, dict, Optional[str], int]:
    cfg = _load_json(path, "config")
    unknown = set(cfg) - {"command", "parameters", "output_dir", "seed"}
    if unknown:
        raise UsageError(f"config {path}: unknown keys {sorted(unknown)}")
    if "command" not in cfg:
        raise UsageError(f"config {path}: missing 'command'")
    command = cfg["command"]
    if not isinstance(command, str) or command not in SCHEMAS:
        raise UsageError(f"config {path}: unknown command {command!r}")
    parameters = cfg.get("parameters", {})
    if not isinstance(parameters, dict):
        raise UsageError(f"config {path}: 'parameters' must be an object")
    seed = cfg.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise UsageError(f"config {path}: 'seed' must be an integer")
    return command, parameters, cfg.get("output_dir"), seed


def _resolve_out(flag_out: Optional[str], cfg_out: Optional[str]) -> Path:
    out = flag_out or cfg_out
    if not out:
        raise UsageError("an output directory is required (--out or output_dir)")
    return Path(out)


def _parse_set(items: List[str]) -> dict:
    overrides = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise UsageError(f"--set expects key=value, got {item!r}")
        try:
            overrides[key] = json.loads(value)
        except json.JSONDecodeError:
            overrides[key] = value
    return overrides


def _canonical_key(command: str, params: dict) -> str:
    return json.dumps(
        {"command": command, "parameters": _jsonable(params)},
        sort_keys=True,
        separators=(",", ":"),
    )


def _cmd_single(args) -> int:
    raw = {}
    cfg_out = None
    seed = 0
    if args.config:
        command, raw, cfg_out, seed = _load_config(args.config)
        if command != args.command:
            raise UsageError(
                f"config {args.config} is for command {command!r},"
                f" invoked as {args.command!r}"
            )
        raw = dict(raw)
    raw.update(_parse_set(args.set))
    if args.seed is not None:
        seed = args.seed
    out = _resolve_out(args.out, cfg_out)
    code, _, _ = run_experiment(args.command, raw, out, seed)
    return code


def _cmd_run(args) -> int:
    command, raw, cfg_out, seed = _load_config(args.config)
    if args.seed is not None:
        seed = args.seed
    out = _resolve_out(args.out, cfg_out)
    code, _, _ = run_experiment(command, raw, out, seed)
    return code


def _cmd_rerun(args) -> int:
    man = _load_json(args.manifest, "manifest")
    for key in ("command", "parameters"):
        if key not in man:
            raise UsageError(f"manifest {args.manifest}: missing {key!r}")
    out = _resolve_out(args.out, None)
    code, _, _ = run_experiment(
        man["command"], man["parameters"], out, int(man.get("seed", 0))
    )
    return code


def _cmd_sweep(args) -> int:
    loaded = []
    for path in args.configs:
        command, raw, _, seed = _load_config(path)
        params = validate_parameters(command, raw)
        loaded.append((Path(path), command, params, seed))
    commands = {c for _, c, _, _ in loaded}
    if len(commands) > 1:
        raise UsageError(f"sweep configs mix commands: {sorted(commands)}")
    keys = [_canonical_key(c, p) for _, c, p, _ in loaded]
    for i, key in enumerate(keys):
        if key in keys[:i]:
            raise UsageError(
                f"sweep configs {keys.index(key)} and {i} resolve to the same"
                " parameters; configs must be pairwise distinct"
            )

    out = _resolve_out(args.out, None)
    out.mkdir(parents=True, exist_ok=True)
    runs = []
    merged: List[list] = []
    merged_header: Optional[List[str]] = None
    worst = 0
    for i, (path, command, params, seed) in enumerate(loaded):
        rundir = out / f"run_{i:03d}"
        status, error, code = "ok", None, 0
        try:
            code, header, rows = run_experiment(command, params, rundir, seed)
        except _NUMERICAL_ERRORS as exc:
            status, error, code = "numerical", f"{type(exc).__name__}: {exc}", 3
        except Exception as exc:  # recorded, sweep continues
            status, error, code = "internal", f"{type(exc).__name__}: {exc}", 4
        else:
            if code != 0:
                status = "numerical" if code == 3 else "internal"
            if code == 0:
                if merged_header is None:
                    merged_header = header
                if header == merged_header:
                    merged.extend([f"{i:03d}"] + row for row in rows)
        worst = max(worst, code)
        runs.append(
            {
                "run": i,
                "config": path.name,
                "exit_code": code,
                "status": status,
                "error": error,
                "outdir": rundir.name,
            }
        )
    write_csv(out / "results.csv", ["run"] + (merged_header or []), merged)
    write_json(
        out / "report.json",
        {
            "command": loaded[0][1],
            "runs": runs,
            "n_ok": sum(1 for r in runs if r["status"] == "ok"),
            "n_failed": sum(1 for r in runs if r["status"] != "ok"),
        },
    )
    return worst


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cauchylab",
        description="Run classification, growth, bound, and analyticity experiments.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    for command in SCHEMAS:
        p = sub.add_parser(command, help=f"run the {command} experiment")
        p.add_argument("--config", help="JSON config supplying parameters")
        p.add_argument(
            "--set", action="append", default=[], metavar="KEY=VALUE",
            help="override one parameter (value parsed as JSON)",
        )
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, default=None)
        p.set_defaults(handler=_cmd_single, command=command)

    p = sub.add_parser("run", help="run one experiment from a config file")
    p.add_argument("config")
    p.add_argument("--out", help="output directory (overrides config)")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(handler=_cmd_run)

    p = sub.add_parser("rerun", help="replay an emitted manifest")
    p.add_argument("manifest")
    p.add_argument("--out", required=False, help="fresh output directory")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(handler=_cmd_rerun)

    p = sub.add_parser("sweep", help="run several configs and merge the rows")
    p.add_argument("configs", nargs="+")
    p.add_argument("--out", help="sweep output directory")
    p.set_defaults(handler=_cmd_sweep)

    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    try:
        return args.handler(args)
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"usage error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    raise SystemExit(main())
