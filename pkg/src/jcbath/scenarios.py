"""Scenario runners: each preset experiment from config to artifacts.

A runner produces a summary dict with the fixed top-level shape
{config_echo, results, diagnostics, version} and writes the requested
CSV/JSON/SVG files into the output directory. Grid sweeps fan out over
a thread pool but results are collected by index and written once, so
output bytes never depend on scheduling.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .channels import channel_p_e_series, steady_state_channel
from .config import (POWER_SERIES_OMEGAS_MHZ, ConfigError, ScenarioConfig,
                     echo_config)
from .fitting import apply_friendly, fit_trace, steady_p_e_full, trace_model
from .lindblad import EngineError, evolve_adaptive, ground_density
from .report import (SWEEP_HEADER, TIMESERIES_HEADER, VERSION, render_svg,
                     write_csv, write_json)
from .system import (SystemParams, build_h_bare_qubit, build_h_rotating,
                     collapse_set_bare, collapse_set_full, ghz, mhz)
from .thermal import detect_stages, effective_temperature


def _linear_grid(t_max: float, samples: int) -> np.ndarray:
    return np.linspace(0.0, t_max, samples)


def _log_grid(t_max: float, samples: int) -> np.ndarray:
    # 1 ns floor; t = 0 prepended so traces start at the prepared state
    return np.concatenate([[0.0], np.geomspace(1e-3, t_max, samples - 1)])


def _t_eff_mk(p_e: float, omega_q: float, hbar_over_kb: float) -> float:
    """Effective temperature in mK; P_e >= 1/2 maps to the 'inf' literal."""
    if p_e >= 0.5:
        return math.inf
    if p_e <= 0.0:
        return 0.0
    return effective_temperature(p_e, omega_q, hbar_over_kb).kelvin * 1e3


def _axis_values(lo: float, hi: float, n: int) -> np.ndarray:
    return np.array([lo]) if n == 1 else np.linspace(lo, hi, n)


def _engine_trace(p: SystemParams, t_grid, engine: str, tol: float):
    """(p_e, diagnostics) for one engine on one grid."""
    if engine == "channel":
        pe, diag = channel_p_e_series(p, t_grid)
        return pe, {"engine": "channel", **diag}
    h = build_h_rotating(p)
    res = evolve_adaptive(h, collapse_set_full(p), ground_density(h.dims),
                          t_grid, tol=tol)
    return res.p_e, {
        "engine": "full",
        "trace_err_max": res.trace_err_max,
        "herm_err_max": res.herm_err_max,
        "min_eig_min": res.min_eig_min,
        "rhs_evaluations": res.steps_taken,
    }


def _stage_dict(times, pe, p_ss: float) -> dict:
    s = detect_stages(times, pe, p_ss)
    return {"t_boundary_us": s.t_boundary,
            "stage1_us": list(s.stage1), "stage2_us": list(s.stage2)}


# ------------------------------------------------------------------ runners

def _run_rabi(c: ScenarioConfig) -> dict:
    p = c.params
    t = _linear_grid(c.t_max, c.samples)
    h = build_h_bare_qubit(p)
    rho0 = ground_density(h.dims)
    res = evolve_adaptive(h, collapse_set_bare(p), rho0, t, tol=c.tol)
    results = {
        "t_us": t,
        "p_e": {"full": res.p_e},
        "expected_period_us": math.pi / p.Omega,
    }
    diagnostics = {
        "trace_err_max": res.trace_err_max,
        "herm_err_max": res.herm_err_max,
        "min_eig_min": res.min_eig_min,
        "rhs_evaluations": res.steps_taken,
    }
    return {"results": results, "diagnostics": diagnostics}


def _run_thermalize(c: ScenarioConfig) -> dict:
    p = c.params
    t = _linear_grid(c.t_max, c.samples)
    engines = ("full", "channel") if c.engine == "both" else (c.engine,)
    series, diags = {}, {}
    for eng in engines:
        pe, d = _engine_trace(p, t, eng, c.tol)
        series[eng] = pe
        diags[eng] = d
    primary = engines[0]
    if primary == "full":
        info: dict = {}
        p_ss = steady_p_e_full(p, info=info)
        diags["full"]["steady_state"] = info
    else:
        # the closed-form saturation formula and the trace's own long-time
        # limit (the rate-matrix kernel) differ; stages need the latter
        p_ss = diags[primary]["rate_matrix_steady_p_e"]
    results = {
        "t_us": t,
        "p_e": {eng: series[eng] for eng in engines},
        "p_e_steady": p_ss,
        "t_eff_mk": _t_eff_mk(p_ss, p.omega_q, p.hbar_over_kb),
        "stages": _stage_dict(t, series[primary], p_ss),
    }
    return {"results": results, "diagnostics": diags}


def _run_power_series(c: ScenarioConfig) -> dict:
    p0 = c.params
    t = _log_grid(c.t_max, c.samples)
    engine = "channel" if c.engine == "both" else c.engine
    runs = []
    diags = {"per_run": []}
    for om_mhz in POWER_SERIES_OMEGAS_MHZ:
        p = p0.with_(Omega=mhz(om_mhz))
        pe, d = _engine_trace(p, t, engine, c.tol)
        # the dynamics engine is configurable, the saturation block is
        # always the full numeric model so temperatures are comparable
        info: dict = {}
        p_ss_full = steady_p_e_full(p, info=info)
        p_ss_engine = (p_ss_full if engine == "full"
                       else d["rate_matrix_steady_p_e"])
        runs.append({
            "Omega_mhz": om_mhz,
            "p_e": pe,
            "p_e_steady": p_ss_engine,
            "p_e_steady_full": p_ss_full,
            "t_eff_mk": _t_eff_mk(p_ss_full, p.omega_q, p.hbar_over_kb),
            "stages": _stage_dict(t, pe, p_ss_engine),
        })
        diags["per_run"].append({"Omega_mhz": om_mhz, **d, "steady_state": info})
    results = {"t_us": t, "engine": engine, "runs": runs}
    return {"results": results, "diagnostics": diags}


def _sweep_point(p0: SystemParams, fd_ghz: float, om_mhz: float,
                 engine: str) -> tuple:
    p = p0.with_(omega_d=ghz(fd_ghz), Omega=mhz(om_mhz))
    if engine == "channel":
        p_ss = steady_state_channel(p)
        info: dict = {}
    else:
        info = {}
        p_ss = steady_p_e_full(p, info=info)
    return p_ss, _t_eff_mk(p_ss, p.omega_q, p.hbar_over_kb), info


def _local_maxima(x: np.ndarray, y: np.ndarray) -> list:
    out = []
    for i in range(1, len(y) - 1):
        if y[i] > y[i - 1] and y[i] > y[i + 1]:
            out.append(float(x[i]))
    return out


def _run_sweep(c: ScenarioConfig) -> dict:
    if c.sweep is None:
        raise ConfigError("sweep: scenario requires a sweep block")
    fd_axis = _axis_values(*c.sweep.omega_d_ghz)
    om_axis = _axis_values(*c.sweep.omega_mhz)
    engine = "full" if c.engine == "both" else c.engine
    points = [(fd, om) for fd in fd_axis for om in om_axis]  # lexicographic
    workers = min(8, os.cpu_count() or 1, len(points))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        done = list(pool.map(
            lambda q: _sweep_point(c.params, q[0], q[1], engine), points))
    p_ss = np.array([d[0] for d in done])
    t_eff = [d[1] for d in done]
    infos = [d[2] for d in done]
    maxima = []
    for om in om_axis:
        mask = np.array([abs(q[1] - om) < 1e-12 for q in points])
        maxima.append({"omega_mhz": float(om),
                       "maxima_ghz": _local_maxima(fd_axis, p_ss[mask])})
    results = {
        "omega_d_ghz": fd_axis,
        "omega_mhz": om_axis,
        "rows": [{"omega_d_ghz": fd, "omega_mhz": om,
                  "p_e_ss": float(pe), "t_eff_mk": te}
                 for (fd, om), pe, te in zip(points, p_ss, t_eff)],
        "local_maxima": maxima,
    }
    diagnostics = {"engine": engine, "grid_points": len(points)}
    if infos and infos[0]:
        diagnostics["steady_state"] = {
            "min_eig_raw_min": min(i["min_eig_raw"] for i in infos),
            "herm_defect_max": max(i["herm_defect"] for i in infos),
            "kernel_gap_min": min(i["kernel_gap"] for i in infos),
        }
    return {"results": results, "diagnostics": diagnostics}


def _run_channel_compare(c: ScenarioConfig) -> dict:
    p = c.params
    t = _linear_grid(c.t_max, c.samples)
    pe_full, d_full = _engine_trace(p, t, "full", c.tol)
    pe_chan, d_chan = _engine_trace(p, t, "channel", c.tol)
    gap = float(np.max(np.abs(pe_full - pe_chan)))
    results = {
        "t_us": t,
        "p_e": {"full": pe_full, "channel": pe_chan},
        "max_abs_diff": gap,  # diagnostic overlay, reported even when large
        "p_e_steady": {"full": steady_p_e_full(p),
                       "channel": steady_state_channel(p)},
    }
    return {"results": results, "diagnostics": {"full": d_full, "channel": d_chan}}


def _load_trace_csv(path: str) -> list:
    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            reader = csv.reader(f)
            rows = [r for r in reader if r]
    except OSError as e:
        raise ConfigError(f"fit_data: cannot read {path}: {e}") from e
    if not rows:
        raise ConfigError(f"fit_data: {path} is empty")
    start = 1 if rows[0] and not _is_number(rows[0][0]) else 0
    data = []
    for r in rows[start:]:
        if len(r) < 2:
            raise ConfigError(f"fit_data: {path}: need t,p_e columns")
        try:
            data.append((float(r[0]), float(r[1])))
        except ValueError:
            raise ConfigError(
                f"fit_data: {path}: non-numeric row {r[:2]}") from None
    return data


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def _run_fit(c: ScenarioConfig) -> dict:
    if not c.fit_data:
        raise ConfigError("fit_data: required for the fit scenario")
    data = _load_trace_csv(c.fit_data)
    try:
        fr = fit_trace(data, c.fit_free, c)
    except ValueError as e:  # bad user data is a config problem, not a crash
        raise ConfigError(f"fit: {e}") from None
    engine = "full" if c.engine == "full" else "channel"
    p_best = apply_friendly(c.params, fr.fitted)
    t = np.array([q[0] for q in data])
    grid0 = t if t[0] == 0.0 else np.concatenate([[0.0], t])
    model_full, d_model = _engine_trace(p_best, grid0, engine, c.tol)
    model = model_full[-len(t):]
    results = {
        "fitted": {n: {"value": fr.fitted[n], "unit": fr.units[n]}
                   for n in fr.fitted},
        "residual_rms": fr.residual,
        "iterations": fr.iterations,
        "converged": fr.converged,
        "t_us": t,
        "p_e": {"data": [q[1] for q in data], "model": model},
    }
    return {"results": results, "diagnostics": {"engine": engine,
                                                "points": len(data),
                                                "model_trace": d_model}}


_RUNNERS = {
    "rabi": _run_rabi,
    "thermalize": _run_thermalize,
    "power_series": _run_power_series,
    "sweep": _run_sweep,
    "channel_compare": _run_channel_compare,
    "fit": _run_fit,
}


# ------------------------------------------------------------------ emission

def _write_timeseries(c: ScenarioConfig, summary: dict, outdir: str) -> list:
    name = c.scenario
    res = summary["results"]
    written = []
    t = res["t_us"]
    if "csv" in c.outputs:
        rows = []
        for eng in res["p_e"]:
            rows += [(ti, pi, eng) for ti, pi in zip(t, res["p_e"][eng])]
        path = os.path.join(outdir, f"{name}.csv")
        write_csv(path, TIMESERIES_HEADER, rows)
        written.append(path)
    if "svg" in c.outputs:
        series = [(eng, t, res["p_e"][eng]) for eng in res["p_e"]]
        path = os.path.join(outdir, f"{name}.svg")
        render_svg(path, series, "t (us)", "P_e", title=name)
        written.append(path)
    return written


def _write_power_series(c: ScenarioConfig, summary: dict, outdir: str) -> list:
    res = summary["results"]
    t = res["t_us"]
    written = []
    if "csv" in c.outputs:
        for run in res["runs"]:
            label = "%.10g" % run["Omega_mhz"]
            path = os.path.join(outdir, f"power_series_{label}MHz.csv")
            write_csv(path, TIMESERIES_HEADER,
                      [(ti, pi, res["engine"]) for ti, pi in zip(t, run["p_e"])])
            written.append(path)
    if "svg" in c.outputs:
        series = [("Omega/2pi = %.10g MHz" % run["Omega_mhz"], t[1:],
                   run["p_e"][1:]) for run in res["runs"]]  # log axis: drop t=0
        path = os.path.join(outdir, "power_series.svg")
        render_svg(path, series, "t (us)", "P_e", title="power_series",
                   xscale="log")
        written.append(path)
    return written


def _write_sweep(c: ScenarioConfig, summary: dict, outdir: str) -> list:
    res = summary["results"]
    written = []
    if "csv" in c.outputs:
        rows = [(r["omega_d_ghz"], r["omega_mhz"], r["p_e_ss"], r["t_eff_mk"])
                for r in res["rows"]]
        path = os.path.join(outdir, "sweep.csv")
        write_csv(path, SWEEP_HEADER, rows)
        written.append(path)
    if "svg" in c.outputs:
        series = []
        for om in res["omega_mhz"]:
            pe = [r["p_e_ss"] for r in res["rows"]
                  if abs(r["omega_mhz"] - om) < 1e-12]
            series.append(("Omega/2pi = %.10g MHz" % om,
                           res["omega_d_ghz"], pe))
        path = os.path.join(outdir, "sweep.svg")
        render_svg(path, series, "omega_d/2pi (GHz)", "steady P_e",
                   title="sweep")
        written.append(path)
    return written


def _write_fit(c: ScenarioConfig, summary: dict, outdir: str) -> list:
    res = summary["results"]
    written = []
    if "csv" in c.outputs:
        rows = [(ti, pi, "model") for ti, pi in zip(res["t_us"],
                                                    res["p_e"]["model"])]
        path = os.path.join(outdir, "fit.csv")
        write_csv(path, TIMESERIES_HEADER, rows)
        written.append(path)
    if "svg" in c.outputs:
        series = [("data", res["t_us"], res["p_e"]["data"]),
                  ("model", res["t_us"], res["p_e"]["model"])]
        path = os.path.join(outdir, "fit.svg")
        render_svg(path, series, "t (us)", "P_e", title="fit")
        written.append(path)
    return written


def run_scenario(c: ScenarioConfig, outdir: str) -> dict:
    """Execute one scenario and emit its artifacts.

    Returns the summary dict (the JSON payload) with the list of written
    file paths attached under diagnostics.files.
    """
    os.makedirs(outdir, exist_ok=True)
    try:
        body = _RUNNERS[c.scenario](c)
    except EngineError as e:
        raise EngineError(f"{c.scenario}: {e}") from e
    summary = {
        "config_echo": echo_config(c),
        "results": body["results"],
        "diagnostics": body["diagnostics"],
        "version": VERSION,
    }
    if c.scenario in ("rabi", "thermalize", "channel_compare"):
        written = _write_timeseries(c, summary, outdir)
    elif c.scenario == "power_series":
        written = _write_power_series(c, summary, outdir)
    elif c.scenario == "sweep":
        written = _write_sweep(c, summary, outdir)
    else:
        written = _write_fit(c, summary, outdir)
    if "json" in c.outputs:
        path = os.path.join(outdir, f"{c.scenario}.json")
        write_json(path, summary)
        written.append(path)
    summary["diagnostics"]["files"] = [os.path.basename(w) for w in written]
    return summary
