"""Trace fitting and coupling calibration.

The qubit-resonator coupling eta is not independently measured, so the
package treats it as the one free knob: `fit_trace` adjusts any subset
of {eta, Omega, t1, gamma_r} against a measured P_e(t) trace, and
`calibrate_eta` pins eta alone from a known saturation level. Both are
fully deterministic (fixed simplex / bisection, no randomness).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .channels import channel_p_e_series
from .lindblad import (build_liouvillian, evolve_adaptive, ground_density,
                       steady_state)
from .operators import proj_excited
from .system import SystemParams, collapse_set_full, build_h_rotating, mhz
from .thermal import ConvergenceError

FIT_UNITS = {"eta": "MHz", "Omega": "MHz", "t1": "us", "gamma_r": "MHz"}

_SIMPLEX_STEP = 0.05      # relative edge length of the initial simplex
_MAX_ITER = 500
_XATOL = 1e-6             # relative: optimization runs in x/x0 coordinates


def trace_model(p: SystemParams, t_grid, engine: str, tol: float = 1e-9) -> np.ndarray:
    """P_e(t) on t_grid for the requested engine ('full' or 'channel')."""
    t_grid = np.asarray(t_grid, dtype=float)
    if engine == "channel":
        pe, _ = channel_p_e_series(p, t_grid)
        return pe
    if engine != "full":
        raise ValueError(f"unknown engine {engine!r}")
    h = build_h_rotating(p)
    rho0 = ground_density(h.dims)
    grid = t_grid
    prepended = False
    if grid[0] != 0.0:  # integrator wants an explicit start at 0
        grid = np.concatenate([[0.0], grid])
        prepended = True
    res = evolve_adaptive(h, collapse_set_full(p), rho0, grid, tol=tol)
    return res.p_e[1:] if prepended else res.p_e


@dataclass(frozen=True)
class FitResult:
    fitted: dict        # name -> value in the units of FIT_UNITS
    units: dict         # name -> unit string
    residual: float     # RMS of P_e difference at the fitted point
    iterations: int
    converged: bool

    def __post_init__(self):
        if self.residual < 0:
            raise ValueError("residual must be non-negative")


def _get_friendly(p: SystemParams, name: str) -> float:
    val = getattr(p, name)
    return val if name == "t1" else val / mhz(1.0)


def apply_friendly(p: SystemParams, updates: dict) -> SystemParams:
    """Apply {name: value} updates given in FIT_UNITS units (MHz, us)."""
    kw = {}
    for name, v in updates.items():
        kw[name] = v if name == "t1" else mhz(v)
    return p.with_(**kw)


def fit_trace(data, free, c) -> FitResult:
    """Least-squares fit of P_e(t) data by derivative-free simplex descent.

    data: sequence of (t_us, p_e) pairs, at least 10 of them.
    free: subset of {eta, Omega, t1, gamma_r}; empty set means just score
    the config parameters (zero iterations).

    Starts from the config values with a fixed initial simplex (5 percent
    steps in x/x0 coordinates), parameter bounds [0.1x, 10x] of the start,
    an iteration cap of 500, and termination when the simplex shrinks
    below 1e-6 relative. Hitting the cap returns the best point so far,
    flagged non-converged.
    """
    pairs = sorted((float(t), float(pe)) for t, pe in data)
    if len(pairs) < 10:
        raise ValueError("need at least 10 data points to fit")
    names = tuple(sorted(set(free)))
    bad = [n for n in names if n not in FIT_UNITS]
    if bad:
        raise ValueError(f"cannot fit parameter(s) {bad}; "
                         f"choose from {sorted(FIT_UNITS)}")
    t_grid = np.array([t for t, _ in pairs])
    target = np.array([pe for _, pe in pairs])
    if t_grid[0] < 0:
        raise ValueError("data times must be non-negative")

    base = c.params
    engine = "full" if c.engine == "full" else "channel"

    def rms_at(p: SystemParams) -> float:
        model = trace_model(p, t_grid, engine, tol=c.tol)
        return float(np.sqrt(np.mean((model - target) ** 2)))

    if not names:
        return FitResult(fitted={}, units={}, residual=rms_at(base),
                         iterations=0, converged=True)

    x0 = np.array([_get_friendly(base, n) for n in names])

    def objective(u: np.ndarray) -> float:
        p = apply_friendly(base, dict(zip(names, u * x0)))
        return rms_at(p)

    simplex = np.tile(np.ones(len(names)), (len(names) + 1, 1))
    for i in range(len(names)):
        simplex[i + 1, i] += _SIMPLEX_STEP

    res = minimize(
        objective, np.ones(len(names)), method="Nelder-Mead",
        bounds=[(0.1, 10.0)] * len(names),
        options={"initial_simplex": simplex, "maxiter": _MAX_ITER,
                 "xatol": _XATOL, "fatol": 1e-12, "adaptive": False})

    best = res.x * x0
    return FitResult(
        fitted={n: float(v) for n, v in zip(names, best)},
        units={n: FIT_UNITS[n] for n in names},
        residual=float(res.fun),
        iterations=int(res.nit),
        converged=bool(res.success))


def steady_p_e_full(p: SystemParams, info: dict | None = None) -> float:
    """Steady excited-state population of the full numeric model."""
    h = build_h_rotating(p)
    rho = steady_state(build_liouvillian(h, collapse_set_full(p)), info=info)
    proj = proj_excited(h.dims).mat
    return float(np.real(np.trace(proj @ rho)))


def calibrate_eta(p: SystemParams, target: float = 0.330,
                  lo_mhz: float = 0.5, hi_mhz: float = 5.0,
                  p_tol: float = 1e-3, max_iter: int = 40) -> float:
    """Bisect eta (rad/us) so the full-model steady P_e hits `target`.

    The saturation level is monotone in the coupling over the bracket at
    the preset operating points, so plain bisection is exact enough and,
    unlike a polished root finder, trivially deterministic.
    """
    lo, hi = mhz(lo_mhz), mhz(hi_mhz)
    f_lo = steady_p_e_full(p.with_(eta=lo)) - target
    f_hi = steady_p_e_full(p.with_(eta=hi)) - target
    if f_lo * f_hi > 0:
        raise ConvergenceError(
            f"steady P_e does not bracket {target} over eta/2pi in "
            f"[{lo_mhz}, {hi_mhz}] MHz (endpoints {f_lo + target:.4f}, "
            f"{f_hi + target:.4f})")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = steady_p_e_full(p.with_(eta=mid)) - target
        if abs(f_mid) < p_tol:
            return mid
        if f_lo * f_mid <= 0:
            hi = mid
        else:
            lo, f_lo = mid, f_mid
    return 0.5 * (lo + hi)
