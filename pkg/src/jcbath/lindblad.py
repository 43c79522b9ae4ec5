"""Full numerical engine: Liouvillian, time evolution, steady states.

Vectorization is column-stacking throughout: v[i + d*j] = rho[i, j],
i.e. numpy reshape/flatten with order='F'. The Liouvillian formula below
is written for that convention and must not be mixed with row-stacking.

All dynamics run in the rotating frame (time-independent generator); the
inversion P_e is frame-invariant, and dropping the ~5.4 GHz carrier is
what makes the integration non-stiff.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .operators import Operator, proj_excited

log = logging.getLogger(__name__)


class EngineError(RuntimeError):
    """Numerical engine failure (stiffness, degenerate kernel, ...)."""


# ---------------------------------------------------------------- plumbing

def vectorize(rho: np.ndarray) -> np.ndarray:
    r = np.asarray(rho, dtype=complex)
    if r.ndim != 2 or r.shape[0] != r.shape[1]:
        raise ValueError("vectorize requires a square matrix")
    return r.flatten(order="F")


def unvectorize(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    d = int(round(np.sqrt(v.size)))
    if d * d != v.size:
        raise ValueError("unvectorize requires a perfect-square length")
    return v.reshape((d, d), order="F")


def ground_density(dims: tuple) -> np.ndarray:
    """|g,0><g,0| under the package basis ordering (g is qubit index 1)."""
    d = int(np.prod(dims))
    rho = np.zeros((d, d), dtype=complex)
    idx = dims[1] if len(dims) > 1 else 1  # |g,0> sits at 1*fock_dim + 0
    rho[idx, idx] = 1.0
    return rho


def validate_density(rho: np.ndarray, herm_tol=1e-10, trace_tol=1e-8, eig_tol=-1e-8):
    r = np.asarray(rho)
    herm = np.linalg.norm(r - r.conj().T)
    tr = abs(np.trace(r).real - 1.0)
    mineig = float(np.linalg.eigvalsh(0.5 * (r + r.conj().T)).min())
    if herm > herm_tol or tr > trace_tol or mineig < eig_tol:
        raise ValueError(
            f"not a density matrix: herm {herm:.2e}, trace err {tr:.2e}, "
            f"min eig {mineig:.2e}")
    return r


# ---------------------------------------------------------------- Liouvillian

def build_liouvillian(h: Operator, collapse) -> np.ndarray:
    """L = -i(I (x) H - H^T (x) I) + sum_j r_j [(Cbar (x) C)
    - 1/2 I (x) C'C - 1/2 (C'C)^T (x) I], column-stacking convention."""
    hm = h.mat if isinstance(h, Operator) else np.asarray(h, dtype=complex)
    d = hm.shape[0]
    eye = np.eye(d, dtype=complex)
    lv = -1j * (np.kron(eye, hm) - np.kron(hm.T, eye))
    for c, rate in collapse:
        cm = c.mat if isinstance(c, Operator) else np.asarray(c, dtype=complex)
        if cm.shape != hm.shape:
            raise ValueError("collapse operator dimension mismatch")
        cdc = cm.conj().T @ cm
        lv += rate * (np.kron(cm.conj(), cm)
                      - 0.5 * np.kron(eye, cdc)
                      - 0.5 * np.kron(cdc.T, eye))
    return lv


@dataclass
class EvolutionResult:
    times: np.ndarray
    p_e: np.ndarray
    trace_err_max: float
    herm_err_max: float
    min_eig_min: float
    steps_taken: int
    rho_final: np.ndarray


def evolve_adaptive(h: Operator, collapse, rho0: np.ndarray, t_grid,
                    tol: float = 1e-9) -> EvolutionResult:
    """Integrate rho' = L[rho] with an embedded (4,5) Runge-Kutta pair.

    The right-hand side is evaluated in d x d matrix form (a handful of
    small matmuls) rather than as a d^2 x d^2 matvec; for the 30-dim
    composite space that is roughly an order of magnitude faster and is
    what keeps the 100 us log-grid runs at desk scale.

    No positivity or trace repair happens during integration; worst-case
    trace error and minimum eigenvalue over the samples are reported so
    callers can assert physicality instead of trusting it.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) < 2 or t_grid[0] != 0.0 \
            or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must ascend from 0")
    if not 1e-12 <= tol <= 1e-4:
        raise ValueError("tol must lie in [1e-12, 1e-4]")
    hm = h.mat
    d = hm.shape[0]
    pre = []
    for c, rate in collapse:
        cm = c.mat if isinstance(c, Operator) else np.asarray(c, dtype=complex)
        pre.append((rate, cm, cm.conj().T, cm.conj().T @ cm))

    def rhs(_t, v):
        r = v.reshape((d, d), order="F")
        out = -1j * (hm @ r - r @ hm)
        for rate, cm, cmd, cdc in pre:
            out += rate * (cm @ r @ cmd - 0.5 * (cdc @ r + r @ cdc))
        return out.flatten(order="F")

    sol = solve_ivp(rhs, (0.0, float(t_grid[-1])), vectorize(rho0),
                    method="RK45", t_eval=t_grid, rtol=tol, atol=tol)
    if sol.status != 0:
        raise EngineError(
            f"integration failed near t = {sol.t[-1] if len(sol.t) else 0.0:.6g} us: "
            f"{sol.message}")

    proj = proj_excited(h.dims).mat
    pdiag = np.real(np.diag(proj)).copy()
    trace_err = 0.0
    herm_err = 0.0
    min_eig = np.inf
    p_e = np.empty(len(t_grid))
    for i in range(len(t_grid)):
        r = sol.y[:, i].reshape((d, d), order="F")
        p_e[i] = float(np.real(np.sum(pdiag * np.diag(r))))
        trace_err = max(trace_err, abs(np.trace(r) - 1.0))
        herm_err = max(herm_err, float(np.linalg.norm(r - r.conj().T)))
        min_eig = min(min_eig, float(
            np.linalg.eigvalsh(0.5 * (r + r.conj().T)).min()))
    return EvolutionResult(
        times=t_grid, p_e=p_e, trace_err_max=trace_err,
        herm_err_max=herm_err, min_eig_min=min_eig, steps_taken=int(sol.nfev),
        rho_final=unvectorize(sol.y[:, -1]))


# ---------------------------------------------------------------- expm oracle

# Pade scaling-and-squaring, Higham (2005) style, kept deliberately
# independent from the Runge-Kutta path so the two can cross-check each
# other: the integrator comes from scipy, this propagator is in-house.

_PADE13 = (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
           1187353796428800.0, 129060195264000.0, 10559470521600.0,
           670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
           960960.0, 16380.0, 182.0, 1.0)
_THETA13 = 5.371920351148152


def expm(a: np.ndarray) -> np.ndarray:
    """Matrix exponential via 13th-order Pade with scaling and squaring."""
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    norm = np.linalg.norm(a, 1)
    squarings = 0
    if norm > _THETA13:
        squarings = max(0, int(np.ceil(np.log2(norm / _THETA13))))
        a = a / (2.0 ** squarings)
    b = _PADE13
    eye = np.eye(n, dtype=complex)
    a2 = a @ a
    a4 = a2 @ a2
    a6 = a2 @ a4
    u = a @ (a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2)
             + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * eye)
    v = a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2) \
        + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * eye
    f = np.linalg.solve(v - u, v + u)
    for _ in range(squarings):
        f = f @ f
    return f


def propagate_expm(lv: np.ndarray, rho0: np.ndarray, t: float) -> np.ndarray:
    """rho(t) = unvec(exp(L t) vec(rho0)); independent oracle for the RK path."""
    if t < 0:
        raise ValueError("propagate_expm requires t >= 0")
    if t == 0.0:
        return np.asarray(rho0, dtype=complex).copy()
    return unvectorize(expm(lv * t) @ vectorize(rho0))


# ---------------------------------------------------------------- steady state

KERNEL_RATIO = 1e3  # second-smallest singular value must exceed this x smallest


def steady_state(lv: np.ndarray, info: dict | None = None) -> np.ndarray:
    """Unique steady state of a Liouvillian via least squares.

    Checks the kernel is one dimensional (second-smallest singular value
    > 1e3 x smallest), then solves L v = 0 with the trace constraint
    appended as an extra row. Dense SVD/lstsq is fine at desk scale
    (Hilbert dimension <= 40); no iterative solver is warranted.

    Pass a dict as `info` to receive pre-repair diagnostics: the raw
    minimum eigenvalue and Hermiticity defect of the lstsq solution,
    before the documented hermitize/clip/renormalize step.
    """
    d2 = lv.shape[0]
    d = int(round(np.sqrt(d2)))
    sv = np.linalg.svd(lv, compute_uv=False)
    if sv[-2] <= KERNEL_RATIO * sv[-1]:
        raise EngineError(
            f"degenerate steady-state kernel: smallest singular values "
            f"{sv[-1]:.3e}, {sv[-2]:.3e}")
    tr_row = np.eye(d, dtype=complex).flatten(order="F")[None, :]
    a = np.vstack([lv, tr_row])
    b = np.zeros(d2 + 1, dtype=complex)
    b[-1] = 1.0
    v, *_ = np.linalg.lstsq(a, b, rcond=None)
    rho = unvectorize(v)
    herm_defect = float(np.linalg.norm(rho - rho.conj().T))
    rho = 0.5 * (rho + rho.conj().T)
    w, u = np.linalg.eigh(rho)
    if info is not None:
        info["min_eig_raw"] = float(w.min())
        info["herm_defect"] = herm_defect
        info["kernel_gap"] = float(sv[-2] / sv[-1]) if sv[-1] > 0 else float("inf")
    if w.min() < -1e-10:
        log.info("steady_state clipped negative eigenvalue of magnitude %.3e",
                 float(-w.min()))
        w = np.clip(w, 0.0, None)
        rho = (u * w) @ u.conj().T
    return rho / np.trace(rho).real


def steady_p_e(h: Operator, collapse) -> float:
    """Convenience: steady-state excited population for a full model."""
    rho = steady_state(build_liouvillian(h, collapse))
    proj = proj_excited(h.dims).mat
    return float(np.real(np.trace(proj @ rho)))
