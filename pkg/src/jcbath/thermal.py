"""Gibbs effective temperatures and stage segmentation.

A two-level Gibbs state at temperature T populates the excited level as
P_e = 1/(1 + e^{hw_q/kT}), always below 1/2. Inverting that relation
maps a measured saturation level to an effective temperature; P_e -> 1/2
sends the temperature to infinity, and populations above 1/2 have no
Gibbs image (they would be negative temperatures, outside this model's
reachable range).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .system import HBAR_OVER_KB


class ConvergenceError(RuntimeError):
    """A convergence criterion was never met."""


@dataclass(frozen=True)
class EffectiveTemperature:
    kelvin: float  # math.inf marks the P_e = 1/2 divergence
    p_e: float
    omega_q: float

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.kelvin)


def effective_temperature(p_e: float, omega_q: float,
                          hbar_over_kb: float = HBAR_OVER_KB) -> EffectiveTemperature:
    """Gibbs temperature reproducing inversion p_e at qubit gap omega_q.

    T = (hbar omega_q / k_B) / ln((1 - p_e)/p_e). p_e = 0 maps to 0 K,
    p_e = 1/2 to infinity; p_e > 1/2 raises (negative-temperature domain).
    """
    if not 0.0 <= p_e < 1.0:
        raise ValueError(f"p_e must lie in [0, 1), got {p_e}")
    if p_e > 0.5:
        raise ValueError(
            f"p_e = {p_e} exceeds 1/2: no finite or infinite Gibbs temperature")
    if p_e == 0.0:
        return EffectiveTemperature(0.0, p_e, omega_q)
    if p_e == 0.5:
        return EffectiveTemperature(math.inf, p_e, omega_q)
    t = hbar_over_kb * omega_q / math.log((1.0 - p_e) / p_e)
    return EffectiveTemperature(t, p_e, omega_q)


def population_from_temperature(t: float, omega_q: float,
                                hbar_over_kb: float = HBAR_OVER_KB) -> float:
    """Inverse map: P_e = 1/(1 + e^{hw_q/kT}); t = 0 returns 0."""
    if t < 0:
        raise ValueError("temperature must be non-negative")
    if t == 0.0:
        return 0.0
    x = hbar_over_kb * omega_q / t
    if x > 700.0:
        return 0.0
    return 1.0 / (1.0 + math.exp(x))


@dataclass(frozen=True)
class StageSplit:
    """Boundary between the initial endothermic window and the
    quasi-equilibrium tail of a trajectory."""

    t_boundary: float
    stage1: tuple  # (0, t_boundary)
    stage2: tuple  # (t_boundary, t_end)


def detect_stages(times, p_e, p_ss: float) -> StageSplit:
    """Earliest sample time after which the trace stays inside the
    saturation band |P_e - p_ss| <= max(0.05 p_ss, 0.005).

    The 5 percent relative / 0.005 absolute band is an operational
    choice; the split is drawn by eye in measurement practice. The
    boundary is taken at the first sample after t = 0 so it is always
    interior to the trace.
    """
    times = np.asarray(times, dtype=float)
    pe = np.asarray(p_e, dtype=float)
    if len(times) == 0 or len(times) != len(pe):
        raise ValueError("times and p_e must be equal-length and non-empty")
    if not 0.0 < p_ss < 1.0:
        raise ValueError("p_ss must lie in (0, 1)")
    band = max(0.05 * p_ss, 0.005)
    inside = np.abs(pe - p_ss) <= band
    # suffix scan: earliest index from which every later sample stays inside
    idx = None
    ok = True
    for i in range(len(pe) - 1, 0, -1):
        ok = ok and inside[i]
        if ok:
            idx = i
        else:
            break
    if idx is None:
        raise ConvergenceError(
            f"trace never settles into the saturation band; final residual "
            f"{abs(pe[-1] - p_ss):.3e} vs band {band:.3e}")
    tb = float(times[idx])
    return StageSplit(t_boundary=tb, stage1=(float(times[0]), tb),
                      stage2=(tb, float(times[-1])))
