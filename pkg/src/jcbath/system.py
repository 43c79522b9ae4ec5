"""Physical model construction: Hamiltonians, bath rates, collapse operators.

Unit system
-----------
All angular frequencies and rates are rad/us, times are us, temperatures
are K. A linear frequency f given in GHz converts as omega = 2*pi*1e3*f.
Keeping everything in rad/us puts every dynamical quantity between about
1e-6 (thermal occupations) and 1e4 (carrier frequencies), comfortably
inside double precision.

Conventions
-----------
The qubit term is (omega_q/2) sigma_z everywhere, so the qubit gap is
omega_q. The drive acts on the resonator, Omega (a' e^{-i w_d t} + h.c.);
in the frame rotating at omega_d it becomes the static Omega (a' + a)
with detunings delta_q = omega_q - omega_d and delta_r = omega_r - omega_d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .operators import Operator, annihilation, dagger, identity, kron, pauli

TWO_PI = 2.0 * math.pi

# hbar / k_B in K us; single source of truth for temperature conversions,
# overridable through SystemParams for sensitivity studies.
HBAR_OVER_KB = 7.6382e-6

# Bose occupation guard: |omega| is floored here before evaluating n(omega).
# Channel energies never legitimately vanish at the operating points, the
# floor only protects against overflow at accidental exact resonance.
OMEGA_FLOOR = TWO_PI * 1e-4


def ghz(f: float) -> float:
    """Linear GHz to angular rad/us."""
    return TWO_PI * 1e3 * f


def mhz(f: float) -> float:
    return TWO_PI * f


@dataclass(frozen=True)
class SystemParams:
    """Full parameter set of the driven qubit-resonator-bath system.

    omega_q, omega_r, omega_d, eta, Omega are angular frequencies in
    rad/us; gamma_r is the resonator FWHM linewidth as an angular rate in
    1/us; t1 is the qubit relaxation time in us; t_bath in K. eta is a
    fit parameter: it is not directly measured, the fit tooling exists to
    calibrate it against traces.
    """

    omega_q: float
    omega_r: float
    omega_d: float
    eta: float
    Omega: float
    gamma_r: float
    t1: float
    t_bath: float
    fock_dim: int = 15
    # reserved switches, both default off / zero
    qubit_excitation: bool = False   # thermal sigma_+ pump at nbar_q / t1
    dephasing: float = 0.0           # pure dephasing rate, never used by presets
    hbar_over_kb: float = HBAR_OVER_KB

    def __post_init__(self):
        for name in ("omega_q", "omega_r", "omega_d", "eta", "Omega", "gamma_r", "t1"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.t_bath < 0:
            raise ValueError("t_bath must be non-negative")
        if self.fock_dim < 3:
            raise ValueError("fock_dim must be at least 3")
        if self.dephasing < 0:
            raise ValueError("dephasing must be non-negative")

    def with_(self, **kw) -> "SystemParams":
        return replace(self, **kw)


def default_params() -> SystemParams:
    """The saturation-experiment operating point; every preset starts here."""
    return SystemParams(
        omega_q=ghz(5.448),
        omega_r=ghz(5.445),
        omega_d=ghz(5.450),
        eta=mhz(2.0),          # fit parameter, see module docstring
        Omega=mhz(2.0),
        gamma_r=mhz(1.2),
        t1=5.2,
        t_bath=0.020,
        fock_dim=15,
    )


@dataclass(frozen=True)
class BathSpectrum:
    """Flat spectral coupling density kappa at temperature t_bath.

    The flat choice reproduces the one-sided vacuum / two-sided thermal
    structure of the transition rates with a single measured parameter,
    the resonator linewidth.
    """

    kappa: float
    t_bath: float

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError("kappa must be strictly positive")
        if self.t_bath < 0:
            raise ValueError("t_bath must be non-negative")


def bath_from_params(p: SystemParams) -> BathSpectrum:
    return BathSpectrum(kappa=p.gamma_r, t_bath=p.t_bath)


# ---------------------------------------------------------------- Hamiltonians

def _jc_pieces(p: SystemParams):
    a = annihilation(p.fock_dim)
    iq = identity(2)
    ir = identity(p.fock_dim)
    sz = kron(pauli("z"), ir)
    num = kron(iq, Operator(dagger(a).mat @ a.mat, (p.fock_dim,)))
    coupling = kron(pauli("minus"), dagger(a)).mat + kron(pauli("plus"), a).mat
    return a, iq, ir, sz, num, coupling


def build_h_lab(p: SystemParams, t: float) -> Operator:
    """Lab-frame Hamiltonian at time t (us); the drive phase rotates at
    omega_d so this form is only used for short-window validation."""
    a, iq, ir, sz, num, coupling = _jc_pieces(p)
    drive = kron(iq, dagger(a)).mat * np.exp(-1j * p.omega_d * t) \
        + kron(iq, a).mat * np.exp(1j * p.omega_d * t)
    h = 0.5 * p.omega_q * sz.mat + p.omega_r * num.mat \
        + p.eta * coupling + p.Omega * drive
    h = 0.5 * (h + h.conj().T)  # kill rounding asymmetry in the phase factors
    return Operator(h, (2, p.fock_dim))


def build_h_rotating(p: SystemParams) -> Operator:
    """Time-independent generator in the frame rotating at omega_d."""
    _, iq, ir, sz, num, coupling = _jc_pieces(p)
    dq = p.omega_q - p.omega_d
    dr = p.omega_r - p.omega_d
    a = annihilation(p.fock_dim)
    drive = kron(iq, Operator(a.mat + dagger(a).mat, (p.fock_dim,))).mat
    h = 0.5 * dq * sz.mat + dr * num.mat + p.eta * coupling + p.Omega * drive
    return Operator(h, (2, p.fock_dim))


def build_h_bare_qubit(p: SystemParams) -> Operator:
    """Directly driven two-level system, rotating frame.

    (delta_q/2) sigma_z + Omega (sigma_+ + sigma_-): at resonance the
    inversion from the ground state evolves as sin^2(Omega t), so one
    population period is pi/Omega. That convention is documented rather
    than asserted against any external definition; the fit tooling may
    rescale Omega by a constant recorded in its output.
    """
    dq = p.omega_q - p.omega_d
    h = 0.5 * dq * pauli("z").mat + p.Omega * (pauli("plus").mat + pauli("minus").mat)
    return Operator(h, (2,))


# ---------------------------------------------------------------- bath rates

def bose_occupation(omega: float, t: float, hbar_over_kb: float = HBAR_OVER_KB) -> float:
    """Mean thermal photon number n(omega, T) = 1/(e^{hw/kT} - 1).

    omega must be positive (use rate_thermal for signed arguments);
    t = 0 returns exactly 0. Guarded against overflow at large hw/kT.
    """
    if omega <= 0:
        raise ValueError("bose_occupation requires omega > 0")
    if t <= 0:
        return 0.0
    x = hbar_over_kb * omega / t
    if x > 700.0:  # exp overflow guard; occupation is zero to double precision
        return 0.0
    return 1.0 / math.expm1(x)


def rate_thermal(s: BathSpectrum, omega: float,
                 hbar_over_kb: float = HBAR_OVER_KB) -> float:
    """Two-sided thermal rate gammabar(omega) = kappa * n(|omega|, T).

    Symmetric in omega by construction; |omega| is floored at OMEGA_FLOOR
    so the occupation stays finite at accidental zero frequency.
    """
    if s.t_bath <= 0:
        return 0.0
    w = max(abs(omega), OMEGA_FLOOR)
    return s.kappa * bose_occupation(w, s.t_bath, hbar_over_kb)


def rate_vacuum(s: BathSpectrum, omega: float) -> float:
    """One-sided vacuum rate gamma(omega): kappa for omega > 0, else 0.

    The boundary omega = 0 is closed (returns 0), matching the reading
    that spontaneous vacuum emission needs a strictly positive quantum.
    """
    return s.kappa if omega > 0 else 0.0


def collapse_set_full(p: SystemParams) -> list:
    """Collapse operators of the full numerical model.

    Standard damped-JC set: resonator decay/pump at gamma_r (nbar + 1) and
    gamma_r nbar with nbar evaluated at omega_r, plus qubit relaxation at
    1/T1. The qubit thermal pump (sigma_+) is numerically irrelevant at
    20 mK (nbar ~ 2e-6) and ships switched off; pure dephasing is a
    reserved switch defaulting to zero.
    """
    a = annihilation(p.fock_dim)
    iq = identity(2)
    ir = identity(p.fock_dim)
    nr = bose_occupation(p.omega_r, p.t_bath, p.hbar_over_kb) if p.t_bath > 0 else 0.0
    cs = [
        (kron(iq, a), p.gamma_r * (nr + 1.0)),
        (kron(iq, dagger(a)), p.gamma_r * nr),
        (kron(pauli("minus"), ir), 1.0 / p.t1),
    ]
    if p.qubit_excitation:
        nq = bose_occupation(p.omega_q, p.t_bath, p.hbar_over_kb) if p.t_bath > 0 else 0.0
        cs.append((kron(pauli("plus"), ir), nq / p.t1))
    if p.dephasing > 0:
        cs.append((kron(pauli("z"), ir), p.dephasing))
    return cs


def collapse_set_bare(p: SystemParams) -> list:
    """Two-level collapse set for the directly driven qubit."""
    cs = [(pauli("minus"), 1.0 / p.t1)]
    if p.qubit_excitation:
        nq = bose_occupation(p.omega_q, p.t_bath, p.hbar_over_kb) if p.t_bath > 0 else 0.0
        cs.append((pauli("plus"), nq / p.t1))
    if p.dephasing > 0:
        cs.append((pauli("z"), p.dephasing))
    return cs
