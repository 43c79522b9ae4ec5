import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jcbath.system import (HBAR_OVER_KB, OMEGA_FLOOR, BathSpectrum,
                           SystemParams, bath_from_params, bose_occupation,
                           build_h_bare_qubit, build_h_lab, build_h_rotating,
                           collapse_set_bare, collapse_set_full,
                           default_params, ghz, mhz, rate_thermal,
                           rate_vacuum)

# frozen oracle: 1/(exp(hbar/kB * 2pi*5445e3[rad/us... in rad/us units] / 0.020) - 1)
NBAR_5445_20MK = 2.116215055903383e-06


def test_unit_conversions():
    assert ghz(1.0) == pytest.approx(6283.185307179586, rel=1e-15)
    assert mhz(1.0) == pytest.approx(2 * math.pi, rel=1e-15)
    assert ghz(5.448) == pytest.approx(mhz(5448.0), rel=1e-15)


def test_hbar_over_kb_constant():
    # hbar/kB = 1.054571817e-34 / 1.380649e-23 K s = 7.6382e-6 K us
    assert HBAR_OVER_KB == pytest.approx(7.6382e-6, rel=1e-4)


def test_default_params_operating_point():
    p = default_params()
    assert p.omega_q == pytest.approx(ghz(5.448))
    assert p.omega_r == pytest.approx(ghz(5.445))
    assert p.omega_d == pytest.approx(ghz(5.450))
    assert p.Omega == pytest.approx(mhz(2.0))
    assert p.gamma_r == pytest.approx(mhz(1.2))
    assert p.t1 == 5.2
    assert p.t_bath == 0.020
    assert p.fock_dim == 15
    assert not p.qubit_excitation and p.dephasing == 0.0


def test_params_validation():
    p = default_params()
    with pytest.raises(ValueError):
        p.with_(t1=-1.0)
    with pytest.raises(ValueError):
        p.with_(Omega=0.0)
    with pytest.raises(ValueError):
        p.with_(t_bath=-0.01)
    with pytest.raises(ValueError):
        p.with_(fock_dim=2)
    assert p.with_(eta=mhz(3.0)).eta == pytest.approx(mhz(3.0))
    assert p.eta == pytest.approx(mhz(2.0))  # with_ does not mutate


def test_bose_occupation_oracle():
    assert bose_occupation(ghz(5.445), 0.020) == pytest.approx(
        NBAR_5445_20MK, rel=1e-12)
    assert bose_occupation(ghz(5.445), 0.0) == 0.0
    assert bose_occupation(mhz(1.0), 1e-12) == 0.0  # overflow guard path
    with pytest.raises(ValueError):
        bose_occupation(-1.0, 0.02)
    with pytest.raises(ValueError):
        bose_occupation(0.0, 0.02)


def test_bose_occupation_classical_limit():
    # kT >> hw: n -> kT / hw
    w, t = mhz(1.0), 1.0
    x = HBAR_OVER_KB * w / t
    assert bose_occupation(w, t) == pytest.approx(1.0 / x, rel=1e-3)


def test_rate_thermal_symmetric_and_floored():
    s = BathSpectrum(kappa=mhz(1.2), t_bath=0.020)
    w = ghz(5.445)
    assert rate_thermal(s, w) == pytest.approx(rate_thermal(s, -w), rel=1e-15)
    assert rate_thermal(s, w) == pytest.approx(
        mhz(1.2) * NBAR_5445_20MK, rel=1e-12)
    # zero frequency is floored, not singular
    assert rate_thermal(s, 0.0) == rate_thermal(s, OMEGA_FLOOR / 2)
    assert rate_thermal(BathSpectrum(kappa=mhz(1.2), t_bath=0.0), w) == 0.0


def test_rate_vacuum_one_sided():
    s = BathSpectrum(kappa=mhz(1.2), t_bath=0.020)
    assert rate_vacuum(s, mhz(1.0)) == mhz(1.2)
    assert rate_vacuum(s, -mhz(1.0)) == 0.0
    assert rate_vacuum(s, 0.0) == 0.0


def test_bath_from_params_identifies_kappa_with_gamma_r():
    p = default_params()
    s = bath_from_params(p)
    assert s.kappa == p.gamma_r and s.t_bath == p.t_bath


def test_h_rotating_structure():
    p = default_params().with_(fock_dim=3)
    h = build_h_rotating(p)
    m = h.mat
    assert np.linalg.norm(m - m.conj().T) < 1e-12
    dq = p.omega_q - p.omega_d
    dr = p.omega_r - p.omega_d
    # diagonal: +-dq/2 + n dr under the |q,n> = q*fock + n ordering
    expected_diag = [dq / 2 + n * dr for n in range(3)] + \
                    [-dq / 2 + n * dr for n in range(3)]
    assert np.allclose(np.diag(m).real, expected_diag)
    # JC coupling eta between |e,n> and |g,n+1>: sqrt(n+1) eta
    assert m[0, 4] == pytest.approx(p.eta)          # <e0|H|g1>
    assert m[1, 5] == pytest.approx(p.eta * np.sqrt(2))
    # drive Omega on the resonator ladder within each qubit sector
    assert m[0, 1] == pytest.approx(p.Omega)
    assert m[3, 4] == pytest.approx(p.Omega)
    # no direct qubit drive
    assert m[0, 3] == 0.0


def test_h_lab_oscillates_at_drive_frequency():
    p = default_params().with_(fock_dim=3)
    h0 = build_h_lab(p, 0.0).mat
    h1 = build_h_lab(p, 2 * math.pi / p.omega_d).mat  # one drive period
    assert np.allclose(h0, h1, atol=1e-9 * np.linalg.norm(h0))
    assert np.linalg.norm(h0 - h0.conj().T) < 1e-9
    # lab diagonal carries the full qubit splitting, not the detuning
    assert h0[0, 0].real == pytest.approx(p.omega_q / 2)


def test_h_bare_qubit():
    p = default_params()
    m = build_h_bare_qubit(p).mat
    dq = p.omega_q - p.omega_d
    assert m[0, 0] == pytest.approx(dq / 2)
    assert m[0, 1] == pytest.approx(p.Omega)


def test_collapse_set_full_rates():
    p = default_params().with_(fock_dim=4)
    cs = collapse_set_full(p)
    assert len(cs) == 3
    nbar = bose_occupation(p.omega_r, p.t_bath)
    rates = [r for _, r in cs]
    assert rates[0] == pytest.approx(p.gamma_r * (nbar + 1), rel=1e-12)
    assert rates[1] == pytest.approx(p.gamma_r * nbar, rel=1e-12)
    assert rates[2] == pytest.approx(1.0 / p.t1, rel=1e-12)
    assert len(collapse_set_full(p.with_(qubit_excitation=True))) == 4
    assert len(collapse_set_full(p.with_(dephasing=mhz(0.1)))) == 4


def test_collapse_set_bare():
    p = default_params()
    cs = collapse_set_bare(p)
    assert len(cs) == 1
    assert cs[0][1] == pytest.approx(1.0 / p.t1)
    assert cs[0][0].dims == (2,)


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=1.0, max_value=1e5),
       st.floats(min_value=1e-3, max_value=10.0))
def test_bose_occupation_positive_and_monotone_in_t(w, t):
    n1 = bose_occupation(w, t)
    n2 = bose_occupation(w, 2 * t)
    assert n1 >= 0.0
    assert n2 >= n1
