import numpy as np
import pytest
from scipy.integrate import solve_ivp

from jcbath.channels import (EPSILON_FLOOR, ChannelBasis, channel_p_e_series,
                             channel_rates, channel_states, evolve_channel,
                             ground_channel_state, qubit_population_channel,
                             rate_matrix, steady_populations,
                             steady_state_channel)
from jcbath.lindblad import build_liouvillian, unvectorize, vectorize
from jcbath.operators import Operator
from jcbath.system import (BathSpectrum, bath_from_params, default_params,
                           ghz, mhz)

# decoupled limit at the base operating point: the three levels sit at
# -delta_q/2 + delta_r, +delta_q/2, -delta_q/2 (ascending), i.e.
# 2pi * {-4, -1, +1} MHz for (5.448, 5.445, 5.450) GHz
DECOUPLED = (-25.132741228718345, -6.283185307179586, 6.283185307179586)


def _weak_params():
    return default_params().with_(eta=mhz(1e-5), Omega=mhz(1e-5))


def test_channel_states_decoupled_energies():
    b = channel_states(_weak_params())
    assert np.allclose(b.energies, DECOUPLED, atol=1e-4)
    assert b.reference_shift == 0.0
    # detunings are energies minus delta_q = 2pi*(-2) MHz
    dq = -mhz(2.0)
    assert np.allclose(b.detunings, np.array(DECOUPLED) - dq, atol=1e-4)


def test_channel_states_ordering_and_unitarity():
    b = channel_states(default_params())
    assert np.all(np.diff(b.energies) > 0)
    v = b.states
    assert np.allclose(v.conj().T @ v, np.eye(3), atol=1e-12)


def test_channel_states_flags_zero_energy():
    # drive on the qubit: the truncated generator is singular, one
    # channel energy collapses to zero and gets floored
    p = default_params().with_(omega_d=ghz(5.448))
    b = channel_states(p)
    assert any(f.startswith("epsilon") for f in b.flags)
    assert np.all(np.abs(b.energies) >= EPSILON_FLOOR * (1 - 1e-12))


def test_channel_states_follow_full_model_subspace():
    # eigenvalues extracted from the composite operator equal those of the
    # 3x3 block built by hand from the detunings and couplings
    p = default_params()
    dq = p.omega_q - p.omega_d
    dr = p.omega_r - p.omega_d
    ht = np.array([[-dq / 2, 0, p.Omega],
                   [0, dq / 2, p.eta],
                   [p.Omega, p.eta, -dq / 2 + dr]])
    b = channel_states(p)
    assert np.allclose(np.sort(np.linalg.eigvalsh(ht)), b.energies, atol=1e-9)


def test_channel_rates_shape_and_sign():
    p = default_params()
    g = channel_rates(channel_states(p), bath_from_params(p), p)
    assert g.shape == (3, 3)
    assert np.all(g >= 0.0)
    assert np.all(np.diag(g) == 0.0)
    assert np.all(np.isfinite(g))


def test_rate_matrix_columns_sum_to_zero():
    rng = np.random.default_rng(3)
    g = rng.uniform(0.1, 2.0, size=(3, 3))
    np.fill_diagonal(g, 0.0)
    m = rate_matrix(g)
    assert np.allclose(m.sum(axis=0), 0.0, atol=1e-14)
    assert m[1, 0] == g[0, 1]  # gain into 1 from 0


def test_steady_populations_normalized():
    p = default_params()
    g = channel_rates(channel_states(p), bath_from_params(p), p)
    pops = steady_populations(g)
    assert pops.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(pops > -1e-12)


def test_evolve_channel_preserves_trace_and_hermiticity():
    rng = np.random.default_rng(11)
    p = default_params()
    b = channel_states(p)
    g = channel_rates(b, bath_from_params(p), p)
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    rho0 = a @ a.conj().T
    rho0 /= np.trace(rho0)
    evo = evolve_channel(b, g, rho0, np.linspace(0.0, 5.0, 21))
    assert np.allclose(evo.states[0], rho0, atol=1e-14)
    for r in evo.states:
        assert abs(np.trace(r) - 1.0) < 1e-10
        assert np.linalg.norm(r - r.conj().T) < 1e-10
    assert evo.method in ("spectral", "expm")


def test_evolve_channel_matches_rk_route():
    # closed form vs direct integration of the same 3-level generator
    rng = np.random.default_rng(5)
    p = default_params()
    b = channel_states(p)
    g = channel_rates(b, bath_from_params(p), p)
    collapse = []
    for k in range(3):
        for n in range(3):
            if k == n:
                continue
            e = np.zeros((3, 3), dtype=complex)
            e[n, k] = 1.0
            collapse.append((Operator(e, (3,)), g[k, n]))
    h = Operator(np.diag(b.energies).astype(complex), (3,))
    lv = build_liouvillian(h, collapse)
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    rho0 = a @ a.conj().T
    rho0 /= np.trace(rho0)
    t = np.linspace(0.0, 2.0, 9)
    evo = evolve_channel(b, g, rho0, t)
    sol = solve_ivp(lambda _t, v: lv @ v, (0.0, t[-1]), vectorize(rho0),
                    t_eval=t, rtol=1e-11, atol=1e-12)
    for i in range(len(t)):
        assert np.allclose(evo.states[i], unvectorize(sol.y[:, i]), atol=1e-8)


def test_steady_state_channel_formula():
    p = default_params()
    b = channel_states(p)
    # independent recomputation of the three-term average
    acc = 0.0
    for k in range(3):
        e, d = b.energies[k], b.detunings[k]
        acc += p.Omega ** 2 / (p.Omega ** 2 + e ** 2 * (1 + p.eta ** 2 / d ** 2))
    assert steady_state_channel(p) == pytest.approx(acc / 3.0, rel=1e-12)
    assert 0.0 < steady_state_channel(p) < 1.0


def test_steady_state_channel_monotone_in_drive():
    p = default_params()
    vals = [steady_state_channel(p.with_(Omega=mhz(om)))
            for om in (1.5, 2.0, 3.5, 5.0)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_qubit_population_mapping():
    p = default_params()
    b = channel_states(p)
    rho0 = ground_channel_state(b)
    assert abs(np.trace(rho0) - 1.0) < 1e-12
    assert qubit_population_channel(rho0, b) == pytest.approx(0.0, abs=1e-12)
    # maximally mixed channel state carries exactly 1/3 excitation
    assert qubit_population_channel(np.eye(3) / 3.0, b) == pytest.approx(
        1.0 / 3.0, abs=1e-12)


def test_channel_p_e_series_diagnostics():
    p = default_params()
    pe, d = channel_p_e_series(p, np.linspace(0.0, 5.0, 41))
    assert pe[0] == pytest.approx(0.0, abs=1e-12)
    assert np.all(pe > -1e-9) and np.all(pe < 1.0)
    for key in ("eq_steady_p_e", "rate_matrix_steady_p_e", "steady_gap",
                "near_singular_flags", "population_method",
                "trace_err_max", "herm_err_max", "min_eig_min"):
        assert key in d
    assert d["trace_err_max"] < 1e-10
    assert d["herm_err_max"] < 1e-10
