import json
import os

import numpy as np
import pytest

from jcbath.config import ConfigError, parse_config
from jcbath.fitting import trace_model
from jcbath.scenarios import run_scenario
from jcbath.system import mhz

FAST_FULL = "fock_dim = 5\nsamples = 41\nt_max = 30 us\n"


def _read_csv(path):
    lines = path.read_text().splitlines()
    return lines[0], [ln.split(",") for ln in lines[1:]]


def test_rabi_artifacts(tmp_path):
    c = parse_config("samples = 201", scenario="rabi")
    s = run_scenario(c, str(tmp_path))
    assert set(s) == {"config_echo", "results", "diagnostics", "version"}
    header, rows = _read_csv(tmp_path / "rabi.csv")
    assert header == "t_us,p_e,engine"
    assert len(rows) == 201
    assert rows[0][2] == "full"
    assert (tmp_path / "rabi.svg").exists()
    assert (tmp_path / "rabi.json").exists()
    pe = [float(r[1]) for r in rows]
    assert all(-1e-9 <= x <= 1.0 + 1e-9 for x in pe)


def test_outputs_filter(tmp_path):
    from dataclasses import replace
    c = replace(parse_config("samples = 41", scenario="rabi"),
                outputs=("json",))
    s = run_scenario(c, str(tmp_path))
    assert s["diagnostics"]["files"] == ["rabi.json"]
    assert not (tmp_path / "rabi.csv").exists()


def test_thermalize_summary(tmp_path):
    # long window so the settled band is reached even at a small truncation
    c = parse_config(FAST_FULL, scenario="thermalize")
    s = run_scenario(c, str(tmp_path))
    res = s["results"]
    assert 0.0 < res["p_e_steady"] < 0.5
    assert res["t_eff_mk"] > 0
    assert res["stages"]["t_boundary_us"] > 0
    d = s["diagnostics"]["full"]
    assert d["trace_err_max"] < 1e-7
    assert d["min_eig_min"] > -1e-7
    assert "steady_state" in d


def test_thermalize_engine_both(tmp_path):
    c = parse_config(FAST_FULL + "engine = both", scenario="thermalize")
    s = run_scenario(c, str(tmp_path))
    assert set(s["results"]["p_e"]) == {"full", "channel"}
    header, rows = _read_csv(tmp_path / "thermalize.csv")
    engines = {r[2] for r in rows}
    assert engines == {"full", "channel"}


def test_power_series_files_and_block(tmp_path):
    c = parse_config("fock_dim = 5\nsamples = 41", scenario="power_series")
    s = run_scenario(c, str(tmp_path))
    for tag in ("1.5", "2", "3.5", "5"):
        assert (tmp_path / f"power_series_{tag}MHz.csv").exists()
    runs = s["results"]["runs"]
    assert [r["Omega_mhz"] for r in runs] == [1.5, 2.0, 3.5, 5.0]
    for r in runs:
        assert 0.0 < r["p_e_steady_full"] < 0.5
        assert r["t_eff_mk"] > 0
        assert "t_boundary_us" in r["stages"]
    # log grid starts at the prepared state and is strictly increasing
    t = np.asarray(s["results"]["t_us"])
    assert t[0] == 0.0 and np.all(np.diff(t) > 0)


def test_sweep_grid_complete_and_ordered(tmp_path):
    text = ("fock_dim = 5\nsweep {\n"
            " omega_d = 5.444 GHz .. 5.452 GHz : 5\n"
            " Omega = 2 MHz .. 4 MHz : 2\n}\n")
    c = parse_config(text, scenario="sweep")
    s = run_scenario(c, str(tmp_path))
    header, rows = _read_csv(tmp_path / "sweep.csv")
    assert header == "omega_d_ghz,omega_mhz,p_e_ss,t_eff_mk"
    assert len(rows) == 10  # 5 x 2, no gaps
    keys = [(float(r[0]), float(r[1])) for r in rows]
    assert keys == sorted(keys)  # lexicographic
    for r in rows:
        pe = float(r[2])
        assert 0.0 <= pe <= 1.0
        assert r[3] == "inf" or float(r[3]) >= 0.0
    assert s["diagnostics"]["grid_points"] == 10
    assert len(s["results"]["local_maxima"]) == 2


def test_sweep_channel_engine(tmp_path):
    text = ("engine = channel\nsweep {\n"
            " omega_d = 5.444 GHz .. 5.452 GHz : 3\n Omega = 2 MHz\n}\n")
    c = parse_config(text, scenario="sweep")
    s = run_scenario(c, str(tmp_path))
    assert s["diagnostics"]["engine"] == "channel"
    assert len(s["results"]["rows"]) == 3


def test_channel_compare_reports_gap(tmp_path):
    c = parse_config("fock_dim = 5\nsamples = 31\nt_max = 2 us",
                     scenario="channel_compare")
    s = run_scenario(c, str(tmp_path))
    res = s["results"]
    assert res["max_abs_diff"] >= 0.0
    assert set(res["p_e"]) == {"full", "channel"}
    assert set(res["p_e_steady"]) == {"full", "channel"}
    header, rows = _read_csv(tmp_path / "channel_compare.csv")
    assert {r[2] for r in rows} == {"full", "channel"}


def test_fit_scenario_synthetic(tmp_path):
    p_true = parse_config("", scenario="fit").params.with_(eta=mhz(2.5))
    t = np.linspace(0.0, 0.5, 101)
    pe = trace_model(p_true, t, "channel")
    data_path = tmp_path / "trace.csv"
    with open(data_path, "w") as f:
        f.write("t_us,p_e\n")
        for ti, pi in zip(t, pe):
            f.write(f"{float(ti)!r},{float(pi)!r}\n")
    c = parse_config(f"fit_data = {data_path}\nfit_free = eta",
                     scenario="fit")
    s = run_scenario(c, str(tmp_path))
    res = s["results"]
    assert res["fitted"]["eta"]["value"] == pytest.approx(2.5, rel=0.02)
    assert res["converged"]
    assert (tmp_path / "fit.csv").exists()
    assert (tmp_path / "fit.svg").exists()


def test_fit_scenario_requires_data(tmp_path):
    c = parse_config("", scenario="fit")
    with pytest.raises(ConfigError, match="fit_data"):
        run_scenario(c, str(tmp_path))


def test_fit_scenario_rejects_garbage_csv(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("t_us,p_e\n0.0,zero\n")
    c = parse_config(f"fit_data = {bad}", scenario="fit")
    with pytest.raises(ConfigError):
        run_scenario(c, str(tmp_path))


def test_json_summary_shape(tmp_path):
    c = parse_config("samples = 41", scenario="rabi")
    run_scenario(c, str(tmp_path))
    loaded = json.loads((tmp_path / "rabi.json").read_text())
    assert list(loaded.keys()) == ["config_echo", "results", "diagnostics",
                                   "version"]
    assert loaded["version"] == "0.1.0"
    assert loaded["config_echo"]["scenario"] == "rabi"
