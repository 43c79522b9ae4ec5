"""Command-line entry point.

One executable, one subcommand per scenario:

    jcbath thermalize --config run.cfg --out results --format csv,json,svg

Exit codes: 0 success, 1 configuration/parse error, 2 engine failure,
3 non-convergence (stage detection or calibration).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .config import ENGINES, FORMATS, SCENARIOS, ConfigError, parse_config
from .lindblad import EngineError
from .report import VERSION, fmt
from .scenarios import run_scenario
from .thermal import ConvergenceError


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="jcbath",
        description="Driven qubit-resonator-bath simulator and experiment "
                    "runner (v%s)" % VERSION)
    sub = ap.add_subparsers(dest="scenario", required=True, metavar="SCENARIO")
    for name in SCENARIOS:
        sp = sub.add_parser(name, help=f"run the {name} scenario")
        sp.add_argument("--config", metavar="PATH",
                        help="key-value configuration document")
        sp.add_argument("--out", metavar="DIR", default=".",
                        help="output directory (default: current)")
        sp.add_argument("--engine", choices=ENGINES,
                        help="override the configured engine")
        sp.add_argument("--format", metavar="LIST",
                        help="comma list from csv,json,svg (default: all)")
    return ap


def _parse_formats(text: str) -> tuple:
    names = [s.strip() for s in text.split(",") if s.strip()]
    bad = [n for n in names if n not in FORMATS]
    if bad:
        raise ConfigError(f"--format: unknown format(s) {bad}")
    if not names:
        raise ConfigError("--format: empty list")
    return tuple(f for f in FORMATS if f in names)  # canonical order


def _headline(scenario: str, summary: dict) -> list:
    res = summary["results"]
    if scenario == "rabi":
        return ["expected Rabi period: %s us" % fmt(res["expected_period_us"])]
    if scenario == "thermalize":
        return ["steady P_e: %s  (T_eff %s mK)"
                % (fmt(res["p_e_steady"]), fmt(res["t_eff_mk"])),
                "stage boundary: %s us" % fmt(res["stages"]["t_boundary_us"])]
    if scenario == "power_series":
        return ["Omega/2pi %s MHz: steady P_e %s, T_eff %s mK"
                % (fmt(r["Omega_mhz"]), fmt(r["p_e_steady_full"]),
                   fmt(r["t_eff_mk"])) for r in res["runs"]]
    if scenario == "sweep":
        lines = []
        for m in res["local_maxima"]:
            ghz_list = ", ".join(fmt(g) for g in m["maxima_ghz"]) or "none"
            lines.append("Omega/2pi %s MHz: local maxima at %s GHz"
                         % (fmt(m["omega_mhz"]), ghz_list))
        return lines
    if scenario == "channel_compare":
        return ["max |P_e(full) - P_e(channel)|: %s" % fmt(res["max_abs_diff"])]
    fitted = ", ".join("%s = %s %s" % (n, fmt(v["value"]), v["unit"])
                       for n, v in res["fitted"].items()) or "nothing free"
    return ["fitted: %s" % fitted,
            "residual RMS: %s after %d iterations (%s)"
            % (fmt(res["residual_rms"]), res["iterations"],
               "converged" if res["converged"] else "not converged")]


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        text = ""
        if args.config:
            try:
                with open(args.config, "r", encoding="utf-8") as f:
                    text = f.read()
            except OSError as e:
                raise ConfigError(f"--config: cannot read {args.config}: {e}")
        cfg = parse_config(text, scenario=args.scenario)
        if args.engine:
            cfg = replace(cfg, engine=args.engine)
        if args.format:
            cfg = replace(cfg, outputs=_parse_formats(args.format))
        summary = run_scenario(cfg, args.out)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    except EngineError as e:
        print(f"engine error: {e}", file=sys.stderr)
        return 2
    except ConvergenceError as e:
        print(f"convergence error: {e}", file=sys.stderr)
        return 3

    print(f"scenario: {args.scenario}")
    for line in _headline(args.scenario, summary):
        print(line)
    for name in summary["diagnostics"]["files"]:
        print(f"wrote: {args.out}/{name}" if args.out != "." else f"wrote: {name}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
