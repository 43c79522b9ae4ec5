"""Artifact emission: delimited text, JSON summaries, SVG charts.

Everything here is byte-deterministic: numbers go through one %.12g
formatter, JSON keeps insertion order, and the SVG renderer pins the
matplotlib hash salt and strips the creation date so identical runs
produce identical files.
"""

from __future__ import annotations

import json
import math

import matplotlib

matplotlib.use("Agg")

from matplotlib import rcParams
from matplotlib.figure import Figure

rcParams["svg.hashsalt"] = "jcbath"
rcParams["svg.fonttype"] = "path"  # glyphs as outlines: no font assets

VERSION = "0.1.0"

TIMESERIES_HEADER = "t_us,p_e,engine"
SWEEP_HEADER = "omega_d_ghz,omega_mhz,p_e_ss,t_eff_mk"


def fmt(x) -> str:
    """One canonical cell formatter: 12 significant digits, 'inf' literal."""
    if isinstance(x, str):
        return x
    xf = float(x)
    if math.isinf(xf):
        return "inf" if xf > 0 else "-inf"
    if math.isnan(xf):
        raise ValueError("refusing to emit NaN")
    return "%.12g" % xf


def write_csv(path, header: str, rows) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(header + "\n")
            for row in rows:
                f.write(",".join(fmt(cell) for cell in row) + "\n")
    except OSError as e:
        raise OSError(f"cannot write CSV {path}: {e}") from e


def _plain(obj):
    """Recursively convert to JSON-safe built-ins; inf becomes 'inf'."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, bool):
        return obj
    if hasattr(obj, "ndim") and getattr(obj, "ndim") > 0:  # numpy array
        return _plain(obj.tolist())
    if hasattr(obj, "item"):  # numpy scalar
        obj = obj.item()
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        if math.isnan(obj):
            raise ValueError("refusing to emit NaN")
        return obj
    if obj is None or isinstance(obj, (int, str)):
        return obj
    if hasattr(obj, "tolist"):  # numpy array
        return _plain(obj.tolist())
    raise TypeError(f"cannot serialize {type(obj).__name__} to JSON")


def write_json(path, summary: dict) -> None:
    """Insertion-ordered JSON; top level is {config_echo, results,
    diagnostics, version} as assembled by the scenario runners."""
    text = json.dumps(_plain(summary), indent=2, allow_nan=False)
    try:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text + "\n")
    except OSError as e:
        raise OSError(f"cannot write JSON {path}: {e}") from e


def render_svg(path, series, xlabel: str, ylabel: str, title: str = "",
               xscale: str = "linear") -> None:
    """Minimal standalone chart: one polyline per (label, x, y) series.

    matplotlib's SVG backend emits SVG 1.1 with everything inline, which
    covers the no-external-assets requirement as long as fonts render as
    paths (set globally above).
    """
    fig = Figure(figsize=(6.4, 4.2))
    ax = fig.add_subplot(111)
    for label, x, y in series:
        ax.plot(x, y, label=label, linewidth=1.4)
    ax.set_xscale(xscale)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if len(series) > 1:
        ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    try:
        fig.savefig(path, format="svg", metadata={"Date": None})
    except OSError as e:
        raise OSError(f"cannot write SVG {path}: {e}") from e
