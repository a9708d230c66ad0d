"""Report emission: per-covariate coefficient-curve CSVs and static SVG
figures overlaying the estimators with their shaded bootstrap bands.

SVG output is deterministic byte-for-byte for identical inputs: figure ids are
salted with a fixed string and the date metadata is suppressed.
"""

from __future__ import annotations

import csv
import os

import numpy as np

from .bands import band_filename, read_band_csv
from .errors import FormatError
from .estimator import FitResult, parse_tag

SVG_HASHSALT = "cropfda"

_TAU_COLORS = {0.1: "#d62728", 0.9: "#2ca02c"}
_FALLBACK_COLORS = ("#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")


def _style(tag: str, fallback_idx: int):
    kind, tau = parse_tag(tag)
    if kind == "ols":
        return {"color": "#1f77b4", "linestyle": "-", "linewidth": 1.8}
    color = _TAU_COLORS.get(tau, _FALLBACK_COLORS[fallback_idx % len(_FALLBACK_COLORS)])
    return {"color": color, "linestyle": "-" if kind == "qr" else "--", "linewidth": 1.2}


def collect_bands(fit: FitResult, bands_dir) -> tuple[dict, list]:
    """Band columns per (covariate, tag) found in the directory.

    Returns ``({covariate: {tag: columns}}, missing_files)``.
    """
    found: dict = {}
    missing = []
    for name in fit.covariates:
        for tag in fit.fits:
            path = os.path.join(bands_dir, band_filename(name, tag))
            if not os.path.exists(path):
                missing.append(path)
                continue
            found.setdefault(name, {})[tag] = read_band_csv(path)
    return found, missing


def write_coefficient_csv(name: str, series: dict, path) -> None:
    """One CSV per covariate: t, then (point, lower, upper) per estimator."""
    tags = list(series)
    grid = series[tags[0]]["t"]
    for tag in tags[1:]:
        if not np.array_equal(series[tag]["t"], grid):
            raise FormatError(f"band grids for {name!r} disagree between estimators")
    header = ["t"]
    for tag in tags:
        header += [f"{tag}_point", f"{tag}_lower", f"{tag}_upper"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i, t in enumerate(grid):
            row = [f"{t:.17g}"]
            for tag in tags:
                cols = series[tag]
                row += [f"{cols['point'][i]:.17g}", f"{cols['lower'][i]:.17g}", f"{cols['upper'][i]:.17g}"]
            writer.writerow(row)


def write_coefficient_svg(name: str, series: dict, path, level: float | None = None) -> None:
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    with plt.rc_context({"svg.hashsalt": SVG_HASHSALT}):
        fig, ax = plt.subplots(figsize=(7.0, 4.2))
        for idx, (tag, cols) in enumerate(series.items()):
            style = _style(tag, idx)
            ax.fill_between(cols["t"], cols["lower"], cols["upper"],
                            color=style["color"], alpha=0.15, linewidth=0)
            ax.plot(cols["t"], cols["point"], label=tag, **style)
        ax.axhline(0.0, color="0.6", linewidth=0.6)
        ax.set_xlabel("day of season")
        ax.set_ylabel("coefficient")
        title = name if level is None else f"{name} ({level:.0%} bands)"
        ax.set_title(title)
        ax.legend(loc="best", fontsize=8)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


def write_report(fit: FitResult, bands_dir, out_dir, level: float | None = None):
    """Emit coefficient CSV + SVG per covariate; returns (written, missing)."""
    os.makedirs(out_dir, exist_ok=True)
    found, missing = collect_bands(fit, bands_dir)
    written = []
    for name, series in found.items():
        csv_path = os.path.join(out_dir, f"coef_{name}.csv")
        svg_path = os.path.join(out_dir, f"coef_{name}.svg")
        write_coefficient_csv(name, series, csv_path)
        write_coefficient_svg(name, series, svg_path, level=level)
        written += [csv_path, svg_path]
    return written, missing
