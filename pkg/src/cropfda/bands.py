"""Province-cluster bootstrap bands for the functional coefficients.

Each replica resamples whole provinces with replacement (a province's full
year series travels as one block and receives its own fixed effect), re-runs
centering, fPCA and the chosen estimator on the resampled panel, and
reconstructs the coefficient curves on a fixed grid.  Bands are pointwise
empirical quantiles across replicas.  The generator is counter-based
(Philox) with the seed recorded in the result, so runs replay exactly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import BootstrapError, ConfigError, CropFdaError, FormatError
from .estimator import ModelSpec, YieldPanel, fit_from_smoothed

GRID_POINTS = 201


@dataclass
class BandResult:
    covariate: str
    estimator: str
    grid: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    point: np.ndarray
    n_replicas: int
    level: float
    seed: int


def _gamma_curves(spec: ModelSpec, panel: YieldPanel, smoothed: dict, tag: str, grid: np.ndarray) -> dict:
    fit = fit_from_smoothed(spec, panel, smoothed, tags=[tag])
    return {name: fit.reconstruct_gamma(name, tag, grid) for name in fit.covariates}


def _resample(panel: YieldPanel, smoothed: dict, draw: np.ndarray):
    """Replica panels made of the drawn province blocks.

    Drawn blocks are relabelled by position so duplicated provinces get
    distinct fixed effects.
    """
    labels = [f"{panel.provinces[j]}#{k}" for k, j in enumerate(draw)]
    ypanel = panel.take_provinces(draw)
    ypanel.provinces = labels
    spanels = {}
    for name, fp in smoothed.items():
        rp = fp.take_provinces(draw)
        rp.provinces = labels
        spanels[name] = rp
    return ypanel, spanels


def bootstrap_bands(
    spec: ModelSpec,
    panel: YieldPanel,
    smoothed: dict,
    estimator: str,
    n_replicas: int,
    level: float,
    seed: int,
    grid_points: int = GRID_POINTS,
    max_failure_fraction: float = 0.1,
) -> dict:
    """Pointwise bootstrap bands per covariate for one estimator.

    Returns ``{covariate_name: BandResult}``.  Replicas whose fit fails are
    skipped; the call errors once more than ``max_failure_fraction`` of them
    failed.
    """
    if n_replicas < 2:
        raise ConfigError(f"need at least 2 bootstrap replicas, got {n_replicas}")
    if not (0.0 < level < 1.0):
        raise ConfigError(f"band level must lie in (0, 1), got {level}")

    grid = np.linspace(spec.season.t_start, spec.season.t_end, grid_points)
    point = _gamma_curves(spec, panel, smoothed, estimator, grid)

    m = len(panel.provinces)
    rng = np.random.Generator(np.random.Philox(seed))
    draws = rng.integers(0, m, size=(n_replicas, m))

    curves = {name: [] for name in point}
    failures = []
    for r in range(n_replicas):
        ypanel, spanels = _resample(panel, smoothed, draws[r])
        try:
            replica = _gamma_curves(spec, ypanel, spanels, estimator, grid)
        except CropFdaError as exc:
            failures.append((r, str(exc)))
            continue
        for name, values in replica.items():
            curves[name].append(values)

    if len(failures) > max_failure_fraction * n_replicas:
        detail = "; ".join(f"replica {r}: {msg}" for r, msg in failures[:5])
        raise BootstrapError(
            f"{len(failures)} of {n_replicas} bootstrap replicas failed ({detail})"
        )

    lo_q, hi_q = (1.0 - level) / 2.0, (1.0 + level) / 2.0
    results = {}
    for name, stack in curves.items():
        arr = np.vstack(stack)
        results[name] = BandResult(
            covariate=name,
            estimator=estimator,
            grid=grid,
            lower=np.quantile(arr, lo_q, axis=0),
            upper=np.quantile(arr, hi_q, axis=0),
            point=point[name],
            n_replicas=n_replicas,
            level=level,
            seed=seed,
        )
    return results


# -- band CSV interface --------------------------------------------------------

BAND_HEADER = ["t", "point", "lower", "upper"]


def band_filename(covariate: str, estimator: str) -> str:
    return f"bands_{covariate}_{estimator}.csv"


def write_band_csv(band: BandResult, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(BAND_HEADER)
        for t, p, lo, hi in zip(band.grid, band.point, band.lower, band.upper):
            writer.writerow([f"{t:.17g}", f"{p:.17g}", f"{lo:.17g}", f"{hi:.17g}"])


def read_band_csv(path) -> dict:
    """Columns of a band CSV as float arrays keyed by header name."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != BAND_HEADER:
            raise FormatError(f"{path}: expected header {BAND_HEADER}, got {header}")
        rows = [[float(v) for v in row] for row in reader]
    arr = np.asarray(rows, dtype=float).reshape(-1, len(BAND_HEADER))
    return {name: arr[:, j] for j, name in enumerate(BAND_HEADER)}
