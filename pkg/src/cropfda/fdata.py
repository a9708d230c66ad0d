"""Functional panels: smoothing raw weather series onto a basis, panel mean,
centering, and the backward-window precipitation transform.

Panels are balanced over (province, year) cells; rows are stored
province-major, year-minor everywhere in the package.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .basis import BasisSystem, SeasonDomain
from .errors import AlignmentError, ConfigError, SingularityError, StateError

HOURS_PER_DAY = 24
FULL_WINDOW = "full"


@dataclass
class RawSeriesPanel:
    """Sampled weather series for every (province, year) cell.

    ``values`` has one row per cell (province-major, year-minor) and one
    column per sample; sample r sits at time r * dt with dt = 1/24 day for
    hourly and 1 day for daily cadence.
    """

    covariate_name: str
    cadence: str
    values: np.ndarray
    provinces: list
    years: list
    domain: SeasonDomain

    def __post_init__(self):
        if self.cadence not in ("hourly", "daily"):
            raise ConfigError(f"cadence must be 'hourly' or 'daily', got {self.cadence!r}")
        self.values = np.asarray(self.values, dtype=float)
        expected = len(self.provinces) * len(self.years)
        if self.values.shape[0] != expected:
            raise AlignmentError(
                f"{self.values.shape[0]} series rows for {len(self.provinces)} provinces "
                f"x {len(self.years)} years"
            )
        last = (self.n_samples - 1) * self.dt
        if last > self.domain.t_end:
            raise ConfigError(
                f"last sample at day {last} beyond season end {self.domain.t_end}"
            )

    @property
    def n_samples(self) -> int:
        return self.values.shape[1]

    @property
    def dt(self) -> float:
        return 1.0 / HOURS_PER_DAY if self.cadence == "hourly" else 1.0

    def sample_times(self) -> np.ndarray:
        return np.arange(self.n_samples) * self.dt


@dataclass
class FunctionalPanel:
    """Smoothed curves stored as basis coefficients plus the panel mean."""

    basis: BasisSystem
    coefs: np.ndarray
    mean_coefs: np.ndarray
    centered: bool
    provinces: list
    years: list

    @property
    def n_cells(self) -> int:
        return self.coefs.shape[0]

    def take_provinces(self, indices) -> "FunctionalPanel":
        """New panel made of the selected province blocks (repeats allowed)."""
        n_years = len(self.years)
        blocks = [self.coefs[j * n_years:(j + 1) * n_years] for j in indices]
        return replace(
            self,
            coefs=np.vstack(blocks),
            provinces=[self.provinces[j] for j in indices],
        )


def smooth(raw: RawSeriesPanel, basis: BasisSystem) -> FunctionalPanel:
    """Least-squares projection of every raw series onto the basis (no penalty)."""
    if not basis.domain.same_interval(raw.domain):
        raise ConfigError(
            f"basis domain [{basis.domain.t_start}, {basis.domain.t_end}] does not match "
            f"panel domain [{raw.domain.t_start}, {raw.domain.t_end}]"
        )
    if basis.nbasis > raw.n_samples:
        raise SingularityError(
            f"basis size {basis.nbasis} exceeds {raw.n_samples} samples per curve"
        )
    design = basis.evaluate(raw.sample_times())
    coefs, _, rank, _ = np.linalg.lstsq(design, raw.values.T, rcond=None)
    if rank < basis.nbasis:
        raise SingularityError(
            f"smoothing design is rank deficient (rank {rank} < {basis.nbasis})"
        )
    coefs = coefs.T
    return FunctionalPanel(
        basis=basis,
        coefs=coefs,
        mean_coefs=coefs.mean(axis=0),
        centered=False,
        provinces=list(raw.provinces),
        years=list(raw.years),
    )


def center(panel: FunctionalPanel) -> FunctionalPanel:
    """Subtract the panel mean function from every curve."""
    if panel.centered:
        raise StateError("panel is already centered")
    return replace(panel, coefs=panel.coefs - panel.mean_coefs, centered=True)


def window_transform(raw: RawSeriesPanel, window_days) -> RawSeriesPanel:
    """Backward-window sum of a daily series.

    Sample t of the output is the sum of the raw samples from max(0, t - W)
    through t; ``window_days="full"`` gives the running cumulative sum.
    """
    if raw.cadence != "daily":
        raise ConfigError(
            f"window transform applies to daily series only, got {raw.cadence!r} "
            f"for {raw.covariate_name!r}"
        )
    cum = np.cumsum(raw.values, axis=1)
    if window_days == FULL_WINDOW:
        out = cum
        tag = "cum"
    else:
        w = int(window_days)
        if w < 0 or w != window_days:
            raise ConfigError(f"window_days must be a nonnegative integer or 'full', got {window_days!r}")
        if w == 0:
            out = raw.values.copy()
        else:
            out = cum.copy()
            if w + 1 < raw.n_samples:
                out[:, w + 1:] = cum[:, w + 1:] - cum[:, :-(w + 1)]
        tag = f"w{w}"
    return replace(
        raw,
        covariate_name=f"{raw.covariate_name}_{tag}",
        values=out,
        provinces=list(raw.provinces),
        years=list(raw.years),
    )
