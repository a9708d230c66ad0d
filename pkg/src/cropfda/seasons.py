"""Calendar arithmetic for growing seasons.

Seasons are anchored by month-day strings ("MM-DD") on a fixed non-leap
calendar; day 0 is the start of the season's first day and the season length
counts its days inclusively, so a window "to" a given day ends at the end of
that day.
"""

from __future__ import annotations

from .basis import SeasonDomain
from .errors import ConfigError

MONTH_LENGTHS = (31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31)
DAYS_PER_YEAR = sum(MONTH_LENGTHS)


def _day_of_year(month_day: str) -> int:
    try:
        month_s, day_s = month_day.split("-")
        month, day = int(month_s), int(day_s)
    except ValueError:
        raise ConfigError(f"expected 'MM-DD', got {month_day!r}") from None
    if not (1 <= month <= 12) or not (1 <= day <= MONTH_LENGTHS[month - 1]):
        raise ConfigError(f"invalid month-day {month_day!r}")
    return sum(MONTH_LENGTHS[: month - 1]) + (day - 1)


def day_of_season(month_day: str, season_start: str) -> float:
    """Offset in days from the season start to the start of the given day."""
    delta = _day_of_year(month_day) - _day_of_year(season_start)
    if delta < 0:
        delta += DAYS_PER_YEAR
    return float(delta)


def season_length(season_start: str, season_end: str) -> int:
    """Inclusive day count from season_start through season_end."""
    return int(day_of_season(season_end, season_start)) + 1


def season_domain(season_start: str, season_end: str, label: str = "") -> SeasonDomain:
    return SeasonDomain(float(season_length(season_start, season_end)), label)


def window_to_days(from_day: str, to_day: str, season_start: str, t_end: float):
    """Scenario window [t0, t1]: start of ``from_day`` to end of ``to_day``."""
    t0 = day_of_season(from_day, season_start)
    t1 = day_of_season(to_day, season_start) + 1.0
    if not (0.0 <= t0 < t1 <= t_end):
        raise ConfigError(
            f"window {from_day}..{to_day} maps to [{t0}, {t1}] outside the season [0, {t_end}]"
        )
    return t0, t1
