"""Facility needs derived from ward populations.

The toilet calculator counts one "toilet" per started block of 100
persons, with male units = 4 x need and female units = 8 x need, both
applied to the whole ward population. That is the default; ``male_share``
switches to a gender split.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

from ._fmt import fmt_num
from .errors import NegativePopulation, NonFinite

NEEDS_HEADER = ["ward_name", "no_of_persons", "toilets_need", "male_units", "female_units"]


@dataclass(frozen=True)
class FacilityStandard:
    name: str = "BS 6465-1:2006+A1:2009"
    male_fixtures_per_100: dict = field(
        default_factory=lambda: {"wc": 4, "urinal": 4, "washbasin": 4}
    )
    female_fixtures_per_100: dict = field(default_factory=lambda: {"wc": 8, "washbasin": 8})
    persons_per_unit: int = 100

    def __post_init__(self):
        counts = list(self.male_fixtures_per_100.values()) + list(
            self.female_fixtures_per_100.values()
        )
        counts.append(self.persons_per_unit)
        if any(not isinstance(c, int) or c <= 0 for c in counts):
            raise ValueError("fixture counts and persons_per_unit must be positive integers")

    @property
    def male_multiplier(self):
        return self.male_fixtures_per_100["wc"]

    @property
    def female_multiplier(self):
        return self.female_fixtures_per_100["wc"]


DEFAULT_STANDARD = FacilityStandard()

STANDARDS = {"bs6465": DEFAULT_STANDARD}


@dataclass(frozen=True)
class NeedsRow:
    ward_name: str
    no_of_persons: float
    toilets_need: int
    male_units: int
    female_units: int


def _check_pop(pop):
    pop = float(pop)
    if not math.isfinite(pop):
        raise NonFinite(f"population must be finite, got {pop}")
    if pop < 0:
        raise NegativePopulation(f"population must be >= 0, got {pop}")
    return pop


def _blocks(pop, per):
    return math.ceil(pop / per) if pop > 0 else 0


def toilets_need(pop, std: FacilityStandard = DEFAULT_STANDARD, male_share=None):
    """(toilets_need, male_units, female_units) for a population.

    With ``male_share=None`` both standards apply to the full population.
    Otherwise each standard applies to its share and ``toilets_need`` is the
    sum of the male and female blocks.
    """
    pop = _check_pop(pop)
    per = std.persons_per_unit
    if male_share is None:
        need = _blocks(pop, per)
        return need, std.male_multiplier * need, std.female_multiplier * need
    if not 0.0 <= male_share <= 1.0:
        raise ValueError(f"male_share must be in [0, 1], got {male_share}")
    male = _blocks(pop * male_share, per)
    female = _blocks(pop * (1.0 - male_share), per)
    return male + female, std.male_multiplier * male, std.female_multiplier * female


def per_capita_need(pop, units_per_100) -> int:
    pop = _check_pop(pop)
    if not units_per_100 > 0:
        raise ValueError(f"units_per_100 must be positive, got {units_per_100}")
    if pop == 0:
        return 0
    return math.ceil(pop * units_per_100 / 100)


def needs_rows(populations, std: FacilityStandard = DEFAULT_STANDARD, male_share=None):
    """NeedsRow per (ward_name, persons) pair, input order preserved."""
    rows = []
    for name, pop in populations:
        need, male, female = toilets_need(pop, std, male_share)
        rows.append(NeedsRow(name, float(pop), need, male, female))
    return rows


def needs_table(results, std: FacilityStandard = DEFAULT_STANDARD, male_share=None):
    """Needs rows and their CSV text from zonal results.

    ``results`` items are ``(zone_or_attrs, ZoneStats)`` pairs as produced by
    :func:`wardpop.zonal.zonal_stats` or :func:`wardpop.zonal.read_zonal_csv`.
    """
    pops = []
    for zone, st in results:
        attrs = getattr(zone, "attrs", zone)
        pops.append((attrs.ward_name, st.sum))
    rows = needs_rows(pops, std, male_share)
    return rows, needs_csv(rows)


def needs_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(NEEDS_HEADER)
    for r in rows:
        w.writerow(
            [r.ward_name, fmt_num(r.no_of_persons), r.toilets_need, r.male_units, r.female_units]
        )
    return buf.getvalue()


def read_needs_csv(source):
    if isinstance(source, str):
        source = io.StringIO(source)
    reader = csv.DictReader(source)
    return [
        NeedsRow(
            row["ward_name"],
            float(row["no_of_persons"]),
            int(row["toilets_need"]),
            int(row["male_units"]),
            int(row["female_units"]),
        )
        for row in reader
    ]


def rank_by_need(rows):
    """Rows sorted by toilets_need then population, largest first."""
    return sorted(rows, key=lambda r: (r.toilets_need, r.no_of_persons), reverse=True)


def needs_manifest(std: FacilityStandard = DEFAULT_STANDARD, male_share=None) -> str:
    male = ", ".join(f"{v} {k}" for k, v in std.male_fixtures_per_100.items())
    female = ", ".join(f"{v} {k}" for k, v in std.female_fixtures_per_100.items())
    lines = [
        f"standard: {std.name}",
        f"persons_per_unit: {std.persons_per_unit}",
        f"male fixtures per {std.persons_per_unit} users: {male}",
        f"female fixtures per {std.persons_per_unit} users: {female}",
    ]
    if male_share is None:
        lines += [
            "population split: none (both standards applied to the total ward population)",
            "toilets_need = ceil(no_of_persons / persons_per_unit)",
            f"male_units = {std.male_multiplier} x toilets_need; "
            f"female_units = {std.female_multiplier} x toilets_need",
            "caveat: male_units counts only the WC figure of the male standard; the full "
            f"male standard lists {sum(std.male_fixtures_per_100.values())} fixtures per "
            f"{std.persons_per_unit} users (WCs + urinals + washbasins).",
        ]
    else:
        lines += [
            f"population split: male_share={fmt_num(male_share)}, "
            f"female_share={fmt_num(1.0 - male_share)}",
            "toilets_need = male blocks + female blocks",
        ]
    return "\n".join(lines) + "\n"
