"""Per-zone count / sum / mean of a population grid."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from ._fmt import fmt_num
from .errors import CrsMismatch, EmptyInput, IoFailure, SchemaError
from .raster import Grid
from .zones import ATTR_FIELDS, Zone, ZoneAttrs, ZoneSet

MODES = ("weighted", "center")
CSV_HEADER = list(ATTR_FIELDS) + ["_count", "_sum", "_mean"]


@dataclass(frozen=True)
class ZoneStats:
    count: float
    sum: float

    @property
    def mean(self):
        """``sum / count``; ``None`` for a zone that covers no valid cells."""
        if self.count > 0:
            return self.sum / self.count
        return None


def _zone_window(g: Grid, packed, use_bbox):
    if use_bbox:
        return kernels.window(packed, g.xll, g.yll, g.nrows, g.ncols, g.cellsize)
    return 0, g.nrows, 0, g.ncols


def zone_weights(g: Grid, zone: Zone, mode="weighted", use_bbox=True):
    """Full-grid weight array for one zone (coverage fractions or 0/1)."""
    packed = kernels.PackedRings.from_polygons(zone.parts)
    r0, r1, c0, c1 = _zone_window(g, packed, use_bbox)
    out = np.zeros((g.nrows, g.ncols))
    if mode == "weighted":
        out[r0:r1, c0:c1] = kernels.coverage_window(
            packed, g.xll, g.yll, g.nrows, g.cellsize, r0, r1, c0, c1
        )
    elif mode == "center":
        out[r0:r1, c0:c1] = kernels.centers_window(
            packed, g.xll, g.yll, g.nrows, g.cellsize, r0, r1, c0, c1
        )
    else:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    return out


def coverage_fractions(g: Grid, zone: Zone):
    return zone_weights(g, zone, "weighted")


def _stats_for_zone(g, zone, mode, use_bbox):
    packed = kernels.PackedRings.from_polygons(zone.parts)
    r0, r1, c0, c1 = _zone_window(g, packed, use_bbox)
    if r1 <= r0 or c1 <= c0:
        return ZoneStats(0.0, 0.0)
    if mode == "weighted":
        w = kernels.coverage_window(packed, g.xll, g.yll, g.nrows, g.cellsize, r0, r1, c0, c1)
    else:
        w = kernels.centers_window(
            packed, g.xll, g.yll, g.nrows, g.cellsize, r0, r1, c0, c1
        ).astype(np.float64)
    vals = g.values[r0:r1, c0:c1]
    count, total = kernels.kahan_weighted(w, vals, vals != g.nodata)
    return ZoneStats(float(count), float(total))


def zonal_stats(g: Grid, zs, mode="weighted", use_bbox=True):
    """[(zone, ZoneStats)] in input order.

    Weighted mode weights every valid cell by its covered fraction; center
    mode counts valid cells whose centre lies in the zone. Nodata cells are
    ignored in both. ``use_bbox=False`` scans the whole grid per zone; the
    result is bit-identical, only slower.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if isinstance(zs, ZoneSet):
        if zs.crs_tag != g.crs_tag:
            raise CrsMismatch(f"zones CRS {zs.crs_tag!r} != grid CRS {g.crs_tag!r}")
        zones = zs.zones
    else:
        zones = tuple(zs)
    return [(z, _stats_for_zone(g, z, mode, use_bbox)) for z in zones]


def aggregate_total(results) -> float:
    total = 0.0
    comp = 0.0
    for _, st in results:
        y = st.sum - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def zonal_csv(results) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for zone, st in results:
        mean = st.mean
        attrs = getattr(zone, "attrs", zone)
        w.writerow(
            attrs.as_row()
            + [fmt_num(st.count), fmt_num(st.sum), "" if mean is None else fmt_num(mean)]
        )
    return buf.getvalue()


def export_zonal_csv(results, destination=None) -> str:
    """Serialise results; also write them to ``destination`` when given."""
    results = list(results)
    if not results:
        raise EmptyInput("no zonal results to export")
    text = zonal_csv(results)
    if destination is not None:
        try:
            Path(destination).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise IoFailure(f"cannot write {destination}: {exc.strerror or exc}") from None
    return text


def read_zonal_csv(source, required=CSV_HEADER):
    """Parse a zonal CSV back into ``[(ZoneAttrs, ZoneStats)]``.

    Only the columns in ``required`` must be present, which lets the needs
    calculator accept trimmed exports carrying just ``ward_name`` and ``_sum``.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    reader = csv.DictReader(source)
    fields = reader.fieldnames or []
    missing = [c for c in required if c not in fields]
    if missing:
        raise SchemaError(f"zonal CSV missing columns: {', '.join(missing)}")
    out = []
    for i, row in enumerate(reader, start=2):
        try:
            total = float(row["_sum"])
            count = float(row["_count"]) if row.get("_count") not in (None, "") else math.nan
        except (TypeError, ValueError):
            raise SchemaError(f"line {i}: non-numeric _count/_sum") from None
        try:
            attrs = ZoneAttrs(*(row.get(f) or "" for f in ATTR_FIELDS))
        except ValueError:
            raise SchemaError(f"line {i}: empty ward_name") from None
        out.append((attrs, ZoneStats(count, total)))
    return out
