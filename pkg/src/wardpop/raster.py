"""Georeferenced population grids and ESRI ASCII grid I/O."""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import kernels
from ._fmt import fmt_num
from .errors import (
    CrsMismatch,
    IoFailure,
    MalformedHeader,
    NonNumericToken,
    OutOfBounds,
    ParseError,
    TokenCountMismatch,
)
from .geometry import Point, Polygon, Rect

UNSPECIFIED_CRS = "unspecified"
HEADER_KEYS = ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "nodata_value")


class CellIndex(NamedTuple):
    row: int
    col: int


@dataclass(frozen=True, eq=False)
class Grid:
    """Square-cell raster. ``values[0]`` is the northernmost row."""

    values: np.ndarray
    xll: float
    yll: float
    cellsize: float
    nodata: float
    crs_tag: str = UNSPECIFIED_CRS

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64, copy=True)
        if vals.ndim != 2 or vals.shape[0] < 1 or vals.shape[1] < 1:
            raise ValueError(f"grid values must be a non-empty 2-D array, got shape {vals.shape}")
        if not (math.isfinite(self.cellsize) and self.cellsize > 0):
            raise ValueError(f"cellsize must be positive, got {self.cellsize}")
        if not math.isfinite(self.nodata):
            raise ValueError("nodata sentinel must be finite")
        data = vals[vals != self.nodata]
        if not np.all(np.isfinite(data)):
            raise ValueError("grid contains non-finite values")
        if np.any(data < 0):
            raise ValueError("grid contains negative population values")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        for name in ("xll", "yll", "cellsize", "nodata"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def nrows(self) -> int:
        return self.values.shape[0]

    @property
    def ncols(self) -> int:
        return self.values.shape[1]

    @property
    def valid(self) -> np.ndarray:
        return self.values != self.nodata

    def bounds(self) -> Rect:
        return Rect(
            self.xll,
            self.yll,
            self.xll + self.ncols * self.cellsize,
            self.yll + self.nrows * self.cellsize,
        )

    def total(self) -> float:
        return math.fsum(self.values[self.valid].tolist())

    def with_values(self, values) -> "Grid":
        return Grid(values, self.xll, self.yll, self.cellsize, self.nodata, self.crs_tag)

    def __eq__(self, other):
        if not isinstance(other, Grid):
            return NotImplemented
        return (
            self.values.shape == other.values.shape
            and self.values.tobytes() == other.values.tobytes()
            and (self.xll, self.yll, self.cellsize, self.nodata, self.crs_tag)
            == (other.xll, other.yll, other.cellsize, other.nodata, other.crs_tag)
        )

    __hash__ = None


def _parse_float(tok, line):
    try:
        v = float(tok)
    except ValueError:
        raise NonNumericToken(f"non-numeric token {tok!r}", line) from None
    if not math.isfinite(v):
        raise NonNumericToken(f"non-finite token {tok!r}", line)
    return v


def read_ascii_grid(source, crs_tag=UNSPECIFIED_CRS) -> Grid:
    """Parse an ESRI ASCII grid from a text stream (or a string)."""
    if isinstance(source, str):
        source = io.StringIO(source)
    header = {}
    tokens = []
    token_lines = []
    lineno = 0
    in_data = False
    for raw in source:
        lineno += 1
        parts = raw.split()
        if not parts:
            continue
        key = parts[0].lower()
        if not in_data and key[0].isalpha() and key not in ("nan", "inf", "infinity"):
            if key in ("xllcenter", "yllcenter"):
                raise MalformedHeader(f"{parts[0]} is not supported; use xllcorner/yllcorner", lineno)
            if key not in HEADER_KEYS:
                raise MalformedHeader(f"unknown header key {parts[0]!r}", lineno)
            if key in header:
                raise MalformedHeader(f"duplicate header key {parts[0]!r}", lineno)
            if len(parts) != 2:
                raise MalformedHeader(f"header line needs exactly one value: {raw.strip()!r}", lineno)
            header[key] = (_parse_float(parts[1], lineno), lineno)
            continue
        if not in_data:
            missing = [k for k in HEADER_KEYS if k not in header]
            if missing:
                raise MalformedHeader(f"missing header keys: {', '.join(missing)}", lineno)
            in_data = True
        tokens.extend(parts)
        token_lines.extend([lineno] * len(parts))

    if not in_data:
        missing = [k for k in HEADER_KEYS if k not in header]
        if missing:
            raise MalformedHeader(f"missing header keys: {', '.join(missing)}", lineno or 1)

    ncols, ncols_line = header["ncols"]
    nrows, nrows_line = header["nrows"]
    for v, ln, name in ((ncols, ncols_line, "ncols"), (nrows, nrows_line, "nrows")):
        if v != int(v) or v < 1:
            raise MalformedHeader(f"{name} must be a positive integer, got {fmt_num(v)}", ln)
    ncols, nrows = int(ncols), int(nrows)
    expected = ncols * nrows
    if len(tokens) != expected:
        bad_line = token_lines[expected] if len(tokens) > expected else lineno
        raise TokenCountMismatch(
            f"expected {expected} values ({nrows} rows x {ncols} cols), found {len(tokens)}",
            bad_line,
        )
    vals = np.array(
        [_parse_float(t, ln) for t, ln in zip(tokens, token_lines)], dtype=np.float64
    ).reshape(nrows, ncols)
    cellsize, cs_line = header["cellsize"]
    if not cellsize > 0:
        raise MalformedHeader("cellsize must be positive", cs_line)
    nodata = header["nodata_value"][0]
    bad = (vals != nodata) & (vals < 0)
    if bad.any():
        r = int(np.argwhere(bad)[0][0])
        raise ParseError("negative population value", token_lines[r * ncols])
    return Grid(vals, header["xllcorner"][0], header["yllcorner"][0], cellsize, nodata, crs_tag)


def write_ascii_grid(g: Grid) -> str:
    out = [
        f"ncols {g.ncols}",
        f"nrows {g.nrows}",
        f"xllcorner {fmt_num(g.xll)}",
        f"yllcorner {fmt_num(g.yll)}",
        f"cellsize {fmt_num(g.cellsize)}",
        f"nodata_value {fmt_num(g.nodata)}",
    ]
    for row in g.values.tolist():
        out.append(" ".join(fmt_num(v) for v in row))
    return "\n".join(out) + "\n"


def _prj_path(path: Path) -> Path:
    return path.with_suffix(".prj")


def load_grid(path) -> Grid:
    """Read a grid file; a sidecar ``.prj`` (if any) supplies the CRS tag."""
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8") as fh:
            crs = UNSPECIFIED_CRS
            prj = _prj_path(path)
            if prj.exists():
                crs = prj.read_text(encoding="utf-8").strip() or UNSPECIFIED_CRS
            return read_ascii_grid(fh, crs_tag=crs)
    except OSError as exc:
        raise IoFailure(f"cannot read raster {path}: {exc.strerror or exc}") from None


def save_grid(g: Grid, path) -> None:
    path = Path(path)
    try:
        path.write_text(write_ascii_grid(g), encoding="utf-8")
        if g.crs_tag != UNSPECIFIED_CRS:
            _prj_path(path).write_text(g.crs_tag + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot write raster {path}: {exc.strerror or exc}") from None


def cell_rect(g: Grid, c) -> Rect:
    row, col = c
    if not (0 <= row < g.nrows and 0 <= col < g.ncols):
        raise OutOfBounds(f"cell ({row}, {col}) outside {g.nrows}x{g.ncols} grid")
    cs = g.cellsize
    return Rect(
        g.xll + col * cs,
        g.yll + (g.nrows - row - 1) * cs,
        g.xll + (col + 1) * cs,
        g.yll + (g.nrows - row) * cs,
    )


def cell_center(g: Grid, c) -> Point:
    row, col = c
    if not (0 <= row < g.nrows and 0 <= col < g.ncols):
        raise OutOfBounds(f"cell ({row}, {col}) outside {g.nrows}x{g.ncols} grid")
    return Point(g.xll + (col + 0.5) * g.cellsize, g.yll + (g.nrows - row - 0.5) * g.cellsize)


def _mask_polygons(mask):
    """(polygons, crs_tag or None) from a ZoneSet, Zone, Polygon or iterable."""
    from .zones import Zone, ZoneSet

    if isinstance(mask, ZoneSet):
        return [p for z in mask.zones for p in z.parts], mask.crs_tag
    if isinstance(mask, Zone):
        return list(mask.parts), None
    if isinstance(mask, Polygon):
        return [mask], None
    return list(mask), None


def mask_weights(g: Grid, polygons, mode="center"):
    """Per-cell inclusion weights for a set of polygons.

    Center mode gives 0/1 by cell-centre containment in any polygon; weighted
    mode gives the covered fraction of each cell (parts summed, capped at 1).
    """
    out = np.zeros((g.nrows, g.ncols))
    if not polygons:
        return out
    packed = kernels.PackedRings.from_polygons(polygons)
    r0, r1, c0, c1 = kernels.window(packed, g.xll, g.yll, g.nrows, g.ncols, g.cellsize)
    if mode == "center":
        win = kernels.centers_window(packed, g.xll, g.yll, g.nrows, g.cellsize, r0, r1, c0, c1)
        out[r0:r1, c0:c1] = win
    elif mode == "weighted":
        out[r0:r1, c0:c1] = kernels.coverage_window(
            packed, g.xll, g.yll, g.nrows, g.cellsize, r0, r1, c0, c1
        )
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return out


def clip_by_mask(g: Grid, mask, mode="center", threshold=0.5) -> Grid:
    """Null every cell outside ``mask``.

    ``mode="center"`` keeps cells whose centre lies in the mask;
    ``mode="weighted"`` keeps cells with covered fraction >= ``threshold``.
    """
    polygons, crs = _mask_polygons(mask)
    if crs is not None and crs != g.crs_tag:
        raise CrsMismatch(f"mask CRS {crs!r} != grid CRS {g.crs_tag!r}")
    if mode == "weighted" and not (0.0 < threshold <= 1.0):
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")
    w = mask_weights(g, polygons, mode)
    keep = w >= threshold if mode == "weighted" else w > 0
    return g.with_values(np.where(keep, g.values, g.nodata))


def raster_to_points(g: Grid):
    """(cell centre, value) for every non-nodata cell, north row first."""
    out = []
    cs = g.cellsize
    for r, c in np.argwhere(g.valid).tolist():
        pt = Point(g.xll + (c + 0.5) * cs, g.yll + (g.nrows - r - 0.5) * cs)
        out.append((pt, float(g.values[r, c])))
    return out
