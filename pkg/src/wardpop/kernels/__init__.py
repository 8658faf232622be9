"""Batch geometry kernels over raster windows.

Two interchangeable implementations live underneath:

* ``_loops``: per-cell Sutherland-Hodgman clipping and ray casting, compiled
  with numba.
* ``_vector``: edge-integral coverage and broadcast ray casting in numpy.

The public functions below dispatch on :func:`wardpop._accel.use_numba`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .._accel import use_numba
from . import _loops, _vector


@dataclass(frozen=True)
class PackedRings:
    """Rings of one or more polygons flattened into contiguous arrays."""

    xs: np.ndarray
    ys: np.ndarray
    ring_start: np.ndarray
    ring_part: np.ndarray
    ring_hole: np.ndarray
    nparts: int
    bounds: tuple

    @classmethod
    def from_polygons(cls, polygons):
        polygons = list(polygons)
        if not polygons:
            raise ValueError("no polygons to pack")
        xs, ys, starts, parts, holes = [], [], [0], [], []
        for pi, poly in enumerate(polygons):
            for ri, ring in enumerate(poly.rings):
                xs.append(ring.coords[:, 0])
                ys.append(ring.coords[:, 1])
                starts.append(starts[-1] + len(ring))
                parts.append(pi)
                holes.append(ri > 0)
        x = np.ascontiguousarray(np.concatenate(xs))
        y = np.ascontiguousarray(np.concatenate(ys))
        return cls(
            xs=x,
            ys=y,
            ring_start=np.asarray(starts, dtype=np.int64),
            ring_part=np.asarray(parts, dtype=np.int64),
            ring_hole=np.asarray(holes, dtype=np.bool_),
            nparts=len(polygons),
            bounds=(float(x.min()), float(y.min()), float(x.max()), float(y.max())),
        )


def window(packed: PackedRings, xll, yll, nrows, ncols, cellsize):
    """Row/col range [r0, r1) x [c0, c1) of cells touching the rings' bbox."""
    bx0, by0, bx1, by1 = packed.bounds
    c0 = int(np.floor((bx0 - xll) / cellsize))
    c1 = int(np.ceil((bx1 - xll) / cellsize))
    r0 = nrows - int(np.ceil((by1 - yll) / cellsize))
    r1 = nrows - int(np.floor((by0 - yll) / cellsize))
    # one cell of slack absorbs rounding in the divisions above
    c0 = min(max(c0 - 1, 0), ncols)
    c1 = min(max(c1 + 1, 0), ncols)
    r0 = min(max(r0 - 1, 0), nrows)
    r1 = min(max(r1 + 1, 0), nrows)
    return r0, r1, c0, c1


def coverage_window(packed: PackedRings, xll, yll, nrows, cellsize, r0, r1, c0, c1):
    if r1 <= r0 or c1 <= c0:
        return np.zeros((max(r1 - r0, 0), max(c1 - c0, 0)))
    impl = _loops if use_numba() else _vector
    return impl.coverage_window(
        packed.xs, packed.ys, packed.ring_start, packed.ring_part, packed.ring_hole,
        packed.nparts, float(xll), float(yll), int(nrows), float(cellsize),
        int(r0), int(r1), int(c0), int(c1),
    )


def centers_window(packed: PackedRings, xll, yll, nrows, cellsize, r0, r1, c0, c1):
    if r1 <= r0 or c1 <= c0:
        return np.zeros((max(r1 - r0, 0), max(c1 - c0, 0)), dtype=bool)
    impl = _loops if use_numba() else _vector
    return impl.centers_window(
        packed.xs, packed.ys, packed.ring_start, packed.ring_part, packed.nparts,
        float(xll), float(yll), int(nrows), float(cellsize),
        int(r0), int(r1), int(c0), int(c1),
    )


def kahan_weighted(weights, values, valid):
    impl = _loops if use_numba() else _vector
    return impl.kahan_weighted(
        np.ascontiguousarray(weights, dtype=np.float64),
        np.ascontiguousarray(values, dtype=np.float64),
        np.ascontiguousarray(valid, dtype=np.bool_),
    )
