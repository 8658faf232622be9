"""Loop kernels, compiled with numba when available.

Rings arrive packed (see :class:`wardpop.kernels.PackedRings`): flat
coordinate arrays, ``ring_start`` offsets, a part id and a hole flag per
ring. Cell footprints are derived from ``(xll, yll, nrows, cellsize)`` with
the same expressions as :func:`wardpop.raster.cell_rect` so neighbouring
cells share bit-identical edges.
"""
import numpy as np

from .._accel import njit

DEGENERATE_AREA = 1e-12
# Fractions this close to 1 are rounding noise on a fully covered cell.
FULL_CELL = 1.0 - 1e-12


@njit
def _clip_stage(inx, iny, n, outx, outy, axis, bound, keep_greater):
    if n == 0:
        return 0
    m = 0
    sx = inx[n - 1]
    sy = iny[n - 1]
    sv = sx if axis == 0 else sy
    s_in = sv >= bound if keep_greater else sv <= bound
    for i in range(n):
        ex = inx[i]
        ey = iny[i]
        ev = ex if axis == 0 else ey
        e_in = ev >= bound if keep_greater else ev <= bound
        if e_in != s_in:
            t = (bound - sv) / (ev - sv)
            if axis == 0:
                outx[m] = bound
                outy[m] = sy + t * (ey - sy)
            else:
                outx[m] = sx + t * (ex - sx)
                outy[m] = bound
            m += 1
        if e_in:
            outx[m] = ex
            outy[m] = ey
            m += 1
        sx = ex
        sy = ey
        sv = ev
        s_in = e_in
    return m


@njit
def _shoelace(xs, ys, n):
    s = 0.0
    for i in range(n):
        j = i + 1 if i + 1 < n else 0
        s += xs[i] * ys[j] - xs[j] * ys[i]
    return 0.5 * s


@njit
def coverage_window(xs, ys, ring_start, ring_part, ring_hole, nparts,
                    xll, yll, nrows, cellsize, r0, r1, c0, c1):
    """Covered fraction of every cell in rows [r0, r1) x cols [c0, c1).

    Each ring is first clipped to the row band, then the (much smaller)
    band polygon is clipped to each cell's x-range.
    """
    nrings = ring_start.shape[0] - 1
    out = np.zeros((r1 - r0, c1 - c0))
    maxlen = 0
    for k in range(nrings):
        ln = ring_start[k + 1] - ring_start[k]
        if ln > maxlen:
            maxlen = ln
    cap = 2 * maxlen + 8
    # band polygons for every ring, kept for the whole row
    bandx = np.empty((nrings, cap))
    bandy = np.empty((nrings, cap))
    bandn = np.zeros(nrings, dtype=np.int64)
    bxmin = np.empty(nrings)
    bxmax = np.empty(nrings)
    ax_ = np.empty(cap)
    ay_ = np.empty(cap)
    bx_ = np.empty(cap)
    by_ = np.empty(cap)
    part_area = np.zeros(nparts)
    cell_area = cellsize * cellsize

    for r in range(r0, r1):
        y_lo = yll + (nrows - r - 1) * cellsize
        y_hi = yll + (nrows - r) * cellsize
        for k in range(nrings):
            s = ring_start[k]
            n = ring_start[k + 1] - s
            for i in range(n):
                ax_[i] = xs[s + i]
                ay_[i] = ys[s + i]
            m = _clip_stage(ax_, ay_, n, bx_, by_, 1, y_lo, True)
            m = _clip_stage(bx_, by_, m, ax_, ay_, 1, y_hi, False)
            bandn[k] = m
            lo = np.inf
            hi = -np.inf
            for i in range(m):
                bandx[k, i] = ax_[i]
                bandy[k, i] = ay_[i]
                if ax_[i] < lo:
                    lo = ax_[i]
                if ax_[i] > hi:
                    hi = ax_[i]
            bxmin[k] = lo
            bxmax[k] = hi

        for c in range(c0, c1):
            x_lo = xll + c * cellsize
            x_hi = xll + (c + 1) * cellsize
            for p in range(nparts):
                part_area[p] = 0.0
            for k in range(nrings):
                m = bandn[k]
                if m < 3 or bxmax[k] <= x_lo or bxmin[k] >= x_hi:
                    continue
                for i in range(m):
                    ax_[i] = bandx[k, i]
                    ay_[i] = bandy[k, i]
                q = _clip_stage(ax_, ay_, m, bx_, by_, 0, x_lo, True)
                q = _clip_stage(bx_, by_, q, ax_, ay_, 0, x_hi, False)
                if q < 3:
                    continue
                a = abs(_shoelace(ax_, ay_, q))
                if ring_hole[k]:
                    part_area[ring_part[k]] -= a
                else:
                    part_area[ring_part[k]] += a
            total = 0.0
            for p in range(nparts):
                if part_area[p] >= DEGENERATE_AREA:
                    total += part_area[p]
            w = total / cell_area
            if w > FULL_CELL:
                w = 1.0
            out[r - r0, c - c0] = w
    return out


@njit
def _point_inside(px, py, xs, ys, ring_start, ring_part, nparts, parity):
    nrings = ring_start.shape[0] - 1
    for p in range(nparts):
        parity[p] = False
    for k in range(nrings):
        s = ring_start[k]
        n = ring_start[k + 1] - s
        for i in range(n):
            j = i + 1 if i + 1 < n else 0
            ax = xs[s + i]
            ay = ys[s + i]
            bx = xs[s + j]
            by = ys[s + j]
            cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
            if cross == 0.0:
                if min(ax, bx) <= px <= max(ax, bx) and min(ay, by) <= py <= max(ay, by):
                    return True
            if (ay > py) != (by > py):
                xint = ax + (py - ay) * (bx - ax) / (by - ay)
                if px < xint:
                    parity[ring_part[k]] = not parity[ring_part[k]]
    for p in range(nparts):
        if parity[p]:
            return True
    return False


@njit
def centers_window(xs, ys, ring_start, ring_part, nparts,
                   xll, yll, nrows, cellsize, r0, r1, c0, c1):
    out = np.zeros((r1 - r0, c1 - c0), dtype=np.bool_)
    parity = np.zeros(nparts, dtype=np.bool_)
    for r in range(r0, r1):
        py = yll + (nrows - r - 0.5) * cellsize
        for c in range(c0, c1):
            px = xll + (c + 0.5) * cellsize
            out[r - r0, c - c0] = _point_inside(px, py, xs, ys, ring_start,
                                                ring_part, nparts, parity)
    return out


@njit
def kahan_weighted(weights, values, valid):
    """Compensated (count, sum) over cells with weight > 0, row-major."""
    count = 0.0
    count_c = 0.0
    total = 0.0
    total_c = 0.0
    nr, nc = weights.shape
    for r in range(nr):
        for c in range(nc):
            w = weights[r, c]
            if w <= 0.0 or not valid[r, c]:
                continue
            y = w - count_c
            t = count + y
            count_c = (t - count) - y
            count = t
            y = w * values[r, c] - total_c
            t = total + y
            total_c = (t - total) - y
            total = t
    return count, total
