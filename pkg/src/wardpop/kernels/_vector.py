"""Vectorised numpy kernels (no numba).

Coverage here does not clip at all. For a ring with signed area A,
``A ∩ cell = -Σ_edges ∫ (clamp(y(x), y_lo, y_hi) - y_lo) dx`` with x limited
to the cell's x-range; each edge term is piecewise linear in the edge
parameter, so it integrates exactly with at most three trapezoids. Every
(edge, row, col) triple is evaluated at once, in row chunks.
"""
import numpy as np

DEGENERATE_AREA = 1e-12
FULL_CELL = 1.0 - 1e-12
_CHUNK_ELEMS = 1 << 21


def _ring_edges(xs, ys, ring_start, k):
    s, e = ring_start[k], ring_start[k + 1]
    ax = xs[s:e]
    ay = ys[s:e]
    return ax, ay, np.roll(ax, -1), np.roll(ay, -1)


def _band_integral(ax, ay, bx, by, x_lo, x_hi, y_lo, y_hi):
    """Signed area of the ring inside each (row, col) cell.

    ax..by have shape (E,); x_lo/x_hi (C,); y_lo/y_hi (R,). Returns (R, C).
    """
    dx = (bx - ax)[:, None, None]
    dy = (by - ay)[:, None, None]
    axe = ax[:, None, None]
    aye = ay[:, None, None]
    vert = dx == 0.0
    safe_dx = np.where(vert, 1.0, dx)
    t0 = (x_lo[None, None, :] - axe) / safe_dx
    t1 = (x_hi[None, None, :] - axe) / safe_dx
    t_lo = np.clip(np.minimum(t0, t1), 0.0, 1.0)
    t_hi = np.clip(np.maximum(t0, t1), 0.0, 1.0)
    t_hi = np.maximum(t_hi, t_lo)

    flat = dy == 0.0
    safe_dy = np.where(flat, 1.0, dy)
    ylo = y_lo[None, :, None]
    yhi = y_hi[None, :, None]
    b0 = np.where(flat, 0.0, (ylo - aye) / safe_dy)
    b1 = np.where(flat, 0.0, (yhi - aye) / safe_dy)
    s1 = np.clip(np.minimum(b0, b1), t_lo, t_hi)
    s2 = np.clip(np.maximum(b0, b1), t_lo, t_hi)

    height = yhi - ylo

    def h(t):
        return np.clip(aye + t * dy - ylo, 0.0, height)

    h0, h1, h2, h3 = h(t_lo), h(s1), h(s2), h(t_hi)
    integral = 0.5 * ((s1 - t_lo) * (h0 + h1) + (s2 - s1) * (h1 + h2) + (t_hi - s2) * (h2 + h3))
    integral = np.where(vert, 0.0, integral * dx)
    return -integral.sum(axis=0)


def coverage_window(xs, ys, ring_start, ring_part, ring_hole, nparts,
                    xll, yll, nrows, cellsize, r0, r1, c0, c1):
    nrings = len(ring_start) - 1
    cols = np.arange(c0, c1)
    x_lo = xll + cols * cellsize
    x_hi = xll + (cols + 1) * cellsize
    rows = np.arange(r0, r1)
    y_lo = yll + (nrows - rows - 1) * cellsize
    y_hi = yll + (nrows - rows) * cellsize
    ncols = c1 - c0
    part_area = np.zeros((nparts, r1 - r0, ncols))
    for k in range(nrings):
        ax, ay, bx, by = _ring_edges(xs, ys, ring_start, k)
        ring_signed = 0.5 * np.sum(ax * by - bx * ay)
        orient = 1.0 if ring_signed >= 0 else -1.0
        sign = -1.0 if ring_hole[k] else 1.0
        step = max(1, _CHUNK_ELEMS // max(1, len(ax) * ncols))
        for a in range(0, r1 - r0, step):
            b = min(a + step, r1 - r0)
            area = _band_integral(ax, ay, bx, by, x_lo, x_hi, y_lo[a:b], y_hi[a:b])
            part_area[ring_part[k], a:b] += sign * orient * area
    part_area[part_area < DEGENERATE_AREA] = 0.0
    w = part_area.sum(axis=0) / (cellsize * cellsize)
    w[w > FULL_CELL] = 1.0
    return w


def points_inside(px, py, xs, ys, ring_start, ring_part, nparts):
    """Even-odd, boundary-inside containment for flat point arrays."""
    npts = px.shape[0]
    parity = np.zeros((nparts, npts), dtype=bool)
    on_edge = np.zeros(npts, dtype=bool)
    for k in range(len(ring_start) - 1):
        ax, ay, bx, by = _ring_edges(xs, ys, ring_start, k)
        step = max(1, _CHUNK_ELEMS // max(1, len(ax)))
        for a in range(0, npts, step):
            qx = px[a:a + step, None]
            qy = py[a:a + step, None]
            cross = (bx - ax) * (qy - ay) - (by - ay) * (qx - ax)
            on = (
                (cross == 0.0)
                & (np.minimum(ax, bx) <= qx) & (qx <= np.maximum(ax, bx))
                & (np.minimum(ay, by) <= qy) & (qy <= np.maximum(ay, by))
            )
            on_edge[a:a + step] |= on.any(axis=1)
            straddle = (ay > qy) != (by > qy)
            with np.errstate(divide="ignore", invalid="ignore"):
                xint = ax + (qy - ay) * (bx - ax) / (by - ay)
            hits = straddle & (qx < xint)
            flips = np.count_nonzero(hits, axis=1) % 2 == 1
            parity[ring_part[k], a:a + step] ^= flips
    return on_edge | parity.any(axis=0)


def centers_window(xs, ys, ring_start, ring_part, nparts,
                   xll, yll, nrows, cellsize, r0, r1, c0, c1):
    rows = np.arange(r0, r1)
    cols = np.arange(c0, c1)
    py = yll + (nrows - rows - 0.5) * cellsize
    px = xll + (cols + 0.5) * cellsize
    gx, gy = np.meshgrid(px, py)
    inside = points_inside(gx.ravel(), gy.ravel(), xs, ys, ring_start, ring_part, nparts)
    return inside.reshape(r1 - r0, c1 - c0)


def kahan_weighted(weights, values, valid):
    count = count_c = total = total_c = 0.0
    w_flat = weights.ravel()
    v_flat = values.ravel()
    keep = np.flatnonzero((w_flat > 0.0) & valid.ravel())
    for i in keep.tolist():
        w = float(w_flat[i])
        y = w - count_c
        t = count + y
        count_c = (t - count) - y
        count = t
        y = w * float(v_flat[i]) - total_c
        t = total + y
        total_c = (t - total) - y
        total = t
    return count, total
