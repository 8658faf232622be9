"""Independent reference computations used by the tests.

Nothing here imports the package's kernels: containment is a plain
vectorised crossing-number test and coverage comes from supersampling.
"""
import numba
import numpy as np

from wardpop.geometry import Polygon, Ring


def crossings_inside(px, py, rings):
    """Even-odd test for arrays of points against a list of (n, 2) rings."""
    px = np.asarray(px, dtype=np.float64)
    py = np.asarray(py, dtype=np.float64)
    inside = np.zeros(px.shape, dtype=bool)
    for ring in rings:
        ring = np.asarray(ring, dtype=np.float64)
        a = ring
        b = np.roll(ring, -1, axis=0)
        for (ax, ay), (bx, by) in zip(a, b):
            straddle = (ay > py) != (by > py)
            if not straddle.any():
                continue
            with np.errstate(divide="ignore", invalid="ignore"):
                xint = ax + (py - ay) * (bx - ax) / (by - ay)
            inside ^= straddle & (px < xint)
    return inside


def on_boundary(px, py, rings, tol=1e-9):
    """Points within ``tol`` of any ring edge."""
    near = np.zeros(np.shape(px), dtype=bool)
    for ring in rings:
        ring = np.asarray(ring, dtype=np.float64)
        for (ax, ay), (bx, by) in zip(ring, np.roll(ring, -1, axis=0)):
            dx, dy = bx - ax, by - ay
            t = np.clip(((px - ax) * dx + (py - ay) * dy) / (dx * dx + dy * dy), 0.0, 1.0)
            ex = ax + t * dx - px
            ey = ay + t * dy - py
            near |= ex * ex + ey * ey <= tol * tol
    return near


def supersampled_coverage(rings, xll, yll, nrows, ncols, cellsize, n=200):
    """Per-cell covered fraction from an n x n lattice of sample points.

    Rows are north-first, like the grid's value array. A sample lying on
    an edge counts one half, which is what the midpoint rule assigns a
    straight boundary through a sample point. Memory use is bounded by
    scanning one grid row of samples at a time.
    """
    offs = (np.arange(n) + 0.5) / n * cellsize
    out = np.zeros((nrows, ncols))
    xs = (xll + np.arange(ncols)[:, None] * cellsize + offs[None, :]).ravel()
    for r in range(nrows):
        ybase = yll + (nrows - r - 1) * cellsize
        ys = ybase + offs
        PX, PY = np.meshgrid(xs, ys)
        hit = np.where(on_boundary(PX, PY, rings), 0.5, crossings_inside(PX, PY, rings).astype(float))
        out[r] = hit.reshape(n, ncols, n).mean(axis=(0, 2))
    return out


def brute_centers(rings, xll, yll, nrows, ncols, cellsize):
    cols = np.arange(ncols)
    rows = np.arange(nrows)
    cx = xll + (cols + 0.5) * cellsize
    cy = yll + (nrows - rows - 0.5) * cellsize
    PX, PY = np.meshgrid(cx, cy)
    return crossings_inside(PX, PY, rings)


def star_polygon(rng, cx, cy, rmin, rmax, nverts=None, hole=False):
    """Random star-shaped polygon (simple by construction), optional hole."""
    k = int(nverts or rng.integers(4, 13))
    # jittered even spacing keeps every angular gap below pi, so the ring
    # is star-shaped about (cx, cy) and therefore simple
    ang = (np.arange(k) + rng.uniform(0.0, 0.9, k)) * (2.0 * np.pi / k) + rng.uniform(0, 2 * np.pi)
    rad = rng.uniform(rmin, rmax, k)
    ext = np.column_stack([cx + rad * np.cos(ang), cy + rad * np.sin(ang)])
    holes = ()
    if hole:
        hr = 0.8 * _min_edge_distance(ext, cx, cy)
        hang = (np.arange(5) + rng.uniform(0.0, 0.9, 5)) * (2.0 * np.pi / 5)
        hrad = rng.uniform(0.3 * hr, hr, 5)
        holes = (Ring(np.column_stack([cx + hrad * np.cos(hang), cy + hrad * np.sin(hang)])),)
    return Polygon(Ring(ext), holes)


def _min_edge_distance(ring, cx, cy):
    a = ring
    b = np.roll(ring, -1, axis=0)
    d = b - a
    t = np.clip(((cx - a[:, 0]) * d[:, 0] + (cy - a[:, 1]) * d[:, 1]) / (d * d).sum(axis=1), 0.0, 1.0)
    px = a[:, 0] + t * d[:, 0] - cx
    py = a[:, 1] + t * d[:, 1] - cy
    return float(np.sqrt(px * px + py * py).min())


def polygon_rings(p):
    return [r.coords for r in p.rings]


def scanline_coverage(rings, xll, yll, nrows, ncols, cellsize, n=200):
    """Same n x n lattice as :func:`supersampled_coverage`, counted per scanline.

    For every sample row the even-odd crossings of all ring edges give the
    inside intervals; the lattice points of each cell falling in an interval
    are then counted arithmetically instead of being tested one by one.
    Boundary ties go to the half-open side, which only matters on a set of
    measure zero.

    For an edge running almost parallel to the lattice every sample row
    errs the same way, so the cell error can reach 1/(2n).
    """
    h = cellsize / n
    S = nrows * n
    # scanline s runs south to north
    ys = yll + (np.arange(S) + 0.5) * h
    xs_cross = []
    for ring in rings:
        ring = np.asarray(ring, dtype=np.float64)
        a = ring
        b = np.roll(ring, -1, axis=0)
        for (ax, ay), (bx, by) in zip(a, b):
            straddle = (ay > ys) != (by > ys)
            with np.errstate(divide="ignore", invalid="ignore"):
                x = ax + (ys - ay) * (bx - ax) / (by - ay)
            xs_cross.append(np.where(straddle, x, np.nan))
    if len(xs_cross) % 2:
        xs_cross.append(np.full(S, np.nan))
    X = np.sort(np.column_stack(xs_cross), axis=1)  # NaNs sort last
    lo = X[:, 0::2]
    hi = X[:, 1::2]
    lo = np.nan_to_num(lo, nan=0.0)
    hi = np.nan_to_num(hi, nan=0.0)  # empty interval
    cols = np.arange(ncols)
    x0 = xll + cols * cellsize  # (C,)
    # lattice index k is inside [lo, hi) when lo <= x0 + (k + 0.5) h < hi
    k_lo = np.clip(np.ceil((lo[:, :, None] - x0) / h - 0.5), 0, n)
    k_hi = np.clip(np.ceil((hi[:, :, None] - x0) / h - 0.5), 0, n)
    per_line = np.maximum(k_hi - k_lo, 0).sum(axis=1)  # (S, C)
    per_row = per_line.reshape(nrows, n, ncols).sum(axis=1)
    return per_row[::-1] / (n * n)


@numba.njit(cache=True)
def _jittered_kernel(xs, ys, starts, xll, yll, nrows, ncols, cellsize, n, seed):
    np.random.seed(seed)
    h = cellsize / n
    out = np.zeros((nrows, ncols))
    # flat edge list (a -> b)
    ne = xs.shape[0]
    ea = np.empty(ne, dtype=np.int64)
    eb = np.empty(ne, dtype=np.int64)
    q = 0
    for k in range(starts.shape[0] - 1):
        s0 = starts[k]
        m = starts[k + 1] - s0
        for e in range(m):
            ea[q] = s0 + e
            eb[q] = s0 + (e + 1) % m
            q += 1
    bx0, bx1, by0, by1 = xs.min(), xs.max(), ys.min(), ys.max()
    cand = np.empty(ne, dtype=np.int64)
    for r in range(nrows):
        cy0 = yll + (nrows - r - 1) * cellsize
        cy1 = cy0 + cellsize
        for c in range(ncols):
            cx0 = xll + c * cellsize
            cx1 = cx0 + cellsize
            if cx0 > bx1 or cx1 < bx0 or cy0 > by1 or cy1 < by0:
                # no part of the polygon reaches this cell; still consume
                # the cell's random numbers so results do not depend on it
                for _ in range(2 * n * n):
                    np.random.random()
                continue
            # only edges spanning the cell's y-range and not wholly left of it
            nc = 0
            for e in range(ne):
                a = ea[e]
                b = eb[e]
                if max(ys[a], ys[b]) < cy0 or min(ys[a], ys[b]) > cy1:
                    continue
                if max(xs[a], xs[b]) < cx0:
                    continue
                cand[nc] = e
                nc += 1
            hits = 0
            for i in range(n):
                for j in range(n):
                    px = cx0 + (i + np.random.random()) * h
                    py = cy0 + (j + np.random.random()) * h
                    inside = False
                    for t in range(nc):
                        a = ea[cand[t]]
                        b = eb[cand[t]]
                        if (ys[a] > py) != (ys[b] > py):
                            xint = xs[a] + (py - ys[a]) * (xs[b] - xs[a]) / (ys[b] - ys[a])
                            if px < xint:
                                inside = not inside
                    if inside:
                        hits += 1
            out[r, c] = hits / (n * n)
    return out


def jittered_coverage(rings, xll, yll, nrows, ncols, cellsize, n=200, seed=0):
    """Per-cell covered fraction from n x n stratified samples.

    One sample falls uniformly at random inside each of the n x n
    sub-cells, so an edge crossing a cell contributes independent
    Bernoulli errors instead of the systematic half-spacing bias a centred
    lattice shows for edges nearly parallel to it. Seeded, so repeatable.
    """
    xs = np.concatenate([np.asarray(r, dtype=np.float64)[:, 0] for r in rings])
    ys = np.concatenate([np.asarray(r, dtype=np.float64)[:, 1] for r in rings])
    starts = np.zeros(len(rings) + 1, dtype=np.int64)
    starts[1:] = np.cumsum([len(r) for r in rings])
    return _jittered_kernel(xs, ys, starts, float(xll), float(yll), int(nrows), int(ncols),
                            float(cellsize), int(n), int(seed))
