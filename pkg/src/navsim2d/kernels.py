"""Compiled numerics: raycasting, collision tests, rasterization, A*, batch stepping.

Everything here is numba-compiled and operates on packed numpy arrays; the
public modules wrap these in friendlier APIs. All math is float64. Kernels
write only to per-environment output rows, so results are independent of
the worker thread count.

Scene layout: obstacles are segments (S,4 as ax,ay,bx,by) and circles
(C,3 as cx,cy,r) plus a uniform-grid index in CSR form (cell_start, items),
where item ids < S are segments and ids >= S are circles (id - S).
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

TWO_PI = 2.0 * np.pi


@njit(cache=True, inline="always")
def wrap_angle(a):
    """Wrap to (-pi, pi]."""
    r = a % TWO_PI
    if r <= 0.0:
        r += TWO_PI
    return r - np.pi


@njit(cache=True, inline="always")
def _ray_segment(ox, oy, dx, dy, ax, ay, bx, by):
    """Distance along unit ray to a segment, or inf. Parallel rays miss."""
    ex = bx - ax
    ey = by - ay
    den = dx * ey - dy * ex
    if den == 0.0:
        return np.inf
    fx = ax - ox
    fy = ay - oy
    t = (fx * ey - fy * ex) / den
    u = (fx * dy - fy * dx) / den
    if t >= 0.0 and 0.0 <= u <= 1.0:
        return t
    return np.inf


@njit(cache=True, inline="always")
def _ray_circle(ox, oy, dx, dy, cx, cy, r):
    """Distance along unit ray to a circle boundary, or inf."""
    fx = ox - cx
    fy = oy - cy
    b = fx * dx + fy * dy
    c = fx * fx + fy * fy - r * r
    disc = b * b - c
    if disc < 0.0:
        return np.inf
    sq = np.sqrt(disc)
    t = -b - sq
    if t < 0.0:
        t = -b + sq
    if t < 0.0:
        return np.inf
    return t


@njit(cache=True)
def ray_cast_indexed(ox, oy, dx, dy, max_range,
                     segs, circs, cell_size, nx, ny, cell_start, items):
    """Min hit distance in [0, max_range] via uniform-grid DDA traversal."""
    best = max_range
    nseg = segs.shape[0]
    ix = int(np.floor(ox / cell_size))
    iy = int(np.floor(oy / cell_size))
    if dx > 0.0:
        sx = 1
        tmaxx = ((ix + 1) * cell_size - ox) / dx
        tdx = cell_size / dx
    elif dx < 0.0:
        sx = -1
        tmaxx = (ix * cell_size - ox) / dx
        tdx = -cell_size / dx
    else:
        sx = 0
        tmaxx = np.inf
        tdx = np.inf
    if dy > 0.0:
        sy = 1
        tmaxy = ((iy + 1) * cell_size - oy) / dy
        tdy = cell_size / dy
    elif dy < 0.0:
        sy = -1
        tmaxy = (iy * cell_size - oy) / dy
        tdy = -cell_size / dy
    else:
        sy = 0
        tmaxy = np.inf
        tdy = np.inf

    while True:
        if 0 <= ix < nx and 0 <= iy < ny:
            c = iy * nx + ix
            for k in range(cell_start[c], cell_start[c + 1]):
                oid = items[k]
                if oid < nseg:
                    t = _ray_segment(ox, oy, dx, dy,
                                     segs[oid, 0], segs[oid, 1],
                                     segs[oid, 2], segs[oid, 3])
                else:
                    j = oid - nseg
                    t = _ray_circle(ox, oy, dx, dy,
                                    circs[j, 0], circs[j, 1], circs[j, 2])
                if t < best:
                    best = t
        tnext = tmaxx if tmaxx < tmaxy else tmaxy
        if tnext >= best:
            break
        if tmaxx <= tmaxy:
            ix += sx
            tmaxx += tdx
        else:
            iy += sy
            tmaxy += tdy
        if ix < -1 or ix > nx or iy < -1 or iy > ny:
            break
    return best


@njit(cache=True, inline="always")
def _seg_rect_hit(p1x, p1y, p2x, p2y, ct, st, cx, cy, hx, hy):
    """SAT: segment vs oriented rect (center cx,cy, axes ct,st, half extents)."""
    # segment endpoints in rect-local frame
    ax = ct * (p1x - cx) + st * (p1y - cy)
    ay = -st * (p1x - cx) + ct * (p1y - cy)
    bx = ct * (p2x - cx) + st * (p2y - cy)
    by = -st * (p2x - cx) + ct * (p2y - cy)
    if max(ax, bx) < -hx or min(ax, bx) > hx:
        return False
    if max(ay, by) < -hy or min(ay, by) > hy:
        return False
    ex = bx - ax
    ey = by - ay
    nx_ = -ey
    ny_ = ex
    rad = abs(nx_) * hx + abs(ny_) * hy
    s = nx_ * ax + ny_ * ay
    if s > rad or s < -rad:
        return False
    return True


@njit(cache=True, inline="always")
def _circle_rect_hit(ccx, ccy, r, ct, st, cx, cy, hx, hy):
    lx = ct * (ccx - cx) + st * (ccy - cy)
    ly = -st * (ccx - cx) + ct * (ccy - cy)
    qx = min(max(lx, -hx), hx)
    qy = min(max(ly, -hy), hy)
    dx = lx - qx
    dy = ly - qy
    return dx * dx + dy * dy <= r * r


@njit(cache=True)
def rect_hit_indexed(cx, cy, heading, hx, hy,
                     segs, circs, cell_size, nx, ny, cell_start, items):
    """True iff the oriented rect overlaps any obstacle (contact counts)."""
    ct = np.cos(heading)
    st = np.sin(heading)
    ex = abs(ct) * hx + abs(st) * hy
    ey = abs(st) * hx + abs(ct) * hy
    nseg = segs.shape[0]
    ix0 = max(0, int(np.floor((cx - ex) / cell_size)))
    ix1 = min(nx - 1, int(np.floor((cx + ex) / cell_size)))
    iy0 = max(0, int(np.floor((cy - ey) / cell_size)))
    iy1 = min(ny - 1, int(np.floor((cy + ey) / cell_size)))
    for iy in range(iy0, iy1 + 1):
        for ixx in range(ix0, ix1 + 1):
            c = iy * nx + ixx
            for k in range(cell_start[c], cell_start[c + 1]):
                oid = items[k]
                if oid < nseg:
                    if _seg_rect_hit(segs[oid, 0], segs[oid, 1],
                                     segs[oid, 2], segs[oid, 3],
                                     ct, st, cx, cy, hx, hy):
                        return True
                else:
                    j = oid - nseg
                    if _circle_rect_hit(circs[j, 0], circs[j, 1], circs[j, 2],
                                        ct, st, cx, cy, hx, hy):
                        return True
    return False


@njit(cache=True)
def swept_rect_hit_indexed(cx, cy, heading, hx, hy, dx, dy, dheading, substeps,
                           segs, circs, cell_size, nx, ny, cell_start, items):
    """Substep-interpolated rect sweep, endpoints inclusive.

    Returns the first colliding substep index, or -1 if the sweep is clear.
    """
    for k in range(substeps + 1):
        f = k / substeps if substeps > 0 else 0.0
        if rect_hit_indexed(cx + f * dx, cy + f * dy, heading + f * dheading,
                            hx, hy, segs, circs, cell_size, nx, ny,
                            cell_start, items):
            return k
    return -1


@njit(cache=True, inline="always")
def _scan_into(px, py, theta, mx, my, mtheta, ray_count, fov, max_range,
               segs, circs, cell_size, nx, ny, cell_start, items, out_row):
    ct = np.cos(theta)
    st = np.sin(theta)
    sx = px + ct * mx - st * my
    sy = py + st * mx + ct * my
    stheta = theta + mtheta
    if ray_count > 1:
        step = fov / (ray_count - 1)
    else:
        step = 0.0
    for i in range(ray_count):
        b = stheta - 0.5 * fov + i * step
        d = ray_cast_indexed(sx, sy, np.cos(b), np.sin(b), max_range,
                             segs, circs, cell_size, nx, ny, cell_start, items)
        out_row[i] = d / max_range


@njit(cache=True)
def scan_single(px, py, theta, mount, ray_count, fov, max_range,
                segs, circs, cell_size, nx, ny, cell_start, items, out_row):
    _scan_into(px, py, theta, mount[0], mount[1], mount[2], ray_count, fov,
               max_range, segs, circs, cell_size, nx, ny, cell_start, items,
               out_row)


@njit(cache=True, inline="always")
def _integrate_axis(v0, target, accel, dt):
    """Closed-form displacement/end-velocity for rate-limited tracking.

    Velocity moves toward ``target`` at slope ``accel`` and holds once
    reached; returns (end velocity, integral of v over the step).
    """
    diff = target - v0
    dvmax = accel * dt
    if abs(diff) <= dvmax:
        tau = abs(diff) / accel if accel > 0.0 else 0.0
        v1 = target
        disp = 0.5 * (v0 + target) * tau + target * (dt - tau)
    else:
        v1 = v0 + (dvmax if diff > 0.0 else -dvmax)
        disp = 0.5 * (v0 + v1) * dt
    return v1, disp


# Episode status codes (shared with sim.Status).
RUNNING = 0
SUCCESS = 1
COLLISION = 2
TIMEOUT = 3


@njit(cache=True, parallel=True)
def step_batch(pose, vel, prev_cmd, goal, status, step_count, scan,
               actions, scene_id, scene_meta, scene_cell_size,
               segs_all, circs_all, cell_start_all, items_all,
               limits, dt, accel, goal_radius, sub_len, max_steps,
               diffdrive, hx, hy, mount, ray_count, fov, max_range):
    """Advance every running environment by one step and rescan.

    Terminal environments are left untouched. scene_meta rows are
    (seg_off, n_seg, circ_off, n_circ, cellstart_off, items_off, nx, ny).
    """
    n = pose.shape[0]
    for e in prange(n):
        if status[e] != RUNNING:
            continue
        sid = scene_id[e]
        seg_off = scene_meta[sid, 0]
        n_seg = scene_meta[sid, 1]
        circ_off = scene_meta[sid, 2]
        n_circ = scene_meta[sid, 3]
        cs_off = scene_meta[sid, 4]
        it_off = scene_meta[sid, 5]
        snx = scene_meta[sid, 6]
        sny = scene_meta[sid, 7]
        segs = segs_all[seg_off:seg_off + n_seg]
        circs = circs_all[circ_off:circ_off + n_circ]
        cell_start = cell_start_all[cs_off:cs_off + snx * sny + 1]
        items = items_all[it_off:]
        csize = scene_cell_size[sid]

        # clamp command
        c0 = min(max(actions[e, 0], limits[0, 0]), limits[0, 1])
        c1 = min(max(actions[e, 1], limits[1, 0]), limits[1, 1])
        c2 = min(max(actions[e, 2], limits[2, 0]), limits[2, 1])
        if diffdrive:
            c1 = 0.0

        v0x = vel[e, 0]
        v0y = vel[e, 1]
        w0 = vel[e, 2]
        v1x, bdx = _integrate_axis(v0x, c0, accel, dt)
        v1y, bdy = _integrate_axis(v0y, c1, accel, dt)
        w1, dth = _integrate_axis(w0, c2, accel, dt)

        th0 = pose[e, 2]
        thm = th0 + 0.5 * dth
        cm = np.cos(thm)
        sm = np.sin(thm)
        dxw = cm * bdx - sm * bdy
        dyw = sm * bdx + cm * bdy

        x0 = pose[e, 0]
        y0 = pose[e, 1]
        dist = np.sqrt(dxw * dxw + dyw * dyw)
        nsub = int(np.ceil(dist / sub_len))
        if nsub < 1:
            nsub = 1
        hit_k = swept_rect_hit_indexed(x0, y0, th0, hx, hy, dxw, dyw, dth,
                                       nsub, segs, circs, csize, snx, sny,
                                       cell_start, items)
        if hit_k >= 0:
            f = hit_k / nsub
            pose[e, 0] = x0 + f * dxw
            pose[e, 1] = y0 + f * dyw
            pose[e, 2] = wrap_angle(th0 + f * dth)
            status[e] = COLLISION
        else:
            pose[e, 0] = x0 + dxw
            pose[e, 1] = y0 + dyw
            pose[e, 2] = wrap_angle(th0 + dth)
            gx = pose[e, 0] - goal[e, 0]
            gy = pose[e, 1] - goal[e, 1]
            if np.sqrt(gx * gx + gy * gy) <= goal_radius:
                status[e] = SUCCESS

        vel[e, 0] = v1x
        vel[e, 1] = v1y
        vel[e, 2] = w1
        prev_cmd[e, 0] = c0
        prev_cmd[e, 1] = c1
        prev_cmd[e, 2] = c2
        step_count[e] += 1
        if status[e] == RUNNING and step_count[e] >= max_steps:
            status[e] = TIMEOUT

        _scan_into(pose[e, 0], pose[e, 1], pose[e, 2],
                   mount[0], mount[1], mount[2], ray_count, fov, max_range,
                   segs, circs, csize, snx, sny, cell_start, items, scan[e])


@njit(cache=True, parallel=True)
def scan_batch(pose, scan, scene_id, scene_meta, scene_cell_size,
               segs_all, circs_all, cell_start_all, items_all,
               mount, ray_count, fov, max_range):
    n = pose.shape[0]
    for e in prange(n):
        sid = scene_id[e]
        seg_off = scene_meta[sid, 0]
        n_seg = scene_meta[sid, 1]
        circ_off = scene_meta[sid, 2]
        n_circ = scene_meta[sid, 3]
        cs_off = scene_meta[sid, 4]
        it_off = scene_meta[sid, 5]
        snx = scene_meta[sid, 6]
        sny = scene_meta[sid, 7]
        _scan_into(pose[e, 0], pose[e, 1], pose[e, 2],
                   mount[0], mount[1], mount[2], ray_count, fov, max_range,
                   segs_all[seg_off:seg_off + n_seg],
                   circs_all[circ_off:circ_off + n_circ],
                   scene_cell_size[sid], snx, sny,
                   cell_start_all[cs_off:cs_off + snx * sny + 1],
                   items_all[it_off:], scan[e])


@njit(cache=True, parallel=True)
def fold_digest(pose, vel, status, scan, acc):
    """Fold the step outputs into per-env float accumulators.

    Order-stable within each env, independent across envs; used by the
    bench to get a cheap trajectory digest without hashing every scan.
    """
    n = pose.shape[0]
    nray = scan.shape[1]
    for e in prange(n):
        a = acc[e, 0]
        a = a * 0.9999999 + pose[e, 0] + 1.00000013 * pose[e, 1] \
            + 0.99999931 * pose[e, 2] + vel[e, 0] + vel[e, 1] + vel[e, 2] \
            + float(status[e])
        s = 0.0
        for i in range(nray):
            s += scan[e, i] * (1.0 + 1e-7 * i)
        acc[e, 0] = a
        acc[e, 1] = acc[e, 1] * 0.9999999 + s


@njit(cache=True)
def rasterize_scene(segs, circs, res, nx, ny, out):
    """Mark every cell whose closed square touches any obstacle."""
    for s in range(segs.shape[0]):
        ax = segs[s, 0]
        ay = segs[s, 1]
        bx = segs[s, 2]
        by = segs[s, 3]
        ix0 = max(0, int(np.floor(min(ax, bx) / res)))
        ix1 = min(nx - 1, int(np.floor(max(ax, bx) / res)))
        iy0 = max(0, int(np.floor(min(ay, by) / res)))
        iy1 = min(ny - 1, int(np.floor(max(ay, by) / res)))
        for iy in range(iy0, iy1 + 1):
            for ix in range(ix0, ix1 + 1):
                if out[iy, ix]:
                    continue
                cx = (ix + 0.5) * res
                cy = (iy + 0.5) * res
                if _seg_rect_hit(ax, ay, bx, by, 1.0, 0.0, cx, cy,
                                 0.5 * res, 0.5 * res):
                    out[iy, ix] = 1
    for c in range(circs.shape[0]):
        ccx = circs[c, 0]
        ccy = circs[c, 1]
        r = circs[c, 2]
        ix0 = max(0, int(np.floor((ccx - r) / res)))
        ix1 = min(nx - 1, int(np.floor((ccx + r) / res)))
        iy0 = max(0, int(np.floor((ccy - r) / res)))
        iy1 = min(ny - 1, int(np.floor((ccy + r) / res)))
        for iy in range(iy0, iy1 + 1):
            for ix in range(ix0, ix1 + 1):
                if out[iy, ix]:
                    continue
                if _circle_rect_hit(ccx, ccy, r, 1.0, 0.0,
                                    (ix + 0.5) * res, (iy + 0.5) * res,
                                    0.5 * res, 0.5 * res):
                    out[iy, ix] = 1


_SQRT2 = np.sqrt(2.0)


@njit(cache=True, inline="always")
def _octile(dx, dy):
    adx = abs(dx)
    ady = abs(dy)
    lo = adx if adx < ady else ady
    return (adx + ady) + (_SQRT2 - 2.0) * lo


@njit(cache=True, inline="always")
def _heap_less(fa, ha, ia, fb, hb, ib):
    if fa != fb:
        return fa < fb
    if ha != hb:
        return ha < hb
    return ia < ib


@njit(cache=True)
def astar_grid(free, sj, si, gj, gi):
    """Octile-cost A* on an 8-connected grid, corner cutting forbidden.

    free is (ny, nx) uint8 with 1 = traversable; (sj, si) and (gj, gi) are
    (row, col) start/goal. Ties break on (f, h, cell index), so expansion
    order is deterministic. Returns (found, cost, path rows, path cols).
    """
    ny, nx = free.shape
    n = ny * nx
    g = np.full(n, np.inf)
    parent = np.full(n, -1, dtype=np.int64)
    closed = np.zeros(n, dtype=np.uint8)

    cap = 8 * n + 16
    hf = np.empty(cap)
    hh = np.empty(cap)
    hi = np.empty(cap, dtype=np.int64)
    size = 0

    start = sj * nx + si
    goalидx = gj * nx + gi
    h0 = _octile(float(gi - si), float(gj - sj))
    g[start] = 0.0
    hf[0] = h0
    hh[0] = h0
    hi[0] = start
    size = 1

    dcol = (1, -1, 0, 0, 1, 1, -1, -1)
    drow = (0, 0, 1, -1, 1, -1, 1, -1)

    found = False
    while size > 0:
        top_f = hf[0]
        top_h = hh[0]
        top_i = hi[0]
        size -= 1
        hf[0] = hf[size]
        hh[0] = hh[size]
        hi[0] = hi[size]
        # sift down
        k = 0
        while True:
            l = 2 * k + 1
            r = l + 1
            m = k
            if l < size and _heap_less(hf[l], hh[l], hi[l], hf[m], hh[m], hi[m]):
                m = l
            if r < size and _heap_less(hf[r], hh[r], hi[r], hf[m], hh[m], hi[m]):
                m = r
            if m == k:
                break
            hf[k], hf[m] = hf[m], hf[k]
            hh[k], hh[m] = hh[m], hh[k]
            hi[k], hi[m] = hi[m], hi[k]
            k = m

        u = top_i
        if closed[u]:
            continue
        closed[u] = 1
        if u == goalидx:
            found = True
            break
        uj = u // nx
        ui = u % nx
        gu = g[u]
        for d in range(8):
            vi = ui + dcol[d]
            vj = uj + drow[d]
            if vi < 0 or vi >= nx or vj < 0 or vj >= ny:
                continue
            if not free[vj, vi]:
                continue
            if d >= 4:
                # diagonal: both orthogonal neighbors must be free
                if not free[uj, vi] or not free[vj, ui]:
                    continue
                step = _SQRT2
            else:
                step = 1.0
            v = vj * nx + vi
            if closed[v]:
                continue
            gnew = gu + step
            if gnew < g[v]:
                g[v] = gnew
                parent[v] = u
                hv = _octile(float(gi - vi), float(gj - vj))
                fv = gnew + hv
                # sift up
                k = size
                hf[k] = fv
                hh[k] = hv
                hi[k] = v
                size += 1
                while k > 0:
                    p = (k - 1) // 2
                    if _heap_less(hf[k], hh[k], hi[k], hf[p], hh[p], hi[p]):
                        hf[k], hf[p] = hf[p], hf[k]
                        hh[k], hh[p] = hh[p], hh[k]
                        hi[k], hi[p] = hi[p], hi[k]
                        k = p
                    else:
                        break

    if not found:
        return False, np.inf, np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)

    # reconstruct
    count = 0
    u = goalидx
    while u != -1:
        count += 1
        u = parent[u]
    rows = np.empty(count, dtype=np.int64)
    cols = np.empty(count, dtype=np.int64)
    u = goalидx
    k = count - 1
    while u != -1:
        rows[k] = u // nx
        cols[k] = u % nx
        u = parent[u]
        k -= 1
    return True, g[goalидx], rows, cols
