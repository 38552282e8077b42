"""Pure-Python implementation of the hot kernels.

This mirrors ``_ckernels.pyx`` line for line and is used when the compiled
extension is unavailable or ``PTOPP_PURE_PYTHON=1`` is set.  Both backends must
return identical results; the test-suite checks this.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import WalkStuck

KIND_PASSAGE = 0
KIND_ARC = 1

BACKEND = "python"


def _psd(px, py, ax, ay, bx, by):
    dx = bx - ax
    dy = by - ay
    den = dx * dx + dy * dy
    if den == 0.0:
        t = 0.0
    else:
        t = ((px - ax) * dx + (py - ay) * dy) / den
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
    qx = ax + t * dx
    qy = ay + t * dy
    return math.sqrt((px - qx) * (px - qx) + (py - qy) * (py - qy)), qx, qy


def _orient(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def seg_intersect(ax, ay, bx, by, cx, cy, dx, dy, eps):
    d1 = _orient(cx, cy, dx, dy, ax, ay)
    d2 = _orient(cx, cy, dx, dy, bx, by)
    d3 = _orient(ax, ay, bx, by, cx, cy)
    d4 = _orient(ax, ay, bx, by, dx, dy)
    if ((d1 > 0.0 and d2 < 0.0) or (d1 < 0.0 and d2 > 0.0)) and (
        (d3 > 0.0 and d4 < 0.0) or (d3 < 0.0 and d4 > 0.0)
    ):
        return True
    if _psd(ax, ay, cx, cy, dx, dy)[0] <= eps:
        return True
    if _psd(bx, by, cx, cy, dx, dy)[0] <= eps:
        return True
    if _psd(cx, cy, ax, ay, bx, by)[0] <= eps:
        return True
    return _psd(dx, dy, ax, ay, bx, by)[0] <= eps


def seg_param(ax, ay, bx, by, cx, cy, dx, dy):
    rx = bx - ax
    ry = by - ay
    sx = dx - cx
    sy = dy - cy
    den = rx * sy - ry * sx
    ln2 = rx * rx + ry * ry
    if ln2 == 0.0:
        return 0.0
    if abs(den) > 1e-12 * math.sqrt(ln2 * (sx * sx + sy * sy)):
        t = ((cx - ax) * sy - (cy - ay) * sx) / den
    else:
        tc = ((cx - ax) * rx + (cy - ay) * ry) / ln2
        td = ((dx - ax) * rx + (dy - ay) * ry) / ln2
        t = tc if tc < td else td
    if t < 0.0:
        return 0.0
    if t > 1.0:
        return 1.0
    return t


def gate_hit(x1, y1, z1, x2, y2, z2, ax, ay, bx, by, hlo, hhi, eps):
    """Segment crosses the vertical rectangle over ab between hlo and hhi."""
    lo = hlo - eps
    hi = hhi + eps
    rx = x2 - x1
    ry = y2 - y1
    ln2 = rx * rx + ry * ry
    if ln2 <= eps * eps:
        if _psd(x1, y1, ax, ay, bx, by)[0] > eps:
            return False
        return min(z1, z2) <= hi and max(z1, z2) >= lo
    if not seg_intersect(x1, y1, x2, y2, ax, ay, bx, by, eps):
        return False
    sx = bx - ax
    sy = by - ay
    den = rx * sy - ry * sx
    if abs(den) > 1e-12 * math.sqrt(ln2 * (sx * sx + sy * sy)):
        t = ((ax - x1) * sy - (ay - y1) * sx) / den
        t = min(1.0, max(0.0, t))
        z = z1 + t * (z2 - z1)
        return lo <= z <= hi
    ta = ((ax - x1) * rx + (ay - y1) * ry) / ln2
    tb = ((bx - x1) * rx + (by - y1) * ry) / ln2
    t0 = max(0.0, min(ta, tb))
    t1 = min(1.0, max(ta, tb))
    if t1 < t0:
        t0 = t1 = min(1.0, max(0.0, t0))
    za = z1 + t0 * (z2 - z1)
    zb = z1 + t1 * (z2 - z1)
    return min(za, zb) <= hi and max(za, zb) >= lo


def geodesic_reach(indptr, indices, k):
    """Sorted CSR rows of all nodes within k edges of each node (itself included)."""
    n = len(indptr) - 1
    ip = [int(v) for v in indptr]
    ix = [int(v) for v in indices]
    out_ptr = [0]
    out = []
    for i in range(n):
        seen = {i}
        frontier = [i]
        for _ in range(k):
            nxt = []
            for u in frontier:
                for v in ix[ip[u] : ip[u + 1]]:
                    if v not in seen:
                        seen.add(v)
                        nxt.append(v)
            frontier = nxt
        out.extend(sorted(seen))
        out_ptr.append(len(out))
    return np.array(out_ptr, dtype=np.int64), np.array(out, dtype=np.int64)


def _project(xs, ys, ax, ay):
    lo = math.inf
    hi = -math.inf
    for k in range(len(xs)):
        s = xs[k] * ax + ys[k] * ay
        if s < lo:
            lo = s
        if s > hi:
            hi = s
    return lo, hi


def _sep_axis(axs, ays, bxs, bys, ax, ay):
    alo, ahi = _project(axs, ays, ax, ay)
    blo, bhi = _project(bxs, bys, ax, ay)
    g1 = blo - ahi
    g2 = alo - bhi
    return g1 if g1 > g2 else g2


class PolySet:
    """Obstacle footprints (convex, counter-clockwise) with heights."""

    def __init__(self, verts, offsets, heights, eps):
        verts = np.asarray(verts, dtype=np.float64)
        offsets = np.asarray(offsets, dtype=np.int64)
        self.m = len(offsets) - 1
        self.eps = float(eps)
        self.xs = []
        self.ys = []
        self.nx = []
        self.ny = []
        self.bbox = []
        self.h = [float(v) for v in np.asarray(heights, dtype=np.float64)]
        for i in range(self.m):
            seg = verts[offsets[i] : offsets[i + 1]]
            xs = [float(v) for v in seg[:, 0]]
            ys = [float(v) for v in seg[:, 1]]
            n = len(xs)
            nx = []
            ny = []
            for k in range(n):
                ex = xs[(k + 1) % n] - xs[k]
                ey = ys[(k + 1) % n] - ys[k]
                ln = math.sqrt(ex * ex + ey * ey)
                nx.append(ey / ln)
                ny.append(-ex / ln)
            self.xs.append(xs)
            self.ys.append(ys)
            self.nx.append(nx)
            self.ny.append(ny)
            self.bbox.append((min(xs), min(ys), max(xs), max(ys)))

    # -- collision -----------------------------------------------------

    def _clip(self, i, x1, y1, x2, y2):
        """Parameter interval of segment inside obstacle i (eps-inflated), or None."""
        xs = self.xs[i]
        ys = self.ys[i]
        nx = self.nx[i]
        ny = self.ny[i]
        eps = self.eps
        dx = x2 - x1
        dy = y2 - y1
        t0 = 0.0
        t1 = 1.0
        for k in range(len(xs)):
            num = nx[k] * (x1 - xs[k]) + ny[k] * (y1 - ys[k]) - eps
            den = nx[k] * dx + ny[k] * dy
            if den == 0.0:
                if num > 0.0:
                    return None
            elif den > 0.0:
                t = -num / den
                if t < t1:
                    t1 = t
            else:
                t = -num / den
                if t > t0:
                    t0 = t
            if t0 > t1:
                return None
        return t0, t1

    def segment_hit(self, x1, y1, x2, y2):
        eps = self.eps
        lox = min(x1, x2) - eps
        hix = max(x1, x2) + eps
        loy = min(y1, y2) - eps
        hiy = max(y1, y2) + eps
        for i in range(self.m):
            b = self.bbox[i]
            if b[0] > hix or b[2] < lox or b[1] > hiy or b[3] < loy:
                continue
            if self._clip(i, x1, y1, x2, y2) is not None:
                return i
        return -1

    def segment_free(self, x1, y1, x2, y2):
        return self.segment_hit(x1, y1, x2, y2) < 0

    def segment_hit3(self, x1, y1, z1, x2, y2, z2):
        eps = self.eps
        lox = min(x1, x2) - eps
        hix = max(x1, x2) + eps
        loy = min(y1, y2) - eps
        hiy = max(y1, y2) + eps
        zlo = min(z1, z2)
        for i in range(self.m):
            b = self.bbox[i]
            if b[0] > hix or b[2] < lox or b[1] > hiy or b[3] < loy:
                continue
            if zlo > self.h[i] + eps:
                continue
            iv = self._clip(i, x1, y1, x2, y2)
            if iv is None:
                continue
            za = z1 + iv[0] * (z2 - z1)
            zb = z1 + iv[1] * (z2 - z1)
            if min(za, zb) <= self.h[i] + eps:
                return i
        return -1

    def segment_free3(self, x1, y1, z1, x2, y2, z2):
        return self.segment_hit3(x1, y1, z1, x2, y2, z2) < 0

    def point_free(self, x, y):
        return self.segment_hit(x, y, x, y) < 0

    def point_free3(self, x, y, z):
        return self.segment_hit3(x, y, z, x, y, z) < 0

    def _poly_dist(self, i, x, y):
        xs = self.xs[i]
        ys = self.ys[i]
        n = len(xs)
        inside = True
        for k in range(n):
            if self.nx[i][k] * (x - xs[k]) + self.ny[i][k] * (y - ys[k]) > 0.0:
                inside = False
                break
        if inside:
            return 0.0
        best = math.inf
        for k in range(n):
            d = _psd(x, y, xs[k], ys[k], xs[(k + 1) % n], ys[(k + 1) % n])[0]
            if d < best:
                best = d
        return best

    def clearance(self, x, y):
        best = math.inf
        for i in range(self.m):
            b = self.bbox[i]
            # a lower bound from the bounding box prunes most obstacles
            ddx = max(b[0] - x, 0.0, x - b[2])
            ddy = max(b[1] - y, 0.0, y - b[3])
            if ddx * ddx + ddy * ddy >= best * best:
                continue
            d = self._poly_dist(i, x, y)
            if d < best:
                best = d
        return best

    def clearance3(self, x, y, z):
        best = math.inf
        for i in range(self.m):
            b = self.bbox[i]
            ddx = max(b[0] - x, 0.0, x - b[2])
            ddy = max(b[1] - y, 0.0, y - b[3])
            ddz = max(0.0, z - self.h[i])
            if ddx * ddx + ddy * ddy + ddz * ddz >= best * best:
                continue
            d = self._poly_dist(i, x, y)
            if ddz > 0.0:
                d = math.sqrt(d * d + ddz * ddz)
            if d < best:
                best = d
        return best

    # -- obstacle distance and the Gabriel test --------------------------

    def distance(self, i, j):
        xi = self.xs[i]
        yi = self.ys[i]
        xj = self.xs[j]
        yj = self.ys[j]
        ni = len(xi)
        nj = len(xj)
        cands = []
        for a in range(ni):
            for k in range(nj):
                d, qx, qy = _psd(xi[a], yi[a], xj[k], yj[k], xj[(k + 1) % nj], yj[(k + 1) % nj])
                cands.append((d, xi[a], yi[a], qx, qy))
        for a in range(nj):
            for k in range(ni):
                d, qx, qy = _psd(xj[a], yj[a], xi[k], yi[k], xi[(k + 1) % ni], yi[(k + 1) % ni])
                cands.append((d, qx, qy, xj[a], yj[a]))
        dmin = math.inf
        scale = 0.0
        for c in cands:
            if c[0] < dmin:
                dmin = c[0]
            s = abs(c[1]) + abs(c[2])
            if s > scale:
                scale = s
        tol = 1e-12 * (1.0 + dmin) + 1e-12 * scale
        close = [c for c in cands if c[0] <= dmin + tol]
        if len(close) == 1:
            c = close[0]
            return c[1], c[2], c[3], c[4], dmin
        if dmin > 0.0:
            c0 = close[0]
            ex = (c0[3] - c0[1]) / c0[0]
            ey = (c0[4] - c0[2]) / c0[0]
            nx = -ey
            ny = ex
            lo = c0
            hi = c0
            aligned = True
            for c in close:
                dx = c[3] - c[1]
                dy = c[4] - c[2]
                if abs(dx * ey - dy * ex) > 1e-9 * (1.0 + dmin):
                    aligned = False
                    break
                s = c[1] * nx + c[2] * ny
                if s < lo[1] * nx + lo[2] * ny:
                    lo = c
                if s > hi[1] * nx + hi[2] * ny:
                    hi = c
            if aligned:
                return (
                    0.5 * (lo[1] + hi[1]),
                    0.5 * (lo[2] + hi[2]),
                    0.5 * (lo[3] + hi[3]),
                    0.5 * (lo[4] + hi[4]),
                    dmin,
                )
        best = None
        bkey = None
        for c in close:
            p = (c[1], c[2])
            q = (c[3], c[4])
            key = (p, q) if p <= q else (q, p)
            if bkey is None or key < bkey:
                bkey = key
                best = c
        return best[1], best[2], best[3], best[4], dmin

    def _rect(self, i, j, pix, piy, pjx, pjy, d):
        ex = (pjx - pix) / d
        ey = (pjy - piy) / d
        nx = -ey
        ny = ex
        a1, b1 = _project(self.xs[i], self.ys[i], nx, ny)
        a2, b2 = _project(self.xs[j], self.ys[j], nx, ny)
        lo = a1 if a1 > a2 else a2
        hi = b1 if b1 < b2 else b2
        if hi < lo:
            lo = hi = pix * nx + piy * ny
        s0 = pix * ex + piy * ey
        s1 = pjx * ex + pjy * ey
        rx = [s0 * ex + lo * nx, s1 * ex + lo * nx, s1 * ex + hi * nx, s0 * ex + hi * nx]
        ry = [s0 * ey + lo * ny, s1 * ey + lo * ny, s1 * ey + hi * ny, s0 * ey + hi * ny]
        return rx, ry, ex, ey

    def _hits(self, k, cx, cy, r, rx, ry, ex, ey, bb):
        """Obstacle k meets the disc (cx, cy, r) or the rectangle (rx, ry)."""
        eps = self.eps
        b = self.bbox[k]
        if b[0] > bb[2] + eps or b[2] < bb[0] - eps or b[1] > bb[3] + eps or b[3] < bb[1] - eps:
            return False
        if self._poly_dist(k, cx, cy) <= r + eps:
            return True
        xs = self.xs[k]
        ys = self.ys[k]
        best = _sep_axis(rx, ry, xs, ys, ex, ey)
        g = _sep_axis(rx, ry, xs, ys, -ey, ex)
        if g > best:
            best = g
        if best > eps:
            return False
        for a in range(len(xs)):
            g = _sep_axis(rx, ry, xs, ys, self.nx[k][a], self.ny[k][a])
            if g > eps:
                return False
        return True

    def _pair_setup(self, i, j):
        pix, piy, pjx, pjy, d = self.distance(i, j)
        if d <= self.eps:
            return None
        rx, ry, ex, ey = self._rect(i, j, pix, piy, pjx, pjy, d)
        cx = 0.5 * (pix + pjx)
        cy = 0.5 * (piy + pjy)
        r = 0.5 * d
        bb = (
            min(cx - r, min(rx)),
            min(cy - r, min(ry)),
            max(cx + r, max(rx)),
            max(cy + r, max(ry)),
        )
        return (pix, piy, pjx, pjy, d, rx, ry, ex, ey, cx, cy, r, bb)

    def blocks(self, i, j, k):
        """Obstacle k meets the augmented Gabriel region of pair (i, j)."""
        st = self._pair_setup(i, j)
        if st is None:
            return False
        _, _, _, _, _, rx, ry, ex, ey, cx, cy, r, bb = st
        return self._hits(k, cx, cy, r, rx, ry, ex, ey, bb)

    def _tester(self, k, i, j, st, hbar, hl):
        """Returns (invalidates, new lower bound)."""
        if k == i or k == j:
            return False, hl
        if self.h[k] < hbar and self.h[k] <= hl:
            return False, hl
        _, _, _, _, _, rx, ry, ex, ey, cx, cy, r, bb = st
        if self._hits(k, cx, cy, r, rx, ry, ex, ey, bb):
            if self.h[k] >= hbar:
                return True, hl
            return False, self.h[k]
        return False, hl

    def check_pairs(self, ii, jj, tptr, tidx, mode):
        """Gabriel test for candidate pairs.

        ``mode`` picks the testers of pair p: 0 uses ``tidx[tptr[p]:tptr[p+1]]``,
        1 uses every obstacle, 2 uses the union of rows i and j of the sorted
        CSR neighbor lists ``(tptr, tidx)``.  A tester blocks when it meets the
        augmented region; blockers at least as tall as the lower of the pair
        invalidate it, shorter ones raise the lower height bound.

        Returns lists (status, d, pix, piy, pjx, pjy, hlow) with status 1 valid,
        0 invalid and 2 degenerate (touching pair).
        """
        n = len(ii)
        status = [0] * n
        dd = [0.0] * n
        pix_ = [0.0] * n
        piy_ = [0.0] * n
        pjx_ = [0.0] * n
        pjy_ = [0.0] * n
        hlow = [0.0] * n
        for p in range(n):
            i = int(ii[p])
            j = int(jj[p])
            st = self._pair_setup(i, j)
            if st is None:
                status[p] = 2
                pix, piy, pjx, pjy, d = self.distance(i, j)
                dd[p] = d
                pix_[p], piy_[p], pjx_[p], pjy_[p] = pix, piy, pjx, pjy
                continue
            pix, piy, pjx, pjy, d = st[:5]
            dd[p] = d
            pix_[p], piy_[p], pjx_[p], pjy_[p] = pix, piy, pjx, pjy
            hbar = min(self.h[i], self.h[j])
            valid = 1
            hl = 0.0
            if mode == 1:
                testers = range(self.m)
            elif mode == 0:
                testers = [int(t) for t in tidx[tptr[p] : tptr[p + 1]]]
            else:
                row_i = [int(t) for t in tidx[tptr[i] : tptr[i + 1]]]
                row_j = [int(t) for t in tidx[tptr[j] : tptr[j + 1]]]
                testers = sorted(set(row_i) | set(row_j))
            for k in testers:
                bad, hl = self._tester(k, i, j, st, hbar, hl)
                if bad:
                    valid = 0
                    break
            status[p] = valid
            hlow[p] = hl if valid else 0.0
        return status, dd, pix_, piy_, pjx_, pjy_, hlow


class PassageSet:
    """All passage segments; the brute-force traversal check."""

    def __init__(self, ax, ay, bx, by, hlo, hhi, eps):
        self.ax = [float(v) for v in ax]
        self.ay = [float(v) for v in ay]
        self.bx = [float(v) for v in bx]
        self.by = [float(v) for v in by]
        self.hlo = [float(v) for v in hlo]
        self.hhi = [float(v) for v in hhi]
        self.n = len(self.ax)
        self.eps = float(eps)

    def crossings(self, x1, y1, x2, y2):
        found = []
        for p in range(self.n):
            if seg_intersect(x1, y1, x2, y2, self.ax[p], self.ay[p], self.bx[p], self.by[p], self.eps):
                t = seg_param(x1, y1, x2, y2, self.ax[p], self.ay[p], self.bx[p], self.by[p])
                found.append((t, p))
        found.sort()
        return tuple(p for _, p in found)

    def crossings3(self, x1, y1, z1, x2, y2, z2):
        found = []
        for p in range(self.n):
            if gate_hit(
                x1, y1, z1, x2, y2, z2,
                self.ax[p], self.ay[p], self.bx[p], self.by[p], self.hlo[p], self.hhi[p], self.eps,
            ):
                t = seg_param(x1, y1, x2, y2, self.ax[p], self.ay[p], self.bx[p], self.by[p])
                found.append((t, p))
        found.sort()
        return tuple(p for _, p in found)


class CellWalker:
    """Cell adjacency walk along an edge plus point location.

    Sides of cell c are ``side_*[sptr[c]:sptr[c+1]]``: segment endpoints,
    neighbor cell, passage id (-1 for obstacle arcs) and kind.  Virtual sides
    of c are passage ids ``vpid[vptr[c]:vptr[c+1]]``; gate geometry of every
    passage is given by ``g*`` arrays.  Rings of cell c are
    ``rptr[c]:rptr[c+1]`` into ring vertex ranges ``rv[r]:rv[r+1]``.
    """

    def __init__(self, sptr, sax, say, sbx, sby, snb, spid, skind, vptr, vpid,
                 gax, gay, gbx, gby, ghlo, ghhi, rptr, rv, rx, ry, eps, max_steps):
        self.sptr = [int(v) for v in sptr]
        self.sax = [float(v) for v in sax]
        self.say = [float(v) for v in say]
        self.sbx = [float(v) for v in sbx]
        self.sby = [float(v) for v in sby]
        self.snb = [int(v) for v in snb]
        self.spid = [int(v) for v in spid]
        self.skind = [int(v) for v in skind]
        self.vptr = [int(v) for v in vptr]
        self.vpid = [int(v) for v in vpid]
        self.gax = [float(v) for v in gax]
        self.gay = [float(v) for v in gay]
        self.gbx = [float(v) for v in gbx]
        self.gby = [float(v) for v in gby]
        self.ghlo = [float(v) for v in ghlo]
        self.ghhi = [float(v) for v in ghhi]
        self.rptr = [int(v) for v in rptr]
        self.rv = [int(v) for v in rv]
        self.rx = [float(v) for v in rx]
        self.ry = [float(v) for v in ry]
        self.ncell = len(self.sptr) - 1
        self.eps = float(eps)
        self.max_steps = int(max_steps)
        self.cbox = []
        for c in range(self.ncell):
            lox = loy = math.inf
            hix = hiy = -math.inf
            for r in range(self.rptr[c], self.rptr[c + 1]):
                for v in range(self.rv[r], self.rv[r + 1]):
                    lox = min(lox, self.rx[v])
                    hix = max(hix, self.rx[v])
                    loy = min(loy, self.ry[v])
                    hiy = max(hiy, self.ry[v])
            self.cbox.append((lox, loy, hix, hiy))

    def _step(self, cell, x1, y1, x2, y2, tcur, tarc, last_pid, last_side, arcs):
        best_t = math.inf
        best = -1
        for s in range(self.sptr[cell], self.sptr[cell + 1]):
            kind = self.skind[s]
            if kind == KIND_ARC and not arcs:
                continue
            pid = self.spid[s]
            if pid >= 0 and pid == last_pid:
                continue
            if s == last_side:
                continue
            if not seg_intersect(x1, y1, x2, y2, self.sax[s], self.say[s], self.sbx[s], self.sby[s], self.eps):
                continue
            t = seg_param(x1, y1, x2, y2, self.sax[s], self.say[s], self.sbx[s], self.sby[s])
            if t < tcur or t >= best_t:
                continue
            # an arc is only crossed strictly after the previous crossing, so a
            # walk cannot bounce between an obstacle cell and its neighbour
            if pid < 0 and t <= tarc:
                continue
            best_t = t
            best = s
        return best, best_t

    def walk(self, cell, x1, y1, x2, y2):
        """End cell and passage ids crossed (in order) by the 2D edge."""
        crossed = []
        tcur = 0.0
        last_pid = -1
        for _ in range(self.max_steps):
            s, t = self._step(cell, x1, y1, x2, y2, tcur, -1.0, last_pid, -1, False)
            if s < 0:
                return cell, tuple(crossed)
            crossed.append(self.spid[s])
            last_pid = self.spid[s]
            tcur = t
            cell = self.snb[s]
            if cell < 0:
                return -1, tuple(crossed)
        raise WalkStuck("cell walk exceeded its step budget")

    def _walk_proj(self, cell, x1, y1, x2, y2):
        """Projected walk crossing both passage and arc sides.

        Returns the end cell, the visited cells and the crossed sides.
        """
        visited = [cell]
        sides = []
        tcur = 0.0
        last_pid = -1
        last_side = -1
        tarc = -1.0
        for _ in range(self.max_steps):
            s, t = self._step(cell, x1, y1, x2, y2, tcur, tarc, last_pid, last_side, True)
            if s < 0:
                return cell, visited, sides
            sides.append(s)
            last_pid = self.spid[s]
            tcur = t
            tarc = t
            nb = self.snb[s]
            if nb < 0:
                return -1, visited, sides
            # the twin of an arc side in the neighbor must not be re-crossed
            last_side = self._twin(nb, s) if last_pid < 0 else -1
            cell = nb
            visited.append(cell)
        raise WalkStuck("cell walk exceeded its step budget")

    def _twin(self, cell, s):
        ax, ay, bx, by = self.sax[s], self.say[s], self.sbx[s], self.sby[s]
        for u in range(self.sptr[cell], self.sptr[cell + 1]):
            if self.spid[u] < 0 and self.sax[u] == ax and self.say[u] == ay and self.sbx[u] == bx and self.sby[u] == by:
                return u
        return -1

    def cells_along(self, cell, x1, y1, x2, y2):
        return tuple(self._walk_proj(cell, x1, y1, x2, y2)[1])

    def walk3(self, cell, x1, y1, z1, x2, y2, z2):
        """End cell (of the projection) and passages whose gates the edge crosses."""
        end, visited, sides = self._walk_proj(cell, x1, y1, x2, y2)
        eps = self.eps
        found = []
        seen = set()
        for s in sides:
            pid = self.spid[s]
            if pid < 0 or pid in seen:
                continue
            seen.add(pid)
            if gate_hit(x1, y1, z1, x2, y2, z2, self.gax[pid], self.gay[pid], self.gbx[pid], self.gby[pid],
                        self.ghlo[pid], self.ghhi[pid], eps):
                t = seg_param(x1, y1, x2, y2, self.gax[pid], self.gay[pid], self.gbx[pid], self.gby[pid])
                found.append((t, pid))
        for c in visited:
            for v in range(self.vptr[c], self.vptr[c + 1]):
                pid = self.vpid[v]
                if pid in seen:
                    continue
                seen.add(pid)
                if gate_hit(x1, y1, z1, x2, y2, z2, self.gax[pid], self.gay[pid], self.gbx[pid], self.gby[pid],
                            self.ghlo[pid], self.ghhi[pid], eps):
                    t = seg_param(x1, y1, x2, y2, self.gax[pid], self.gay[pid], self.gbx[pid], self.gby[pid])
                    found.append((t, pid))
        found.sort()
        return end, tuple(p for _, p in found)

    def locate(self, x, y):
        """Lowest-id cell whose closed boundary contains the point, or -1."""
        eps = self.eps
        for c in range(self.ncell):
            b = self.cbox[c]
            if x < b[0] - eps or x > b[2] + eps or y < b[1] - eps or y > b[3] + eps:
                continue
            wn = 0
            on = False
            for r in range(self.rptr[c], self.rptr[c + 1]):
                v0 = self.rv[r]
                v1 = self.rv[r + 1]
                n = v1 - v0
                for k in range(n):
                    xa = self.rx[v0 + k]
                    ya = self.ry[v0 + k]
                    xb = self.rx[v0 + (k + 1) % n]
                    yb = self.ry[v0 + (k + 1) % n]
                    if _psd(x, y, xa, ya, xb, yb)[0] <= eps:
                        on = True
                        break
                    if ya <= y:
                        if yb > y and (xb - xa) * (y - ya) - (x - xa) * (yb - ya) > 0.0:
                            wn += 1
                    elif yb <= y and (xb - xa) * (y - ya) - (x - xa) * (yb - ya) < 0.0:
                        wn -= 1
                if on:
                    break
            if on or wn != 0:
                return c
        return -1
